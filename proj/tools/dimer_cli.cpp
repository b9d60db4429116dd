// Command-line front end: tensors, resonance, solve, farfield, sweep, oracle.

#include "dimer/harness/config.hpp"
#include "dimer/harness/run.hpp"
#include "dimer/oracle/dump.hpp"
#include "dimer/oracle/spectra.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

using namespace dimer;
using namespace dimer::harness;

namespace {

std::string fmt17(double v) { return fmt(v); }

void print_tensor(std::ostream& os, const char* name, const char* closed, const Dyadic3& t)
{
    os << name;
    if (closed) os << " = " << closed;
    os << '\n';
    for (int i = 0; i < 3; ++i) {
        os << "  [";
        for (int j = 0; j < 3; ++j) os << (j ? ", " : "") << fmt17(t(i, j).real());
        os << "]\n";
    }
}

void write_text(const std::string& path, const std::string& text)
{
    if (path.empty()) return;
    if (path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream os(path, std::ios::binary);
    if (!os) throw InputError("cannot write " + path);
    os << text;
}

RunConfig config_or_default(const std::string& path) { return path.empty() ? parse_config("") : load_config(path); }

int exit_code(const std::exception& e)
{
    if (dynamic_cast<const RegimeViolation*>(&e)) return 3;
    if (dynamic_cast<const InputError*>(&e)) return 2;
    return 4;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Dimer far-field model, Foldy-Lax solver and volume-integral reference"};
    app.require_subcommand(1);
    std::string config_path, csv_path = "-", json_path;
    bool force = false;

    auto* tensors = app.add_subcommand("tensors", "print the four polarization tensors");
    std::string source = "ball";
    int resolution = 24;
    std::string spectra_dump;
    tensors->add_option("--source", source, "ball or oracle")->check(CLI::IsMember({"ball", "oracle"}));
    tensors->add_option("-n,--resolution", resolution, "oracle cells per axis");
    tensors->add_option("--dump", spectra_dump, "write the oracle spectral data to this file");

    auto* resonance = app.add_subcommand("resonance", "print k, damping and resonance residuals");
    auto* solve = app.add_subcommand("solve", "solve the Foldy-Lax system for one configuration");
    auto* farfield = app.add_subcommand("farfield", "far-field samples on a direction grid");
    auto* sweep = app.add_subcommand("sweep", "convergence sweep over a");
    auto* oracle_cmd = app.add_subcommand("oracle", "volume-integral reference far field and comparison");
    for (auto* sc : {resonance, solve, farfield, sweep, oracle_cmd}) {
        sc->add_option("config", config_path, "configuration file")->required();
        sc->add_flag("--force", force, "run even when the regime condition fails");
    }
    for (auto* sc : {farfield, sweep, oracle_cmd}) {
        sc->add_option("--csv", csv_path, "CSV output path ('-' for stdout)");
        sc->add_option("--json", json_path, "summary JSON output path");
    }
    solve->add_option("--json", json_path, "summary JSON output path ('-' for stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (*tensors) {
            if (source == "ball") {
                const PolarizationTensors pt = ball_tensors();
                print_tensor(std::cout, "P011", "(12/pi^3) I3", pt.p011);
                print_tensor(std::cout, "P012", "(4 pi) I3", pt.p012);
                print_tensor(std::cout, "P021", "(2 pi/15) I3", pt.p021);
                print_tensor(std::cout, "P022", "(4 pi/27) I3", pt.p022);
                return 0;
            }
            oracle::SpectraReport rep;
            const SpectralData s = oracle::extract_spectra(Shape::ball(), resolution, {}, &rep);
            if (!spectra_dump.empty()) oracle::dump_spectra(spectra_dump, s, resolution);
            TensorReport tr;
            const PolarizationTensors pt = tensors_from_spectra(s, s, {}, &tr);
            std::cout << "oracle unit ball, n = " << resolution << ", lambda_n0 = " << fmt17(s.lambda1[tr.n0].lambda)
                      << ", lambda_nstar = " << fmt17(s.lambda3[tr.nstar].lambda) << "\n";
            print_tensor(std::cout, "P011", nullptr, pt.p011);
            print_tensor(std::cout, "P012", nullptr, pt.p012);
            print_tensor(std::cout, "P021", nullptr, pt.p021);
            print_tensor(std::cout, "P022", nullptr, pt.p022);
            for (const auto& w : tr.warnings) std::cerr << "warning: " << w << '\n';
            return 0;
        }

        const RunConfig cfg = config_or_default(config_path);
        const std::string hash = provenance_hash(cfg.text);

        if (*resonance) {
            const SpectralSource src = spectral_source(cfg);
            const Resolved r = resolve(cfg, cfg.geometry.a, src, force);
            std::cout << "k = " << fmt17(r.k) << '\n';
            if (cfg.material.mode == MaterialMode::Lorentz) {
                std::cout << "xi1 = " << fmt17(r.lorentz1.xi) << '\n';
                std::cout << "xi2 = " << fmt17(r.lorentz2.xi) << '\n';
                std::cout << "k02 = " << fmt17(r.lorentz2.k0) << '\n';
            }
            std::cout << "eta1 = " << fmt17(r.eta1.real()) << " " << fmt17(r.eta1.imag()) << "i\n";
            std::cout << "eta2 = " << fmt17(r.eta2.real()) << " " << fmt17(r.eta2.imag()) << "i\n";
            std::cout << "dielectric residual = " << fmt17(std::abs(r.residuals.dielectric)) << '\n';
            std::cout << "plasmonic residual = " << fmt17(std::abs(r.residuals.plasmonic)) << '\n';
            return 0;
        }
        if (*solve) {
            const RunResult r = run_config(cfg, force);
            write_text(json_path.empty() ? "-" : json_path, run_summary(r, hash).dump(2) + "\n");
            return 0;
        }
        if (*farfield) {
            const RunResult r = run_config(cfg, force);
            std::ostringstream csv;
            write_far_field_csv(csv, r.directions, r.far_field, hash);
            write_text(csv_path, csv.str());
            write_text(json_path, run_summary(r, hash).dump(2) + "\n");
            return 0;
        }
        if (*sweep) {
            const SweepResult s = run_sweep(cfg, force);
            std::ostringstream csv;
            write_sweep_csv(csv, s, hash);
            write_text(csv_path, csv.str());
            write_text(json_path, sweep_summary(s, hash).dump(2) + "\n");
            return 0;
        }
        if (*oracle_cmd) {
            const RunResult r = run_config(cfg, force);
            const OracleRun o = run_oracle_far_field(r.resolved, cfg.oracle.resolution, cfg.oracle.tolerance, r.directions);
            std::ostringstream csv;
            write_far_field_csv(csv, r.directions, o.far_field, hash);
            write_text(csv_path, csv.str());
            nlohmann::json j = run_summary(r, hash);
            j["oracle"] = {{"resolution", cfg.oracle.resolution},
                           {"cells", o.cells},
                           {"iterations", o.report.iterations},
                           {"residual", o.report.residual},
                           {"condition_estimate", o.report.condition_estimate},
                           {"volume_error", o.volume_error},
                           {"foldy_relative_error", relative_far_field_error(r.far_field, o.far_field)}};
            write_text(json_path, j.dump(2) + "\n");
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_code(e);
    }
    return 0;
}
