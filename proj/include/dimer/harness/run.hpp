#pragma once

// Single runs, convergence sweeps and oracle comparisons driven by a RunConfig.

#include "dimer/errors.hpp"
#include "dimer/fields.hpp"
#include "dimer/foldy_lax.hpp"
#include "dimer/harness/config.hpp"
#include "dimer/incident.hpp"
#include "dimer/materials.hpp"
#include "dimer/oracle/ls.hpp"
#include "dimer/oracle/spectra.hpp"
#include "dimer/tensors.hpp"

#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace dimer::harness {

inline constexpr const char* version = "dimer 1.0.0";
inline constexpr const char* csv_schema = "v1";

/// Tensors and the two selected eigenvalues, from closed forms or the oracle.
struct SpectralSource {
    PolarizationTensors pt;
    double lambda_n0 = ball_lambda_n0;
    double lambda_nstar = ball_lambda_nstar;
    std::string origin = "ball";
    std::vector<std::string> warnings;
};

inline SpectralSource spectral_source(const RunConfig& c)
{
    SpectralSource s;
    const bool balls = c.geometry.shape1.is_ball() && c.geometry.shape2.is_ball();
    if (c.tensors.source == TensorSource::Ball) {
        if (!balls) throw ConfigError("closed-form tensors require ball shapes", 0, "tensors.source");
        s.pt = ball_tensors();
        return s;
    }
    const int n = c.tensors.resolution;
    const SpectralData s1 = oracle::extract_spectra(c.geometry.shape1, n);
    const SpectralData s2 = c.geometry.shape2.describe() == c.geometry.shape1.describe()
                                ? s1
                                : oracle::extract_spectra(c.geometry.shape2, n);
    TensorReport rep;
    s.pt = tensors_from_spectra(s1, s2, {}, &rep);
    s.lambda_n0 = s1.lambda1[static_cast<std::size_t>(rep.n0)].lambda;
    s.lambda_nstar = s2.lambda3[static_cast<std::size_t>(rep.nstar)].lambda;
    s.origin = "oracle(n=" + std::to_string(n) + ")";
    s.warnings = rep.warnings;
    return s;
}

/// Everything needed to evaluate the models at one scale a.
struct Resolved {
    DimerConfig cfg;
    MaterialContrast mc;
    IncidentWave wave;
    double k = 0;
    cplx eta1{0, 0};
    cplx eta2{0, 0};
    RegimeReport regime;
    ResonanceResiduals residuals{};
    LorentzParams lorentz1;
    LorentzParams lorentz2;
};

inline Resolved resolve(const RunConfig& c, double a, const SpectralSource& src, bool force)
{
    Resolved r;
    const auto& g = c.geometry;
    r.cfg = DimerConfig::symmetric(a, g.t, g.h, g.alpha0, g.axis, g.center);
    r.cfg.shape1 = g.shape1;
    r.cfg.shape2 = g.shape2;
    r.cfg.branch = c.material.branch;
    r.cfg.validate();
    r.regime = check_regime(r.cfg);
    if (!r.regime.ok && !force)
        throw RegimeViolation("4 - h - 4t = " + std::to_string(r.regime.margin) + " <= 0; rerun with --force to override");

    const auto& m = c.material;
    const double ah = std::pow(a, g.h);
    const double s = m.branch;
    r.mc.branch = m.branch;
    switch (m.mode) {
    case MaterialMode::Contrast:
        r.k = c.wave.k;
        r.mc.eta0 = m.eta0;
        r.mc.eta2 = m.eta2;
        r.mc.c0 = m.c0;
        r.mc.d0 = m.d0;
        break;
    case MaterialMode::Resonant:
        r.k = c.wave.k;
        r.mc.c0 = m.c0;
        r.mc.d0 = m.d0;
        r.mc.eta0 = (1.0 - s * m.c0 * ah) / (r.k * r.k * src.lambda_n0);
        r.mc.eta2 = (s * m.d0 * ah - 1.0) / src.lambda_nstar;
        break;
    case MaterialMode::Detuned:
        if (!(m.detuning > 0 && m.detuning < 1)) throw ConfigError("detuning must lie in (0, 1)", 0, "material.detuning");
        r.k = c.wave.k;
        r.mc.eta0 = (1.0 - s * m.detuning) / (r.k * r.k * src.lambda_n0);
        r.mc.eta2 = (s * m.detuning - 1.0) / src.lambda_nstar;
        r.mc.c0 = m.detuning / ah;
        r.mc.d0 = m.detuning / ah;
        break;
    case MaterialMode::Lorentz: {
        r.mc.c0 = m.c0;
        r.mc.d0 = m.d0;
        r.lorentz1 = m.lorentz1;
        const ResonanceResult d = dielectric_resonance_k(a, g.h, m.c0, m.branch, m.lorentz1, src.lambda_n0);
        r.k = d.k;
        r.lorentz1.xi = d.xi;
        r.lorentz2.kp = m.kp2;
        r.lorentz2.k0 = matched_plasmonic_k0(r.k, a, g.h, m.d0, m.branch, m.kp2, src.lambda_nstar);
        const ResonanceResult p = plasmonic_resonance_k(a, g.h, m.d0, m.branch, r.lorentz2, src.lambda_nstar, &r.lorentz1);
        r.lorentz2.xi = p.xi;
        r.mc.eta0 = (lorentz_permittivity(r.k, r.lorentz1) - 1.0) * (a * a);
        r.mc.eta2 = lorentz_permittivity(r.k, r.lorentz2) - 1.0;
        break;
    }
    }
    if (!(r.k > 0)) throw ZeroWavenumber("wavenumber must be positive");
    const auto [e1, e2] = eta_contrasts(a, r.mc);
    r.eta1 = e1;
    r.eta2 = e2;
    r.residuals = resonance_residuals(r.k, a, g.h, e1, e2, r.mc.c0, r.mc.d0, m.branch, src.lambda_n0, src.lambda_nstar);

    r.wave.theta = c.wave.direction.normalized();
    r.wave.p = c.wave.polarization.normalized();
    r.wave.k = r.k;
    r.wave.validate();
    return r;
}

/// Observation directions: polar angles at cell midpoints, azimuths uniformly spaced.
struct Direction {
    double theta = 0;
    double phi = 0;
    Vec3 xhat = Vec3::UnitZ();
};

inline std::vector<Direction> direction_grid(const FarFieldSpec& f)
{
    std::vector<Direction> out;
    for (int i = 0; i < f.ntheta; ++i)
        for (int j = 0; j < f.nphi; ++j) {
            Direction d;
            d.theta = pi * (i + 0.5) / f.ntheta;
            d.phi = 2 * pi * j / f.nphi;
            d.xhat = Vec3(std::sin(d.theta) * std::cos(d.phi), std::sin(d.theta) * std::sin(d.phi), std::cos(d.theta));
            out.push_back(d);
        }
    return out;
}

/// max_i |A_i - B_i| / max_i |B_i|
inline double relative_far_field_error(const std::vector<ComplexVec3>& a, const std::vector<ComplexVec3>& b)
{
    double num = 0, den = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        num = std::max(num, (a[i] - b[i]).norm());
        den = std::max(den, b[i].norm());
    }
    if (!(den > 0)) throw SingularEvaluation("reference far field vanishes in every direction");
    return num / den;
}

struct RunResult {
    Resolved resolved;
    SpectralSource source;
    FoldySolution solution;
    double coupling_norm = 0;
    std::vector<Direction> directions;
    std::vector<ComplexVec3> far_field;
};

inline RunResult run_config(const RunConfig& c, bool force = false, const SpectralSource* source = nullptr)
{
    RunResult out;
    out.source = source ? *source : spectral_source(c);
    out.resolved = resolve(c, c.geometry.a, out.source, force);
    const Resolved& r = out.resolved;
    const FoldySystem sys = assemble_system(r.cfg, out.source.pt, r.k, r.mc, r.wave);
    out.coupling_norm = spectral_norm(sys.coupling());
    out.solution = solve_system(sys);
    out.directions = direction_grid(c.farfield);
    for (const auto& d : out.directions) out.far_field.push_back(dimer::far_field(d.xhat, out.solution, r.cfg, r.k).value);
    return out;
}

/// Shortest round-trip representation, identical across runs.
inline std::string fmt(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v == 0 ? 0.0 : v);
    return buf;
}

inline void write_far_field_csv(std::ostream& os, const std::vector<Direction>& dirs, const std::vector<ComplexVec3>& values,
                                const std::string& hash)
{
    os << "theta,phi,re_x,im_x,re_y,im_y,re_z,im_z,schema,config_hash,version\n";
    for (std::size_t i = 0; i < dirs.size(); ++i) {
        os << fmt(dirs[i].theta) << ',' << fmt(dirs[i].phi);
        for (int c = 0; c < 3; ++c) os << ',' << fmt(values[i](c).real()) << ',' << fmt(values[i](c).imag());
        os << ',' << csv_schema << ',' << hash << ',' << version << '\n';
    }
}

namespace detail {

inline nlohmann::json complex_json(cplx z) { return nlohmann::json::array({z.real(), z.imag()}); }

inline nlohmann::json base_summary(const Resolved& r, const SpectralSource& src, const std::string& hash)
{
    nlohmann::json j;
    j["k"] = r.k;
    j["eta1"] = complex_json(r.eta1);
    j["eta2"] = complex_json(r.eta2);
    j["regime_ok"] = r.regime.ok;
    j["regime_margin"] = r.regime.margin;
    j["theorem_exponent"] = r.regime.theorem_exponent;
    j["corollary_exponent"] = r.regime.corollary_exponent;
    j["a"] = r.cfg.a;
    j["d"] = r.cfg.distance();
    j["tensor_source"] = src.origin;
    j["lambda_n0"] = src.lambda_n0;
    j["lambda_nstar"] = src.lambda_nstar;
    j["tensor_traces"] = {{"p011", complex_json(src.pt.p011.trace())},
                          {"p012", complex_json(src.pt.p012.trace())},
                          {"p021", complex_json(src.pt.p021.trace())},
                          {"p022", complex_json(src.pt.p022.trace())}};
    j["resonance_residuals"] = {{"dielectric", std::abs(r.residuals.dielectric)},
                                {"plasmonic", std::abs(r.residuals.plasmonic)}};
    j["config_hash"] = hash;
    j["version"] = version;
    j["warnings"] = src.warnings;
    return j;
}

} // namespace detail

inline nlohmann::json run_summary(const RunResult& r, const std::string& hash)
{
    nlohmann::json j = detail::base_summary(r.resolved, r.source, hash);
    j["coupling_norm"] = r.coupling_norm;
    j["slopes"] = nlohmann::json::object();
    const auto vec = [](const ComplexVec3& v) {
        return nlohmann::json::array({detail::complex_json(v(0)), detail::complex_json(v(1)), detail::complex_json(v(2))});
    };
    j["poles"] = {{"q1", vec(r.solution.q1)}, {"r1", vec(r.solution.r1)}, {"q2", vec(r.solution.q2)}, {"r2", vec(r.solution.r2)}};
    return j;
}

/// Least-squares slope of log(y) against log(x).
inline double loglog_slope(const std::vector<double>& x, const std::vector<double>& y)
{
    if (x.size() != y.size() || x.size() < 2) throw InvalidParameter("slope fit needs at least two points");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] > 0 && y[i] > 0)) throw SingularEvaluation("slope fit needs positive values");
        const double lx = std::log(x[i]), ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    const double den = n * sxx - sx * sx;
    if (!(std::abs(den) > 0)) throw SingularEvaluation("slope fit with coincident abscissae");
    return (n * sxy - sx * sy) / den;
}

struct OracleRun {
    oracle::LSReport report;
    std::vector<ComplexVec3> far_field;
    std::vector<double> volume_error;
    std::size_t cells = 0;
};

inline OracleRun run_oracle_far_field(const Resolved& r, int resolution, double tol, const std::vector<Direction>& dirs)
{
    OracleRun out;
    const oracle::VoxelGrid g = oracle::voxelize(r.cfg, resolution);
    out.cells = g.size();
    for (const auto& p : g.particles) out.volume_error.push_back(p.volume_error);
    oracle::LSOptions opt;
    opt.tolerance = tol;
    oracle::LSOperator op = oracle::assemble_ls(g, r.k, r.eta1, r.eta2, opt);
    const Eigen::VectorXcd e = oracle::solve_ls(op, oracle::sample_incident(g, r.wave), &out.report, opt);
    for (const auto& d : dirs) out.far_field.push_back(oracle::oracle_far_field(g, e, op.contrasts(), r.k, d.xhat));
    return out;
}

struct SweepRow {
    double a = 0;
    double d = 0;
    double k = 0;
    double error = 0;
    double predicted = 0;
    double wall_time = 0;
    double coupling_norm = 0;
};

struct SweepResult {
    SweepMode mode = SweepMode::DominantVsFoldy;
    std::vector<SweepRow> rows;
    double slope = 0;
    double predicted = 0;
    double coupling_slope = 0;
    int fitted_points = 0;
    bool monotone = false;
    Resolved last;
    SpectralSource source;
};

inline SweepResult run_sweep(const RunConfig& c, bool force = false, const SpectralSource* source = nullptr,
                             const std::function<void(const SweepRow&)>& progress = {})
{
    const auto& as = c.sweep.a;
    if (as.size() < 3) throw ConfigError("a sweep needs at least three a values", 0, "sweep.a");
    for (std::size_t i = 1; i < as.size(); ++i)
        if (!(as[i] < as[i - 1])) throw ConfigError("a values must be strictly decreasing", 0, "sweep.a");

    SweepResult out;
    out.mode = c.sweep.mode;
    out.source = source ? *source : spectral_source(c);
    const auto dirs = direction_grid(c.farfield);
    for (double a : as) {
        const auto t0 = std::chrono::steady_clock::now();
        const Resolved r = resolve(c, a, out.source, force);
        const FoldySystem sys = assemble_system(r.cfg, out.source.pt, r.k, r.mc, r.wave);
        SweepRow row;
        row.a = a;
        row.d = r.cfg.distance();
        row.k = r.k;
        row.coupling_norm = spectral_norm(sys.coupling());
        const FoldySolution full = solve_system(sys);
        std::vector<ComplexVec3> fa, fb;
        for (const auto& d : dirs) fb.push_back(dimer::far_field(d.xhat, full, r.cfg, r.k).value);
        switch (c.sweep.mode) {
        case SweepMode::DominantVsFoldy:
            for (const auto& d : dirs) fa.push_back(dominant_far_field(d.xhat, r.cfg, out.source.pt, r.k, r.mc, r.wave).value);
            row.predicted = r.regime.dominant_gap_exponent();
            break;
        case SweepMode::BornVsDirect: {
            const FoldySolution born = born_series(sys, c.sweep.born_order);
            for (const auto& d : dirs) fa.push_back(dimer::far_field(d.xhat, born, r.cfg, r.k).value);
            break;
        }
        case SweepMode::FoldyVsOracle: {
            fa = fb;
            fb = run_oracle_far_field(r, c.oracle.resolution, c.oracle.tolerance, dirs).far_field;
            row.predicted = r.regime.theorem_exponent - r.regime.dominant_order;
            break;
        }
        }
        row.error = relative_far_field_error(fa, fb);
        if (c.sweep.timing) row.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        out.rows.push_back(row);
        out.last = r;
        if (progress) progress(row);
    }

    std::vector<double> xa, ye, yc;
    for (std::size_t i = c.sweep.include_largest ? 0 : 1; i < out.rows.size(); ++i) {
        xa.push_back(out.rows[i].a);
        ye.push_back(out.rows[i].error);
        yc.push_back(out.rows[i].coupling_norm);
    }
    out.fitted_points = static_cast<int>(xa.size());
    out.slope = loglog_slope(xa, ye);
    if (c.sweep.mode == SweepMode::BornVsDirect) {
        out.coupling_slope = loglog_slope(xa, yc);
        for (auto& row : out.rows) row.predicted = (c.sweep.born_order + 1) * out.coupling_slope;
    }
    out.predicted = out.rows.front().predicted;
    out.monotone = true;
    for (std::size_t i = 1; i < out.rows.size(); ++i)
        if (!(out.rows[i].error < out.rows[i - 1].error)) out.monotone = false;
    return out;
}

inline void write_sweep_csv(std::ostream& os, const SweepResult& s, const std::string& hash)
{
    os << "a,d,k,relative_error,predicted_exponent,coupling_norm,wall_time_s,mode,schema,config_hash,version\n";
    for (const auto& r : s.rows) {
        os << fmt(r.a) << ',' << fmt(r.d) << ',' << fmt(r.k) << ',' << fmt(r.error) << ',' << fmt(r.predicted) << ','
           << fmt(r.coupling_norm) << ',' << (r.wall_time > 0 ? fmt(r.wall_time) : std::string()) << ','
           << to_string(s.mode) << ',' << csv_schema << ',' << hash << ',' << version << '\n';
    }
}

inline nlohmann::json sweep_summary(const SweepResult& s, const std::string& hash)
{
    nlohmann::json j = detail::base_summary(s.last, s.source, hash);
    j["mode"] = to_string(s.mode);
    j["slopes"] = {{"fitted", s.slope}, {"predicted", s.predicted}, {"points", s.fitted_points}};
    if (s.mode == SweepMode::BornVsDirect) j["slopes"]["coupling"] = s.coupling_slope;
    j["monotone"] = s.monotone;
    return j;
}

} // namespace dimer::harness
