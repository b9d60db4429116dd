#pragma once

// Run configuration: a flat INI-style file with [geometry] [material] [wave] [tensors]
// [farfield] [sweep] [oracle] sections and `key = value` lines. '#' and ';' start comments.

#include "dimer/errors.hpp"
#include "dimer/materials.hpp"
#include "dimer/shape.hpp"
#include "dimer/types.hpp"

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace dimer::harness {

/// Parsed key/value pairs with the line each came from.
class IniDocument {
public:
    static IniDocument parse(const std::string& text)
    {
        IniDocument doc;
        std::istringstream is(text);
        std::string raw, section;
        int line = 0;
        while (std::getline(is, raw)) {
            ++line;
            std::string s = strip(raw.substr(0, raw.find_first_of("#;")));
            if (s.empty()) continue;
            if (s.front() == '[') {
                if (s.back() != ']') throw ConfigError("unterminated section header", line);
                section = strip(s.substr(1, s.size() - 2));
                if (!known_section(section)) throw ConfigError("unknown section '" + section + "'", line);
                continue;
            }
            const auto eq = s.find('=');
            if (eq == std::string::npos) throw ConfigError("expected key = value", line);
            const std::string key = strip(s.substr(0, eq));
            if (section.empty()) throw ConfigError("key outside of any section", line, key);
            if (key.empty()) throw ConfigError("empty key", line);
            const std::string full = section + "." + key;
            if (doc.entries_.count(full)) throw ConfigError("duplicate key", line, full);
            doc.entries_[full] = {strip(s.substr(eq + 1)), line};
        }
        return doc;
    }

    bool has(const std::string& key) const { return entries_.count(key) > 0; }

    const std::string& value(const std::string& key) const
    {
        auto it = entries_.find(key);
        if (it == entries_.end()) throw ConfigError("missing required key", 0, key);
        used_.insert(key);
        return it->second.value;
    }

    int line(const std::string& key) const
    {
        auto it = entries_.find(key);
        return it == entries_.end() ? 0 : it->second.line;
    }

    /// Throws on the first key that was never read.
    void reject_unused() const
    {
        for (const auto& [k, e] : entries_)
            if (!used_.count(k)) throw ConfigError("unknown key", e.line, k);
    }

    static std::string strip(const std::string& s)
    {
        const auto b = s.find_first_not_of(" \t\r\n");
        if (b == std::string::npos) return {};
        const auto e = s.find_last_not_of(" \t\r\n");
        return s.substr(b, e - b + 1);
    }

private:
    struct Entry {
        std::string value;
        int line = 0;
    };
    static bool known_section(const std::string& s)
    {
        for (const char* k : {"geometry", "material", "wave", "tensors", "farfield", "sweep", "oracle"})
            if (s == k) return true;
        return false;
    }
    std::map<std::string, Entry> entries_;
    mutable std::set<std::string> used_;
};

/// Typed accessors that report the offending line and key.
class ConfigReader {
public:
    explicit ConfigReader(const IniDocument& doc) : doc_(doc) {}

    bool has(const std::string& key) const { return doc_.has(key); }

    std::string text(const std::string& key, const std::string& fallback) const
    {
        return doc_.has(key) ? doc_.value(key) : fallback;
    }

    double real(const std::string& key, double fallback) const
    {
        if (!doc_.has(key)) return fallback;
        return parse_real(doc_.value(key), key);
    }

    int integer(const std::string& key, int fallback) const
    {
        if (!doc_.has(key)) return fallback;
        const std::string& v = doc_.value(key);
        std::size_t pos = 0;
        long r = 0;
        try {
            r = std::stol(v, &pos);
        } catch (const std::exception&) {
            fail("expected an integer, got '" + v + "'", key);
        }
        if (pos != v.size()) fail("expected an integer, got '" + v + "'", key);
        return static_cast<int>(r);
    }

    bool flag(const std::string& key, bool fallback) const
    {
        if (!doc_.has(key)) return fallback;
        const std::string& v = doc_.value(key);
        if (v == "true" || v == "yes" || v == "1") return true;
        if (v == "false" || v == "no" || v == "0") return false;
        fail("expected true or false, got '" + v + "'", key);
    }

    /// "re" or "re, im"
    cplx complex(const std::string& key, cplx fallback) const
    {
        if (!doc_.has(key)) return fallback;
        const auto xs = list(key);
        if (xs.size() == 1) return {xs[0], 0};
        if (xs.size() == 2) return {xs[0], xs[1]};
        fail("expected 're' or 're, im'", key);
    }

    Vec3 vec3(const std::string& key, const Vec3& fallback) const
    {
        if (!doc_.has(key)) return fallback;
        const auto xs = list(key);
        if (xs.size() != 3) fail("expected three components", key);
        return {xs[0], xs[1], xs[2]};
    }

    /// Numbers separated by commas or whitespace.
    std::vector<double> list(const std::string& key) const
    {
        std::string v = doc_.value(key);
        for (char& c : v)
            if (c == ',') c = ' ';
        std::istringstream is(v);
        std::vector<double> out;
        std::string tok;
        while (is >> tok) out.push_back(parse_real(tok, key));
        if (out.empty()) fail("expected at least one number", key);
        return out;
    }

    std::string choice(const std::string& key, const std::string& fallback, std::initializer_list<const char*> options) const
    {
        const std::string v = text(key, fallback);
        for (const char* o : options)
            if (v == o) return v;
        std::string msg = "invalid value '" + v + "', expected one of:";
        for (const char* o : options) msg += std::string(" ") + o;
        fail(msg, key);
    }

    [[noreturn]] void fail(const std::string& what, const std::string& key) const
    {
        throw ConfigError(what, doc_.line(key), key);
    }

private:
    double parse_real(const std::string& v, const std::string& key) const
    {
        std::size_t pos = 0;
        double r = 0;
        try {
            r = std::stod(v, &pos);
        } catch (const std::exception&) {
            fail("expected a number, got '" + v + "'", key);
        }
        if (pos != v.size()) fail("expected a number, got '" + v + "'", key);
        return r;
    }

    const IniDocument& doc_;
};

enum class MaterialMode { Contrast, Resonant, Detuned, Lorentz };
enum class TensorSource { Ball, Oracle };
enum class SweepMode { DominantVsFoldy, BornVsDirect, FoldyVsOracle };

inline const char* to_string(SweepMode m)
{
    switch (m) {
    case SweepMode::DominantVsFoldy: return "dominant-vs-foldy";
    case SweepMode::BornVsDirect: return "born-vs-direct";
    case SweepMode::FoldyVsOracle: return "foldy-vs-oracle";
    }
    return "?";
}

struct GeometrySpec {
    double a = 0.05;
    double t = 0.3;
    double h = 0.3;
    double alpha0 = 1.0;
    Vec3 axis = Vec3::UnitZ();
    Vec3 center = Vec3::Zero();
    Shape shape1 = Shape::ball();
    Shape shape2 = Shape::ball();
};

struct MaterialSpec {
    MaterialMode mode = MaterialMode::Resonant;
    int branch = 1;
    // contrast mode uses all four; resonant mode derives eta0, eta2 from c0, d0
    cplx eta0{1, 0};
    cplx eta2{-2, 0};
    cplx c0{1, 0};
    cplx d0{1, 0};
    // detuned mode: 1 - k^2 eta1 a^2 lambda = 1 + eta2 lambda* = detuning
    double detuning = 0.1;
    // lorentz mode: k from the dielectric resonance, k02 matched to it
    LorentzParams lorentz1{1.0, 2.0, 0.0};
    double kp2 = 1.5;
};

struct WaveSpec {
    double k = 1.0;
    Vec3 direction = Vec3::UnitX();
    Vec3 polarization = Vec3::UnitZ();
};

struct TensorSpec {
    TensorSource source = TensorSource::Ball;
    int resolution = 24;
};

struct FarFieldSpec {
    int ntheta = 6;
    int nphi = 12;
};

struct SweepSpec {
    std::vector<double> a;
    SweepMode mode = SweepMode::DominantVsFoldy;
    int born_order = 1;
    bool include_largest = false;
    bool timing = false;
};

struct OracleSpec {
    int resolution = 20;
    double tolerance = 1e-8;
};

struct RunConfig {
    GeometrySpec geometry;
    MaterialSpec material;
    WaveSpec wave;
    TensorSpec tensors;
    FarFieldSpec farfield;
    SweepSpec sweep;
    OracleSpec oracle;
    std::string text;   ///< source text, hashed for provenance
};

/// 64-bit FNV-1a, rendered as 16 hex digits.
inline std::string provenance_hash(const std::string& s)
{
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

inline RunConfig parse_config(const std::string& text)
{
    const IniDocument doc = IniDocument::parse(text);
    const ConfigReader r(doc);
    RunConfig c;
    c.text = text;

    auto& g = c.geometry;
    g.a = r.real("geometry.a", g.a);
    g.t = r.real("geometry.t", g.t);
    g.h = r.real("geometry.h", g.h);
    g.alpha0 = r.real("geometry.alpha0", g.alpha0);
    g.axis = r.vec3("geometry.axis", g.axis);
    if (!(g.axis.norm() > 0)) r.fail("axis must be non-zero", "geometry.axis");
    g.center = r.vec3("geometry.center", g.center);
    for (int p = 1; p <= 2; ++p) {
        const std::string key = "geometry.shape" + std::to_string(p);
        const std::string v = r.text(key, "ball");
        Shape s;
        if (v == "ball") {
            s = Shape::ball();
        } else if (v.rfind("mask:", 0) == 0) {
            try {
                s = Shape::from_mask(VoxelMask::load(v.substr(5)));
            } catch (const Error& e) {
                r.fail(e.what(), key);
            }
        } else {
            r.fail("expected 'ball' or 'mask:<path>'", key);
        }
        (p == 1 ? g.shape1 : g.shape2) = s;
    }

    auto& m = c.material;
    const std::string mode = r.choice("material.mode", "resonant", {"contrast", "resonant", "detuned", "lorentz"});
    m.mode = mode == "contrast"   ? MaterialMode::Contrast
             : mode == "detuned"  ? MaterialMode::Detuned
             : mode == "lorentz"  ? MaterialMode::Lorentz
                                  : MaterialMode::Resonant;
    m.branch = r.integer("material.branch", m.branch);
    if (m.branch != 1 && m.branch != -1) r.fail("branch must be +1 or -1", "material.branch");
    m.eta0 = r.complex("material.eta0", m.eta0);
    m.eta2 = r.complex("material.eta2", m.eta2);
    m.c0 = r.complex("material.c0", m.c0);
    m.d0 = r.complex("material.d0", m.d0);
    m.detuning = r.real("material.detuning", m.detuning);
    m.lorentz1.kp = r.real("material.kp1", m.lorentz1.kp);
    m.lorentz1.k0 = r.real("material.k01", m.lorentz1.k0);
    m.kp2 = r.real("material.kp2", m.kp2);

    auto& w = c.wave;
    w.k = r.real("wave.k", w.k);
    w.direction = r.vec3("wave.direction", w.direction);
    w.polarization = r.vec3("wave.polarization", w.polarization);

    const std::string src = r.choice("tensors.source", "ball", {"ball", "oracle"});
    c.tensors.source = src == "oracle" ? TensorSource::Oracle : TensorSource::Ball;
    c.tensors.resolution = r.integer("tensors.resolution", c.tensors.resolution);

    c.farfield.ntheta = r.integer("farfield.ntheta", c.farfield.ntheta);
    c.farfield.nphi = r.integer("farfield.nphi", c.farfield.nphi);
    if (c.farfield.ntheta < 1) r.fail("must be at least 1", "farfield.ntheta");
    if (c.farfield.nphi < 1) r.fail("must be at least 1", "farfield.nphi");

    auto& s = c.sweep;
    if (r.has("sweep.a")) s.a = r.list("sweep.a");
    const std::string sm = r.choice("sweep.mode", "dominant-vs-foldy", {"dominant-vs-foldy", "born-vs-direct", "foldy-vs-oracle"});
    s.mode = sm == "born-vs-direct" ? SweepMode::BornVsDirect
             : sm == "foldy-vs-oracle" ? SweepMode::FoldyVsOracle
                                       : SweepMode::DominantVsFoldy;
    s.born_order = r.integer("sweep.born_order", s.born_order);
    if (s.born_order < 0) r.fail("must be non-negative", "sweep.born_order");
    s.include_largest = r.flag("sweep.include_largest", s.include_largest);
    s.timing = r.flag("sweep.timing", s.timing);

    c.oracle.resolution = r.integer("oracle.resolution", c.oracle.resolution);
    c.oracle.tolerance = r.real("oracle.tolerance", c.oracle.tolerance);

    doc.reject_unused();
    return c;
}

inline RunConfig load_config(const std::string& path)
{
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot open config file " + path);
    std::ostringstream ss;
    ss << is.rdbuf();
    return parse_config(ss.str());
}

} // namespace dimer::harness
