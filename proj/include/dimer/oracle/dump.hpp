#pragma once

// Flat little-endian dump of static operators and spectral data for cross-run caching.
//
// Layout (all integers unsigned little-endian, reals IEEE little-endian):
//   char[8]  magic "DIMERDMP"
//   u32      version (1)
//   u32      kind (1 = static operators, 2 = spectral data)
//   i32      resolution N
//   u64      cell count M (0 for spectral data)
//   f64      k
//   f64 x 4  Re eta1, Im eta1, Re eta2, Im eta2
// kind 1 payload: f64 weights[M], f64 positions[3M], f32 gradm[3M*3M] column-major,
//                 f32 newton[M*M] column-major, u8 symmetrized
// kind 2 payload: u64 count, then (f64 lambda, f64 moment[3]) per divergence-free mode;
//                 the same for the interior modes; u64 length and the shape description bytes

#include "dimer/errors.hpp"
#include "dimer/oracle/static_ops.hpp"
#include "dimer/tensors.hpp"
#include "dimer/types.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <type_traits>

namespace dimer::oracle {

struct DumpHeader {
    std::uint32_t version = 1;
    std::uint32_t kind = 0;
    std::int32_t resolution = 0;
    std::uint64_t cells = 0;
    double k = 0;
    cplx eta1{0, 0};
    cplx eta2{0, 0};
};

namespace detail {

template <class T>
void put(std::ostream& os, T v)
{
    static_assert(std::is_arithmetic_v<T>);
    unsigned char b[sizeof(T)];
    std::memcpy(b, &v, sizeof(T));
    if constexpr (std::endian::native == std::endian::big)
        for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(b[i], b[sizeof(T) - 1 - i]);
    os.write(reinterpret_cast<const char*>(b), sizeof(T));
}

template <class T>
T get(std::istream& is)
{
    unsigned char b[sizeof(T)];
    if (!is.read(reinterpret_cast<char*>(b), sizeof(T))) throw InputError("dump file is truncated");
    if constexpr (std::endian::native == std::endian::big)
        for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(b[i], b[sizeof(T) - 1 - i]);
    T v;
    std::memcpy(&v, b, sizeof(T));
    return v;
}

inline constexpr char dump_magic[8] = {'D', 'I', 'M', 'E', 'R', 'D', 'M', 'P'};

inline void write_header(std::ostream& os, const DumpHeader& h)
{
    os.write(dump_magic, 8);
    put(os, h.version);
    put(os, h.kind);
    put(os, h.resolution);
    put(os, h.cells);
    put(os, h.k);
    put(os, h.eta1.real());
    put(os, h.eta1.imag());
    put(os, h.eta2.real());
    put(os, h.eta2.imag());
}

inline DumpHeader read_header(std::istream& is)
{
    char m[8];
    if (!is.read(m, 8) || std::memcmp(m, dump_magic, 8) != 0) throw InputError("not a dimer dump file");
    DumpHeader h;
    h.version = get<std::uint32_t>(is);
    if (h.version != 1) throw InputError("unsupported dump version " + std::to_string(h.version));
    h.kind = get<std::uint32_t>(is);
    h.resolution = get<std::int32_t>(is);
    h.cells = get<std::uint64_t>(is);
    h.k = get<double>(is);
    const double a = get<double>(is), b = get<double>(is), c = get<double>(is), d = get<double>(is);
    h.eta1 = {a, b};
    h.eta2 = {c, d};
    return h;
}

inline std::ofstream open_out(const std::string& path)
{
    std::ofstream os(path, std::ios::binary);
    if (!os) throw InputError("cannot open " + path + " for writing");
    return os;
}

inline std::ifstream open_in(const std::string& path)
{
    std::ifstream is(path, std::ios::binary);
    if (!is) throw InputError("cannot open " + path);
    return is;
}

inline void write_modes(std::ostream& os, const std::vector<SpectralMode>& modes)
{
    put(os, static_cast<std::uint64_t>(modes.size()));
    for (const auto& m : modes) {
        put(os, m.lambda);
        for (int i = 0; i < 3; ++i) put(os, m.moment(i));
    }
}

inline std::vector<SpectralMode> read_modes(std::istream& is)
{
    const auto n = get<std::uint64_t>(is);
    std::vector<SpectralMode> out(n);
    for (auto& m : out) {
        m.lambda = get<double>(is);
        for (int i = 0; i < 3; ++i) m.moment(i) = get<double>(is);
    }
    return out;
}

} // namespace detail

inline void dump_static(const std::string& path, const StaticOperators& ops, int resolution)
{
    auto os = detail::open_out(path);
    DumpHeader h;
    h.kind = 1;
    h.resolution = resolution;
    h.cells = ops.size();
    detail::write_header(os, h);
    for (std::size_t i = 0; i < ops.size(); ++i) detail::put(os, ops.weights(static_cast<Eigen::Index>(i)));
    for (const auto& p : ops.positions)
        for (int i = 0; i < 3; ++i) detail::put(os, p(i));
    for (Eigen::Index i = 0; i < ops.gradm.size(); ++i) detail::put(os, ops.gradm.data()[i]);
    for (Eigen::Index i = 0; i < ops.newton.size(); ++i) detail::put(os, ops.newton.data()[i]);
    detail::put(os, static_cast<std::uint8_t>(ops.symmetrized ? 1 : 0));
    if (!os) throw InputError("write to " + path + " failed");
}

inline StaticOperators load_static(const std::string& path, DumpHeader* header = nullptr)
{
    auto is = detail::open_in(path);
    const DumpHeader h = detail::read_header(is);
    if (h.kind != 1) throw InputError("dump does not hold static operators");
    const auto m = static_cast<Eigen::Index>(h.cells);
    StaticOperators ops;
    ops.weights.resize(m);
    for (Eigen::Index i = 0; i < m; ++i) ops.weights(i) = detail::get<double>(is);
    ops.positions.resize(static_cast<std::size_t>(m));
    for (auto& p : ops.positions)
        for (int i = 0; i < 3; ++i) p(i) = detail::get<double>(is);
    ops.gradm.resize(3 * m, 3 * m);
    for (Eigen::Index i = 0; i < ops.gradm.size(); ++i) ops.gradm.data()[i] = detail::get<float>(is);
    ops.newton.resize(m, m);
    for (Eigen::Index i = 0; i < ops.newton.size(); ++i) ops.newton.data()[i] = detail::get<float>(is);
    ops.symmetrized = detail::get<std::uint8_t>(is) != 0;
    if (header) *header = h;
    return ops;
}

inline void dump_spectra(const std::string& path, const SpectralData& s, int resolution, double k = 0,
                         cplx eta1 = 0, cplx eta2 = 0)
{
    auto os = detail::open_out(path);
    DumpHeader h;
    h.kind = 2;
    h.resolution = resolution;
    h.k = k;
    h.eta1 = eta1;
    h.eta2 = eta2;
    detail::write_header(os, h);
    detail::write_modes(os, s.lambda1);
    detail::write_modes(os, s.lambda3);
    detail::put(os, static_cast<std::uint64_t>(s.shape.size()));
    os.write(s.shape.data(), static_cast<std::streamsize>(s.shape.size()));
    if (!os) throw InputError("write to " + path + " failed");
}

inline SpectralData load_spectra(const std::string& path, DumpHeader* header = nullptr)
{
    auto is = detail::open_in(path);
    const DumpHeader h = detail::read_header(is);
    if (h.kind != 2) throw InputError("dump does not hold spectral data");
    SpectralData s;
    s.lambda1 = detail::read_modes(is);
    s.lambda3 = detail::read_modes(is);
    const auto len = detail::get<std::uint64_t>(is);
    s.shape.resize(len);
    if (len > 0 && !is.read(s.shape.data(), static_cast<std::streamsize>(len))) throw InputError("dump file is truncated");
    if (header) *header = h;
    return s;
}

} // namespace dimer::oracle
