#include "spdefind/field.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>

#include "spdefind/error.hpp"

namespace spdefind {

static_assert(std::endian::native == std::endian::little,
              "binary payloads are written in native little-endian order");

EnsembleField::EnsembleField(std::size_t n_ensembles, Grid1d grid, TimeSpec time,
                             std::uint64_t seed)
    : EnsembleField(n_ensembles, grid, time, seed,
                    std::vector<double>(n_ensembles * time.n_steps() * grid.size(), 0.0)) {}

EnsembleField::EnsembleField(std::size_t n_ensembles, Grid1d grid, TimeSpec time,
                             std::uint64_t seed, std::vector<double> data)
    : n_ensembles_(n_ensembles), grid_(grid), time_(time), seed_(seed), data_(std::move(data)) {
    if (n_ensembles == 0) throw Error(ErrorCode::InvalidArgument, "field needs >= 1 ensemble");
    if (time.n_steps() < 2) throw Error(ErrorCode::InvalidArgument, "field needs >= 2 time levels");
    if (data_.size() != n_ensembles * time.n_steps() * grid.size())
        throw Error(ErrorCode::InvalidArgument, "field data size does not match its shape");
}

void EnsembleField::check_finite() const {
    for (double v : data_)
        if (!std::isfinite(v)) throw Error(ErrorCode::NonFinite, "field holds a non-finite value");
}

namespace {

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

template <typename T>
T expect_key(std::istream& in, const std::string& key) {
    std::string line;
    if (!std::getline(in, line)) throw Error(ErrorCode::Io, "field header truncated before '" + key + "'");
    std::istringstream ls(line);
    std::string k;
    T value{};
    if (!(ls >> k >> value) || k != key)
        throw Error(ErrorCode::Io, "field header: expected '" + key + "', got '" + line + "'");
    return value;
}

}  // namespace

void write_field(const std::filesystem::path& path, const EnsembleField& field) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::Io, "cannot open '" + path.string() + "' for writing");
    out << "SPDEFLD 1\n"
        << "ns " << field.n_ensembles() << '\n'
        << "nt " << field.n_times() << '\n'
        << "nx " << field.n_space() << '\n'
        << "dt " << format_double(field.time().dt()) << '\n'
        << "dx " << format_double(field.grid().spacing()) << '\n'
        << "seed " << field.seed() << '\n'
        << "end\n";
    const auto& data = field.data();
    out.write(reinterpret_cast<const char*>(data.data()),
              static_cast<std::streamsize>(data.size() * sizeof(double)));
    if (!out) throw Error(ErrorCode::Io, "failed writing '" + path.string() + "'");
}

EnsembleField read_field(const std::filesystem::path& path, Boundary boundary) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::Io, "cannot open '" + path.string() + "'");
    std::string magic;
    std::getline(in, magic);
    if (magic != "SPDEFLD 1") throw Error(ErrorCode::Io, "'" + path.string() + "' is not a field file");

    const auto ns = expect_key<std::size_t>(in, "ns");
    const auto nt = expect_key<std::size_t>(in, "nt");
    const auto nx = expect_key<std::size_t>(in, "nx");
    const auto dt = expect_key<double>(in, "dt");
    const auto dx = expect_key<double>(in, "dx");
    const auto seed = expect_key<std::uint64_t>(in, "seed");
    std::string end;
    std::getline(in, end);
    if (end != "end") throw Error(ErrorCode::Io, "field header: missing 'end'");

    const std::size_t count = ns * nt * nx;
    const auto payload_start = in.tellg();
    in.seekg(0, std::ios::end);
    const auto payload_bytes = static_cast<std::size_t>(in.tellg() - payload_start);
    if (payload_bytes != count * sizeof(double))
        throw Error(ErrorCode::Io, "field payload is " + std::to_string(payload_bytes) +
                                       " bytes, expected " + std::to_string(count * sizeof(double)));
    in.seekg(payload_start);

    std::vector<double> data(count);
    in.read(reinterpret_cast<char*>(data.data()), static_cast<std::streamsize>(count * sizeof(double)));
    if (!in) throw Error(ErrorCode::Io, "failed reading field payload");

    const auto grid = Grid1d::from_spacing(dx, nx, boundary);
    TimeSpec time(dt * static_cast<double>(nt - 1), dt);
    if (time.n_steps() != nt) throw Error(ErrorCode::Io, "field header: inconsistent nt/dt");
    return EnsembleField(ns, grid, time, seed, std::move(data));
}

}  // namespace spdefind
