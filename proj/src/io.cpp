#include "droplab/io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

namespace droplab::io {

namespace fs = std::filesystem;

namespace {

fs::path with_ext(fs::path p, const char* ext) {
    if (p.extension() == ".json" || p.extension() == ".f64" || p.extension() == ".pgm") p.replace_extension();
    p += ext;
    return p;
}

json read_json(const fs::path& file) {
    std::ifstream in(file);
    if (!in) throw IoError("cannot open " + file.string());
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw IoError("malformed JSON in " + file.string() + ": " + e.what());
    }
}

std::uint64_t to_le(std::uint64_t v) {
    if constexpr (std::endian::native == std::endian::big) return __builtin_bswap64(v);
    return v;
}

}  // namespace

json grid_sidecar(const Grid2D& g, const std::string& name) {
    return json{{"nx", g.nx}, {"ny", g.ny}, {"x0", g.x0}, {"y0", g.y0}, {"h", g.h}, {"name", name}};
}

Grid2D grid_from_sidecar(const json& j) {
    try {
        return Grid2D::make(j.at("x0").get<double>(), j.at("y0").get<double>(), j.at("h").get<double>(),
                            j.at("nx").get<int>(), j.at("ny").get<int>());
    } catch (const json::exception& e) {
        throw IoError(std::string("malformed grid sidecar: ") + e.what());
    }
}

void write_json(const fs::path& file, const json& j) {
    std::ofstream out(file);
    if (!out) throw IoError("cannot write " + file.string());
    out << j.dump(2) << '\n';
}

void write_text(const fs::path& file, const std::string& text) {
    std::ofstream out(file, std::ios::binary);
    if (!out) throw IoError("cannot write " + file.string());
    out << text;
}

void write_field(const fs::path& dir, const std::string& name, const ScalarField& f) {
    fs::create_directories(dir);
    std::ofstream out(dir / (name + ".f64"), std::ios::binary);
    if (!out) throw IoError("cannot write field " + name);
    for (std::size_t k = 0; k < f.grid().size(); ++k) {
        const double v = f.defined(k) ? f[k] : 0.0;
        const std::uint64_t bits = to_le(std::bit_cast<std::uint64_t>(v));
        out.write(reinterpret_cast<const char*>(&bits), sizeof bits);
    }
    write_json(dir / (name + ".json"), grid_sidecar(f.grid(), name));
}

ScalarField read_field(const fs::path& path) {
    const Grid2D g = grid_from_sidecar(read_json(with_ext(path, ".json")));
    const fs::path raw = with_ext(path, ".f64");
    std::ifstream in(raw, std::ios::binary);
    if (!in) throw IoError("cannot open " + raw.string());
    std::vector<double> values(g.size());
    for (auto& v : values) {
        std::uint64_t bits;
        if (!in.read(reinterpret_cast<char*>(&bits), sizeof bits))
            throw IoError("field file " + raw.string() + " is shorter than its sidecar declares");
        v = std::bit_cast<double>(to_le(bits));
    }
    return ScalarField(g, std::move(values));
}

void write_mask(const fs::path& dir, const std::string& name, const RegionMask& m) {
    fs::create_directories(dir);
    const Grid2D& g = m.grid();
    std::ofstream out(dir / (name + ".pgm"), std::ios::binary);
    if (!out) throw IoError("cannot write mask " + name);
    out << "P5\n" << g.nx << ' ' << g.ny << "\n255\n";
    std::vector<char> row(static_cast<std::size_t>(g.nx));
    for (int j = 0; j < g.ny; ++j) {
        for (int i = 0; i < g.nx; ++i) row[static_cast<std::size_t>(i)] = m(i, j) ? char(255) : char(0);
        out.write(row.data(), static_cast<std::streamsize>(row.size()));
    }
    write_json(dir / (name + ".json"), grid_sidecar(g, name));
}

RegionMask read_mask(const fs::path& path) {
    const Grid2D g = grid_from_sidecar(read_json(with_ext(path, ".json")));
    const fs::path pgm = with_ext(path, ".pgm");
    std::ifstream in(pgm, std::ios::binary);
    if (!in) throw IoError("cannot open " + pgm.string());
    std::string magic;
    int w = 0, h = 0, maxval = 0;
    in >> magic >> w >> h >> maxval;
    in.get();
    if (magic != "P5" || w != g.nx || h != g.ny || maxval != 255)
        throw IoError("mask header in " + pgm.string() + " does not match its sidecar");
    RegionMask m(g);
    std::vector<unsigned char> row(static_cast<std::size_t>(w));
    for (int j = 0; j < h; ++j) {
        if (!in.read(reinterpret_cast<char*>(row.data()), w)) throw IoError("truncated mask " + pgm.string());
        for (int i = 0; i < w; ++i) m.set(i, j, row[static_cast<std::size_t>(i)] >= 128);
    }
    return m;
}

}  // namespace droplab::io
