#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "splatgen/errors.hpp"
#include "splatgen/splat.hpp"

namespace splatgen {

namespace {

struct Property {
    std::string name;
    std::string type;
    std::size_t offset = 0;
    std::size_t size = 0;
};

std::size_t type_size(const std::string& t) {
    if (t == "char" || t == "uchar" || t == "int8" || t == "uint8") {
        return 1;
    }
    if (t == "short" || t == "ushort" || t == "int16" || t == "uint16") {
        return 2;
    }
    if (t == "int" || t == "uint" || t == "float" || t == "int32" || t == "uint32" ||
        t == "float32") {
        return 4;
    }
    if (t == "double" || t == "float64") {
        return 8;
    }
    throw FormatError("unsupported PLY property type '" + t + "'");
}

template <typename T>
T read_le(const unsigned char* p) {
    T v;
    std::memcpy(&v, p, sizeof(T));
    return v;
}

double decode(const Property& prop, const unsigned char* p) {
    const std::string& t = prop.type;
    if (t == "float" || t == "float32") {
        return read_le<float>(p);
    }
    if (t == "double" || t == "float64") {
        return read_le<double>(p);
    }
    if (t == "uchar" || t == "uint8") {
        return read_le<std::uint8_t>(p);
    }
    if (t == "char" || t == "int8") {
        return read_le<std::int8_t>(p);
    }
    if (t == "short" || t == "int16") {
        return read_le<std::int16_t>(p);
    }
    if (t == "ushort" || t == "uint16") {
        return read_le<std::uint16_t>(p);
    }
    if (t == "int" || t == "int32") {
        return read_le<std::int32_t>(p);
    }
    return read_le<std::uint32_t>(p);
}

std::vector<std::string> required_properties() {
    std::vector<std::string> names = {"x", "y", "z", "f_dc_0", "f_dc_1", "f_dc_2"};
    for (int i = 0; i < 45; ++i) {
        names.push_back("f_rest_" + std::to_string(i));
    }
    names.insert(names.end(), {"opacity", "scale_0", "scale_1", "scale_2", "rot_0", "rot_1",
                               "rot_2", "rot_3"});
    return names;
}

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

} // namespace

SplatCloud load_splat_ply(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open " + path.string());
    }
    std::string line;
    if (!std::getline(in, line) || line.rfind("ply", 0) != 0) {
        throw FormatError(path.string() + ": missing 'ply' magic");
    }
    bool binary_le = false;
    bool in_vertex = false;
    bool vertex_seen = false;
    std::size_t vertex_count = 0;
    std::size_t stride = 0;
    std::vector<Property> props;
    while (true) {
        if (!std::getline(in, line)) {
            throw FormatError(path.string() + ": header not terminated by end_header");
        }
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        std::istringstream ss(line);
        std::string kw;
        ss >> kw;
        if (kw == "end_header") {
            break;
        }
        if (kw == "format") {
            std::string fmt;
            ss >> fmt;
            binary_le = fmt == "binary_little_endian";
        } else if (kw == "element") {
            std::string name;
            std::size_t n = 0;
            ss >> name >> n;
            if (vertex_seen && name != "vertex") {
                in_vertex = false;
                continue;
            }
            if (name != "vertex") {
                throw FormatError(path.string() + ": elements before 'vertex' are not supported");
            }
            in_vertex = true;
            vertex_seen = true;
            vertex_count = n;
        } else if (kw == "property" && in_vertex) {
            std::string type;
            std::string name;
            ss >> type;
            if (type == "list") {
                throw FormatError(path.string() + ": list properties on vertices are not supported");
            }
            ss >> name;
            Property p{name, type, stride, type_size(type)};
            stride += p.size;
            props.push_back(p);
        }
    }
    if (!binary_le) {
        throw FormatError(path.string() + ": only binary_little_endian PLY is supported");
    }
    if (!vertex_seen) {
        throw FormatError(path.string() + ": no vertex element");
    }

    std::unordered_map<std::string, const Property*> by_name;
    for (const Property& p : props) {
        by_name[p.name] = &p;
    }
    const std::vector<std::string> names = required_properties();
    std::vector<const Property*> lookup;
    lookup.reserve(names.size());
    for (const std::string& n : names) {
        auto it = by_name.find(n);
        if (it == by_name.end()) {
            throw FormatError(path.string() + ": missing vertex property '" + n + "'");
        }
        lookup.push_back(it->second);
    }

    std::vector<unsigned char> buf(stride);
    std::vector<Gaussian3D> gaussians;
    gaussians.reserve(vertex_count);
    std::vector<double> v(names.size());
    for (std::size_t i = 0; i < vertex_count; ++i) {
        in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(stride));
        if (!in) {
            throw FormatError(path.string() + ": truncated vertex data at element " +
                              std::to_string(i));
        }
        for (std::size_t k = 0; k < lookup.size(); ++k) {
            v[k] = decode(*lookup[k], buf.data() + lookup[k]->offset);
            if (!std::isfinite(v[k])) {
                throw DataError(path.string() + ": non-finite '" + names[k] + "' at element " +
                                std::to_string(i));
            }
        }
        Gaussian3D g;
        g.mean = Vec3(v[0], v[1], v[2]);
        for (int c = 0; c < 3; ++c) {
            g.sh_at(c, 0) = v[3 + c];
            for (int k = 0; k < 15; ++k) {
                g.sh_at(c, k + 1) = v[6 + c * 15 + k];
            }
        }
        const std::size_t o = 6 + 45;
        g.opacity = logistic(v[o]);
        g.scale = Vec3(std::exp(v[o + 1]), std::exp(v[o + 2]), std::exp(v[o + 3]));
        Quat q(v[o + 4], v[o + 5], v[o + 6], v[o + 7]);
        const double norm = q.norm();
        if (!(norm > 0.0) || !g.scale.allFinite() || !(g.scale.array() > 0.0).all()) {
            throw DataError(path.string() + ": degenerate rotation or scale at element " +
                            std::to_string(i));
        }
        g.rotation = Quat(q.coeffs() / norm);
        gaussians.push_back(g);
    }
    return SplatCloud(std::move(gaussians));
}

void save_splat_ply(const SplatCloud& cloud, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot open " + path.string() + " for writing");
    }
    out << "ply\nformat binary_little_endian 1.0\n";
    out << "element vertex " << cloud.count() << "\n";
    for (const char* n : {"x", "y", "z", "nx", "ny", "nz"}) {
        out << "property float " << n << "\n";
    }
    for (const std::string& n : required_properties()) {
        if (n == "x" || n == "y" || n == "z") {
            continue;
        }
        out << "property float " << n << "\n";
    }
    out << "end_header\n";

    constexpr double kEps = 1e-7;
    std::vector<float> row;
    row.reserve(62);
    for (const Gaussian3D& g : cloud.gaussians()) {
        row.clear();
        row.push_back(static_cast<float>(g.mean.x()));
        row.push_back(static_cast<float>(g.mean.y()));
        row.push_back(static_cast<float>(g.mean.z()));
        row.insert(row.end(), {0.0F, 0.0F, 0.0F});
        for (int c = 0; c < 3; ++c) {
            row.push_back(static_cast<float>(g.sh_at(c, 0)));
        }
        for (int c = 0; c < 3; ++c) {
            for (int k = 1; k < kShCoeffsPerChannel; ++k) {
                row.push_back(static_cast<float>(g.sh_at(c, k)));
            }
        }
        const double o = std::clamp(g.opacity, kEps, 1.0 - kEps);
        row.push_back(static_cast<float>(std::log(o / (1.0 - o))));
        for (int k = 0; k < 3; ++k) {
            row.push_back(static_cast<float>(std::log(g.scale[k])));
        }
        const Quat q = g.rotation.normalized();
        row.insert(row.end(), {static_cast<float>(q.w()), static_cast<float>(q.x()),
                               static_cast<float>(q.y()), static_cast<float>(q.z())});
        out.write(reinterpret_cast<const char*>(row.data()),
                  static_cast<std::streamsize>(row.size() * sizeof(float)));
    }
    if (!out) {
        throw IoError("write failed: " + path.string());
    }
}

} // namespace splatgen
