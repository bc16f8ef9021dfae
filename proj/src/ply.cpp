#include "loggpis/ply.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

#include "loggpis/error.hpp"

namespace loggpis {

namespace {

enum class ScalarType { kInt8, kUInt8, kInt16, kUInt16, kInt32, kUInt32, kFloat32, kFloat64 };

ScalarType ParseType(const std::string &name, int line) {
    if (name == "char" || name == "int8") return ScalarType::kInt8;
    if (name == "uchar" || name == "uint8") return ScalarType::kUInt8;
    if (name == "short" || name == "int16") return ScalarType::kInt16;
    if (name == "ushort" || name == "uint16") return ScalarType::kUInt16;
    if (name == "int" || name == "int32") return ScalarType::kInt32;
    if (name == "uint" || name == "uint32") return ScalarType::kUInt32;
    if (name == "float" || name == "float32") return ScalarType::kFloat32;
    if (name == "double" || name == "float64") return ScalarType::kFloat64;
    throw Error(ErrorCode::kParse, "PLY header line " + std::to_string(line) +
                                       ": unknown property type '" + name + "'");
}

std::size_t SizeOf(ScalarType t) {
    switch (t) {
        case ScalarType::kInt8:
        case ScalarType::kUInt8: return 1;
        case ScalarType::kInt16:
        case ScalarType::kUInt16: return 2;
        case ScalarType::kInt32:
        case ScalarType::kUInt32:
        case ScalarType::kFloat32: return 4;
        case ScalarType::kFloat64: return 8;
    }
    return 0;
}

struct Property {
    std::string name;
    ScalarType type = ScalarType::kFloat32;
    bool is_list = false;
    ScalarType count_type = ScalarType::kUInt8;
};

struct Element {
    std::string name;
    std::size_t count = 0;
    std::vector<Property> properties;
};

template <typename T>
T ReadRaw(const unsigned char *p) {
    T v;
    std::memcpy(&v, p, sizeof(T));
    return v;
}

double DecodeScalar(ScalarType t, const unsigned char *p) {
    switch (t) {
        case ScalarType::kInt8: return ReadRaw<std::int8_t>(p);
        case ScalarType::kUInt8: return ReadRaw<std::uint8_t>(p);
        case ScalarType::kInt16: return ReadRaw<std::int16_t>(p);
        case ScalarType::kUInt16: return ReadRaw<std::uint16_t>(p);
        case ScalarType::kInt32: return ReadRaw<std::int32_t>(p);
        case ScalarType::kUInt32: return ReadRaw<std::uint32_t>(p);
        case ScalarType::kFloat32: return ReadRaw<float>(p);
        case ScalarType::kFloat64: return ReadRaw<double>(p);
    }
    return 0.0;
}

// Source of scalars for either body encoding.
class BodyReader {
public:
    BodyReader(std::vector<unsigned char> bytes, bool binary)
        : bytes_(std::move(bytes)), binary_(binary) {
        if (!binary_) {
            text_.str(std::string(bytes_.begin(), bytes_.end()));
        }
    }

    bool Next(ScalarType t, double &out) {
        if (binary_) {
            const std::size_t n = SizeOf(t);
            if (pos_ + n > bytes_.size()) return false;
            out = DecodeScalar(t, bytes_.data() + pos_);
            pos_ += n;
            return true;
        }
        std::string token;
        if (!(text_ >> token)) return false;
        try {
            std::size_t used = 0;
            out = std::stod(token, &used);
            return used == token.size();
        } catch (const std::exception &) {
            // stod rejects "nan"/"inf" spellings on some platforms
            return false;
        }
    }

private:
    std::vector<unsigned char> bytes_;
    bool binary_;
    std::size_t pos_ = 0;
    std::istringstream text_;
};

}  // namespace

PlyData LoadPly(const std::string &path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw Error(ErrorCode::kIo, "cannot read " + path);

    std::string line;
    int line_no = 0;
    auto header_error = [&](const std::string &what) {
        return Error(ErrorCode::kParse,
                     path + ": PLY header line " + std::to_string(line_no) + ": " + what);
    };
    if (!std::getline(is, line) || (++line_no, line.rfind("ply", 0) != 0)) {
        throw Error(ErrorCode::kParse, path + ": PLY header line 1: missing 'ply' magic");
    }
    bool binary = false;
    bool have_format = false;
    std::vector<Element> elements;
    bool ended = false;
    while (std::getline(is, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::istringstream ls(line);
        std::string key;
        ls >> key;
        if (key.empty() || key == "comment" || key == "obj_info") continue;
        if (key == "format") {
            std::string fmt, version;
            ls >> fmt >> version;
            if (fmt == "ascii") {
                binary = false;
            } else if (fmt == "binary_little_endian") {
                binary = true;
            } else {
                throw header_error("unsupported format '" + fmt + "'");
            }
            have_format = true;
        } else if (key == "element") {
            Element e;
            long long count = -1;
            if (!(ls >> e.name >> count) || count < 0) throw header_error("malformed element");
            e.count = static_cast<std::size_t>(count);
            elements.push_back(std::move(e));
        } else if (key == "property") {
            if (elements.empty()) throw header_error("property before any element");
            Property p;
            std::string type;
            if (!(ls >> type)) throw header_error("malformed property");
            if (type == "list") {
                std::string count_type, item_type;
                if (!(ls >> count_type >> item_type >> p.name)) throw header_error("malformed list");
                p.is_list = true;
                p.count_type = ParseType(count_type, line_no);
                p.type = ParseType(item_type, line_no);
            } else {
                p.type = ParseType(type, line_no);
                if (!(ls >> p.name)) throw header_error("property without a name");
            }
            elements.back().properties.push_back(std::move(p));
        } else if (key == "end_header") {
            ended = true;
            break;
        } else {
            throw header_error("unknown keyword '" + key + "'");
        }
    }
    if (!ended) throw header_error("missing end_header");
    if (!have_format) throw header_error("missing format line");

    std::vector<unsigned char> body((std::istreambuf_iterator<char>(is)),
                                    std::istreambuf_iterator<char>());
    BodyReader reader(std::move(body), binary);

    PlyData data;
    for (const Element &e : elements) {
        const bool is_vertex = e.name == "vertex";
        const bool is_face = e.name == "face";
        int ix = -1, iy = -1, iz = -1, inx = -1, iny = -1, inz = -1, iq = -1;
        for (int i = 0; i < static_cast<int>(e.properties.size()); ++i) {
            const std::string &n = e.properties[static_cast<std::size_t>(i)].name;
            if (n == "x") ix = i;
            if (n == "y") iy = i;
            if (n == "z") iz = i;
            if (n == "nx") inx = i;
            if (n == "ny") iny = i;
            if (n == "nz") inz = i;
            if (n == "quality") iq = i;
        }
        const auto count = static_cast<Eigen::Index>(e.count);
        const bool has_normals = inx >= 0 && iny >= 0 && inz >= 0;
        if (is_vertex) {
            if (ix < 0 || iy < 0 || iz < 0) {
                throw Error(ErrorCode::kParse, path + ": vertex element lacks x, y, z");
            }
            data.positions.resize(count, 3);
            if (has_normals) data.normals.resize(count, 3);
            if (iq >= 0) data.quality.resize(count);
        }
        std::vector<double> values(e.properties.size());
        for (std::size_t idx = 0; idx < e.count; ++idx) {
            std::vector<int> polygon;
            for (std::size_t pi = 0; pi < e.properties.size(); ++pi) {
                const Property &p = e.properties[pi];
                auto truncated = [&]() {
                    return Error(ErrorCode::kParse, path + ": truncated or malformed " + e.name +
                                                        " " + std::to_string(idx) + " of " +
                                                        std::to_string(e.count));
                };
                if (p.is_list) {
                    double n = 0.0;
                    if (!reader.Next(p.count_type, n) || n < 0) throw truncated();
                    for (int k = 0; k < static_cast<int>(n); ++k) {
                        double v = 0.0;
                        if (!reader.Next(p.type, v)) throw truncated();
                        if (is_face) polygon.push_back(static_cast<int>(v));
                    }
                } else if (!reader.Next(p.type, values[pi])) {
                    throw truncated();
                }
            }
            const auto row = static_cast<Eigen::Index>(idx);
            if (is_vertex) {
                data.positions.row(row) << values[static_cast<std::size_t>(ix)],
                    values[static_cast<std::size_t>(iy)], values[static_cast<std::size_t>(iz)];
                if (has_normals) {
                    data.normals.row(row) << values[static_cast<std::size_t>(inx)],
                        values[static_cast<std::size_t>(iny)],
                        values[static_cast<std::size_t>(inz)];
                }
                if (iq >= 0) data.quality(row) = values[static_cast<std::size_t>(iq)];
            } else if (is_face) {
                for (std::size_t k = 1; k + 1 < polygon.size(); ++k) {
                    data.faces.push_back({polygon[0], polygon[k], polygon[k + 1]});
                }
            }
        }
    }
    for (const auto &f : data.faces) {
        for (int v : f) {
            if (v < 0 || v >= data.positions.rows()) {
                throw Error(ErrorCode::kParse, path + ": face index out of range");
            }
        }
    }
    return data;
}

void SavePly(const std::string &path, const PlyData &data, PlyFormat format) {
    const Eigen::Index n = data.positions.rows();
    if (data.positions.cols() != 3 && n > 0) {
        throw Error(ErrorCode::kDimensionMismatch, "PLY positions must be N x 3");
    }
    if (data.HasNormals() && data.normals.rows() != n) {
        throw Error(ErrorCode::kDimensionMismatch, "PLY normals must match positions");
    }
    if (data.HasQuality() && data.quality.size() != n) {
        throw Error(ErrorCode::kDimensionMismatch, "PLY quality must match positions");
    }
    std::ofstream os(path, std::ios::binary);
    if (!os) throw Error(ErrorCode::kIo, "cannot write " + path);
    const bool binary = format == PlyFormat::kBinaryLittleEndian;
    os << "ply\nformat " << (binary ? "binary_little_endian" : "ascii") << " 1.0\n";
    os << "element vertex " << n << "\n";
    os << "property float x\nproperty float y\nproperty float z\n";
    if (data.HasNormals()) os << "property float nx\nproperty float ny\nproperty float nz\n";
    if (data.HasQuality()) os << "property float quality\n";
    if (!data.faces.empty()) {
        os << "element face " << data.faces.size() << "\n";
        os << "property list uchar int vertex_indices\n";
    }
    os << "end_header\n";

    auto put_float = [&](double v) {
        const auto f = static_cast<float>(v);
        if (binary) {
            os.write(reinterpret_cast<const char *>(&f), sizeof(f));
        } else {
            os << f;
        }
    };
    if (!binary) os.precision(9);
    for (Eigen::Index i = 0; i < n; ++i) {
        std::vector<double> row{data.positions(i, 0), data.positions(i, 1), data.positions(i, 2)};
        if (data.HasNormals()) {
            row.insert(row.end(), {data.normals(i, 0), data.normals(i, 1), data.normals(i, 2)});
        }
        if (data.HasQuality()) row.push_back(data.quality(i));
        for (std::size_t k = 0; k < row.size(); ++k) {
            if (!binary && k > 0) os << ' ';
            put_float(row[k]);
        }
        if (!binary) os << '\n';
    }
    for (const auto &f : data.faces) {
        if (binary) {
            const std::uint8_t three = 3;
            os.write(reinterpret_cast<const char *>(&three), 1);
            for (int v : f) {
                const std::int32_t idx = v;
                os.write(reinterpret_cast<const char *>(&idx), sizeof(idx));
            }
        } else {
            os << "3 " << f[0] << ' ' << f[1] << ' ' << f[2] << '\n';
        }
    }
    if (!os) throw Error(ErrorCode::kIo, "write failed for " + path);
}

}  // namespace loggpis
