#pragma once

#include <array>
#include <string>
#include <vector>

#include "loggpis/types.hpp"

namespace loggpis {

enum class PlyFormat { kAscii, kBinaryLittleEndian };

/// Vertex cloud or triangle mesh. Empty `normals` / `quality` mean the
/// property is absent from the file.
struct PlyData {
    Points positions;  // N x 3
    Points normals;    // N x 3 or empty
    Vector quality;    // N or empty (per-vertex variance for meshes)
    std::vector<std::array<int, 3>> faces;

    [[nodiscard]] bool HasNormals() const { return normals.rows() > 0; }
    [[nodiscard]] bool HasQuality() const { return quality.size() > 0; }
};

/// Reads ASCII or binary little-endian PLY. Throws kParse with the offending
/// header line, or the element index for truncated bodies.
PlyData LoadPly(const std::string &path);
void SavePly(const std::string &path, const PlyData &data,
             PlyFormat format = PlyFormat::kBinaryLittleEndian);

}  // namespace loggpis
