#pragma once

#include <filesystem>
#include <string>

#include "sbl/types.hpp"

namespace sbl {

enum class MatrixFormat { text, binary };

/// Text: header line "rows cols", then one line per row of %.17g values.
/// Binary: magic "SBLMAT01", two little-endian uint64 dims, row-major
/// little-endian IEEE-754 doubles. Writes go through a temp file + rename.
void save_matrix(const std::filesystem::path& path, const Matrix& m, MatrixFormat format);

/// Auto-detects the format by the 8-byte magic.
Matrix load_matrix(const std::filesystem::path& path);

}  // namespace sbl
