#pragma once

#include <optional>
#include <string>

#include "vabft/precision.hpp"

namespace vabft {

/// Binary matrix container: magic "VABFTMAT", u32 version, u8 format id,
/// u64 rows, u64 cols, then rows*cols little-endian FP64 values.
inline constexpr uint32_t kMatrixFileVersion = 1;

void save_matrix_binary(const Matrix& m, const std::string& path);
Matrix load_matrix_binary(const std::string& path);

/// CSV: one matrix row per line, comma separated.
void save_matrix_csv(const Matrix& m, const std::string& path);
Matrix load_matrix_csv(const std::string& path, const PrecisionSpec& fmt);

/// Picks the loader by probing for the binary magic; CSV needs the format
/// to quantize into (binary files carry their own).
Matrix load_matrix_auto(const std::string& path,
                        const std::optional<PrecisionSpec>& csv_format = std::nullopt);

} // namespace vabft
