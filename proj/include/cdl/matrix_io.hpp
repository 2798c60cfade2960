#pragma once

#include <cdl/types.hpp>

#include <filesystem>
#include <string>
#include <vector>

namespace cdl {

// Matrix files come in two flavours, selected by extension:
//   text   (any extension but ".bin"): a "rows cols" header line, then one
//          row per line of whitespace-separated values printed with 17
//          significant digits so doubles round-trip exactly;
//   binary (".bin"): uint64 rows, uint64 cols, then row-major little-endian
//          float64 payload.
// Readers reject non-finite entries and malformed files with errors naming
// the file and the offending position.

enum class MatrixFormat { Text, Binary };

MatrixFormat format_for(const std::filesystem::path& file);

/// Extension for the given format ("txt" or "bin").
std::string matrix_extension(MatrixFormat format);

Matrix read_matrix(const std::filesystem::path& file);
void write_matrix(const Matrix& m, const std::filesystem::path& file);

std::vector<int> read_labels(const std::filesystem::path& file);
void write_labels(const std::vector<int>& labels, const std::filesystem::path& file);

/// One non-empty line per entry; leading/trailing whitespace trimmed.
std::vector<std::string> read_names(const std::filesystem::path& file);
void write_names(const std::vector<std::string>& names, const std::filesystem::path& file);

/// "%.17g" rendering used everywhere a double is written as text.
std::string format_double(double value);

}  // namespace cdl
