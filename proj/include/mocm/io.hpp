#ifndef MOCM_IO_HPP
#define MOCM_IO_HPP

#include <filesystem>

#include "mocm/linalg.hpp"

namespace mocm {

// Self-describing binary matrix file:
//   8-byte magic "MOCMMAT1", little-endian u64 rows, u64 cols,
//   then rows*cols row-major IEEE-754 float64 values.
// Round-trips are bitwise lossless.

void write_matrix(const std::filesystem::path& path, const Matrix& m);
Matrix read_matrix(const std::filesystem::path& path);

// CSV escape hatch.  Matrices use a header row "v0,v1,...".  Onset
// matrices are stored as "t,c,value" triplets covering every cell so the
// shape is recoverable.

void write_matrix_csv(const std::filesystem::path& path, const Matrix& m);
Matrix read_matrix_csv(const std::filesystem::path& path);

void write_onsets_csv(const std::filesystem::path& path, const Matrix& tau);
Matrix read_onsets_csv(const std::filesystem::path& path);

/// Dispatches on extension: ".csv" goes through the CSV reader, anything
/// else through the binary one.
Matrix read_matrix_auto(const std::filesystem::path& path, bool onsets = false);

}  // namespace mocm

#endif  // MOCM_IO_HPP
