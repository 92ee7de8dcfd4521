#include "mocm/io.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace mocm {

namespace {

constexpr char kMagic[8] = {'M', 'O', 'C', 'M', 'M', 'A', 'T', '1'};

[[noreturn]] void fail(const std::filesystem::path& path, const std::string& what) {
  throw std::runtime_error(path.string() + ": " + what);
}

std::uint64_t read_u64_le(std::istream& in) {
  unsigned char buf[8];
  in.read(reinterpret_cast<char*>(buf), 8);
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | buf[i];
  return v;
}

void write_u64_le(std::ostream& out, std::uint64_t v) {
  unsigned char buf[8];
  for (int i = 0; i < 8; ++i) buf[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
  out.write(reinterpret_cast<const char*>(buf), 8);
}

}  // namespace

void write_matrix(const std::filesystem::path& path, const Matrix& m) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(path, "cannot open for writing");
  out.write(kMagic, 8);
  write_u64_le(out, static_cast<std::uint64_t>(m.rows()));
  write_u64_le(out, static_cast<std::uint64_t>(m.cols()));
  // Payload is row-major float64.
  std::vector<double> row(static_cast<std::size_t>(m.cols()));
  for (Index r = 0; r < m.rows(); ++r) {
    for (Index c = 0; c < m.cols(); ++c) row[static_cast<std::size_t>(c)] = m(r, c);
    out.write(reinterpret_cast<const char*>(row.data()),
              static_cast<std::streamsize>(row.size() * sizeof(double)));
  }
  if (!out) fail(path, "write failure");
}

Matrix read_matrix(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(path, "cannot open");
  char magic[8];
  in.read(magic, 8);
  if (!in || std::memcmp(magic, kMagic, 8) != 0) fail(path, "bad magic, not a MOCMMAT1 file");
  const std::uint64_t rows = read_u64_le(in);
  const std::uint64_t cols = read_u64_le(in);
  if (!in) fail(path, "truncated header");
  Matrix m(static_cast<Index>(rows), static_cast<Index>(cols));
  std::vector<double> row(cols);
  for (std::uint64_t r = 0; r < rows; ++r) {
    in.read(reinterpret_cast<char*>(row.data()),
            static_cast<std::streamsize>(cols * sizeof(double)));
    if (!in) fail(path, "truncated payload at row " + std::to_string(r));
    for (std::uint64_t c = 0; c < cols; ++c) {
      m(static_cast<Index>(r), static_cast<Index>(c)) = row[c];
    }
  }
  return m;
}

void write_matrix_csv(const std::filesystem::path& path, const Matrix& m) {
  std::ofstream out(path);
  if (!out) fail(path, "cannot open for writing");
  out.precision(17);
  for (Index c = 0; c < m.cols(); ++c) {
    out << (c ? "," : "") << 'v' << c;
  }
  out << '\n';
  for (Index r = 0; r < m.rows(); ++r) {
    for (Index c = 0; c < m.cols(); ++c) {
      out << (c ? "," : "") << m(r, c);
    }
    out << '\n';
  }
}

Matrix read_matrix_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(path, "cannot open");
  std::string line;
  if (!std::getline(in, line)) fail(path, "missing header row");
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
    if (!rows.empty() && row.size() != rows.front().size()) {
      fail(path, "ragged row at line " + std::to_string(rows.size() + 2));
    }
    rows.push_back(std::move(row));
  }
  const Index r = static_cast<Index>(rows.size());
  const Index c = rows.empty() ? 0 : static_cast<Index>(rows.front().size());
  Matrix m(r, c);
  for (Index i = 0; i < r; ++i)
    for (Index j = 0; j < c; ++j) m(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  return m;
}

void write_onsets_csv(const std::filesystem::path& path, const Matrix& tau) {
  std::ofstream out(path);
  if (!out) fail(path, "cannot open for writing");
  out.precision(17);
  out << "t,c,value\n";
  for (Index t = 0; t < tau.rows(); ++t) {
    for (Index c = 0; c < tau.cols(); ++c) {
      out << t << ',' << c << ',' << tau(t, c) << '\n';
    }
  }
}

Matrix read_onsets_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(path, "cannot open");
  std::string line;
  if (!std::getline(in, line)) fail(path, "missing header row");
  struct Triplet {
    Index t, c;
    double v;
  };
  std::vector<Triplet> trips;
  Index max_t = -1, max_c = -1;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    Triplet trip{};
    if (!std::getline(ss, cell, ',')) fail(path, "bad triplet row");
    trip.t = static_cast<Index>(std::stoll(cell));
    if (!std::getline(ss, cell, ',')) fail(path, "bad triplet row");
    trip.c = static_cast<Index>(std::stoll(cell));
    if (!std::getline(ss, cell, ',')) fail(path, "bad triplet row");
    trip.v = std::stod(cell);
    max_t = std::max(max_t, trip.t);
    max_c = std::max(max_c, trip.c);
    trips.push_back(trip);
  }
  Matrix tau = Matrix::Zero(max_t + 1, max_c + 1);
  for (const Triplet& trip : trips) tau(trip.t, trip.c) = trip.v;
  return tau;
}

Matrix read_matrix_auto(const std::filesystem::path& path, bool onsets) {
  if (path.extension() == ".csv") {
    return onsets ? read_onsets_csv(path) : read_matrix_csv(path);
  }
  return read_matrix(path);
}

}  // namespace mocm
