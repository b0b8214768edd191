#include "hcmm/matrix_io.hpp"

#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

namespace hcmm {

namespace {

constexpr std::array<char, 4> kMagic{'H', 'C', 'M', 'M'};
constexpr std::uint32_t kMaxDim = 1u << 30;

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(line.substr(start, comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

double parse_double(std::string_view s, std::size_t line_no) {
  s = trim(s);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) {
    throw std::runtime_error("matrix csv line " + std::to_string(line_no) + ": bad number '" +
                             std::string(s) + "'");
  }
  return v;
}

std::size_t parse_dim(std::string_view s) {
  s = trim(s);
  std::size_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || v == 0 || v > kMaxDim) {
    throw std::runtime_error("matrix csv header: bad dimension '" + std::string(s) + "'");
  }
  return v;
}

void put_u32(std::ostream& out, std::uint32_t v) {
  const std::array<char, 4> b{static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
                              static_cast<char>((v >> 16) & 0xff),
                              static_cast<char>((v >> 24) & 0xff)};
  out.write(b.data(), 4);
}

std::uint32_t get_u32(std::istream& in) {
  std::array<unsigned char, 4> b{};
  in.read(reinterpret_cast<char*>(b.data()), 4);
  if (!in) throw std::runtime_error("matrix binary: truncated header");
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

}  // namespace

DenseMatrix read_matrix_csv(std::istream& in) {
  std::string line;
  std::size_t line_no = 1;
  if (!std::getline(in, line)) throw std::runtime_error("matrix csv: empty input");
  const auto header = split(line);
  if (header.size() != 2) throw std::runtime_error("matrix csv header must be '<rows>,<cols>'");
  const std::size_t rows = parse_dim(header[0]);
  const std::size_t cols = parse_dim(header[1]);

  std::vector<double> data;
  data.reserve(rows * cols);
  for (std::size_t i = 0; i < rows; ++i) {
    ++line_no;
    if (!std::getline(in, line)) {
      throw std::runtime_error("matrix csv: expected " + std::to_string(rows) + " rows, got " +
                               std::to_string(i));
    }
    const auto fields = split(line);
    if (fields.size() != cols) {
      throw std::runtime_error("matrix csv line " + std::to_string(line_no) + ": expected " +
                               std::to_string(cols) + " values, got " +
                               std::to_string(fields.size()));
    }
    for (auto f : fields) data.push_back(parse_double(f, line_no));
  }
  return DenseMatrix(rows, cols, std::move(data));
}

void write_matrix_csv(std::ostream& out, const DenseMatrix& m) {
  out << m.rows() << ',' << m.cols() << '\n';
  const auto old = out.precision(17);
  for (std::size_t i = 0; i < m.rows(); ++i) {
    const auto row = m.row(i);
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (j) out << ',';
      out << row[j];
    }
    out << '\n';
  }
  out.precision(old);
}

DenseMatrix read_matrix_binary(std::istream& in) {
  std::array<char, 4> magic{};
  in.read(magic.data(), 4);
  if (!in || magic != kMagic) throw std::runtime_error("matrix binary: bad magic");
  const std::uint32_t rows = get_u32(in);
  const std::uint32_t cols = get_u32(in);
  (void)get_u32(in);  // reserved
  if (rows == 0 || cols == 0 || rows > kMaxDim || cols > kMaxDim) {
    throw std::runtime_error("matrix binary: bad dimensions");
  }
  std::vector<double> data(static_cast<std::size_t>(rows) * cols);
  for (double& v : data) {
    std::array<unsigned char, 8> b{};
    in.read(reinterpret_cast<char*>(b.data()), 8);
    if (!in) throw std::runtime_error("matrix binary: truncated payload");
    std::uint64_t bits = 0;
    for (int k = 7; k >= 0; --k) bits = (bits << 8) | b[static_cast<std::size_t>(k)];
    v = std::bit_cast<double>(bits);
  }
  return DenseMatrix(rows, cols, std::move(data));
}

void write_matrix_binary(std::ostream& out, const DenseMatrix& m) {
  if (m.rows() > kMaxDim || m.cols() > kMaxDim) {
    throw std::invalid_argument("matrix too large for binary format");
  }
  out.write(kMagic.data(), 4);
  put_u32(out, static_cast<std::uint32_t>(m.rows()));
  put_u32(out, static_cast<std::uint32_t>(m.cols()));
  put_u32(out, 0);
  for (double v : m.data()) {
    auto bits = std::bit_cast<std::uint64_t>(v);
    std::array<char, 8> b{};
    for (auto& c : b) {
      c = static_cast<char>(bits & 0xff);
      bits >>= 8;
    }
    out.write(b.data(), 8);
  }
}

DenseMatrix read_matrix_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open matrix file " + path.string());
  std::array<char, 4> magic{};
  in.read(magic.data(), 4);
  const bool binary = in.gcount() == 4 && magic == kMagic;
  in.clear();
  in.seekg(0);
  return binary ? read_matrix_binary(in) : read_matrix_csv(in);
}

void write_matrix_file(const std::filesystem::path& path, const DenseMatrix& m, bool binary) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write matrix file " + path.string());
  binary ? write_matrix_binary(out, m) : write_matrix_csv(out, m);
}

}  // namespace hcmm
