#ifndef LSR_IO_HPP
#define LSR_IO_HPP

// File formats.
//
// Text matrix:    "rows cols\n" then `rows` lines of `cols` space-separated
//                 decimals in shortest round-trip form.
// Binary matrix:  "LSRB", version byte 1, u32 LE rows, u32 LE cols, then
//                 rows·cols f64 LE values in row-major order.
// Manifest:       text description of a SeparatedMatrix whose factors live in
//                 binary matrix files next to it:
//                   lsr-separated 1
//                   shape <rows> <cols>
//                   terms <s>
//                   factors <r>
//                   term <lambda> <file_1> ... <file_r>     (s lines)
//                 Factor paths are relative to the manifest's directory.

#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "lsr/dense_matrix.hpp"
#include "lsr/errors.hpp"
#include "lsr/separated.hpp"

namespace lsr {

/// File could not be opened, read, written or parsed.
class IoError : public Error {
 public:
  using Error::Error;
};

inline constexpr std::array<char, 4> kBinaryMagic = {'L', 'S', 'R', 'B'};
inline constexpr std::uint8_t kBinaryVersion = 1;

/// Shortest decimal that parses back to exactly `v`.
inline std::string format_double(double v) {
  std::array<char, 32> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

inline double parse_double(std::string_view token) {
  double v = 0.0;
  const auto res = std::from_chars(token.data(), token.data() + token.size(), v);
  if (res.ec != std::errc() || res.ptr != token.data() + token.size()) {
    throw IoError("malformed number '" + std::string(token) + "'");
  }
  return v;
}

namespace detail {

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("read failure on '" + path.string() + "'");
  return bytes;
}

inline void write_file(const std::filesystem::path& path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failure on '" + path.string() + "'");
}

inline void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

inline std::uint32_t get_u32(std::string_view in, std::size_t at) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i)
    v |= static_cast<std::uint32_t>(static_cast<unsigned char>(in[at + i])) << (8 * i);
  return v;
}

inline void put_f64(std::string& out, double d) {
  const auto bits = std::bit_cast<std::uint64_t>(d);
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xff));
}

inline double get_f64(std::string_view in, std::size_t at) {
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i)
    bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(in[at + i])) << (8 * i);
  return std::bit_cast<double>(bits);
}

inline void require_finite(const DenseMatrix& m, const std::string& where) {
  if (!m.all_finite()) throw IoError(where + ": matrix contains NaN or Inf");
}

}  // namespace detail

inline std::string encode_text(const DenseMatrix& m) {
  std::string out = std::to_string(m.rows()) + " " + std::to_string(m.cols()) + "\n";
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) {
      if (j) out.push_back(' ');
      out += format_double(m(i, j));
    }
    out.push_back('\n');
  }
  return out;
}

inline DenseMatrix decode_text(std::string_view text, const std::string& where = "text matrix") {
  std::istringstream in{std::string(text)};
  std::size_t rows = 0, cols = 0;
  if (!(in >> rows >> cols) || rows == 0 || cols == 0) {
    throw IoError(where + ": header must be two positive integers 'rows cols'");
  }
  std::vector<double> values;
  values.reserve(detail::checked_mul(rows, cols));
  std::string token;
  while (in >> token) values.push_back(parse_double(token));
  if (values.size() != rows * cols) {
    throw IoError(where + ": header declares " + std::to_string(rows) + "x" +
                  std::to_string(cols) + " but payload has " + std::to_string(values.size()) +
                  " values");
  }
  DenseMatrix m(rows, cols, std::move(values));
  detail::require_finite(m, where);
  return m;
}

inline std::string encode_binary(const DenseMatrix& m) {
  if (m.rows() > UINT32_MAX || m.cols() > UINT32_MAX) {
    throw SizeError("binary matrix format is limited to 32-bit extents");
  }
  std::string out(kBinaryMagic.begin(), kBinaryMagic.end());
  out.push_back(static_cast<char>(kBinaryVersion));
  detail::put_u32(out, static_cast<std::uint32_t>(m.rows()));
  detail::put_u32(out, static_cast<std::uint32_t>(m.cols()));
  out.reserve(out.size() + 8 * m.size());
  for (double v : m.data()) detail::put_f64(out, v);
  return out;
}

inline DenseMatrix decode_binary(std::string_view bytes,
                                 const std::string& where = "binary matrix") {
  constexpr std::size_t header = 4 + 1 + 4 + 4;
  if (bytes.size() < header || std::memcmp(bytes.data(), kBinaryMagic.data(), 4) != 0) {
    throw IoError(where + ": missing LSRB magic");
  }
  if (static_cast<std::uint8_t>(bytes[4]) != kBinaryVersion) {
    throw IoError(where + ": unsupported version " +
                  std::to_string(static_cast<unsigned char>(bytes[4])));
  }
  const std::size_t rows = detail::get_u32(bytes, 5);
  const std::size_t cols = detail::get_u32(bytes, 9);
  if (rows == 0 || cols == 0) throw IoError(where + ": zero extent");
  const std::size_t n = detail::checked_mul(rows, cols);
  if (bytes.size() != header + 8 * n) {
    throw IoError(where + ": header declares " + std::to_string(rows) + "x" +
                  std::to_string(cols) + " but payload has " +
                  std::to_string(bytes.size() - header) + " bytes");
  }
  std::vector<double> values(n);
  for (std::size_t i = 0; i < n; ++i) values[i] = detail::get_f64(bytes, header + 8 * i);
  DenseMatrix m(rows, cols, std::move(values));
  detail::require_finite(m, where);
  return m;
}

enum class MatrixFormat { text, binary };

inline void write_matrix(const std::filesystem::path& path, const DenseMatrix& m,
                         MatrixFormat format) {
  detail::write_file(path, format == MatrixFormat::binary ? encode_binary(m) : encode_text(m));
}

/// Reads either format; binary is recognized by its magic bytes.
inline DenseMatrix read_matrix(const std::filesystem::path& path) {
  const std::string bytes = detail::read_file(path);
  if (bytes.size() >= 4 && std::memcmp(bytes.data(), kBinaryMagic.data(), 4) == 0) {
    return decode_binary(bytes, path.string());
  }
  return decode_text(bytes, path.string());
}

/// Writes `manifest` plus one binary file per factor, named
/// <stem>.t<k>.f<i>.lsrb in the manifest's directory.
inline void write_separated(const std::filesystem::path& manifest, const SeparatedMatrix& s) {
  const auto dir = manifest.parent_path();
  const std::string stem = manifest.stem().string();
  std::string text = "lsr-separated 1\n";
  text += "shape " + std::to_string(s.shape().rows) + " " + std::to_string(s.shape().cols) + "\n";
  text += "terms " + std::to_string(s.separation_rank()) + "\n";
  text += "factors " + std::to_string(s.factor_count()) + "\n";
  for (std::size_t k = 0; k < s.terms().size(); ++k) {
    const KronTerm& t = s.terms()[k];
    text += "term " + format_double(t.lambda);
    for (std::size_t i = 0; i < t.factors.size(); ++i) {
      const std::string name =
          stem + ".t" + std::to_string(k) + ".f" + std::to_string(i) + ".lsrb";
      write_matrix(dir / name, t.factors[i], MatrixFormat::binary);
      text += " " + name;
    }
    text += "\n";
  }
  detail::write_file(manifest, text);
}

inline SeparatedMatrix read_separated(const std::filesystem::path& manifest) {
  std::istringstream in(detail::read_file(manifest));
  const std::string where = manifest.string();
  std::string key;
  int version = 0;
  std::size_t rows = 0, cols = 0, terms = 0, factors = 0;
  if (!(in >> key >> version) || key != "lsr-separated" || version != 1)
    throw IoError(where + ": not an lsr-separated v1 manifest");
  if (!(in >> key >> rows >> cols) || key != "shape" || rows == 0 || cols == 0)
    throw IoError(where + ": bad shape line");
  if (!(in >> key >> terms) || key != "terms") throw IoError(where + ": bad terms line");
  if (!(in >> key >> factors) || key != "factors") throw IoError(where + ": bad factors line");
  if (terms > 0 && factors == 0) throw IoError(where + ": terms need at least one factor");

  SeparatedMatrix s(Shape{rows, cols});
  for (std::size_t k = 0; k < terms; ++k) {
    std::string lambda;
    if (!(in >> key >> lambda) || key != "term")
      throw IoError(where + ": missing term line " + std::to_string(k));
    KronTerm t;
    t.lambda = parse_double(lambda);
    for (std::size_t i = 0; i < factors; ++i) {
      std::string name;
      if (!(in >> name)) throw IoError(where + ": term " + std::to_string(k) + " is short");
      t.factors.push_back(read_matrix(manifest.parent_path() / name));
    }
    try {
      s.push_back(std::move(t));
    } catch (const ArgumentError& e) {
      throw IoError(where + ": " + e.what());
    }
  }
  return s;
}

}  // namespace lsr

#endif  // LSR_IO_HPP
