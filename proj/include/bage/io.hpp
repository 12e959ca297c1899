#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "bage/common.hpp"

namespace bage {

// Writes to a sibling temporary file, then renames over the destination.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);
std::string read_text_file(const std::filesystem::path& path);

// Comma-separated fields; surrounding whitespace is trimmed. No quoting support.
std::vector<std::string> split_csv_line(std::string_view line);
std::string_view trim(std::string_view text);

long parse_long(std::string_view field, std::string_view what, long line);
double parse_double(std::string_view field, std::string_view what, long line);

// Shortest round-trip decimal representation.
std::string format_double(double value);

// Flat rows of little-endian IEEE-754 binary32 values, no header.
void write_f32_rows(std::ostream& out, const Matrix& rows);
Matrix read_f32_rows(std::istream& in, std::size_t dim);
void write_csv_rows(std::ostream& out, const Matrix& rows);

// Little-endian scalar encoding helpers.
void put_u32(std::string& out, std::uint32_t v);
void put_u64(std::string& out, std::uint64_t v);
void put_f32(std::string& out, float v);
void put_f64(std::string& out, double v);

class ByteReader {
 public:
  explicit ByteReader(std::string_view bytes) : bytes_(bytes) {}
  std::uint8_t u8();
  std::uint32_t u32();
  std::uint64_t u64();
  float f32();
  double f64();
  std::string_view take(std::size_t n);
  bool at_end() const { return pos_ == bytes_.size(); }

 private:
  std::string_view bytes_;
  std::size_t pos_ = 0;
};

}  // namespace bage
