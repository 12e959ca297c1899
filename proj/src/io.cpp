#include "bage/io.hpp"

#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

namespace bage {

static_assert(std::endian::native == std::endian::little, "serialisation assumes a little-endian host");

void write_file_atomic(const std::filesystem::path& path, std::string_view contents) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorKind::Io, "cannot write " + tmp.string());
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) fail(ErrorKind::Io, "write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) fail(ErrorKind::Io, "cannot rename " + tmp.string() + ": " + ec.message());
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::Io, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::string_view trim(std::string_view text) {
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = text.find_last_not_of(" \t\r\n");
  return text.substr(first, last - first + 1);
}

std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  for (;;) {
    const auto comma = line.find(',', start);
    fields.emplace_back(trim(line.substr(start, comma == std::string_view::npos ? line.npos : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return fields;
}

long parse_long(std::string_view field, std::string_view what, long line) {
  long v = 0;
  const auto* end = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(field.data(), end, v);
  if (field.empty() || ec != std::errc() || ptr != end)
    fail(ErrorKind::Parse, std::string(what) + ": not an integer: '" + std::string(field) + "'", line);
  return v;
}

double parse_double(std::string_view field, std::string_view what, long line) {
  double v = 0;
  const auto* end = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(field.data(), end, v);
  if (field.empty() || ec != std::errc() || ptr != end)
    fail(ErrorKind::Parse, std::string(what) + ": not a number: '" + std::string(field) + "'", line);
  return v;
}

std::string format_double(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return {buf, ptr};
}

void write_f32_rows(std::ostream& out, const Matrix& rows) {
  std::string bytes;
  bytes.reserve(rows.data.size() * 4);
  for (double v : rows.data) put_f32(bytes, static_cast<float>(v));
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

Matrix read_f32_rows(std::istream& in, std::size_t dim) {
  if (dim == 0) fail(ErrorKind::ShapeMismatch, "row width must be positive");
  std::string bytes{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  if (bytes.size() % (4 * dim) != 0)
    fail(ErrorKind::Decode, "f32 blob size is not a multiple of " + std::to_string(dim) + " floats");
  Matrix m(bytes.size() / (4 * dim), dim);
  ByteReader r(bytes);
  for (double& v : m.data) v = r.f32();
  return m;
}

void write_csv_rows(std::ostream& out, const Matrix& rows) {
  for (std::size_t i = 0; i < rows.rows; ++i) {
    auto row = rows.row(i);
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (j) out << ',';
      out << format_double(static_cast<float>(row[j]));
    }
    out << '\n';
  }
}

void put_u32(std::string& out, std::uint32_t v) {
  char b[4];
  std::memcpy(b, &v, 4);
  out.append(b, 4);
}

void put_u64(std::string& out, std::uint64_t v) {
  char b[8];
  std::memcpy(b, &v, 8);
  out.append(b, 8);
}

void put_f32(std::string& out, float v) { put_u32(out, std::bit_cast<std::uint32_t>(v)); }
void put_f64(std::string& out, double v) { put_u64(out, std::bit_cast<std::uint64_t>(v)); }

std::string_view ByteReader::take(std::size_t n) {
  if (bytes_.size() - pos_ < n) fail(ErrorKind::Decode, "unexpected end of data");
  auto s = bytes_.substr(pos_, n);
  pos_ += n;
  return s;
}

std::uint8_t ByteReader::u8() { return static_cast<std::uint8_t>(take(1)[0]); }

std::uint32_t ByteReader::u32() {
  std::uint32_t v;
  std::memcpy(&v, take(4).data(), 4);
  return v;
}

std::uint64_t ByteReader::u64() {
  std::uint64_t v;
  std::memcpy(&v, take(8).data(), 8);
  return v;
}

float ByteReader::f32() { return std::bit_cast<float>(u32()); }
double ByteReader::f64() { return std::bit_cast<double>(u64()); }

}  // namespace bage
