#include "bage/common.hpp"

#include <cmath>

namespace bage {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Config: return "ConfigError";
    case ErrorKind::Io: return "IoError";
    case ErrorKind::Decode: return "DecodeError";
    case ErrorKind::Parse: return "ParseError";
    case ErrorKind::MissingColumn: return "MissingColumn";
    case ErrorKind::OutOfRange: return "OutOfRange";
    case ErrorKind::OutOfBounds: return "OutOfBounds";
    case ErrorKind::EmptyInput: return "EmptyInput";
    case ErrorKind::LengthMismatch: return "LengthMismatch";
    case ErrorKind::PatchTooSmall: return "PatchTooSmall";
    case ErrorKind::NormalizedInput: return "NormalizedInput";
    case ErrorKind::DegenerateDataset: return "DegenerateDataset";
    case ErrorKind::ShapeMismatch: return "ShapeMismatch";
    case ErrorKind::WrongClassCount: return "WrongClassCount";
    case ErrorKind::Mismatch: return "Mismatch";
    case ErrorKind::NoPatches: return "NoPatches";
  }
  return "Error";
}

namespace {
std::string format_message(ErrorKind kind, const std::string& message, long line) {
  std::string out = to_string(kind);
  if (line >= 0) out += " (line " + std::to_string(line) + ")";
  out += ": " + message;
  return out;
}
}  // namespace

Error::Error(ErrorKind kind, const std::string& message, long line)
    : std::runtime_error(format_message(kind, message, line)), kind_(kind), line_(line) {}

void fail(ErrorKind kind, const std::string& message, long line) {
  throw Error(kind, message, line);
}

void Matrix::push_row(std::span<const double> values) {
  if (rows == 0 && cols == 0) cols = values.size();
  if (values.size() != cols) fail(ErrorKind::ShapeMismatch, "row width differs from matrix width");
  data.insert(data.end(), values.begin(), values.end());
  ++rows;
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint64_t fnv1a(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

double l2_norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

std::size_t argmax(std::span<const double> v) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < v.size(); ++i)
    if (v[i] > v[best]) best = i;
  return best;
}

}  // namespace bage
