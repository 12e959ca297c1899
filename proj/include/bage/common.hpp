#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace bage {

using Rng = std::mt19937_64;

enum class ErrorKind {
  Config,
  Io,
  Decode,
  Parse,
  MissingColumn,
  OutOfRange,
  OutOfBounds,
  EmptyInput,
  LengthMismatch,
  PatchTooSmall,
  NormalizedInput,
  DegenerateDataset,
  ShapeMismatch,
  WrongClassCount,
  Mismatch,
  NoPatches,
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message, long line = -1);

  ErrorKind kind() const noexcept { return kind_; }
  // 1-based line for parse errors, -1 otherwise.
  long line() const noexcept { return line_; }

 private:
  ErrorKind kind_;
  long line_;
};

[[noreturn]] void fail(ErrorKind kind, const std::string& message, long line = -1);

// Dense row-major matrix of doubles.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

  std::span<double> row(std::size_t i) { return {data.data() + i * cols, cols}; }
  std::span<const double> row(std::size_t i) const { return {data.data() + i * cols, cols}; }
  void push_row(std::span<const double> values);
};

// SplitMix64 finalizer; used to derive independent sub-seeds from a master seed.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

std::uint64_t fnv1a(std::string_view text);

// Runs fn(i) for i in [0, n) on up to `threads` workers. Results must be written
// to per-index slots so the outcome does not depend on scheduling.
template <typename Fn>
void parallel_for(std::size_t n, int threads, Fn&& fn);

double l2_norm(std::span<const double> v);

std::size_t argmax(std::span<const double> v);

}  // namespace bage

#include "bage/detail/parallel.hpp"
