#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include "aupipe/errors.hpp"

namespace aupipe {

inline constexpr const char* kProjectVersion = "1.0.0";

// The 12 action units annotated in DISFA, ascending.
inline constexpr std::array<int, 12> kAuNumbers = {1, 2, 4, 5, 6, 9, 12, 15, 17, 20, 25, 26};
inline constexpr std::size_t kAuCount = kAuNumbers.size();

/// Validated action-unit identifier. Only the 12 DISFA AUs are representable.
class AuId {
 public:
  /// Throws DomainError for any integer outside the 12-AU set.
  static AuId from_number(int number);

  static const std::array<AuId, kAuCount>& all();

  int number() const { return number_; }

  /// Position in kAuNumbers, 0..11. Used to index per-AU arrays.
  int index() const { return index_; }

  friend bool operator==(AuId a, AuId b) { return a.number_ == b.number_; }
  friend bool operator!=(AuId a, AuId b) { return a.number_ != b.number_; }
  friend bool operator<(AuId a, AuId b) { return a.number_ < b.number_; }

 private:
  AuId(int number, int index) : number_(number), index_(index) {}
  int number_;
  int index_;
};

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

/// Dense row-major matrix of doubles. The only matrix type used in the project;
/// feature files store float32 but all arithmetic happens in double.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}

  double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

  double* row(std::size_t r) { return data.data() + r * cols; }
  const double* row(std::size_t r) const { return data.data() + r * cols; }

  bool empty() const { return rows == 0 || cols == 0; }
};

}  // namespace aupipe
