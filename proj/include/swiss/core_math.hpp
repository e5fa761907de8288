#pragma once

#include <cstddef>
#include <functional>
#include <initializer_list>
#include <span>
#include <vector>

namespace swiss {

using Vector = std::vector<double>;

/// Dense row-major matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);
  Matrix(std::initializer_list<std::initializer_list<double>> rows);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }
  Vector row_vector(std::size_t r) const;
  void set_row(std::size_t r, std::span<const double> values);
  void append_row(std::span<const double> values);

  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

  bool same_shape(const Matrix& other) const {
    return rows_ == other.rows_ && cols_ == other.cols_;
  }
  bool all_finite() const;

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

double dot(std::span<const double> a, std::span<const double> b);
double norm(std::span<const double> v);

/// out = a * b^T  (a: n x m, b: p x m, out: n x p)
Matrix matmul_transposed(const Matrix& a, const Matrix& b);
/// out = a^T * b  (a: n x m, b: n x p, out: m x p)
Matrix transposed_matmul(const Matrix& a, const Matrix& b);
/// out = a * b  (a: n x m, b: m x p)
Matrix matmul(const Matrix& a, const Matrix& b);

/// Numerically stable softmax (max subtraction). Throws InvalidInputError on
/// empty or non-finite input.
Vector softmax(std::span<const double> logits);
Matrix softmax_rows(const Matrix& logits);

/// tau * v / ||v||. Throws DegenerateInputError for the zero vector.
Vector l2_normalize(std::span<const double> v, double tau);

/// 1 - cos(a, b), in [0, 2]. Throws DegenerateInputError if either is zero.
double cosine_distance(std::span<const double> a, std::span<const double> b);

/// Index of the largest entry; ties go to the lowest index.
std::size_t argmax(std::span<const double> v);

inline constexpr double kDefaultFiniteDiffEps = 1e-5;

/// Central finite-difference gradient of a scalar function.
Vector finite_diff_gradient(const std::function<double(const Vector&)>& f, const Vector& x,
                            double eps = kDefaultFiniteDiffEps);

}  // namespace swiss
