#pragma once

#include <optional>
#include <string>
#include <vector>

#include "flab/rational.hpp"

namespace flab {

class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols) {}
  static Matrix identity(std::size_t n);
  static Matrix from_rows(const std::vector<Vec>& rows);
  static Matrix from_columns(const std::vector<Vec>& cols);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  Rational& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  const Rational& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  Vec row(std::size_t r) const;
  Vec column(std::size_t c) const;
  Matrix transpose() const;
  Matrix operator*(const Matrix& other) const;
  Vec operator*(const Vec& v) const;
  Matrix operator+(const Matrix& other) const;
  Matrix operator-(const Matrix& other) const;
  Matrix scaled(const Rational& s) const;
  bool operator==(const Matrix& other) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<Rational> data_;
};

struct RowEchelon {
  Matrix reduced;                    // reduced row echelon form
  std::vector<std::size_t> pivots;   // pivot column per nonzero row
};

RowEchelon rref(Matrix m);
std::size_t rank(const Matrix& m);

// Solves A x = b. Free variables are set to zero, so the pivot (least-index)
// solution is returned. nullopt when the system is inconsistent.
std::optional<Vec> solve(const Matrix& a, const Vec& b);

// Basis of {x : A x = 0}, one vector per free column, in column order.
std::vector<Vec> null_space(const Matrix& a);

// Inverse of a square matrix; nullopt when singular.
std::optional<Matrix> inverse(const Matrix& a);

// Orthogonal (unnormalized) Gram-Schmidt under the standard inner product.
// Zero residuals are dropped, so the result spans span(input).
std::vector<Vec> gram_schmidt(const std::vector<Vec>& input);

// Rows as "p/q" separated by commas.
std::string to_csv(const Matrix& m);

}  // namespace flab
