#include "flab/linalg.hpp"

#include <sstream>

#include "flab/error.hpp"

namespace flab {

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1;
  return m;
}

Matrix Matrix::from_rows(const std::vector<Vec>& rows) {
  if (rows.empty()) return {};
  Matrix m(rows.size(), rows[0].size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != m.cols_) throw Error(ErrorKind::DimensionMismatch, "ragged rows");
    for (std::size_t c = 0; c < m.cols_; ++c) m(r, c) = rows[r][c];
  }
  return m;
}

Matrix Matrix::from_columns(const std::vector<Vec>& cols) { return from_rows(cols).transpose(); }

Vec Matrix::row(std::size_t r) const {
  return Vec(data_.begin() + static_cast<std::ptrdiff_t>(r * cols_),
             data_.begin() + static_cast<std::ptrdiff_t>((r + 1) * cols_));
}

Vec Matrix::column(std::size_t c) const {
  Vec v(rows_);
  for (std::size_t r = 0; r < rows_; ++r) v[r] = (*this)(r, c);
  return v;
}

Matrix Matrix::transpose() const {
  Matrix t(cols_, rows_);
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
  return t;
}

Matrix Matrix::operator*(const Matrix& other) const {
  if (cols_ != other.rows_) throw Error(ErrorKind::DimensionMismatch, "matrix product");
  Matrix out(rows_, other.cols_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t k = 0; k < cols_; ++k) {
      const Rational& a = (*this)(i, k);
      if (sgn(a) == 0) continue;
      for (std::size_t j = 0; j < other.cols_; ++j) out(i, j) += a * other(k, j);
    }
  return out;
}

Vec Matrix::operator*(const Vec& v) const {
  if (cols_ != v.size()) throw Error(ErrorKind::DimensionMismatch, "matrix-vector product");
  Vec out = zeros(rows_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t k = 0; k < cols_; ++k) out[i] += (*this)(i, k) * v[k];
  return out;
}

Matrix Matrix::operator+(const Matrix& other) const {
  if (rows_ != other.rows_ || cols_ != other.cols_) throw Error(ErrorKind::DimensionMismatch, "matrix sum");
  Matrix out = *this;
  for (std::size_t i = 0; i < data_.size(); ++i) out.data_[i] += other.data_[i];
  return out;
}

Matrix Matrix::operator-(const Matrix& other) const { return *this + other.scaled(-1); }

Matrix Matrix::scaled(const Rational& s) const {
  Matrix out = *this;
  for (auto& x : out.data_) x *= s;
  return out;
}

RowEchelon rref(Matrix m) {
  RowEchelon out;
  std::size_t lead_row = 0;
  for (std::size_t c = 0; c < m.cols() && lead_row < m.rows(); ++c) {
    std::size_t p = lead_row;
    while (p < m.rows() && sgn(m(p, c)) == 0) ++p;
    if (p == m.rows()) continue;
    if (p != lead_row)
      for (std::size_t j = 0; j < m.cols(); ++j) std::swap(m(p, j), m(lead_row, j));
    Rational inv = 1 / m(lead_row, c);
    for (std::size_t j = c; j < m.cols(); ++j) m(lead_row, j) *= inv;
    for (std::size_t r = 0; r < m.rows(); ++r) {
      if (r == lead_row || sgn(m(r, c)) == 0) continue;
      Rational f = m(r, c);
      for (std::size_t j = c; j < m.cols(); ++j) m(r, j) -= f * m(lead_row, j);
    }
    out.pivots.push_back(c);
    ++lead_row;
  }
  out.reduced = std::move(m);
  return out;
}

std::size_t rank(const Matrix& m) { return rref(m).pivots.size(); }

std::optional<Vec> solve(const Matrix& a, const Vec& b) {
  if (a.rows() != b.size()) throw Error(ErrorKind::DimensionMismatch, "solve: rhs length");
  Matrix aug(a.rows(), a.cols() + 1);
  for (std::size_t r = 0; r < a.rows(); ++r) {
    for (std::size_t c = 0; c < a.cols(); ++c) aug(r, c) = a(r, c);
    aug(r, a.cols()) = b[r];
  }
  RowEchelon e = rref(std::move(aug));
  if (!e.pivots.empty() && e.pivots.back() == a.cols()) return std::nullopt;
  Vec x = zeros(a.cols());
  for (std::size_t i = 0; i < e.pivots.size(); ++i) x[e.pivots[i]] = e.reduced(i, a.cols());
  return x;
}

std::vector<Vec> null_space(const Matrix& a) {
  RowEchelon e = rref(a);
  std::vector<bool> is_pivot(a.cols(), false);
  for (auto p : e.pivots) is_pivot[p] = true;
  std::vector<Vec> basis;
  for (std::size_t f = 0; f < a.cols(); ++f) {
    if (is_pivot[f]) continue;
    Vec v = zeros(a.cols());
    v[f] = 1;
    for (std::size_t i = 0; i < e.pivots.size(); ++i) v[e.pivots[i]] = -e.reduced(i, f);
    basis.push_back(std::move(v));
  }
  return basis;
}

std::optional<Matrix> inverse(const Matrix& a) {
  if (a.rows() != a.cols()) throw Error(ErrorKind::DimensionMismatch, "inverse of non-square matrix");
  std::size_t n = a.rows();
  Matrix aug(n, 2 * n);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < n; ++c) aug(r, c) = a(r, c);
    aug(r, n + r) = 1;
  }
  RowEchelon e = rref(std::move(aug));
  if (e.pivots.size() < n || e.pivots[n - 1] != n - 1) return std::nullopt;
  Matrix inv(n, n);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < n; ++c) inv(r, c) = e.reduced(r, n + c);
  return inv;
}

std::vector<Vec> gram_schmidt(const std::vector<Vec>& input) {
  std::vector<Vec> basis;
  std::vector<Rational> norms;
  for (const auto& v : input) {
    Vec w = v;
    for (std::size_t j = 0; j < basis.size(); ++j) {
      Rational coef = dot(v, basis[j]) / norms[j];
      if (sgn(coef) != 0) w = sub(w, scale(basis[j], coef));
    }
    if (is_zero(w)) continue;
    norms.push_back(dot(w, w));
    basis.push_back(std::move(w));
  }
  return basis;
}

std::string to_csv(const Matrix& m) {
  std::ostringstream os;
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t c = 0; c < m.cols(); ++c) {
      if (c) os << ',';
      os << format_rational(m(r, c));
    }
    os << '\n';
  }
  return os.str();
}

}  // namespace flab
