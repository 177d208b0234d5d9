#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <vector>

#include "semimod/errors.hpp"

namespace semimod {

using Complex = std::complex<double>;

/// Dense complex matrix, row-major. Zero-sized shapes are valid values;
/// they show up as bases of zero-dimensional spaces.
class CMatrix {
 public:
  CMatrix() = default;
  CMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols) {}

  static CMatrix identity(std::size_t n) {
    CMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  static CMatrix zero(std::size_t rows, std::size_t cols) { return CMatrix(rows, cols); }

  /// Matrix unit E_{ij}.
  static CMatrix unit(std::size_t rows, std::size_t cols, std::size_t i, std::size_t j) {
    CMatrix m(rows, cols);
    m(i, j) = 1.0;
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  Complex& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  const Complex& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  const std::vector<Complex>& data() const { return data_; }
  std::vector<Complex>& data() { return data_; }

  bool same_shape(const CMatrix& o) const { return rows_ == o.rows_ && cols_ == o.cols_; }

  CMatrix adjoint() const {
    CMatrix a(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j) a(j, i) = std::conj((*this)(i, j));
    return a;
  }

  CMatrix transpose() const {
    CMatrix t(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    return t;
  }

  CMatrix conjugate() const {
    CMatrix c(rows_, cols_);
    for (std::size_t k = 0; k < data_.size(); ++k) c.data_[k] = std::conj(data_[k]);
    return c;
  }

  CMatrix& operator+=(const CMatrix& o) {
    require_same_shape(o, "operator+=");
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += o.data_[k];
    return *this;
  }

  CMatrix& operator-=(const CMatrix& o) {
    require_same_shape(o, "operator-=");
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] -= o.data_[k];
    return *this;
  }

  CMatrix& operator*=(Complex s) {
    for (auto& z : data_) z *= s;
    return *this;
  }

  friend CMatrix operator+(CMatrix a, const CMatrix& b) { return a += b; }
  friend CMatrix operator-(CMatrix a, const CMatrix& b) { return a -= b; }
  friend CMatrix operator*(Complex s, CMatrix a) { return a *= s; }
  friend CMatrix operator*(CMatrix a, Complex s) { return a *= s; }

  CMatrix operator-() const {
    CMatrix m = *this;
    for (auto& z : m.data_) z = -z;
    return m;
  }

  friend CMatrix operator*(const CMatrix& a, const CMatrix& b) {
    if (a.cols_ != b.rows_)
      throw ShapeMismatch("matrix product " + shape_str(a) + " * " + shape_str(b));
    CMatrix c(a.rows_, b.cols_);
    for (std::size_t i = 0; i < a.rows_; ++i) {
      for (std::size_t k = 0; k < a.cols_; ++k) {
        const Complex aik = a(i, k);
        if (aik == Complex(0.0)) continue;
        for (std::size_t j = 0; j < b.cols_; ++j) c(i, j) += aik * b(k, j);
      }
    }
    return c;
  }

  double frobenius_norm() const {
    double s = 0.0;
    for (const auto& z : data_) s += std::norm(z);
    return std::sqrt(s);
  }

  double max_abs() const {
    double m = 0.0;
    for (const auto& z : data_) m = std::max(m, std::abs(z));
    return m;
  }

  Complex trace() const {
    Complex t = 0.0;
    for (std::size_t i = 0; i < std::min(rows_, cols_); ++i) t += (*this)(i, i);
    return t;
  }

  CMatrix block(std::size_t r0, std::size_t c0, std::size_t nr, std::size_t nc) const {
    CMatrix b(nr, nc);
    for (std::size_t i = 0; i < nr; ++i)
      for (std::size_t j = 0; j < nc; ++j) b(i, j) = (*this)(r0 + i, c0 + j);
    return b;
  }

  void set_block(std::size_t r0, std::size_t c0, const CMatrix& b) {
    for (std::size_t i = 0; i < b.rows_; ++i)
      for (std::size_t j = 0; j < b.cols_; ++j) (*this)(r0 + i, c0 + j) = b(i, j);
  }

  CMatrix col(std::size_t j) const { return block(0, j, rows_, 1); }

  /// Row-major vectorization as a column vector.
  CMatrix vec() const {
    CMatrix v(data_.size(), 1);
    for (std::size_t k = 0; k < data_.size(); ++k) v(k, 0) = data_[k];
    return v;
  }

  static CMatrix unvec(const CMatrix& v, std::size_t rows, std::size_t cols) {
    CMatrix m(rows, cols);
    for (std::size_t k = 0; k < rows * cols; ++k) m.data_[k] = v(k, 0);
    return m;
  }

 private:
  static std::string shape_str(const CMatrix& m) {
    return std::to_string(m.rows_) + "x" + std::to_string(m.cols_);
  }
  void require_same_shape(const CMatrix& o, const char* where) const {
    if (!same_shape(o)) throw ShapeMismatch(std::string(where) + " " + shape_str(*this) + " vs " + shape_str(o));
  }

  std::size_t rows_ = 0, cols_ = 0;
  std::vector<Complex> data_;
};

inline CMatrix kron(const CMatrix& a, const CMatrix& b) {
  CMatrix k(a.rows() * b.rows(), a.cols() * b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) {
      const Complex aij = a(i, j);
      if (aij == Complex(0.0)) continue;
      for (std::size_t r = 0; r < b.rows(); ++r)
        for (std::size_t c = 0; c < b.cols(); ++c)
          k(i * b.rows() + r, j * b.cols() + c) = aij * b(r, c);
    }
  return k;
}

/// (M + M*)/2.
inline CMatrix hermitize(const CMatrix& m) {
  CMatrix h = m;
  h += m.adjoint();
  h *= 0.5;
  return h;
}

inline double hermiticity_defect(const CMatrix& m) {
  double d = 0.0;
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j)
      d = std::max(d, std::abs(m(i, j) - std::conj(m(j, i))));
  return d;
}

/// Stack matrices side by side; all must share a row count.
inline CMatrix hcat(const std::vector<CMatrix>& parts, std::size_t rows) {
  std::size_t total = 0;
  for (const auto& p : parts) total += p.cols();
  CMatrix out(rows, total);
  std::size_t at = 0;
  for (const auto& p : parts) {
    if (p.rows() != rows) throw ShapeMismatch("hcat row counts differ");
    out.set_block(0, at, p);
    at += p.cols();
  }
  return out;
}

inline CMatrix direct_sum(const CMatrix& a, const CMatrix& b) {
  CMatrix s(a.rows() + b.rows(), a.cols() + b.cols());
  s.set_block(0, 0, a);
  s.set_block(a.rows(), a.cols(), b);
  return s;
}

namespace defaults {
inline constexpr double kHermTol = 1e-10;    // relative hermiticity tolerance
inline constexpr double kPsdTol = 1e-9;      // min eigenvalue >= -kPsdTol*(1+norm) counts as PSD
inline constexpr double kRankTol = 1e-8;     // singular values >= kRankTol*sigma_max are kept
}  // namespace defaults

}  // namespace semimod
