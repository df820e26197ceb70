#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "freqfit/errors.hpp"

namespace freqfit {

// Dense symmetric matrix, sized for the handful of parameters a frequency
// family carries (p is 1 or 2 everywhere in this library).
class SymMatrix {
 public:
  SymMatrix() = default;
  explicit SymMatrix(std::size_t n) : n_(n), a_(n * n, 0.0) {}

  static SymMatrix from_rows(std::initializer_list<std::initializer_list<double>> rows) {
    SymMatrix m(rows.size());
    std::size_t i = 0;
    for (const auto& row : rows) {
      if (row.size() != m.n_) throw std::invalid_argument("SymMatrix: ragged rows");
      std::size_t j = 0;
      for (double v : row) m(i, j++) = v;
      ++i;
    }
    return m;
  }

  std::size_t size() const noexcept { return n_; }
  double& operator()(std::size_t i, std::size_t j) { return a_[i * n_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return a_[i * n_ + j]; }

  double max_asymmetry() const {
    double worst = 0.0;
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t j = i + 1; j < n_; ++j)
        worst = std::fmax(worst, std::fabs((*this)(i, j) - (*this)(j, i)));
    return worst;
  }

  void symmetrize() {
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t j = i + 1; j < n_; ++j) {
        const double v = 0.5 * ((*this)(i, j) + (*this)(j, i));
        (*this)(i, j) = v;
        (*this)(j, i) = v;
      }
  }

  // Cholesky factor L with A = L L^T; fails if A is not positive definite.
  bool cholesky(SymMatrix& lower) const {
    lower = SymMatrix(n_);
    for (std::size_t i = 0; i < n_; ++i) {
      for (std::size_t j = 0; j <= i; ++j) {
        double s = (*this)(i, j);
        for (std::size_t k = 0; k < j; ++k) s -= lower(i, k) * lower(j, k);
        if (i == j) {
          if (!(s > 0.0)) return false;
          lower(i, i) = std::sqrt(s);
        } else {
          lower(i, j) = s / lower(j, j);
        }
      }
    }
    return true;
  }

  bool is_positive_definite() const {
    SymMatrix l;
    return cholesky(l);
  }

  // Inverse via the Cholesky factor; throws when not positive definite.
  SymMatrix inverse() const {
    SymMatrix l;
    if (!cholesky(l))
      throw numeric_error("SymMatrix::inverse: matrix is not positive definite");
    // Invert the lower triangle, then assemble A^{-1} = L^{-T} L^{-1}.
    SymMatrix linv(n_);
    for (std::size_t i = 0; i < n_; ++i) {
      linv(i, i) = 1.0 / l(i, i);
      for (std::size_t j = 0; j < i; ++j) {
        double s = 0.0;
        for (std::size_t k = j; k < i; ++k) s -= l(i, k) * linv(k, j);
        linv(i, j) = s / l(i, i);
      }
    }
    SymMatrix inv(n_);
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t j = 0; j <= i; ++j) {
        double s = 0.0;
        for (std::size_t k = i; k < n_; ++k) s += linv(k, i) * linv(k, j);
        inv(i, j) = s;
        inv(j, i) = s;
      }
    return inv;
  }

  // Eigenvalues by cyclic Jacobi rotations, ascending order.
  std::vector<double> eigenvalues() const {
    SymMatrix a = *this;
    a.symmetrize();
    const std::size_t n = n_;
    for (int sweep = 0; sweep < 100; ++sweep) {
      double off = 0.0;
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) off += a(i, j) * a(i, j);
      if (off < 1e-30) break;
      for (std::size_t p = 0; p < n; ++p)
        for (std::size_t q = p + 1; q < n; ++q) {
          if (a(p, q) == 0.0) continue;
          const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
          const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                           (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
          const double c = 1.0 / std::sqrt(t * t + 1.0);
          const double s = t * c;
          for (std::size_t k = 0; k < n; ++k) {
            const double akp = a(k, p), akq = a(k, q);
            a(k, p) = c * akp - s * akq;
            a(k, q) = s * akp + c * akq;
          }
          for (std::size_t k = 0; k < n; ++k) {
            const double apk = a(p, k), aqk = a(q, k);
            a(p, k) = c * apk - s * aqk;
            a(q, k) = s * apk + c * aqk;
          }
        }
    }
    std::vector<double> ev(n);
    for (std::size_t i = 0; i < n; ++i) ev[i] = a(i, i);
    std::sort(ev.begin(), ev.end());
    return ev;
  }

  SymMatrix operator-(const SymMatrix& rhs) const {
    if (rhs.n_ != n_) throw std::invalid_argument("SymMatrix: size mismatch");
    SymMatrix out(n_);
    for (std::size_t k = 0; k < a_.size(); ++k) out.a_[k] = a_[k] - rhs.a_[k];
    return out;
  }

  // x^T A x
  double quadratic_form(const std::vector<double>& x) const {
    if (x.size() != n_) throw std::invalid_argument("SymMatrix: vector size mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t j = 0; j < n_; ++j) s += x[i] * (*this)(i, j) * x[j];
    return s;
  }

 private:
  std::size_t n_ = 0;
  std::vector<double> a_;
};

}  // namespace freqfit
