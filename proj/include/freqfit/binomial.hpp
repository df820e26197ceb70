#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <stdexcept>

namespace freqfit {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

namespace detail {

inline BigInt binomial_coefficient(int n, int k) {
  if (k < 0 || k > n) return 0;
  if (k > n - k) k = n - k;
  BigInt c = 1;
  for (int i = 1; i <= k; ++i) {
    c *= n - k + i;
    c /= i;  // exact at every step: C(n-k+i, i) is an integer
  }
  return c;
}

}  // namespace detail

// Symmetric binomial: n fair trials, exact probabilities C(n,k) / 2^n.
class SymmetricBinomial {
 public:
  explicit SymmetricBinomial(int trials) : trials_(trials) {
    if (trials < 1 || trials > 1000)
      throw std::domain_error("SymmetricBinomial: trials must be in 1..1000");
  }

  int trials() const noexcept { return trials_; }

  Rational pmf(int k) const {
    if (k < 0 || k > trials_)
      throw std::domain_error("SymmetricBinomial::pmf: k out of 0..n");
    BigInt denom = 1;
    denom <<= trials_;
    return Rational(detail::binomial_coefficient(trials_, k), denom);
  }

 private:
  int trials_;
};

// Residual of the exact difference-equation analogue of the normal score
// identity, for the symmetric binomial:
//
//   (p(k+1) - p(k)) / ((p(k+1) + p(k)) / 2)  +  ((k + 1/2) - n/2) / ((n+1)/4)
//
// computed entirely in rational arithmetic.  The identity holds exactly, so
// the residual is zero for every n and every 0 <= k < n.
inline Rational binomial_difference_identity_residual(int n, int k) {
  if (n < 1 || n > 1000)
    throw std::domain_error("binomial_difference_identity_residual: n must be in 1..1000");
  if (k < 0 || k >= n)
    throw std::domain_error("binomial_difference_identity_residual: k must be in 0..n-1");
  const SymmetricBinomial b(n);
  const Rational pk = b.pmf(k);
  const Rational pk1 = b.pmf(k + 1);
  const Rational lhs = 2 * (pk1 - pk) / (pk1 + pk);
  const Rational midpoint_deviation = Rational(2 * k + 1 - n, 2);  // (k + 1/2) - n/2
  const Rational variance_n_plus_1 = Rational(n + 1, 4);
  const Rational rhs = -midpoint_deviation / variance_n_plus_1;
  return lhs - rhs;
}

}  // namespace freqfit
