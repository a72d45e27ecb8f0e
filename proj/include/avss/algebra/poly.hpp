#pragma once

#include <stdexcept>
#include <vector>

#include "avss/algebra/curve.hpp"

namespace avss::algebra {

// Coefficient j multiplies x^j. Normalized: no trailing zeros except the
// zero polynomial, kept as a single zero coefficient.
struct Polynomial {
  std::vector<Fr> coeffs{Fr::zero()};

  static Polynomial from_coeffs(std::vector<Fr> c) {
    Polynomial p{std::move(c)};
    p.normalize();
    return p;
  }
  void normalize() {
    while (coeffs.size() > 1 && coeffs.back().is_zero()) coeffs.pop_back();
    if (coeffs.empty()) coeffs.push_back(Fr::zero());
  }
  std::size_t degree() const { return coeffs.size() - 1; }
  bool operator==(const Polynomial& o) const { return coeffs == o.coeffs; }

  Fr eval(const Fr& x) const {
    Fr acc = Fr::zero();
    for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it)
      acc = acc * x + *it;
    return acc;
  }
};

// Horner division by (x - i): the intermediates are the quotient
// coefficients and the final value is the remainder p(i).
inline std::pair<Polynomial, Fr> poly_div_linear(const Polynomial& p, const Fr& i) {
  if (p.degree() < 1) throw std::invalid_argument("poly_div_linear: constant");
  std::vector<Fr> q(p.degree());
  Fr acc = p.coeffs.back();
  for (std::size_t j = p.degree(); j-- > 0;) {
    q[j] = acc;
    acc = acc * i + p.coeffs[j];
  }
  return {Polynomial::from_coeffs(std::move(q)), acc};
}

inline Polynomial lagrange_interpolate(
    const std::vector<std::pair<Fr, Fr>>& points) {
  if (points.empty()) throw std::invalid_argument("interpolate: empty");
  for (std::size_t i = 0; i < points.size(); ++i)
    for (std::size_t j = i + 1; j < points.size(); ++j)
      if (points[i].first == points[j].first)
        throw std::invalid_argument("interpolate: duplicate x");
  std::size_t n = points.size();
  std::vector<Fr> out(n, Fr::zero());
  std::vector<Fr> basis;
  for (std::size_t i = 0; i < n; ++i) {
    // basis(x) = prod_{j != i} (x - x_j), then scale by y_i / basis(x_i).
    basis.assign(1, Fr::one());
    Fr denom = Fr::one();
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      basis.push_back(Fr::zero());
      for (std::size_t t = basis.size(); t-- > 1;)
        basis[t] = basis[t - 1] - basis[t] * points[j].first;
      basis[0] = -(basis[0] * points[j].first);
      denom *= points[i].first - points[j].first;
    }
    Fr scale = points[i].second * denom.inverse();
    for (std::size_t t = 0; t < basis.size(); ++t) out[t] += basis[t] * scale;
  }
  return Polynomial::from_coeffs(std::move(out));
}

inline std::vector<Fr> lagrange_coeffs_at(const std::vector<Fr>& xs,
                                          const Fr& x0) {
  std::vector<Fr> lam(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    Fr num = Fr::one(), den = Fr::one();
    for (std::size_t j = 0; j < xs.size(); ++j) {
      if (j == i) continue;
      if (xs[i] == xs[j]) throw std::invalid_argument("duplicate x");
      num *= x0 - xs[j];
      den *= xs[i] - xs[j];
    }
    lam[i] = num * den.inverse();
  }
  return lam;
}

template <typename Point>
Point interpolate_in_exponent(const std::vector<std::pair<Fr, Point>>& points,
                              const Fr& x0) {
  std::vector<Fr> xs(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) xs[i] = points[i].first;
  std::vector<Fr> lam = lagrange_coeffs_at(xs, x0);
  Point acc = Point::infinity();
  for (std::size_t i = 0; i < points.size(); ++i)
    acc += points[i].second.mul(lam[i].to_limbs());
  return acc;
}

// Precomputed inverses of pairwise index differences for interpolation at
// the fixed protocol points 0..n, so recurring interpolations do no field
// inversions.
class InterpolationTable {
 public:
  explicit InterpolationTable(std::uint32_t n) : n_(n) {
    xs_.reserve(n + 1);
    for (std::uint32_t i = 0; i <= n; ++i) xs_.push_back(Fr::from_u64(i));
    inv_diff_.assign((n + 1) * (n + 1), Fr::zero());
    for (std::uint32_t i = 0; i <= n; ++i)
      for (std::uint32_t j = 0; j <= n; ++j)
        if (i != j) inv_diff_[i * (n + 1) + j] = (xs_[i] - xs_[j]).inverse();
  }

  std::uint32_t n() const { return n_; }
  const Fr& x(std::uint32_t i) const { return xs_.at(i); }
  const Fr& inv_diff(std::uint32_t i, std::uint32_t j) const {
    return inv_diff_.at(i * (n_ + 1) + j);
  }

  // Lagrange coefficients for the subset `idx` of table points, evaluated at
  // table point x0. Inversion-free.
  std::vector<Fr> coeffs(const std::vector<std::uint32_t>& idx,
                         std::uint32_t x0) const {
    std::vector<Fr> lam(idx.size());
    for (std::size_t i = 0; i < idx.size(); ++i) {
      Fr v = Fr::one();
      for (std::size_t j = 0; j < idx.size(); ++j) {
        if (j == i) continue;
        v *= (xs_.at(x0) - xs_.at(idx[j])) * inv_diff(idx[i], idx[j]);
      }
      lam[i] = v;
    }
    return lam;
  }

 private:
  std::uint32_t n_;
  std::vector<Fr> xs_;
  std::vector<Fr> inv_diff_;
};

}  // namespace avss::algebra
