#pragma once

#include <array>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "carnot/bch.hpp"

namespace carnot {

// tau^2(x,y) = sum over every ordered horizontal index pair (n,m) of
// (x_{1,n} y_{1,m} - x_{1,m} y_{1,n})^2. Polynomial, so exact over Rat.
template <class S>
S tau_sq(const Point<S>& x, const Point<S>& y) {
  const GradedAlgebra& a = *x.alg;
  int k1 = a.dims[0];
  S out(0);
  for (int n = 0; n < k1; ++n)
    for (int m = 0; m < k1; ++m) {
      S t = x.c[n] * y.c[m] - x.c[m] * y.c[n];
      out += t * t;
    }
  return out;
}

inline double tau(const Point<double>& x, const Point<double>& y) {
  return std::sqrt(tau_sq(x, y));
}

template <class S>
S layer_norm_sq(const Point<S>& x, int layer) {
  const GradedAlgebra& a = *x.alg;
  S out(0);
  for (int j = a.offset[layer - 1]; j < a.offset[layer]; ++j) out += x.c[j] * x.c[j];
  return out;
}

template <class S>
S pair_layer_norm_sq(const Point<S>& x, const Point<S>& y, int layer) {
  return layer_norm_sq(x, layer) + layer_norm_sq(y, layer);
}

// D_s, the graded-homogeneous polynomial of degree 2s dominating the squares
// of the product's deviation terms. Recursive; exact over Rat.
template <class S>
S dominating_poly(int s, const Point<S>& x, const Point<S>& y) {
  if (s < 2 || s > x.alg->step) throw std::invalid_argument("dominating_poly: s out of range");
  if (s == 2) return tau_sq(x, y) + pair_layer_norm_sq(x, y, 2);
  S out = pair_layer_norm_sq(x, y, s);
  for (int sp = 1; sp <= s / 2; ++sp)
    out += pair_layer_norm_sq(x, y, sp) * dominating_poly(s - sp, x, y);
  return out;
}

// SN_s(x,y) = max(||x_1 - y_1/2||, ||(x_i,y_i)||^{1/i} for 2 <= i <= s).
double layer_seminorm(int s, const Point<double>& x, const Point<double>& y);

struct MarginPolicy {
  double c_floor = 1e-3;
  int max_halvings = 60;
};

struct CalibrationRecord {
  std::int64_t samples = 0;
  std::uint64_t seed = 0;
  std::map<int, double> margin;  // per level: min over samples of lhs - c_floor*rhs
  std::map<int, double> c_hat;   // per level: min over samples of lhs/rhs
  double c_floor = 0;
};

struct QuasiNormParams {
  Alg alg;
  Bch table;
  std::map<int, Rat> lambda;  // level -> lambda_s (dyadic, from the halving search)
  CalibrationRecord record;
  std::optional<double> c_prime_hat;  // filled by check_fourpoint

  std::string to_json() const;
};

// N_s(x), the recursive homogeneous quasi-norm with the calibrated lambdas.
double quasi_norm(const QuasiNormParams& p, int s, const Point<double>& x);
inline double quasi_norm(const QuasiNormParams& p, int s, const Point<Rat>& x) {
  Point<double> xd(x.alg);
  for (int i = 0; i < x.alg->dim; ++i) xd.c[i] = x.c[i].get_d();
  return quasi_norm(p, s, xd);
}

// d_N(x,y) = N_r(y^{-1} x)
double metric(const QuasiNormParams& p, const Point<double>& x, const Point<double>& y);

struct CalibrationError : std::runtime_error {
  CalibrationError(const std::string& what, std::string witness_)
      : std::runtime_error(what), witness(std::move(witness_)) {}
  std::string witness;
};

// For s = 2..r in order, halves lambda_s from 1 until the level-s convexity
// inequality holds with constant policy.c_floor on all sampled pairs, drawn
// uniformly from [-1,1]^dim and jointly dilated onto the N_s unit sphere.
QuasiNormParams calibrate(Alg a, std::int64_t samples, std::uint64_t seed,
                          const MarginPolicy& policy = {}, int threads = 0);

// Re-checks the level inequalities for already-fixed lambdas on fresh samples.
struct CertifyReport {
  std::int64_t samples = 0;
  std::uint64_t seed = 0;
  std::map<int, double> margin;
  std::int64_t violations = 0;
  std::string witness;
};
CertifyReport certify(const QuasiNormParams& p, std::int64_t samples, std::uint64_t seed,
                      int threads = 0);

// Minimum over sampled quadruples of the 4-point ratio
//   [(2d(y,x)^{2p}+d(y,w)^{2p}+d(y,z)^{2p})/2 - (d(x,w)/2)^{2p} - (d(x,z)/2)^{2p}]
//     / d(w,z)^{2p}
// Quadruples with denominator below 1e-14 are skipped.
struct FourPointReport {
  double p = 0;
  double c_prime_hat = 0;
  std::int64_t samples = 0;
  std::int64_t skipped = 0;
  std::uint64_t seed = 0;
  std::string witness;
};
FourPointReport check_fourpoint(const QuasiNormParams& params, double p, std::int64_t samples,
                                std::uint64_t seed, int threads = 0);

}  // namespace carnot
