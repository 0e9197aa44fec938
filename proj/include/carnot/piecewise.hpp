#pragma once

#include <string>
#include <vector>

#include "carnot/rational.hpp"

namespace carnot {

// Piecewise polynomial with exact rational coefficients on a partition
// a = b_0 < b_1 < ... < b_n = b. Piece i covers [b_i, b_{i+1}) except the
// last, which is closed. Coefficients are in the global monomial basis.
// `smoothness` is the highest derivative order that is validated to agree
// across interior breakpoints (C^{smoothness}).
class PiecewisePoly {
 public:
  PiecewisePoly(std::vector<Rat> breaks, std::vector<std::vector<Rat>> pieces, int smoothness);

  const std::vector<Rat>& breaks() const { return breaks_; }
  const std::vector<std::vector<Rat>>& pieces() const { return pieces_; }
  int smoothness() const { return smoothness_; }
  Rat domain_lo() const { return breaks_.front(); }
  Rat domain_hi() const { return breaks_.back(); }

  Rat operator()(const Rat& x) const { return eval_deriv(0, x); }
  Rat eval_deriv(int order, const Rat& x) const;
  double eval_deriv_d(int order, double x) const;

  PiecewisePoly derivative() const;
  // F(x) = int_{domain_lo}^x f
  PiecewisePoly antiderivative() const;
  // q(x) = p(alpha x + beta); domain transforms accordingly. alpha != 0.
  PiecewisePoly affine_substitute(const Rat& alpha, const Rat& beta) const;
  PiecewisePoly scaled(const Rat& c) const;
  PiecewisePoly operator-() const { return scaled(Rat(-1)); }
  // pointwise sum; domains must coincide, breakpoints are merged
  PiecewisePoly operator+(const PiecewisePoly& o) const;
  // concatenation; this->domain_hi() must equal o.domain_lo()
  static PiecewisePoly glue(const PiecewisePoly& left, const PiecewisePoly& right, int smoothness);

  // exact sup of |f^(order)| over [a,b] when that derivative is piecewise
  // constant (i.e. order >= max piece degree); throws otherwise
  Rat max_abs_piecewise_const_deriv(int order, const Rat& a, const Rat& b) const;

  int max_degree() const;
  int piece_index(const Rat& x) const;

  std::string to_json() const;
  static PiecewisePoly from_json(const std::string& text);

 private:
  std::vector<Rat> breaks_;
  std::vector<std::vector<Rat>> pieces_;
  int smoothness_;
};

// Exact nonnegativity of a polynomial on [a, b] via Bernstein-coefficient
// certificates with de Casteljau bisection. Complete whenever the polynomial
// has no interior tangential zero at a non-dyadic point (which never occurs
// for the inputs in this project); throws after max_depth splits.
bool poly_nonneg_on(const std::vector<Rat>& coeffs, const Rat& a, const Rat& b,
                    int max_depth = 64);

// f >= g on the whole domain of f (domains must match), exact.
bool piecewise_geq(const PiecewisePoly& f, const PiecewisePoly& g);

std::vector<Rat> poly_derivative(const std::vector<Rat>& c);
Rat poly_eval(const std::vector<Rat>& c, const Rat& x);

}  // namespace carnot
