#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "carnot/piecewise.hpp"
#include "carnot/rational.hpp"

namespace carnot {

// Point of the step-r jet group over the line: an x-coordinate and the
// derivative values u_0..u_{r-1} (u[i] is the order-i coordinate). Printed as
// (x; u_{r-1},...,u_0).
template <class S>
struct JetPoint {
  int r = 1;
  S x{};
  std::vector<S> u;  // u[i] = pi_i, i = 0..r-1

  JetPoint() = default;
  JetPoint(int r_, S x_, std::vector<S> u_) : r(r_), x(std::move(x_)), u(std::move(u_)) {
    if (static_cast<int>(u.size()) != r) throw std::invalid_argument("jet: wrong u length");
  }
  static JetPoint zero(int r_) { return JetPoint(r_, S(0), std::vector<S>(r_, S(0))); }

  bool operator==(const JetPoint& o) const { return r == o.r && x == o.x && u == o.u; }
};

template <class S>
JetPoint<S> jet_product(const JetPoint<S>& p, const JetPoint<S>& q) {
  if (p.r != q.r) throw std::invalid_argument("jet_product: rank mismatch");
  int r = p.r;
  JetPoint<S> out = JetPoint<S>::zero(r);
  out.x = p.x + q.x;
  // factorials fit comfortably for r <= 6
  long fact[8] = {1, 1, 2, 6, 24, 120, 720, 5040};
  for (int i = 0; i < r; ++i) {
    S acc = p.u[i] + q.u[i];
    S pw(1);
    for (int j = i + 1; j < r; ++j) {
      pw = pw * q.x;
      acc += p.u[j] * pw / S(fact[j - i]);
    }
    out.u[i] = acc;
  }
  return out;
}

template <class S>
JetPoint<S> jet_inverse(const JetPoint<S>& p) {
  int r = p.r;
  JetPoint<S> inv = JetPoint<S>::zero(r);
  inv.x = -p.x;
  long fact[8] = {1, 1, 2, 6, 24, 120, 720, 5040};
  // solve (inv * p) = identity from the top derivative down
  for (int i = r - 1; i >= 0; --i) {
    S acc = p.u[i];
    S pw(1);
    for (int j = i + 1; j < r; ++j) {
      pw = pw * p.x;
      acc += inv.u[j] * pw / S(fact[j - i]);
    }
    inv.u[i] = -acc;
  }
  return inv;
}

// x has weight 1, u_i has weight r - i.
template <class S>
JetPoint<S> jet_dilate(const S& t, const JetPoint<S>& p) {
  if (!(t > S(0))) throw std::invalid_argument("jet_dilate: t must be positive");
  JetPoint<S> out = p;
  out.x = t * p.x;
  S pw(1);
  for (int i = p.r - 1; i >= 0; --i) {
    pw = pw * t;  // t^{r-i}
    out.u[i] = pw * p.u[i];
  }
  return out;
}

JetPoint<Rat> jet_of(const PiecewisePoly& f, const Rat& y, int r);

std::string jet_str(const JetPoint<Rat>& p);

// The bump used by the graph embeddings: phi on [0,1] with zero jets at the
// endpoints, symmetric about 1/2, phi >= (2x)^r on [0,1/2], and piecewise
// constant r-th derivative on the dyadic grid of mesh 2^-r.
PiecewisePoly build_phi(int r);

struct PhiChecks {
  bool symmetric;
  bool dominates_power;   // phi >= (2x)^r on [0,1/2]
  bool zero_jets;         // jets at 0 and 1
  bool rth_deriv_dyadic;  // r-th derivative constant on [i 2^-r, (i+1) 2^-r)
  bool max_at_center;     // sup phi attained at 1/2
  Rat phi_max;            // phi(1/2)
  Rat phi_r_max;          // sup |phi^{(r)}|
  bool all() const {
    return symmetric && dominates_power && zero_jets && rth_deriv_dyadic && max_at_center;
  }
};
PhiChecks verify_phi(const PiecewisePoly& phi, int r);

// (1 + sup_{[a,b]} |f^{(r)}|) * (b - a); exact for piecewise-polynomial f.
Rat cc_upper(const PiecewisePoly& f, const Rat& a, const Rat& b, int r);

// |pi_0(p) - pi_0(q)|^{1/r} for a vertical pair (equal x). The unquantified
// ball-box constant is set to 1, so this is meaningful up to scale only.
double cc_lower_surrogate(const JetPoint<double>& p, const JetPoint<double>& q);
Rat cc_lower_surrogate_pow_r(const JetPoint<Rat>& p, const JetPoint<Rat>& q);  // |pi_0 diff|

}  // namespace carnot
