#include "carnot/jets.hpp"

#include <stdexcept>

namespace carnot {

JetPoint<Rat> jet_of(const PiecewisePoly& f, const Rat& y, int r) {
  if (y < f.domain_lo() || y > f.domain_hi())
    throw std::out_of_range("jet_of: basepoint outside domain");
  JetPoint<Rat> out = JetPoint<Rat>::zero(r);
  out.x = y;
  for (int i = 0; i < r; ++i) out.u[i] = f.eval_deriv(i, y);
  return out;
}

std::string jet_str(const JetPoint<Rat>& p) {
  std::string s = "(" + rat_str(p.x) + ";";
  for (int i = p.r - 1; i >= 0; --i) s += " " + rat_str(p.u[i]);
  return s + ")";
}

PiecewisePoly build_phi(int r) {
  if (r < 1 || r > 6) throw std::invalid_argument("build_phi: r out of range [1,6]");
  // tent, step 1
  Rat half(1, 2);
  PiecewisePoly phi({Rat(0), half, Rat(1)}, {{Rat(0), Rat(2)}, {Rat(2), Rat(-2)}}, 0);
  for (int k = 1; k < r; ++k) {
    // odd reflection squeezed into [0,1], then integrate and rescale
    PiecewisePoly left = phi.affine_substitute(Rat(2), Rat(0));    // phi(2x) on [0,1/2]
    PiecewisePoly right = (-phi).affine_substitute(Rat(-2), Rat(2));  // -phi(2-2x) on [1/2,1]
    PiecewisePoly fbar = PiecewisePoly::glue(left, right, phi.smoothness());
    phi = fbar.antiderivative().scaled(rat_pow2(k + 2));
  }
  return phi;
}

PhiChecks verify_phi(const PiecewisePoly& phi, int r) {
  PhiChecks out{};
  Rat half(1, 2);

  // (1) symmetry: phi(x) == phi(1-x) as piecewise polynomials
  PiecewisePoly mirrored = phi.affine_substitute(Rat(-1), Rat(1));
  out.symmetric = true;
  {
    PiecewisePoly diff = phi + (-mirrored);
    for (const auto& p : diff.pieces()) {
      for (const auto& c : p)
        if (c != 0) out.symmetric = false;
    }
  }

  // (2) phi >= (2x)^r on [0, 1/2]
  {
    std::vector<Rat> pow(r + 1, Rat(0));
    pow[r] = rat_pow2(r);
    out.dominates_power = true;
    const auto& nb = phi.breaks();
    for (size_t i = 0; i + 1 < nb.size() && nb[i] < half; ++i) {
      Rat hi = std::min(nb[i + 1], half);
      std::vector<Rat> diff = phi.pieces()[i];
      if (diff.size() < pow.size()) diff.resize(pow.size(), Rat(0));
      for (size_t k = 0; k < pow.size(); ++k) diff[k] -= pow[k];
      if (!poly_nonneg_on(diff, nb[i], hi)) {
        out.dominates_power = false;
        break;
      }
    }
  }

  // (3) zero jets at the endpoints
  out.zero_jets = true;
  for (int i = 0; i < r; ++i) {
    if (phi.eval_deriv(i, Rat(0)) != 0) out.zero_jets = false;
    if (i >= 1 && phi.eval_deriv(i, Rat(1)) != 0) out.zero_jets = false;
  }
  if (phi(Rat(1)) != 0) out.zero_jets = false;

  // (4) r-th derivative constant on the dyadic mesh 2^-r
  out.rth_deriv_dyadic = true;
  {
    Rat mesh = rat_pow2(-r);
    for (long i = 0; i < (1L << r); ++i) {
      Rat lo = Rat(i) * mesh;
      Rat va = phi.eval_deriv(r, lo);
      // sample interior points of the cell across original breakpoints
      for (const auto& b : phi.breaks()) {
        if (b <= lo || b >= lo + mesh) continue;
        if (phi.eval_deriv(r, b) != va) out.rth_deriv_dyadic = false;
      }
      Rat mid = lo + mesh / 2;
      if (phi.eval_deriv(r, mid) != va) out.rth_deriv_dyadic = false;
    }
  }

  // max attained at the center
  out.phi_max = phi(half);
  out.max_at_center = true;
  {
    const auto& nb = phi.breaks();
    for (size_t i = 0; i + 1 < nb.size(); ++i) {
      std::vector<Rat> diff = phi.pieces()[i];
      for (auto& c : diff) c = -c;
      if (diff.empty()) diff.push_back(Rat(0));
      diff[0] += out.phi_max;
      if (!poly_nonneg_on(diff, nb[i], nb[i + 1])) {
        out.max_at_center = false;
        break;
      }
    }
  }

  out.phi_r_max = phi.max_abs_piecewise_const_deriv(r, phi.domain_lo(), phi.domain_hi());
  return out;
}

Rat cc_upper(const PiecewisePoly& f, const Rat& a, const Rat& b, int r) {
  if (a > b) throw std::invalid_argument("cc_upper: reversed interval");
  if (a == b) return Rat(0);
  return (Rat(1) + f.max_abs_piecewise_const_deriv(r, a, b)) * (b - a);
}

double cc_lower_surrogate(const JetPoint<double>& p, const JetPoint<double>& q) {
  if (p.r != q.r) throw std::invalid_argument("cc_lower_surrogate: rank mismatch");
  if (p.x != q.x) throw std::invalid_argument("cc_lower_surrogate: not a vertical pair");
  return std::pow(std::abs(p.u[0] - q.u[0]), 1.0 / p.r);
}

Rat cc_lower_surrogate_pow_r(const JetPoint<Rat>& p, const JetPoint<Rat>& q) {
  if (p.r != q.r) throw std::invalid_argument("cc_lower_surrogate: rank mismatch");
  if (p.x != q.x) throw std::invalid_argument("cc_lower_surrogate: not a vertical pair");
  Rat d = p.u[0] - q.u[0];
  return d < 0 ? Rat(-d) : d;
}

}  // namespace carnot
