#include "carnot/piecewise.hpp"

#include <algorithm>
#include <stdexcept>

#include "json.hpp"

namespace carnot {

std::vector<Rat> poly_derivative(const std::vector<Rat>& c) {
  std::vector<Rat> d;
  for (size_t k = 1; k < c.size(); ++k) d.push_back(Rat(static_cast<long>(k)) * c[k]);
  if (d.empty()) d.push_back(Rat(0));
  return d;
}

Rat poly_eval(const std::vector<Rat>& c, const Rat& x) {
  Rat r(0);
  for (size_t k = c.size(); k-- > 0;) r = r * x + c[k];
  return r;
}

static double poly_eval_d(const std::vector<Rat>& c, double x) {
  double r = 0;
  for (size_t k = c.size(); k-- > 0;) r = r * x + c[k].get_d();
  return r;
}

PiecewisePoly::PiecewisePoly(std::vector<Rat> breaks, std::vector<std::vector<Rat>> pieces,
                             int smoothness)
    : breaks_(std::move(breaks)), pieces_(std::move(pieces)), smoothness_(smoothness) {
  if (breaks_.size() < 2 || pieces_.size() + 1 != breaks_.size())
    throw std::invalid_argument("piecewise: breakpoint/piece count mismatch");
  for (size_t i = 0; i + 1 < breaks_.size(); ++i)
    if (!(breaks_[i] < breaks_[i + 1]))
      throw std::invalid_argument("piecewise: breakpoints must be strictly increasing");
  for (auto& p : pieces_)
    if (p.empty()) p.push_back(Rat(0));
  // validate C^smoothness at interior breakpoints, exactly
  for (size_t i = 1; i < pieces_.size(); ++i) {
    std::vector<Rat> left = pieces_[i - 1], right = pieces_[i];
    for (int order = 0; order <= smoothness_; ++order) {
      if (poly_eval(left, breaks_[i]) != poly_eval(right, breaks_[i]))
        throw std::invalid_argument("piecewise: derivative " + std::to_string(order) +
                                    " jumps at an interior breakpoint");
      left = poly_derivative(left);
      right = poly_derivative(right);
    }
  }
}

int PiecewisePoly::piece_index(const Rat& x) const {
  if (x < breaks_.front() || x > breaks_.back())
    throw std::out_of_range("piecewise: point outside domain");
  // half-open pieces, last piece closed
  size_t lo = 0, hi = breaks_.size() - 1;
  while (lo + 1 < hi) {
    size_t mid = (lo + hi) / 2;
    if (x < breaks_[mid])
      hi = mid;
    else
      lo = mid;
  }
  return static_cast<int>(lo);
}

Rat PiecewisePoly::eval_deriv(int order, const Rat& x) const {
  std::vector<Rat> c = pieces_[piece_index(x)];
  for (int k = 0; k < order; ++k) c = poly_derivative(c);
  return poly_eval(c, x);
}

double PiecewisePoly::eval_deriv_d(int order, double x) const {
  // double-precision fast path for Monte Carlo consumers
  double lo = breaks_.front().get_d(), hi = breaks_.back().get_d();
  if (x < lo) x = lo;
  if (x > hi) x = hi;
  size_t l = 0, h = breaks_.size() - 1;
  while (l + 1 < h) {
    size_t mid = (l + h) / 2;
    if (x < breaks_[mid].get_d())
      h = mid;
    else
      l = mid;
  }
  std::vector<Rat> c = pieces_[l];
  for (int k = 0; k < order; ++k) c = poly_derivative(c);
  return poly_eval_d(c, x);
}

PiecewisePoly PiecewisePoly::derivative() const {
  std::vector<std::vector<Rat>> out;
  for (const auto& p : pieces_) out.push_back(poly_derivative(p));
  return PiecewisePoly(breaks_, std::move(out), std::max(smoothness_ - 1, -1));
}

PiecewisePoly PiecewisePoly::antiderivative() const {
  std::vector<std::vector<Rat>> out;
  Rat acc(0);  // running value at the left end of each piece
  for (size_t i = 0; i < pieces_.size(); ++i) {
    std::vector<Rat> P(pieces_[i].size() + 1, Rat(0));
    for (size_t k = 0; k < pieces_[i].size(); ++k)
      P[k + 1] = pieces_[i][k] / Rat(static_cast<long>(k + 1));
    P[0] = acc - poly_eval(P, breaks_[i]);
    out.push_back(P);
    acc = poly_eval(out.back(), breaks_[i + 1]);
  }
  return PiecewisePoly(breaks_, std::move(out), smoothness_ + 1);
}

PiecewisePoly PiecewisePoly::affine_substitute(const Rat& alpha, const Rat& beta) const {
  if (alpha == 0) throw std::invalid_argument("affine_substitute: alpha must be nonzero");
  // q(x) = p(alpha x + beta) on domain (breaks - beta)/alpha
  std::vector<Rat> nb;
  for (const auto& b : breaks_) nb.push_back((b - beta) / alpha);
  std::vector<std::vector<Rat>> np;
  for (const auto& p : pieces_) {
    // expand p(alpha x + beta) by Horner in (alpha x + beta)
    std::vector<Rat> q{Rat(0)};
    for (size_t k = p.size(); k-- > 0;) {
      // q := q*(alpha x + beta) + p[k]
      std::vector<Rat> nq(q.size() + 1, Rat(0));
      for (size_t i = 0; i < q.size(); ++i) {
        nq[i + 1] += q[i] * alpha;
        nq[i] += q[i] * beta;
      }
      nq[0] += p[k];
      while (nq.size() > 1 && nq.back() == 0) nq.pop_back();
      q = std::move(nq);
    }
    np.push_back(std::move(q));
  }
  if (alpha < 0) {
    std::reverse(nb.begin(), nb.end());
    std::reverse(np.begin(), np.end());
  }
  return PiecewisePoly(std::move(nb), std::move(np), smoothness_);
}

PiecewisePoly PiecewisePoly::scaled(const Rat& c) const {
  std::vector<std::vector<Rat>> out = pieces_;
  for (auto& p : out)
    for (auto& v : p) v *= c;
  return PiecewisePoly(breaks_, std::move(out), smoothness_);
}

PiecewisePoly PiecewisePoly::operator+(const PiecewisePoly& o) const {
  if (domain_lo() != o.domain_lo() || domain_hi() != o.domain_hi())
    throw std::invalid_argument("piecewise add: domain mismatch");
  std::vector<Rat> nb;
  std::merge(breaks_.begin(), breaks_.end(), o.breaks_.begin(), o.breaks_.end(),
             std::back_inserter(nb));
  nb.erase(std::unique(nb.begin(), nb.end()), nb.end());
  std::vector<std::vector<Rat>> np;
  for (size_t i = 0; i + 1 < nb.size(); ++i) {
    const auto& a = pieces_[piece_index(nb[i])];
    const auto& b = o.pieces_[o.piece_index(nb[i])];
    std::vector<Rat> s(std::max(a.size(), b.size()), Rat(0));
    for (size_t k = 0; k < a.size(); ++k) s[k] += a[k];
    for (size_t k = 0; k < b.size(); ++k) s[k] += b[k];
    np.push_back(std::move(s));
  }
  return PiecewisePoly(std::move(nb), std::move(np), std::min(smoothness_, o.smoothness_));
}

PiecewisePoly PiecewisePoly::glue(const PiecewisePoly& left, const PiecewisePoly& right,
                                  int smoothness) {
  if (left.domain_hi() != right.domain_lo())
    throw std::invalid_argument("piecewise glue: domains are not adjacent");
  std::vector<Rat> nb = left.breaks_;
  nb.insert(nb.end(), right.breaks_.begin() + 1, right.breaks_.end());
  std::vector<std::vector<Rat>> np = left.pieces_;
  np.insert(np.end(), right.pieces_.begin(), right.pieces_.end());
  return PiecewisePoly(std::move(nb), std::move(np), smoothness);
}

int PiecewisePoly::max_degree() const {
  size_t d = 1;
  for (const auto& p : pieces_) d = std::max(d, p.size());
  return static_cast<int>(d) - 1;
}

Rat PiecewisePoly::max_abs_piecewise_const_deriv(int order, const Rat& a, const Rat& b) const {
  if (a > b || a < domain_lo() || b > domain_hi())
    throw std::invalid_argument("max_abs_piecewise_const_deriv: bad interval");
  if (order < max_degree())
    throw std::invalid_argument("derivative of this order is not piecewise constant");
  if (a == b) {
    Rat v = eval_deriv(order, a);
    return v < 0 ? Rat(-v) : v;
  }
  Rat best(0);
  for (size_t i = 0; i + 1 < breaks_.size(); ++i) {
    if (breaks_[i + 1] <= a || breaks_[i] >= b) continue;
    std::vector<Rat> c = pieces_[i];
    for (int k = 0; k < order; ++k) c = poly_derivative(c);
    Rat v = c.empty() ? Rat(0) : c[0];
    if (v < 0) v = -v;
    if (v > best) best = v;
  }
  return best;
}

std::string PiecewisePoly::to_json() const {
  nlohmann::json j;
  auto& bp = j["breakpoints"] = nlohmann::json::array();
  for (const auto& b : breaks_) bp.push_back(rat_str(b));
  auto& pc = j["pieces"] = nlohmann::json::array();
  for (const auto& p : pieces_) {
    nlohmann::json row = nlohmann::json::array();
    for (const auto& c : p) row.push_back(rat_str(c));
    pc.push_back(std::move(row));
  }
  j["smoothness"] = smoothness_;
  return j.dump(2);
}

PiecewisePoly PiecewisePoly::from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  std::vector<Rat> nb;
  for (const auto& b : j.at("breakpoints")) nb.push_back(parse_rat(b.get<std::string>()));
  std::vector<std::vector<Rat>> np;
  for (const auto& p : j.at("pieces")) {
    std::vector<Rat> row;
    for (const auto& c : p) row.push_back(parse_rat(c.get<std::string>()));
    np.push_back(std::move(row));
  }
  return PiecewisePoly(std::move(nb), std::move(np), j.at("smoothness").get<int>());
}

// --- exact nonnegativity ------------------------------------------------------

namespace {

// binomials up to a modest degree; inputs here have degree <= 8
long binom(int n, int k) {
  if (k < 0 || k > n) return 0;
  long r = 1;
  for (int i = 1; i <= k; ++i) r = r * (n - i + 1) / i;
  return r;
}

// Bernstein coefficients of q (monomial basis on [0,1]) at degree d.
std::vector<Rat> bernstein_from_monomial(const std::vector<Rat>& q, int d) {
  std::vector<Rat> b(d + 1, Rat(0));
  for (int k = 0; k <= d; ++k)
    for (int j = 0; j <= k && j < static_cast<int>(q.size()); ++j)
      b[k] += Rat(binom(k, j)) / Rat(binom(d, j)) * q[j];
  return b;
}

bool bernstein_nonneg(const std::vector<Rat>& b, int depth, int max_depth) {
  bool all = true, endpoints_ok = !(b.front() < 0) && !(b.back() < 0);
  for (const auto& v : b)
    if (v < 0) {
      all = false;
      break;
    }
  if (all) return true;
  if (!endpoints_ok) return false;
  if (depth >= max_depth)
    throw std::runtime_error("poly_nonneg_on: bisection depth exhausted (inconclusive)");
  // de Casteljau split at 1/2
  std::vector<Rat> tri = b, left(b.size()), right(b.size());
  size_t n = b.size();
  left[0] = tri[0];
  right[n - 1] = tri[n - 1];
  for (size_t lvl = 1; lvl < n; ++lvl) {
    for (size_t i = 0; i + lvl < n; ++i) tri[i] = (tri[i] + tri[i + 1]) / 2;
    left[lvl] = tri[0];
    right[n - 1 - lvl] = tri[n - 1 - lvl];
  }
  return bernstein_nonneg(left, depth + 1, max_depth) &&
         bernstein_nonneg(right, depth + 1, max_depth);
}

}  // namespace

bool poly_nonneg_on(const std::vector<Rat>& coeffs, const Rat& a, const Rat& b, int max_depth) {
  if (!(a < b)) throw std::invalid_argument("poly_nonneg_on: empty interval");
  // substitute x = a + (b-a) t to land on [0,1]
  std::vector<Rat> q{Rat(0)};
  Rat w = b - a;
  for (size_t k = coeffs.size(); k-- > 0;) {
    std::vector<Rat> nq(q.size() + 1, Rat(0));
    for (size_t i = 0; i < q.size(); ++i) {
      nq[i + 1] += q[i] * w;
      nq[i] += q[i] * a;
    }
    nq[0] += coeffs[k];
    q = std::move(nq);
  }
  while (q.size() > 1 && q.back() == 0) q.pop_back();
  int d = static_cast<int>(q.size()) - 1;
  return bernstein_nonneg(bernstein_from_monomial(q, d), 0, max_depth);
}

bool piecewise_geq(const PiecewisePoly& f, const PiecewisePoly& g) {
  PiecewisePoly diff = f + g.scaled(Rat(-1));
  const auto& nb = diff.breaks();
  for (size_t i = 0; i + 1 < nb.size(); ++i)
    if (!poly_nonneg_on(diff.pieces()[i], nb[i], nb[i + 1])) return false;
  return true;
}

}  // namespace carnot
