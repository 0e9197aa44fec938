#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "carnot/algebra.hpp"

namespace carnot {

// One term of the truncated Baker-Campbell-Hausdorff series: an exact
// coefficient on the right-nested bracket word [w_0,[w_1,...[w_{L-2},w_{L-1}]]]
// over the letters {x, y}. Words whose last two letters coincide evaluate to
// zero and are never stored; the final pair is normalized to (x, y) by
// antisymmetry, so every stored word of length >= 2 ends in "xy".
struct BchTerm {
  std::vector<std::uint8_t> word;  // 0 = x, 1 = y
  Rat coeff;
  double coeff_d;
};

struct BchTable {
  Alg alg;
  std::vector<std::vector<BchTerm>> by_weight;  // by_weight[w-1]: terms of word length w

  const std::vector<BchTerm>& weight(int w) const { return by_weight[w - 1]; }
};
using Bch = std::shared_ptr<const BchTable>;

Bch build_bch_table(Alg a);

// Group product via the truncated series. Exact over Rat.
template <class S>
Point<S> product(const BchTable& t, const Point<S>& x, const Point<S>& y) {
  if (x.alg != t.alg || y.alg != t.alg)
    throw std::invalid_argument("product: algebra mismatch");
  Point<S> out(t.alg);
  for (const auto& terms : t.by_weight) {
    for (const auto& term : terms) {
      // evaluate the nested bracket right-to-left
      size_t L = term.word.size();
      Point<S> v = term.word[L - 1] ? y : x;
      for (size_t i = L - 1; i-- > 0;) v = bracket(term.word[i] ? y : x, v);
      S c;
      if constexpr (std::is_same_v<S, double>)
        c = term.coeff_d;
      else
        c = term.coeff;
      for (int j = 0; j < t.alg->dim; ++j)
        if (v.c[j] != S(0)) out.c[j] += c * v.c[j];
    }
  }
  return out;
}

template <class S>
Point<S> inverse(const Point<S>& x) {
  return -x;
}

// (y^{-1} x)_s - (x_s - y_s), the layer-s deviation of the product from its
// abelian part. Zero at s = 1.
template <class S>
std::vector<S> structure_residual(const BchTable& t, const Point<S>& x, const Point<S>& y, int s) {
  const GradedAlgebra& a = *t.alg;
  if (s < 1 || s > a.step) throw std::invalid_argument("structure_residual: layer out of range");
  Point<S> p = product(t, inverse(y), x);
  std::vector<S> out(a.dims[s - 1]);
  for (int j = 0; j < a.dims[s - 1]; ++j) {
    int f = a.offset[s - 1] + j;
    out[j] = p.c[f] - (x.c[f] - y.c[f]);
  }
  return out;
}

}  // namespace carnot
