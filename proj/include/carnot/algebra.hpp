#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "carnot/rational.hpp"

namespace carnot {

struct GradedAlgebra;
using Alg = std::shared_ptr<const GradedAlgebra>;

// Basis element (i, n): n-th basis vector of layer i. 1-based, as in the
// input format; flat indices are 0-based internally.
struct BasisRef {
  int layer = 0;
  int index = 0;
};

struct BracketEntry {
  BasisRef left;
  BasisRef right;
  std::vector<std::pair<Rat, int>> out;  // (coefficient, 1-based index in layer i+j)
};

// A graded nilpotent Lie algebra presented by structure constants on an
// ordered basis U_{i,1}..U_{i,k_i} per layer. Only the half with
// flat(left) < flat(right) is stored; the antisymmetric partner is implied.
struct GradedAlgebra {
  int step = 0;
  std::vector<int> dims;    // k_1..k_r
  std::vector<int> offset;  // flat offset of each layer, offset[step] == dim
  int dim = 0;

  struct Term {
    int idx;    // flat output index
    Rat c;
    double cd;  // cached double of c for float-mode evaluation
  };
  std::map<std::pair<int, int>, std::vector<Term>> table;  // key: flat (a,b), a<b

  int layer_of(int flat) const {
    int i = 0;
    while (flat >= offset[i + 1]) ++i;
    return i + 1;  // 1-based
  }
  int flat_index(int layer, int index1b) const { return offset[layer - 1] + index1b - 1; }
};

struct ValidationError : std::runtime_error {
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

// Group/algebra element as a layered coefficient vector over scalar S.
template <class S>
struct Point {
  Alg alg;
  std::vector<S> c;

  Point() = default;
  explicit Point(Alg a) : alg(std::move(a)), c(alg->dim, S(0)) {}
  Point(Alg a, std::vector<S> v) : alg(std::move(a)), c(std::move(v)) {}

  S& operator[](int i) { return c[i]; }
  const S& operator[](int i) const { return c[i]; }

  // coefficient x_{i,n}, 1-based
  S at(int layer, int index1b) const { return c[alg->flat_index(layer, index1b)]; }

  bool is_zero() const {
    for (const auto& v : c)
      if (v != S(0)) return false;
    return true;
  }
  bool operator==(const Point& o) const { return alg == o.alg && c == o.c; }
};

template <class S>
Point<S> operator+(const Point<S>& a, const Point<S>& b) {
  Point<S> r(a.alg, a.c);
  for (size_t i = 0; i < r.c.size(); ++i) r.c[i] += b.c[i];
  return r;
}

template <class S>
Point<S> operator-(const Point<S>& a, const Point<S>& b) {
  Point<S> r(a.alg, a.c);
  for (size_t i = 0; i < r.c.size(); ++i) r.c[i] -= b.c[i];
  return r;
}

template <class S>
Point<S> operator-(const Point<S>& a) {
  Point<S> r(a.alg, a.c);
  for (auto& v : r.c) v = -v;
  return r;
}

template <class S>
Point<S> operator*(const S& s, const Point<S>& a) {
  Point<S> r(a.alg, a.c);
  for (auto& v : r.c) v *= s;
  return r;
}

// [x, y], bilinear extension of the structure constants.
template <class S>
Point<S> bracket(const Point<S>& x, const Point<S>& y) {
  if (x.alg != y.alg) throw std::invalid_argument("bracket: algebra mismatch");
  const GradedAlgebra& A = *x.alg;
  Point<S> out(x.alg);
  for (const auto& [key, terms] : A.table) {
    auto [a, b] = key;
    S w = x.c[a] * y.c[b] - x.c[b] * y.c[a];
    if (w == S(0)) continue;
    for (const auto& t : terms) {
      if constexpr (std::is_same_v<S, double>) {
        out.c[t.idx] += w * t.cd;
      } else {
        out.c[t.idx] += w * t.c;
      }
    }
  }
  return out;
}

// Layer scaled by t^i.
template <class S>
Point<S> dilate(const S& t, const Point<S>& x) {
  if (!(t > S(0))) throw std::invalid_argument("dilate: t must be positive");
  const GradedAlgebra& A = *x.alg;
  Point<S> r(x.alg, x.c);
  S f = t;
  for (int layer = 1; layer <= A.step; ++layer) {
    for (int j = A.offset[layer - 1]; j < A.offset[layer]; ++j) r.c[j] *= f;
    f *= t;
  }
  return r;
}

// --- construction & validation ---------------------------------------------

GradedAlgebra build_algebra(int step, const std::vector<int>& dims,
                            const std::vector<BracketEntry>& entries);
inline Alg make_alg(GradedAlgebra a) { return std::make_shared<const GradedAlgebra>(std::move(a)); }

// Names: abelian(k_1,..,k_r), heisenberg, engel, filiform(r), jet_algebra(r),
// remark_step4.
Alg builtin_algebra(const std::string& name);

Alg algebra_from_json(const std::string& text);
std::string algebra_to_json(const GradedAlgebra& a);

// Runs the full construction-time validation on an existing algebra (used by
// the CLI validate command on already-built objects).
void validate_algebra(const GradedAlgebra& a);

bool is_stratified(const GradedAlgebra& a);

// --- graded maps ------------------------------------------------------------

// Layer-respecting linear map, one matrix per layer (row-major,
// mats[i][row][col], rows index the target basis of layer i+1).
struct GradedMap {
  Alg source;
  Alg target;
  std::vector<std::vector<std::vector<Rat>>> mats;

  Point<Rat> apply(const Point<Rat>& x) const;
  static GradedMap identity(Alg a);
};

// img([u,v]) == [img(u), img(v)] on all source basis pairs, exact.
bool respects_brackets(const GradedMap& f);

// Quotient by a subspace S of the top layer, given by spanning vectors
// (coefficient vectors of length k_r). If S is the whole layer the layer is
// dropped and the step decreases.
struct QuotientResult {
  Alg algebra;
  GradedMap map;
};
QuotientResult quotient_by_top_subspace(Alg a, const std::vector<std::vector<Rat>>& span_vecs);

// Embedding of the model filiform algebra of matching step into A (step 2) or
// into a top-layer quotient of A (step 3).
struct FiliformEmbedding {
  Alg model;          // filiform(step of reduced)
  Alg reduced;        // A itself (step 2) or the quotient (step 3)
  GradedMap quotient; // A -> reduced (identity when no quotient was needed)
  GradedMap embedding;  // model -> reduced
};
struct FiliformSearchOptions {
  int random_tries = 200;
  std::uint64_t seed = 1;
};
FiliformEmbedding find_filiform_embedding(Alg a, const FiliformSearchOptions& opts = {});

// --- small exact linear algebra helpers (shared with quotient/search) -------

// Rank of a set of row vectors over Q.
int rat_rank(std::vector<std::vector<Rat>> rows);

std::string point_str(const Point<Rat>& x);
Point<Rat> parse_point(Alg a, const std::string& csv);

}  // namespace carnot
