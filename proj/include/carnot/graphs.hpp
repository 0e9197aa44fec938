#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "carnot/rational.hpp"
#include "carnot/rng.hpp"

namespace carnot {

// smallest c >= 0 with 2^c >= m^2
int ceil_2log2(int m);

// Level sizes for the recursive graph family. Level m is two strands glued
// in parallel; each strand is a_m unit edges, then A_m copies of level m-1,
// then a_m unit edges in series. span(m) = 2^{N_m} is the directed length.
struct GraphSchedule {
  enum class Mode { Minimal, Embedding };
  Mode mode = Mode::Minimal;
  int M = 0;
  std::vector<int> N;           // N_0..N_M
  std::vector<std::int64_t> a;  // a_1..a_M at index m
  std::vector<std::int64_t> A;  // A_1..A_M at index m

  std::int64_t span(int m) const { return std::int64_t(1) << N[m]; }

  static GraphSchedule minimal(int M);
  // generic builder: N_m is the smallest value >= max(minimal rule, min_level)
  // accepted by `admissible` (used by the embedding construction)
  static GraphSchedule build(int M, Mode mode, int min_level,
                             const std::function<bool(int m, int Nm)>& admissible);

  Int edge_count(int m) const;
  Int walk_choice_count(int m) const;  // sign choices in one full walk
};

// Canonical vertex id: level, directed distance t from the source, and the
// branch signs along the descent into nested copies. Everything else (copy
// indices, local times) is derived from t, so equality is (t, signs).
// Endpoints t in {0, span} carry no signs.
struct VertexAddress {
  int level = 0;
  std::int64_t t = 0;
  std::vector<std::int8_t> signs;

  bool operator==(const VertexAddress& o) const {
    return level == o.level && t == o.t && signs == o.signs;
  }
  bool operator<(const VertexAddress& o) const {
    if (t != o.t) return t < o.t;
    return signs < o.signs;
  }
};

std::string address_str(const VertexAddress& v);
VertexAddress parse_address(const GraphSchedule& s, int m, const std::string& text);

// Builds the canonical address of the vertex at time t whose branch signs are
// supplied by sign_at(depth).
VertexAddress make_address(const GraphSchedule& s, int m, std::int64_t t,
                           const std::function<int(int depth)>& sign_at);

// Copy-stack of a vertex: (level, local time) from the top level down to
// where the canonical descent stops. Sign-independent.
struct StackRow {
  int level;
  std::int64_t local_t;
  std::int64_t offset;  // global time of this structure's source
};
std::vector<StackRow> vertex_stack(const GraphSchedule& s, int m, std::int64_t t);
// Stack of the structures whose bumps act on the step interval [t, t+1),
// 0 <= t < span(m). Local times may be 0 here (floor decomposition).
std::vector<StackRow> step_stack(const GraphSchedule& s, int m, std::int64_t t);

VertexAddress iota_flip(VertexAddress v);

// Shortest-path distance between two equal-time vertices. Throws when the
// pair is not vertical.
std::int64_t vertical_distance(const GraphSchedule& s, const VertexAddress& v1,
                               const VertexAddress& v2);

// --- random walks -------------------------------------------------------------

// Full sign tree of one source-to-sink walk (feasible for small levels only).
struct WalkTree {
  std::int8_t sign = 1;
  std::vector<WalkTree> subs;
};
WalkTree sample_walk_tree(const GraphSchedule& s, int m, Rng& rng);
VertexAddress walk_address(const GraphSchedule& s, int m, const WalkTree& w, std::int64_t t);
std::vector<VertexAddress> sample_walk(const GraphSchedule& s, int m, std::uint64_t seed);

// Lazily sampled coupled pair (X_t, X~_t(s)): the two walks share every branch
// choice decided at a time <= s and evolve independently afterwards. Only the
// descent to time t is materialized. p1/p2 are the cumulative sign products
// along the descent of each walk (the bump orientation at that depth).
struct CoupledRow {
  int level;
  std::int64_t local_t;
  int s1, s2;  // this level's signs
  int p1, p2;  // cumulative products
};
std::vector<CoupledRow> sample_coupled_stack(const GraphSchedule& s, int m, std::int64_t cpl_s,
                                             std::int64_t t, Rng& rng, bool step_mode);

std::int64_t coupled_distance(const GraphSchedule& s, int m,
                              const std::vector<CoupledRow>& rows);

std::pair<VertexAddress, VertexAddress> sample_coupled_pair(const GraphSchedule& s, int m,
                                                            std::int64_t t, int k,
                                                            std::uint64_t seed);

// --- explicit materialization ---------------------------------------------------

struct MaterializedGraph {
  int m = 0;
  std::int64_t span = 0;
  std::vector<VertexAddress> verts;
  std::vector<std::pair<int, int>> edges;  // directed
  std::map<VertexAddress, int> index;
  std::vector<std::vector<int>> verts_by_t;

  int id_of(const VertexAddress& v) const;
  std::vector<std::vector<int>> undirected_adjacency() const;
  // undirected BFS distances from src
  std::vector<std::int64_t> bfs(int src) const;
};

MaterializedGraph materialize(const GraphSchedule& s, int m, std::int64_t edge_cap = 1000000);

std::string edge_list_text(const MaterializedGraph& g);

}  // namespace carnot
