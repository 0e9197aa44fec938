#include "carnot/graphs.hpp"

#include <algorithm>
#include <deque>
#include <sstream>
#include <stdexcept>

namespace carnot {

int ceil_2log2(int m) {
  int c = 0;
  while ((std::int64_t(1) << c) < std::int64_t(m) * m) ++c;
  return c;
}

GraphSchedule GraphSchedule::build(int M, Mode mode, int min_level,
                                   const std::function<bool(int, int)>& admissible) {
  if (M < 0) throw std::invalid_argument("schedule: M must be >= 0");
  GraphSchedule s;
  s.mode = mode;
  s.M = M;
  s.N.assign(M + 1, 0);
  s.a.assign(M + 1, 0);
  s.A.assign(M + 1, 0);
  for (int m = 1; m <= M; ++m) {
    int c = ceil_2log2(m);
    int Nm = std::max({1, s.N[m - 1] + c, min_level});
    if (admissible)
      while (!admissible(m, Nm)) {
        ++Nm;
        if (Nm > 62) throw std::runtime_error("schedule: no admissible N_m <= 62");
      }
    if (Nm > 62) throw std::runtime_error("schedule: span exceeds 2^62");
    s.N[m] = Nm;
    s.a[m] = std::int64_t(1) << (Nm - c - 1);
    s.A[m] = (std::int64_t(1) << (Nm - s.N[m - 1])) -
             (std::int64_t(1) << (Nm - s.N[m - 1] - c));
    // gluing identity behind diam = 2^{N_m}
    if (2 * s.a[m] + s.A[m] * s.span(m - 1) != s.span(m))
      throw std::runtime_error("schedule: strand length identity violated");
  }
  return s;
}

GraphSchedule GraphSchedule::minimal(int M) { return build(M, Mode::Minimal, 0, nullptr); }

Int GraphSchedule::edge_count(int m) const {
  Int e = 1;
  for (int i = 1; i <= m; ++i) e = 2 * (Int(2) * a[i] + Int(A[i]) * e);
  return e;
}

Int GraphSchedule::walk_choice_count(int m) const {
  Int c = 0;
  for (int i = 1; i <= m; ++i) c = 1 + Int(A[i]) * c;
  return c;
}

// --- addresses -----------------------------------------------------------------

namespace {

struct Descent {
  int level;
  std::int64_t local_t;
  std::int64_t offset;
  int copy;  // 0: stop here (I-run / endpoint / copy sink); else copy index
};

// Canonical (ceil) decomposition of local time t at `level`; returns whether
// the descent continues into a copy interior.
bool descend_vertex(const GraphSchedule& s, int level, std::int64_t t, std::int64_t offset,
                    Descent& d) {
  d = {level, t, offset, 0};
  std::int64_t L = s.span(level);
  if (level == 0 || t == 0 || t == L) return false;
  std::int64_t a = s.a[level], A = s.A[level];
  if (t <= a || t >= L - a || A == 0) return false;
  std::int64_t S = s.span(level - 1);
  std::int64_t j = (t - a + S - 1) / S;  // 1..A
  std::int64_t tau = t - a - (j - 1) * S;
  if (tau == S) return false;  // copy sink, canonicalized to this level
  d.copy = static_cast<int>(j);
  return true;
}

bool descend_step(const GraphSchedule& s, int level, std::int64_t t, std::int64_t offset,
                  Descent& d) {
  // floor decomposition of the unit interval [t, t+1)
  d = {level, t, offset, 0};
  std::int64_t L = s.span(level);
  if (level == 0) return false;
  if (t < 0 || t >= L) throw std::out_of_range("step_stack: time out of range");
  std::int64_t a = s.a[level], A = s.A[level];
  if (t < a || t >= L - a || A == 0) return false;
  std::int64_t S = s.span(level - 1);
  std::int64_t j = (t - a) / S + 1;
  d.copy = static_cast<int>(j);
  return true;
}

}  // namespace

VertexAddress make_address(const GraphSchedule& s, int m, std::int64_t t,
                           const std::function<int(int)>& sign_at) {
  if (t < 0 || t > s.span(m)) throw std::out_of_range("make_address: t out of range");
  VertexAddress v;
  v.level = m;
  v.t = t;
  int level = m;
  std::int64_t lt = t, off = 0;
  int depth = 0;
  while (true) {
    Descent d;
    bool more = descend_vertex(s, level, lt, off, d);
    if (level == 0 || lt == 0 || lt == s.span(level)) break;
    v.signs.push_back(static_cast<std::int8_t>(sign_at(depth++)));
    if (!more) break;
    std::int64_t S = s.span(level - 1);
    off += s.a[level] + std::int64_t(d.copy - 1) * S;
    lt = lt - s.a[level] - std::int64_t(d.copy - 1) * S;
    --level;
  }
  return v;
}

std::vector<StackRow> vertex_stack(const GraphSchedule& s, int m, std::int64_t t) {
  std::vector<StackRow> rows;
  int level = m;
  std::int64_t lt = t, off = 0;
  while (true) {
    if (level == 0 || lt == 0 || lt == s.span(level)) break;
    rows.push_back({level, lt, off});
    Descent d;
    if (!descend_vertex(s, level, lt, off, d)) break;
    off += s.a[level] + std::int64_t(d.copy - 1) * s.span(level - 1);
    lt = lt - s.a[level] - std::int64_t(d.copy - 1) * s.span(level - 1);
    --level;
  }
  return rows;
}

std::vector<StackRow> step_stack(const GraphSchedule& s, int m, std::int64_t t) {
  std::vector<StackRow> rows;
  int level = m;
  std::int64_t lt = t, off = 0;
  while (level > 0) {
    rows.push_back({level, lt, off});
    Descent d;
    if (!descend_step(s, level, lt, off, d)) break;
    off += s.a[level] + std::int64_t(d.copy - 1) * s.span(level - 1);
    lt = lt - s.a[level] - std::int64_t(d.copy - 1) * s.span(level - 1);
    --level;
  }
  return rows;
}

VertexAddress iota_flip(VertexAddress v) {
  if (!v.signs.empty()) v.signs[0] = -v.signs[0];
  return v;
}

std::string address_str(const VertexAddress& v) {
  std::string out = std::to_string(v.t);
  if (!v.signs.empty()) {
    out += ":";
    for (auto sg : v.signs) out += (sg > 0 ? '+' : '-');
  }
  return out;
}

VertexAddress parse_address(const GraphSchedule& s, int m, const std::string& text) {
  auto colon = text.find(':');
  std::int64_t t = std::stoll(text.substr(0, colon));
  std::string signs = colon == std::string::npos ? "" : text.substr(colon + 1);
  VertexAddress v = make_address(s, m, t, [&](int d) {
    if (d >= static_cast<int>(signs.size())) throw std::invalid_argument("address: missing signs");
    return signs[d] == '+' ? 1 : -1;
  });
  if (static_cast<int>(signs.size()) != static_cast<int>(v.signs.size()))
    throw std::invalid_argument("address: sign list does not match canonical depth");
  return v;
}

std::int64_t vertical_distance(const GraphSchedule& s, const VertexAddress& v1,
                               const VertexAddress& v2) {
  if (v1.level != v2.level || v1.t != v2.t)
    throw std::invalid_argument("vertical_distance: not a vertical pair");
  if (v1.signs.size() != v2.signs.size())
    throw std::invalid_argument("vertical_distance: malformed addresses");
  auto rows = vertex_stack(s, v1.level, v1.t);
  for (size_t d = 0; d < rows.size() && d < v1.signs.size(); ++d) {
    if (v1.signs[d] != v2.signs[d]) {
      std::int64_t L = s.span(rows[d].level);
      return 2 * std::min(rows[d].local_t, L - rows[d].local_t);
    }
  }
  return 0;
}

// --- walks ----------------------------------------------------------------------

WalkTree sample_walk_tree(const GraphSchedule& s, int m, Rng& rng) {
  WalkTree w;
  w.sign = static_cast<std::int8_t>(rng.sign());
  if (m >= 1) {
    w.subs.reserve(s.A[m]);
    for (std::int64_t j = 0; j < s.A[m]; ++j) w.subs.push_back(sample_walk_tree(s, m - 1, rng));
  }
  return w;
}

VertexAddress walk_address(const GraphSchedule& s, int m, const WalkTree& w, std::int64_t t) {
  if (t < 0 || t > s.span(m)) throw std::out_of_range("walk_address: t out of range");
  VertexAddress v;
  v.level = m;
  v.t = t;
  const WalkTree* node = &w;
  int level = m;
  std::int64_t lt = t;
  while (true) {
    if (level == 0 || lt == 0 || lt == s.span(level)) break;
    v.signs.push_back(node->sign);
    Descent d;
    if (!descend_vertex(s, level, lt, 0, d)) break;
    node = &node->subs[d.copy - 1];
    lt -= s.a[level] + std::int64_t(d.copy - 1) * s.span(level - 1);
    --level;
  }
  return v;
}

std::vector<VertexAddress> sample_walk(const GraphSchedule& s, int m, std::uint64_t seed) {
  if (s.walk_choice_count(m) > 2000000) throw std::runtime_error("sample_walk: level too large");
  Rng rng(seed, {0x77a1, static_cast<std::uint64_t>(m)});
  WalkTree w = sample_walk_tree(s, m, rng);
  std::vector<VertexAddress> out;
  std::int64_t L = s.span(m);
  out.reserve(L + 1);
  for (std::int64_t t = 0; t <= L; ++t) out.push_back(walk_address(s, m, w, t));
  return out;
}

std::vector<CoupledRow> sample_coupled_stack(const GraphSchedule& s, int m, std::int64_t cpl_s,
                                             std::int64_t t, Rng& rng, bool step_mode) {
  std::vector<CoupledRow> rows;
  int level = m;
  std::int64_t lt = t, ls = cpl_s, off = 0;
  int p1 = 1, p2 = 1;
  while (true) {
    Descent d;
    bool more;
    if (step_mode) {
      if (level == 0) break;
      more = descend_step(s, level, lt, off, d);
    } else {
      if (level == 0 || lt == 0 || lt == s.span(level)) break;
      more = descend_vertex(s, level, lt, off, d);
    }
    int s1 = rng.sign();
    int s2 = (ls >= 1) ? s1 : rng.sign();  // the level's choice is decided at local time 1
    p1 *= s1;
    p2 *= s2;
    rows.push_back({level, lt, s1, s2, p1, p2});
    if (!more) break;
    std::int64_t delta = s.a[level] + std::int64_t(d.copy - 1) * s.span(level - 1);
    off += delta;
    lt -= delta;
    ls -= delta;
    --level;
  }
  return rows;
}

std::int64_t coupled_distance(const GraphSchedule& s, int m, const std::vector<CoupledRow>& rows) {
  (void)m;
  for (const auto& r : rows)
    if (r.s1 != r.s2) return 2 * std::min(r.local_t, s.span(r.level) - r.local_t);
  return 0;
}

std::pair<VertexAddress, VertexAddress> sample_coupled_pair(const GraphSchedule& s, int m,
                                                            std::int64_t t, int k,
                                                            std::uint64_t seed) {
  if (t < 1 || t > s.span(m)) throw std::out_of_range("sample_coupled_pair: t out of range");
  if (k < 0) throw std::invalid_argument("sample_coupled_pair: k must be >= 0");
  std::int64_t cs = (k < 62) ? t - (std::int64_t(1) << k) : std::int64_t(-1) << 62;
  Rng rng(seed, {0xc17d, static_cast<std::uint64_t>(m), static_cast<std::uint64_t>(t),
                 static_cast<std::uint64_t>(k)});
  auto rows = sample_coupled_stack(s, m, cs, t, rng, false);
  size_t idx1 = 0, idx2 = 0;
  VertexAddress a1 = make_address(s, m, t, [&](int) { return rows[idx1++].s1; });
  VertexAddress a2 = make_address(s, m, t, [&](int) { return rows[idx2++].s2; });
  return {a1, a2};
}

// --- materialization -------------------------------------------------------------

namespace {

struct Builder {
  const GraphSchedule& s;
  MaterializedGraph& g;

  int vertex(std::int64_t t, const std::vector<std::int8_t>& signs) {
    VertexAddress v;
    v.level = g.m;
    v.t = t;
    v.signs = signs;
    auto it = g.index.find(v);
    if (it != g.index.end()) return it->second;
    int id = static_cast<int>(g.verts.size());
    g.verts.push_back(v);
    g.index.emplace(std::move(v), id);
    return id;
  }

  void edge(int u, int v) { g.edges.emplace_back(u, v); }

  void build(int level, std::int64_t toff, std::vector<std::int8_t>& prefix, int src, int snk) {
    if (level == 0) {
      edge(src, snk);
      return;
    }
    std::int64_t L = s.span(level), a = s.a[level], A = s.A[level], S = s.span(level - 1);
    for (int sg : {+1, -1}) {
      prefix.push_back(static_cast<std::int8_t>(sg));
      int prev = src;
      for (std::int64_t t = 1; t <= a; ++t) {
        int v = vertex(toff + t, prefix);
        edge(prev, v);
        prev = v;
      }
      for (std::int64_t j = 1; j <= A; ++j) {
        int sink_j = vertex(toff + a + j * S, prefix);
        build(level - 1, toff + a + (j - 1) * S, prefix, prev, sink_j);
        prev = sink_j;
      }
      for (std::int64_t t = L - a + 1; t <= L - 1; ++t) {
        int v = vertex(toff + t, prefix);
        edge(prev, v);
        prev = v;
      }
      edge(prev, snk);
      prefix.pop_back();
    }
  }
};

}  // namespace

MaterializedGraph materialize(const GraphSchedule& s, int m, std::int64_t edge_cap) {
  if (s.edge_count(m) > edge_cap)
    throw std::runtime_error("materialize: edge count " + s.edge_count(m).get_str() +
                             " exceeds cap " + std::to_string(edge_cap));
  MaterializedGraph g;
  g.m = m;
  g.span = s.span(m);
  Builder b{s, g};
  std::vector<std::int8_t> prefix;
  int src = b.vertex(0, prefix);
  int snk = b.vertex(g.span, prefix);
  if (m == 0) {
    b.edge(src, snk);
  } else {
    b.build(m, 0, prefix, src, snk);
  }
  g.verts_by_t.assign(g.span + 1, {});
  for (size_t i = 0; i < g.verts.size(); ++i)
    g.verts_by_t[g.verts[i].t].push_back(static_cast<int>(i));
  return g;
}

int MaterializedGraph::id_of(const VertexAddress& v) const {
  auto it = index.find(v);
  if (it == index.end()) throw std::out_of_range("id_of: unknown vertex");
  return it->second;
}

std::vector<std::vector<int>> MaterializedGraph::undirected_adjacency() const {
  std::vector<std::vector<int>> adj(verts.size());
  for (auto [u, v] : edges) {
    adj[u].push_back(v);
    adj[v].push_back(u);
  }
  return adj;
}

std::vector<std::int64_t> MaterializedGraph::bfs(int src) const {
  auto adj = undirected_adjacency();
  std::vector<std::int64_t> dist(verts.size(), -1);
  std::deque<int> q{src};
  dist[src] = 0;
  while (!q.empty()) {
    int u = q.front();
    q.pop_front();
    for (int v : adj[u])
      if (dist[v] < 0) {
        dist[v] = dist[u] + 1;
        q.push_back(v);
      }
  }
  return dist;
}

std::string edge_list_text(const MaterializedGraph& g) {
  std::ostringstream out;
  for (auto [u, v] : g.edges) out << address_str(g.verts[u]) << " " << address_str(g.verts[v]) << "\n";
  return out.str();
}

}  // namespace carnot
