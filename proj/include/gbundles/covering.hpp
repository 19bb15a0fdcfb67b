#pragma once

// Finite graph model of a generically étale Gamma-covering.  The base is a
// connected graph with oriented edges in reverse pairs; the cover assigns a
// transitive Gamma-set to every base vertex and a free transitive Gamma-set
// to every base edge, with Gamma-equivariant incidence.  Ramification lives
// only at vertices: the branch locus is the set of base vertices whose fiber
// has a nontrivial stabilizer.
//
// Edge fibers are canonicalized after validation: the lifts of base edge
// pair k are labelled by Gamma via a basepoint lift (label e), and the
// incidence of every other lift follows by equivariance.

#include <string>
#include <utility>
#include <vector>

#include "gbundles/errors.hpp"
#include "gbundles/group.hpp"

namespace gbundles {

struct BaseGraph {
  int num_vertices = 0;
  std::vector<std::pair<int, int>> pairs;  // undirected edges, canonical orientation

  int num_pairs() const { return static_cast<int>(pairs.size()); }
  int num_oriented() const { return 2 * num_pairs(); }
  // Oriented edge 2k is pair k forward, 2k+1 is its reverse.
  int src(int e) const { return (e & 1) ? pairs[e >> 1].second : pairs[e >> 1].first; }
  int dst(int e) const { return (e & 1) ? pairs[e >> 1].first : pairs[e >> 1].second; }
  int rev(int e) const { return e ^ 1; }
  int pair_of(int e) const { return e >> 1; }

  bool operator==(const BaseGraph& o) const {
    return num_vertices == o.num_vertices && pairs == o.pairs;
  }
};

inline BaseGraph make_base_graph(int vertices, std::vector<std::pair<int, int>> edges) {
  if (vertices < 1) fail(ErrKind::ValidationError, "base graph needs at least one vertex");
  for (auto& [s, t] : edges)
    if (s < 0 || s >= vertices || t < 0 || t >= vertices)
      fail(ErrKind::ValidationError, "edge endpoint out of range");
  std::vector<int> comp(vertices, -1);
  std::vector<int> stack{0};
  comp[0] = 0;
  while (!stack.empty()) {
    int v = stack.back();
    stack.pop_back();
    for (auto& [s, t] : edges) {
      for (int w : {s == v ? t : -1, t == v ? s : -1})
        if (w >= 0 && comp[w] < 0) {
          comp[w] = 0;
          stack.push_back(w);
        }
    }
  }
  for (int v = 0; v < vertices; ++v)
    if (comp[v] < 0) fail(ErrKind::ValidationError, "base graph is not connected");
  return BaseGraph{vertices, std::move(edges)};
}

// Explicit Gamma-set: act[gamma][i] is the image of point i.
struct GammaSet {
  std::vector<std::vector<int>> act;
  int size() const { return act.empty() ? 0 : static_cast<int>(act[0].size()); }
};

// A free transitive edge fiber together with per-lift endpoints: endpoint
// indices are local to the fibers of the edge's source and target vertices.
struct EdgeFiberSpec {
  GammaSet set;
  std::vector<std::pair<int, int>> endpoints;
};

struct GammaCover {
  BaseGraph base;
  FiniteGroup gamma;

  std::vector<int> vfiber_offset;  // per base vertex, first cover-vertex id
  std::vector<int> vfiber_size;
  int num_vertices = 0;                 // cover vertices
  std::vector<int> vproj;               // cover vertex -> base vertex
  std::vector<std::vector<int>> vact;   // [gamma][cover vertex]
  std::vector<int> inc_src, inc_dst;    // per base pair: endpoints of the basepoint lift
  std::vector<std::vector<Elem>> stab;  // per base vertex: stabilizer members of its basepoint lift

  // Cover edge lifts of base pair k are labelled by Gamma; oriented cover edge
  // ids are ce = 2*(k*|Gamma| + label) + o with o = 0 the canonical direction.
  int num_cover_pairs() const { return base.num_pairs() * gamma.n; }
  int num_cover_oriented() const { return 2 * num_cover_pairs(); }
  int ce_id(int base_pair, Elem label, int o) const {
    return 2 * (base_pair * gamma.n + label) + o;
  }
  int ce_base_pair(int ce) const { return (ce >> 1) / gamma.n; }
  Elem ce_label(int ce) const { return (ce >> 1) % gamma.n; }
  int ce_orient(int ce) const { return ce & 1; }
  int ce_rev(int ce) const { return ce ^ 1; }
  int ce_src(int ce) const {
    int k = ce_base_pair(ce);
    Elem lab = ce_label(ce);
    return vact[lab][ce_orient(ce) ? inc_dst[k] : inc_src[k]];
  }
  int ce_dst(int ce) const {
    int k = ce_base_pair(ce);
    Elem lab = ce_label(ce);
    return vact[lab][ce_orient(ce) ? inc_src[k] : inc_dst[k]];
  }
  int ce_act(Elem g, int ce) const {
    return ce_id(ce_base_pair(ce), gamma.mul(g, ce_label(ce)), ce_orient(ce));
  }
  int ce_proj(int ce) const { return 2 * ce_base_pair(ce) + ce_orient(ce); }

  int basepoint_lift(int base_vertex) const { return vfiber_offset[base_vertex]; }
  int fiber_local(int cover_vertex) const {
    return cover_vertex - vfiber_offset[vproj[cover_vertex]];
  }

  bool operator==(const GammaCover& o) const {
    return base == o.base && gamma == o.gamma && vproj == o.vproj && vact == o.vact &&
           inc_src == o.inc_src && inc_dst == o.inc_dst;
  }
};

namespace detail {

inline void check_gamma_set(const FiniteGroup& gamma, const GammaSet& s, ErrKind kind,
                            const std::string& what) {
  if (static_cast<int>(s.act.size()) != gamma.n)
    fail(kind, what + ": action table has wrong number of rows");
  const int m = s.size();
  if (m < 1) fail(kind, what + ": fiber is empty");
  for (Elem gam = 0; gam < gamma.n; ++gam) {
    const auto& row = s.act[gam];
    if (static_cast<int>(row.size()) != m) fail(kind, what + ": ragged action table");
    std::vector<bool> hit(m, false);
    for (int x : row) {
      if (x < 0 || x >= m || hit[x]) fail(kind, what + ": row is not a permutation");
      hit[x] = true;
    }
  }
  for (int i = 0; i < m; ++i)
    if (s.act[gamma.identity][i] != i) fail(kind, what + ": identity must act trivially");
  for (Elem a = 0; a < gamma.n; ++a)
    for (Elem b = 0; b < gamma.n; ++b)
      for (int i = 0; i < m; ++i)
        if (s.act[gamma.mul(a, b)][i] != s.act[a][s.act[b][i]])
          fail(kind, what + ": action is not compositional");
}

inline bool transitive(const GammaSet& s) {
  const int m = s.size();
  std::vector<bool> seen(m, false);
  seen[0] = true;
  int count = 1;
  for (const auto& row : s.act)
    if (!seen[row[0]]) {
      seen[row[0]] = true;
      ++count;
    }
  // Orbit of point 0 under a group action is already closed.
  return count == m;
}

}  // namespace detail

inline GammaCover make_cover(BaseGraph base, FiniteGroup gamma,
                             std::vector<GammaSet> vertex_fibers,
                             std::vector<EdgeFiberSpec> edge_fibers) {
  if (gamma.n > kMaxGammaOrder)
    fail(ErrKind::TooLarge, "deck group order " + std::to_string(gamma.n) + " exceeds cap " +
                                std::to_string(kMaxGammaOrder));
  if (static_cast<int>(vertex_fibers.size()) != base.num_vertices)
    fail(ErrKind::ValidationError, "need one vertex fiber per base vertex");
  if (static_cast<int>(edge_fibers.size()) != base.num_pairs())
    fail(ErrKind::ValidationError, "need one edge fiber per base edge");

  for (int x = 0; x < base.num_vertices; ++x) {
    detail::check_gamma_set(gamma, vertex_fibers[x], ErrKind::NonTransitiveVertexFiber,
                            "vertex " + std::to_string(x));
    if (!detail::transitive(vertex_fibers[x]))
      fail(ErrKind::NonTransitiveVertexFiber, "vertex " + std::to_string(x));
  }
  for (int k = 0; k < base.num_pairs(); ++k) {
    const auto& ef = edge_fibers[k];
    detail::check_gamma_set(gamma, ef.set, ErrKind::NonFreeEdgeFiber,
                            "edge " + std::to_string(k));
    if (ef.set.size() != gamma.n || !detail::transitive(ef.set))
      fail(ErrKind::NonFreeEdgeFiber, "edge " + std::to_string(k) + ": fiber is not transitive");
    for (Elem gam = 0; gam < gamma.n; ++gam)
      if (gam != gamma.identity)
        for (int i = 0; i < ef.set.size(); ++i)
          if (ef.set.act[gam][i] == i)
            fail(ErrKind::NonFreeEdgeFiber,
                 "edge " + std::to_string(k) + ": lift " + std::to_string(i) + " is fixed");
    const int sm = vertex_fibers[base.src(2 * k)].size();
    const int tm = vertex_fibers[base.dst(2 * k)].size();
    if (static_cast<int>(ef.endpoints.size()) != ef.set.size())
      fail(ErrKind::ValidationError, "edge " + std::to_string(k) + ": need endpoints per lift");
    for (auto& [a, b] : ef.endpoints)
      if (a < 0 || a >= sm || b < 0 || b >= tm)
        fail(ErrKind::ValidationError, "edge " + std::to_string(k) + ": endpoint out of range");
    const auto& sact = vertex_fibers[base.src(2 * k)].act;
    const auto& tact = vertex_fibers[base.dst(2 * k)].act;
    for (Elem gam = 0; gam < gamma.n; ++gam)
      for (int i = 0; i < ef.set.size(); ++i) {
        int j = ef.set.act[gam][i];
        if (ef.endpoints[j].first != sact[gam][ef.endpoints[i].first] ||
            ef.endpoints[j].second != tact[gam][ef.endpoints[i].second])
          fail(ErrKind::NonEquivariantIncidence,
               "(" + std::to_string(gam) + ", lift " + std::to_string(i) + " of edge " +
                   std::to_string(k) + ")");
      }
  }

  GammaCover cov;
  cov.base = std::move(base);
  cov.gamma = std::move(gamma);
  cov.vfiber_offset.resize(vertex_fibers.size());
  cov.vfiber_size.resize(vertex_fibers.size());
  int total = 0;
  for (size_t x = 0; x < vertex_fibers.size(); ++x) {
    cov.vfiber_offset[x] = total;
    cov.vfiber_size[x] = vertex_fibers[x].size();
    total += vertex_fibers[x].size();
  }
  cov.num_vertices = total;
  cov.vproj.resize(total);
  cov.vact.assign(cov.gamma.n, std::vector<int>(total));
  for (size_t x = 0; x < vertex_fibers.size(); ++x)
    for (int i = 0; i < vertex_fibers[x].size(); ++i) {
      int v = cov.vfiber_offset[x] + i;
      cov.vproj[v] = static_cast<int>(x);
      for (Elem gam = 0; gam < cov.gamma.n; ++gam)
        cov.vact[gam][v] = cov.vfiber_offset[x] + vertex_fibers[x].act[gam][i];
    }

  // Canonicalize each edge fiber: basepoint is lift 0; by freeness its orbit
  // map gamma |-> gamma . lift0 is a bijection, and equivariance (validated
  // above) pins every other lift's endpoints.
  cov.inc_src.resize(edge_fibers.size());
  cov.inc_dst.resize(edge_fibers.size());
  for (size_t k = 0; k < edge_fibers.size(); ++k) {
    int sx = cov.base.src(2 * static_cast<int>(k));
    int tx = cov.base.dst(2 * static_cast<int>(k));
    cov.inc_src[k] = cov.vfiber_offset[sx] + edge_fibers[k].endpoints[0].first;
    cov.inc_dst[k] = cov.vfiber_offset[tx] + edge_fibers[k].endpoints[0].second;
  }

  cov.stab.resize(vertex_fibers.size());
  for (size_t x = 0; x < vertex_fibers.size(); ++x) {
    int bp = cov.vfiber_offset[x];
    for (Elem gam = 0; gam < cov.gamma.n; ++gam)
      if (cov.vact[gam][bp] == bp) cov.stab[x].push_back(gam);
    if (static_cast<int>(cov.stab[x].size()) * vertex_fibers[x].size() != cov.gamma.n)
      fail(ErrKind::NonTransitiveVertexFiber,
           "vertex " + std::to_string(x) + ": orbit-stabilizer mismatch");
  }
  return cov;
}

// Convenience form: every edge fiber is Gamma acting on itself by left
// translation, and incidence gives the endpoints of the basepoint lift only
// (local indices into the endpoint fibers).
inline GammaCover make_cover_basepoints(BaseGraph base, FiniteGroup gamma,
                                        std::vector<GammaSet> vertex_fibers,
                                        std::vector<std::pair<int, int>> incidence) {
  if (incidence.size() != base.pairs.size())
    fail(ErrKind::ValidationError, "need one incidence pair per base edge");
  if (static_cast<int>(vertex_fibers.size()) != base.num_vertices)
    fail(ErrKind::ValidationError, "need one vertex fiber per base vertex");
  std::vector<EdgeFiberSpec> edge_fibers(base.pairs.size());
  for (size_t k = 0; k < base.pairs.size(); ++k) {
    GammaSet s;
    s.act.assign(gamma.n, std::vector<int>(gamma.n));
    for (Elem a = 0; a < gamma.n; ++a)
      for (Elem b = 0; b < gamma.n; ++b) s.act[a][b] = gamma.mul(a, b);
    auto [si, ti] = incidence[k];
    int sx = base.src(2 * static_cast<int>(k));
    int tx = base.dst(2 * static_cast<int>(k));
    if (si < 0 || si >= vertex_fibers[sx].size() || ti < 0 || ti >= vertex_fibers[tx].size())
      fail(ErrKind::ValidationError, "incidence index out of range for edge " + std::to_string(k));
    edge_fibers[k].endpoints.resize(gamma.n);
    for (Elem gam = 0; gam < gamma.n; ++gam)
      edge_fibers[k].endpoints[gam] = {vertex_fibers[sx].act[gam][si],
                                       vertex_fibers[tx].act[gam][ti]};
    edge_fibers[k].set = std::move(s);
  }
  return make_cover(std::move(base), std::move(gamma), std::move(vertex_fibers),
                    std::move(edge_fibers));
}

inline GammaSet fixed_point_fiber(const FiniteGroup& gamma) {
  GammaSet s;
  s.act.assign(gamma.n, std::vector<int>{0});
  return s;
}

inline GammaSet free_fiber(const FiniteGroup& gamma) {
  GammaSet s;
  s.act.assign(gamma.n, std::vector<int>(gamma.n));
  for (Elem a = 0; a < gamma.n; ++a)
    for (Elem b = 0; b < gamma.n; ++b) s.act[a][b] = gamma.mul(a, b);
  return s;
}

// Coset fiber Gamma/H: points are left cosets of H, listed by least member.
inline GammaSet coset_fiber(const FiniteGroup& gamma, const Subgroup& h) {
  if (!(h.ambient == gamma)) fail(ErrKind::MismatchedContext, "subgroup of the wrong group");
  std::vector<int> coset_of(gamma.n, -1);
  std::vector<Elem> reps;
  for (Elem a = 0; a < gamma.n; ++a) {
    if (coset_of[a] >= 0) continue;
    int id = static_cast<int>(reps.size());
    reps.push_back(a);
    for (Elem m : h.members) coset_of[gamma.mul(a, m)] = id;
  }
  GammaSet s;
  s.act.assign(gamma.n, std::vector<int>(reps.size()));
  for (Elem gam = 0; gam < gamma.n; ++gam)
    for (size_t i = 0; i < reps.size(); ++i)
      s.act[gam][i] = coset_of[gamma.mul(gam, reps[i])];
  return s;
}

struct BranchPoint {
  int vertex = 0;
  int basepoint_lift = 0;
  Subgroup stabilizer;
};

// Least deck element moving the basepoint lift of x to local fiber index j.
inline Elem least_deck_to(const GammaCover& cov, int base_vertex, int local_j) {
  int bp = cov.basepoint_lift(base_vertex);
  for (Elem ga = 0; ga < cov.gamma.n; ++ga)
    if (cov.vact[ga][bp] == bp + local_j) return ga;
  fail(ErrKind::ValidationError, "fiber index unreachable from basepoint");
}

inline std::vector<BranchPoint> branch_locus(const GammaCover& cov) {
  std::vector<BranchPoint> out;
  for (int x = 0; x < cov.base.num_vertices; ++x)
    if (cov.stab[x].size() > 1)
      out.push_back(BranchPoint{x, cov.basepoint_lift(x), make_subgroup(cov.gamma, cov.stab[x])});
  return out;
}

}  // namespace gbundles
