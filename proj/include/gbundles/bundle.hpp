#pragma once

// G-bundles on the cover with a lifted deck action.  A bundle is encoded by
// transitions g_e on oriented cover edges (transport p |-> g_e * p from the
// source fiber to the target fiber) and lift coefficients c_{gamma,v} (the
// deck action on the fiber at v is p |-> c_{gamma,v} * gamma_G(p)).  Four
// invariants tie the data together:
//
//   g_{rev(e)} = g_e^-1
//   c_{e,v} = e
//   c_{gamma*sigma,v} = c_{gamma,sigma.v} * gamma_G(c_{sigma,v})
//   c_{gamma,t(e)} * gamma_G(g_e) = g_{gamma.e} * c_{gamma,s(e)}
//
// Gauges act per cover vertex: g'_e = h_{t(e)} g_e h_{s(e)}^-1 and
// c'_{gamma,v} = h_{gamma.v} c_{gamma,v} gamma_G(h_v)^-1.  The restriction
// to a branch fiber at its basepoint lift is a twisted cocycle on the
// stabilizer; its twisted-conjugacy class is the local type.

#include <algorithm>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "gbundles/cohomology.hpp"
#include "gbundles/covering.hpp"
#include "gbundles/errors.hpp"
#include "gbundles/group.hpp"

namespace gbundles {

struct EquivBundle {
  GammaCover cover;
  AutAction action;
  std::vector<Elem> trans;  // per oriented cover edge
  std::vector<Elem> lift;   // [gamma * num_vertices + cover vertex]

  Elem g(int ce) const { return trans[ce]; }
  Elem c(Elem gam, int v) const { return lift[gam * cover.num_vertices + v]; }

  std::vector<Elem> data_vector() const {
    std::vector<Elem> d = trans;
    d.insert(d.end(), lift.begin(), lift.end());
    return d;
  }

  bool same_context(const EquivBundle& o) const {
    return cover == o.cover && action == o.action;
  }
};

namespace detail {

inline void check_bundle_context(const GammaCover& cover, const AutAction& action) {
  if (!(cover.gamma == action.gamma))
    fail(ErrKind::MismatchedContext, "cover and action use different deck groups");
}

inline void validate_bundle_data(const GammaCover& cover, const AutAction& action,
                                 const std::vector<Elem>& trans,
                                 const std::vector<Elem>& lift) {
  const FiniteGroup& gam = cover.gamma;
  const FiniteGroup& g = action.g;
  const int nv = cover.num_vertices;
  if (static_cast<int>(trans.size()) != cover.num_cover_oriented())
    fail(ErrKind::ValidationError, "transition vector has wrong length");
  if (static_cast<int>(lift.size()) != gam.n * nv)
    fail(ErrKind::ValidationError, "lift vector has wrong length");
  for (Elem v : trans)
    if (v < 0 || v >= g.n) fail(ErrKind::ValidationError, "transition out of range");
  for (Elem v : lift)
    if (v < 0 || v >= g.n) fail(ErrKind::ValidationError, "lift coefficient out of range");

  auto c = [&](Elem ga, int v) { return lift[ga * nv + v]; };

  for (int ce = 0; ce < cover.num_cover_oriented(); ce += 2)
    if (trans[cover.ce_rev(ce)] != g.inv(trans[ce]))
      fail(ErrKind::OrientationViolation, "cover edge " + std::to_string(ce));
  for (int v = 0; v < nv; ++v)
    if (c(gam.identity, v) != g.identity)
      fail(ErrKind::CocycleViolation, "unit fails at vertex " + std::to_string(v));
  for (Elem a = 0; a < gam.n; ++a)
    for (Elem b = 0; b < gam.n; ++b)
      for (int v = 0; v < nv; ++v) {
        Elem lhs = c(gam.mul(a, b), v);
        Elem rhs = g.mul(c(a, cover.vact[b][v]), action.apply(a, c(b, v)));
        if (lhs != rhs)
          fail(ErrKind::CocycleViolation, "composition fails at (" + std::to_string(a) + "," +
                                              std::to_string(b) + ", vertex " + std::to_string(v) +
                                              ")");
      }
  for (Elem a = 0; a < gam.n; ++a)
    for (int ce = 0; ce < cover.num_cover_oriented(); ++ce) {
      Elem lhs = g.mul(c(a, cover.ce_dst(ce)), action.apply(a, trans[ce]));
      Elem rhs = g.mul(trans[cover.ce_act(a, ce)], c(a, cover.ce_src(ce)));
      if (lhs != rhs)
        fail(ErrKind::EdgeCompatViolation,
             "(" + std::to_string(a) + ", cover edge " + std::to_string(ce) + ")");
    }
}

}  // namespace detail

inline EquivBundle make_bundle(GammaCover cover, AutAction action, std::vector<Elem> trans,
                               std::vector<Elem> lift) {
  detail::check_bundle_context(cover, action);
  detail::validate_bundle_data(cover, action, trans, lift);
  return EquivBundle{std::move(cover), std::move(action), std::move(trans), std::move(lift)};
}

inline EquivBundle trivial_bundle(GammaCover cover, AutAction action) {
  detail::check_bundle_context(cover, action);
  std::vector<Elem> trans(cover.num_cover_oriented(), action.g.identity);
  std::vector<Elem> lift(static_cast<size_t>(cover.gamma.n) * cover.num_vertices,
                         action.g.identity);
  return make_bundle(std::move(cover), std::move(action), std::move(trans), std::move(lift));
}

struct Gauge {
  std::vector<Elem> h;  // per cover vertex
};

inline EquivBundle gauge_transform(const EquivBundle& p, const Gauge& gauge) {
  const FiniteGroup& g = p.action.g;
  const GammaCover& cov = p.cover;
  if (static_cast<int>(gauge.h.size()) != cov.num_vertices)
    fail(ErrKind::ValidationError, "gauge has wrong length");
  for (Elem v : gauge.h)
    if (v < 0 || v >= g.n) fail(ErrKind::ValidationError, "gauge value out of range");
  std::vector<Elem> trans(p.trans.size());
  std::vector<Elem> lift(p.lift.size());
  for (int ce = 0; ce < cov.num_cover_oriented(); ++ce)
    trans[ce] = g.mul(gauge.h[cov.ce_dst(ce)], g.mul(p.trans[ce], g.inv(gauge.h[cov.ce_src(ce)])));
  for (Elem gam = 0; gam < cov.gamma.n; ++gam)
    for (int v = 0; v < cov.num_vertices; ++v)
      lift[gam * cov.num_vertices + v] =
          g.mul(gauge.h[cov.vact[gam][v]],
                g.mul(p.c(gam, v), g.inv(p.action.apply(gam, gauge.h[v]))));
  return make_bundle(p.cover, p.action, std::move(trans), std::move(lift));
}

// Gauge with index idx in the lexicographic enumeration of G^{cover vertices}
// (last vertex varies fastest).
inline Gauge gauge_by_index(const GammaCover& cov, const FiniteGroup& g, long long idx) {
  std::vector<Elem> h(cov.num_vertices, 0);
  for (int v = cov.num_vertices - 1; v >= 0; --v) {
    h[v] = static_cast<Elem>(idx % g.n);
    idx /= g.n;
  }
  return Gauge{std::move(h)};
}

namespace detail {

// Candidate gauge from p1 to p2 with value h0 at cover vertex 0.  Edge
// conditions propagate h across transitions and lift conditions propagate it
// across the deck action; those moves connect the cover, so h0 determines the
// whole gauge.  Returns it when all conditions check out.
inline std::optional<std::vector<Elem>> propagate_gauge(const EquivBundle& p1,
                                                        const EquivBundle& p2, Elem h0) {
  const GammaCover& cov = p1.cover;
  const FiniteGroup& g = p1.action.g;
  const int nv = cov.num_vertices;
  std::vector<Elem> h(nv, -1);
  h[0] = h0;
  std::vector<int> queue{0};
  for (size_t q = 0; q < queue.size(); ++q) {
    int v = queue[q];
    for (Elem gam = 0; gam < cov.gamma.n; ++gam) {
      int w = cov.vact[gam][v];
      if (h[w] < 0) {
        h[w] = g.mul(p2.c(gam, v), g.mul(p1.action.apply(gam, h[v]), g.inv(p1.c(gam, v))));
        queue.push_back(w);
      }
    }
    for (int ce = 0; ce < cov.num_cover_oriented(); ++ce) {
      if (cov.ce_src(ce) != v) continue;
      int w = cov.ce_dst(ce);
      if (h[w] < 0) {
        h[w] = g.mul(p2.g(ce), g.mul(h[v], g.inv(p1.g(ce))));
        queue.push_back(w);
      }
    }
  }
  for (int v = 0; v < nv; ++v)
    if (h[v] < 0) fail(ErrKind::ValidationError, "cover is not connected under edges and deck");

  for (int ce = 0; ce < cov.num_cover_oriented(); ++ce)
    if (g.mul(h[cov.ce_dst(ce)], p1.g(ce)) != g.mul(p2.g(ce), h[cov.ce_src(ce)]))
      return std::nullopt;
  for (Elem gam = 0; gam < cov.gamma.n; ++gam)
    for (int v = 0; v < nv; ++v)
      if (p2.c(gam, v) !=
          g.mul(h[cov.vact[gam][v]], g.mul(p1.c(gam, v), g.inv(p1.action.apply(gam, h[v])))))
        return std::nullopt;
  return h;
}

}  // namespace detail

inline std::optional<Gauge> is_isomorphic(const EquivBundle& p1, const EquivBundle& p2) {
  if (!p1.same_context(p2))
    fail(ErrKind::MismatchedContext, "bundles live on different covers or actions");
  for (Elem h0 = 0; h0 < p1.action.g.n; ++h0)
    if (auto h = detail::propagate_gauge(p1, p2, h0)) return Gauge{std::move(*h)};
  return std::nullopt;
}

// Automorphisms are gauges from p to itself; each is determined by its value
// at cover vertex 0, so count the seed values whose propagation closes up.
inline long long automorphism_order(const EquivBundle& p) {
  long long count = 0;
  for (Elem h0 = 0; h0 < p.action.g.n; ++h0)
    if (detail::propagate_gauge(p, p, h0)) ++count;
  return count;
}

// Restriction to the fiber over a base vertex, read at the basepoint lift.
// For gamma in the stabilizer the lift coefficients there satisfy the twisted
// cocycle identity on the nose.
inline TwistedCocycle restrict_to_fiber(const EquivBundle& p, int base_vertex) {
  const GammaCover& cov = p.cover;
  if (base_vertex < 0 || base_vertex >= cov.base.num_vertices)
    fail(ErrKind::ValidationError, "base vertex out of range");
  Subgroup stab = make_subgroup(cov.gamma, cov.stab[base_vertex]);
  int bp = cov.basepoint_lift(base_vertex);
  std::vector<Elem> values(stab.members.size());
  for (size_t i = 0; i < stab.members.size(); ++i) values[i] = p.c(stab.members[i], bp);
  return make_cocycle(std::move(stab), p.action, std::move(values));
}

struct LocalTypeProfile {
  // One entry per branch point, in base-vertex order.
  std::vector<std::pair<int, H1Class>> classes;

  bool operator==(const LocalTypeProfile& o) const {
    if (classes.size() != o.classes.size()) return false;
    for (size_t i = 0; i < classes.size(); ++i) {
      if (classes[i].first != o.classes[i].first) return false;
      if (classes[i].second.representative.values != o.classes[i].second.representative.values)
        return false;
    }
    return true;
  }
};

namespace detail {

inline H1Class class_of_cocycle(const TwistedCocycle& c) {
  std::vector<std::vector<Elem>> orbit{c.values};
  std::map<std::vector<Elem>, bool> seen{{c.values, true}};
  for (size_t q = 0; q < orbit.size(); ++q)
    for (Elem b = 0; b < c.action.g.n; ++b) {
      auto moved = twisted_conjugate(b, make_cocycle(c.stab, c.action, orbit[q]));
      if (!seen.count(moved.values)) {
        seen[moved.values] = true;
        orbit.push_back(moved.values);
      }
    }
  auto least = *std::min_element(orbit.begin(), orbit.end());
  return H1Class{make_cocycle(c.stab, c.action, std::move(least)),
                 static_cast<long>(orbit.size())};
}

}  // namespace detail

inline LocalTypeProfile local_type(const EquivBundle& p) {
  LocalTypeProfile profile;
  for (const auto& bp : branch_locus(p.cover))
    profile.classes.emplace_back(bp.vertex, detail::class_of_cocycle(restrict_to_fiber(p, bp.vertex)));
  return profile;
}

struct SameTypeResult {
  bool same = false;
  // Per branch point: twisted-conjugating witness when the classes agree.
  std::vector<std::pair<int, std::optional<Elem>>> witnesses;
};

// Local-type comparison at every branch point.  With check_etale_locus set,
// additionally confirms that restriction cocycles at unramified vertices are
// comparable (they always are: the stabilizer there is trivial).
inline SameTypeResult same_local_type(const EquivBundle& p1, const EquivBundle& p2,
                                      bool check_etale_locus = false) {
  if (!p1.same_context(p2))
    fail(ErrKind::MismatchedContext, "bundles live on different covers or actions");
  SameTypeResult res;
  res.same = true;
  for (const auto& bp : branch_locus(p1.cover)) {
    auto w = same_class(restrict_to_fiber(p1, bp.vertex), restrict_to_fiber(p2, bp.vertex));
    if (!w) res.same = false;
    res.witnesses.emplace_back(bp.vertex, w);
  }
  if (check_etale_locus)
    for (int x = 0; x < p1.cover.base.num_vertices; ++x)
      if (p1.cover.stab[x].size() == 1 &&
          !same_class(restrict_to_fiber(p1, x), restrict_to_fiber(p2, x)))
        res.same = false;
  return res;
}

struct BundleClass {
  EquivBundle rep;  // least data vector in its gauge orbit
  long long aut_order = 0;
};

struct BundleEnumeration {
  std::vector<BundleClass> classes;
  long long total_count = 0;       // valid data tuples before gauge grouping
  long long gauge_group_order = 0; // |G|^{cover vertices}
};

namespace detail {

inline long long checked_power(long long base, int exp, long long cap, const char* what) {
  long long v = 1;
  for (int i = 0; i < exp; ++i) {
    if (v > cap / std::max<long long>(base, 1))
      fail(ErrKind::BudgetExceeded, std::string(what) + " exceeds budget");
    v *= base;
  }
  if (v > cap) fail(ErrKind::BudgetExceeded, std::string(what) + " exceeds budget");
  return v;
}

// c-block over one vertex fiber from a fiber cocycle plus one free value per
// nonbase coset: u extends the cocycle over all of Gamma, and
// c_{gamma, sigma.bp} = u_{gamma*sigma} * gamma_G(u_sigma)^-1.
struct VertexBlockScheme {
  int vertex = 0;
  int fiber_size = 0;
  std::vector<Elem> reps;             // coset representative per local index, reps[0] = e
  std::vector<TwistedCocycle> cocycles;
  long long choices = 0;              // |cocycles| * |G|^{fiber_size-1}
};

inline std::vector<Elem> build_u(const GammaCover& cov, const AutAction& action,
                                 const VertexBlockScheme& scheme, const TwistedCocycle& a,
                                 const std::vector<Elem>& w) {
  const FiniteGroup& gam = cov.gamma;
  const FiniteGroup& g = action.g;
  int bp = cov.basepoint_lift(scheme.vertex);
  std::vector<Elem> u(gam.n);
  for (Elem ga = 0; ga < gam.n; ++ga) {
    int j = cov.vact[ga][bp] - bp;
    Elem rep = scheme.reps[j];
    Elem delta = gam.mul(gam.inv(rep), ga);
    Elem wj = (j == 0) ? g.identity : w[j - 1];
    u[ga] = g.mul(wj, action.apply(rep, a.value_at(delta)));
  }
  return u;
}

}  // namespace detail

inline EquivBundle bundle_from_parameters(const GammaCover& cov, const AutAction& action,
                                          const std::vector<std::vector<Elem>>& u_per_vertex,
                                          const std::vector<Elem>& edge_values) {
  const FiniteGroup& gam = cov.gamma;
  const FiniteGroup& g = action.g;
  const int nv = cov.num_vertices;
  std::vector<Elem> lift(static_cast<size_t>(gam.n) * nv);
  for (int x = 0; x < cov.base.num_vertices; ++x) {
    const auto& u = u_per_vertex[x];
    int bp = cov.basepoint_lift(x);
    for (int j = 0; j < cov.vfiber_size[x]; ++j) {
      Elem sigma = least_deck_to(cov, x, j);
      for (Elem ga = 0; ga < gam.n; ++ga)
        lift[ga * nv + bp + j] = g.mul(u[gam.mul(ga, sigma)], g.inv(action.apply(ga, u[sigma])));
    }
  }
  std::vector<Elem> trans(cov.num_cover_oriented());
  for (int k = 0; k < cov.base.num_pairs(); ++k) {
    int s0 = cov.inc_src[k], t0 = cov.inc_dst[k];
    for (Elem ga = 0; ga < gam.n; ++ga) {
      Elem value = g.mul(lift[ga * nv + t0],
                         g.mul(action.apply(ga, edge_values[k]), g.inv(lift[ga * nv + s0])));
      int ce = cov.ce_id(k, ga, 0);
      trans[ce] = value;
      trans[cov.ce_rev(ce)] = g.inv(value);
    }
  }
  return make_bundle(cov, action, std::move(trans), std::move(lift));
}

inline std::vector<Elem> apply_vertex_gauge(const GammaCover& cov, const AutAction& action,
                                            const std::vector<Elem>& data, int vtx, Elem b) {
  const FiniteGroup& g = action.g;
  const int nv = cov.num_vertices;
  const int ne = cov.num_cover_oriented();
  std::vector<Elem> out = data;
  auto h = [&](int v) { return v == vtx ? b : g.identity; };
  for (int ce = 0; ce < ne; ++ce) {
    int s = cov.ce_src(ce), t = cov.ce_dst(ce);
    if (s != vtx && t != vtx) continue;
    out[ce] = g.mul(h(t), g.mul(data[ce], g.inv(h(s))));
  }
  for (Elem ga = 0; ga < cov.gamma.n; ++ga)
    for (int v = 0; v < nv; ++v) {
      int w = cov.vact[ga][v];
      if (v != vtx && w != vtx) continue;
      out[ne + ga * nv + v] =
          g.mul(h(w), g.mul(data[ne + ga * nv + v], g.inv(action.apply(ga, h(v)))));
    }
  return out;
}

inline BundleEnumeration enumerate_bundles(const GammaCover& cov, const AutAction& action,
                                           const std::optional<LocalTypeProfile>& filter,
                                           long long budget) {
  detail::check_bundle_context(cov, action);
  const FiniteGroup& gam = cov.gamma;
  const FiniteGroup& g = action.g;
  const int nv = cov.num_vertices;

  detail::checked_power(g.n, nv + cov.num_cover_pairs(), budget,
                        "|G|^(cover vertices + cover edge pairs)");

  // Reduced parameter space: all four bundle invariants hold by construction,
  // so the product below enumerates every valid data tuple exactly once.
  std::vector<detail::VertexBlockScheme> schemes;
  for (int x = 0; x < cov.base.num_vertices; ++x) {
    detail::VertexBlockScheme s;
    s.vertex = x;
    s.fiber_size = cov.vfiber_size[x];
    s.reps.resize(s.fiber_size);
    for (int j = 0; j < s.fiber_size; ++j) s.reps[j] = least_deck_to(cov, x, j);
    s.reps[0] = gam.identity;
    s.cocycles = enumerate_cocycles(make_subgroup(gam, cov.stab[x]), action);
    s.choices = static_cast<long long>(s.cocycles.size());
    for (int j = 1; j < s.fiber_size; ++j) s.choices *= g.n;
    schemes.push_back(std::move(s));
  }

  std::vector<std::vector<Elem>> all;
  std::vector<long long> odo(schemes.size(), 0);
  std::vector<Elem> edge_values(cov.base.num_pairs(), 0);
  bool done = false;
  while (!done) {
    std::vector<std::vector<Elem>> u_per_vertex;
    for (size_t x = 0; x < schemes.size(); ++x) {
      const auto& s = schemes[x];
      long long idx = odo[x];
      long long ci = idx;
      std::vector<Elem> w(static_cast<size_t>(std::max(0, s.fiber_size - 1)));
      for (int j = s.fiber_size - 1; j >= 1; --j) {
        w[j - 1] = static_cast<Elem>(ci % g.n);
        ci /= g.n;
      }
      const TwistedCocycle& a = s.cocycles[static_cast<size_t>(ci)];
      u_per_vertex.push_back(detail::build_u(cov, action, s, a, w));
    }
    for (long long ev = 0;; ++ev) {
      auto b = bundle_from_parameters(cov, action, u_per_vertex, edge_values);
      all.push_back(b.data_vector());
      // Advance edge values (last pair fastest).
      int k = cov.base.num_pairs() - 1;
      while (k >= 0 && ++edge_values[k] == g.n) edge_values[k--] = 0;
      if (k < 0) break;
      (void)ev;
    }
    // Advance vertex odometer.
    size_t x = schemes.size();
    done = true;
    while (x > 0) {
      --x;
      if (++odo[x] < schemes[x].choices) {
        done = false;
        break;
      }
      odo[x] = 0;
    }
  }

  std::sort(all.begin(), all.end());
  std::map<std::vector<Elem>, int> index;
  for (int i = 0; i < static_cast<int>(all.size()); ++i) index[all[i]] = i;

  long long gauge_order = 1;
  for (int v = 0; v < nv; ++v) gauge_order *= g.n;

  BundleEnumeration result;
  result.total_count = static_cast<long long>(all.size());
  result.gauge_group_order = gauge_order;

  std::vector<bool> visited(all.size(), false);
  for (size_t i = 0; i < all.size(); ++i) {
    if (visited[i]) continue;
    std::vector<int> orbit{static_cast<int>(i)};
    visited[i] = true;
    for (size_t q = 0; q < orbit.size(); ++q)
      for (int v = 0; v < nv; ++v)
        for (Elem b = 0; b < g.n; ++b) {
          auto moved = apply_vertex_gauge(cov, action, all[static_cast<size_t>(orbit[q])], v, b);
          int j = index.at(moved);
          if (!visited[static_cast<size_t>(j)]) {
            visited[static_cast<size_t>(j)] = true;
            orbit.push_back(j);
          }
        }
    long long orbit_size = static_cast<long long>(orbit.size());
    if (gauge_order % orbit_size != 0)
      fail(ErrKind::ValidationError, "gauge orbit size does not divide the gauge group order");
    // Ascending starts make the first element of each orbit its least member.
    const auto& d = all[i];
    std::vector<Elem> trans(d.begin(), d.begin() + cov.num_cover_oriented());
    std::vector<Elem> lift(d.begin() + cov.num_cover_oriented(), d.end());
    BundleClass cls{make_bundle(cov, action, std::move(trans), std::move(lift)),
                    gauge_order / orbit_size};
    result.classes.push_back(std::move(cls));
  }

  if (filter) {
    std::vector<BundleClass> kept;
    for (auto& cls : result.classes)
      if (local_type(cls.rep) == *filter) kept.push_back(std::move(cls));
    result.classes = std::move(kept);
  }
  return result;
}

}  // namespace gbundles
