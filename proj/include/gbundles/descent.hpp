#pragma once

// Descent to the base.  Fixing an anchor bundle with matching local types,
// every bundle in that sector is encoded by a torsor on the base graph under
// the anchor's automorphism groups: H_x is the twisted centralizer of the
// anchor's restriction at x (all of G at unramified vertices), and each base
// edge carries one G-value read in the trivialization given by the basepoint
// edge lift.  forward/backward convert between the two encodings and
// verify_equivalence checks that the conversion is a bijection on classes
// preserving automorphism counts.

#include <algorithm>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "gbundles/bundle.hpp"
#include "gbundles/cohomology.hpp"
#include "gbundles/covering.hpp"
#include "gbundles/errors.hpp"
#include "gbundles/group.hpp"

namespace gbundles {

// Equivariant fiberwise transports p1 -> p2 over the fiber of a base vertex:
// tuples (t_l) in G, one per fiber point, with
//   t_{gamma.l} * c1_{gamma,l} = c2_{gamma,l} * gamma_G(t_l)
// for every deck element and fiber point.  Any such tuple is determined by
// its basepoint value, so the search seeds t at the basepoint, extends along
// deck moves, and keeps the tuples for which every condition holds.
struct FiberSection {
  int vertex = 0;
  std::vector<Elem> t;  // by local fiber index
};

inline std::vector<FiberSection> invariant_sections(const EquivBundle& p1, const EquivBundle& p2,
                                                    int base_vertex) {
  if (!p1.same_context(p2))
    fail(ErrKind::MismatchedContext, "bundles live on different covers or actions");
  const GammaCover& cov = p1.cover;
  const FiniteGroup& gam = cov.gamma;
  const FiniteGroup& g = p1.action.g;
  if (base_vertex < 0 || base_vertex >= cov.base.num_vertices)
    fail(ErrKind::ValidationError, "base vertex out of range");
  const int m = cov.vfiber_size[base_vertex];
  const int bp = cov.basepoint_lift(base_vertex);

  std::vector<std::vector<Elem>> found;
  for (Elem t0 = 0; t0 < g.n; ++t0) {
    std::vector<Elem> t(m);
    t[0] = t0;
    for (int j = 1; j < m; ++j) {
      Elem ga = least_deck_to(cov, base_vertex, j);
      t[j] = g.mul(p2.c(ga, bp), g.mul(p1.action.apply(ga, t0), g.inv(p1.c(ga, bp))));
    }
    bool ok = true;
    for (Elem ga = 0; ga < gam.n && ok; ++ga)
      for (int j = 0; j < m && ok; ++j) {
        int l = bp + j;
        int jl = cov.vact[ga][l] - bp;
        ok = g.mul(t[jl], p1.c(ga, l)) == g.mul(p2.c(ga, l), p1.action.apply(ga, t[j]));
      }
    if (ok) found.push_back(std::move(t));
  }
  std::sort(found.begin(), found.end());
  std::vector<FiberSection> out;
  for (auto& t : found) out.push_back(FiberSection{base_vertex, std::move(t)});
  return out;
}

// Extension of an anchor automorphism over one fiber: b at the basepoint lift
// spreads to c_{gamma,bp} * gamma_G(b) * c_{gamma,bp}^-1 at gamma.bp, and
// twisted-centralizer membership makes the value independent of gamma.
inline Elem spread_coeff(const EquivBundle& p, int base_vertex, Elem b, int local_j) {
  const FiniteGroup& g = p.action.g;
  int bp = p.cover.basepoint_lift(base_vertex);
  Elem ga = least_deck_to(p.cover, base_vertex, local_j);
  return g.mul(p.c(ga, bp), g.mul(p.action.apply(ga, b), g.inv(p.c(ga, bp))));
}

struct DescentGroupScheme {
  EquivBundle anchor;
  std::vector<Subgroup> vertex_groups;        // H_x per base vertex
  std::vector<std::vector<Elem>> r_src;       // per base pair: image in G of each H_{s} member
  std::vector<std::vector<Elem>> r_tgt;       // per base pair: image in G of each H_{t} member

  // Trivialized source/target restriction of a gauge value b in H_x along
  // base pair k.
  Elem restrict_src(int k, Elem b) const {
    int x = anchor.cover.base.src(2 * k);
    return r_src[k][static_cast<size_t>(vertex_groups[x].index_of(b))];
  }
  Elem restrict_tgt(int k, Elem b) const {
    int y = anchor.cover.base.dst(2 * k);
    return r_tgt[k][static_cast<size_t>(vertex_groups[y].index_of(b))];
  }
};

inline DescentGroupScheme descent_group(const EquivBundle& anchor) {
  const GammaCover& cov = anchor.cover;
  const FiniteGroup& g = anchor.action.g;
  DescentGroupScheme scheme{anchor, {}, {}, {}};
  for (int x = 0; x < cov.base.num_vertices; ++x)
    scheme.vertex_groups.push_back(twisted_centralizer(restrict_to_fiber(anchor, x)));
  for (int k = 0; k < cov.base.num_pairs(); ++k) {
    int x = cov.base.src(2 * k), y = cov.base.dst(2 * k);
    int e0 = cov.ce_id(k, cov.gamma.identity, 0);
    Elem g0 = anchor.g(e0);
    int sj = cov.inc_src[k] - cov.basepoint_lift(x);
    int tj = cov.inc_dst[k] - cov.basepoint_lift(y);
    std::vector<Elem> rs, rt;
    for (Elem b : scheme.vertex_groups[x].members) rs.push_back(spread_coeff(anchor, x, b, sj));
    for (Elem b : scheme.vertex_groups[y].members)
      rt.push_back(g.mul(g.inv(g0), g.mul(spread_coeff(anchor, y, b, tj), g0)));
    scheme.r_src.push_back(std::move(rs));
    scheme.r_tgt.push_back(std::move(rt));
  }
  return scheme;
}

// Torsor data: one G-value per base edge pair, read along the pair's stored
// orientation in the basepoint-lift trivialization.  The reverse value is the
// inverse by convention, so it is not stored.
struct HTorsor {
  std::vector<Elem> u;  // per base pair
};

inline HTorsor make_htorsor(const DescentGroupScheme& scheme, std::vector<Elem> u) {
  const FiniteGroup& g = scheme.anchor.action.g;
  if (static_cast<int>(u.size()) != scheme.anchor.cover.base.num_pairs())
    fail(ErrKind::InvalidTorsor, "torsor vector has wrong length");
  for (Elem v : u)
    if (v < 0 || v >= g.n) fail(ErrKind::InvalidTorsor, "torsor value out of range");
  return HTorsor{std::move(u)};
}

inline HTorsor trivial_htorsor(const DescentGroupScheme& scheme) {
  return HTorsor{std::vector<Elem>(scheme.anchor.cover.base.num_pairs(),
                                   scheme.anchor.action.g.identity)};
}

// Bundle -> torsor.  Requires matching local types; picks the least invariant
// section over every base vertex and reads off the transition mismatch along
// each basepoint edge lift.
inline HTorsor forward(const DescentGroupScheme& scheme, const EquivBundle& p2) {
  const EquivBundle& p1 = scheme.anchor;
  if (!p1.same_context(p2))
    fail(ErrKind::MismatchedContext, "bundle does not live on the anchor's cover and action");
  const GammaCover& cov = p1.cover;
  const FiniteGroup& g = p1.action.g;

  auto cmp = same_local_type(p1, p2);
  if (!cmp.same)
    for (const auto& [vertex, witness] : cmp.witnesses)
      if (!witness)
        fail(ErrKind::LocalTypeMismatch,
             "local types differ at base vertex " + std::to_string(vertex));

  std::vector<std::vector<Elem>> phi;  // least section per base vertex
  for (int x = 0; x < cov.base.num_vertices; ++x) {
    auto sections = invariant_sections(p1, p2, x);
    if (sections.empty())
      fail(ErrKind::VerificationFailed,
           "no invariant section at base vertex " + std::to_string(x) +
               " despite matching local types");
    phi.push_back(std::move(sections.front().t));
  }

  std::vector<Elem> u(cov.base.num_pairs());
  for (int k = 0; k < cov.base.num_pairs(); ++k) {
    int x = cov.base.src(2 * k), y = cov.base.dst(2 * k);
    int e0 = cov.ce_id(k, cov.gamma.identity, 0);
    int sj = cov.inc_src[k] - cov.basepoint_lift(x);
    int tj = cov.inc_dst[k] - cov.basepoint_lift(y);
    u[k] = g.mul(g.inv(p1.g(e0)),
                 g.mul(g.inv(phi[y][tj]), g.mul(p2.g(e0), phi[x][sj])));
  }
  return HTorsor{std::move(u)};
}

// Torsor -> bundle.  Keeps the anchor's lift coefficients and perturbs its
// transitions by the torsor value, conjugated into each deck translate.
inline EquivBundle backward(const DescentGroupScheme& scheme, const HTorsor& f) {
  const EquivBundle& p1 = scheme.anchor;
  const GammaCover& cov = p1.cover;
  const FiniteGroup& g = p1.action.g;
  if (static_cast<int>(f.u.size()) != cov.base.num_pairs())
    fail(ErrKind::InvalidTorsor, "torsor vector has wrong length");

  std::vector<Elem> trans(cov.num_cover_oriented());
  for (int k = 0; k < cov.base.num_pairs(); ++k) {
    int s0 = cov.inc_src[k];
    for (Elem ga = 0; ga < cov.gamma.n; ++ga) {
      Elem twist = g.mul(p1.c(ga, s0), g.mul(p1.action.apply(ga, f.u[k]), g.inv(p1.c(ga, s0))));
      int ce = cov.ce_id(k, ga, 0);
      trans[ce] = g.mul(p1.g(ce), twist);
      trans[cov.ce_rev(ce)] = g.inv(trans[ce]);
    }
  }
  EquivBundle q = make_bundle(cov, p1.action, std::move(trans), p1.lift);
  if (!same_local_type(p1, q).same)
    fail(ErrKind::VerificationFailed, "reconstructed bundle left the anchor's sector");
  return q;
}

struct HGauge {
  std::vector<Elem> b;  // per base vertex, a member of that vertex group
};

namespace detail {

inline std::optional<Elem> preimage(const std::vector<Elem>& images,
                                    const std::vector<Elem>& members, Elem value) {
  for (size_t i = 0; i < images.size(); ++i)
    if (images[i] == value) return members[i];
  return std::nullopt;
}

// Candidate torsor gauge with value b0 at base vertex 0, spread over a
// connected base by solving u2_k = r_tgt(b_t)^-1 * u1_k * r_src(b_s) along
// edges, then checked everywhere.  The restriction maps are injective, so b0
// determines everything.
inline std::optional<std::vector<Elem>> propagate_hgauge(const DescentGroupScheme& scheme,
                                                         const HTorsor& f1, const HTorsor& f2,
                                                         Elem b0) {
  const BaseGraph& base = scheme.anchor.cover.base;
  const FiniteGroup& g = scheme.anchor.action.g;
  std::vector<Elem> b(base.num_vertices, -1);
  b[0] = b0;
  std::vector<int> queue{0};
  for (size_t q = 0; q < queue.size(); ++q) {
    int v = queue[q];
    for (int k = 0; k < base.num_pairs(); ++k) {
      int x = base.src(2 * k), y = base.dst(2 * k);
      if (x == v && b[y] < 0) {
        Elem want = g.mul(g.mul(f1.u[k], scheme.restrict_src(k, b[x])), g.inv(f2.u[k]));
        auto pre = preimage(scheme.r_tgt[k], scheme.vertex_groups[y].members, want);
        if (!pre) return std::nullopt;
        b[y] = *pre;
        queue.push_back(y);
      }
      if (y == v && b[x] < 0) {
        Elem want = g.mul(g.inv(f1.u[k]), g.mul(scheme.restrict_tgt(k, b[y]), f2.u[k]));
        auto pre = preimage(scheme.r_src[k], scheme.vertex_groups[x].members, want);
        if (!pre) return std::nullopt;
        b[x] = *pre;
        queue.push_back(x);
      }
    }
  }
  for (Elem v : b)
    if (v < 0) fail(ErrKind::ValidationError, "base graph is not connected");
  for (int k = 0; k < base.num_pairs(); ++k) {
    int x = base.src(2 * k), y = base.dst(2 * k);
    if (f2.u[k] !=
        g.mul(g.inv(scheme.restrict_tgt(k, b[y])), g.mul(f1.u[k], scheme.restrict_src(k, b[x]))))
      return std::nullopt;
  }
  return b;
}

}  // namespace detail

inline HTorsor htorsor_gauge_transform(const DescentGroupScheme& scheme, const HTorsor& f,
                                       const HGauge& gauge) {
  const BaseGraph& base = scheme.anchor.cover.base;
  const FiniteGroup& g = scheme.anchor.action.g;
  if (static_cast<int>(gauge.b.size()) != base.num_vertices)
    fail(ErrKind::ValidationError, "torsor gauge has wrong length");
  for (int x = 0; x < base.num_vertices; ++x)
    if (!scheme.vertex_groups[x].contains(gauge.b[x]))
      fail(ErrKind::ValidationError, "torsor gauge value outside its vertex group");
  std::vector<Elem> u(f.u.size());
  for (int k = 0; k < base.num_pairs(); ++k) {
    int x = base.src(2 * k), y = base.dst(2 * k);
    u[k] = g.mul(g.inv(scheme.restrict_tgt(k, gauge.b[y])),
                 g.mul(f.u[k], scheme.restrict_src(k, gauge.b[x])));
  }
  return HTorsor{std::move(u)};
}

inline std::optional<HGauge> htorsor_isomorphic(const DescentGroupScheme& scheme,
                                                const HTorsor& f1, const HTorsor& f2) {
  if (f1.u.size() != f2.u.size() ||
      static_cast<int>(f1.u.size()) != scheme.anchor.cover.base.num_pairs())
    fail(ErrKind::InvalidTorsor, "torsor vectors do not match the base graph");
  for (Elem b0 : scheme.vertex_groups[0].members)
    if (auto b = detail::propagate_hgauge(scheme, f1, f2, b0)) return HGauge{std::move(*b)};
  return std::nullopt;
}

inline long long htorsor_automorphism_order(const DescentGroupScheme& scheme, const HTorsor& f) {
  long long count = 0;
  for (Elem b0 : scheme.vertex_groups[0].members)
    if (detail::propagate_hgauge(scheme, f, f, b0)) ++count;
  return count;
}

struct TorsorClass {
  HTorsor rep;  // least value vector in its orbit
  long long aut_order = 0;
};

struct TorsorEnumeration {
  std::vector<TorsorClass> classes;
  long long total_count = 0;        // |G|^{base pairs}
  long long gauge_group_order = 0;  // product of the |H_x|
};

inline TorsorEnumeration enumerate_htorsors(const DescentGroupScheme& scheme, long long budget) {
  const BaseGraph& base = scheme.anchor.cover.base;
  const FiniteGroup& g = scheme.anchor.action.g;
  const int np = base.num_pairs();
  long long total = detail::checked_power(g.n, np, budget, "|G|^(base edge pairs)");

  std::vector<std::vector<Elem>> all;
  std::vector<Elem> u(np, 0);
  for (long long i = 0; i < total; ++i) {
    all.push_back(u);
    int k = np - 1;
    while (k >= 0 && ++u[k] == g.n) u[k--] = 0;
  }

  long long gauge_order = 1;
  for (const Subgroup& h : scheme.vertex_groups) gauge_order *= h.order();

  std::map<std::vector<Elem>, int> index;
  for (int i = 0; i < static_cast<int>(all.size()); ++i) index[all[i]] = i;

  TorsorEnumeration result;
  result.total_count = total;
  result.gauge_group_order = gauge_order;

  std::vector<bool> visited(all.size(), false);
  for (size_t i = 0; i < all.size(); ++i) {
    if (visited[i]) continue;
    std::vector<int> orbit{static_cast<int>(i)};
    visited[i] = true;
    for (size_t q = 0; q < orbit.size(); ++q) {
      const auto& cur = all[static_cast<size_t>(orbit[q])];
      for (int x = 0; x < base.num_vertices; ++x)
        for (Elem bv : scheme.vertex_groups[x].members) {
          std::vector<Elem> moved(cur.size());
          for (int k = 0; k < np; ++k) {
            Elem left = base.dst(2 * k) == x ? g.inv(scheme.restrict_tgt(k, bv)) : g.identity;
            Elem right = base.src(2 * k) == x ? scheme.restrict_src(k, bv) : g.identity;
            moved[k] = g.mul(left, g.mul(cur[k], right));
          }
          int j = index.at(moved);
          if (!visited[static_cast<size_t>(j)]) {
            visited[static_cast<size_t>(j)] = true;
            orbit.push_back(j);
          }
        }
    }
    long long orbit_size = static_cast<long long>(orbit.size());
    if (gauge_order % orbit_size != 0)
      fail(ErrKind::ValidationError, "torsor orbit size does not divide the gauge group order");
    result.classes.push_back(TorsorClass{HTorsor{all[i]}, gauge_order / orbit_size});
  }
  return result;
}

// Exact rational arithmetic for groupoid cardinalities.
struct Rat {
  long long num = 0;
  long long den = 1;

  bool operator==(const Rat&) const = default;
};

inline Rat make_rat(long long num, long long den) {
  if (den == 0) fail(ErrKind::ValidationError, "zero denominator");
  if (den < 0) {
    num = -num;
    den = -den;
  }
  long long d = std::gcd(num < 0 ? -num : num, den);
  if (d == 0) d = 1;
  return Rat{num / d, den / d};
}

inline Rat rat_add(Rat a, Rat b) {
  __int128 num = static_cast<__int128>(a.num) * b.den + static_cast<__int128>(b.num) * a.den;
  __int128 den = static_cast<__int128>(a.den) * b.den;
  __int128 x = num < 0 ? -num : num, y = den;
  while (y) {
    __int128 t = x % y;
    x = y;
    y = t;
  }
  if (x == 0) x = 1;
  num /= x;
  den /= x;
  if (num > INT64_MAX || num < INT64_MIN || den > INT64_MAX)
    fail(ErrKind::ValidationError, "rational overflow");
  return Rat{static_cast<long long>(num), static_cast<long long>(den)};
}

inline std::string rat_to_string(const Rat& r) {
  return std::to_string(r.num) + "/" + std::to_string(r.den);
}

struct EquivalenceReport {
  bool pass = false;
  long long bundle_total = 0;        // valid bundle data tuples, all sectors
  long long bundle_class_count = 0;  // gauge classes in the anchor's sector
  long long torsor_class_count = 0;
  std::vector<long long> bundle_aut_orders;  // per sector class
  std::vector<long long> torsor_aut_orders;  // per torsor class
  std::vector<std::pair<int, int>> matching; // sector class index -> torsor class index
  Rat bundle_mass;                           // sum of 1/|Aut| over sector classes
  Rat torsor_mass;
  bool defined_iff_same_type = false;
  bool bijection = false;
  bool aut_match = false;
  bool roundtrip_bundle = false;
  bool roundtrip_torsor = false;
  bool mass_match = false;
  std::string first_failure;  // empty when pass
};

// Full check of the encoding equivalence over one instance:
//   (a) forward is defined exactly on the anchor's sector,
//   (b) it induces a bijection on isomorphism classes,
//   (c) matched classes have equal automorphism counts,
//   (d) both round trips return to the starting class,
//   (e) groupoid cardinalities agree as exact rationals.
inline EquivalenceReport verify_equivalence(const EquivBundle& anchor, long long budget) {
  EquivalenceReport rep;
  auto note = [&rep](const std::string& msg) {
    if (rep.first_failure.empty()) rep.first_failure = msg;
  };

  BundleEnumeration bundles =
      enumerate_bundles(anchor.cover, anchor.action, std::nullopt, budget);
  rep.bundle_total = bundles.total_count;

  DescentGroupScheme scheme = descent_group(anchor);

  rep.defined_iff_same_type = true;
  std::vector<const BundleClass*> sector;
  for (const BundleClass& cls : bundles.classes) {
    bool same = same_local_type(anchor, cls.rep).same;
    bool defined = true;
    try {
      (void)forward(scheme, cls.rep);
    } catch (const Error& e) {
      if (e.kind() != ErrKind::LocalTypeMismatch) throw;
      defined = false;
    }
    if (defined != same) {
      rep.defined_iff_same_type = false;
      note("forward defined/" + std::string(defined ? "yes" : "no") + " but local type match/" +
           (same ? "yes" : "no") + " for a bundle class");
    }
    if (same) sector.push_back(&cls);
  }
  rep.bundle_class_count = static_cast<long long>(sector.size());

  TorsorEnumeration torsors = enumerate_htorsors(scheme, budget);
  rep.torsor_class_count = static_cast<long long>(torsors.classes.size());

  // Explicit matching through isomorphism witnesses.
  std::vector<int> hits(torsors.classes.size(), 0);
  rep.bijection = true;
  rep.aut_match = true;
  rep.roundtrip_bundle = true;
  for (size_t i = 0; i < sector.size(); ++i) {
    HTorsor f = forward(scheme, sector[i]->rep);
    int match = -1;
    for (size_t j = 0; j < torsors.classes.size(); ++j)
      if (htorsor_isomorphic(scheme, f, torsors.classes[j].rep)) {
        match = static_cast<int>(j);
        break;
      }
    if (match < 0) {
      rep.bijection = false;
      note("forward image of sector class " + std::to_string(i) + " matches no torsor class");
      continue;
    }
    ++hits[static_cast<size_t>(match)];
    rep.matching.emplace_back(static_cast<int>(i), match);

    long long ab = automorphism_order(sector[i]->rep);
    long long at = torsors.classes[static_cast<size_t>(match)].aut_order;
    if (ab != sector[i]->aut_order || at != htorsor_automorphism_order(scheme, f) || ab != at) {
      rep.aut_match = false;
      note("automorphism counts disagree on sector class " + std::to_string(i));
    }
    rep.bundle_aut_orders.push_back(ab);

    EquivBundle back = backward(scheme, f);
    if (!is_isomorphic(sector[i]->rep, back)) {
      rep.roundtrip_bundle = false;
      note("backward(forward(.)) left the class of sector class " + std::to_string(i));
    }
  }
  for (size_t j = 0; j < torsors.classes.size(); ++j) {
    rep.torsor_aut_orders.push_back(torsors.classes[j].aut_order);
    if (hits[j] != 1) {
      rep.bijection = false;
      note("torsor class " + std::to_string(j) + " matched " + std::to_string(hits[j]) +
           " sector classes");
    }
  }

  rep.roundtrip_torsor = true;
  for (size_t j = 0; j < torsors.classes.size(); ++j) {
    EquivBundle q = backward(scheme, torsors.classes[j].rep);
    HTorsor again = forward(scheme, q);
    if (!htorsor_isomorphic(scheme, torsors.classes[j].rep, again)) {
      rep.roundtrip_torsor = false;
      note("forward(backward(.)) left the class of torsor class " + std::to_string(j));
    }
  }

  rep.bundle_mass = Rat{0, 1};
  for (const BundleClass* cls : sector) rep.bundle_mass = rat_add(rep.bundle_mass, make_rat(1, cls->aut_order));
  rep.torsor_mass = Rat{0, 1};
  for (const TorsorClass& cls : torsors.classes)
    rep.torsor_mass = rat_add(rep.torsor_mass, make_rat(1, cls.aut_order));
  rep.mass_match = rep.bundle_mass == rep.torsor_mass;
  if (!rep.mass_match)
    note("groupoid cardinalities differ: " + rat_to_string(rep.bundle_mass) + " vs " +
         rat_to_string(rep.torsor_mass));

  rep.pass = rep.defined_iff_same_type && rep.bijection && rep.aut_match &&
             rep.roundtrip_bundle && rep.roundtrip_torsor && rep.mass_match;
  return rep;
}

}  // namespace gbundles
