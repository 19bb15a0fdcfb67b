#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <functional>
#include <map>
#include <set>
#include <vector>

#include "gbundles/descent.hpp"
#include "test_support.hpp"

using namespace gbundles;

namespace {

void expect_error(ErrKind kind, const std::function<void()>& fn) {
  try {
    fn();
    FAIL("expected an error of kind " << err_name(kind));
  } catch (const Error& e) {
    CHECK(e.kind() == kind);
  }
}

struct Fixture {
  std::string name;
  GammaCover cover;
  AutAction action;
};

Fixture z3_inversion_interval() {
  auto c2 = make_cyclic_group(2);
  auto c3 = make_cyclic_group(3);
  auto cov = make_cover_basepoints(make_base_graph(2, {{0, 1}}), c2,
                                   {fixed_point_fiber(c2), fixed_point_fiber(c2)}, {{0, 0}});
  return {"z3 inversion interval", cov, make_aut_action(c2, c3, {{0, 1, 2}, {0, 2, 1}})};
}

Fixture s3_conj_interval() {
  auto c2 = make_cyclic_group(2);
  auto s3 = make_symmetric_group(3);
  auto cov = make_cover_basepoints(make_base_graph(2, {{0, 1}}), c2,
                                   {fixed_point_fiber(c2), fixed_point_fiber(c2)}, {{0, 0}});
  return {"s3 conj interval", cov,
          inner_action(c2, s3, make_hom(c2, s3, {s3.id(), element_by_label(s3, "(12)")}))};
}

Fixture s4_interval() {
  auto c2 = make_cyclic_group(2);
  auto s4 = make_symmetric_group(4);
  auto cov = make_cover_basepoints(make_base_graph(2, {{0, 1}}), c2,
                                   {fixed_point_fiber(c2), fixed_point_fiber(c2)}, {{0, 0}});
  return {"s4 interval", cov,
          inner_action(c2, s4, make_hom(c2, s4, {s4.id(), element_by_label(s4, "(12)(34)")}))};
}

Fixture loop_free_z2() {
  auto c2 = make_cyclic_group(2);
  auto c3 = make_cyclic_group(3);
  auto cov = make_cover_basepoints(make_base_graph(1, {{0, 0}}), c2, {free_fiber(c2)}, {{0, 1}});
  return {"free double cover of the loop", cov,
          make_aut_action(c2, c3, {{0, 1, 2}, {0, 2, 1}})};
}

Fixture loop_trivial_gamma() {
  auto c1 = make_cyclic_group(1);
  auto c2 = make_cyclic_group(2);
  auto cov = make_cover_basepoints(make_base_graph(1, {{0, 0}}), c1, {free_fiber(c1)}, {{0, 0}});
  return {"loop, trivial deck group", cov, trivial_action(c1, c2)};
}

std::vector<EquivBundle> class_reps(const Fixture& f) {
  std::vector<EquivBundle> reps;
  for (auto& cl : enumerate_bundles(f.cover, f.action, std::nullopt, 10'000'000).classes)
    reps.push_back(cl.rep);
  return reps;
}

// All per-vertex gauge combinations drawn from the scheme's vertex groups.
std::vector<std::vector<Elem>> all_hgauges(const DescentGroupScheme& scheme) {
  std::vector<std::vector<Elem>> combos{{}};
  for (const auto& h : scheme.vertex_groups) {
    std::vector<std::vector<Elem>> next;
    for (const auto& c : combos)
      for (Elem b : h.members) {
        auto ext = c;
        ext.push_back(b);
        next.push_back(std::move(ext));
      }
    combos = std::move(next);
  }
  return combos;
}

}  // namespace

TEST_CASE("invariant sections match the brute-force transport search") {
  for (auto f : {z3_inversion_interval(), s3_conj_interval(), loop_free_z2(),
                 loop_trivial_gamma()}) {
    INFO(f.name);
    auto reps = class_reps(f);
    for (const auto& p1 : reps)
      for (const auto& p2 : reps)
        for (int x = 0; x < f.cover.base.num_vertices; ++x) {
          auto fast = invariant_sections(p1, p2, x);
          std::set<std::vector<Elem>> got;
          for (const auto& s : fast) {
            CHECK(s.vertex == x);
            got.insert(s.t);
          }
          auto naive = testsupport::naive_invariant_sections(p1, p2, x);
          CHECK(got == std::set<std::vector<Elem>>(naive.begin(), naive.end()));
          REQUIRE(got.size() == fast.size());
          // Returned in ascending order; the front is the least tuple.
          if (!fast.empty()) CHECK(fast.front().t == *got.begin());
        }
  }
}

TEST_CASE("self-sections are the spreads of the vertex descent group") {
  for (auto f : {z3_inversion_interval(), s3_conj_interval(), s4_interval(), loop_free_z2()}) {
    INFO(f.name);
    for (const auto& p : class_reps(f)) {
      auto scheme = descent_group(p);
      for (int x = 0; x < f.cover.base.num_vertices; ++x) {
        std::set<std::vector<Elem>> expected;
        for (Elem b : scheme.vertex_groups[x].members) {
          std::vector<Elem> t(static_cast<size_t>(f.cover.vfiber_size[x]));
          for (int j = 0; j < f.cover.vfiber_size[x]; ++j)
            t[static_cast<size_t>(j)] = spread_coeff(p, x, b, j);
          expected.insert(std::move(t));
        }
        std::set<std::vector<Elem>> got;
        for (const auto& s : invariant_sections(p, p, x)) got.insert(s.t);
        CHECK(got == expected);
        CHECK(got.size() == static_cast<size_t>(scheme.vertex_groups[x].order()));
      }
    }
  }
}

TEST_CASE("descent group restrictions are injective homomorphisms") {
  for (auto f : {z3_inversion_interval(), s3_conj_interval(), s4_interval(), loop_free_z2()}) {
    INFO(f.name);
    const FiniteGroup& g = f.action.g;
    for (const auto& p : class_reps(f)) {
      auto scheme = descent_group(p);

      // At an unramified vertex the descent group is all of G.
      for (int x = 0; x < f.cover.base.num_vertices; ++x) {
        if (f.cover.stab[x].size() == 1)
          CHECK(scheme.vertex_groups[x].order() == g.n);
        CHECK(scheme.vertex_groups[x] ==
              twisted_centralizer(restrict_to_fiber(p, x)));
      }

      for (int k = 0; k < f.cover.base.num_pairs(); ++k) {
        int x = f.cover.base.src(2 * k), y = f.cover.base.dst(2 * k);
        const auto& hs = scheme.vertex_groups[x];
        const auto& ht = scheme.vertex_groups[y];

        std::set<Elem> src_images, tgt_images;
        for (Elem b : hs.members) src_images.insert(scheme.restrict_src(k, b));
        for (Elem b : ht.members) tgt_images.insert(scheme.restrict_tgt(k, b));
        CHECK(src_images.size() == static_cast<size_t>(hs.order()));
        CHECK(tgt_images.size() == static_cast<size_t>(ht.order()));

        for (Elem b1 : hs.members)
          for (Elem b2 : hs.members)
            CHECK(scheme.restrict_src(k, g.mul(b1, b2)) ==
                  g.mul(scheme.restrict_src(k, b1), scheme.restrict_src(k, b2)));
        for (Elem b1 : ht.members)
          for (Elem b2 : ht.members)
            CHECK(scheme.restrict_tgt(k, g.mul(b1, b2)) ==
                  g.mul(scheme.restrict_tgt(k, b1), scheme.restrict_tgt(k, b2)));

        // Target restriction is the fiber spread pulled through the anchor's
        // basepoint transition.
        Elem g0 = p.g(f.cover.ce_id(k, f.cover.gamma.identity, 0));
        int tj = f.cover.inc_dst[k] - f.cover.basepoint_lift(y);
        for (Elem b : ht.members)
          CHECK(g.mul(g0, scheme.restrict_tgt(k, b)) ==
                g.mul(spread_coeff(p, y, b, tj), g0));
        int sj = f.cover.inc_src[k] - f.cover.basepoint_lift(x);
        for (Elem b : hs.members)
          CHECK(scheme.restrict_src(k, b) == spread_coeff(p, x, b, sj));
      }
    }
  }
}

TEST_CASE("forward sends the anchor to the trivial torsor") {
  for (auto f : {z3_inversion_interval(), s3_conj_interval(), s4_interval(), loop_free_z2()}) {
    INFO(f.name);
    for (const auto& p : class_reps(f)) {
      auto scheme = descent_group(p);
      CHECK(forward(scheme, p).u == trivial_htorsor(scheme).u);
    }
  }
}

TEST_CASE("forward rejects bundles from a different sector") {
  auto f = s4_interval();
  auto reps = class_reps(f);
  auto trivial = trivial_bundle(f.cover, f.action);
  auto scheme = descent_group(trivial);
  bool found_other = false;
  for (const auto& p : reps) {
    if (same_local_type(trivial, p).same) continue;
    found_other = true;
    expect_error(ErrKind::LocalTypeMismatch, [&] { forward(scheme, p); });
  }
  CHECK(found_other);
}

TEST_CASE("backward of the trivial torsor is the anchor itself") {
  for (auto f : {z3_inversion_interval(), s3_conj_interval(), loop_free_z2()}) {
    INFO(f.name);
    for (const auto& p : class_reps(f)) {
      auto scheme = descent_group(p);
      CHECK(backward(scheme, trivial_htorsor(scheme)).data_vector() == p.data_vector());
    }
  }
}

TEST_CASE("round trips return to the start up to isomorphism") {
  for (auto f : {z3_inversion_interval(), s3_conj_interval(), s4_interval(), loop_free_z2()}) {
    INFO(f.name);
    const FiniteGroup& g = f.action.g;
    auto reps = class_reps(f);
    for (const auto& anchor : reps) {
      auto scheme = descent_group(anchor);

      // Bundle side: every same-sector representative survives the loop.
      for (const auto& p2 : reps) {
        if (!same_local_type(anchor, p2).same) continue;
        auto q = backward(scheme, forward(scheme, p2));
        CHECK(is_isomorphic(q, p2).has_value());
      }

      // Torsor side: every raw torsor vector survives the other loop.
      const int np = f.cover.base.num_pairs();
      std::vector<Elem> u(static_cast<size_t>(np), 0);
      while (true) {
        auto fdata = make_htorsor(scheme, u);
        auto back = forward(scheme, backward(scheme, fdata));
        CHECK(htorsor_isomorphic(scheme, back, fdata).has_value());
        int k = np - 1;
        while (k >= 0 && ++u[static_cast<size_t>(k)] == g.n) u[static_cast<size_t>(k--)] = 0;
        if (k < 0) break;
      }
    }
  }
}

TEST_CASE("forward is gauge invariant up to torsor isomorphism") {
  for (auto f : {z3_inversion_interval(), s3_conj_interval(), loop_free_z2()}) {
    INFO(f.name);
    const FiniteGroup& g = f.action.g;
    long long order = 1;
    for (int v = 0; v < f.cover.num_vertices; ++v) order *= g.n;
    for (const auto& anchor : class_reps(f)) {
      auto scheme = descent_group(anchor);
      auto base_image = forward(scheme, anchor);
      for (long long i = 0; i < order; ++i) {
        auto q = gauge_transform(anchor, gauge_by_index(f.cover, g, i));
        CHECK(htorsor_isomorphic(scheme, forward(scheme, q), base_image).has_value());
      }
    }
  }
}

TEST_CASE("torsor gauge moves form the advertised action") {
  for (auto f : {s3_conj_interval(), s4_interval(), loop_free_z2()}) {
    INFO(f.name);
    const FiniteGroup& g = f.action.g;
    auto anchor = trivial_bundle(f.cover, f.action);
    auto scheme = descent_group(anchor);
    auto gauges = all_hgauges(scheme);

    std::vector<Elem> u(static_cast<size_t>(f.cover.base.num_pairs()), 0);
    while (true) {
      auto fdata = make_htorsor(scheme, u);
      for (const auto& b1 : gauges)
        for (const auto& b2 : gauges) {
          std::vector<Elem> prod(b1.size());
          for (size_t v = 0; v < b1.size(); ++v) prod[v] = g.mul(b1[v], b2[v]);
          CHECK(htorsor_gauge_transform(scheme, htorsor_gauge_transform(scheme, fdata,
                                                                        HGauge{b1}),
                                        HGauge{b2})
                    .u == htorsor_gauge_transform(scheme, fdata, HGauge{prod}).u);
        }
      int k = f.cover.base.num_pairs() - 1;
      while (k >= 0 && ++u[static_cast<size_t>(k)] == g.n) u[static_cast<size_t>(k--)] = 0;
      if (k < 0) break;
    }
  }
}

TEST_CASE("torsor isomorphism agrees with the exhaustive gauge sweep") {
  for (auto f : {z3_inversion_interval(), s3_conj_interval(), s4_interval(), loop_free_z2()}) {
    INFO(f.name);
    const FiniteGroup& g = f.action.g;
    auto anchor = trivial_bundle(f.cover, f.action);
    auto scheme = descent_group(anchor);
    auto gauges = all_hgauges(scheme);
    const int np = f.cover.base.num_pairs();

    std::vector<std::vector<Elem>> torsors;
    std::vector<Elem> u(static_cast<size_t>(np), 0);
    while (true) {
      torsors.push_back(u);
      int k = np - 1;
      while (k >= 0 && ++u[static_cast<size_t>(k)] == g.n) u[static_cast<size_t>(k--)] = 0;
      if (k < 0) break;
    }

    for (const auto& u1 : torsors) {
      std::set<std::vector<Elem>> reachable;
      for (const auto& b : gauges)
        reachable.insert(htorsor_gauge_transform(scheme, HTorsor{u1}, HGauge{b}).u);
      long long self_hits = 0;
      for (const auto& b : gauges)
        if (htorsor_gauge_transform(scheme, HTorsor{u1}, HGauge{b}).u == u1) ++self_hits;
      CHECK(htorsor_automorphism_order(scheme, HTorsor{u1}) == self_hits);

      for (const auto& u2 : torsors) {
        auto w = htorsor_isomorphic(scheme, HTorsor{u1}, HTorsor{u2});
        CHECK(w.has_value() == (reachable.count(u2) == 1));
        if (w) CHECK(htorsor_gauge_transform(scheme, HTorsor{u1}, *w).u == u2);
      }
    }
  }
}

TEST_CASE("torsor enumeration matches known class data") {
  auto check = [](const Fixture& f, long long classes, std::vector<long long> auts) {
    INFO(f.name);
    auto anchor = trivial_bundle(f.cover, f.action);
    auto scheme = descent_group(anchor);
    auto enumd = enumerate_htorsors(scheme, 10'000'000);
    CHECK(static_cast<long long>(enumd.classes.size()) == classes);
    std::vector<long long> got;
    for (const auto& cl : enumd.classes) {
      got.push_back(cl.aut_order);
      CHECK(htorsor_automorphism_order(scheme, cl.rep) == cl.aut_order);
    }
    std::sort(got.begin(), got.end());
    std::sort(auts.begin(), auts.end());
    CHECK(got == auts);
  };

  check(z3_inversion_interval(), 3, {1, 1, 1});
  check(s3_conj_interval(), 2, {1, 2});
  check(s4_interval(), 2, {4, 8});

  expect_error(ErrKind::BudgetExceeded, [&] {
    auto f = s4_interval();
    auto scheme = descent_group(trivial_bundle(f.cover, f.action));
    enumerate_htorsors(scheme, 3);
  });
}

TEST_CASE("torsor construction validates its data") {
  auto f = s3_conj_interval();
  auto scheme = descent_group(trivial_bundle(f.cover, f.action));
  expect_error(ErrKind::InvalidTorsor, [&] { make_htorsor(scheme, {0, 0}); });
  expect_error(ErrKind::InvalidTorsor, [&] { make_htorsor(scheme, {9}); });
  expect_error(ErrKind::ValidationError, [&] {
    htorsor_gauge_transform(scheme, trivial_htorsor(scheme), HGauge{{1, 0}});
  });
}

TEST_CASE("exact rational masses add without drift") {
  CHECK(make_rat(2, 4).num == 1);
  CHECK(make_rat(2, 4).den == 2);
  CHECK(rat_add(make_rat(1, 8), make_rat(1, 4)) == make_rat(3, 8));
  auto third = make_rat(1, 3);
  CHECK(rat_add(rat_add(third, third), third) == make_rat(1, 1));
  CHECK(rat_to_string(make_rat(3, 8)) == "3/8");
  CHECK(rat_add(make_rat(1, 2), make_rat(1, 2)) == make_rat(1, 1));
}

TEST_CASE("equivalence verification passes on the reference instances") {
  for (auto f : {loop_trivial_gamma(), z3_inversion_interval(), s3_conj_interval()}) {
    INFO(f.name);
    auto report = verify_equivalence(trivial_bundle(f.cover, f.action), 10'000'000);
    CHECK(report.pass);
    CHECK(report.first_failure.empty());
    CHECK(report.defined_iff_same_type);
    CHECK(report.bijection);
    CHECK(report.aut_match);
    CHECK(report.roundtrip_bundle);
    CHECK(report.roundtrip_torsor);
    CHECK(report.mass_match);
    CHECK(report.bundle_class_count == report.torsor_class_count);
    CHECK(report.bundle_mass == report.torsor_mass);
  }

  auto fa = loop_trivial_gamma();
  auto ra = verify_equivalence(trivial_bundle(fa.cover, fa.action), 10'000'000);
  CHECK(ra.bundle_total == 2);
  CHECK(ra.bundle_class_count == 2);
  CHECK(ra.bundle_mass == make_rat(1, 1));

  auto fb = z3_inversion_interval();
  auto rb = verify_equivalence(trivial_bundle(fb.cover, fb.action), 10'000'000);
  CHECK(rb.bundle_total == 27);
  CHECK(rb.bundle_class_count == 3);
  CHECK(rb.bundle_mass == make_rat(3, 1));

  auto fc = s3_conj_interval();
  auto rc = verify_equivalence(trivial_bundle(fc.cover, fc.action), 10'000'000);
  CHECK(rc.bundle_total == 96);
  CHECK(rc.bundle_class_count == 2);
  CHECK(rc.bundle_mass == make_rat(3, 2));

  auto fd = s4_interval();
  auto rd = verify_equivalence(trivial_bundle(fd.cover, fd.action), 10'000'000);
  CHECK(rd.pass);
  CHECK(rd.bundle_total == 2400);
  CHECK(rd.bundle_class_count == 2);
  CHECK(rd.torsor_class_count == 2);
  CHECK(rd.bundle_mass == make_rat(3, 8));
  std::vector<long long> auts = rd.bundle_aut_orders;
  std::sort(auts.begin(), auts.end());
  CHECK(auts == std::vector<long long>{4, 8});
}
