#pragma once

// Library entry points behind the command-line tool.  Each command takes a
// parsed instance and returns a Report; rendering (text or JSON) is
// deterministic so that identical inputs produce identical bytes.

#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "gbundles/bundle.hpp"
#include "gbundles/cohomology.hpp"
#include "gbundles/covering.hpp"
#include "gbundles/descent.hpp"
#include "gbundles/errors.hpp"
#include "gbundles/group.hpp"
#include "gbundles/serialize.hpp"
#include "gbundles/version.hpp"

namespace gbundles {

inline constexpr long long kDefaultBudget = 10'000'000;

struct Report {
  std::string command;
  std::string instance_name;
  std::string digest;
  Json payload;
  bool pass = true;
};

struct Sector {
  enum class Kind { All, Anchor, Trivial, Index };
  Kind kind = Kind::All;
  int index = 0;
};

inline Sector parse_sector(const std::string& text) {
  if (text == "all") return Sector{Sector::Kind::All, 0};
  if (text == "anchor") return Sector{Sector::Kind::Anchor, 0};
  if (text == "trivial") return Sector{Sector::Kind::Trivial, 0};
  try {
    size_t used = 0;
    int k = std::stoi(text, &used);
    if (used == text.size() && k >= 0) return Sector{Sector::Kind::Index, k};
  } catch (...) {
  }
  fail(ErrKind::ValidationError,
       "sector must be 'all', 'anchor', 'trivial', or a class index, got '" + text + "'");
}

namespace detail {

inline std::string cocycle_brief(const TwistedCocycle& c) {
  std::string out = "{";
  for (size_t i = 0; i < c.stab.members.size(); ++i) {
    if (i) out += ",";
    out += c.action.gamma.label(c.stab.members[i]) + ":" + c.action.g.label(c.values[i]);
  }
  return out + "}";
}

inline std::string profile_brief(const LocalTypeProfile& profile) {
  std::string out = "[";
  for (size_t i = 0; i < profile.classes.size(); ++i) {
    if (i) out += " ";
    out += "v" + std::to_string(profile.classes[i].first) + ":" +
           cocycle_brief(profile.classes[i].second.representative);
  }
  return out + "]";
}

inline Json profile_to_json(const LocalTypeProfile& profile) {
  Json out = Json::array();
  for (const auto& [vertex, cls] : profile.classes)
    out.push_back(Json{{"vertex", vertex},
                       {"class", cocycle_to_json(cls.representative)},
                       {"orbit_size", cls.orbit_size}});
  return out;
}

inline EquivBundle anchor_of(const Instance& inst) {
  if (!inst.cover) fail(ErrKind::ValidationError, "this command needs a cover in the instance");
  if (inst.anchor) return *inst.anchor;
  return trivial_bundle(*inst.cover, inst.action);
}

}  // namespace detail

// Classification of twisted cocycles up to twisted conjugation, either over
// an explicit stabilizer subgroup or at every branch point of the cover.
inline Report cmd_classify(const Instance& inst) {
  Report rep{"classify", inst.name, instance_digest(inst), Json::object(), true};

  std::vector<std::pair<std::optional<int>, Subgroup>> targets;
  if (inst.stabilizer) targets.emplace_back(std::nullopt, *inst.stabilizer);
  if (inst.cover)
    for (const auto& bp : branch_locus(*inst.cover)) targets.emplace_back(bp.vertex, bp.stabilizer);
  if (targets.empty())
    fail(ErrKind::ValidationError, "classify needs a 'stabilizer' or a 'cover' with branch points");

  Json out = Json::array();
  for (const auto& [vertex, stab] : targets) {
    auto cocycles = enumerate_cocycles(stab, inst.action);
    auto classes = h1_classes(stab, inst.action);
    Json jc = Json::array();
    long long orbit_total = 0;
    for (const auto& cls : classes) {
      Subgroup z = twisted_centralizer(cls.representative);
      if (static_cast<long long>(cls.orbit_size) * z.order() != inst.group.n)
        fail(ErrKind::VerificationFailed, "orbit size times centralizer order misses |G|");
      orbit_total += cls.orbit_size;
      jc.push_back(Json{{"representative", cocycle_to_json(cls.representative)},
                        {"orbit_size", cls.orbit_size},
                        {"centralizer_order", z.order()}});
    }
    if (orbit_total != static_cast<long long>(cocycles.size()))
      fail(ErrKind::VerificationFailed, "orbit sizes do not add up to the cocycle count");
    Json target;
    if (vertex) target["vertex"] = *vertex;
    Json jstab = Json::array();
    for (Elem m : stab.members) jstab.push_back(inst.gamma.label(m));
    target["stabilizer"] = std::move(jstab);
    target["cocycle_count"] = cocycles.size();
    target["class_count"] = classes.size();
    target["classes"] = std::move(jc);
    out.push_back(std::move(target));
  }
  rep.payload["targets"] = std::move(out);
  return rep;
}

// Enumeration of bundles up to gauge equivalence, optionally cut down to one
// local-type sector.
inline Report cmd_enumerate(const Instance& inst, const Sector& sector, long long budget) {
  Report rep{"enumerate", inst.name, instance_digest(inst), Json::object(), true};
  if (!inst.cover) fail(ErrKind::ValidationError, "enumerate needs a cover in the instance");
  const GammaCover& cov = *inst.cover;

  BundleEnumeration all = enumerate_bundles(cov, inst.action, std::nullopt, budget);

  std::vector<LocalTypeProfile> profiles;  // distinct, in first-appearance order
  std::vector<int> profile_of(all.classes.size());
  for (size_t i = 0; i < all.classes.size(); ++i) {
    LocalTypeProfile p = local_type(all.classes[i].rep);
    int found = -1;
    for (size_t j = 0; j < profiles.size(); ++j)
      if (profiles[j] == p) {
        found = static_cast<int>(j);
        break;
      }
    if (found < 0) {
      found = static_cast<int>(profiles.size());
      profiles.push_back(std::move(p));
    }
    profile_of[i] = found;
  }

  std::optional<int> keep;
  switch (sector.kind) {
    case Sector::Kind::All:
      break;
    case Sector::Kind::Anchor:
    case Sector::Kind::Trivial: {
      EquivBundle pivot = sector.kind == Sector::Kind::Anchor
                              ? detail::anchor_of(inst)
                              : trivial_bundle(cov, inst.action);
      LocalTypeProfile p = local_type(pivot);
      for (size_t j = 0; j < profiles.size(); ++j)
        if (profiles[j] == p) keep = static_cast<int>(j);
      if (!keep) fail(ErrKind::ValidationError, "no bundle class has the requested local type");
      break;
    }
    case Sector::Kind::Index:
      if (sector.index >= static_cast<int>(profiles.size()))
        fail(ErrKind::ValidationError,
             "sector index " + std::to_string(sector.index) + " out of range; only " +
                 std::to_string(profiles.size()) + " local types occur");
      keep = sector.index;
      break;
  }

  Json jclasses = Json::array();
  Rat mass{0, 1};
  long long kept = 0;
  for (size_t i = 0; i < all.classes.size(); ++i) {
    if (keep && profile_of[i] != *keep) continue;
    ++kept;
    mass = rat_add(mass, make_rat(1, all.classes[i].aut_order));
    jclasses.push_back(Json{{"bundle", bundle_to_json(all.classes[i].rep)},
                            {"aut_order", all.classes[i].aut_order},
                            {"sector", profile_of[i]},
                            {"local_type", detail::profile_to_json(local_type(all.classes[i].rep))}});
  }
  rep.payload["total_bundles"] = all.total_count;
  rep.payload["gauge_group_order"] = all.gauge_group_order;
  rep.payload["sector_count"] = profiles.size();
  rep.payload["class_count"] = kept;
  rep.payload["classes"] = std::move(jclasses);
  rep.payload["mass"] = rat_to_string(mass);
  return rep;
}

// Full equivalence check between bundle classes in the anchor's sector and
// torsor classes for the anchor's descent groups.
inline Report cmd_verify(const Instance& inst, long long budget) {
  Report rep{"verify", inst.name, instance_digest(inst), Json::object(), true};
  EquivBundle anchor = detail::anchor_of(inst);
  EquivalenceReport eq = verify_equivalence(anchor, budget);

  rep.pass = eq.pass;
  rep.payload["bundle_total"] = eq.bundle_total;
  rep.payload["bundle_class_count"] = eq.bundle_class_count;
  rep.payload["torsor_class_count"] = eq.torsor_class_count;
  rep.payload["bundle_aut_orders"] = eq.bundle_aut_orders;
  rep.payload["torsor_aut_orders"] = eq.torsor_aut_orders;
  Json matching = Json::array();
  for (auto [b, t] : eq.matching) matching.push_back(Json::array({b, t}));
  rep.payload["matching"] = std::move(matching);
  rep.payload["bundle_mass"] = rat_to_string(eq.bundle_mass);
  rep.payload["torsor_mass"] = rat_to_string(eq.torsor_mass);
  rep.payload["checks"] = Json{{"defined_iff_same_type", eq.defined_iff_same_type},
                               {"class_bijection", eq.bijection},
                               {"automorphism_orders", eq.aut_match},
                               {"roundtrip_bundle", eq.roundtrip_bundle},
                               {"roundtrip_torsor", eq.roundtrip_torsor},
                               {"groupoid_mass", eq.mass_match}};
  if (!eq.first_failure.empty()) rep.payload["first_failure"] = eq.first_failure;
  return rep;
}

// The worked example: G = S4 with the deck group of order two acting by
// conjugation with (12)(34), over an interval whose endpoints are both
// branch points.
inline Instance make_s4_example_instance() {
  Instance inst;
  inst.name = "s4-interval";
  inst.gamma = make_cyclic_group(2);
  inst.group = make_symmetric_group(4);
  GroupHom witness = make_hom(inst.gamma, inst.group,
                              {inst.group.identity, element_by_label(inst.group, "(12)(34)")});
  inst.action = inner_action(inst.gamma, inst.group, witness);
  BaseGraph base = make_base_graph(2, {{0, 1}});
  std::vector<GammaSet> fibers{fixed_point_fiber(inst.gamma), fixed_point_fiber(inst.gamma)};
  inst.cover = make_cover_basepoints(std::move(base), inst.gamma, std::move(fibers), {{0, 0}});
  return inst;
}

inline Report cmd_example_s4(long long budget) {
  Instance inst = make_s4_example_instance();
  Report rep{"example-s4", inst.name, instance_digest(inst), Json::object(), true};
  const GammaCover& cov = *inst.cover;
  const FiniteGroup& g = inst.group;

  Json checks = Json::array();
  auto check = [&](const std::string& name, bool ok, const std::string& got,
                   const std::string& want) {
    checks.push_back(Json{{"name", name}, {"pass", ok}, {"got", got}, {"expected", want}});
    if (!ok) rep.pass = false;
  };
  auto check_ll = [&](const std::string& name, long long got, long long want) {
    check(name, got == want, std::to_string(got), std::to_string(want));
  };

  // Fiberwise classification at a branch point.
  Subgroup stab = full_subgroup(inst.gamma);
  auto cocycles = enumerate_cocycles(stab, inst.action);
  check_ll("cocycle_count", static_cast<long long>(cocycles.size()), 10);
  auto classes = h1_classes(stab, inst.action);
  check_ll("class_count", static_cast<long long>(classes.size()), 3);
  std::vector<long long> orbit_sizes, centralizer_orders;
  for (const auto& cls : classes) {
    orbit_sizes.push_back(cls.orbit_size);
    centralizer_orders.push_back(twisted_centralizer(cls.representative).order());
  }
  std::sort(orbit_sizes.begin(), orbit_sizes.end());
  std::sort(centralizer_orders.begin(), centralizer_orders.end());
  check("orbit_sizes", orbit_sizes == std::vector<long long>{1, 3, 6}, Json(orbit_sizes).dump(),
        "[1,3,6]");
  check("centralizer_orders", centralizer_orders == std::vector<long long>{4, 8, 24},
        Json(centralizer_orders).dump(), "[4,8,24]");

  // The two bundles of the example: the trivial one and the twist whose lift
  // coefficient at the nontrivial deck element is (12) on both fibers.
  EquivBundle trivial = trivial_bundle(cov, inst.action);
  Elem t12 = element_by_label(g, "(12)");
  std::vector<Elem> lift(static_cast<size_t>(inst.gamma.n) * cov.num_vertices, g.identity);
  for (int v = 0; v < cov.num_vertices; ++v) lift[1 * cov.num_vertices + v] = t12;
  bool twist_valid = true;
  std::string twist_err = "valid";
  try {
    (void)make_bundle(cov, inst.action, std::vector<Elem>(cov.num_cover_oriented(), g.identity),
                      lift);
  } catch (const Error& e) {
    twist_valid = false;
    twist_err = err_name(e.kind());
  }
  check("twist_bundle_valid", twist_valid, twist_err, "valid");
  if (!twist_valid) {
    rep.payload["checks"] = std::move(checks);
    return rep;
  }
  EquivBundle twist = make_bundle(cov, inst.action,
                                  std::vector<Elem>(cov.num_cover_oriented(), g.identity), lift);

  check_ll("trivial_restriction_orbit",
           detail::class_of_cocycle(restrict_to_fiber(trivial, 0)).orbit_size, 3);
  check_ll("twist_restriction_orbit",
           detail::class_of_cocycle(restrict_to_fiber(twist, 0)).orbit_size, 6);
  check("same_local_type", !same_local_type(trivial, twist).same, "false", "false");
  for (int x = 0; x < 2; ++x) {
    auto sections = invariant_sections(trivial, trivial, x);
    check_ll("sections_trivial_trivial_v" + std::to_string(x),
             static_cast<long long>(sections.size()), 8);
    bool has_id = false;
    for (const auto& s : sections)
      has_id = has_id || s.t == std::vector<Elem>(s.t.size(), g.identity);
    check("identity_section_present_v" + std::to_string(x), has_id,
          has_id ? "present" : "absent", "present");
    check_ll("sections_trivial_twist_v" + std::to_string(x),
             static_cast<long long>(invariant_sections(trivial, twist, x).size()), 0);
  }
  check_ll("trivial_aut_order", automorphism_order(trivial), 8);

  DescentGroupScheme scheme = descent_group(trivial);
  bool rejected = false;
  try {
    (void)forward(scheme, twist);
  } catch (const Error& e) {
    rejected = e.kind() == ErrKind::LocalTypeMismatch;
  }
  check("forward_rejects_other_type", rejected, rejected ? "rejected" : "accepted", "rejected");

  EquivalenceReport eq = verify_equivalence(trivial, budget);
  check("verify_equivalence", eq.pass, eq.pass ? "pass" : "fail", "pass");
  check_ll("bundle_total", eq.bundle_total, 2400);
  check_ll("sector_class_count", eq.bundle_class_count, 2);
  check_ll("torsor_class_count", eq.torsor_class_count, 2);
  std::vector<long long> auts = eq.bundle_aut_orders;
  std::sort(auts.begin(), auts.end());
  check("sector_aut_orders", auts == std::vector<long long>{4, 8}, Json(auts).dump(), "[4,8]");
  check("groupoid_mass", eq.bundle_mass == Rat{3, 8}, rat_to_string(eq.bundle_mass), "3/8");

  rep.payload["checks"] = std::move(checks);
  return rep;
}

inline std::string render_json(const Report& rep) {
  Json j;
  j["command"] = rep.command;
  j["version"] = kVersion;
  j["instance"] = Json{{"name", rep.instance_name}, {"digest", rep.digest}};
  j["payload"] = rep.payload;
  j["verdict"] = rep.pass ? "pass" : "fail";
  return j.dump(2) + "\n";
}

namespace detail {

inline void render_payload_text(std::ostringstream& out, const Report& rep) {
  const Json& p = rep.payload;
  if (rep.command == "classify") {
    for (const Json& t : p["targets"]) {
      out << "target";
      if (t.contains("vertex")) out << " vertex=" << t["vertex"].get<int>();
      out << " stabilizer=" << t["stabilizer"].dump()
          << " cocycles=" << t["cocycle_count"].get<long long>()
          << " classes=" << t["class_count"].get<long long>() << "\n";
      int i = 0;
      for (const Json& c : t["classes"]) {
        out << "  class " << i++ << ": orbit=" << c["orbit_size"].get<long long>()
            << " centralizer=" << c["centralizer_order"].get<long long>()
            << " rep=" << c["representative"]["values"].dump() << "\n";
      }
    }
    return;
  }
  if (rep.command == "enumerate") {
    out << "total=" << p["total_bundles"].get<long long>()
        << " gauge_order=" << p["gauge_group_order"].get<long long>()
        << " sectors=" << p["sector_count"].get<long long>()
        << " classes=" << p["class_count"].get<long long>() << " mass=" << p["mass"].get<std::string>()
        << "\n";
    int i = 0;
    for (const Json& c : p["classes"]) {
      out << "  class " << i++ << ": aut=" << c["aut_order"].get<long long>()
          << " sector=" << c["sector"].get<int>() << " type=[";
      bool first = true;
      for (const Json& e : c["local_type"]) {
        if (!first) out << " ";
        first = false;
        out << "v" << e["vertex"].get<int>() << ":" << e["class"]["values"].dump();
      }
      out << "]\n";
    }
    return;
  }
  if (rep.command == "verify") {
    out << "bundle_total=" << p["bundle_total"].get<long long>()
        << " sector_classes=" << p["bundle_class_count"].get<long long>()
        << " torsor_classes=" << p["torsor_class_count"].get<long long>() << "\n";
    out << "bundle_mass=" << p["bundle_mass"].get<std::string>()
        << " torsor_mass=" << p["torsor_mass"].get<std::string>() << "\n";
    for (const auto& [name, ok] : p["checks"].items())
      out << "check " << name << ": " << (ok.get<bool>() ? "pass" : "fail") << "\n";
    if (p.contains("first_failure"))
      out << "first_failure: " << p["first_failure"].get<std::string>() << "\n";
    return;
  }
  if (rep.command == "example-s4") {
    for (const Json& c : p["checks"])
      out << "check " << c["name"].get<std::string>() << ": "
          << (c["pass"].get<bool>() ? "pass" : "fail") << " (got " << c["got"].get<std::string>()
          << ", expected " << c["expected"].get<std::string>() << ")\n";
    return;
  }
  out << p.dump(2) << "\n";
}

}  // namespace detail

inline std::string render_text(const Report& rep) {
  std::ostringstream out;
  out << "command: " << rep.command << "\n";
  out << "version: " << kVersion << "\n";
  out << "instance: " << (rep.instance_name.empty() ? "(unnamed)" : rep.instance_name)
      << " digest=" << rep.digest << "\n";
  detail::render_payload_text(out, rep);
  out << "verdict: " << (rep.pass ? "pass" : "fail") << "\n";
  return out.str();
}

}  // namespace gbundles
