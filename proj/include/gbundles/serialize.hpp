#pragma once

// JSON encodings for everything the command-line tool reads and writes.
// Parsing reports the JSON path of the offending value; emission is canonical
// (ordered keys, full tables) so that re-encoding a parsed object reproduces
// the same bytes.

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "gbundles/bundle.hpp"
#include "gbundles/cohomology.hpp"
#include "gbundles/covering.hpp"
#include "gbundles/descent.hpp"
#include "gbundles/errors.hpp"
#include "gbundles/group.hpp"

namespace gbundles {

using Json = nlohmann::ordered_json;

namespace detail {

[[noreturn]] inline void parse_fail(const std::string& path, const std::string& msg) {
  fail(ErrKind::ParseError, path + ": " + msg);
}

inline const Json& require_key(const Json& j, const char* key, const std::string& path) {
  if (!j.is_object()) parse_fail(path, "expected an object");
  auto it = j.find(key);
  if (it == j.end()) parse_fail(path, "missing key '" + std::string(key) + "'");
  return *it;
}

inline int require_int(const Json& j, const std::string& path) {
  if (!j.is_number_integer()) parse_fail(path, "expected an integer");
  return j.get<int>();
}

inline void reject_unknown_keys(const Json& j, std::initializer_list<const char*> known,
                                const std::string& path) {
  if (!j.is_object()) parse_fail(path, "expected an object");
  for (const auto& [key, value] : j.items()) {
    bool ok = false;
    for (const char* k : known) ok = ok || key == k;
    if (!ok) parse_fail(path, "unknown key '" + key + "'");
  }
}

// Group elements appear in JSON either as indices or as labels.
inline Elem element_from_json(const Json& j, const FiniteGroup& g, const std::string& path) {
  if (j.is_number_integer()) {
    int v = j.get<int>();
    if (v < 0 || v >= g.n) parse_fail(path, "element index out of range");
    return v;
  }
  if (j.is_string()) return element_by_label(g, j.get<std::string>());
  parse_fail(path, "expected an element index or label");
}

inline std::vector<std::vector<Elem>> int_matrix(const Json& j, const std::string& path) {
  if (!j.is_array()) parse_fail(path, "expected an array of arrays");
  std::vector<std::vector<Elem>> rows;
  for (size_t i = 0; i < j.size(); ++i) {
    const Json& row = j[i];
    if (!row.is_array()) parse_fail(path + "[" + std::to_string(i) + "]", "expected an array");
    std::vector<Elem> r;
    for (size_t k = 0; k < row.size(); ++k)
      r.push_back(require_int(row[k], path + "[" + std::to_string(i) + "][" + std::to_string(k) + "]"));
    rows.push_back(std::move(r));
  }
  return rows;
}

}  // namespace detail

inline Json parse_json_text(const std::string& text) {
  Json j = Json::parse(text, nullptr, false);
  if (j.is_discarded()) detail::parse_fail("$", "input is not valid JSON");
  return j;
}

inline FiniteGroup group_from_json(const Json& j, const std::string& path) {
  if (!j.is_object()) detail::parse_fail(path, "expected an object");
  if (j.contains("cyclic")) {
    detail::reject_unknown_keys(j, {"cyclic"}, path);
    return make_cyclic_group(detail::require_int(j["cyclic"], path + ".cyclic"));
  }
  if (j.contains("symmetric")) {
    detail::reject_unknown_keys(j, {"symmetric"}, path);
    return make_symmetric_group(detail::require_int(j["symmetric"], path + ".symmetric"));
  }
  detail::reject_unknown_keys(j, {"order", "table", "labels"}, path);
  int order = detail::require_int(detail::require_key(j, "order", path), path + ".order");
  auto rows = detail::int_matrix(detail::require_key(j, "table", path), path + ".table");
  if (static_cast<int>(rows.size()) != order)
    detail::parse_fail(path + ".table", "table size does not match 'order'");
  std::vector<std::string> labels;
  if (j.contains("labels")) {
    const Json& jl = j["labels"];
    if (!jl.is_array()) detail::parse_fail(path + ".labels", "expected an array");
    for (size_t i = 0; i < jl.size(); ++i) {
      if (!jl[i].is_string())
        detail::parse_fail(path + ".labels[" + std::to_string(i) + "]", "expected a string");
      labels.push_back(jl[i].get<std::string>());
    }
  }
  return make_group(rows, std::move(labels));
}

inline Json group_to_json(const FiniteGroup& g) {
  Json j;
  j["order"] = g.n;
  Json table = Json::array();
  for (Elem a = 0; a < g.n; ++a) {
    Json row = Json::array();
    for (Elem b = 0; b < g.n; ++b) row.push_back(g.mul(a, b));
    table.push_back(std::move(row));
  }
  j["table"] = std::move(table);
  Json labels = Json::array();
  for (Elem a = 0; a < g.n; ++a) labels.push_back(g.label(a));
  j["labels"] = std::move(labels);
  return j;
}

inline AutAction action_from_json(const Json& j, FiniteGroup gamma, FiniteGroup g,
                                  const std::string& path) {
  if (!j.is_object()) detail::parse_fail(path, "expected an object");
  if (j.contains("trivial")) {
    detail::reject_unknown_keys(j, {"trivial"}, path);
    if (!j["trivial"].is_boolean() || !j["trivial"].get<bool>())
      detail::parse_fail(path + ".trivial", "expected true");
    return trivial_action(std::move(gamma), std::move(g));
  }
  if (j.contains("inner_witness_labels")) {
    detail::reject_unknown_keys(j, {"inner_witness_labels"}, path);
    const Json& jw = j["inner_witness_labels"];
    if (!jw.is_array() || static_cast<int>(jw.size()) != gamma.n)
      detail::parse_fail(path + ".inner_witness_labels",
                         "expected one witness per deck group element");
    std::vector<Elem> image;
    for (size_t i = 0; i < jw.size(); ++i)
      image.push_back(detail::element_from_json(
          jw[i], g, path + ".inner_witness_labels[" + std::to_string(i) + "]"));
    GroupHom witness = make_hom(gamma, g, std::move(image));
    return inner_action(gamma, g, witness);
  }
  detail::reject_unknown_keys(j, {"act"}, path);
  auto act = detail::int_matrix(detail::require_key(j, "act", path), path + ".act");
  return make_aut_action(std::move(gamma), std::move(g), std::move(act));
}

inline Json action_to_json(const AutAction& a) {
  Json j;
  j["act"] = a.act;
  return j;
}

namespace detail {

inline GammaSet vertex_fiber_from_json(const Json& j, const FiniteGroup& gamma,
                                       const std::string& path) {
  if (!j.is_object()) parse_fail(path, "expected an object");
  if (j.contains("fixed")) {
    reject_unknown_keys(j, {"fixed"}, path);
    return fixed_point_fiber(gamma);
  }
  if (j.contains("free")) {
    reject_unknown_keys(j, {"free"}, path);
    return free_fiber(gamma);
  }
  if (j.contains("stabilizer")) {
    reject_unknown_keys(j, {"stabilizer"}, path);
    const Json& js = j["stabilizer"];
    if (!js.is_array()) parse_fail(path + ".stabilizer", "expected an array");
    std::vector<Elem> gens;
    for (size_t i = 0; i < js.size(); ++i)
      gens.push_back(
          element_from_json(js[i], gamma, path + ".stabilizer[" + std::to_string(i) + "]"));
    return coset_fiber(gamma, subgroup_generated(gamma, gens));
  }
  reject_unknown_keys(j, {"act"}, path);
  GammaSet s;
  s.act = int_matrix(require_key(j, "act", path), path + ".act");
  return s;
}

}  // namespace detail

inline GammaCover cover_from_json(const Json& j, FiniteGroup gamma, const std::string& path) {
  detail::reject_unknown_keys(j, {"base", "fibers", "incidence"}, path);
  const Json& jb = detail::require_key(j, "base", path);
  detail::reject_unknown_keys(jb, {"vertices", "edges"}, path + ".base");
  int vertices = detail::require_int(detail::require_key(jb, "vertices", path + ".base"),
                                     path + ".base.vertices");
  auto edge_rows = detail::int_matrix(detail::require_key(jb, "edges", path + ".base"),
                                      path + ".base.edges");
  std::vector<std::pair<int, int>> edges;
  for (size_t k = 0; k < edge_rows.size(); ++k) {
    if (edge_rows[k].size() != 2)
      detail::parse_fail(path + ".base.edges[" + std::to_string(k) + "]",
                         "expected a [source, target] pair");
    edges.emplace_back(edge_rows[k][0], edge_rows[k][1]);
  }
  BaseGraph base = make_base_graph(vertices, std::move(edges));

  const Json& jf = detail::require_key(j, "fibers", path);
  detail::reject_unknown_keys(jf, {"vertex", "edge"}, path + ".fibers");
  const Json& jv = detail::require_key(jf, "vertex", path + ".fibers");
  if (!jv.is_array() || static_cast<int>(jv.size()) != base.num_vertices)
    detail::parse_fail(path + ".fibers.vertex", "expected one fiber per base vertex");
  std::vector<GammaSet> vertex_fibers;
  for (size_t x = 0; x < jv.size(); ++x)
    vertex_fibers.push_back(detail::vertex_fiber_from_json(
        jv[x], gamma, path + ".fibers.vertex[" + std::to_string(x) + "]"));

  if (jf.contains("edge")) {
    if (j.contains("incidence"))
      detail::parse_fail(path, "give either explicit edge fibers or 'incidence', not both");
    const Json& je = jf["edge"];
    if (!je.is_array() || static_cast<int>(je.size()) != base.num_pairs())
      detail::parse_fail(path + ".fibers.edge", "expected one fiber per base edge");
    std::vector<EdgeFiberSpec> edge_fibers;
    for (size_t k = 0; k < je.size(); ++k) {
      std::string ep = path + ".fibers.edge[" + std::to_string(k) + "]";
      detail::reject_unknown_keys(je[k], {"act", "endpoints"}, ep);
      EdgeFiberSpec spec;
      spec.set.act = detail::int_matrix(detail::require_key(je[k], "act", ep), ep + ".act");
      auto rows = detail::int_matrix(detail::require_key(je[k], "endpoints", ep), ep + ".endpoints");
      for (size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != 2)
          detail::parse_fail(ep + ".endpoints[" + std::to_string(i) + "]",
                             "expected a [source, target] pair");
        spec.endpoints.emplace_back(rows[i][0], rows[i][1]);
      }
      edge_fibers.push_back(std::move(spec));
    }
    return make_cover(std::move(base), std::move(gamma), std::move(vertex_fibers),
                      std::move(edge_fibers));
  }

  auto inc_rows = detail::int_matrix(detail::require_key(j, "incidence", path), path + ".incidence");
  if (static_cast<int>(inc_rows.size()) != base.num_pairs())
    detail::parse_fail(path + ".incidence", "expected one entry per base edge");
  std::vector<std::pair<int, int>> incidence;
  for (size_t k = 0; k < inc_rows.size(); ++k) {
    if (inc_rows[k].size() != 2)
      detail::parse_fail(path + ".incidence[" + std::to_string(k) + "]",
                         "expected a [source, target] pair");
    incidence.emplace_back(inc_rows[k][0], inc_rows[k][1]);
  }
  return make_cover_basepoints(std::move(base), std::move(gamma), std::move(vertex_fibers),
                               std::move(incidence));
}

inline Json cover_to_json(const GammaCover& cov) {
  Json j;
  Json edges = Json::array();
  for (int k = 0; k < cov.base.num_pairs(); ++k)
    edges.push_back(Json::array({cov.base.src(2 * k), cov.base.dst(2 * k)}));
  j["base"] = Json{{"vertices", cov.base.num_vertices}, {"edges", std::move(edges)}};
  Json vertex = Json::array();
  for (int x = 0; x < cov.base.num_vertices; ++x) {
    Json act = Json::array();
    for (Elem ga = 0; ga < cov.gamma.n; ++ga) {
      Json row = Json::array();
      for (int i = 0; i < cov.vfiber_size[x]; ++i)
        row.push_back(cov.vact[ga][cov.vfiber_offset[x] + i] - cov.vfiber_offset[x]);
      act.push_back(std::move(row));
    }
    vertex.push_back(Json{{"act", std::move(act)}});
  }
  j["fibers"] = Json{{"vertex", std::move(vertex)}};
  Json incidence = Json::array();
  for (int k = 0; k < cov.base.num_pairs(); ++k) {
    int sx = cov.base.src(2 * k), tx = cov.base.dst(2 * k);
    incidence.push_back(Json::array({cov.inc_src[k] - cov.vfiber_offset[sx],
                                     cov.inc_dst[k] - cov.vfiber_offset[tx]}));
  }
  j["incidence"] = std::move(incidence);
  return j;
}

inline EquivBundle bundle_from_json(const Json& j, const GammaCover& cov, const AutAction& action,
                                    const std::string& path) {
  if (j.is_string() && j.get<std::string>() == "trivial") return trivial_bundle(cov, action);
  detail::reject_unknown_keys(j, {"trans", "lift"}, path);
  const FiniteGroup& g = action.g;
  const Json& jt = detail::require_key(j, "trans", path);
  if (!jt.is_array() || static_cast<int>(jt.size()) != cov.num_cover_oriented())
    detail::parse_fail(path + ".trans", "expected one value per oriented cover edge");
  std::vector<Elem> trans;
  for (size_t i = 0; i < jt.size(); ++i)
    trans.push_back(detail::element_from_json(jt[i], g, path + ".trans[" + std::to_string(i) + "]"));
  const Json& jl = detail::require_key(j, "lift", path);
  if (!jl.is_array() || static_cast<int>(jl.size()) != cov.gamma.n)
    detail::parse_fail(path + ".lift", "expected one row per deck group element");
  std::vector<Elem> lift;
  for (size_t ga = 0; ga < jl.size(); ++ga) {
    const Json& row = jl[ga];
    if (!row.is_array() || static_cast<int>(row.size()) != cov.num_vertices)
      detail::parse_fail(path + ".lift[" + std::to_string(ga) + "]",
                         "expected one value per cover vertex");
    for (size_t v = 0; v < row.size(); ++v)
      lift.push_back(detail::element_from_json(
          row[v], g, path + ".lift[" + std::to_string(ga) + "][" + std::to_string(v) + "]"));
  }
  return make_bundle(cov, action, std::move(trans), std::move(lift));
}

inline Json bundle_to_json(const EquivBundle& p) {
  const FiniteGroup& g = p.action.g;
  Json j;
  Json trans = Json::array();
  for (Elem v : p.trans) trans.push_back(g.label(v));
  j["trans"] = std::move(trans);
  Json lift = Json::array();
  for (Elem ga = 0; ga < p.cover.gamma.n; ++ga) {
    Json row = Json::array();
    for (int v = 0; v < p.cover.num_vertices; ++v) row.push_back(g.label(p.c(ga, v)));
    lift.push_back(std::move(row));
  }
  j["lift"] = std::move(lift);
  return j;
}

inline TwistedCocycle cocycle_from_json(const Json& j, const AutAction& action,
                                        const std::string& path) {
  detail::reject_unknown_keys(j, {"stabilizer", "values"}, path);
  const Json& js = detail::require_key(j, "stabilizer", path);
  if (!js.is_array()) detail::parse_fail(path + ".stabilizer", "expected an array");
  std::vector<Elem> members;
  for (size_t i = 0; i < js.size(); ++i)
    members.push_back(detail::element_from_json(js[i], action.gamma,
                                                path + ".stabilizer[" + std::to_string(i) + "]"));
  Subgroup stab = make_subgroup(action.gamma, std::move(members));
  const Json& jv = detail::require_key(j, "values", path);
  if (!jv.is_object()) detail::parse_fail(path + ".values", "expected an object");
  std::vector<Elem> values(stab.members.size(), -1);
  for (const auto& [key, value] : jv.items()) {
    Elem gam = element_by_label(action.gamma, key);
    int idx = stab.index_of(gam);
    if (idx < 0) detail::parse_fail(path + ".values", "'" + key + "' is not in the stabilizer");
    values[static_cast<size_t>(idx)] =
        detail::element_from_json(value, action.g, path + ".values." + key);
  }
  for (size_t i = 0; i < values.size(); ++i)
    if (values[i] < 0)
      detail::parse_fail(path + ".values",
                         "missing value for '" + action.gamma.label(stab.members[i]) + "'");
  return make_cocycle(std::move(stab), action, std::move(values));
}

inline Json cocycle_to_json(const TwistedCocycle& c) {
  Json j;
  Json stab = Json::array();
  for (Elem m : c.stab.members) stab.push_back(c.action.gamma.label(m));
  j["stabilizer"] = std::move(stab);
  Json values = Json::object();
  for (size_t i = 0; i < c.stab.members.size(); ++i)
    values[c.action.gamma.label(c.stab.members[i])] = c.action.g.label(c.values[i]);
  j["values"] = std::move(values);
  return j;
}

inline HTorsor torsor_from_json(const Json& j, const DescentGroupScheme& scheme,
                                const std::string& path) {
  detail::reject_unknown_keys(j, {"u"}, path);
  const Json& ju = detail::require_key(j, "u", path);
  if (!ju.is_array()) detail::parse_fail(path + ".u", "expected an array");
  std::vector<Elem> u;
  for (size_t k = 0; k < ju.size(); ++k)
    u.push_back(detail::element_from_json(ju[k], scheme.anchor.action.g,
                                          path + ".u[" + std::to_string(k) + "]"));
  return make_htorsor(scheme, std::move(u));
}

inline Json torsor_to_json(const HTorsor& f, const FiniteGroup& g) {
  Json j;
  Json u = Json::array();
  for (Elem v : f.u) u.push_back(g.label(v));
  j["u"] = std::move(u);
  return j;
}

// One self-contained problem instance: the two groups, the action, and
// optionally a stabilizer (for fiberwise classification), a cover, and an
// anchor bundle on it.
struct Instance {
  std::string name;
  FiniteGroup gamma;
  FiniteGroup group;
  AutAction action;
  std::optional<Subgroup> stabilizer;
  std::optional<GammaCover> cover;
  std::optional<EquivBundle> anchor;
};

inline Instance instance_from_json(const Json& j) {
  const std::string path = "$";
  detail::reject_unknown_keys(
      j, {"name", "gamma", "group", "action", "stabilizer", "cover", "anchor"}, path);
  Instance inst;
  if (j.contains("name")) {
    if (!j["name"].is_string()) detail::parse_fail(path + ".name", "expected a string");
    inst.name = j["name"].get<std::string>();
  }
  inst.gamma = group_from_json(detail::require_key(j, "gamma", path), path + ".gamma");
  inst.group = group_from_json(detail::require_key(j, "group", path), path + ".group");
  inst.action = j.contains("action")
                    ? action_from_json(j["action"], inst.gamma, inst.group, path + ".action")
                    : trivial_action(inst.gamma, inst.group);
  if (j.contains("stabilizer")) {
    const Json& js = j["stabilizer"];
    if (!js.is_array()) detail::parse_fail(path + ".stabilizer", "expected an array");
    std::vector<Elem> gens;
    for (size_t i = 0; i < js.size(); ++i)
      gens.push_back(detail::element_from_json(js[i], inst.gamma,
                                               path + ".stabilizer[" + std::to_string(i) + "]"));
    inst.stabilizer = subgroup_generated(inst.gamma, gens);
  }
  if (j.contains("cover")) inst.cover = cover_from_json(j["cover"], inst.gamma, path + ".cover");
  if (j.contains("anchor")) {
    if (!inst.cover) detail::parse_fail(path + ".anchor", "an anchor needs a cover");
    inst.anchor = bundle_from_json(j["anchor"], *inst.cover, inst.action, path + ".anchor");
  }
  return inst;
}

inline Json instance_to_json(const Instance& inst) {
  Json j;
  j["name"] = inst.name;
  j["gamma"] = group_to_json(inst.gamma);
  j["group"] = group_to_json(inst.group);
  j["action"] = action_to_json(inst.action);
  if (inst.stabilizer) {
    Json stab = Json::array();
    for (Elem m : inst.stabilizer->members) stab.push_back(inst.gamma.label(m));
    j["stabilizer"] = std::move(stab);
  }
  if (inst.cover) j["cover"] = cover_to_json(*inst.cover);
  if (inst.anchor) j["anchor"] = bundle_to_json(*inst.anchor);
  return j;
}

inline std::string fnv1a_hex(const std::string& bytes) {
  unsigned long long h = 1469598103934665603ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[i] = digits[h & 0xf];
    h >>= 4;
  }
  return out;
}

inline std::string instance_digest(const Instance& inst) {
  return fnv1a_hex(instance_to_json(inst).dump());
}

}  // namespace gbundles
