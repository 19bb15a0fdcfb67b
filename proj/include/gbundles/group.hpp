#pragma once

// Finite groups as dense multiplication tables, automorphism actions of a deck
// group Gamma on a structure group G, and subgroups.  Elements are integer
// indices into the table; every constructor validates the full set of axioms
// and computes identity and inverses up front.

#include <algorithm>
#include <optional>
#include <string>
#include <vector>

#include "gbundles/errors.hpp"

namespace gbundles {

using Elem = int;

// Downstream enumerations are exponential in group order, so construction
// refuses anything a desk-scale run could not exhaust.
inline constexpr int kMaxGroupOrder = 64;
inline constexpr int kMaxGammaOrder = 12;

struct FiniteGroup {
  int n = 0;
  std::vector<Elem> table;  // row-major: table[a*n + b] = a*b
  Elem identity = 0;
  std::vector<Elem> inverse;
  std::vector<std::string> labels;  // optional, empty when unnamed

  int order() const { return n; }
  Elem mul(Elem a, Elem b) const { return table[a * n + b]; }
  Elem inv(Elem a) const { return inverse[a]; }
  Elem id() const { return identity; }
  Elem conj(Elem a, Elem b) const { return mul(mul(a, b), inv(a)); }

  int element_order(Elem a) const {
    int k = 1;
    Elem x = a;
    while (x != identity) {
      x = mul(x, a);
      ++k;
    }
    return k;
  }

  std::string label(Elem a) const {
    return labels.empty() ? std::to_string(a) : labels[a];
  }

  // Structural equality; labels are presentation only.
  bool operator==(const FiniteGroup& o) const { return n == o.n && table == o.table; }
};

inline FiniteGroup make_group(const std::vector<std::vector<Elem>>& rows,
                              std::vector<std::string> labels = {}) {
  const int n = static_cast<int>(rows.size());
  if (n < 1) fail(ErrKind::ValidationError, "group table is empty");
  if (n > kMaxGroupOrder)
    fail(ErrKind::TooLarge, "group order " + std::to_string(n) + " exceeds cap " +
                                std::to_string(kMaxGroupOrder));
  FiniteGroup g;
  g.n = n;
  g.table.resize(static_cast<size_t>(n) * n);
  for (int a = 0; a < n; ++a) {
    if (static_cast<int>(rows[a].size()) != n)
      fail(ErrKind::ValidationError, "table row " + std::to_string(a) + " has wrong length");
    for (int b = 0; b < n; ++b) {
      Elem v = rows[a][b];
      if (v < 0 || v >= n)
        fail(ErrKind::ValidationError, "table entry (" + std::to_string(a) + "," +
                                           std::to_string(b) + ") out of range");
      g.table[a * n + b] = v;
    }
  }
  if (!labels.empty() && static_cast<int>(labels.size()) != n)
    fail(ErrKind::ValidationError, "label list has wrong length");
  g.labels = std::move(labels);

  std::optional<Elem> id;
  for (Elem e = 0; e < n; ++e) {
    bool ok = true;
    for (Elem a = 0; a < n && ok; ++a) ok = g.mul(e, a) == a && g.mul(a, e) == a;
    if (ok) {
      id = e;
      break;
    }
  }
  if (!id) fail(ErrKind::NoIdentity, "no two-sided identity element");
  g.identity = *id;

  for (Elem a = 0; a < n; ++a)
    for (Elem b = 0; b < n; ++b)
      for (Elem c = 0; c < n; ++c)
        if (g.mul(g.mul(a, b), c) != g.mul(a, g.mul(b, c)))
          fail(ErrKind::NotAssociative, "(" + std::to_string(a) + "," + std::to_string(b) + "," +
                                            std::to_string(c) + ")");

  g.inverse.assign(n, -1);
  for (Elem a = 0; a < n; ++a) {
    for (Elem b = 0; b < n; ++b)
      if (g.mul(a, b) == g.identity && g.mul(b, a) == g.identity) {
        g.inverse[a] = b;
        break;
      }
    if (g.inverse[a] < 0) fail(ErrKind::NoInverse, "element " + std::to_string(a));
  }
  return g;
}

inline FiniteGroup make_cyclic_group(int n) {
  if (n < 1) fail(ErrKind::ValidationError, "cyclic group needs n >= 1");
  if (n > kMaxGroupOrder)
    fail(ErrKind::TooLarge, "group order " + std::to_string(n) + " exceeds cap " +
                                std::to_string(kMaxGroupOrder));
  std::vector<std::vector<Elem>> rows(n, std::vector<Elem>(n));
  std::vector<std::string> labels(n);
  for (int a = 0; a < n; ++a) {
    labels[a] = std::to_string(a);
    for (int b = 0; b < n; ++b) rows[a][b] = (a + b) % n;
  }
  return make_group(rows, std::move(labels));
}

namespace detail {

inline std::string cycle_label(const std::vector<int>& perm) {
  const int n = static_cast<int>(perm.size());
  std::string out;
  std::vector<bool> seen(n, false);
  for (int i = 0; i < n; ++i) {
    if (seen[i] || perm[i] == i) continue;
    out += '(';
    int j = i;
    while (!seen[j]) {
      seen[j] = true;
      out += std::to_string(j + 1);
      j = perm[j];
    }
    out += ')';
  }
  return out.empty() ? "()" : out;
}

}  // namespace detail

// Elements are the permutations of {1..n} in lexicographic one-line order, so
// index 0 is the identity; composition is (p*q)(x) = p(q(x)).
inline FiniteGroup make_symmetric_group(int n) {
  if (n < 1) fail(ErrKind::ValidationError, "symmetric group needs n >= 1");
  if (n > 8) fail(ErrKind::TooLarge, "symmetric group degree " + std::to_string(n) + " > 8");
  long long ord = 1;
  for (int k = 2; k <= n; ++k) ord *= k;
  if (ord > kMaxGroupOrder)
    fail(ErrKind::TooLarge, "group order " + std::to_string(ord) + " exceeds cap " +
                                std::to_string(kMaxGroupOrder));

  std::vector<std::vector<int>> perms;
  std::vector<int> p(n);
  for (int i = 0; i < n; ++i) p[i] = i;
  do {
    perms.push_back(p);
  } while (std::next_permutation(p.begin(), p.end()));

  auto rank = [&](const std::vector<int>& q) {
    return static_cast<Elem>(std::lower_bound(perms.begin(), perms.end(), q) - perms.begin());
  };

  const int m = static_cast<int>(perms.size());
  std::vector<std::vector<Elem>> rows(m, std::vector<Elem>(m));
  std::vector<std::string> labels(m);
  std::vector<int> comp(n);
  for (int a = 0; a < m; ++a) {
    labels[a] = detail::cycle_label(perms[a]);
    for (int b = 0; b < m; ++b) {
      for (int x = 0; x < n; ++x) comp[x] = perms[a][perms[b][x]];
      rows[a][b] = rank(comp);
    }
  }
  return make_group(rows, std::move(labels));
}

inline Elem element_by_label(const FiniteGroup& g, const std::string& label) {
  for (Elem a = 0; a < g.n; ++a)
    if (g.label(a) == label) return a;
  fail(ErrKind::ValidationError, "no element labelled '" + label + "'");
}

struct GroupHom {
  FiniteGroup source;
  FiniteGroup target;
  std::vector<Elem> image;  // image[a] in target, indexed by source element

  Elem apply(Elem a) const { return image[a]; }
};

inline GroupHom make_hom(FiniteGroup source, FiniteGroup target, std::vector<Elem> image) {
  if (static_cast<int>(image.size()) != source.n)
    fail(ErrKind::ValidationError, "hom image has wrong length");
  for (Elem v : image)
    if (v < 0 || v >= target.n) fail(ErrKind::ValidationError, "hom image out of range");
  for (Elem a = 0; a < source.n; ++a)
    for (Elem b = 0; b < source.n; ++b)
      if (image[source.mul(a, b)] != target.mul(image[a], image[b]))
        fail(ErrKind::NotHomomorphism,
             "images of (" + std::to_string(a) + "," + std::to_string(b) + ") do not multiply");
  return GroupHom{std::move(source), std::move(target), std::move(image)};
}

// A left action of Gamma on G by automorphisms: act[gamma] is the permutation
// g |-> gamma_G(g), with act[gamma*sigma] = act[gamma] o act[sigma].
struct AutAction {
  FiniteGroup gamma;
  FiniteGroup g;
  std::vector<std::vector<Elem>> act;

  Elem apply(Elem gam, Elem x) const { return act[gam][x]; }

  bool operator==(const AutAction& o) const {
    return gamma == o.gamma && g == o.g && act == o.act;
  }
};

inline AutAction make_aut_action(FiniteGroup gamma, FiniteGroup g,
                                 std::vector<std::vector<Elem>> act) {
  if (gamma.n > kMaxGammaOrder)
    fail(ErrKind::TooLarge, "deck group order " + std::to_string(gamma.n) + " exceeds cap " +
                                std::to_string(kMaxGammaOrder));
  if (static_cast<int>(act.size()) != gamma.n)
    fail(ErrKind::ValidationError, "action table has wrong number of rows");
  for (Elem gam = 0; gam < gamma.n; ++gam) {
    const auto& row = act[gam];
    if (static_cast<int>(row.size()) != g.n)
      fail(ErrKind::ValidationError, "action row " + std::to_string(gam) + " has wrong length");
    std::vector<bool> hit(g.n, false);
    for (Elem x : row) {
      if (x < 0 || x >= g.n || hit[x])
        fail(ErrKind::NotAutomorphism, "row " + std::to_string(gam) + " is not a permutation");
      hit[x] = true;
    }
    for (Elem a = 0; a < g.n; ++a)
      for (Elem b = 0; b < g.n; ++b)
        if (row[g.mul(a, b)] != g.mul(row[a], row[b]))
          fail(ErrKind::NotAutomorphism, "row " + std::to_string(gam) +
                                             " breaks multiplication at (" + std::to_string(a) +
                                             "," + std::to_string(b) + ")");
  }
  for (Elem a = 0; a < g.n; ++a)
    if (act[gamma.identity][a] != a)
      fail(ErrKind::NotHomomorphism, "identity of the deck group must act trivially");
  for (Elem gam = 0; gam < gamma.n; ++gam)
    for (Elem sig = 0; sig < gamma.n; ++sig)
      for (Elem a = 0; a < g.n; ++a)
        if (act[gamma.mul(gam, sig)][a] != act[gam][act[sig][a]])
          fail(ErrKind::NotHomomorphism, "action of (" + std::to_string(gam) + "," +
                                             std::to_string(sig) + ") is not compositional");
  return AutAction{std::move(gamma), std::move(g), std::move(act)};
}

inline AutAction trivial_action(FiniteGroup gamma, FiniteGroup g) {
  std::vector<std::vector<Elem>> act(gamma.n, std::vector<Elem>(g.n));
  for (Elem gam = 0; gam < gamma.n; ++gam)
    for (Elem a = 0; a < g.n; ++a) act[gam][a] = a;
  return make_aut_action(std::move(gamma), std::move(g), std::move(act));
}

// Conjugation action through a witness hom Gamma -> G: gamma acts by
// g |-> w(gamma) * g * w(gamma)^-1.
inline AutAction inner_action(const FiniteGroup& gamma, const FiniteGroup& g,
                              const GroupHom& witness) {
  if (!(witness.source == gamma) || !(witness.target == g))
    fail(ErrKind::MismatchedContext, "witness hom does not map the deck group into G");
  std::vector<std::vector<Elem>> act(gamma.n, std::vector<Elem>(g.n));
  for (Elem gam = 0; gam < gamma.n; ++gam)
    for (Elem a = 0; a < g.n; ++a) act[gam][a] = g.conj(witness.apply(gam), a);
  return make_aut_action(gamma, g, std::move(act));
}

struct Subgroup {
  FiniteGroup ambient;
  std::vector<Elem> members;  // sorted ascending

  int order() const { return static_cast<int>(members.size()); }
  bool contains(Elem a) const {
    return std::binary_search(members.begin(), members.end(), a);
  }
  // Position of a within the sorted member list; -1 when absent.
  int index_of(Elem a) const {
    auto it = std::lower_bound(members.begin(), members.end(), a);
    return (it != members.end() && *it == a) ? static_cast<int>(it - members.begin()) : -1;
  }

  bool operator==(const Subgroup& o) const {
    return ambient == o.ambient && members == o.members;
  }
};

inline Subgroup make_subgroup(FiniteGroup ambient, std::vector<Elem> members) {
  std::sort(members.begin(), members.end());
  members.erase(std::unique(members.begin(), members.end()), members.end());
  for (Elem a : members)
    if (a < 0 || a >= ambient.n) fail(ErrKind::ValidationError, "subgroup member out of range");
  if (members.empty() || !std::binary_search(members.begin(), members.end(), ambient.identity))
    fail(ErrKind::ValidationError, "subgroup must contain the identity");
  auto in = [&](Elem a) { return std::binary_search(members.begin(), members.end(), a); };
  for (Elem a : members) {
    if (!in(ambient.inv(a)))
      fail(ErrKind::ValidationError, "subgroup not closed under inverse at " + std::to_string(a));
    for (Elem b : members)
      if (!in(ambient.mul(a, b)))
        fail(ErrKind::ValidationError, "subgroup not closed under product at (" +
                                           std::to_string(a) + "," + std::to_string(b) + ")");
  }
  return Subgroup{std::move(ambient), std::move(members)};
}

inline Subgroup trivial_subgroup(const FiniteGroup& g) {
  return make_subgroup(g, {g.identity});
}

inline Subgroup full_subgroup(const FiniteGroup& g) {
  std::vector<Elem> all(g.n);
  for (Elem a = 0; a < g.n; ++a) all[a] = a;
  return make_subgroup(g, std::move(all));
}

inline Subgroup subgroup_generated(const FiniteGroup& g, const std::vector<Elem>& gens) {
  std::vector<bool> in(g.n, false);
  std::vector<Elem> closure{g.identity};
  in[g.identity] = true;
  for (Elem a : gens) {
    if (a < 0 || a >= g.n) fail(ErrKind::ValidationError, "generator out of range");
    if (!in[a]) {
      in[a] = true;
      closure.push_back(a);
    }
  }
  bool grew = true;
  while (grew) {
    grew = false;
    const size_t sz = closure.size();
    for (size_t i = 0; i < sz; ++i)
      for (size_t j = 0; j < sz; ++j) {
        Elem p = g.mul(closure[i], closure[j]);
        if (!in[p]) {
          in[p] = true;
          closure.push_back(p);
          grew = true;
        }
      }
  }
  return make_subgroup(g, std::move(closure));
}

}  // namespace gbundles
