#pragma once

// Twisted 1-cocycles on a stabilizer subgroup and their nonabelian H^1.
// A cocycle on Gamma_x is a map a: Gamma_x -> G with a_e = e and
// a_{gamma*sigma} = a_gamma * gamma_G(a_sigma).  G acts by twisted
// conjugation on the left, b . a_gamma = b * a_gamma * gamma_G(b)^-1, and
// H^1 is the orbit set.  Values are stored for every member of Gamma_x,
// aligned with the sorted member list; class representatives are the
// lexicographically least value vectors of their orbits.

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "gbundles/errors.hpp"
#include "gbundles/group.hpp"

namespace gbundles {

struct TwistedCocycle {
  Subgroup stab;     // subgroup of action.gamma
  AutAction action;  // Gamma acting on G
  std::vector<Elem> values;  // values[i] = a_{stab.members[i]} in G

  Elem value_at(Elem gam) const {
    int i = stab.index_of(gam);
    if (i < 0) fail(ErrKind::ValidationError, "element outside the stabilizer");
    return values[static_cast<size_t>(i)];
  }

  bool same_context(const TwistedCocycle& o) const {
    return stab == o.stab && action == o.action;
  }
};

namespace detail {

inline void check_cocycle_context(const Subgroup& stab, const AutAction& action) {
  if (!(stab.ambient == action.gamma))
    fail(ErrKind::MismatchedContext, "stabilizer is not a subgroup of the acting deck group");
}

}  // namespace detail

inline TwistedCocycle make_cocycle(Subgroup stab, AutAction action, std::vector<Elem> values) {
  detail::check_cocycle_context(stab, action);
  if (values.size() != stab.members.size())
    fail(ErrKind::ValidationError, "cocycle value vector has wrong length");
  for (Elem v : values)
    if (v < 0 || v >= action.g.n) fail(ErrKind::ValidationError, "cocycle value out of range");
  TwistedCocycle c{std::move(stab), std::move(action), std::move(values)};
  const FiniteGroup& gam = c.action.gamma;
  const FiniteGroup& g = c.action.g;
  if (c.value_at(gam.identity) != g.identity)
    fail(ErrKind::CocycleViolation, "value at the identity must be the identity");
  for (Elem a : c.stab.members)
    for (Elem b : c.stab.members) {
      Elem lhs = c.value_at(gam.mul(a, b));
      Elem rhs = g.mul(c.value_at(a), c.action.apply(a, c.value_at(b)));
      if (lhs != rhs)
        fail(ErrKind::CocycleViolation,
             "cocycle identity fails at (" + std::to_string(a) + "," + std::to_string(b) + ")");
    }
  return c;
}

inline TwistedCocycle trivial_cocycle(Subgroup stab, AutAction action) {
  detail::check_cocycle_context(stab, action);
  std::vector<Elem> values(stab.members.size(), action.g.identity);
  return make_cocycle(std::move(stab), std::move(action), std::move(values));
}

// All twisted cocycles, in ascending value-vector order.  Values are assigned
// to the least undetermined member and then closed under the cocycle identity,
// so only one choice per step of a generating chain is free.
inline std::vector<TwistedCocycle> enumerate_cocycles(const Subgroup& stab,
                                                      const AutAction& action) {
  detail::check_cocycle_context(stab, action);
  const FiniteGroup& gam = action.gamma;
  const FiniteGroup& g = action.g;
  const auto& mem = stab.members;
  const int k = static_cast<int>(mem.size());

  std::vector<std::vector<Elem>> found;
  std::vector<Elem> vals(k, -1);
  vals[static_cast<size_t>(stab.index_of(gam.identity))] = g.identity;

  auto close = [&](std::vector<Elem>& v) -> bool {
    bool changed = true;
    while (changed) {
      changed = false;
      for (int i = 0; i < k; ++i) {
        if (v[i] < 0) continue;
        for (int j = 0; j < k; ++j) {
          if (v[j] < 0) continue;
          int p = stab.index_of(gam.mul(mem[i], mem[j]));
          Elem derived = g.mul(v[i], action.apply(mem[i], v[j]));
          if (v[p] < 0) {
            v[p] = derived;
            changed = true;
          } else if (v[p] != derived) {
            return false;
          }
        }
      }
    }
    return true;
  };

  auto rec = [&](auto&& self, std::vector<Elem> v) -> void {
    if (!close(v)) return;
    int free = -1;
    for (int i = 0; i < k; ++i)
      if (v[i] < 0) {
        free = i;
        break;
      }
    if (free < 0) {
      found.push_back(std::move(v));
      return;
    }
    for (Elem cand = 0; cand < g.n; ++cand) {
      std::vector<Elem> next = v;
      next[free] = cand;
      self(self, std::move(next));
    }
  };
  rec(rec, vals);

  std::sort(found.begin(), found.end());
  std::vector<TwistedCocycle> out;
  out.reserve(found.size());
  for (auto& v : found) out.push_back(make_cocycle(stab, action, std::move(v)));
  return out;
}

inline TwistedCocycle twisted_conjugate(Elem b, const TwistedCocycle& c) {
  const FiniteGroup& g = c.action.g;
  if (b < 0 || b >= g.n) fail(ErrKind::ValidationError, "conjugating element out of range");
  std::vector<Elem> values(c.values.size());
  for (size_t i = 0; i < c.values.size(); ++i) {
    Elem gam = c.stab.members[i];
    values[i] = g.mul(g.mul(b, c.values[i]), g.inv(c.action.apply(gam, b)));
  }
  return make_cocycle(c.stab, c.action, std::move(values));
}

// First b in element order with b . c1 = c2, if any.
inline std::optional<Elem> same_class(const TwistedCocycle& c1, const TwistedCocycle& c2) {
  if (!c1.same_context(c2))
    fail(ErrKind::MismatchedContext, "cocycles live on different stabilizers or actions");
  for (Elem b = 0; b < c1.action.g.n; ++b)
    if (twisted_conjugate(b, c1).values == c2.values) return b;
  return std::nullopt;
}

inline Subgroup twisted_centralizer(const TwistedCocycle& c) {
  std::vector<Elem> members;
  for (Elem b = 0; b < c.action.g.n; ++b)
    if (twisted_conjugate(b, c).values == c.values) members.push_back(b);
  return make_subgroup(c.action.g, std::move(members));
}

struct H1Class {
  TwistedCocycle representative;  // least value vector in the orbit
  long orbit_size = 0;
};

inline std::vector<H1Class> h1_classes(const Subgroup& stab, const AutAction& action) {
  auto all = enumerate_cocycles(stab, action);
  std::map<std::vector<Elem>, int> index;
  for (int i = 0; i < static_cast<int>(all.size()); ++i) index[all[i].values] = i;

  std::vector<H1Class> classes;
  std::vector<bool> visited(all.size(), false);
  for (size_t i = 0; i < all.size(); ++i) {
    if (visited[i]) continue;
    std::vector<int> orbit{static_cast<int>(i)};
    visited[i] = true;
    for (size_t q = 0; q < orbit.size(); ++q)
      for (Elem b = 0; b < action.g.n; ++b) {
        auto moved = twisted_conjugate(b, all[static_cast<size_t>(orbit[q])]);
        int j = index.at(moved.values);
        if (!visited[static_cast<size_t>(j)]) {
          visited[static_cast<size_t>(j)] = true;
          orbit.push_back(j);
        }
      }
    // Enumeration is sorted, so the first unvisited cocycle is its orbit's least.
    classes.push_back(H1Class{all[i], static_cast<long>(orbit.size())});
  }
  return classes;
}

// Cached orbit decomposition keyed by value vector, for bulk local-type work.
struct CocycleClassifier {
  std::vector<H1Class> classes;
  std::map<std::vector<Elem>, int> class_index;  // value vector -> position in classes

  int class_of(const std::vector<Elem>& values) const {
    auto it = class_index.find(values);
    if (it == class_index.end())
      fail(ErrKind::ValidationError, "value vector is not a cocycle for this classifier");
    return it->second;
  }
};

inline CocycleClassifier make_classifier(const Subgroup& stab, const AutAction& action) {
  CocycleClassifier cl;
  cl.classes = h1_classes(stab, action);
  for (int k = 0; k < static_cast<int>(cl.classes.size()); ++k) {
    const auto& rep = cl.classes[static_cast<size_t>(k)].representative;
    std::vector<std::vector<Elem>> orbit{rep.values};
    std::map<std::vector<Elem>, bool> seen{{rep.values, true}};
    for (size_t q = 0; q < orbit.size(); ++q)
      for (Elem b = 0; b < action.g.n; ++b) {
        auto moved = twisted_conjugate(b, make_cocycle(stab, action, orbit[q]));
        if (!seen.count(moved.values)) {
          seen[moved.values] = true;
          orbit.push_back(moved.values);
        }
      }
    for (auto& v : orbit) cl.class_index[v] = k;
  }
  return cl;
}

}  // namespace gbundles
