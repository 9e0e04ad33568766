/*
 * Copyright 2026 The lpts-agar Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <map>

#include "lpts/core.hpp"
#include "lpts/tree.hpp"

namespace lpts {

struct PairWeight {
  StateId left;
  StateId right;
  Rat weight;

  friend bool operator==(const PairWeight&, const PairWeight&) = default;
};

/// mu1 (x) mu2 : (s1, s2) -> mu1(s1) * mu2(s2), ordered by (s1, s2).
inline std::vector<PairWeight> product_dist(const Dist& mu1, const Dist& mu2) {
  std::vector<PairWeight> out;
  out.reserve(mu1.size() * mu2.size());
  for (const auto& [s1, w1] : mu1.entries())
    for (const auto& [s2, w2] : mu2.entries()) out.push_back({s1, s2, Rat(w1 * w2)});
  return out;
}

enum class Move { sync, left_only, right_only };

/// Which component transitions produced a composed transition. For the
/// one-sided moves the other component stalls in `stalled`.
struct Provenance {
  Move move = Move::sync;
  std::size_t left = npos;   // transition index in the left component
  std::size_t right = npos;  // transition index in the right component
  StateId stalled = 0;
};

/// L1 || L2 restricted to the pairs reachable from the start pair. Pair
/// states are numbered in (left, right) lexicographic order.
struct ComposedLpts {
  Lpts lpts;
  Lpts left;
  Lpts right;
  std::vector<std::pair<StateId, StateId>> pairs;  // composed state -> components
  std::vector<Provenance> provenance;              // per composed transition

  /// Rebuilds a composed transition's distribution from its provenance.
  std::vector<PairWeight> rederive(std::size_t transition) const {
    const Provenance& p = provenance.at(transition);
    const auto [x, y] = pairs.at(lpts.transition(transition).source);
    switch (p.move) {
      case Move::sync:
        return product_dist(left.transition(p.left).target, right.transition(p.right).target);
      case Move::left_only:
        return product_dist(left.transition(p.left).target, dirac(y));
      case Move::right_only:
        return product_dist(dirac(x), right.transition(p.right).target);
    }
    return {};
  }
};

/// Parallel composition with shared-action synchronization and interleaving
/// of actions private to one side.
inline ComposedLpts compose(const Lpts& l1, const Lpts& l2) {
  ComposedLpts out;
  out.left = l1;
  out.right = l2;
  const auto alphabet = alphabet_union(l1.alphabet(), l2.alphabet());

  struct PairTransition {
    std::pair<StateId, StateId> source;
    ActionId action;
    std::vector<PairWeight> target;
    Provenance provenance;
  };
  std::map<std::pair<StateId, StateId>, bool> seen;
  std::vector<std::pair<StateId, StateId>> queue{{l1.start(), l2.start()}};
  seen[queue.front()] = true;
  std::vector<PairTransition> pending;
  for (std::size_t head = 0; head < queue.size(); ++head) {
    const auto [x, y] = queue[head];
    for (ActionId a = 0; a < alphabet.size(); ++a) {
      const auto a1 = l1.find_action(alphabet[a]);
      const auto a2 = l2.find_action(alphabet[a]);
      const auto t1 = a1 ? l1.transitions_from(x, *a1) : std::vector<std::size_t>{};
      const auto t2 = a2 ? l2.transitions_from(y, *a2) : std::vector<std::size_t>{};
      if (a1 && a2) {
        for (std::size_t i : t1)
          for (std::size_t j : t2)
            pending.push_back({{x, y}, a,
                               product_dist(l1.transition(i).target, l2.transition(j).target),
                               {Move::sync, i, j, 0}});
      } else if (a1) {
        for (std::size_t i : t1)
          pending.push_back({{x, y}, a, product_dist(l1.transition(i).target, dirac(y)),
                             {Move::left_only, i, npos, y}});
      } else if (a2) {
        for (std::size_t j : t2)
          pending.push_back({{x, y}, a, product_dist(dirac(x), l2.transition(j).target),
                             {Move::right_only, npos, j, x}});
      }
    }
    // Enqueue successors discovered by transitions of this pair.
    for (std::size_t k = pending.size(); k-- > 0 && pending[k].source == std::pair{x, y};)
      for (const auto& pw : pending[k].target) {
        const std::pair<StateId, StateId> p{pw.left, pw.right};
        if (!seen[p]) {
          seen[p] = true;
          queue.push_back(p);
        }
      }
  }

  out.pairs = queue;
  std::sort(out.pairs.begin(), out.pairs.end());
  std::map<std::pair<StateId, StateId>, StateId> id;
  std::vector<std::string> names;
  for (const auto& p : out.pairs) {
    id[p] = static_cast<StateId>(names.size());
    names.push_back("(" + l1.state_name(p.first) + "," + l2.state_name(p.second) + ")");
  }
  std::vector<Transition> ts;
  ts.reserve(pending.size());
  for (const auto& pt : pending) {
    std::vector<Dist::Entry> entries;
    for (const auto& pw : pt.target) entries.emplace_back(id.at({pw.left, pw.right}), pw.weight);
    ts.push_back({id.at(pt.source), pt.action, Dist(std::move(entries))});
  }
  out.lpts = Lpts(std::move(names), id.at({l1.start(), l2.start()}), alphabet, ts);
  out.provenance.assign(out.lpts.num_transitions(), Provenance{});
  for (std::size_t k = 0; k < ts.size(); ++k)
    out.provenance[out.lpts.find_transition(ts[k])] = pending[k].provenance;
  return out;
}

/// The same LPTS over a larger alphabet. Throws if alpha does not contain
/// the LPTS's own alphabet.
inline Lpts widen_alphabet(const Lpts& l, std::vector<std::string> alpha) {
  alpha = sorted_alphabet(std::move(alpha));
  if (!is_subset(l.alphabet(), alpha))
    throw Error("widen_alphabet: the new alphabet does not contain the old one");
  return with_alphabet(l, std::move(alpha));
}

enum class Side { left, right };

/// Projection of a tree executing `composed` onto one component. Each tree
/// transition is replaced by the component distribution recorded in its
/// provenance; steps where the component stalls are contracted, so the
/// children of such a step share their parent's projected state. Projected
/// transitions that copy the same component transition from the same
/// projected state are merged.
inline StochasticTree project(const StochasticTree& c, const ComposedLpts& composed, Side side) {
  StochasticTree tree = c;
  if (tree.witness.size() != tree.tree.num_transitions() ||
      std::find(tree.witness.begin(), tree.witness.end(), npos) != tree.witness.end())
    resolve_witnesses(tree, composed.lpts);

  const Lpts& component = side == Side::left ? composed.left : composed.right;
  auto component_state = [&](StateId composed_state) {
    const auto& p = composed.pairs.at(composed_state);
    return side == Side::left ? p.first : p.second;
  };

  TreeBuilder builder(component.alphabet());
  std::vector<StateId> proj(tree.tree.num_states(), 0);
  std::vector<StateId> image{component_state(tree.exec_map[tree.root()])};
  proj[tree.root()] = builder.add_root(image.front());
  std::map<std::pair<StateId, std::size_t>, std::vector<StateId>> edges;

  for (StateId s : bfs_order(tree.tree)) {
    const std::size_t begin = tree.tree.first_transition(s);
    const auto out = tree.tree.transitions_from(s);
    for (std::size_t k = 0; k < out.size(); ++k) {
      const std::size_t w = tree.witness[begin + k];
      if (w >= composed.provenance.size())
        throw Error("project: tree transition without provenance");
      const Provenance& prov = composed.provenance[w];
      const std::size_t ct = side == Side::left ? prov.left : prov.right;
      if (ct == npos) {
        for (const auto& [child, p] : out[k].target.entries()) proj[child] = proj[s];
        continue;
      }
      const Transition& comp = component.transition(ct);
      if (comp.source != image[proj[s]])
        throw Error("project: provenance does not match the execution mapping");
      auto [it, fresh] = edges.try_emplace({proj[s], ct});
      if (fresh) {
        std::vector<std::pair<StateId, Rat>> entries(comp.target.entries().begin(),
                                                     comp.target.entries().end());
        it->second = builder.add_transition(proj[s], comp.action, entries, ct);
        for (const auto& e : entries) image.push_back(e.first);
      }
      for (const auto& [child, p] : out[k].target.entries()) {
        const std::size_t idx = comp.target.index_of(component_state(tree.exec_map[child]));
        if (idx == npos) throw Error("project: child outside the component distribution");
        proj[child] = it->second[idx];
      }
    }
  }
  return std::move(builder).build();
}

}  // namespace lpts
