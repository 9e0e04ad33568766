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
#include <memory>

#include "lpts/simulate.hpp"
#include "lpts/tree.hpp"

namespace lpts {

namespace detail {

// Shared, immutable tree skeleton; materialized into fresh states at the end.
struct CexNode;
using CexNodePtr = std::shared_ptr<const CexNode>;

struct CexEdge {
  std::size_t transition;           // index in L1
  std::vector<CexNodePtr> children;  // aligned with the entries of its target
};

struct CexNode {
  StateId state;
  std::vector<CexEdge> edges;  // sorted by transition
};

inline CexNodePtr leaf(StateId s) { return std::make_shared<const CexNode>(CexNode{s, {}}); }

/// Union of the behaviors of two skeletons rooted at the same L1 state.
/// Edges copying the same L1 transition are merged child by child.
inline CexNodePtr merge(const CexNodePtr& a, const CexNodePtr& b) {
  if (b->edges.empty()) return a;
  if (a->edges.empty()) return b;
  CexNode out{a->state, {}};
  std::size_t i = 0, j = 0;
  while (i < a->edges.size() || j < b->edges.size()) {
    if (j == b->edges.size() || (i < a->edges.size() && a->edges[i].transition < b->edges[j].transition)) {
      out.edges.push_back(a->edges[i++]);
    } else if (i == a->edges.size() || b->edges[j].transition < a->edges[i].transition) {
      out.edges.push_back(b->edges[j++]);
    } else {
      CexEdge e{a->edges[i].transition, {}};
      for (std::size_t k = 0; k < a->edges[i].children.size(); ++k)
        e.children.push_back(merge(a->edges[i].children[k], b->edges[j].children[k]));
      out.edges.push_back(std::move(e));
      ++i;
      ++j;
    }
  }
  return std::make_shared<const CexNode>(std::move(out));
}

class CexBuilder {
 public:
  CexBuilder(const SimRelation& sim, const Lpts& l1, const Lpts& l2)
      : sim_(sim), l1_(l1), l2_(l2) {}

  CexNodePtr build(StateId s1, StateId s2) {
    const std::size_t k = sim_.removal_index(s1, s2);
    if (k == npos) throw Error("build_cex: the pair was never removed");
    if (auto it = memo_.find(k); it != memo_.end()) return it->second;

    const RemovalRecord& rec = sim_.trace[k];
    const Dist& mu1 = l1_.transition(rec.transition).target;
    std::vector<CexNodePtr> children;
    for (const auto& [s, w] : mu1.entries()) {
      // U_s: for every mu in Delta with s in S^mu_1, the states of supp(mu)
      // outside R(S^mu_1) under the relation at removal time.
      std::vector<StateId> targets;
      for (const auto& wit : rec.witnesses) {
        if (!std::binary_search(wit.subset.begin(), wit.subset.end(), s)) continue;
        for (const auto& [t, p] : l2_.transition(wit.transition).target.entries()) {
          bool related = false;
          for (StateId x : wit.subset)
            if (sim_.in_snapshot(x, t, rec.snapshot)) {
              related = true;
              break;
            }
          if (!related) targets.push_back(t);
        }
      }
      std::sort(targets.begin(), targets.end());
      targets.erase(std::unique(targets.begin(), targets.end()), targets.end());
      CexNodePtr child = leaf(s);
      for (StateId t : targets) child = merge(child, build(s, t));
      children.push_back(std::move(child));
    }
    auto node = std::make_shared<const CexNode>(
        CexNode{s1, {CexEdge{rec.transition, std::move(children)}}});
    memo_.emplace(k, node);
    return node;
  }

 private:
  const SimRelation& sim_;
  const Lpts& l1_;
  const Lpts& l2_;
  std::map<std::size_t, CexNodePtr> memo_;
};

inline void materialize(const CexNodePtr& node, StateId at, const Lpts& l1, TreeBuilder& out) {
  for (const auto& e : node->edges) {
    const Transition& t = l1.transition(e.transition);
    std::vector<std::pair<StateId, Rat>> images(t.target.entries().begin(), t.target.entries().end());
    const auto fresh = out.add_transition(at, t.action, images, e.transition);
    for (std::size_t k = 0; k < fresh.size(); ++k) materialize(e.children[k], fresh[k], l1, out);
  }
}

}  // namespace detail

/// Stochastic-tree counterexample to s1 <= s2, built recursively from the
/// removal trace: the root copies the offending transition s1 -a-> mu1, and
/// below every s in some witness subset S^mu_1 the counterexamples for
/// (s, t), t in supp(mu) \ R(S^mu_1), are grafted. Grafts that copy the same
/// L1 transition are merged. The execution mapping sends each tree state to
/// the L1 state it copies.
inline StochasticTree build_cex(const SimRelation& sim, StateId s1, StateId s2, const Lpts& l1,
                                const Lpts& l2) {
  detail::CexBuilder builder(sim, l1, l2);
  const auto skeleton = builder.build(s1, s2);
  TreeBuilder tree(l1.alphabet());
  const StateId root = tree.add_root(s1);
  detail::materialize(skeleton, root, l1, tree);
  return std::move(tree).build();
}

/// Counterexample for the start pair; requires it to be removed in `sim`.
inline StochasticTree build_cex(const SimRelation& sim, const Lpts& l1, const Lpts& l2) {
  return build_cex(sim, l1.start(), l2.start(), l1, l2);
}

}  // namespace lpts
