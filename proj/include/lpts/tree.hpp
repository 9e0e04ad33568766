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

#include <deque>

#include "lpts/core.hpp"

namespace lpts {

/// A stochastic tree together with an execution mapping into some system.
///
/// `exec_map[c]` is the system state executed by tree state c. `witness[i]`
/// is the system transition that tree transition i copies; it is a hint used
/// by projection and lifting, check_exec_map() does not rely on it.
struct StochasticTree {
  Lpts tree;
  std::vector<StateId> exec_map;
  std::vector<std::size_t> witness;

  StateId root() const { return tree.start(); }
  std::size_t size() const { return tree.num_states(); }
};

/// Tree states in breadth-first order from the root.
inline std::vector<StateId> bfs_order(const Lpts& tree) {
  std::vector<StateId> order;
  std::vector<bool> seen(tree.num_states(), false);
  std::deque<StateId> queue{tree.start()};
  seen[tree.start()] = true;
  while (!queue.empty()) {
    StateId s = queue.front();
    queue.pop_front();
    order.push_back(s);
    for (const auto& t : tree.transitions_from(s))
      for (const auto& [c, w] : t.target.entries())
        if (!seen[c]) {
          seen[c] = true;
          queue.push_back(c);
        }
  }
  return order;
}

/// Does tree transition `tt` execute system transition `st` under the map?
inline bool executes(const StochasticTree& c, const Transition& tt, const Lpts& system,
                     const Transition& st) {
  if (st.source != c.exec_map[tt.source]) return false;
  if (c.tree.action_name(tt.action) != system.action_name(st.action)) return false;
  if (tt.target.size() != st.target.size()) return false;
  std::vector<StateId> images;
  images.reserve(tt.target.size());
  for (const auto& [child, w] : tt.target.entries()) {
    const StateId image = c.exec_map[child];
    if (st.target(image) != w) return false;
    images.push_back(image);
  }
  std::sort(images.begin(), images.end());
  return std::adjacent_find(images.begin(), images.end()) == images.end();
}

/// Verifies the execution-mapping condition transition by transition: every
/// tree transition c -a-> mu_c has some M(c) -a-> mu with M injective on
/// supp(mu_c) and mu_c(c') = mu(M(c')).
inline bool check_exec_map(const StochasticTree& c, const Lpts& system) {
  if (c.exec_map.size() != c.tree.num_states()) return false;
  for (StateId m : c.exec_map)
    if (m >= system.num_states()) return false;
  for (const auto& tt : c.tree.transitions()) {
    auto a = system.find_action(c.tree.action_name(tt.action));
    if (!a) return false;
    bool found = false;
    for (std::size_t i : system.transitions_from(c.exec_map[tt.source], *a))
      if (executes(c, tt, system, system.transition(i))) {
        found = true;
        break;
      }
    if (!found) return false;
  }
  return true;
}

/// Fills in `witness` by searching the system for the executed transitions.
/// Throws when some tree transition has no matching system transition.
inline void resolve_witnesses(StochasticTree& c, const Lpts& system) {
  c.witness.assign(c.tree.num_transitions(), npos);
  for (std::size_t k = 0; k < c.tree.num_transitions(); ++k) {
    const auto& tt = c.tree.transition(k);
    auto a = system.find_action(c.tree.action_name(tt.action));
    if (a)
      for (std::size_t i : system.transitions_from(c.exec_map[tt.source], *a))
        if (executes(c, tt, system, system.transition(i))) {
          c.witness[k] = i;
          break;
        }
    if (c.witness[k] == npos)
      throw Error("tree transition " + describe_transition(c.tree, tt) +
                  " is not an execution of the system");
  }
}

/// Incremental builder for trees with path-style state names
/// ("root", "root.0", "root.0.1", ...).
class TreeBuilder {
 public:
  explicit TreeBuilder(std::vector<std::string> alphabet) : alphabet_(std::move(alphabet)) {}

  StateId add_root(StateId image) {
    names_.push_back("root");
    exec_.push_back(image);
    child_count_.push_back(0);
    return 0;
  }

  /// Adds parent -action-> { w_i : fresh child_i } and returns the children.
  std::vector<StateId> add_transition(StateId parent, ActionId action,
                                      const std::vector<std::pair<StateId, Rat>>& images,
                                      std::size_t witness) {
    std::vector<Dist::Entry> entries;
    std::vector<StateId> children;
    for (const auto& [image, w] : images) {
      const auto id = static_cast<StateId>(names_.size());
      names_.push_back(names_[parent] + "." + std::to_string(child_count_[parent]++));
      exec_.push_back(image);
      child_count_.push_back(0);
      entries.emplace_back(id, w);
      children.push_back(id);
    }
    transitions_.push_back({parent, action, Dist(std::move(entries))});
    witness_.push_back(witness);
    return children;
  }

  StochasticTree build() && {
    StochasticTree out;
    out.tree = Lpts(std::move(names_), 0, std::move(alphabet_), transitions_);
    out.exec_map = std::move(exec_);
    out.witness.assign(out.tree.num_transitions(), npos);
    for (std::size_t k = 0; k < transitions_.size(); ++k) {
      // The alphabet is already sorted, so action ids are stable.
      out.witness[out.tree.find_transition(transitions_[k])] = witness_[k];
    }
    return out;
  }

 private:
  std::vector<std::string> alphabet_;
  std::vector<std::string> names_;
  std::vector<StateId> exec_;
  std::vector<std::uint32_t> child_count_;
  std::vector<Transition> transitions_;
  std::vector<std::size_t> witness_;
};

}  // namespace lpts
