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
#include <functional>
#include <tuple>

#include "lpts/core.hpp"
#include "lpts/tree.hpp"

namespace lpts {

/// Binary relation over S1 x S2, stored as a dense bit matrix.
class Relation {
 public:
  Relation() = default;
  Relation(std::size_t rows, std::size_t cols, bool full = false)
      : rows_(rows), cols_(cols), bits_(rows * cols, full ? 1 : 0) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  bool contains(StateId a, StateId b) const { return bits_[a * cols_ + b] != 0; }
  bool operator()(StateId a, StateId b) const { return contains(a, b); }
  void insert(StateId a, StateId b) { bits_[a * cols_ + b] = 1; }
  void erase(StateId a, StateId b) { bits_[a * cols_ + b] = 0; }

  std::vector<StateId> image(StateId a) const {
    std::vector<StateId> out;
    for (std::size_t b = 0; b < cols_; ++b)
      if (bits_[a * cols_ + b]) out.push_back(static_cast<StateId>(b));
    return out;
  }

  bool row_empty(StateId a) const {
    for (std::size_t b = 0; b < cols_; ++b)
      if (bits_[a * cols_ + b]) return false;
    return true;
  }

  std::size_t count() const {
    return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), 1));
  }

  friend bool operator==(const Relation&, const Relation&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<std::uint8_t> bits_;
};

// ---------------------------------------------------------------------------
// mu1 <=_R mu2 via exact maxflow
// ---------------------------------------------------------------------------

/// A maximal flow of the network source -> supp(mu1) -> supp(mu2) -> sink,
/// restricted to the middle edges.
struct FlowFn {
  std::vector<StateId> left;   // supp(mu1), ascending
  std::vector<StateId> right;  // supp(mu2), ascending
  std::vector<Rat> flow;       // left.size() x right.size()
  Rat value;

  const Rat& at(std::size_t i, std::size_t j) const { return flow[i * right.size() + j]; }

  Rat outflow(std::size_t i) const {
    Rat sum = 0;
    for (std::size_t j = 0; j < right.size(); ++j) sum += at(i, j);
    return sum;
  }
};

/// Weight function w : S1 x S2 -> Q, positive entries only.
struct WeightFn {
  std::vector<std::tuple<StateId, StateId, Rat>> entries;

  Rat operator()(StateId s1, StateId s2) const {
    for (const auto& [a, b, w] : entries)
      if (a == s1 && b == s2) return w;
    return 0;
  }
};

struct DistLeq {
  bool holds = false;
  FlowFn flow;

  WeightFn weights() const {
    WeightFn w;
    for (std::size_t i = 0; i < flow.left.size(); ++i)
      for (std::size_t j = 0; j < flow.right.size(); ++j)
        if (sgn(flow.at(i, j)) > 0) w.entries.emplace_back(flow.left[i], flow.right[j], flow.at(i, j));
    return w;
  }
};

namespace detail {

/// Edmonds-Karp on a small network with exact capacities. Edges are
/// explored in insertion order, which makes the resulting flow deterministic.
class FlowNetwork {
 public:
  explicit FlowNetwork(std::size_t nodes) : adj_(nodes) {}

  /// Returns a handle for reading the flow on this edge later.
  std::pair<std::size_t, std::size_t> add_edge(std::size_t from, std::size_t to, const Rat& cap) {
    adj_[from].push_back({to, cap, cap, adj_[to].size()});
    adj_[to].push_back({from, Rat(0), Rat(0), adj_[from].size() - 1});
    return {from, adj_[from].size() - 1};
  }

  Rat flow_on(std::pair<std::size_t, std::size_t> edge) const {
    const auto& e = adj_[edge.first][edge.second];
    return e.capacity - e.residual;
  }

  Rat max_flow(std::size_t source, std::size_t sink) {
    Rat total = 0;
    std::vector<std::pair<std::size_t, std::size_t>> parent(adj_.size());
    while (true) {
      std::fill(parent.begin(), parent.end(), std::pair{npos, npos});
      parent[source] = {source, npos};
      std::deque<std::size_t> queue{source};
      while (!queue.empty() && parent[sink].first == npos) {
        std::size_t u = queue.front();
        queue.pop_front();
        for (std::size_t k = 0; k < adj_[u].size(); ++k) {
          const auto& e = adj_[u][k];
          if (parent[e.to].first == npos && sgn(e.residual) > 0) {
            parent[e.to] = {u, k};
            queue.push_back(e.to);
          }
        }
      }
      if (parent[sink].first == npos) return total;
      Rat bottleneck = -1;
      for (std::size_t v = sink; v != source; v = parent[v].first) {
        const auto& e = adj_[parent[v].first][parent[v].second];
        if (bottleneck < 0 || e.residual < bottleneck) bottleneck = e.residual;
      }
      for (std::size_t v = sink; v != source; v = parent[v].first) {
        auto& e = adj_[parent[v].first][parent[v].second];
        e.residual -= bottleneck;
        adj_[v][e.rev].residual += bottleneck;
      }
      total += bottleneck;
    }
  }

 private:
  struct Edge {
    std::size_t to;
    Rat capacity;
    Rat residual;
    std::size_t rev;
  };
  std::vector<std::vector<Edge>> adj_;
};

}  // namespace detail

/// Decides mu1 <=_R mu2: the maxflow of the network source -> supp(mu1)
/// (capacity mu1(s)) -> supp(mu2) along R (capacity 1) -> sink (capacity
/// mu2(t)) equals 1 exactly. `related(s1, s2)` is the relation R.
template <typename Rel>
DistLeq dist_leq(const Dist& mu1, const Dist& mu2, const Rel& related) {
  DistLeq out;
  FlowFn& f = out.flow;
  f.left = mu1.support();
  f.right = mu2.support();
  const std::size_t n1 = f.left.size(), n2 = f.right.size();
  const std::size_t source = 0, sink = n1 + n2 + 1;
  detail::FlowNetwork net(n1 + n2 + 2);
  for (std::size_t i = 0; i < n1; ++i) net.add_edge(source, 1 + i, mu1.entries()[i].second);
  std::vector<std::pair<std::size_t, std::size_t>> middle(n1 * n2, {npos, npos});
  for (std::size_t i = 0; i < n1; ++i)
    for (std::size_t j = 0; j < n2; ++j)
      if (related(f.left[i], f.right[j])) middle[i * n2 + j] = net.add_edge(1 + i, 1 + n1 + j, Rat(1));
  for (std::size_t j = 0; j < n2; ++j) net.add_edge(1 + n1 + j, sink, mu2.entries()[j].second);
  f.value = net.max_flow(source, sink);
  f.flow.assign(n1 * n2, Rat(0));
  for (std::size_t k = 0; k < middle.size(); ++k)
    if (middle[k].first != npos) f.flow[k] = net.flow_on(middle[k]);
  out.holds = (f.value == 1);
  return out;
}

/// A subset T of supp(mu1) with mu1(T) > mu(R(T)), grown from a state whose
/// outgoing flow is deficient by following flow edges backwards from R(T).
/// `flow` must be a maximal flow for (mu1, mu, R) whose value is below 1.
template <typename Rel>
std::vector<StateId> witness_subset(const Dist& mu1, const Dist& mu, const Rel& related,
                                    const FlowFn& flow) {
  const std::size_t n1 = flow.left.size(), n2 = flow.right.size();
  std::vector<bool> in_t(n1, false);
  for (std::size_t i = 0; i < n1; ++i)
    if (mu1(flow.left[i]) > flow.outflow(i)) {
      in_t[i] = true;
      break;
    }
  if (std::find(in_t.begin(), in_t.end(), true) == in_t.end())
    throw Error("witness_subset: no deficient state; the flow saturates mu1");

  while (true) {
    std::vector<bool> in_image(n2, false);
    Rat t_mass = 0, image_mass = 0;
    for (std::size_t i = 0; i < n1; ++i) {
      if (!in_t[i]) continue;
      t_mass += mu1(flow.left[i]);
      for (std::size_t j = 0; j < n2; ++j)
        if (related(flow.left[i], flow.right[j])) in_image[j] = true;
    }
    for (std::size_t j = 0; j < n2; ++j)
      if (in_image[j]) image_mass += mu(flow.right[j]);
    if (t_mass > image_mass) {
      std::vector<StateId> out;
      for (std::size_t i = 0; i < n1; ++i)
        if (in_t[i]) out.push_back(flow.left[i]);
      return out;
    }
    bool grew = false;
    for (std::size_t i = 0; i < n1; ++i) {
      if (in_t[i]) continue;
      for (std::size_t j = 0; j < n2; ++j)
        if (in_image[j] && sgn(flow.at(i, j)) > 0) {
          in_t[i] = true;
          grew = true;
          break;
        }
    }
    if (!grew) throw Error("witness_subset: flow is not maximal");
  }
}

// ---------------------------------------------------------------------------
// Coarsest strong simulation
// ---------------------------------------------------------------------------

/// For one mu in Delta = { mu | s2 -a-> mu }: the index of s2 -a-> mu in L2
/// and the witness subset S^mu_1 of supp(mu1).
struct WitnessRecord {
  std::size_t transition = npos;
  std::vector<StateId> subset;
};

/// Why (s1, s2) was removed: s1 -a-> mu1 (index `transition` in L1) is
/// matched by no a-transition of s2. `snapshot` is the number of removals
/// that preceded this one; the relation at removal time is S1 x S2 minus
/// trace[0 .. snapshot).
struct RemovalRecord {
  StateId s1 = 0;
  StateId s2 = 0;
  std::size_t transition = npos;
  std::vector<WitnessRecord> witnesses;
  std::size_t snapshot = 0;
};

struct SimRelation {
  Relation pairs;
  std::vector<RemovalRecord> trace;
  bool fixed_point = false;

  /// Position of (s1, s2) in the trace, or npos if it was never removed.
  std::size_t removal_index(StateId s1, StateId s2) const {
    return removed_at[s1 * pairs.cols() + s2];
  }

  /// Membership in the relation as it was after `snapshot` removals.
  bool in_snapshot(StateId s1, StateId s2, std::size_t snapshot) const {
    const std::size_t k = removal_index(s1, s2);
    return k == npos || k >= snapshot;
  }

  Relation snapshot(std::size_t k) const {
    Relation r(pairs.rows(), pairs.cols(), true);
    for (std::size_t i = 0; i < k && i < trace.size(); ++i) r.erase(trace[i].s1, trace[i].s2);
    return r;
  }

  std::vector<std::size_t> removed_at;
};

struct SimOptions {
  /// Stop as soon as the pair of start states is removed.
  bool stop_at_start = false;
};

namespace detail {

inline std::vector<std::vector<StateId>> predecessors(const Lpts& l) {
  std::vector<std::vector<StateId>> pred(l.num_states());
  for (const auto& t : l.transitions())
    for (const auto& [s, w] : t.target.entries())
      if (pred[s].empty() || pred[s].back() != t.source) pred[s].push_back(t.source);
  for (auto& p : pred) {
    std::sort(p.begin(), p.end());
    p.erase(std::unique(p.begin(), p.end()), p.end());
  }
  return pred;
}

/// Checks the strong-simulation condition for (s1, s2) under `rel`; returns
/// the removal record of the first violated transition of s1.
inline std::optional<RemovalRecord> find_violation(const Lpts& l1, const Lpts& l2,
                                                   const std::vector<std::optional<ActionId>>& amap,
                                                   StateId s1, StateId s2, const Relation& rel) {
  const std::size_t begin = l1.first_transition(s1);
  const auto out = l1.transitions_from(s1);
  for (std::size_t k = 0; k < out.size(); ++k) {
    const Transition& t = out[k];
    std::vector<std::size_t> delta;
    if (amap[t.action]) delta = l2.transitions_from(s2, *amap[t.action]);
    std::vector<DistLeq> failures;
    bool matched = false;
    for (std::size_t j : delta) {
      DistLeq r = dist_leq(t.target, l2.transition(j).target, rel);
      if (r.holds) {
        matched = true;
        break;
      }
      failures.push_back(std::move(r));
    }
    if (matched) continue;
    RemovalRecord rec;
    rec.s1 = s1;
    rec.s2 = s2;
    rec.transition = begin + k;
    for (std::size_t m = 0; m < delta.size(); ++m)
      rec.witnesses.push_back(
          {delta[m], witness_subset(t.target, l2.transition(delta[m]).target, rel, failures[m].flow)});
    return rec;
  }
  return std::nullopt;
}

}  // namespace detail

/// Greatest fixed point: R starts as S1 x S2 and violating pairs are removed
/// one at a time, scanning pairs in lexicographic order and restarting the
/// scan after each removal. Every removal is recorded with its witnesses.
///
/// A pair that passed its check is only rechecked after some pair among its
/// successors was removed; this yields the same removal sequence as a full
/// rescan.
inline SimRelation coarsest_simulation(const Lpts& l1, const Lpts& l2, SimOptions opts = {}) {
  const std::size_t n1 = l1.num_states(), n2 = l2.num_states();
  SimRelation out;
  out.pairs = Relation(n1, n2, true);
  out.removed_at.assign(n1 * n2, npos);
  const auto amap = action_map(l1, l2);
  const auto pred1 = detail::predecessors(l1);
  const auto pred2 = detail::predecessors(l2);
  std::vector<std::uint8_t> dirty(n1 * n2, 1);
  for (std::size_t s1 = 0; s1 < n1; ++s1)
    if (l1.transitions_from(static_cast<StateId>(s1)).empty())
      std::fill_n(dirty.begin() + static_cast<std::ptrdiff_t>(s1 * n2), n2, 0);

  while (true) {
    std::optional<RemovalRecord> removed;
    for (std::size_t k = 0; k < n1 * n2 && !removed; ++k) {
      if (!dirty[k]) continue;
      dirty[k] = 0;
      const auto s1 = static_cast<StateId>(k / n2), s2 = static_cast<StateId>(k % n2);
      if (!out.pairs.contains(s1, s2)) continue;
      removed = detail::find_violation(l1, l2, amap, s1, s2, out.pairs);
    }
    if (!removed) {
      out.fixed_point = true;
      return out;
    }
    const StateId x = removed->s1, y = removed->s2;
    removed->snapshot = out.trace.size();
    out.pairs.erase(x, y);
    out.removed_at[x * n2 + y] = out.trace.size();
    out.trace.push_back(std::move(*removed));
    for (StateId p1 : pred1[x])
      for (StateId p2 : pred2[y])
        if (out.pairs.contains(p1, p2)) dirty[p1 * n2 + p2] = 1;
    if (opts.stop_at_start && x == l1.start() && y == l2.start()) return out;
  }
}

/// L1 <= L2: the start pair survives in the coarsest strong simulation.
inline bool holds(const Lpts& l1, const Lpts& l2) {
  return coarsest_simulation(l1, l2, {.stop_at_start = true}).pairs.contains(l1.start(), l2.start());
}

/// Whether `rel` is a strong simulation between l1 and l2.
inline bool is_strong_simulation(const Lpts& l1, const Lpts& l2, const Relation& rel) {
  const auto amap = action_map(l1, l2);
  for (std::size_t s1 = 0; s1 < l1.num_states(); ++s1)
    for (StateId s2 : rel.image(static_cast<StateId>(s1)))
      if (detail::find_violation(l1, l2, amap, static_cast<StateId>(s1), s2, rel)) return false;
  return true;
}

// ---------------------------------------------------------------------------
// Bottom-up simulation for trees
// ---------------------------------------------------------------------------

/// One iteration of the tree algorithm: transition `transition` of tree
/// state `state` was processed; `before`/`after` are R(state) around it.
/// Rows of other states do not change within an iteration.
struct TreeIteration {
  StateId state = 0;
  std::size_t transition = npos;
  std::vector<StateId> before;
  std::vector<StateId> after;
};

struct TreeSimResult {
  Relation relation;
  std::vector<TreeIteration> log;
  bool stopped = false;
};

/// Runs the bottom-up algorithm from r0. After each iteration `observer` is
/// called with the iteration and the current relation; returning true stops
/// the run.
template <typename Observer>
TreeSimResult tree_simulation(const Lpts& tree, const Lpts& l, Relation r0, Observer&& observer) {
  if (!is_tree(tree)) throw Error("tree_simulation: the first argument is not a stochastic tree");
  if (r0.rows() != tree.num_states() || r0.cols() != l.num_states())
    throw Error("tree_simulation: initial relation has the wrong shape");
  TreeSimResult out;
  out.relation = std::move(r0);
  Relation& rel = out.relation;
  const auto amap = action_map(tree, l);
  auto order = bfs_order(tree);
  std::reverse(order.begin(), order.end());
  for (StateId s1 : order) {
    const std::size_t begin = tree.first_transition(s1);
    const auto out_transitions = tree.transitions_from(s1);
    for (std::size_t k = 0; k < out_transitions.size(); ++k) {
      const Transition& t = out_transitions[k];
      TreeIteration it{s1, begin + k, rel.image(s1), {}};
      for (StateId s2 : it.before) {
        bool matched = false;
        if (amap[t.action])
          for (std::size_t j : l.transitions_from(s2, *amap[t.action]))
            if (dist_leq(t.target, l.transition(j).target, rel).holds) {
              matched = true;
              break;
            }
        if (!matched) rel.erase(s1, s2);
      }
      it.after = rel.image(s1);
      out.log.push_back(it);
      if (observer(out.log.back(), static_cast<const Relation&>(rel))) {
        out.stopped = true;
        return out;
      }
    }
  }
  return out;
}

inline TreeSimResult tree_simulation(const Lpts& tree, const Lpts& l, Relation r0) {
  return tree_simulation(tree, l, std::move(r0), [](const TreeIteration&, const Relation&) { return false; });
}

}  // namespace lpts
