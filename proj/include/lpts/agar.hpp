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

#include <set>

#include "lpts/compose.hpp"
#include "lpts/refine.hpp"

namespace lpts {

struct AgarStats {
  std::size_t largest_composed = 0;    // max |L1 || A1| over the run
  std::size_t largest_assumption = 0;  // max |A_i| over the run
  std::vector<std::size_t> refinements;  // per level
  std::size_t iterations = 0;
  // Premise-1 checks whose assumption was the identity quotient of the
  // concrete right-hand side, i.e. effectively L1 || L2.
  std::size_t concrete_compositions = 0;
};

struct AgarOptions {
  /// Re-verify premise 2 after every rebuild and every lifted tree's
  /// execution mapping; violations throw std::logic_error.
  bool check_invariants = false;
};

struct AgarResult {
  bool holds = false;
  std::optional<StochasticTree> counterexample;  // executes `counterexample_system`
  Lpts counterexample_system;                    // L1 || A1 at the time of failure
  std::optional<StochasticTree> left_projection;
  std::optional<StochasticTree> right_projection;
  Lpts spec;                        // the completed specification
  std::vector<Lpts> assumptions;    // final A_1 .. A_{n-1}
  std::vector<Partition> partitions;
  AgarStats stats;
  std::vector<IterationRecord> log;
};

/// Tree with the shape of `c` lifted along the strong simulation `r` into
/// `target`. Each lifted node pairs a target state with the tree states it
/// covers; every tree transition of a covered state is matched by the first
/// target transition (in id order) whose distribution satisfies the lifting
/// by r, and lifted transitions copying the same target transition merge.
inline StochasticTree lift_tree(const StochasticTree& c, const Relation& r, const Lpts& target) {
  if (r.rows() != c.tree.num_states() || r.cols() != target.num_states())
    throw Error("lift_tree: relation has the wrong shape");
  if (!r.contains(c.root(), target.start()))
    throw Error("lift_tree: the root is not related to the start state");
  if (!is_strong_simulation(c.tree, target, r))
    throw Error("lift_tree: relation is not a strong simulation");
  const auto amap = action_map(c.tree, target);

  struct Pending {
    StateId node;
    StateId image;
    std::vector<StateId> sources;
  };
  TreeBuilder builder(target.alphabet());
  std::deque<Pending> queue{{builder.add_root(target.start()), target.start(), {c.root()}}};
  while (!queue.empty()) {
    Pending cur = std::move(queue.front());
    queue.pop_front();
    // target transition -> per child image, the covered tree states
    std::map<std::size_t, std::map<StateId, std::set<StateId>>> matched;
    for (StateId s : cur.sources)
      for (const auto& t : c.tree.transitions_from(s)) {
        bool found = false;
        for (std::size_t j : target.transitions_from(cur.image, *amap[t.action])) {
          const auto leq = dist_leq(t.target, target.transition(j).target, r);
          if (!leq.holds) continue;
          auto& children = matched[j];
          const auto w = leq.weights();
          for (const auto& [x, p] : target.transition(j).target.entries()) {
            auto& covered = children[x];
            for (const auto& [child, q] : t.target.entries())
              if (w(child, x) > 0) covered.insert(child);
          }
          found = true;
          break;
        }
        if (!found) throw std::logic_error("lift_tree: unmatched transition in a verified simulation");
      }
    for (auto& [j, children] : matched) {
      const Transition& tt = target.transition(j);
      std::vector<std::pair<StateId, Rat>> entries(tt.target.entries().begin(), tt.target.entries().end());
      const auto fresh = builder.add_transition(cur.node, tt.action, entries, j);
      for (std::size_t k = 0; k < fresh.size(); ++k) {
        const auto& covered = children[entries[k].first];
        queue.push_back({fresh[k], entries[k].first, {covered.begin(), covered.end()}});
      }
    }
  }
  return std::move(builder).build();
}

inline StochasticTree lift_tree(const StochasticTree& c, const Relation& r, const ComposedLpts& target) {
  return lift_tree(c, r, target.lpts);
}

namespace detail {

inline void record_stats(AgarStats& stats, const ComposedLpts& top, const Lpts& a) {
  stats.largest_composed = std::max(stats.largest_composed, top.lpts.num_states());
  stats.largest_assumption = std::max(stats.largest_assumption, a.num_states());
}

inline void require_premise(const Lpts& x, const Lpts& a, const AgarOptions& opts) {
  if (opts.check_invariants && !holds(x, a))
    throw std::logic_error("agar: assumption does not simulate the structure it abstracts");
}

}  // namespace detail

/// L1 || L2 <= P with rule ASym. The assumption A is a quotient of L2, so
/// L2 <= A holds throughout; premise 1 is checked and its counterexamples
/// refine A through their projection onto A.
inline AgarResult agar2(const Lpts& l1, const Lpts& l2, const Lpts& p, AgarOptions opts = {}) {
  require_valid(l1, "first component");
  require_valid(l2, "second component");
  require_valid(p, "specification");
  AgarResult out;
  out.spec = complete_spec(p, alphabet_union(alphabet_union(l1.alphabet(), l2.alphabet()), p.alphabet()));
  out.stats.refinements.assign(1, 0);
  Partition pi = Partition::coarsest(l2.num_states());
  for (std::size_t iteration = 0;; ++iteration) {
    const Lpts a = quotient(l2, pi);
    detail::require_premise(l2, a, opts);
    const ComposedLpts top = compose(l1, a);
    detail::record_stats(out.stats, top, a);
    if (pi.num_classes() == l2.num_states()) ++out.stats.concrete_compositions;
    out.stats.iterations = iteration + 1;
    out.assumptions = {a};
    out.partitions = {pi};

    IterationRecord rec;
    rec.iteration = iteration;
    rec.abstraction_states = a.num_states();
    rec.composed_states = top.lpts.num_states();
    rec.abstracted_states = l2.num_states();
    rec.classes_before = pi.num_classes();
    rec.classes_after = pi.num_classes();
    rec.epoch_refinements = out.stats.refinements[0];

    const auto sim = coarsest_simulation(top.lpts, out.spec, {.stop_at_start = true});
    if (sim.pairs.contains(top.lpts.start(), out.spec.start())) {
      rec.premise_holds = true;
      rec.outcome = "holds";
      out.log.push_back(std::move(rec));
      out.holds = true;
      return out;
    }
    auto c = build_cex(sim, top.lpts, out.spec);
    auto right = project(c, top, Side::right);
    auto verdict = analyze_and_refine(right, a, l2, pi);
    rec.splits = verdict.splits;
    if (!verdict.spurious) {
      rec.outcome = "real";
      out.log.push_back(std::move(rec));
      out.left_projection = project(c, top, Side::left);
      out.right_projection = std::move(right);
      out.counterexample = std::move(c);
      out.counterexample_system = top.lpts;
      return out;
    }
    pi = std::move(verdict.partition);
    ++out.stats.refinements[0];
    rec.outcome = "spurious";
    rec.classes_after = pi.num_classes();
    rec.epoch_refinements = out.stats.refinements[0];
    out.log.push_back(std::move(rec));
  }
}

/// L1 || ... || Ln <= P with rule ASym-N: A_i abstracts X_i = L_{i+1} || A_{i+1}
/// (X_{n-1} = Ln), and premise 1 is L1 || A1 <= P. A counterexample found at
/// the top is analyzed level by level; when it is real for A_i it is lifted
/// into X_i and projected onto A_{i+1}. Refining A_i resets A_1 .. A_{i-1}
/// to their coarsest partitions.
inline AgarResult agar_n(const std::vector<Lpts>& components, const Lpts& p, AgarOptions opts = {}) {
  const std::size_t n = components.size();
  if (n < 2) throw Error("agar_n: at least two components are required");
  for (const auto& l : components) require_valid(l, "component");
  require_valid(p, "specification");

  AgarResult out;
  std::vector<std::string> alpha = p.alphabet();
  for (const auto& l : components) alpha = alphabet_union(alpha, l.alphabet());
  out.spec = complete_spec(p, alpha);

  const std::size_t levels = n - 1;
  std::vector<std::optional<Partition>> pi(levels);
  std::vector<std::size_t> epoch(levels, 0);
  out.stats.refinements.assign(levels, 0);
  std::vector<Lpts> x(levels), a(levels);
  std::vector<std::optional<ComposedLpts>> xc(levels);

  for (std::size_t iteration = 0;; ++iteration) {
    for (std::size_t i = levels; i-- > 0;) {
      if (i == levels - 1) {
        x[i] = components[n - 1];
      } else {
        xc[i] = compose(components[i + 1], a[i + 1]);
        x[i] = xc[i]->lpts;
      }
      if (!pi[i]) pi[i] = Partition::coarsest(x[i].num_states());
      a[i] = quotient(x[i], *pi[i]);
      detail::require_premise(x[i], a[i], opts);
      out.stats.largest_assumption = std::max(out.stats.largest_assumption, a[i].num_states());
    }
    const ComposedLpts top = compose(components[0], a[0]);
    detail::record_stats(out.stats, top, a[0]);
    bool concrete = true;
    for (std::size_t i = 0; i < levels; ++i) concrete = concrete && pi[i]->num_classes() == x[i].num_states();
    if (concrete) ++out.stats.concrete_compositions;
    out.stats.iterations = iteration + 1;
    out.assumptions = a;
    out.partitions.clear();
    for (const auto& q : pi) out.partitions.push_back(*q);

    IterationRecord rec;
    rec.iteration = iteration;
    rec.abstraction_states = a[0].num_states();
    rec.composed_states = top.lpts.num_states();
    rec.abstracted_states = x[0].num_states();
    rec.classes_before = pi[0]->num_classes();
    rec.classes_after = rec.classes_before;
    rec.epoch_refinements = epoch[0];

    const auto sim = coarsest_simulation(top.lpts, out.spec, {.stop_at_start = true});
    if (sim.pairs.contains(top.lpts.start(), out.spec.start())) {
      rec.premise_holds = true;
      rec.outcome = "holds";
      out.log.push_back(std::move(rec));
      out.holds = true;
      return out;
    }
    auto c = build_cex(sim, top.lpts, out.spec);
    StochasticTree t = project(c, top, Side::right);
    for (std::size_t i = 0; i < levels; ++i) {
      auto verdict = analyze_and_refine(t, a[i], x[i], *pi[i]);
      rec.level = i;
      rec.abstraction_states = a[i].num_states();
      rec.abstracted_states = x[i].num_states();
      rec.classes_before = pi[i]->num_classes();
      rec.classes_after = rec.classes_before;
      rec.splits = verdict.splits;
      if (verdict.spurious) {
        pi[i] = std::move(verdict.partition);
        ++out.stats.refinements[i];
        ++epoch[i];
        for (std::size_t j = 0; j < i; ++j) {
          pi[j].reset();
          epoch[j] = 0;
        }
        rec.outcome = "spurious";
        rec.classes_after = pi[i]->num_classes();
        rec.epoch_refinements = epoch[i];
        out.log.push_back(std::move(rec));
        break;
      }
      if (i == levels - 1) {
        rec.outcome = "real";
        rec.epoch_refinements = epoch[i];
        out.log.push_back(std::move(rec));
        out.left_projection = project(c, top, Side::left);
        out.right_projection = project(c, top, Side::right);
        out.counterexample = std::move(c);
        out.counterexample_system = top.lpts;
        return out;
      }
      auto lifted = lift_tree(t, verdict.relation, *xc[i]);
      if (opts.check_invariants && !check_exec_map(lifted, x[i]))
        throw std::logic_error("agar_n: lifted tree is not an execution");
      rec.outcome = "lifted";
      rec.epoch_refinements = epoch[i];
      out.log.push_back(rec);
      rec.splits.clear();
      t = project(lifted, *xc[i], Side::right);
    }
  }
}

}  // namespace lpts
