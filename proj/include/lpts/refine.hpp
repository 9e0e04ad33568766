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

#include <optional>

#include "lpts/cex.hpp"
#include "lpts/simulate.hpp"
#include "lpts/tree.hpp"

namespace lpts {

/// Partition of the states 0..n-1 into nonempty classes. Class ids are
/// canonical: classes are numbered in order of their smallest member.
class Partition {
 public:
  Partition() = default;

  explicit Partition(const std::vector<std::uint32_t>& labels) : class_of_(labels.size()) {
    std::vector<std::uint32_t> renumber;
    std::vector<std::uint32_t> seen_label;
    for (std::size_t s = 0; s < labels.size(); ++s) {
      auto it = std::find(seen_label.begin(), seen_label.end(), labels[s]);
      if (it == seen_label.end()) {
        seen_label.push_back(labels[s]);
        class_of_[s] = static_cast<std::uint32_t>(seen_label.size() - 1);
      } else {
        class_of_[s] = static_cast<std::uint32_t>(it - seen_label.begin());
      }
    }
    num_classes_ = seen_label.size();
  }

  static Partition coarsest(std::size_t n) { return Partition(std::vector<std::uint32_t>(n, 0)); }

  static Partition discrete(std::size_t n) {
    std::vector<std::uint32_t> labels(n);
    for (std::size_t s = 0; s < n; ++s) labels[s] = static_cast<std::uint32_t>(s);
    return Partition(labels);
  }

  std::size_t num_states() const { return class_of_.size(); }
  std::size_t num_classes() const { return num_classes_; }
  std::uint32_t class_of(StateId s) const { return class_of_.at(s); }
  const std::vector<std::uint32_t>& labels() const { return class_of_; }

  std::vector<StateId> members(std::uint32_t c) const {
    std::vector<StateId> out;
    for (std::size_t s = 0; s < class_of_.size(); ++s)
      if (class_of_[s] == c) out.push_back(static_cast<StateId>(s));
    return out;
  }

  std::vector<std::vector<StateId>> classes() const {
    std::vector<std::vector<StateId>> out(num_classes_);
    for (std::size_t s = 0; s < class_of_.size(); ++s) out[class_of_[s]].push_back(static_cast<StateId>(s));
    return out;
  }

  /// Splits every current class inside `region` into its members in `part`
  /// and the rest. Classes entirely on one side stay whole.
  Partition split(const std::vector<StateId>& region, const std::vector<StateId>& part) const {
    std::vector<std::uint32_t> labels = class_of_;
    std::vector<bool> inside(class_of_.size(), false);
    for (StateId s : part) inside[s] = true;
    for (StateId s : region)
      if (!inside[s]) labels[s] = static_cast<std::uint32_t>(labels[s] + num_classes_);
    return Partition(labels);
  }

  /// Every class of *this is contained in a class of `other`, and *this has
  /// more classes.
  bool strictly_finer_than(const Partition& other) const {
    if (other.num_states() != num_states() || num_classes_ <= other.num_classes_) return false;
    std::vector<std::int64_t> owner(num_classes_, -1);
    for (std::size_t s = 0; s < class_of_.size(); ++s) {
      auto& o = owner[class_of_[s]];
      if (o == -1) o = other.class_of_[s];
      else if (o != other.class_of_[s]) return false;
    }
    return true;
  }

  friend bool operator==(const Partition&, const Partition&) = default;

 private:
  std::vector<std::uint32_t> class_of_;
  std::size_t num_classes_ = 0;
};

/// L / Pi: one state per class ("c<k>"), each transition of a member lifted
/// by summing its mass per class. Identical lifted transitions collapse.
inline Lpts quotient(const Lpts& l, const Partition& pi) {
  if (pi.num_states() != l.num_states()) throw Error("quotient: partition size mismatch");
  std::vector<std::string> names;
  for (std::size_t c = 0; c < pi.num_classes(); ++c) names.push_back("c" + std::to_string(c));
  std::vector<Transition> ts;
  ts.reserve(l.num_transitions());
  for (const auto& t : l.transitions()) {
    std::vector<Dist::Entry> lifted;
    for (const auto& [s, w] : t.target.entries()) lifted.emplace_back(pi.class_of(s), w);
    ts.push_back({pi.class_of(t.source), t.action, Dist(std::move(lifted))});
  }
  return Lpts(std::move(names), pi.class_of(l.start()), l.alphabet(), std::move(ts));
}

enum class SplitCause { no_match, lost_start };

struct SplitRecord {
  SplitCause cause = SplitCause::no_match;
  std::vector<StateId> klass;  // the class being split (members in L)
  std::vector<StateId> part;   // the side split off
};

struct RefinementOutcome {
  bool spurious = false;
  Partition partition;  // the refined partition when spurious, else the input
  Relation relation;    // final R between the tree and L (a strong simulation when real)
  std::vector<SplitRecord> splits;
  std::size_t iterations = 0;
};

/// Decides whether a tree executing A = L / Pi is also executable by L.
///
/// Runs the bottom-up tree algorithm from R_M = { (c, s) | s in M(c) } and
/// watches each iteration on s1 -a-> mu1 (R_old = the row before it):
///  1. R(s1) is empty: split M(s1) into R_old(s1) and the rest, then every
///     M(s), s in supp(mu1), into R_old(s) and the rest (skipping M(s1) if
///     it was split already);
///  2. M(s1) is the start class and the start state of L left R(s1) while
///     R(s1) stays nonempty: split M(s1) into R_old(s1) \ R(s1) and the rest.
/// If neither fires, the tree is real and the final R witnesses tree <= L.
inline RefinementOutcome analyze_and_refine(const StochasticTree& c, const Lpts& a, const Lpts& l,
                                            const Partition& pi) {
  if (pi.num_states() != l.num_states() || a.num_states() != pi.num_classes())
    throw Error("analyze_and_refine: partition does not match the abstraction");
  if (c.exec_map.size() != c.tree.num_states() || !check_exec_map(c, a))
    throw Error("analyze_and_refine: tree is not an execution of the abstraction");
  if (c.exec_map[c.root()] != pi.class_of(l.start()))
    throw Error("analyze_and_refine: tree root is not mapped to the start class");

  const auto classes = pi.classes();
  Relation r_m(c.tree.num_states(), l.num_states());
  for (std::size_t t = 0; t < c.tree.num_states(); ++t)
    for (StateId s : classes[c.exec_map[t]]) r_m.insert(static_cast<StateId>(t), s);

  RefinementOutcome out;
  out.partition = pi;
  auto try_split = [&](SplitCause cause, std::uint32_t klass, const std::vector<StateId>& part) {
    const auto& region = classes[klass];
    if (part.empty() || part.size() == region.size()) return false;
    Partition next = out.partition.split(region, part);
    if (next.num_classes() == out.partition.num_classes()) return false;
    out.partition = std::move(next);
    out.splits.push_back({cause, region, part});
    return true;
  };

  const StateId start = l.start();
  auto observer = [&](const TreeIteration& it, const Relation& rel) {
    const std::uint32_t m1 = c.exec_map[it.state];
    if (it.after.empty()) {
      const bool split_m1 = try_split(SplitCause::no_match, m1, it.before);
      for (const auto& [s, w] : c.tree.transition(it.transition).target.entries()) {
        const std::uint32_t m = c.exec_map[s];
        if (m == m1 && split_m1) continue;
        try_split(SplitCause::no_match, m, rel.image(s));
      }
      out.spurious = true;
      return true;
    }
    const bool lost_start = std::binary_search(it.before.begin(), it.before.end(), start) &&
                            !std::binary_search(it.after.begin(), it.after.end(), start);
    if (m1 == pi.class_of(start) && lost_start) {
      std::vector<StateId> part;
      std::set_difference(it.before.begin(), it.before.end(), it.after.begin(), it.after.end(),
                          std::back_inserter(part));
      try_split(SplitCause::lost_start, m1, part);
      out.spurious = true;
      return true;
    }
    return false;
  };

  auto run = tree_simulation(c.tree, l, std::move(r_m), observer);
  out.iterations = run.log.size();
  if (out.spurious) {
    if (!out.partition.strictly_finer_than(pi))
      throw std::logic_error("analyze_and_refine: spurious counterexample without progress");
  } else {
    out.relation = std::move(run.relation);
  }
  return out;
}

/// One round of an abstraction-refinement loop, for run logs.
struct IterationRecord {
  std::size_t iteration = 0;
  std::size_t level = 0;               // assumption index (0 for CEGAR and ASym)
  std::size_t abstraction_states = 0;  // |A| checked in this round
  std::size_t composed_states = 0;     // |L1 || A| (0 for CEGAR)
  std::size_t abstracted_states = 0;   // states of the structure A abstracts
  bool premise_holds = false;
  std::string outcome;                 // "holds", "spurious", "real", "lifted"
  std::vector<SplitRecord> splits;
  std::size_t classes_before = 0;
  std::size_t classes_after = 0;
  std::size_t epoch_refinements = 0;   // refinements at this level since its last reset
};

struct CegarResult {
  bool holds = false;
  std::optional<StochasticTree> counterexample;  // executes `abstraction`
  Lpts abstraction;
  Partition partition;
  Lpts spec;  // the completed specification actually checked
  std::size_t refinements = 0;
  std::vector<IterationRecord> log;
};

/// Abstraction refinement for L <= P, starting from the single-class
/// quotient of L. P is completed to the joint alphabet first.
inline CegarResult cegar(const Lpts& l, const Lpts& p) {
  require_valid(l, "implementation");
  require_valid(p, "specification");
  CegarResult out;
  out.spec = complete_spec(p, alphabet_union(l.alphabet(), p.alphabet()));
  out.partition = Partition::coarsest(l.num_states());
  for (std::size_t iteration = 0;; ++iteration) {
    out.abstraction = quotient(l, out.partition);
    IterationRecord rec;
    rec.iteration = iteration;
    rec.abstraction_states = out.abstraction.num_states();
    rec.abstracted_states = l.num_states();
    rec.classes_before = out.partition.num_classes();
    rec.epoch_refinements = out.refinements;
    const auto sim = coarsest_simulation(out.abstraction, out.spec, {.stop_at_start = true});
    if (sim.pairs.contains(out.abstraction.start(), out.spec.start())) {
      rec.premise_holds = true;
      rec.outcome = "holds";
      rec.classes_after = rec.classes_before;
      out.log.push_back(std::move(rec));
      out.holds = true;
      return out;
    }
    auto c = build_cex(sim, out.abstraction, out.spec);
    auto verdict = analyze_and_refine(c, out.abstraction, l, out.partition);
    rec.splits = verdict.splits;
    if (!verdict.spurious) {
      rec.outcome = "real";
      rec.classes_after = rec.classes_before;
      out.log.push_back(std::move(rec));
      out.counterexample = std::move(c);
      return out;
    }
    out.partition = std::move(verdict.partition);
    ++out.refinements;
    rec.outcome = "spurious";
    rec.classes_after = out.partition.num_classes();
    rec.epoch_refinements = out.refinements;
    out.log.push_back(std::move(rec));
  }
}

}  // namespace lpts
