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

#include <gmpxx.h>

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace lpts {

using StateId = std::uint32_t;
using ActionId = std::uint32_t;

/// Exact rational number (GMP). Always kept in canonical form.
using Rat = mpq_class;

inline constexpr std::size_t npos = static_cast<std::size_t>(-1);

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Parses "p/q" or "p" into a canonical rational. Throws Error on bad input.
inline Rat rat(std::string_view text) {
  Rat r;
  if (text.empty() || r.set_str(std::string(text), 10) != 0)
    throw Error("invalid rational literal '" + std::string(text) + "'");
  if (text.find('/') != std::string_view::npos) {
    const auto slash = text.find('/');
    if (text.substr(slash + 1).find_first_not_of('0') == std::string_view::npos)
      throw Error("zero denominator in '" + std::string(text) + "'");
  }
  r.canonicalize();
  return r;
}

inline Rat rat(long num, long den = 1) {
  if (den == 0) throw Error("zero denominator");
  Rat r{mpz_class(num), mpz_class(den)};
  r.canonicalize();
  return r;
}

/// "p/q", or "p" when the denominator is 1.
inline std::string to_string(const Rat& r) { return r.get_str(); }

// ---------------------------------------------------------------------------
// Distributions
// ---------------------------------------------------------------------------

/// Discrete distribution with exact weights, stored sorted by state.
///
/// Construction merges repeated states and drops zero weights; it does not
/// enforce that the weights sum to one (validate() reports that).
class Dist {
 public:
  using Entry = std::pair<StateId, Rat>;

  Dist() = default;

  explicit Dist(std::vector<Entry> entries) : entries_(std::move(entries)) {
    std::sort(entries_.begin(), entries_.end(),
              [](const Entry& a, const Entry& b) { return a.first < b.first; });
    std::vector<Entry> merged;
    merged.reserve(entries_.size());
    for (auto& e : entries_) {
      if (!merged.empty() && merged.back().first == e.first)
        merged.back().second += e.second;
      else
        merged.push_back(std::move(e));
    }
    std::erase_if(merged, [](const Entry& e) { return sgn(e.second) == 0; });
    entries_ = std::move(merged);
  }

  std::span<const Entry> entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }

  std::vector<StateId> support() const {
    std::vector<StateId> out;
    out.reserve(entries_.size());
    for (const auto& e : entries_) out.push_back(e.first);
    return out;
  }

  bool contains(StateId s) const { return find(s) != nullptr; }

  /// Weight of s, zero outside the support.
  Rat operator()(StateId s) const {
    const Entry* e = find(s);
    return e ? e->second : Rat(0);
  }

  Rat total() const {
    Rat sum = 0;
    for (const auto& e : entries_) sum += e.second;
    return sum;
  }

  /// Index of s within entries(), or npos.
  std::size_t index_of(StateId s) const {
    const Entry* e = find(s);
    return e ? static_cast<std::size_t>(e - entries_.data()) : npos;
  }

  friend bool operator==(const Dist& a, const Dist& b) {
    return a.entries_ == b.entries_;
  }

  friend bool operator<(const Dist& a, const Dist& b) {
    return std::lexicographical_compare(
        a.entries_.begin(), a.entries_.end(), b.entries_.begin(), b.entries_.end(),
        [](const Entry& x, const Entry& y) {
          return x.first != y.first ? x.first < y.first : x.second < y.second;
        });
  }

 private:
  const Entry* find(StateId s) const {
    auto it = std::lower_bound(entries_.begin(), entries_.end(), s,
                               [](const Entry& e, StateId v) { return e.first < v; });
    return (it != entries_.end() && it->first == s) ? &*it : nullptr;
  }

  std::vector<Entry> entries_;
};

inline Dist dirac(StateId s) { return Dist({{s, Rat(1)}}); }

/// mu(T) for a set of states T (each state counted once).
template <typename Range>
Rat mass(const Dist& mu, const Range& states) {
  std::vector<StateId> t(std::begin(states), std::end(states));
  std::sort(t.begin(), t.end());
  t.erase(std::unique(t.begin(), t.end()), t.end());
  Rat sum = 0;
  for (StateId s : t) sum += mu(s);
  return sum;
}

inline Rat mass(const Dist& mu, std::initializer_list<StateId> states) {
  return mass(mu, std::vector<StateId>(states));
}

template <typename Pred>
Rat mass_if(const Dist& mu, Pred&& in_set) {
  Rat sum = 0;
  for (const auto& [s, w] : mu.entries())
    if (in_set(s)) sum += w;
  return sum;
}

// ---------------------------------------------------------------------------
// LPTS
// ---------------------------------------------------------------------------

struct Transition {
  StateId source = 0;
  ActionId action = 0;
  Dist target;

  friend bool operator==(const Transition&, const Transition&) = default;
  friend bool operator<(const Transition& a, const Transition& b) {
    if (a.source != b.source) return a.source < b.source;
    if (a.action != b.action) return a.action < b.action;
    return a.target < b.target;
  }
};

/// Labeled probabilistic transition system <S, s0, alpha, tau>.
///
/// States and actions are dense ids with display-name side tables. The
/// alphabet is kept sorted by name and the transition set sorted by
/// (source, action, target) without duplicates, so two values built from
/// the same data compare equal. Well-formedness is checked by validate().
class Lpts {
 public:
  Lpts() = default;

  Lpts(std::vector<std::string> state_names, StateId start,
       std::vector<std::string> alphabet, std::vector<Transition> transitions)
      : state_names_(std::move(state_names)), start_(start) {
    // Sort the alphabet by name and remap action ids accordingly. Ids that
    // are out of range are pushed past the end so validate() still sees them.
    std::vector<std::size_t> order(alphabet.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return alphabet[a] < alphabet[b]; });
    std::vector<ActionId> remap(alphabet.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
      const std::string& name = alphabet[order[i]];
      if (alphabet_.empty() || alphabet_.back() != name) alphabet_.push_back(name);
      remap[order[i]] = static_cast<ActionId>(alphabet_.size() - 1);
    }
    for (auto& t : transitions) {
      if (t.action < remap.size())
        t.action = remap[t.action];
      else
        t.action = static_cast<ActionId>(alphabet_.size() + (t.action - remap.size()));
    }
    std::sort(transitions.begin(), transitions.end());
    transitions.erase(std::unique(transitions.begin(), transitions.end()), transitions.end());
    transitions_ = std::move(transitions);

    offsets_.assign(state_names_.size() + 1, 0);
    for (const auto& t : transitions_)
      if (t.source < state_names_.size()) ++offsets_[t.source + 1];
    for (std::size_t s = 0; s < state_names_.size(); ++s) offsets_[s + 1] += offsets_[s];
  }

  std::size_t num_states() const { return state_names_.size(); }
  StateId start() const { return start_; }
  const std::string& state_name(StateId s) const { return state_names_.at(s); }
  const std::vector<std::string>& state_names() const { return state_names_; }

  const std::vector<std::string>& alphabet() const { return alphabet_; }
  const std::string& action_name(ActionId a) const { return alphabet_.at(a); }

  std::optional<ActionId> find_action(std::string_view name) const {
    auto it = std::lower_bound(alphabet_.begin(), alphabet_.end(), name);
    if (it == alphabet_.end() || *it != name) return std::nullopt;
    return static_cast<ActionId>(it - alphabet_.begin());
  }

  std::optional<StateId> find_state(std::string_view name) const {
    for (std::size_t s = 0; s < state_names_.size(); ++s)
      if (state_names_[s] == name) return static_cast<StateId>(s);
    return std::nullopt;
  }

  std::span<const Transition> transitions() const { return transitions_; }
  const Transition& transition(std::size_t i) const { return transitions_.at(i); }
  std::size_t num_transitions() const { return transitions_.size(); }

  /// Index of the first transition leaving s (transitions are grouped by source).
  std::size_t first_transition(StateId s) const { return offsets_.at(s); }

  std::span<const Transition> transitions_from(StateId s) const {
    if (s >= state_names_.size()) return {};
    return std::span<const Transition>(transitions_).subspan(
        offsets_[s], offsets_[s + 1] - offsets_[s]);
  }

  /// Indices of the transitions s -a-> mu, in order.
  std::vector<std::size_t> transitions_from(StateId s, ActionId a) const {
    std::vector<std::size_t> out;
    if (s >= state_names_.size()) return out;
    for (std::size_t i = offsets_[s]; i < offsets_[s + 1]; ++i)
      if (transitions_[i].action == a) out.push_back(i);
    return out;
  }

  /// Index of an identical transition, or npos.
  std::size_t find_transition(const Transition& t) const {
    auto it = std::lower_bound(transitions_.begin(), transitions_.end(), t);
    if (it == transitions_.end() || !(*it == t)) return npos;
    return static_cast<std::size_t>(it - transitions_.begin());
  }

  friend bool operator==(const Lpts& a, const Lpts& b) {
    return a.state_names_ == b.state_names_ && a.start_ == b.start_ &&
           a.alphabet_ == b.alphabet_ && a.transitions_ == b.transitions_;
  }

 private:
  std::vector<std::string> state_names_;
  StateId start_ = 0;
  std::vector<std::string> alphabet_;
  std::vector<Transition> transitions_;
  std::vector<std::size_t> offsets_;
};

/// Incremental construction of an Lpts by name.
class LptsBuilder {
 public:
  explicit LptsBuilder(std::vector<std::string> alphabet = {}) : alphabet_(std::move(alphabet)) {}

  StateId state(std::string_view name) {
    auto [it, fresh] = index_.try_emplace(std::string(name), static_cast<StateId>(states_.size()));
    if (fresh) states_.emplace_back(name);
    return it->second;
  }

  LptsBuilder& init(std::string_view name) {
    start_ = state(name);
    has_start_ = true;
    return *this;
  }

  /// Adds from -action-> { p1: s1, ... }. The action must be declared.
  LptsBuilder& add(std::string_view from, std::string_view action,
                   std::initializer_list<std::pair<std::string_view, std::string_view>> dist) {
    std::vector<std::pair<Rat, std::string>> d;
    for (const auto& [p, s] : dist) d.emplace_back(rat(p), std::string(s));
    return add(from, action, d);
  }

  LptsBuilder& add(std::string_view from, std::string_view action,
                   const std::vector<std::pair<Rat, std::string>>& dist) {
    const StateId src = state(from);
    auto it = std::find(alphabet_.begin(), alphabet_.end(), action);
    if (it == alphabet_.end()) throw Error("undeclared action '" + std::string(action) + "'");
    std::vector<Dist::Entry> entries;
    for (const auto& [p, s] : dist) entries.emplace_back(state(s), p);
    transitions_.push_back(
        {src, static_cast<ActionId>(it - alphabet_.begin()), Dist(std::move(entries))});
    return *this;
  }

  Lpts build() const {
    if (!has_start_ && states_.empty()) throw Error("LPTS without states");
    return Lpts(states_, has_start_ ? start_ : 0, alphabet_, transitions_);
  }

 private:
  std::vector<std::string> alphabet_;
  std::vector<std::string> states_;
  std::map<std::string, StateId, std::less<>> index_;
  std::vector<Transition> transitions_;
  StateId start_ = 0;
  bool has_start_ = false;
};

// ---------------------------------------------------------------------------
// Classification and validation
// ---------------------------------------------------------------------------

struct LptsKind {
  bool reactive = false;
  bool fully_probabilistic = false;
  bool tree = false;
};

/// True iff the start state is in no support and every other state occurs
/// in exactly one support.
inline bool is_tree(const Lpts& l) {
  std::vector<std::uint32_t> count(l.num_states(), 0);
  for (const auto& t : l.transitions())
    for (const auto& [s, w] : t.target.entries())
      if (s < count.size()) ++count[s];
  for (std::size_t s = 0; s < count.size(); ++s) {
    const std::uint32_t expected = (s == l.start()) ? 0 : 1;
    if (count[s] != expected) return false;
  }
  return true;
}

inline LptsKind classify(const Lpts& l) {
  LptsKind kind{true, true, is_tree(l)};
  for (std::size_t s = 0; s < l.num_states(); ++s) {
    auto out = l.transitions_from(static_cast<StateId>(s));
    if (out.size() > 1) kind.fully_probabilistic = false;
    for (std::size_t i = 1; i < out.size(); ++i)
      if (out[i].action == out[i - 1].action) kind.reactive = false;
  }
  return kind;
}

struct Violation {
  std::string where;
  std::string what;
};

inline std::string describe_transition(const Lpts& l, const Transition& t) {
  auto state = [&](StateId s) {
    return s < l.num_states() ? l.state_name(s) : "#" + std::to_string(s);
  };
  std::string out = state(t.source) + " -";
  out += t.action < l.alphabet().size() ? l.action_name(t.action) : "#" + std::to_string(t.action);
  out += "-> {";
  bool first = true;
  for (const auto& [s, w] : t.target.entries()) {
    out += first ? " " : ", ";
    out += to_string(w) + ": " + state(s);
    first = false;
  }
  out += " }";
  return out;
}

/// Every structural violation of the LPTS invariants; empty when well formed.
inline std::vector<Violation> validate(const Lpts& l) {
  std::vector<Violation> out;
  if (l.num_states() == 0) out.push_back({"lpts", "no states"});
  if (l.start() >= l.num_states())
    out.push_back({"init", "start state " + std::to_string(l.start()) + " is not a state"});
  for (const auto& t : l.transitions()) {
    const std::string where = describe_transition(l, t);
    if (t.source >= l.num_states()) out.push_back({where, "source is not a state"});
    if (t.action >= l.alphabet().size()) out.push_back({where, "action outside the alphabet"});
    if (t.target.empty()) out.push_back({where, "empty distribution"});
    for (const auto& [s, w] : t.target.entries()) {
      if (s >= l.num_states())
        out.push_back({where, "support state #" + std::to_string(s) + " is not a state"});
      if (sgn(w) <= 0) out.push_back({where, "non-positive weight " + to_string(w)});
    }
    if (!t.target.empty() && t.target.total() != 1)
      out.push_back({where, "distribution sums to " + to_string(t.target.total())});
  }
  return out;
}

/// Throws Error listing all violations, if any.
inline void require_valid(const Lpts& l, std::string_view what = "LPTS") {
  auto v = validate(l);
  if (v.empty()) return;
  std::string msg = std::string(what) + " is malformed:";
  for (const auto& x : v) msg += "\n  " + x.where + ": " + x.what;
  throw Error(msg);
}

// ---------------------------------------------------------------------------
// Alphabet helpers
// ---------------------------------------------------------------------------

inline std::vector<std::string> alphabet_union(const std::vector<std::string>& a,
                                               const std::vector<std::string>& b) {
  std::vector<std::string> out;
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

inline std::vector<std::string> sorted_alphabet(std::vector<std::string> alpha) {
  std::sort(alpha.begin(), alpha.end());
  alpha.erase(std::unique(alpha.begin(), alpha.end()), alpha.end());
  return alpha;
}

/// Same LPTS over a different alphabet; transitions keep their action names.
/// Throws if an action used by a transition is missing from the new alphabet.
inline Lpts with_alphabet(const Lpts& l, std::vector<std::string> alphabet) {
  alphabet = sorted_alphabet(std::move(alphabet));
  std::vector<Transition> ts;
  ts.reserve(l.num_transitions());
  for (const auto& t : l.transitions()) {
    auto it = std::lower_bound(alphabet.begin(), alphabet.end(), l.action_name(t.action));
    if (it == alphabet.end() || *it != l.action_name(t.action))
      throw Error("action '" + l.action_name(t.action) + "' is not in the new alphabet");
    ts.push_back({t.source, static_cast<ActionId>(it - alphabet.begin()), t.target});
  }
  return Lpts(l.state_names(), l.start(), std::move(alphabet), std::move(ts));
}

inline bool is_subset(const std::vector<std::string>& small, const std::vector<std::string>& big) {
  return std::includes(big.begin(), big.end(), small.begin(), small.end());
}

/// Adds a Dirac self-loop on every action of target_alphabet \ alpha_P at
/// every state, and widens the alphabet to target_alphabet.
inline Lpts complete_spec(const Lpts& p, std::vector<std::string> target_alphabet) {
  target_alphabet = sorted_alphabet(std::move(target_alphabet));
  if (!is_subset(p.alphabet(), target_alphabet))
    throw Error("specification alphabet is not contained in the target alphabet");
  std::vector<std::string> missing;
  std::set_difference(target_alphabet.begin(), target_alphabet.end(), p.alphabet().begin(),
                      p.alphabet().end(), std::back_inserter(missing));
  Lpts widened = with_alphabet(p, target_alphabet);
  if (missing.empty()) return widened;
  std::vector<Transition> ts(widened.transitions().begin(), widened.transitions().end());
  for (const auto& name : missing) {
    const ActionId a = *widened.find_action(name);
    for (std::size_t s = 0; s < p.num_states(); ++s)
      ts.push_back({static_cast<StateId>(s), a, dirac(static_cast<StateId>(s))});
  }
  return Lpts(widened.state_names(), widened.start(), widened.alphabet(), std::move(ts));
}

/// Maps each action of `from` to the same-named action of `to`, or nullopt.
inline std::vector<std::optional<ActionId>> action_map(const Lpts& from, const Lpts& to) {
  std::vector<std::optional<ActionId>> out;
  out.reserve(from.alphabet().size());
  for (const auto& name : from.alphabet()) out.push_back(to.find_action(name));
  return out;
}

}  // namespace lpts
