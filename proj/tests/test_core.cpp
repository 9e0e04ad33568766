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

#include <gtest/gtest.h>

#include "lpts/core.hpp"
#include "support/generators.hpp"

namespace {

using namespace lpts;
using lpts::testing::Rng;

Lpts two_state(bool second_a) {
  LptsBuilder b({"a", "b"});
  b.init("s0");
  b.add("s0", "a", {{"1/2", "s0"}, {"1/2", "s1"}});
  b.add("s1", "b", {{"1", "s0"}});
  if (second_a) b.add("s0", "a", {{"1", "s1"}});
  return b.build();
}

TEST(Rat, ParsesAndCanonicalizes) {
  EXPECT_EQ(rat("2/4"), rat(1, 2));
  EXPECT_EQ(to_string(rat("9/10")), "9/10");
  EXPECT_EQ(to_string(rat("3")), "3");
  EXPECT_THROW(rat("1/0"), Error);
  EXPECT_THROW(rat("0.5"), Error);
  EXPECT_THROW(rat(""), Error);
}

TEST(Rat, FieldAxiomsOnRandomValues) {
  Rng rng(7);
  for (int i = 0; i < 500; ++i) {
    auto draw = [&] {
      return rat(static_cast<long>(lpts::testing::uniform(rng, 0, 40)) - 20,
                 static_cast<long>(lpts::testing::uniform(rng, 1, 30)));
    };
    const Rat a = draw(), b = draw(), c = draw();
    EXPECT_EQ(Rat((a + b) + c), Rat(a + (b + c)));
    EXPECT_EQ(Rat((a * b) * c), Rat(a * (b * c)));
    EXPECT_EQ(Rat(a * (b + c)), Rat(a * b + a * c));
    EXPECT_EQ(Rat(a + b), Rat(b + a));
  }
}

TEST(Dist, CanonicalForm) {
  Dist d({{2, rat(1, 3)}, {0, rat(1, 3)}, {2, rat(1, 3)}, {5, Rat(0)}});
  ASSERT_EQ(d.size(), 2u);
  EXPECT_EQ(d.entries()[0].first, 0u);
  EXPECT_EQ(d(2), rat(2, 3));
  EXPECT_EQ(d(5), 0);
  EXPECT_EQ(d, Dist({{0, rat(1, 3)}, {2, rat(2, 3)}}));
}

TEST(Dist, Dirac) {
  const Dist d = dirac(0);
  EXPECT_EQ(d.support(), std::vector<StateId>{0});
  EXPECT_EQ(d(0), 1);
  EXPECT_EQ(mass(d, {1}), 0);
}

TEST(Dist, Mass) {
  const Dist half({{0, rat(1, 2)}, {1, rat(1, 2)}});
  EXPECT_EQ(mass(half, {0, 1}), 1);
  EXPECT_EQ(mass(half, std::vector<StateId>{}), 0);
  const Dist third({{0, rat(1, 3)}, {1, rat(2, 3)}});
  EXPECT_EQ(mass(third, {1}), rat(2, 3));
  EXPECT_EQ(mass(third, {1, 1}), rat(2, 3));
}

TEST(Dist, MassOfComplementaryParts) {
  Rng rng(11);
  for (int i = 0; i < 300; ++i) {
    const Dist d = lpts::testing::random_dist(rng, 6, 4, 12);
    std::vector<StateId> t1, t2;
    for (StateId s : d.support()) (lpts::testing::coin(rng) ? t1 : t2).push_back(s);
    EXPECT_EQ(Rat(mass(d, t1) + mass(d, t2)), 1);
  }
}

TEST(Lpts, ClassifyFlags) {
  const auto k = classify(two_state(false));
  EXPECT_TRUE(k.reactive);
  EXPECT_TRUE(k.fully_probabilistic);
  EXPECT_FALSE(classify(two_state(true)).fully_probabilistic);
  EXPECT_FALSE(k.tree);
  EXPECT_FALSE(classify(two_state(true)).reactive);

  LptsBuilder chain({"a"});
  chain.init("r");
  chain.add("r", "a", {{"1/2", "x"}, {"1/2", "y"}});
  chain.add("x", "a", {{"1", "z"}});
  const auto kc = classify(chain.build());
  EXPECT_TRUE(kc.tree);
  EXPECT_TRUE(kc.reactive);
  EXPECT_TRUE(kc.fully_probabilistic);
}

TEST(Lpts, TreeRejectsSharedChildAndLoops) {
  LptsBuilder b({"a", "b"});
  b.init("r");
  b.add("r", "a", {{"1", "x"}});
  b.add("r", "b", {{"1", "x"}});
  EXPECT_FALSE(is_tree(b.build()));
  LptsBuilder loop({"a"});
  loop.init("r");
  loop.add("r", "a", {{"1", "r"}});
  EXPECT_FALSE(is_tree(loop.build()));
}

TEST(Lpts, ClassifyStableUnderRenaming) {
  Rng rng(3);
  for (int i = 0; i < 200; ++i) {
    const Lpts l = lpts::testing::random_lpts(rng, {});
    std::vector<StateId> perm(l.num_states());
    for (std::size_t s = 0; s < perm.size(); ++s) perm[s] = static_cast<StateId>(s);
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<std::string> names(l.num_states());
    std::vector<Transition> ts;
    for (std::size_t s = 0; s < perm.size(); ++s) names[perm[s]] = "q" + std::to_string(s);
    for (const auto& t : l.transitions()) {
      std::vector<Dist::Entry> e;
      for (const auto& [x, w] : t.target.entries()) e.emplace_back(perm[x], w);
      ts.push_back({perm[t.source], t.action, Dist(e)});
    }
    const Lpts r(names, perm[l.start()], l.alphabet(), ts);
    const auto a = classify(l), b = classify(r);
    EXPECT_EQ(a.reactive, b.reactive);
    EXPECT_EQ(a.fully_probabilistic, b.fully_probabilistic);
    EXPECT_EQ(a.tree, b.tree);
  }
}

TEST(Validate, WellFormed) { EXPECT_TRUE(validate(two_state(true)).empty()); }

TEST(Validate, MassNotOne) {
  const Lpts l({"s0", "s1"}, 0, {"a"}, {{0, 0, Dist({{0, rat(1, 2)}, {1, rat(2, 5)}})}});
  const auto v = validate(l);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].what, "distribution sums to 9/10");
  EXPECT_NE(v[0].where.find("s0 -a->"), std::string::npos);
  EXPECT_THROW(require_valid(l), Error);
}

TEST(Validate, ActionOutsideAlphabet) {
  const Lpts l({"s0"}, 0, {"a"}, {{0, 1, dirac(0)}});
  const auto v = validate(l);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].what, "action outside the alphabet");
}

TEST(Validate, DanglingStates) {
  const Lpts l({"s0"}, 3, {"a"}, {{0, 0, dirac(4)}});
  EXPECT_EQ(validate(l).size(), 2u);
}

TEST(CompleteSpec, NothingMissing) {
  const Lpts p = two_state(false);
  EXPECT_EQ(complete_spec(p, {"a", "b"}), p);
}

TEST(CompleteSpec, OneStateOneAction) {
  const Lpts p({"p"}, 0, {}, {});
  const Lpts c = complete_spec(p, {"a"});
  ASSERT_EQ(c.num_transitions(), 1u);
  EXPECT_EQ(c.transition(0), (Transition{0, 0, dirac(0)}));
}

TEST(CompleteSpec, RestrictionRecoversOriginal) {
  const Lpts p = two_state(false);
  const Lpts c = complete_spec(p, {"a", "b", "send", "ack"});
  EXPECT_EQ(c.num_transitions(), p.num_transitions() + 2 * 2);
  std::vector<Transition> kept;
  for (const auto& t : c.transitions())
    if (p.find_action(c.action_name(t.action))) kept.push_back(t);
  EXPECT_EQ(with_alphabet(Lpts(c.state_names(), c.start(), c.alphabet(), kept), p.alphabet()), p);
}

TEST(CompleteSpec, RejectsSmallerTarget) { EXPECT_THROW(complete_spec(two_state(false), {"a"}), Error); }

}  // namespace
