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

#include <fstream>
#include <sstream>

#include "lpts/lpts.hpp"
#include "support/generators.hpp"
#include "support/oracles.hpp"

namespace {

using namespace lpts;
using lpts::testing::Rng;

ModelFile load(const std::string& name) {
  std::ifstream in(std::string(LPTS_MODELS_DIR) + "/" + name);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_model(ss.str());
}

Lpts compose_all(const std::vector<Lpts>& ls) {
  Lpts whole = ls[0];
  for (std::size_t i = 1; i < ls.size(); ++i) whole = compose(whole, ls[i]).lpts;
  return whole;
}

bool monolithic(const std::vector<Lpts>& ls, const Lpts& p) {
  const Lpts whole = compose_all(ls);
  return holds(whole, complete_spec(p, alphabet_union(whole.alphabet(), p.alphabet())));
}

TEST(Agar2, ClientServer) {
  const ModelFile m = load("client_server.lpts");
  const auto res = agar2(m.get("L1"), m.get("L2"), m.get("P"), {.check_invariants = true});
  EXPECT_TRUE(res.holds);
  ASSERT_EQ(res.assumptions.size(), 1u);
  EXPECT_LT(res.assumptions[0].num_states(), 3u);
  EXPECT_EQ(res.stats.refinements[0], 1u);
  EXPECT_TRUE(holds(m.get("L2"), res.assumptions[0]));
  EXPECT_TRUE(holds(m.get("L"), complete_spec(m.get("P"), m.get("L").alphabet())));
}

TEST(Agar2, UniversalSpecNeedsNoRefinement) {
  const ModelFile m = load("client_server.lpts");
  LptsBuilder b({"output"});
  b.init("u");
  b.add("u", "output", {{"1", "u"}});
  const Lpts p = complete_spec(b.build(), {"ack", "output", "send"});
  const auto res = agar2(m.get("L1"), m.get("L2"), p);
  EXPECT_TRUE(res.holds);
  EXPECT_EQ(res.stats.refinements[0], 0u);
  EXPECT_EQ(res.assumptions[0].num_states(), 1u);
}

TEST(Agar2, AgreesWithMonolithicCheck) {
  Rng rng(11);
  int failures = 0;
  for (int i = 0; i < 300; ++i) {
    const auto sys = lpts::testing::random_system(rng, 2, 5);
    const auto& l1 = sys.components[0];
    const auto& l2 = sys.components[1];
    const auto res = agar2(l1, l2, sys.spec, {.check_invariants = true});
    ASSERT_EQ(res.holds, monolithic(sys.components, sys.spec)) << "instance " << i;
    EXPECT_LE(res.stats.refinements[0], l2.num_states() - 1);
    for (const auto& rec : res.log)
      if (rec.outcome == "spurious") EXPECT_GT(rec.classes_after, rec.classes_before);
    if (!res.holds) {
      ++failures;
      ASSERT_TRUE(res.counterexample);
      const auto& c = *res.counterexample;
      EXPECT_TRUE(lpts::testing::valid_counterexample_tree(c, res.counterexample_system));
      EXPECT_TRUE(holds(c.tree, compose(l1, l2).lpts));
      EXPECT_FALSE(holds(c.tree, res.spec));
      ASSERT_TRUE(res.right_projection);
      EXPECT_TRUE(holds(res.right_projection->tree, l2));
    }
  }
  EXPECT_GT(failures, 30);
}

TEST(AgarN, TwoComponentsMatchAgar2) {
  Rng rng(12);
  for (int i = 0; i < 200; ++i) {
    const auto sys = lpts::testing::random_system(rng, 2, 5);
    const auto a = agar2(sys.components[0], sys.components[1], sys.spec);
    const auto b = agar_n(sys.components, sys.spec);
    ASSERT_EQ(a.holds, b.holds);
    EXPECT_EQ(a.stats.refinements, b.stats.refinements);
    EXPECT_EQ(a.stats.iterations, b.stats.iterations);
    EXPECT_EQ(a.partitions, b.partitions);
  }
}

TEST(AgarN, ThreeComponentsAgreeWithMonolithicCheck) {
  Rng rng(13);
  int failures = 0;
  for (int i = 0; i < 150; ++i) {
    const auto sys = lpts::testing::random_system(rng, 3, 4);
    const auto res = agar_n(sys.components, sys.spec, {.check_invariants = true});
    ASSERT_EQ(res.holds, monolithic(sys.components, sys.spec)) << "instance " << i;
    for (const auto& rec : res.log) EXPECT_LE(rec.epoch_refinements + 1, std::max<std::size_t>(rec.abstracted_states, 1));
    if (!res.holds) {
      ++failures;
      ASSERT_TRUE(res.counterexample);
      EXPECT_TRUE(holds(res.counterexample->tree, compose_all(sys.components)));
      EXPECT_FALSE(holds(res.counterexample->tree, res.spec));
    }
  }
  EXPECT_GT(failures, 10);
}

TEST(AgarN, Pipeline) {
  const ModelFile m = load("pipeline3.lpts");
  std::vector<Lpts> ls;
  for (const auto& name : m.system) ls.push_back(m.get(name));
  const auto res = agar_n(ls, m.get(m.spec), {.check_invariants = true});
  EXPECT_TRUE(res.holds);
  EXPECT_TRUE(monolithic(ls, m.get(m.spec)));
}

TEST(LiftTree, IdentityRelation) {
  Rng rng(14);
  int checked = 0;
  for (int i = 0; i < 200; ++i) {
    const auto [l, p] = lpts::testing::random_pair(rng, {});
    const auto sim = coarsest_simulation(l, p, {.stop_at_start = true});
    if (sim.pairs.contains(l.start(), p.start())) continue;
    const auto c = build_cex(sim, l, p);
    // The tree executes l, so the exec map is a strong simulation into l.
    Relation r(c.tree.num_states(), l.num_states());
    for (std::size_t t = 0; t < c.tree.num_states(); ++t) r.insert(static_cast<StateId>(t), c.exec_map[t]);
    ASSERT_TRUE(is_strong_simulation(c.tree, l, r));
    const auto lifted = lift_tree(c, r, l);
    EXPECT_TRUE(check_exec_map(lifted, l));
    EXPECT_TRUE(is_tree(lifted.tree));
    EXPECT_TRUE(holds(c.tree, lifted.tree));
    EXPECT_TRUE(holds(lifted.tree, l));
    ++checked;
  }
  EXPECT_GT(checked, 30);
}

TEST(LiftTree, RejectsNonSimulation) {
  const ModelFile m = load("client_server.lpts");
  const Lpts& l = m.get("L");
  TreeBuilder b(l.alphabet());
  const StateId root = b.add_root(0);
  b.add_transition(root, *l.find_action("ack"), {{1, rat(1, 1)}}, 0);
  const auto c = std::move(b).build();
  Relation r(c.tree.num_states(), l.num_states(), true);
  EXPECT_THROW(lift_tree(c, r, l), Error);
}

}  // namespace
