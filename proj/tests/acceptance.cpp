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

// Acceptance runner: one PASS/FAIL line per criterion, nonzero exit if any
// criterion fails. Usage: acceptance <lpts-agar binary> <models dir>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

#include <sys/wait.h>

#include "lpts/lpts.hpp"
#include "support/generators.hpp"
#include "support/oracles.hpp"

namespace {

using namespace lpts;
using lpts::testing::Rng;
using Clock = std::chrono::steady_clock;

struct Verdict {
  bool pass = true;
  std::string detail;
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string g_cli;
std::string g_models;

ModelFile load(const std::string& name) {
  std::ifstream in(g_models + "/" + name);
  if (!in) throw Error("cannot open " + g_models + "/" + name);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_model(ss.str());
}

std::string cex_json(const StochasticTree& c, const Lpts& system) {
  return emit_cex_json(make_cex_document(c, system, Json::object()));
}

Lpts compose_all(const std::vector<Lpts>& ls) {
  Lpts whole = ls[0];
  for (std::size_t i = 1; i < ls.size(); ++i) whole = compose(whole, ls[i]).lpts;
  return whole;
}

// Shared by AC1, AC2 and AC10.
struct SimRun {
  std::size_t disagreements = 0;
  std::size_t failing = 0;
  std::size_t unsound = 0;
  std::string artifacts;  // concatenated counterexample JSON
};

SimRun run_simulation_suite(std::uint64_t seed, int count) {
  Rng rng(seed);
  SimRun out;
  for (int i = 0; i < count; ++i) {
    const auto [l1, l2] = lpts::testing::random_pair(rng, {});
    const auto sim = coarsest_simulation(l1, l2, {.stop_at_start = true});
    const bool ok = sim.pairs.contains(l1.start(), l2.start());
    if (ok != lpts::testing::naive_holds(l1, l2)) ++out.disagreements;
    if (ok) continue;
    ++out.failing;
    const auto c = build_cex(sim, l1, l2);
    if (!lpts::testing::valid_counterexample_tree(c, l1) || !holds(c.tree, l1) || holds(c.tree, l2)) ++out.unsound;
    out.artifacts += cex_json(c, l1);
  }
  return out;
}

SimRun g_sim;  // filled by AC1

Verdict ac1() {
  const auto t0 = Clock::now();
  g_sim = run_simulation_suite(1001, 1000);
  const double dt = seconds_since(t0);
  Verdict v{g_sim.disagreements == 0 && dt < 60.0, ""};
  v.detail = "1000 pairs, " + std::to_string(g_sim.disagreements) + " disagreements, " + std::to_string(dt) + " s";
  return v;
}

Verdict ac2() {
  return {g_sim.failing > 0 && g_sim.unsound == 0,
          std::to_string(g_sim.failing) + " counterexamples, " + std::to_string(g_sim.unsound) + " unsound"};
}

Verdict ac3() {
  Rng rng(1003);
  lpts::testing::GenParams g;
  g.reactive = true;
  std::size_t failing = 0, bad = 0;
  for (int i = 0; i < 1000; ++i) {
    const auto [l1, l2] = lpts::testing::random_pair(rng, g);
    if (!classify(l1).reactive) return {false, "generator produced a non-reactive l1"};
    const auto sim = coarsest_simulation(l1, l2, {.stop_at_start = true});
    if (sim.pairs.contains(l1.start(), l2.start())) continue;
    ++failing;
    const auto c = build_cex(sim, l1, l2);
    if (!classify(c.tree).reactive || !lpts::testing::valid_counterexample_tree(c, l1)) ++bad;
  }
  return {failing > 0 && bad == 0, std::to_string(failing) + " reactive counterexamples, " + std::to_string(bad) + " bad"};
}

Verdict ac4() {
  Verdict v;
  // branching admits no fully-probabilistic counterexample, nonreactive no reactive one.
  for (const auto& [file, check_fp] : {std::pair<std::string, bool>{"branching.lpts", true}, {"nonreactive.lpts", false}}) {
    const ModelFile m = load(file);
    const Lpts& l1 = m.get(m.system.at(0));
    const Lpts p = complete_spec(m.get(m.spec), alphabet_union(l1.alphabet(), m.get(m.spec).alphabet()));
    const auto sim = coarsest_simulation(l1, p, {.stop_at_start = true});
    if (sim.pairs.contains(l1.start(), p.start())) return {false, file + ": relation holds"};
    const auto c = build_cex(sim, l1, p);
    const auto kind = classify(c.tree);
    const bool sound = lpts::testing::valid_counterexample_tree(c, l1) && holds(c.tree, l1) && !holds(c.tree, p);
    const bool shape = check_fp ? !kind.fully_probabilistic : !kind.reactive;
    v.pass = v.pass && sound && shape;
    v.detail += (v.detail.empty() ? "" : ", ") + file + (sound && shape ? " ok" : " wrong shape");
  }
  return v;
}

Verdict ac5() {
  Rng rng(1005);
  std::size_t bad = 0;
  for (int i = 0; i < 500; ++i) {
    const Lpts l = lpts::testing::random_lpts(rng, {});
    if (!holds(l, quotient(l, lpts::testing::random_partition(rng, l.num_states())))) ++bad;
  }
  return {bad == 0, "500 quotients, " + std::to_string(bad) + " failures"};
}

struct AgarRun {
  std::size_t disagreements = 0;
  std::size_t bound_violations = 0;
  std::size_t no_progress = 0;
  std::size_t runs = 0;
  std::size_t holding = 0;
  std::size_t refinements = 0;
  std::string logs;
};

void check_log(const std::vector<IterationRecord>& log, AgarRun& out) {
  for (const auto& rec : log)
    if (rec.outcome == "spurious" && rec.classes_after <= rec.classes_before) ++out.no_progress;
}

AgarRun run_agar_suite(std::uint64_t seed, int two, int three) {
  Rng rng(seed);
  AgarRun out;
  for (int i = 0; i < two; ++i) {
    const auto sys = lpts::testing::random_system(rng, 2, 5);
    const auto& l1 = sys.components[0];
    const auto& l2 = sys.components[1];
    const Lpts whole = compose(l1, l2).lpts;
    const bool mono = holds(whole, complete_spec(sys.spec, alphabet_union(whole.alphabet(), sys.spec.alphabet())));
    const auto cg = cegar(whole, sys.spec);
    const auto ag = agar2(l1, l2, sys.spec);
    ++out.runs;
    if (cg.holds != mono || ag.holds != mono) ++out.disagreements;
    out.holding += mono;
    out.refinements += ag.stats.refinements[0];
    if (ag.stats.refinements[0] + 1 > l2.num_states()) ++out.bound_violations;
    check_log(cg.log, out);
    check_log(ag.log, out);
    out.logs += to_json_lines(ag.log);
    if (ag.counterexample) out.logs += cex_json(*ag.counterexample, ag.counterexample_system);
  }
  for (int i = 0; i < three; ++i) {
    const auto sys = lpts::testing::random_system(rng, 3, 4);
    const Lpts whole = compose_all(sys.components);
    const bool mono = holds(whole, complete_spec(sys.spec, alphabet_union(whole.alphabet(), sys.spec.alphabet())));
    const auto ag = agar_n(sys.components, sys.spec);
    ++out.runs;
    if (ag.holds != mono) ++out.disagreements;
    out.holding += mono;
    for (auto k : ag.stats.refinements) out.refinements += k;
    check_log(ag.log, out);
    out.logs += to_json_lines(ag.log);
  }
  return out;
}

AgarRun g_agar;  // filled by AC6

Verdict ac6() {
  const auto t0 = Clock::now();
  g_agar = run_agar_suite(1006, 500, 200);
  const double dt = seconds_since(t0);
  return {g_agar.disagreements == 0 && dt < 300.0,
          std::to_string(g_agar.runs) + " systems (" + std::to_string(g_agar.holding) + " hold, " +
              std::to_string(g_agar.refinements) + " refinements), " + std::to_string(g_agar.disagreements) +
              " disagreements, " +
              std::to_string(dt) + " s"};
}

Verdict ac7() {
  return {g_agar.runs > 0 && g_agar.bound_violations == 0 && g_agar.no_progress == 0,
          std::to_string(g_agar.bound_violations) + " bound violations, " + std::to_string(g_agar.no_progress) +
              " spurious rounds without growth"};
}

Verdict ac8() {
  Rng rng(1008);
  const auto t0 = Clock::now();
  std::size_t bad = 0;
  for (int i = 0; i < 10000; ++i) {
    const auto t = lpts::testing::random_triple(rng, 8, 12);
    auto rel = [&](StateId a, StateId b) { return static_cast<bool>(t.related[a][b]); };
    if (dist_leq(t.mu1, t.mu2, rel).holds != lpts::testing::hall_leq(t.mu1, t.mu2, rel)) ++bad;
  }
  const double dt = seconds_since(t0);
  return {bad == 0 && dt < 30.0, "10000 triples, " + std::to_string(bad) + " disagreements, " + std::to_string(dt) + " s"};
}

int run_cli(const std::string& args, const std::string& out = "/dev/null") {
  const int status = std::system((g_cli + " " + args + " >" + out + " 2>/dev/null").c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

Verdict ac9() {
  const ModelFile m = load("client_server.lpts");
  const Lpts& l2 = m.get("L2");
  const auto res = agar2(m.get("L1"), l2, m.get("P"));
  const int code = run_cli("check " + g_models + "/client_server.lpts");
  const int code_l = run_cli("check " + g_models + "/client_server.lpts --impl L --spec P");
  const bool ok = code == 0 && code_l == 0 && res.holds && res.assumptions.at(0).num_states() < l2.num_states();
  return {ok, "check exit " + std::to_string(code) + "/" + std::to_string(code_l) + ", |A| = " +
                  std::to_string(res.assumptions.at(0).num_states()) + " vs |S2| = " + std::to_string(l2.num_states())};
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Verdict ac10() {
  const SimRun sim = run_simulation_suite(1001, 1000);
  const AgarRun agar = run_agar_suite(1006, 100, 40);
  const AgarRun agar_again = run_agar_suite(1006, 100, 40);
  bool same = sim.artifacts == g_sim.artifacts && agar.logs == agar_again.logs;
  const std::string tmp = std::filesystem::temp_directory_path() / "lpts_agar_det";
  std::filesystem::create_directories(tmp);
  for (const auto& [name, args] : {std::pair<std::string, std::string>{"branching", "check " + g_models + "/branching.lpts"},
                                   {"client_server", "agar " + g_models + "/client_server.lpts"},
                                   {"pipeline", "agar " + g_models + "/pipeline3.lpts --order 2,1,3"}}) {
    std::string outputs[2];
    for (int k = 0; k < 2; ++k) {
      const std::string file = tmp + "/" + name + std::to_string(k);
      run_cli(args + " --format json -o " + file + ".cex --log " + file + ".log", file + ".out");
      outputs[k] = slurp(file + ".out") + slurp(file + ".cex") + slurp(file + ".log");
    }
    same = same && !outputs[0].empty() && outputs[0] == outputs[1];
  }
  return {same, same ? "repeated runs byte-identical" : "artifacts differ between runs"};
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 3) {
    std::cerr << "usage: acceptance <lpts-agar binary> <models dir>\n";
    return 2;
  }
  g_cli = argv[1];
  g_models = argv[2];
  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria{
      {"AC1 simulation matches brute force", ac1},   {"AC2 counterexample soundness", ac2},
      {"AC3 reactive counterexamples", ac3},         {"AC4 shape fixtures", ac4},
      {"AC5 quotient soundness", ac5},               {"AC6 cegar/agar verdict equivalence", ac6},
      {"AC7 refinement bounds", ac7},                {"AC8 maxflow matches subset check", ac8},
      {"AC9 client-server fixture", ac9},            {"AC10 determinism", ac10}};
  int failed = 0;
  for (const auto& [name, fn] : criteria) {
    Verdict v;
    try {
      v = fn();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    if (!v.pass) ++failed;
    std::cout << (v.pass ? "PASS " : "FAIL ") << name << " (" << v.detail << ")" << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
