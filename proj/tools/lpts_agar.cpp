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

// lpts-agar: strong-simulation checks, CEGAR and assume-guarantee
// abstraction refinement on .lpts model files.
//
// Exit codes: 0 the check holds, 1 it fails, 2 input or usage error.

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include "lpts/lpts.hpp"

namespace {

using namespace lpts;

constexpr int kHolds = 0;
constexpr int kFails = 1;
constexpr int kInputError = 2;

struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  std::string command;
  std::string model;
  std::string impl;
  std::string spec;
  std::string rule;
  std::string order;
  std::string format = "text";
  std::string output;
  std::string log;
  std::string emit_assumption;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read '" + path + "'");
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write '" + path + "'");
  out << text;
}

std::vector<std::string> split(const std::string& s, const std::string& sep) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (true) {
    const auto next = s.find(sep, pos);
    std::string part = s.substr(pos, next == std::string::npos ? std::string::npos : next - pos);
    part.erase(0, part.find_first_not_of(" \t"));
    part.erase(part.find_last_not_of(" \t") + 1);
    out.push_back(part);
    if (next == std::string::npos) return out;
    pos = next + sep.size();
  }
}

ModelFile load_model(const std::string& path) {
  const std::string text = read_file(path);
  try {
    ModelFile m = parse_model(text);
    for (const auto& d : m.lpts_defs) {
      const auto v = validate(d.lpts);
      if (!v.empty()) throw InputError(path + ": lpts " + d.name + ": " + v.front().where + ": " + v.front().what);
    }
    return m;
  } catch (const ParseError& e) {
    throw InputError(path + ":" + e.what());
  }
}

std::vector<std::string> component_names(const ModelFile& m, const RunConfig& cfg) {
  std::vector<std::string> names = cfg.impl.empty() ? m.system : split(cfg.impl, "||");
  for (const auto& n : names)
    if (!m.has(n)) throw InputError("unknown lpts '" + n + "'");
  if (!cfg.order.empty()) {
    const auto idx = split(cfg.order, ",");
    if (idx.size() != names.size())
      throw InputError("--order lists " + std::to_string(idx.size()) + " positions for " +
                       std::to_string(names.size()) + " components");
    std::vector<std::string> permuted;
    std::vector<bool> used(names.size(), false);
    for (const auto& s : idx) {
      std::size_t k = 0;
      try {
        k = std::stoul(s);
      } catch (const std::exception&) {
        throw InputError("--order: '" + s + "' is not a position");
      }
      if (k < 1 || k > names.size() || used[k - 1]) throw InputError("--order must be a permutation of 1.." +
                                                                     std::to_string(names.size()));
      used[k - 1] = true;
      permuted.push_back(names[k - 1]);
    }
    names = permuted;
  }
  return names;
}

std::string spec_name(const ModelFile& m, const RunConfig& cfg) {
  const std::string name = cfg.spec.empty() ? m.spec : cfg.spec;
  if (!m.has(name)) throw InputError("unknown lpts '" + name + "'");
  return name;
}

Lpts compose_all(const ModelFile& m, const std::vector<std::string>& names) {
  Lpts out = m.get(names.front());
  for (std::size_t i = 1; i < names.size(); ++i) out = compose(out, m.get(names[i])).lpts;
  return out;
}

std::string join(const std::vector<std::string>& v, const std::string& sep) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? sep : "") + v[i];
  return out;
}

Json to_json_array(const std::vector<std::size_t>& v) {
  Json a = Json::array();
  for (auto x : v) a.push_back(x);
  return a;
}

// Completion notice, shared by every command.
std::vector<std::string> completion_actions(const Lpts& p, const std::vector<std::string>& alpha) {
  std::vector<std::string> out;
  for (const auto& a : alpha)
    if (!p.find_action(a)) out.push_back(a);
  return out;
}

struct Report {
  Json json = Json::object();
  std::vector<std::string> text;
  std::optional<CexDocument> cex;
  bool holds = false;
};

int emit(const RunConfig& cfg, Report& r, double millis) {
  std::string payload;
  if (cfg.format == "json") {
    r.json["counterexample"] = r.cex ? cex_to_json(*r.cex) : Json(nullptr);
    payload = r.json.dump(2) + "\n";
  } else if (cfg.format == "dot") {
    payload = r.cex ? emit_cex_dot(*r.cex) : std::string();
    for (const auto& line : r.text) std::cerr << line << "\n";
  } else {
    std::ostringstream os;
    for (const auto& line : r.text) os << line << "\n";
    os << "time: " << std::fixed << std::setprecision(1) << millis << " ms\n";
    if (r.cex) os << "counterexample:\n" << emit_cex_json(*r.cex);
    payload = os.str();
  }
  if (!cfg.output.empty() && r.cex)
    write_file(cfg.output, cfg.format == "dot" ? emit_cex_dot(*r.cex) : emit_cex_json(*r.cex));
  if (cfg.format == "dot" && !cfg.output.empty()) payload.clear();
  std::cout << payload;
  spdlog::info("finished in {:.1f} ms", millis);
  return r.holds ? kHolds : kFails;
}

Report run_check(const ModelFile& m, const RunConfig& cfg) {
  const auto names = component_names(m, cfg);
  const std::string pname = spec_name(m, cfg);
  const Lpts impl = compose_all(m, names);
  const Lpts& p = m.get(pname);
  const auto alpha = alphabet_union(impl.alphabet(), p.alphabet());
  const auto added = completion_actions(p, alpha);
  if (!added.empty()) spdlog::warn("spec {} completed with self-loops on {}", pname, join(added, ", "));
  const Lpts pc = complete_spec(p, alpha);
  spdlog::debug("checking {} ({} states) against {} ({} states)", join(names, " || "), impl.num_states(),
                pname, pc.num_states());
  const auto sim = coarsest_simulation(impl, pc, {.stop_at_start = true});

  Report r;
  r.holds = sim.pairs.contains(impl.start(), pc.start());
  r.json = Json{{"command", "check"},
                {"verdict", r.holds ? "holds" : "fails"},
                {"impl", names},
                {"spec", pname},
                {"impl_states", impl.num_states()},
                {"spec_states", p.num_states()},
                {"spec_completed_with", added},
                {"removals", sim.trace.size()}};
  r.text = {"check: " + join(names, " || ") + " <= " + pname + ": " + (r.holds ? "holds" : "fails"),
            "impl states: " + std::to_string(impl.num_states()) + ", spec states: " + std::to_string(p.num_states())};
  if (!added.empty()) r.text.push_back("spec completed with: " + join(added, ", "));
  if (!r.holds) {
    const auto c = build_cex(sim, impl, pc);
    r.cex = make_cex_document(c, impl, Json{{"command", "check"}, {"system", join(names, " || ")}, {"spec", pname}});
    r.text.push_back("counterexample states: " + std::to_string(c.size()));
  }
  if (!cfg.log.empty()) write_file(cfg.log, r.json.dump() + "\n");
  return r;
}

Report run_cegar(const ModelFile& m, const RunConfig& cfg) {
  const auto names = component_names(m, cfg);
  const std::string pname = spec_name(m, cfg);
  const Lpts impl = compose_all(m, names);
  const Lpts& p = m.get(pname);
  const auto added = completion_actions(p, alphabet_union(impl.alphabet(), p.alphabet()));
  if (!added.empty()) spdlog::warn("spec {} completed with self-loops on {}", pname, join(added, ", "));
  const auto res = cegar(impl, p);
  for (const auto& rec : res.log)
    spdlog::debug("iteration {}: |A| = {}, {}", rec.iteration, rec.abstraction_states, rec.outcome);

  Report r;
  r.holds = res.holds;
  r.json = Json{{"command", "cegar"},
                {"verdict", r.holds ? "holds" : "fails"},
                {"impl", names},
                {"spec", pname},
                {"impl_states", impl.num_states()},
                {"spec_completed_with", added},
                {"refinements", res.refinements},
                {"abstraction_states", res.abstraction.num_states()}};
  r.text = {"cegar: " + join(names, " || ") + " <= " + pname + ": " + (r.holds ? "holds" : "fails"),
            "impl states: " + std::to_string(impl.num_states()),
            "refinements: " + std::to_string(res.refinements),
            "final abstraction states: " + std::to_string(res.abstraction.num_states())};
  if (res.counterexample)
    r.cex = make_cex_document(*res.counterexample, res.abstraction,
                              Json{{"command", "cegar"}, {"system", "abstraction"}, {"spec", pname},
                                   {"iterations", res.log.size()}});
  if (!cfg.log.empty()) write_file(cfg.log, to_json_lines(res.log));
  return r;
}

Report run_agar(const ModelFile& m, const RunConfig& cfg) {
  const auto names = component_names(m, cfg);
  if (names.size() < 2) throw InputError("agar needs at least two components");
  const std::string pname = spec_name(m, cfg);
  const Lpts& p = m.get(pname);
  const std::string rule = cfg.rule.empty() ? (names.size() == 2 ? "asym" : "asym-n") : cfg.rule;

  std::vector<std::string> alpha = p.alphabet();
  for (const auto& n : names) alpha = alphabet_union(alpha, m.get(n).alphabet());
  const auto added = completion_actions(p, alpha);
  if (!added.empty()) spdlog::warn("spec {} completed with self-loops on {}", pname, join(added, ", "));

  AgarResult res;
  if (rule == "asym") {
    const std::vector<std::string> rest(names.begin() + 1, names.end());
    res = agar2(m.get(names.front()), compose_all(m, rest), p);
  } else {
    std::vector<Lpts> comps;
    for (const auto& n : names) comps.push_back(m.get(n));
    res = agar_n(comps, p);
  }
  for (const auto& rec : res.log)
    spdlog::debug("iteration {} level {}: |A| = {}, |L1 || A| = {}, {}", rec.iteration, rec.level,
                  rec.abstraction_states, rec.composed_states, rec.outcome);

  std::vector<std::size_t> sizes;
  for (const auto& a : res.assumptions) sizes.push_back(a.num_states());
  Report r;
  r.holds = res.holds;
  r.json = Json{{"command", "agar"},
                {"verdict", r.holds ? "holds" : "fails"},
                {"rule", rule},
                {"order", names},
                {"spec", pname},
                {"spec_completed_with", added},
                {"iterations", res.stats.iterations},
                {"refinements", to_json_array(res.stats.refinements)},
                {"largest_composed", res.stats.largest_composed},
                {"largest_assumption", res.stats.largest_assumption},
                {"assumption_states", to_json_array(sizes)}};
  std::vector<std::string> refs;
  for (auto k : res.stats.refinements) refs.push_back(std::to_string(k));
  std::vector<std::string> szs;
  for (auto k : sizes) szs.push_back(std::to_string(k));
  r.text = {"agar (" + rule + "): " + join(names, " || ") + " <= " + pname + ": " + (r.holds ? "holds" : "fails"),
            "refinements per level: " + join(refs, ", "),
            "largest composed |L_M|: " + std::to_string(res.stats.largest_composed),
            "largest assumption |A_M|: " + std::to_string(res.stats.largest_assumption),
            "final assumption states: " + join(szs, ", ")};
  if (res.counterexample)
    r.cex = make_cex_document(*res.counterexample, res.counterexample_system,
                              Json{{"command", "agar"}, {"rule", rule}, {"system", names.front() + " || A1"},
                                   {"spec", pname}, {"premise", 1}, {"iterations", res.stats.iterations}});
  if (!cfg.log.empty()) write_file(cfg.log, to_json_lines(res.log));

  if (!cfg.emit_assumption.empty()) {
    // The components A1 abstracts, plus A1 itself as the spec.
    ModelFile out;
    std::vector<std::string> rest(names.begin() + 1, names.end());
    for (const auto& n : rest) out.lpts_defs.push_back({n, m.get(n)});
    std::string a_name = "A";
    while (std::find(rest.begin(), rest.end(), a_name) != rest.end()) a_name += "_";
    out.lpts_defs.push_back({a_name, res.assumptions.front()});
    out.system = rest;
    out.spec = a_name;
    write_file(cfg.emit_assumption, print_model(out));
  }
  return r;
}

void add_common(CLI::App* sub, RunConfig& cfg) {
  sub->add_option("model", cfg.model, "model file (.lpts)")->required();
  sub->add_option("--impl", cfg.impl, "implementation: an lpts name or A||B||... (default: the system line)");
  sub->add_option("--spec", cfg.spec, "specification lpts (default: the spec line)");
  sub->add_option("--format", cfg.format, "report format")->check(CLI::IsMember({"json", "dot", "text"}));
  sub->add_option("-o", cfg.output, "write the counterexample to this path");
  sub->add_option("--log", cfg.log, "write the run log (JSON lines) to this path");
}

void setup_logging() {
  auto logger = spdlog::stderr_logger_st("lpts-agar");
  logger->set_pattern("[%l] %v");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::warn);
  if (const char* env = std::getenv("LPTS_AGAR_LOG")) {
    const std::string level = env;
    if (level == "debug") spdlog::set_level(spdlog::level::debug);
    else if (level == "info") spdlog::set_level(spdlog::level::info);
  }
}

}  // namespace

int main(int argc, char** argv) {
  setup_logging();
  CLI::App app{"Strong simulation, CEGAR and assume-guarantee abstraction refinement for LPTSes"};
  app.require_subcommand(1);
  RunConfig cfg;
  auto* check = app.add_subcommand("check", "decide impl <= spec, emit a counterexample on failure");
  auto* cegar_cmd = app.add_subcommand("cegar", "abstraction refinement on the composed implementation");
  auto* agar = app.add_subcommand("agar", "assume-guarantee abstraction refinement");
  add_common(check, cfg);
  add_common(cegar_cmd, cfg);
  add_common(agar, cfg);
  agar->add_option("--rule", cfg.rule, "proof rule (default: asym for 2 components, else asym-n)")
      ->check(CLI::IsMember({"asym", "asym-n"}));
  agar->add_option("--order", cfg.order, "component order as 1-based positions, e.g. 2,1,3");
  agar->add_option("--emit-assumption", cfg.emit_assumption, "write the final assumption as a model file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kInputError;
  }

  try {
    const ModelFile m = load_model(cfg.model);
    const auto t0 = std::chrono::steady_clock::now();
    Report r;
    if (check->parsed()) r = run_check(m, cfg);
    else if (cegar_cmd->parsed()) r = run_cegar(m, cfg);
    else r = run_agar(m, cfg);
    const auto t1 = std::chrono::steady_clock::now();
    return emit(cfg, r, std::chrono::duration<double, std::milli>(t1 - t0).count());
  } catch (const InputError& e) {
    spdlog::error("{}", e.what());
    return kInputError;
  } catch (const lpts::Error& e) {
    spdlog::error("{}", e.what());
    return kInputError;
  }
}
