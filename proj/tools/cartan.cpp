#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "cartan/jet.hpp"
#include "cartan/problem.hpp"

using namespace cartan;

namespace {

std::string tuple(const std::vector<std::size_t>& s) {
  std::string out = "(";
  for (std::size_t k = 0; k < s.size(); ++k) out += (k ? "," : "") + std::to_string(s[k]);
  return out + ")";
}

int cmd_run(const std::string& path, std::optional<int> max_loops, std::optional<std::uint64_t> seed,
            const std::string& json_out) {
  ProblemFile f = load_problem(path);
  if (max_loops) f.policy.max_loops = *max_loops;
  if (seed) f.policy.seed = *seed;
  EquivalenceReport r = run_loop(f.problem, f.policy);
  r.title = f.title;
  std::cout << report_text(r);
  if (!json_out.empty()) {
    std::string js = report_json(r);
    if (json_out == "-") {
      std::cout << js;
    } else {
      std::ofstream out(json_out, std::ios::binary);
      if (!out) throw std::runtime_error("cannot write " + json_out);
      out << js;
    }
  }
  if (r.exit_code() != 0 && !r.diagnostic.empty()) std::cerr << "cartan: " << r.diagnostic << "\n";
  return r.exit_code();
}

int cmd_characters(const std::string& path) {
  ProblemFile f = load_problem(path);
  const auto& p = f.problem;
  StructureData data = compute_structure_data(p);
  AbsorptionSolution sol = solve_absorption(build_absorption(p, data, AbsorptionMode::normalized));
  std::cout << "n=" << p.n() << " r=" << p.group.r() << " r2=" << sol.r2 << "\n";
  if (p.group.r() == 0) {
    std::cout << "trivial group: no characters\n";
    return 0;
  }
  CharacterReport ch = cartan_characters(data, sol, f.policy.seed);
  std::size_t bound = 0;
  for (std::size_t k = 0; k < ch.s.size(); ++k) bound += (k + 1) * ch.s[k];
  std::cout << "s=" << tuple(ch.s) << " sum k*s_k=" << bound << " cartan test "
            << (ch.involutive ? "passes" : "fails") << (ch.certified ? "" : " (uncertified)") << "\n";
  return 0;
}

int cmd_crosscheck(const std::string& path) {
  ProblemFile f = load_problem(path);
  CrosscheckReport r = crosscheck(f.problem, f.policy);
  for (const auto& l : r.engine_log) std::cout << "engine: " << l << "\n";
  for (const auto& l : r.jet_log) std::cout << "jet: " << l << "\n";
  auto line = [](const char* name, const PathSummary& s) {
    std::cout << name << " r2=" << s.r2 << " s=" << tuple(s.s) << " conditions=" << s.conditions << "\n";
  };
  line("engine", r.engine);
  line("jet   ", r.jet);
  std::cout << (r.equal ? "agree" : "MISMATCH") << "\n";
  return r.equal ? 0 : 1;
}

int cmd_check(const std::string& path) {
  ProblemFile f = load_problem(path);
  const auto& p = f.problem;
  std::cout << (f.title.empty() ? path : f.title) << ": ok\n"
            << "  coordinates " << p.n() << ", parameters " << p.group.r() << ", membership equations "
            << p.group.membership.size() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Equivalence of G-structures by Cartan's method"};
  app.require_subcommand(1);
  std::string file, json_out;
  std::optional<int> max_loops;
  std::optional<std::uint64_t> seed;

  auto* run = app.add_subcommand("run", "run the equivalence loop");
  run->add_option("file", file, "problem file")->required();
  run->add_option("--max-loops", max_loops, "iteration cap")->check(CLI::NonNegativeNumber);
  run->add_option("--seed", seed, "random seed for generic choices");
  run->add_option("--json", json_out, "write the JSON report here ('-' for stdout)");
  auto* chars = app.add_subcommand("characters", "reduced characters of the first stage");
  chars->add_option("file", file, "problem file")->required();
  auto* cross = app.add_subcommand("crosscheck", "compare engine and jet-completion paths");
  cross->add_option("file", file, "problem file")->required();
  auto* check = app.add_subcommand("check", "parse and validate a problem file");
  check->add_option("file", file, "problem file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;  // usage errors share the generic failure code
  }
  try {
    if (*run) return cmd_run(file, max_loops, seed, json_out);
    if (*chars) return cmd_characters(file);
    if (*cross) return cmd_crosscheck(file);
    return cmd_check(file);
  } catch (const std::exception& e) {
    std::cerr << "cartan: " << e.what() << "\n";
    return 1;
  }
}
