#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pwcg/pwcg.hpp"

namespace {

using namespace pwcg;

struct Flags {
  std::string topology;
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<int> requests;
  std::optional<int> iterations;
  std::optional<int> max_hops;
  std::vector<double> loads;
  std::string policy;
  std::string plan_file;
  std::string out;
  std::string failure;
};

void add_shared(CLI::App* cmd, Flags& f) {
  cmd->add_option("--topology", f.topology, "Topology JSON file (default data/finland12.json)");
  cmd->add_option("--config", f.config, "JSON config file; flags override its values");
  cmd->add_option("--seed", f.seed, "Base seed; iteration i uses seed+i");
  cmd->add_option("--requests", f.requests, "Requests per run (default 20000)");
  cmd->add_option("--iterations", f.iterations, "Seeds per load point (default 20)");
  cmd->add_option("--loads", f.loads, "Offered loads in Erlangs, e.g. --loads 300 500 700");
  cmd->add_option("--policy", f.policy, "pwcg or ldpp (simulate)");
  cmd->add_option("--plan-file", f.plan_file, "Use a stored plan instead of solving");
  cmd->add_option("--out", f.out, "Output file (plan JSON or CSV; CSV also gets <out>.json)");
  cmd->add_option("--failure", f.failure, "mttf | fixed:<link>:<time> | none");
  cmd->add_option("--max-hops", f.max_hops, "Longest candidate cycle (default 8)");
}

Config resolve(const Flags& f) {
  Config c;
  if (!f.config.empty()) c = load_config_file(f.config, c);
  if (!f.topology.empty()) c.topology = f.topology;
  if (f.seed) c.seed = *f.seed;
  if (f.requests) c.requests = *f.requests;
  if (f.iterations) c.iterations = *f.iterations;
  if (f.max_hops) c.max_hops = *f.max_hops;
  if (!f.loads.empty()) c.loads = f.loads;
  if (!f.policy.empty()) c.policy = parse_policy(f.policy);
  if (!f.plan_file.empty()) c.plan_file = f.plan_file;
  if (!f.out.empty()) c.out = f.out;
  if (!f.failure.empty()) c.failure = f.failure;
  c.validate();
  return c;
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error(Errc::Io, "cannot write '" + path + "'");
  os << text;
  if (!os) throw Error(Errc::Io, "write to '" + path + "' failed");
}

void emit_table(const Config& cfg, const std::string& csv, const std::vector<RunResult>& runs) {
  if (cfg.out.empty()) {
    std::cout << csv;
    return;
  }
  write_file(cfg.out, csv);
  write_file(cfg.out + ".json", summary_json(cfg, runs).dump(2) + "\n");
  std::cerr << "wrote " << cfg.out << " and " << cfg.out << ".json\n";
}

int cmd_plan(const Config& cfg) {
  const auto net = load_network_file(cfg.topology);
  auto prepared = obtain_plan(net, cfg);
  const auto& doc = prepared.doc;
  const auto& plan = doc.plan;
  if (cfg.plan_file.empty()) {
    std::printf("candidate cycles: %zu (max_hops %d)\n", prepared.candidate_cycles, cfg.max_hops);
  }
  std::printf("objective: %g\n", plan.objective);
  std::printf("cycle copies:\n");
  for (std::size_t p = 0; p < doc.cycles.size(); ++p) {
    Path walk;
    walk.nodes = doc.cycles[p].nodes;
    walk.nodes.push_back(walk.nodes.front());
    std::printf("  n=%d  %s\n", plan.copies[p], net.describe(walk).c_str());
  }
  std::printf("%-28s %3s %3s %3s  labels\n", "link", "S", "P", "UP");
  for (LinkId l = 0; l < net.link_count(); ++l) {
    const auto& c = plan.capacities[static_cast<std::size_t>(l)];
    std::string labels;
    for (CoreId k = 0; k < net.cores(); ++k) labels += to_string(plan.group(l, k))[0];
    std::printf("%-28s %3d %3d %3d  %s\n", net.describe_link(l).c_str(), c.spare, c.protect, c.unprotect,
                labels.c_str());
  }
  if (!cfg.out.empty()) {
    write_file(cfg.out, plan_to_json(net, doc).dump(2) + "\n");
    std::printf("plan written to %s\n", cfg.out.c_str());
  }
  return 0;
}

int cmd_simulate(const Config& cfg) {
  const auto net = load_network_file(cfg.topology);
  std::optional<PreparedPlan> plan;
  if (cfg.policy == Policy::Pwcg) plan = obtain_plan(net, cfg);
  const auto runs = run_sweep(net, cfg, {cfg.policy}, plan);
  emit_table(cfg, simulate_csv(cfg, runs), runs);
  return 0;
}

int cmd_compare(const Config& cfg) {
  const auto net = load_network_file(cfg.topology);
  std::optional<PreparedPlan> plan = obtain_plan(net, cfg);
  const auto runs = run_sweep(net, cfg, {Policy::Pwcg, Policy::Ldpp}, plan);
  emit_table(cfg, compare_csv(cfg, runs), runs);
  return 0;
}

int cmd_cycles(const Config& cfg) {
  const auto net = load_network_file(cfg.topology);
  const auto cycles = enumerate_cycles(net, cfg.max_hops);
  std::printf("%zu cycles with at most %d hops\n", cycles.size(), cfg.max_hops);
  for (std::size_t p = 0; p < cycles.size(); ++p) {
    const auto& c = cycles[p];
    Path walk;
    walk.nodes = c.nodes;
    walk.nodes.push_back(c.nodes.front());
    std::string on, straddling;
    for (LinkId l = 0; l < net.link_count(); ++l) {
      std::string& dst = c.role(l) == CycleRole::OnCycle ? on : straddling;
      if (c.role(l) == CycleRole::None) continue;
      if (!dst.empty()) dst += " ";
      dst += net.describe_link(l);
    }
    std::printf("[%zu] %s\n    on-cycle: %s\n    straddling: %s\n", p, net.describe(walk).c_str(), on.c_str(),
                straddling.empty() ? "-" : straddling.c_str());
  }
  if (!cycles.empty()) {
    std::printf("\npi/X per link (columns are cycles):\n");
    for (LinkId l = 0; l < net.link_count(); ++l) {
      std::printf("%-28s", net.describe_link(l).c_str());
      for (const auto& c : cycles) {
        std::printf(" %d/%d", c.pi[static_cast<std::size_t>(l)], c.x[static_cast<std::size_t>(l)]);
      }
      std::printf("\n");
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Protection-aware core-group planning and simulation for multicore fiber networks"};
  app.require_subcommand(1);
  Flags flags;
  auto* plan = app.add_subcommand("plan", "Solve the core-group plan and print per-link S/P/UP");
  auto* simulate = app.add_subcommand("simulate", "Run loads x seeds for one policy and write metrics CSV");
  auto* compare = app.add_subcommand("compare", "Run PWCG and LDPP on identical traces and write paired CSV");
  auto* cycles = app.add_subcommand("cycles", "List candidate protection cycles with on-cycle/straddling links");
  for (auto* cmd : {plan, simulate, compare, cycles}) add_shared(cmd, flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    const Config cfg = resolve(flags);
    if (plan->parsed()) return cmd_plan(cfg);
    if (simulate->parsed()) return cmd_simulate(cfg);
    if (compare->parsed()) return cmd_compare(cfg);
    if (cycles->parsed()) return cmd_cycles(cfg);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
