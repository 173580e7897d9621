// Acceptance harness: one PASS/FAIL line per criterion. argv[1] is the CLI binary.
#include <array>
#include <chrono>
#include <cstdio>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "../test_support.hpp"

using namespace pwcg;
using Clock = std::chrono::steady_clock;

namespace {

int failures = 0;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

void report(int id, const std::string& name, bool ok, const std::string& detail) {
  std::cout << (ok ? "PASS" : "FAIL") << " " << id << " " << name << ": " << detail << std::endl;
  if (!ok) ++failures;
}

void note(const std::string& text) { std::cout << "     " << text << std::endl; }

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

template <typename F>
void guarded(int id, const std::string& name, F body) {
  try {
    body();
  } catch (const std::exception& e) {
    report(id, name, false, std::string("exception: ") + e.what());
  }
}

void planner_feasibility() {
  const auto t0 = Clock::now();
  auto net = testing::fixture("finland12");
  auto cycles = enumerate_cycles(net, 8);
  auto params = default_parameters(net.layout());
  auto plan = solve_bnb(build_model(net, cycles, params));
  const auto violations = validate_plan(net, cycles, params, plan);
  bool range_ok = true;
  for (const auto& c : plan.capacities) range_ok = range_ok && c.protect >= 1 && c.protect <= 2;
  const double t = seconds_since(t0);
  report(1, "planner feasibility", violations.empty() && range_ok && t <= 60,
         std::to_string(violations.size()) + " violations, P in [1,2] " + (range_ok ? "yes" : "no") +
             ", objective " + fmt(plan.objective) + ", " + fmt(t) + " s");
}

void solver_optimality() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(2025);
  int instances = 0, solved = 0, agree = 0;
  for (int trial = 0; instances < 25 && trial < 1000; ++trial) {
    auto net = testing::random_net(rng, 4 + trial % 3, 1 + trial % 5);
    auto cycles = enumerate_cycles(net, 6);
    if (cycles.empty()) continue;
    if (cycles.size() > 8) cycles.resize(8);
    auto params = default_parameters(net.layout());
    params.cp = std::uniform_int_distribution<int>(1, 5)(rng);
    params.cu = std::uniform_int_distribution<int>(1, 5)(rng);
    params.cs = std::uniform_int_distribution<int>(1, 5)(rng);
    params.wmin = std::uniform_int_distribution<int>(0, 1)(rng);
    params.wmax = std::uniform_int_distribution<int>(2, 5)(rng);
    auto model = build_model(net, cycles, params);
    model.set_copy_cap(3);
    ++instances;
    std::optional<double> a, b;
    try {
      a = solve_bnb(model).objective;
    } catch (const Error& e) {
      if (e.code() != Errc::Infeasible) throw;
    }
    try {
      b = solve_exhaustive(model, 3).objective;
    } catch (const Error& e) {
      if (e.code() != Errc::Infeasible) throw;
    }
    if (a) ++solved;
    if (a == b) ++agree;
  }
  const double t = seconds_since(t0);
  report(2, "solver optimality", instances == 25 && agree == 25 && t <= 300,
         std::to_string(agree) + "/" + std::to_string(instances) + " objectives equal (" + std::to_string(solved) +
             " feasible), " + fmt(t) + " s");
}

void pcycle_routes() {
  auto net = testing::fixture("hexagon_chord");
  std::vector<ProtectionCycle> outer;
  for (auto& c : enumerate_cycles(net, 8)) {
    if (c.nodes.size() == 6) outer.push_back(c);
  }
  auto params = default_parameters(net.layout());
  auto plan = materialize_plan(build_model(net, outer, params), {1});
  auto map = build_backup_map(net, outer, plan);
  auto routes = [&](const std::string& a, const std::string& b) {
    const LinkId l = net.link_named(a, b);
    std::set<std::string> out;
    for (CoreId k : plan.cores_in(l, CoreGroup::Protected)) out.insert(net.describe(map.find(l, k)->path));
    return out;
  };
  const auto ab = routes("A", "B");
  const auto be = routes("B", "E");
  const bool ok = outer.size() == 1 && ab == std::set<std::string>{"B-C-D-E-F-A"} &&
                  be == std::set<std::string>{"B-A-F-E", "B-C-D-E"};
  std::string detail = "A-B ->";
  for (const auto& r : ab) detail += " " + r;
  detail += "; B-E ->";
  for (const auto& r : be) detail += " " + r;
  report(3, "p-cycle correctness", ok, detail);
}

struct Point {
  std::map<Policy, std::vector<RunResult>> runs;
  double mean(Policy p, double MetricsRow::*m) const {
    double s = 0;
    int n = 0;
    for (const auto& r : runs.at(p)) {
      const double v = r.metrics.*m;
      if (std::isnan(v)) continue;
      s += v;
      ++n;
    }
    return n ? s / n : NAN;
  }
};

void sct1_survivability(const std::vector<RunResult>& sweep) {
  long long affected = 0, restored = 0, runs = 0;
  bool all = true;
  auto count = [&](const RunRecord& r) {
    if (!r.failure) return;
    ++runs;
    affected += r.failure->affected[0];
    restored += r.failure->restored[0];
    all = all && r.failure->affected[0] == r.failure->restored[0];
  };
  for (const auto& r : sweep) {
    if (r.policy == Policy::Pwcg) count(r.record);
  }
  // Every link failing at a busy moment on fresh traces.
  auto net = testing::fixture("finland12");
  Config cfg;
  cfg.requests = 3000;
  auto prepared = solve_plan(net, cfg);
  for (LinkId l = 0; l < net.link_count(); ++l) {
    Scenario sc;
    sc.network = std::make_shared<const Network>(net);
    sc.policy = Policy::Pwcg;
    sc.plan = prepared.plan;
    sc.backups = prepared.backups;
    auto trace = make_trace(net, cfg, 100 + static_cast<std::uint64_t>(l), 3200);
    const double t = trace[trace.size() * 3 / 4].arrival;
    sc.trace = std::make_shared<const std::vector<RequestSpec>>(std::move(trace));
    sc.options = cfg.simulation_options();
    sc.failure = Config::parse_failure("fixed:" + std::to_string(l) + ":" + fmt(t));
    count(run(sc));
  }
  report(4, "guaranteed SCT-I survivability", all && affected > 0,
         std::to_string(restored) + "/" + std::to_string(affected) + " affected SCT-I restored over " +
             std::to_string(runs) + " PWCG failures");
}

std::vector<RunResult> comparative_sweep() {
  const auto t0 = Clock::now();
  auto net = testing::fixture("finland12");
  Config cfg;
  cfg.requests = 20000;
  cfg.iterations = 5;
  auto prepared = solve_plan(net, cfg);
  auto sweep = run_sweep(net, cfg, {Policy::Pwcg, Policy::Ldpp}, prepared);

  std::map<double, Point> points;
  bool same_traces = true;
  for (std::size_t i = 0; i + 1 < sweep.size(); i += 2) {
    same_traces = same_traces && sweep[i].record.trace_hash == sweep[i + 1].record.trace_hash;
  }
  for (auto& r : sweep) points[r.load].runs[r.policy].push_back(r);

  bool a = true, b = true, c = true;
  double acr_p = 0, acr_l = 0, abw_p = 0, abw_l = 0;
  const double top = points.rbegin()->first;
  note("load   cbr pwcg/ldpp        red pwcg/ldpp     PL pwcg/ldpp   ACR pwcg/ldpp   ABW pwcg/ldpp");
  for (const auto& [load, pt] : points) {
    const double cp = pt.mean(Policy::Pwcg, &MetricsRow::cbr), cl = pt.mean(Policy::Ldpp, &MetricsRow::cbr);
    const double rp = pt.mean(Policy::Pwcg, &MetricsRow::redundancy);
    const double rl = pt.mean(Policy::Ldpp, &MetricsRow::redundancy);
    const double pp = pt.mean(Policy::Pwcg, &MetricsRow::protection_level);
    const double pl = pt.mean(Policy::Ldpp, &MetricsRow::protection_level);
    const double ap = pt.mean(Policy::Pwcg, &MetricsRow::acr), al = pt.mean(Policy::Ldpp, &MetricsRow::acr);
    const double wp = pt.mean(Policy::Pwcg, &MetricsRow::abw), wl = pt.mean(Policy::Ldpp, &MetricsRow::abw);
    note(fmt(load) + "   " + fmt(cp) + "/" + fmt(cl) + "   " + fmt(rp) + "/" + fmt(rl) + "   " + fmt(pp) + "/" +
         fmt(pl) + "   " + fmt(ap) + "/" + fmt(al) + "   " + fmt(wp) + "/" + fmt(wl));
    a = a && cp <= cl;
    b = b && rp < rl;
    if (load == top) {
      b = b && rl >= 1.2 * rp;
      c = pp >= pl;
    }
    acr_p += ap / static_cast<double>(points.size());
    acr_l += al / static_cast<double>(points.size());
    abw_p += wp / static_cast<double>(points.size());
    abw_l += wl / static_cast<double>(points.size());
  }
  const bool d = acr_p <= acr_l && abw_p <= abw_l;
  note("mean over seeds and loads: ACR " + fmt(acr_p) + "/" + fmt(acr_l) + ", ABW " + fmt(abw_p) + "/" + fmt(abw_l));
  const double t = seconds_since(t0);
  note("(a) cbr " + std::string(a ? "ok" : "violated") + ", (b) redundancy " + (b ? "ok" : "violated") +
       ", (c) protection " + (c ? "ok" : "violated") + ", (d) acr/abw " + (d ? "ok" : "violated"));
  report(5, "comparative trends", a && b && c && d && same_traces && t <= 900,
         std::string("a=") + (a ? "pass" : "fail") + " b=" + (b ? "pass" : "fail") + " c=" + (c ? "pass" : "fail") +
             " d=" + (d ? "pass" : "fail") + ", paired traces " + (same_traces ? "identical" : "differ") + ", " +
             fmt(t) + " s");

  bool found = false;
  std::string where = "none";
  for (const auto& [load, pt] : points) {
    const double cp = pt.mean(Policy::Pwcg, &MetricsRow::cbr), cl = pt.mean(Policy::Ldpp, &MetricsRow::cbr);
    const double bp = pt.mean(Policy::Pwcg, &MetricsRow::bbr), bl = pt.mean(Policy::Ldpp, &MetricsRow::bbr);
    if (cp <= 0.05 && bp <= 0.05 && cl > cp && !found) {
      found = true;
      where = "load " + fmt(load) + ": pwcg cbr " + fmt(cp) + " bbr " + fmt(bp) + ", ldpp cbr " + fmt(cl) + " bbr " +
              fmt(bl);
    }
  }
  report(6, "blocking magnitude", found, where);
  return sweep;
}

void conservation_fuzz() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(7);
  SpectrumGrid g(5, CoreLayout::hexagonal7(), 320);
  const SpectrumGrid empty = g;
  std::vector<OwnerId> live;
  OwnerId next = 0;
  long long violations = 0, identity_failures = 0, allocations = 0;
  for (int op = 0; op < 10000; ++op) {
    const int kind = static_cast<int>(rng() % 3);
    if (kind == 0 && !live.empty()) {
      const std::size_t i = rng() % live.size();
      g.release(live[i]);
      live.erase(live.begin() + static_cast<std::ptrdiff_t>(i));
    } else {
      std::vector<LinkId> links;
      for (LinkId l = 0; l < 5; ++l) {
        if (rng() % 2) links.push_back(l);
      }
      if (links.empty()) links.push_back(static_cast<LinkId>(rng() % 5));
      std::vector<std::vector<CoreId>> allowed(links.size(), {0, 1, 2, 3, 4, 5, 6});
      const int count = 1 + static_cast<int>(rng() % 16);
      auto fit = first_fit(g, links, count, XtRule{static_cast<int>(rng() % 3)}, allowed);
      if (!fit) continue;
      const auto before = g;
      g.allocate(fit_segments(links, *fit, count), next);
      auto probe = g;
      probe.release(next);
      if (!(probe == before)) ++identity_failures;
      live.push_back(next++);
      ++allocations;
    }
    violations += static_cast<long long>(g.check_conservation().size());
  }
  for (auto id : live) g.release(id);
  if (!(g == empty)) ++identity_failures;
  const double t = seconds_since(t0);
  report(7, "conservation fuzzing", violations == 0 && identity_failures == 0 && t <= 30,
         std::to_string(allocations) + " allocations, " + std::to_string(violations) + " violations, " +
             std::to_string(identity_failures) + " identity failures, " + fmt(t) + " s");
}

std::pair<int, std::string> capture(const std::string& cmd) {
  std::string out;
  FILE* p = popen(cmd.c_str(), "r");
  if (!p) throw std::runtime_error("cannot run " + cmd);
  std::array<char, 4096> buf;
  std::size_t n;
  while ((n = std::fread(buf.data(), 1, buf.size(), p)) > 0) out.append(buf.data(), n);
  return {pclose(p), out};
}

void determinism(const std::string& cli) {
  if (cli.empty()) {
    report(8, "determinism", false, "no CLI path given");
    return;
  }
  const std::string cmd = cli + " compare --topology " + testing::data_path("finland12.json") +
                          " --requests 2000 --iterations 2 --loads 1150 3200 2>/dev/null";
  auto [s1, a] = capture(cmd);
  auto [s2, b] = capture(cmd);
  report(8, "determinism", s1 == 0 && s2 == 0 && !a.empty() && a == b,
         "exit " + std::to_string(s1) + "/" + std::to_string(s2) + ", " + std::to_string(a.size()) + " bytes, " +
             (a == b ? "identical" : "different"));
}

void traffic_statistics() {
  auto net = testing::fixture("finland12");
  Rng rng(31);
  TrafficParameters tp;
  tp.arrival_rate = 10;
  tp.mean_holding = 100;
  auto reqs = generate_requests(rng, 100000, tp, net);
  std::array<double, 3> freq{};
  double holding = 0;
  for (const auto& r : reqs) {
    freq[static_cast<std::size_t>(index(r.sct))] += 1e-5;
    holding += r.holding;
  }
  holding /= 1e5;
  bool ok = std::abs(holding - 100) <= 3;
  for (double f : freq) ok = ok && std::abs(f - 1.0 / 3.0) <= 0.015;
  report(9, "traffic statistics", ok,
         "SCT " + fmt(freq[0]) + "/" + fmt(freq[1]) + "/" + fmt(freq[2]) + ", mean holding " + fmt(holding) +
             " (configured 100)");
}

}  // namespace

int main(int argc, char** argv) {
  const std::string cli = argc > 1 ? argv[1] : "";
  guarded(1, "planner feasibility", planner_feasibility);
  guarded(2, "solver optimality", solver_optimality);
  guarded(3, "p-cycle correctness", pcycle_routes);
  std::vector<RunResult> sweep;
  guarded(5, "comparative trends", [&] { sweep = comparative_sweep(); });
  guarded(4, "guaranteed SCT-I survivability", [&] { sct1_survivability(sweep); });
  guarded(7, "conservation fuzzing", conservation_fuzz);
  guarded(8, "determinism", [&] { determinism(cli); });
  guarded(9, "traffic statistics", traffic_statistics);
  std::cout << (failures ? "FAILED " : "ALL PASSED ") << failures << " criteria failing" << std::endl;
  return failures ? 1 : 0;
}
