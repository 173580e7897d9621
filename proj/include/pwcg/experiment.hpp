#pragma once

#include <bit>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "pwcg/error.hpp"
#include "pwcg/metrics.hpp"
#include "pwcg/plan_io.hpp"
#include "pwcg/planner.hpp"
#include "pwcg/simulator.hpp"
#include "pwcg/topology_io.hpp"
#include "pwcg/traffic.hpp"

namespace pwcg {

// Fully resolved run configuration. Every field has a default; a JSON config
// file and command-line flags override them in that order.
struct Config {
  std::string topology = "data/finland12.json";

  double cp = 3.0, cu = 2.0, cs = 1.0;
  int wmax = 2, wmin = 1;
  bool exact_extremes = false;
  int max_hops = 8;
  std::vector<double> xtc;  // empty: derived from the core layout

  double mean_holding = 1.0;
  int requests = 20000;
  std::vector<double> bandwidth_grid{50, 75, 100, 125, 150, 175, 200, 225, 250};
  double warmup_fraction = 0.1;

  int slices = 320;
  double slice_ghz = 12.5;
  bool xt_enabled = true;
  int xt_h = 1;

  double apv = 1.0;
  double epv_factor = 0.25;
  EpvThreshold epv_threshold = EpvThreshold::AprioriValue;
  LdppFallback ldpp_sct2 = LdppFallback::Degrade;

  std::uint64_t seed = 1;
  int iterations = 20;
  // Offered load in Erlangs (arrival rate x mean holding time).
  std::vector<double> loads{1150, 1500, 2000, 2600, 3200};
  std::string failure = "mttf";
  Policy policy = Policy::Pwcg;

  std::string plan_file;
  std::string out;

  std::vector<std::uint64_t> seeds() const {
    std::vector<std::uint64_t> s;
    for (int i = 0; i < iterations; ++i) s.push_back(seed + static_cast<std::uint64_t>(i));
    return s;
  }

  PlanParameters plan_parameters(const CoreLayout& layout) const {
    PlanParameters p = default_parameters(layout);
    p.cp = cp;
    p.cu = cu;
    p.cs = cs;
    p.wmax = wmax;
    p.wmin = wmin;
    p.exact_extremes = exact_extremes;
    if (!xtc.empty()) p.xtc = xtc;
    p.validate(layout.size());
    return p;
  }

  SimulationOptions simulation_options() const {
    SimulationOptions o;
    o.slices = slices;
    o.slice_ghz = slice_ghz;
    o.xt.max_adjacent_overlap = xt_enabled ? xt_h : std::numeric_limits<int>::max();
    o.apv = apv;
    o.epv_factor = epv_factor;
    o.epv_threshold = epv_threshold;
    o.ldpp_sct2 = ldpp_sct2;
    o.warmup_fraction = warmup_fraction;
    return o;
  }

  void validate() const {
    auto bad = [](const std::string& m) { throw Error(Errc::Config, m); };
    if (requests < 1) bad("requests must be positive");
    if (iterations < 1) bad("iterations must be positive");
    if (loads.empty()) bad("load list is empty");
    for (double l : loads) {
      if (!(l > 0)) bad("loads must be positive");
    }
    if (!(mean_holding > 0)) bad("mean_holding must be positive");
    if (bandwidth_grid.empty()) bad("bandwidth grid is empty");
    if (max_hops < 3) bad("max_hops must be at least 3");
    if (xt_h < 0) bad("xt h must be non-negative");
    if (!(warmup_fraction >= 0) || !(warmup_fraction < 1)) bad("warmup_fraction must be in [0,1)");
    parse_failure(failure);
  }

  static FailureSchedule parse_failure(const std::string& s) {
    FailureSchedule f;
    if (s == "mttf") return f;
    if (s == "none") {
      f.mode = FailureSchedule::Mode::None;
      return f;
    }
    if (s.rfind("fixed:", 0) == 0) {
      const auto rest = s.substr(6);
      const auto colon = rest.find(':');
      try {
        if (colon == std::string::npos) throw std::invalid_argument(s);
        std::size_t used = 0;
        f.link = std::stoi(rest.substr(0, colon), &used);
        if (used != colon) throw std::invalid_argument(s);
        f.time = std::stod(rest.substr(colon + 1), &used);
        if (used != rest.size() - colon - 1) throw std::invalid_argument(s);
      } catch (const std::exception&) {
        throw Error(Errc::Config, "failure must be mttf, none or fixed:<link>:<time>, got '" + s + "'");
      }
      f.mode = FailureSchedule::Mode::Fixed;
      return f;
    }
    throw Error(Errc::Config, "failure must be mttf, none or fixed:<link>:<time>, got '" + s + "'");
  }
};

inline nlohmann::json to_json(const Config& c) {
  return {
      {"topology", c.topology},
      {"planner",
       {{"cp", c.cp}, {"cu", c.cu}, {"cs", c.cs}, {"wmax", c.wmax}, {"wmin", c.wmin},
        {"exact_extremes", c.exact_extremes}, {"max_hops", c.max_hops}, {"xtc", c.xtc}}},
      {"traffic",
       {{"mean_holding", c.mean_holding}, {"requests", c.requests}, {"bandwidth_grid", c.bandwidth_grid},
        {"warmup_fraction", c.warmup_fraction}}},
      {"spectrum", {{"slices", c.slices}, {"slice_ghz", c.slice_ghz}}},
      {"xt", {{"mode", c.xt_enabled ? "adjacent" : "off"}, {"h", c.xt_h}}},
      {"epv",
       {{"apv", c.apv}, {"factor", c.epv_factor},
        {"threshold", c.epv_threshold == EpvThreshold::AprioriValue ? "apriori" : "reserved_fraction"}}},
      {"ldpp", {{"sct2_without_backup", c.ldpp_sct2 == LdppFallback::Degrade ? "degrade" : "block"}}},
      {"seed", c.seed},
      {"iterations", c.iterations},
      {"loads", c.loads},
      {"failure", c.failure},
      {"policy", to_string(c.policy)},
      {"plan_file", c.plan_file},
      {"out", c.out},
      {"rng", Rng::kAlgorithm},
  };
}

namespace detail {

template <typename T>
void maybe(const nlohmann::json& obj, const char* key, T& dst, const std::string& where) {
  if (obj.is_object() && obj.contains(key)) dst = field<T>(obj, key, where);
}

inline const nlohmann::json& section(const nlohmann::json& j, const char* key) {
  static const nlohmann::json empty = nlohmann::json::object();
  if (!j.contains(key)) return empty;
  if (!j[key].is_object()) throw Error(Errc::Parse, std::string("config.") + key + " must be an object");
  return j[key];
}

}  // namespace detail

inline Policy parse_policy(const std::string& s) {
  if (s == "pwcg") return Policy::Pwcg;
  if (s == "ldpp") return Policy::Ldpp;
  throw Error(Errc::Config, "policy must be pwcg or ldpp, got '" + s + "'");
}

// Applies the fields present in `j` on top of `c`.
inline Config merge_config(Config c, const nlohmann::json& j) {
  using detail::maybe;
  using detail::section;
  if (!j.is_object()) throw Error(Errc::Parse, "config: document must be an object");
  maybe(j, "topology", c.topology, "config");
  const auto& pl = section(j, "planner");
  maybe(pl, "cp", c.cp, "config.planner");
  maybe(pl, "cu", c.cu, "config.planner");
  maybe(pl, "cs", c.cs, "config.planner");
  maybe(pl, "wmax", c.wmax, "config.planner");
  maybe(pl, "wmin", c.wmin, "config.planner");
  maybe(pl, "exact_extremes", c.exact_extremes, "config.planner");
  maybe(pl, "max_hops", c.max_hops, "config.planner");
  maybe(pl, "xtc", c.xtc, "config.planner");
  const auto& tr = section(j, "traffic");
  maybe(tr, "mean_holding", c.mean_holding, "config.traffic");
  maybe(tr, "requests", c.requests, "config.traffic");
  maybe(tr, "bandwidth_grid", c.bandwidth_grid, "config.traffic");
  maybe(tr, "warmup_fraction", c.warmup_fraction, "config.traffic");
  const auto& sp = section(j, "spectrum");
  maybe(sp, "slices", c.slices, "config.spectrum");
  maybe(sp, "slice_ghz", c.slice_ghz, "config.spectrum");
  const auto& xt = section(j, "xt");
  if (xt.contains("mode")) {
    const auto mode = detail::field<std::string>(xt, "mode", "config.xt");
    if (mode != "adjacent" && mode != "off") throw Error(Errc::Config, "xt.mode must be adjacent or off");
    c.xt_enabled = mode == "adjacent";
  }
  maybe(xt, "h", c.xt_h, "config.xt");
  const auto& ep = section(j, "epv");
  maybe(ep, "apv", c.apv, "config.epv");
  maybe(ep, "factor", c.epv_factor, "config.epv");
  if (ep.contains("threshold")) {
    const auto t = detail::field<std::string>(ep, "threshold", "config.epv");
    if (t == "apriori") {
      c.epv_threshold = EpvThreshold::AprioriValue;
    } else if (t == "reserved_fraction") {
      c.epv_threshold = EpvThreshold::ReservedFraction;
    } else {
      throw Error(Errc::Config, "epv.threshold must be apriori or reserved_fraction");
    }
  }
  const auto& ld = section(j, "ldpp");
  if (ld.contains("sct2_without_backup")) {
    const auto v = detail::field<std::string>(ld, "sct2_without_backup", "config.ldpp");
    if (v == "degrade") {
      c.ldpp_sct2 = LdppFallback::Degrade;
    } else if (v == "block") {
      c.ldpp_sct2 = LdppFallback::Block;
    } else {
      throw Error(Errc::Config, "ldpp.sct2_without_backup must be degrade or block");
    }
  }
  maybe(j, "seed", c.seed, "config");
  maybe(j, "iterations", c.iterations, "config");
  maybe(j, "loads", c.loads, "config");
  maybe(j, "failure", c.failure, "config");
  if (j.contains("policy")) c.policy = parse_policy(detail::field<std::string>(j, "policy", "config"));
  maybe(j, "plan_file", c.plan_file, "config");
  maybe(j, "out", c.out, "config");
  return c;
}

inline Config load_config_file(const std::string& path, Config base = {}) {
  return merge_config(std::move(base), detail::parse_json_text(detail::read_text_file(path), path));
}

// Network plus everything PWCG needs at run time.
struct PreparedPlan {
  PlanDocument doc;
  std::shared_ptr<const CoreGroupPlan> plan;
  std::shared_ptr<const BackupMap> backups;
  std::size_t candidate_cycles = 0;
};

inline PreparedPlan finish_plan(const Network& net, PlanDocument doc) {
  auto violations = validate_plan(net, doc.cycles, doc.params, doc.plan);
  if (!violations.empty()) {
    std::string msg = "plan fails validation:";
    for (const auto& v : violations) msg += "\n  " + std::string(to_string(v.constraint)) + ": " + v.detail;
    throw Error(Errc::Config, msg);
  }
  PreparedPlan p;
  p.backups = std::make_shared<const BackupMap>(build_backup_map(net, doc.cycles, doc.plan));
  p.plan = std::make_shared<const CoreGroupPlan>(doc.plan);
  p.doc = std::move(doc);
  return p;
}

inline PreparedPlan solve_plan(const Network& net, const Config& cfg) {
  auto params = cfg.plan_parameters(net.layout());
  auto cycles = enumerate_cycles(net, cfg.max_hops);
  const auto candidates = cycles.size();
  auto model = build_model(net, cycles, params);
  auto plan = solve_bnb(model);
  auto p = finish_plan(net, compact_plan(cycles, plan, params, cfg.max_hops));
  p.candidate_cycles = candidates;
  return p;
}

inline PreparedPlan obtain_plan(const Network& net, const Config& cfg) {
  if (cfg.plan_file.empty()) return solve_plan(net, cfg);
  return finish_plan(net, load_plan_file(net, cfg.plan_file));
}

// The request trace of one (seed, load) point. Both policies see the same one.
inline std::vector<RequestSpec> make_trace(const Network& net, const Config& cfg, std::uint64_t seed,
                                           double load) {
  TrafficParameters tp;
  tp.mean_holding = cfg.mean_holding;
  tp.arrival_rate = load / cfg.mean_holding;
  tp.bandwidth_grid = cfg.bandwidth_grid;
  Rng rng = Rng::stream(seed, std::bit_cast<std::uint64_t>(load));
  return generate_requests(rng, cfg.requests, tp, net);
}

struct RunResult {
  Policy policy = Policy::Pwcg;
  double load = 0.0;
  std::uint64_t seed = 0;
  RunRecord record;
  MetricsRow metrics;
};

// Runs every (load, seed) point for each requested policy, in canonical
// (load, seed, policy) order.
inline std::vector<RunResult> run_sweep(const Network& net, const Config& cfg,
                                        const std::vector<Policy>& policies,
                                        const std::optional<PreparedPlan>& plan) {
  cfg.validate();
  auto network = std::make_shared<const Network>(net);
  const auto failure = Config::parse_failure(cfg.failure);
  std::vector<RunResult> out;
  for (double load : cfg.loads) {
    for (auto seed : cfg.seeds()) {
      auto trace = std::make_shared<const std::vector<RequestSpec>>(make_trace(net, cfg, seed, load));
      for (Policy policy : policies) {
        Scenario sc;
        sc.network = network;
        sc.policy = policy;
        if (policy == Policy::Pwcg) {
          if (!plan) throw Error(Errc::Config, "PWCG run needs a plan");
          sc.plan = plan->plan;
          sc.backups = plan->backups;
        }
        sc.trace = trace;
        sc.failure = failure;
        sc.seed = seed;
        sc.options = cfg.simulation_options();
        RunResult r;
        r.policy = policy;
        r.load = load;
        r.seed = seed;
        r.record = run(std::move(sc));
        if (r.record.failure && policy == Policy::Pwcg &&
            r.record.failure->restored[index(Sct::I)] != r.record.failure->affected[index(Sct::I)]) {
          throw Error(Errc::Internal, "affected SCT-I connection was not restored");
        }
        r.metrics = metrics_of(r.record);
        out.push_back(std::move(r));
      }
    }
  }
  return out;
}

inline std::string config_comment(const Config& cfg) { return "# config: " + to_json(cfg).dump(); }

// Per-run rows sorted by (load, seed), followed by mean and stddev rows per load.
inline std::string simulate_csv(const Config& cfg, const std::vector<RunResult>& runs) {
  std::ostringstream os;
  os << config_comment(cfg) << "\n" << kCsvHeader << "\n";
  for (double load : cfg.loads) {
    std::vector<MetricsRow> rows;
    std::string policy;
    for (const auto& r : runs) {
      if (r.load != load) continue;
      policy = to_string(r.policy);
      os << csv_row(policy, load, std::to_string(r.seed), r.metrics) << "\n";
      rows.push_back(r.metrics);
    }
    if (rows.empty()) continue;
    auto s = aggregate(rows);
    os << csv_row(policy, load, "mean", s.mean) << "\n";
    os << csv_row(policy, load, "stddev", s.stddev) << "\n";
  }
  return os.str();
}

// For every (load, seed): a pwcg row, an ldpp row and a delta row (pwcg minus
// ldpp); then mean and stddev rows per policy and the mean delta per load.
inline std::string compare_csv(const Config& cfg, const std::vector<RunResult>& runs) {
  std::ostringstream os;
  os << config_comment(cfg) << "\n" << kCsvHeader << "\n";
  for (double load : cfg.loads) {
    std::vector<MetricsRow> pw, ld, dl;
    for (auto seed : cfg.seeds()) {
      const RunResult* a = nullptr;
      const RunResult* b = nullptr;
      for (const auto& r : runs) {
        if (r.load != load || r.seed != seed) continue;
        (r.policy == Policy::Pwcg ? a : b) = &r;
      }
      if (!a || !b) throw Error(Errc::Internal, "compare run is missing a policy");
      const auto d = difference(a->metrics, b->metrics);
      const auto key = std::to_string(seed);
      os << csv_row("pwcg", load, key, a->metrics) << "\n";
      os << csv_row("ldpp", load, key, b->metrics) << "\n";
      os << csv_row("delta", load, key, d) << "\n";
      pw.push_back(a->metrics);
      ld.push_back(b->metrics);
      dl.push_back(d);
    }
    const auto sp = aggregate(pw);
    const auto sl = aggregate(ld);
    const auto sd = aggregate(dl);
    os << csv_row("pwcg", load, "mean", sp.mean) << "\n";
    os << csv_row("pwcg", load, "stddev", sp.stddev) << "\n";
    os << csv_row("ldpp", load, "mean", sl.mean) << "\n";
    os << csv_row("ldpp", load, "stddev", sl.stddev) << "\n";
    os << csv_row("delta", load, "mean", sd.mean) << "\n";
  }
  return os.str();
}

inline nlohmann::json metrics_json(const MetricsRow& m) {
  auto v = [](double x) { return std::isnan(x) ? nlohmann::json(nullptr) : nlohmann::json(x); };
  return {{"cbr", v(m.cbr)},   {"bbr", v(m.bbr)}, {"acr", v(m.acr)}, {"abw", v(m.abw)},
          {"protection_level", v(m.protection_level)}, {"redundancy", v(m.redundancy)}};
}

// JSON mirror of the CSV plus per-run metadata (trace hash, failure details).
inline nlohmann::json summary_json(const Config& cfg, const std::vector<RunResult>& runs) {
  nlohmann::json j;
  j["config"] = to_json(cfg);
  j["columns"] = kCsvHeader;
  j["runs"] = nlohmann::json::array();
  for (const auto& r : runs) {
    nlohmann::json run = {{"policy", to_string(r.policy)},
                          {"load", r.load},
                          {"seed", r.seed},
                          {"trace_hash", r.record.trace_hash},
                          {"arrivals", r.record.arrivals()},
                          {"blocked", r.record.blocked()},
                          {"no_modulation_blocks", r.record.no_modulation_blocks},
                          {"metrics", metrics_json(r.metrics)}};
    if (r.record.failure) {
      const auto& f = *r.record.failure;
      run["failure"] = {{"link", f.link},         {"time", f.time},           {"affected", f.affected},
                        {"restored", f.restored}, {"dropped", f.dropped},     {"preempted", f.preempted},
                        {"affected_slots", f.affected_slots}};
    }
    j["runs"].push_back(std::move(run));
  }
  return j;
}

// Process exit code for a library error.
inline int exit_code(Errc e) {
  switch (e) {
    case Errc::Parse:
    case Errc::Validation:
    case Errc::UnknownNode:
    case Errc::Config:
    case Errc::Io: return 2;
    case Errc::Infeasible:
    case Errc::SearchSpaceTooLarge: return 3;
    case Errc::Internal:
    case Errc::DoubleAllocation:
    case Errc::UnknownOwner: return 4;
    default: return 1;
  }
}

}  // namespace pwcg
