#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "pwcg/planner.hpp"
#include "pwcg/topology_io.hpp"

namespace pwcg {

// A solved plan together with the cycles its copy counts refer to.
struct PlanDocument {
  int max_hops = 0;
  PlanParameters params;
  std::vector<ProtectionCycle> cycles;  // only cycles with at least one copy
  CoreGroupPlan plan;
};

// Keeps the cycles that received copies so the stored plan stays small.
inline PlanDocument compact_plan(const std::vector<ProtectionCycle>& cycles, const CoreGroupPlan& plan,
                                 const PlanParameters& params, int max_hops) {
  PlanDocument doc;
  doc.max_hops = max_hops;
  doc.params = params;
  doc.plan = plan;
  doc.plan.copies.clear();
  for (std::size_t p = 0; p < cycles.size(); ++p) {
    if (plan.copies[p] == 0) continue;
    doc.cycles.push_back(cycles[p]);
    doc.plan.copies.push_back(plan.copies[p]);
  }
  return doc;
}

// {
//   "max_hops": h, "objective": v,
//   "params": {"cp", "cu", "cs", "wmax", "wmin", "exact_extremes", "xtc": [...]},
//   "n": [{"cycle": index, "copies": n, "nodes": [ids], "names": [...]}],
//   "labels": [{"link", "core", "group"}]
// }
inline nlohmann::json plan_to_json(const Network& net, const PlanDocument& doc) {
  nlohmann::json j;
  j["max_hops"] = doc.max_hops;
  j["objective"] = doc.plan.objective;
  j["params"] = {{"cp", doc.params.cp},           {"cu", doc.params.cu},
                 {"cs", doc.params.cs},           {"wmax", doc.params.wmax},
                 {"wmin", doc.params.wmin},       {"exact_extremes", doc.params.exact_extremes},
                 {"xtc", doc.params.xtc}};
  j["n"] = nlohmann::json::array();
  for (std::size_t p = 0; p < doc.cycles.size(); ++p) {
    std::vector<std::string> names;
    for (NodeId n : doc.cycles[p].nodes) names.push_back(net.node(n).name);
    j["n"].push_back({{"cycle", p},
                      {"copies", doc.plan.copies[p]},
                      {"nodes", doc.cycles[p].nodes},
                      {"names", names}});
  }
  j["labels"] = nlohmann::json::array();
  for (LinkId l = 0; l < doc.plan.links(); ++l) {
    for (CoreId k = 0; k < doc.plan.cores(); ++k) {
      j["labels"].push_back({{"link", l}, {"core", k}, {"group", to_string(doc.plan.group(l, k))}});
    }
  }
  return j;
}

// Rebuilds the plan and checks it against the topology; the caller decides
// what to do with validate_plan's verdict.
inline PlanDocument plan_from_json(const Network& net, const nlohmann::json& j) {
  if (!j.is_object()) throw Error(Errc::Parse, "plan: document must be an object");
  PlanDocument doc;
  doc.max_hops = detail::field<int>(j, "max_hops", "plan");
  const auto& jp = j.contains("params") ? j["params"] : nlohmann::json::object();
  doc.params = default_parameters(net.layout());
  if (jp.contains("cp")) doc.params.cp = detail::field<double>(jp, "cp", "plan.params");
  if (jp.contains("cu")) doc.params.cu = detail::field<double>(jp, "cu", "plan.params");
  if (jp.contains("cs")) doc.params.cs = detail::field<double>(jp, "cs", "plan.params");
  if (jp.contains("wmax")) doc.params.wmax = detail::field<int>(jp, "wmax", "plan.params");
  if (jp.contains("wmin")) doc.params.wmin = detail::field<int>(jp, "wmin", "plan.params");
  if (jp.contains("exact_extremes")) {
    doc.params.exact_extremes = detail::field<bool>(jp, "exact_extremes", "plan.params");
  }
  if (jp.contains("xtc")) doc.params.xtc = detail::field<std::vector<double>>(jp, "xtc", "plan.params");

  if (!j.contains("n") || !j["n"].is_array()) throw Error(Errc::Parse, "plan: 'n' must be an array");
  for (std::size_t i = 0; i < j["n"].size(); ++i) {
    const auto& jc = j["n"][i];
    const std::string where = "plan.n[" + std::to_string(i) + "]";
    if (detail::field<std::size_t>(jc, "cycle", where) != i) {
      throw Error(Errc::Parse, where + ": cycles must be listed in index order");
    }
    auto nodes = detail::field<std::vector<int>>(jc, "nodes", where);
    try {
      doc.cycles.push_back(make_cycle(net, std::move(nodes)));
    } catch (const Error& e) {
      throw Error(Errc::Config, where + ": " + e.what());
    }
    doc.plan.copies.push_back(detail::field<int>(jc, "copies", where));
  }

  if (!j.contains("labels") || !j["labels"].is_array()) {
    throw Error(Errc::Parse, "plan: 'labels' must be an array");
  }
  const auto nl = static_cast<std::size_t>(net.link_count());
  const auto nk = static_cast<std::size_t>(net.cores());
  doc.plan.indicators.assign(nl, std::vector<std::uint8_t>(nk, 0));
  doc.plan.delta.assign(nl, std::vector<double>(nk, 0.0));
  for (std::size_t i = 0; i < j["labels"].size(); ++i) {
    const auto& jl = j["labels"][i];
    const std::string where = "plan.labels[" + std::to_string(i) + "]";
    const int l = detail::field<int>(jl, "link", where);
    const int k = detail::field<int>(jl, "core", where);
    if (l < 0 || l >= net.link_count() || k < 0 || k >= net.cores()) {
      throw Error(Errc::Config, "plan does not match topology: " + where + " names link " +
                                    std::to_string(l) + " core " + std::to_string(k));
    }
    auto g = parse_core_group(detail::field<std::string>(jl, "group", where));
    if (!g) throw Error(Errc::Parse, where + ": unknown core group");
    auto& bits = doc.plan.indicators[static_cast<std::size_t>(l)][static_cast<std::size_t>(k)];
    bits |= group_bit(*g);
    doc.plan.delta[static_cast<std::size_t>(l)][static_cast<std::size_t>(k)] = doc.params.cost(*g);
  }
  for (std::size_t l = 0; l < nl; ++l) {
    for (std::size_t k = 0; k < nk; ++k) {
      if (doc.plan.indicators[l][k] == 0) {
        throw Error(Errc::Config, "plan does not match topology: link " + std::to_string(l) + " core " +
                                      std::to_string(k) + " has no label");
      }
    }
  }
  doc.params.validate(net.cores());
  for (LinkId l = 0; l < net.link_count(); ++l) {
    LinkCapacities c;
    for (std::size_t p = 0; p < doc.cycles.size(); ++p) {
      c.spare += doc.cycles[p].pi[static_cast<std::size_t>(l)] * doc.plan.copies[p];
      c.protect += doc.cycles[p].x[static_cast<std::size_t>(l)] * doc.plan.copies[p];
    }
    c.unprotect = net.cores() - c.spare - c.protect;
    doc.plan.capacities.push_back(c);
  }
  doc.plan.objective = detail::field<double>(j, "objective", "plan");
  return doc;
}

inline PlanDocument load_plan_file(const Network& net, const std::string& path) {
  return plan_from_json(net, detail::parse_json_text(detail::read_text_file(path), path));
}

}  // namespace pwcg
