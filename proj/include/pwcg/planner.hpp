#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pwcg/error.hpp"
#include "pwcg/topology.hpp"

namespace pwcg {

// Declaration order is the tie-break order when two groups cost the same.
enum class CoreGroup : std::uint8_t { Spare = 0, Unprotected = 1, Protected = 2 };

inline const char* to_string(CoreGroup g) {
  switch (g) {
    case CoreGroup::Spare: return "SPARE";
    case CoreGroup::Unprotected: return "UNPROTECTED";
    case CoreGroup::Protected: return "PROTECTED";
  }
  return "?";
}

inline std::optional<CoreGroup> parse_core_group(const std::string& s) {
  if (s == "SPARE") return CoreGroup::Spare;
  if (s == "UNPROTECTED") return CoreGroup::Unprotected;
  if (s == "PROTECTED") return CoreGroup::Protected;
  return std::nullopt;
}

inline constexpr std::uint8_t group_bit(CoreGroup g) {
  return static_cast<std::uint8_t>(1u << static_cast<unsigned>(g));
}

struct PlanParameters {
  double cp = 3.0;  // protected working core
  double cu = 2.0;  // unprotected working core
  double cs = 1.0;  // dedicated spare core
  std::vector<double> xtc;  // per-core crosstalk cost, indexed by core
  int wmax = 2;
  int wmin = 1;
  // When set, the largest P_i must equal wmax and the smallest must equal
  // wmin; otherwise wmin/wmax are plain per-link bounds.
  bool exact_extremes = false;

  double cost(CoreGroup g) const {
    switch (g) {
      case CoreGroup::Spare: return cs;
      case CoreGroup::Unprotected: return cu;
      case CoreGroup::Protected: return cp;
    }
    return 0.0;
  }

  void validate(int cores) const {
    if (!(cp > 0) || !(cu > 0) || !(cs > 0)) {
      throw Error(Errc::Validation, "group costs CP, CU, CS must be positive");
    }
    if (static_cast<int>(xtc.size()) != cores) {
      throw Error(Errc::Validation, "XTC vector has " + std::to_string(xtc.size()) +
                                        " entries for " + std::to_string(cores) + " cores");
    }
    for (double v : xtc) {
      if (!(v > 0)) throw Error(Errc::Validation, "XTC values must be positive");
    }
    if (wmin < 0 || wmin > wmax || wmax > cores) {
      throw Error(Errc::Validation, "need 0 <= Wmin <= Wmax <= K");
    }
  }
};

// Crosstalk cost of a core = its number of adjacent cores (at least 1).
inline std::vector<double> default_xtc(const CoreLayout& layout) {
  std::vector<double> xtc(static_cast<std::size_t>(layout.size()));
  for (CoreId k = 0; k < layout.size(); ++k) {
    xtc[static_cast<std::size_t>(k)] =
        std::max<double>(1.0, static_cast<double>(layout.neighbors(k).size()));
  }
  return xtc;
}

inline PlanParameters default_parameters(const CoreLayout& layout) {
  PlanParameters p;
  p.xtc = default_xtc(layout);
  return p;
}

struct LinkCapacities {
  int spare = 0;
  int protect = 0;
  int unprotect = 0;

  int count(CoreGroup g) const {
    switch (g) {
      case CoreGroup::Spare: return spare;
      case CoreGroup::Unprotected: return unprotect;
      case CoreGroup::Protected: return protect;
    }
    return 0;
  }
  friend bool operator==(const LinkCapacities&, const LinkCapacities&) = default;
};

// Cost-minimal labeling of one link: cores in descending XTC order (lower
// index first on ties) receive the cheapest group first.
inline std::vector<CoreGroup> assign_cores(const LinkCapacities& counts,
                                           const PlanParameters& params) {
  const int k = static_cast<int>(params.xtc.size());
  if (counts.spare < 0 || counts.protect < 0 || counts.unprotect < 0 ||
      counts.spare + counts.protect + counts.unprotect != k) {
    throw Error(Errc::Precondition, "core counts must be nonnegative and sum to K");
  }
  std::vector<CoreId> cores(static_cast<std::size_t>(k));
  std::iota(cores.begin(), cores.end(), 0);
  std::stable_sort(cores.begin(), cores.end(), [&](CoreId a, CoreId b) {
    return params.xtc[static_cast<std::size_t>(a)] > params.xtc[static_cast<std::size_t>(b)];
  });
  std::vector<CoreGroup> groups{CoreGroup::Spare, CoreGroup::Unprotected, CoreGroup::Protected};
  std::stable_sort(groups.begin(), groups.end(), [&](CoreGroup a, CoreGroup b) {
    return params.cost(a) < params.cost(b);
  });

  std::vector<CoreGroup> labels(static_cast<std::size_t>(k), CoreGroup::Unprotected);
  std::size_t next = 0;
  for (CoreGroup g : groups) {
    for (int i = 0; i < counts.count(g); ++i) labels[static_cast<std::size_t>(cores[next++])] = g;
  }
  return labels;
}

inline double labeling_cost(std::span<const CoreGroup> labels, const PlanParameters& params) {
  double total = 0.0;
  for (std::size_t k = 0; k < labels.size(); ++k) total += params.xtc[k] * params.cost(labels[k]);
  return total;
}

// A cycle's contribution to one link.
struct CycleIncidence {
  int cycle = 0;
  LinkId link = 0;
  int pi = 0;
  int x = 0;
};

// Integer program over cycle copy counts. Feasible points are the n-vectors
// with S_i = sum(pi * n), P_i = sum(X * n), UP_i = K - S_i - P_i >= 0 and
// Wmin <= P_i <= Wmax on every link; the objective is the cheapest labeling
// of every link.
class PlanModel {
 public:
  PlanModel(const Network& net, std::vector<ProtectionCycle> cycles, PlanParameters params)
      : links_(net.link_count()),
        cores_(net.cores()),
        cycles_(std::move(cycles)),
        params_(std::move(params)) {
    params_.validate(cores_);
    by_link_.assign(static_cast<std::size_t>(links_), {});
    by_cycle_.assign(cycles_.size(), {});
    for (std::size_t p = 0; p < cycles_.size(); ++p) {
      const auto& c = cycles_[p];
      if (static_cast<int>(c.x.size()) != links_ || static_cast<int>(c.pi.size()) != links_) {
        throw Error(Errc::Validation, "cycle " + std::to_string(p) + " does not match network");
      }
      for (LinkId l = 0; l < links_; ++l) {
        const int pi = c.pi[static_cast<std::size_t>(l)];
        const int x = c.x[static_cast<std::size_t>(l)];
        if (pi == 0 && x == 0) continue;
        CycleIncidence inc{static_cast<int>(p), l, pi, x};
        by_link_[static_cast<std::size_t>(l)].push_back(inc);
        by_cycle_[p].push_back(inc);
      }
    }
    copy_cap_ = std::min(params_.wmax, cores_);
    for (LinkId l = 0; l < links_; ++l) {
      if (by_link_[static_cast<std::size_t>(l)].empty() && params_.wmin > 0) {
        uncovered_.push_back(l);
      }
    }
    build_cost_table();
  }

  int links() const { return links_; }
  int cores() const { return cores_; }
  const std::vector<ProtectionCycle>& cycles() const { return cycles_; }
  const PlanParameters& params() const { return params_; }
  const std::vector<CycleIncidence>& incidence_of_link(LinkId l) const {
    return by_link_[static_cast<std::size_t>(l)];
  }
  const std::vector<CycleIncidence>& incidence_of_cycle(int p) const {
    return by_cycle_[static_cast<std::size_t>(p)];
  }

  // Links no candidate cycle covers or straddles while Wmin > 0.
  const std::vector<LinkId>& uncovered_links() const { return uncovered_; }
  bool infeasible_by_construction() const { return !uncovered_.empty(); }

  int copy_cap() const { return copy_cap_; }
  void set_copy_cap(int cap) {
    if (cap < 0) throw Error(Errc::Precondition, "copy cap must be nonnegative");
    copy_cap_ = cap;
  }

  LinkCapacities capacities(LinkId l, std::span<const int> copies) const {
    LinkCapacities c;
    for (const auto& inc : incidence_of_link(l)) {
      const int n = copies[static_cast<std::size_t>(inc.cycle)];
      c.spare += inc.pi * n;
      c.protect += inc.x * n;
    }
    c.unprotect = cores_ - c.spare - c.protect;
    return c;
  }

  bool link_feasible(const LinkCapacities& c) const {
    return c.unprotect >= 0 && c.protect >= params_.wmin && c.protect <= params_.wmax;
  }

  // Cheapest labeling cost of a link holding `spare` spare and `protect`
  // protected cores; infinity when the pair does not fit in K cores.
  double link_cost(int spare, int protect) const {
    if (spare < 0 || protect < 0 || spare + protect > cores_) {
      return std::numeric_limits<double>::infinity();
    }
    return cost_table_[static_cast<std::size_t>(spare * (cores_ + 1) + protect)];
  }

  // Feasibility of a complete n-vector, including the exact-extremes reading.
  bool feasible(std::span<const int> copies) const {
    int lo = std::numeric_limits<int>::max();
    int hi = std::numeric_limits<int>::min();
    for (LinkId l = 0; l < links_; ++l) {
      auto c = capacities(l, copies);
      if (!link_feasible(c)) return false;
      lo = std::min(lo, c.protect);
      hi = std::max(hi, c.protect);
    }
    if (params_.exact_extremes && links_ > 0 && (lo != params_.wmin || hi != params_.wmax)) {
      return false;
    }
    return true;
  }

  double objective(std::span<const int> copies) const {
    double total = 0.0;
    for (LinkId l = 0; l < links_; ++l) {
      auto c = capacities(l, copies);
      total += link_cost(c.spare, c.protect);
    }
    return total;
  }

 private:
  void build_cost_table() {
    cost_table_.assign(static_cast<std::size_t>((cores_ + 1) * (cores_ + 1)),
                       std::numeric_limits<double>::infinity());
    for (int s = 0; s <= cores_; ++s) {
      for (int p = 0; s + p <= cores_; ++p) {
        LinkCapacities c{s, p, cores_ - s - p};
        cost_table_[static_cast<std::size_t>(s * (cores_ + 1) + p)] =
            labeling_cost(assign_cores(c, params_), params_);
      }
    }
  }

  int links_;
  int cores_;
  std::vector<ProtectionCycle> cycles_;
  PlanParameters params_;
  std::vector<std::vector<CycleIncidence>> by_link_;
  std::vector<std::vector<CycleIncidence>> by_cycle_;
  std::vector<LinkId> uncovered_;
  std::vector<double> cost_table_;
  int copy_cap_ = 0;
};

inline PlanModel build_model(const Network& net, std::vector<ProtectionCycle> cycles,
                             PlanParameters params) {
  return PlanModel(net, std::move(cycles), std::move(params));
}

// Solved core partition. `indicators[l][k]` holds one group bit per group the
// core belongs to; a well-formed plan has exactly one bit set everywhere.
struct CoreGroupPlan {
  std::vector<int> copies;
  std::vector<LinkCapacities> capacities;
  std::vector<std::vector<std::uint8_t>> indicators;
  std::vector<std::vector<double>> delta;
  double objective = 0.0;

  int links() const { return static_cast<int>(indicators.size()); }
  int cores() const { return indicators.empty() ? 0 : static_cast<int>(indicators[0].size()); }

  bool in_group(LinkId l, CoreId k, CoreGroup g) const {
    return (indicators[static_cast<std::size_t>(l)][static_cast<std::size_t>(k)] & group_bit(g)) != 0;
  }

  CoreGroup group(LinkId l, CoreId k) const {
    const auto bits = indicators[static_cast<std::size_t>(l)][static_cast<std::size_t>(k)];
    for (CoreGroup g : {CoreGroup::Spare, CoreGroup::Unprotected, CoreGroup::Protected}) {
      if (bits == group_bit(g)) return g;
    }
    throw Error(Errc::Internal, "core " + std::to_string(k) + " on link " + std::to_string(l) +
                                    " does not carry exactly one group");
  }

  std::vector<CoreId> cores_in(LinkId l, CoreGroup g) const {
    std::vector<CoreId> out;
    for (CoreId k = 0; k < cores(); ++k) {
      if (in_group(l, k, g)) out.push_back(k);
    }
    return out;
  }
};

inline CoreGroupPlan materialize_plan(const PlanModel& model, std::vector<int> copies) {
  CoreGroupPlan plan;
  plan.copies = std::move(copies);
  const auto& params = model.params();
  for (LinkId l = 0; l < model.links(); ++l) {
    auto caps = model.capacities(l, plan.copies);
    auto labels = assign_cores(caps, params);
    std::vector<std::uint8_t> bits(labels.size());
    std::vector<double> delta(labels.size());
    for (std::size_t k = 0; k < labels.size(); ++k) {
      bits[k] = group_bit(labels[k]);
      delta[k] = params.cost(labels[k]);
      plan.objective += params.xtc[k] * delta[k];
    }
    plan.capacities.push_back(caps);
    plan.indicators.push_back(std::move(bits));
    plan.delta.push_back(std::move(delta));
  }
  return plan;
}

namespace detail {

inline constexpr double kCostEps = 1e-9;

inline void throw_if_uncovered(const PlanModel& model) {
  if (!model.infeasible_by_construction()) return;
  std::string list;
  for (LinkId l : model.uncovered_links()) list += (list.empty() ? "" : ",") + std::to_string(l);
  throw Error(Errc::Infeasible, "no candidate cycle covers or straddles link(s) " + list);
}

// Depth-first branch and bound over cycles in canonical order with copy
// counts tried in ascending order, so the first optimum reached is the
// lexicographically smallest one; ties never replace the incumbent.
//
// Every candidate cycle adds n to S_i and n to P_i on its own links and 2n to
// P_i on straddling links, so a link is described by its on-cycle copy total s
// and straddling copy total t (S_i = s, P_i = s + 2t). The bound takes, for
// each link separately, the cheapest feasible (s, t) inside the box spanned
// by the fixed copies and the caps of the still-free cycles.
class BranchAndBound {
 public:
  explicit BranchAndBound(const PlanModel& model)
      : model_(model),
        k_(model.cores()),
        tmax_(model.cores() / 2),
        ncycles_(static_cast<int>(model.cycles().size())) {
    build_box_table();
    const auto nl = static_cast<std::size_t>(model.links());
    s_fix_.assign(nl, 0);
    t_fix_.assign(nl, 0);
    s_rem_.assign(nl, 0);
    t_rem_.assign(nl, 0);
    for (int p = 0; p < ncycles_; ++p) {
      for (const auto& inc : model.incidence_of_cycle(p)) {
        if (inc.x == 1) s_rem_[static_cast<std::size_t>(inc.link)] += model.copy_cap();
        if (inc.x == 2) t_rem_[static_cast<std::size_t>(inc.link)] += model.copy_cap();
      }
    }
    copies_.assign(static_cast<std::size_t>(ncycles_), 0);
  }

  std::optional<std::vector<int>> solve() {
    search(0);
    return best_;
  }

  std::uint64_t nodes() const { return nodes_; }

 private:
  std::size_t box_index(int slo, int shi, int tlo, int thi) const {
    const int sk = k_ + 1;
    const int tk = tmax_ + 1;
    return static_cast<std::size_t>(((slo * sk + shi) * tk + tlo) * tk + thi);
  }

  void build_box_table() {
    const auto& params = model_.params();
    const double inf = std::numeric_limits<double>::infinity();
    box_.assign(static_cast<std::size_t>((k_ + 1) * (k_ + 1) * (tmax_ + 1) * (tmax_ + 1)), inf);
    for (int slo = 0; slo <= k_; ++slo) {
      for (int shi = slo; shi <= k_; ++shi) {
        for (int tlo = 0; tlo <= tmax_; ++tlo) {
          for (int thi = tlo; thi <= tmax_; ++thi) {
            double best = inf;
            for (int s = slo; s <= shi; ++s) {
              for (int t = tlo; t <= thi; ++t) {
                const int p = s + 2 * t;
                if (s + p > k_ || p < params.wmin || p > params.wmax) continue;
                best = std::min(best, model_.link_cost(s, p));
              }
            }
            box_[box_index(slo, shi, tlo, thi)] = best;
          }
        }
      }
    }
  }

  double link_bound(std::size_t l) const {
    const int slo = s_fix_[l];
    const int tlo = t_fix_[l];
    if (slo > k_ || tlo > tmax_) return std::numeric_limits<double>::infinity();
    const int shi = std::min(k_, slo + s_rem_[l]);
    const int thi = std::min(tmax_, tlo + t_rem_[l]);
    return box_[box_index(slo, shi, tlo, thi)];
  }

  double bound() const {
    double total = 0.0;
    for (std::size_t l = 0; l < s_fix_.size(); ++l) {
      const double b = link_bound(l);
      if (b == std::numeric_limits<double>::infinity()) return b;
      total += b;
    }
    return total;
  }

  int max_value(int p) const {
    const auto& params = model_.params();
    int v = model_.copy_cap();
    for (const auto& inc : model_.incidence_of_cycle(p)) {
      const auto l = static_cast<std::size_t>(inc.link);
      const int s = s_fix_[l];
      const int t = t_fix_[l];
      const int prot = s + 2 * t;
      const int used = s + prot;
      if (inc.x == 1) {
        v = std::min({v, params.wmax - prot, (k_ - used) / 2});
      } else {
        v = std::min({v, (params.wmax - prot) / 2, (k_ - used) / 2});
      }
    }
    return std::max(v, -1);
  }

  void apply(int p, int value, int sign) {
    const int cap = model_.copy_cap();
    for (const auto& inc : model_.incidence_of_cycle(p)) {
      const auto l = static_cast<std::size_t>(inc.link);
      if (inc.x == 1) {
        s_fix_[l] += sign * value;
        s_rem_[l] -= sign * cap;
      } else {
        t_fix_[l] += sign * value;
        t_rem_[l] -= sign * cap;
      }
    }
  }

  void search(int p) {
    ++nodes_;
    const double lb = bound();
    if (lb == std::numeric_limits<double>::infinity()) return;
    if (best_ && lb >= best_value_ - kCostEps) return;
    if (p == ncycles_) {
      if (model_.params().exact_extremes && !model_.feasible(copies_)) return;
      best_ = copies_;
      best_value_ = lb;
      return;
    }
    const int vmax = max_value(p);
    for (int v = 0; v <= vmax; ++v) {
      copies_[static_cast<std::size_t>(p)] = v;
      apply(p, v, +1);
      search(p + 1);
      apply(p, v, -1);
    }
    copies_[static_cast<std::size_t>(p)] = 0;
  }

  const PlanModel& model_;
  int k_;
  int tmax_;
  int ncycles_;
  std::vector<double> box_;
  std::vector<int> s_fix_, t_fix_, s_rem_, t_rem_;
  std::vector<int> copies_;
  std::optional<std::vector<int>> best_;
  double best_value_ = std::numeric_limits<double>::infinity();
  std::uint64_t nodes_ = 0;
};

}  // namespace detail

// Globally optimal plan; among equal objectives the lexicographically smallest
// copy vector (cycles in canonical order).
inline CoreGroupPlan solve_bnb(const PlanModel& model) {
  detail::throw_if_uncovered(model);
  detail::BranchAndBound bnb(model);
  auto best = bnb.solve();
  if (!best) {
    throw Error(Errc::Infeasible, "no copy vector satisfies Wmin <= P_i <= Wmax and UP_i >= 0");
  }
  return materialize_plan(model, std::move(*best));
}

// Same contract as solve_bnb, by enumerating every copy vector with entries
// in 0..cap in lexicographic order.
inline CoreGroupPlan solve_exhaustive(const PlanModel& model, int cap) {
  if (cap < 0) throw Error(Errc::Precondition, "copy cap must be nonnegative");
  const std::size_t n = model.cycles().size();
  double points = 1.0;
  for (std::size_t i = 0; i < n; ++i) {
    points *= static_cast<double>(cap + 1);
    if (points > 1e7) {
      throw Error(Errc::SearchSpaceTooLarge,
                  std::to_string(n) + " cycles with cap " + std::to_string(cap));
    }
  }
  detail::throw_if_uncovered(model);

  std::vector<int> copies(n, 0);
  std::optional<std::vector<int>> best;
  double best_value = std::numeric_limits<double>::infinity();
  while (true) {
    if (model.feasible(copies)) {
      const double value = model.objective(copies);
      if (value < best_value - detail::kCostEps) {
        best_value = value;
        best = copies;
      }
    }
    std::size_t i = n;
    while (i > 0 && copies[i - 1] == cap) copies[--i] = 0;
    if (i == 0) break;
    ++copies[i - 1];
  }
  if (!best) throw Error(Errc::Infeasible, "exhaustive search found no feasible copy vector");
  return materialize_plan(model, std::move(*best));
}

enum class Constraint {
  CopyCount,            // n_p integer, nonnegative, one per cycle
  SpareFromCycles,      // S_i = sum pi * n
  ProtectedFromCycles,  // P_i = sum X * n
  CoreBudget,           // S_i + P_i + UP_i = K, UP_i >= 0
  ProtectedBounds,      // Wmin <= P_i <= Wmax (and attained, in exact mode)
  SpareLabels,          // sum_k SL = S_i
  ProtectedLabels,      // sum_k PL = P_i
  UnprotectedLabels,    // sum_k UPL = UP_i
  SingleGroup,          // SL + PL + UPL = 1 per core
  CoreCost,             // delta = CS*SL + CU*UPL + CP*PL
  Objective,            // objective = sum XTC_k * delta
};

inline const char* to_string(Constraint c) {
  switch (c) {
    case Constraint::CopyCount: return "copy-count";
    case Constraint::SpareFromCycles: return "spare-from-cycles";
    case Constraint::ProtectedFromCycles: return "protected-from-cycles";
    case Constraint::CoreBudget: return "core-budget";
    case Constraint::ProtectedBounds: return "protected-bounds";
    case Constraint::SpareLabels: return "spare-label-count";
    case Constraint::ProtectedLabels: return "protected-label-count";
    case Constraint::UnprotectedLabels: return "unprotected-label-count";
    case Constraint::SingleGroup: return "single-group";
    case Constraint::CoreCost: return "core-cost";
    case Constraint::Objective: return "objective";
  }
  return "?";
}

struct Violation {
  Constraint constraint;
  LinkId link = -1;
  CoreId core = -1;
  std::string detail;
};

inline std::vector<Violation> validate_plan(const Network& net,
                                            const std::vector<ProtectionCycle>& cycles,
                                            const PlanParameters& params,
                                            const CoreGroupPlan& plan) {
  std::vector<Violation> out;
  const int k = net.cores();
  const int nl = net.link_count();
  auto add = [&](Constraint c, LinkId l, CoreId core, std::string msg) {
    out.push_back({c, l, core, std::move(msg)});
  };

  if (plan.copies.size() != cycles.size()) {
    add(Constraint::CopyCount, -1, -1,
        std::to_string(plan.copies.size()) + " copy counts for " + std::to_string(cycles.size()) +
            " cycles");
    return out;
  }
  for (std::size_t p = 0; p < plan.copies.size(); ++p) {
    if (plan.copies[p] < 0) add(Constraint::CopyCount, -1, -1, "cycle " + std::to_string(p) + " negative");
  }
  if (plan.links() != nl || static_cast<int>(plan.capacities.size()) != nl ||
      static_cast<int>(plan.delta.size()) != nl) {
    add(Constraint::CoreBudget, -1, -1, "plan does not cover every link");
    return out;
  }

  double objective = 0.0;
  int lo = std::numeric_limits<int>::max();
  int hi = std::numeric_limits<int>::min();
  for (LinkId l = 0; l < nl; ++l) {
    const auto li = static_cast<std::size_t>(l);
    int s = 0;
    int p = 0;
    for (std::size_t c = 0; c < cycles.size(); ++c) {
      s += cycles[c].pi[li] * plan.copies[c];
      p += cycles[c].x[li] * plan.copies[c];
    }
    const auto& caps = plan.capacities[li];
    if (caps.spare != s) {
      add(Constraint::SpareFromCycles, l, -1,
          "S=" + std::to_string(caps.spare) + " but cycles give " + std::to_string(s));
    }
    if (caps.protect != p) {
      add(Constraint::ProtectedFromCycles, l, -1,
          "P=" + std::to_string(caps.protect) + " but cycles give " + std::to_string(p));
    }
    if (caps.unprotect != k - caps.spare - caps.protect || caps.unprotect < 0) {
      add(Constraint::CoreBudget, l, -1, "S+P+UP != K or UP < 0");
    }
    if (caps.protect < params.wmin || caps.protect > params.wmax) {
      add(Constraint::ProtectedBounds, l, -1,
          "P=" + std::to_string(caps.protect) + " outside [" + std::to_string(params.wmin) + "," +
              std::to_string(params.wmax) + "]");
    }
    lo = std::min(lo, caps.protect);
    hi = std::max(hi, caps.protect);

    if (static_cast<int>(plan.indicators[li].size()) != k ||
        static_cast<int>(plan.delta[li].size()) != k) {
      add(Constraint::SingleGroup, l, -1, "wrong number of cores");
      continue;
    }
    int ns = 0, np = 0, nu = 0;
    for (CoreId c = 0; c < k; ++c) {
      const auto ci = static_cast<std::size_t>(c);
      const int sl = plan.in_group(l, c, CoreGroup::Spare);
      const int pl = plan.in_group(l, c, CoreGroup::Protected);
      const int ul = plan.in_group(l, c, CoreGroup::Unprotected);
      ns += sl;
      np += pl;
      nu += ul;
      if (sl + pl + ul != 1) {
        add(Constraint::SingleGroup, l, c, std::to_string(sl + pl + ul) + " groups on core");
      }
      const double expect = params.cs * sl + params.cu * ul + params.cp * pl;
      if (std::abs(plan.delta[li][ci] - expect) > detail::kCostEps) {
        add(Constraint::CoreCost, l, c, "delta does not match group cost");
      }
      objective += params.xtc[ci] * plan.delta[li][ci];
    }
    if (ns != caps.spare) add(Constraint::SpareLabels, l, -1, "spare labels != S");
    if (np != caps.protect) add(Constraint::ProtectedLabels, l, -1, "protected labels != P");
    if (nu != caps.unprotect) add(Constraint::UnprotectedLabels, l, -1, "unprotected labels != UP");
  }
  if (params.exact_extremes && nl > 0 && (lo != params.wmin || hi != params.wmax)) {
    add(Constraint::ProtectedBounds, -1, -1, "extremes of P_i differ from Wmin/Wmax");
  }
  if (std::abs(objective - plan.objective) > 1e-6 * std::max(1.0, std::abs(objective))) {
    add(Constraint::Objective, -1, -1, "stored objective differs from sum of core costs");
  }
  return out;
}

// One protection instance: a cycle copy routing around one protected core.
struct BackupRoute {
  int cycle = 0;
  int copy = 0;
  int arc = 0;  // 0 on-cycle or first straddling arc, 1 second straddling arc
  Path path;
  std::vector<CoreId> spare_cores;  // parallel to path.links
};

// Protected (link, core) -> backup route over spare cores. Each cycle copy
// reserves one spare core on each of its links; all instances of that copy
// share it, since only one link fails at a time.
class BackupMap {
 public:
  BackupMap() = default;
  BackupMap(int links, int cores)
      : cores_(cores),
        routes_(static_cast<std::size_t>(links) * static_cast<std::size_t>(cores)),
        reserved_(static_cast<std::size_t>(links)) {}

  const BackupRoute* find(LinkId l, CoreId k) const {
    if (routes_.empty()) return nullptr;
    const auto& r = routes_[index(l, k)];
    return r ? &*r : nullptr;
  }

  void set(LinkId l, CoreId k, BackupRoute route) { routes_[index(l, k)] = std::move(route); }

  std::size_t size() const {
    return static_cast<std::size_t>(
        std::count_if(routes_.begin(), routes_.end(), [](const auto& r) { return r.has_value(); }));
  }

  // Spare cores reserved on link l by some cycle copy, in reservation order.
  const std::vector<CoreId>& reserved(LinkId l) const {
    return reserved_[static_cast<std::size_t>(l)];
  }
  void reserve(LinkId l, CoreId k) { reserved_[static_cast<std::size_t>(l)].push_back(k); }

  int links() const { return static_cast<int>(reserved_.size()); }
  int cores() const { return cores_; }

 private:
  std::size_t index(LinkId l, CoreId k) const {
    return static_cast<std::size_t>(l) * static_cast<std::size_t>(cores_) +
           static_cast<std::size_t>(k);
  }

  int cores_ = 0;
  std::vector<std::optional<BackupRoute>> routes_;
  std::vector<std::vector<CoreId>> reserved_;
};

inline BackupMap build_backup_map(const Network& net, const std::vector<ProtectionCycle>& cycles,
                                  const CoreGroupPlan& plan) {
  const int nl = net.link_count();
  BackupMap map(nl, net.cores());

  // Spare core of copy (p, c) on each link of cycle p.
  std::vector<std::vector<CoreId>> spare_pool(static_cast<std::size_t>(nl));
  std::vector<std::size_t> spare_next(static_cast<std::size_t>(nl), 0);
  for (LinkId l = 0; l < nl; ++l) spare_pool[static_cast<std::size_t>(l)] = plan.cores_in(l, CoreGroup::Spare);

  std::vector<std::vector<std::vector<CoreId>>> copy_spares(cycles.size());
  for (std::size_t p = 0; p < cycles.size(); ++p) {
    for (int c = 0; c < plan.copies[p]; ++c) {
      std::vector<CoreId> per_link(static_cast<std::size_t>(nl), -1);
      for (LinkId l : cycles[p].links) {
        const auto li = static_cast<std::size_t>(l);
        if (spare_next[li] >= spare_pool[li].size()) {
          throw Error(Errc::Internal, "not enough spare cores on link " + std::to_string(l));
        }
        per_link[li] = spare_pool[li][spare_next[li]++];
        map.reserve(l, per_link[li]);
      }
      copy_spares[p].push_back(std::move(per_link));
    }
  }

  for (LinkId l = 0; l < nl; ++l) {
    const auto protected_cores = plan.cores_in(l, CoreGroup::Protected);
    std::size_t next = 0;
    for (std::size_t p = 0; p < cycles.size(); ++p) {
      if (plan.copies[p] == 0 || cycles[p].role(l) == CycleRole::None) continue;
      const auto routes = backup_routes(net, cycles[p], l);
      for (int c = 0; c < plan.copies[p]; ++c) {
        for (std::size_t arc = 0; arc < routes.size(); ++arc) {
          if (next >= protected_cores.size()) {
            throw Error(Errc::Internal,
                        "more protection instances than protected cores on link " + std::to_string(l));
          }
          BackupRoute r;
          r.cycle = static_cast<int>(p);
          r.copy = c;
          r.arc = static_cast<int>(arc);
          r.path = routes[arc];
          for (LinkId hop : r.path.links) {
            r.spare_cores.push_back(copy_spares[p][static_cast<std::size_t>(c)][static_cast<std::size_t>(hop)]);
          }
          map.set(l, protected_cores[next++], std::move(r));
        }
      }
    }
    if (next != protected_cores.size()) {
      throw Error(Errc::Internal, "protected cores without a protection instance on link " +
                                      std::to_string(l));
    }
  }
  return map;
}

}  // namespace pwcg
