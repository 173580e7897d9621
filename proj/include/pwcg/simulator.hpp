#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <queue>
#include <string>
#include <utility>
#include <vector>

#include "pwcg/error.hpp"
#include "pwcg/planner.hpp"
#include "pwcg/spectrum.hpp"
#include "pwcg/topology.hpp"
#include "pwcg/traffic.hpp"

namespace pwcg {

enum class Policy { Pwcg, Ldpp };

inline const char* to_string(Policy p) { return p == Policy::Pwcg ? "pwcg" : "ldpp"; }

enum class Placement { Pwcg, Upwcg, Dscg, LdppPrimaryBackup, LdppPrimaryOnly };

inline const char* to_string(Placement p) {
  switch (p) {
    case Placement::Pwcg: return "PWCG";
    case Placement::Upwcg: return "UPWCG";
    case Placement::Dscg: return "DSCG";
    case Placement::LdppPrimaryBackup: return "LDPP_PRIMARY+BACKUP";
    case Placement::LdppPrimaryOnly: return "LDPP_PRIMARY";
  }
  return "?";
}

enum class ProtectionState { Protected, Unprotected, Restored, Dropped };

// How LDPP treats an SCT-II request whose backup cannot be placed.
enum class LdppFallback { Degrade, Block };

// What the EPV of a spare core is compared against when an SCT-III request
// wants to borrow it: factor * apv, or factor * (spare cores / K) of the link.
enum class EpvThreshold { AprioriValue, ReservedFraction };

struct SimulationOptions {
  ModulationTable modulations = ModulationTable::defaults();
  XtRule xt{};
  int slices = 320;
  double slice_ghz = 12.5;
  double epv_factor = 0.25;
  double apv = 1.0;
  EpvThreshold epv_threshold = EpvThreshold::AprioriValue;
  LdppFallback ldpp_sct2 = LdppFallback::Degrade;
  double warmup_fraction = 0.1;
  bool record_log = false;
  bool check_invariants = false;  // verify slice accounting after every event
};

struct FailureSchedule {
  enum class Mode { None, Mttf, Fixed };
  Mode mode = Mode::Mttf;
  LinkId link = -1;
  double time = 0.0;
};

struct Scenario {
  std::shared_ptr<const Network> network;
  Policy policy = Policy::Pwcg;
  std::shared_ptr<const CoreGroupPlan> plan;   // required for Pwcg
  std::shared_ptr<const BackupMap> backups;    // required for Pwcg
  std::shared_ptr<const std::vector<RequestSpec>> trace;
  FailureSchedule failure{};
  std::uint64_t seed = 1;  // drives the failure draw
  SimulationOptions options{};
};

struct FailureDraw {
  LinkId link = -1;
  double raw_time = 0.0;  // minimum of the per-link exponential draws
  double time = 0.0;      // placed inside the observation window
};

// Each link draws an exponential time to failure with mean mttf_h; the earliest
// one fails. Its time is mapped through the CDF of the minimum (which is
// uniform on [0,1)) into the middle half of [0, horizon].
inline FailureDraw draw_failure(const Network& net, Rng& rng, double horizon) {
  FailureDraw d;
  d.raw_time = std::numeric_limits<double>::infinity();
  double total_rate = 0.0;
  for (const auto& l : net.links()) {
    const double rate = 1.0 / l.mttf_h;
    total_rate += rate;
    const double t = rng.exponential(rate);
    if (t < d.raw_time) {
      d.raw_time = t;
      d.link = l.id;
    }
  }
  const double u = -std::expm1(-total_rate * d.raw_time);
  d.time = horizon * (0.25 + 0.5 * u);
  return d;
}

inline std::optional<FailureDraw> schedule_failure(const Network& net, const FailureSchedule& fs,
                                                   Rng& rng, double horizon) {
  switch (fs.mode) {
    case FailureSchedule::Mode::None: return std::nullopt;
    case FailureSchedule::Mode::Fixed: {
      if (fs.link < 0 || fs.link >= net.link_count()) {
        throw Error(Errc::Config, "fixed failure names unknown link " + std::to_string(fs.link));
      }
      return FailureDraw{fs.link, fs.time, fs.time};
    }
    case FailureSchedule::Mode::Mttf: return draw_failure(net, rng, horizon);
  }
  return std::nullopt;
}

struct ActiveConnection {
  std::int64_t id = 0;
  Sct sct = Sct::I;
  double bandwidth_gbps = 0.0;
  Path path;
  std::vector<Segment> working;
  int start = 0;
  int slots = 0;
  std::string modulation;
  Placement placement = Placement::Upwcg;
  ProtectionState state = ProtectionState::Unprotected;
  // LDPP dedicated backup.
  std::optional<Path> backup_path;
  std::vector<Segment> backup;
  // PWCG SCT-I backup pledges: (link, spare core, start, slots).
  std::vector<Segment> pledges;

  bool traverses(LinkId l) const {
    return std::any_of(working.begin(), working.end(), [&](const Segment& s) { return s.link == l; });
  }
};

enum class Admission { Admitted, AdmittedUnprotected, Blocked };
enum class BlockReason { None, NoRoute, NoModulation, NoSpectrum, NoBackup };

struct ProvisionResult {
  Admission admission = Admission::Blocked;
  Placement placement = Placement::Upwcg;
  BlockReason reason = BlockReason::None;
  int slots = 0;  // slices requested on the working route (0 if never computed)

  bool admitted() const { return admission != Admission::Blocked; }
};

enum class Outcome { Restored, Dropped, Preempted };

struct RestorationEntry {
  std::int64_t id = 0;
  Sct sct = Sct::I;
  int slots = 0;
  Outcome outcome = Outcome::Dropped;
};

struct RestorationReport {
  LinkId link = -1;
  std::vector<RestorationEntry> entries;  // affected connections only

  std::size_t affected() const { return entries.size(); }
  std::size_t count(Outcome o) const {
    return static_cast<std::size_t>(std::count_if(entries.begin(), entries.end(),
                                                  [&](const auto& e) { return e.outcome == o; }));
  }
};

struct ClassTally {
  long long arrivals = 0;
  long long blocked = 0;
  double arrived_gbps = 0.0;
  double blocked_gbps = 0.0;
  long long arrived_slots = 0;
  long long blocked_slots = 0;
};

struct FailureOutcome {
  LinkId link = -1;
  double time = 0.0;
  std::array<long long, kSctCount> affected{};
  std::array<long long, kSctCount> restored{};
  std::array<long long, kSctCount> dropped{};
  long long preempted = 0;  // SCT-III evicted from spare cores (part of dropped)
  long long affected_slots = 0;

  long long total_affected() const { return affected[0] + affected[1] + affected[2]; }
  long long total_restored() const { return restored[0] + restored[1] + restored[2]; }
  long long total_dropped() const { return dropped[0] + dropped[1] + dropped[2]; }
};

struct LogEntry {
  enum class Kind { Arrival, Departure, Failure };
  Kind kind = Kind::Arrival;
  double time = 0.0;
  std::int64_t id = 0;
  Sct sct = Sct::I;
  double bandwidth_gbps = 0.0;
  int slots = 0;
  bool admitted = false;
  bool counted = false;  // inside the measurement window
};

struct RunRecord {
  Policy policy = Policy::Pwcg;
  std::uint64_t seed = 0;
  std::uint64_t trace_hash = 0;
  std::array<ClassTally, kSctCount> by_sct{};
  long long no_modulation_blocks = 0;
  double observation_time = 0.0;
  double working_slice_seconds = 0.0;
  double spare_slice_seconds = 0.0;
  long long spare_capacity_slices = 0;  // PWCG: slices on spare cores at start
  std::optional<FailureOutcome> failure;
  std::vector<LogEntry> log;

  long long arrivals() const { return by_sct[0].arrivals + by_sct[1].arrivals + by_sct[2].arrivals; }
  long long blocked() const { return by_sct[0].blocked + by_sct[1].blocked + by_sct[2].blocked; }
  double arrived_gbps() const {
    return by_sct[0].arrived_gbps + by_sct[1].arrived_gbps + by_sct[2].arrived_gbps;
  }
  double blocked_gbps() const {
    return by_sct[0].blocked_gbps + by_sct[1].blocked_gbps + by_sct[2].blocked_gbps;
  }
};

// One simulation run. The object is a value: copying it clones the complete
// network state, which tests use to probe "what if this link failed now".
class Simulator {
 public:
  static constexpr std::uint64_t kFailureStream = 0xfa11;

  explicit Simulator(Scenario scenario) : sc_(std::move(scenario)) {
    if (!sc_.network) throw Error(Errc::Config, "scenario has no network");
    const auto& net = *sc_.network;
    if (sc_.policy == Policy::Pwcg) {
      if (!sc_.plan || !sc_.backups) throw Error(Errc::Config, "PWCG scenario needs a plan");
      if (sc_.plan->links() != net.link_count() || sc_.plan->cores() != net.cores()) {
        throw Error(Errc::Config, "plan does not match topology (link count or cores differ)");
      }
    }
    grid_ = SpectrumGrid(net.link_count(), net.layout(), sc_.options.slices, sc_.options.slice_ghz);
    ledger_ = PledgeLedger(net.link_count(), net.cores(), sc_.options.slices);
    down_.assign(static_cast<std::size_t>(net.link_count()), false);
    if (sc_.policy == Policy::Pwcg) {
      for (LinkId l = 0; l < net.link_count(); ++l) {
        spare_capacity_ += static_cast<long long>(sc_.plan->capacities[static_cast<std::size_t>(l)].spare) *
                           sc_.options.slices;
      }
    }
  }

  const Scenario& scenario() const { return sc_; }
  const SpectrumGrid& grid() const { return grid_; }
  const PledgeLedger& pledges() const { return ledger_; }
  const std::map<std::int64_t, ActiveConnection>& active() const { return active_; }
  bool link_down(LinkId l) const { return down_[static_cast<std::size_t>(l)]; }

  // Slices currently carrying traffic, and slices held in reserve (free spare
  // cores for PWCG, dedicated backups for LDPP).
  long long working_slices() const { return grid_.occupied_total() - backup_slices_; }
  long long reserved_slices() const {
    return sc_.policy == Policy::Pwcg ? spare_capacity_ - spare_used_ : backup_slices_;
  }

  ProvisionResult offer(const RequestSpec& req) {
    return sc_.policy == Policy::Pwcg ? provision_pwcg(req) : provision_ldpp(req);
  }

  ProvisionResult provision_pwcg(const RequestSpec& req) {
    const auto& plan = *sc_.plan;
    ProvisionResult res;
    auto route = route_for(req, res);
    if (!route) return res;
    const auto& [path, mod] = *route;
    const int slots = res.slots;
    const auto& opt = sc_.options;

    auto in_group = [&](CoreGroup g) {
      return [&plan, g](std::size_t, LinkId l, CoreId c) { return plan.in_group(l, c, g); };
    };

    std::optional<Fit> fit;
    Placement placement = Placement::Upwcg;
    switch (req.sct) {
      case Sct::I:
        fit = first_fit(grid_, path.links, slots, opt.xt, in_group(CoreGroup::Protected));
        placement = Placement::Pwcg;
        break;
      case Sct::II:
        fit = first_fit(grid_, path.links, slots, opt.xt, in_group(CoreGroup::Unprotected));
        break;
      case Sct::III:
        fit = first_fit(grid_, path.links, slots, opt.xt, in_group(CoreGroup::Unprotected));
        if (!fit) {
          fit = first_fit(
              grid_, path.links, slots, opt.xt,
              [&](std::size_t, LinkId l, CoreId c) {
                return plan.in_group(l, c, CoreGroup::Spare) && ledger_.epv(l, c) < epv_limit(l);
              },
              [&](LinkId l, CoreId c) { return &ledger_.pledged(l, c); });
          placement = Placement::Dscg;
        }
        break;
    }
    if (!fit) {
      res.reason = BlockReason::NoSpectrum;
      return res;
    }

    ActiveConnection conn = make_connection(req, path, mod, *fit, slots);
    conn.placement = placement;
    conn.state = req.sct == Sct::I ? ProtectionState::Protected : ProtectionState::Unprotected;
    allocate_working(conn);
    if (req.sct == Sct::I) {
      for (const auto& seg : conn.working) {
        const BackupRoute* br = sc_.backups->find(seg.link, seg.core);
        if (!br) {
          throw Error(Errc::Internal, "protected core " + std::to_string(seg.core) + " on link " +
                                          std::to_string(seg.link) + " has no backup route");
        }
        for (std::size_t i = 0; i < br->path.links.size(); ++i) {
          Segment p{br->path.links[i], br->spare_cores[i], conn.start, conn.slots};
          ledger_.add(p.link, p.core, p.start, p.count);
          conn.pledges.push_back(p);
        }
      }
    }
    active_.emplace(conn.id, std::move(conn));
    res.admission = Admission::Admitted;
    res.placement = placement;
    return res;
  }

  ProvisionResult provision_ldpp(const RequestSpec& req) {
    const auto& net = *sc_.network;
    const auto& opt = sc_.options;
    ProvisionResult res;
    res.placement = Placement::LdppPrimaryOnly;

    auto any_core = [](std::size_t, LinkId, CoreId) { return true; };

    auto primary = route_for(req, res);
    if (!primary) return res;
    const auto& [path, mod] = *primary;
    auto fit = first_fit(grid_, path.links, res.slots, opt.xt, any_core);
    if (!fit) {
      res.reason = BlockReason::NoSpectrum;
      return res;
    }
    ActiveConnection conn = make_connection(req, path, mod, *fit, res.slots);
    conn.placement = Placement::LdppPrimaryOnly;
    conn.state = ProtectionState::Unprotected;
    allocate_working(conn);

    if (req.sct != Sct::III) {
      std::optional<Path> backup;
      if (auto pair = disjoint_path_pair(net, req.src, req.dst, down_)) backup = pair->second;
      std::optional<Fit> bfit;
      int bslots = 0;
      if (backup) {
        try {
          const auto& bmod = pick_modulation(opt.modulations, backup->length_km);
          bslots = required_slots(req.bandwidth_gbps, bmod, opt.slice_ghz);
          bfit = first_fit(grid_, backup->links, bslots, opt.xt, any_core);
        } catch (const Error& e) {
          if (e.code() != Errc::NoModulation) throw;
        }
      }
      if (bfit) {
        conn.backup_path = backup;
        conn.backup = fit_segments(backup->links, *bfit, bslots);
        grid_.allocate(conn.backup, backup_owner(conn.id));
        backup_slices_ += static_cast<long long>(bslots) * static_cast<long long>(conn.backup.size());
        conn.placement = Placement::LdppPrimaryBackup;
        conn.state = ProtectionState::Protected;
      } else if (req.sct == Sct::I || opt.ldpp_sct2 == LdppFallback::Block) {
        release_working(conn);
        res.reason = BlockReason::NoBackup;
        return res;
      }
    }
    res.placement = conn.placement;
    res.admission = conn.state == ProtectionState::Protected || req.sct == Sct::III
                        ? Admission::Admitted
                        : Admission::AdmittedUnprotected;
    active_.emplace(conn.id, std::move(conn));
    return res;
  }

  // Releases everything the connection holds. Unknown (blocked or dropped)
  // ids are ignored.
  void depart(std::int64_t id) {
    auto it = active_.find(id);
    if (it == active_.end()) return;
    auto& conn = it->second;
    release_working(conn);
    release_backup(conn);
    drop_pledges(conn);
    active_.erase(it);
  }

  // Single-link failure under PWCG: evict SCT-III borrowers of spare cores,
  // switch SCT-I onto their backup route at the same slices, reroute SCT-II
  // over unprotected cores, drop SCT-III on the failed link.
  RestorationReport restore(LinkId failed) {
    require_pwcg();
    const auto& net = *sc_.network;
    if (failed < 0 || failed >= net.link_count() || link_down(failed)) {
      throw Error(Errc::Precondition, "link " + std::to_string(failed) + " is not up");
    }
    down_[static_cast<std::size_t>(failed)] = true;
    spare_capacity_ -= static_cast<long long>(sc_.plan->capacities[static_cast<std::size_t>(failed)].spare) *
                       sc_.options.slices;
    RestorationReport report;
    report.link = failed;

    for (auto it = active_.begin(); it != active_.end();) {
      if (it->second.placement == Placement::Dscg) {
        report.entries.push_back({it->first, it->second.sct, it->second.slots, Outcome::Preempted});
        release_working(it->second);
        it = active_.erase(it);
      } else {
        ++it;
      }
    }

    std::vector<std::int64_t> hit;
    for (const auto& [id, conn] : active_) {
      if (conn.traverses(failed)) hit.push_back(id);
    }
    for (Sct cls : {Sct::III, Sct::I, Sct::II}) {
      for (auto id : hit) {
        auto it = active_.find(id);
        if (it == active_.end() || it->second.sct != cls) continue;
        auto& conn = it->second;
        RestorationEntry e{id, conn.sct, conn.slots, Outcome::Dropped};
        if (cls == Sct::I) {
          switch_to_backup_route(conn, failed);
          e.outcome = Outcome::Restored;
        } else if (cls == Sct::II) {
          e.outcome = reroute(conn, [this](std::size_t, LinkId l, CoreId c) {
                        return sc_.plan->in_group(l, c, CoreGroup::Unprotected);
                      })
                          ? Outcome::Restored
                          : Outcome::Dropped;
        } else {
          release_working(conn);
        }
        if (e.outcome == Outcome::Dropped) {
          active_.erase(id);
        }
        report.entries.push_back(e);
      }
    }
    return report;
  }

  // Single-link failure under LDPP: protected connections switch to their
  // dedicated backup, unprotected SCT-II try a fresh route over any core,
  // SCT-III are dropped. Backups crossing the failed link are released.
  RestorationReport restore_ldpp(LinkId failed) {
    const auto& net = *sc_.network;
    if (sc_.policy != Policy::Ldpp) throw Error(Errc::Precondition, "restore_ldpp needs an LDPP run");
    if (failed < 0 || failed >= net.link_count() || link_down(failed)) {
      throw Error(Errc::Precondition, "link " + std::to_string(failed) + " is not up");
    }
    down_[static_cast<std::size_t>(failed)] = true;
    RestorationReport report;
    report.link = failed;

    std::vector<std::int64_t> ids;
    for (const auto& [id, conn] : active_) ids.push_back(id);
    for (auto id : ids) {
      auto& conn = active_.at(id);
      const bool backup_hit = conn.backup_path && conn.backup_path->uses(failed);
      if (!conn.traverses(failed)) {
        if (backup_hit) {
          release_backup(conn);
          conn.state = ProtectionState::Unprotected;
          conn.placement = Placement::LdppPrimaryOnly;
        }
        continue;
      }
      RestorationEntry e{id, conn.sct, conn.slots, Outcome::Dropped};
      if (conn.backup_path && !backup_hit) {
        switch_to_dedicated_backup(conn);
        e.outcome = Outcome::Restored;
      } else if (conn.sct == Sct::II) {
        release_backup(conn);
        e.outcome = reroute(conn, [](std::size_t, LinkId, CoreId) { return true; })
                        ? Outcome::Restored
                        : Outcome::Dropped;
      } else {
        release_working(conn);
        release_backup(conn);
      }
      if (e.outcome == Outcome::Dropped) active_.erase(id);
      report.entries.push_back(e);
    }
    return report;
  }

  RestorationReport fail_link(LinkId l) {
    return sc_.policy == Policy::Pwcg ? restore(l) : restore_ldpp(l);
  }

  // Total grid occupancy equals the slices held by active connections
  // (working plus dedicated backup), and the grid itself is consistent.
  bool accounting_consistent() const {
    long long expect = 0;
    long long backup = 0;
    long long spare = 0;
    for (const auto& [id, conn] : active_) {
      for (const auto& s : conn.working) {
        expect += s.count;
        if (sc_.policy == Policy::Pwcg && sc_.plan->in_group(s.link, s.core, CoreGroup::Spare)) {
          spare += s.count;
        }
      }
      for (const auto& s : conn.backup) {
        expect += s.count;
        backup += s.count;
      }
    }
    return expect == grid_.occupied_total() && backup == backup_slices_ && spare == spare_used_ &&
           grid_.check_conservation().empty();
  }

  RunRecord run() {
    if (!sc_.trace) throw Error(Errc::Config, "scenario has no request trace");
    const auto& trace = *sc_.trace;
    const auto& net = *sc_.network;
    RunRecord rec;
    rec.policy = sc_.policy;
    rec.seed = sc_.seed;
    rec.trace_hash = trace_hash(trace);
    rec.spare_capacity_slices = spare_capacity_;
    if (trace.empty()) return rec;

    const std::size_t n = trace.size();
    const auto warm_index = static_cast<std::size_t>(
        std::floor(sc_.options.warmup_fraction * static_cast<double>(n)));
    const double t_end = trace.back().arrival;
    const double t_warm = trace[std::min(warm_index, n - 1)].arrival;
    rec.observation_time = t_end - t_warm;

    Rng frng = Rng::stream(sc_.seed, kFailureStream);
    auto failure = schedule_failure(net, sc_.failure, frng, t_end);

    using Dep = std::pair<double, std::int64_t>;
    std::priority_queue<Dep, std::vector<Dep>, std::greater<>> departures;
    double last = 0.0;
    auto integrate = [&](double t) {
      const double from = std::max(last, t_warm);
      const double to = std::min(t, t_end);
      if (to > from) {
        rec.working_slice_seconds += static_cast<double>(working_slices()) * (to - from);
        rec.spare_slice_seconds += static_cast<double>(reserved_slices()) * (to - from);
      }
      last = std::max(last, t);
    };

    std::size_t next = 0;
    bool failure_pending = failure && failure->time <= t_end;
    while (next < n || failure_pending) {
      const double ta = next < n ? trace[next].arrival : std::numeric_limits<double>::infinity();
      const double tf = failure_pending ? failure->time : std::numeric_limits<double>::infinity();
      const double td = departures.empty() ? std::numeric_limits<double>::infinity() : departures.top().first;

      if (td <= ta && td <= tf) {
        auto [t, id] = departures.top();
        departures.pop();
        integrate(t);
        depart(id);
        if (sc_.options.record_log) {
          rec.log.push_back({LogEntry::Kind::Departure, t, id, Sct::I, 0.0, 0, false, t >= t_warm});
        }
      } else if (ta <= tf) {
        const auto& req = trace[next];
        const bool counted = next >= warm_index;
        ++next;
        integrate(req.arrival);
        auto res = offer(req);
        if (res.admitted()) departures.emplace(req.arrival + req.holding, req.id);
        if (counted) tally(rec, req, res);
        if (sc_.options.record_log) {
          rec.log.push_back({LogEntry::Kind::Arrival, req.arrival, req.id, req.sct, req.bandwidth_gbps,
                             res.slots, res.admitted(), counted});
        }
      } else {
        integrate(tf);
        failure_pending = false;
        auto report = fail_link(failure->link);
        rec.failure = summarize(report, failure->time);
        if (sc_.options.record_log) {
          rec.log.push_back({LogEntry::Kind::Failure, tf, failure->link, Sct::I, 0.0, 0, false, true});
        }
      }
      if (sc_.options.check_invariants && !accounting_consistent()) {
        throw Error(Errc::Internal, "slice accounting broken");
      }
    }
    integrate(t_end);
    return rec;
  }

  static FailureOutcome summarize(const RestorationReport& report, double time) {
    FailureOutcome f;
    f.link = report.link;
    f.time = time;
    for (const auto& e : report.entries) {
      const auto i = index(e.sct);
      ++f.affected[i];
      f.affected_slots += e.slots;
      if (e.outcome == Outcome::Restored) {
        ++f.restored[i];
      } else {
        ++f.dropped[i];
      }
      if (e.outcome == Outcome::Preempted) ++f.preempted;
    }
    return f;
  }

 private:
  static OwnerId working_owner(std::int64_t id) { return 2 * id; }
  static OwnerId backup_owner(std::int64_t id) { return 2 * id + 1; }

  void require_pwcg() const {
    if (sc_.policy != Policy::Pwcg) throw Error(Errc::Precondition, "operation needs a PWCG run");
  }

  double epv_limit(LinkId l) const {
    const auto& opt = sc_.options;
    if (opt.epv_threshold == EpvThreshold::AprioriValue) return opt.epv_factor * opt.apv;
    const double frac = static_cast<double>(sc_.plan->capacities[static_cast<std::size_t>(l)].spare) /
                        static_cast<double>(sc_.network->cores());
    return opt.epv_factor * frac;
  }

  // Shortest surviving route and its modulation; fills the block reason and
  // slot count of `res`.
  std::optional<std::pair<Path, const Modulation*>> route_for(const RequestSpec& req,
                                                              ProvisionResult& res) {
    auto path = shortest_path(*sc_.network, req.src, req.dst, down_);
    if (!path) {
      res.reason = BlockReason::NoRoute;
      return std::nullopt;
    }
    const Modulation* mod = nullptr;
    try {
      mod = &pick_modulation(sc_.options.modulations, path->length_km);
    } catch (const Error& e) {
      if (e.code() != Errc::NoModulation) throw;
      res.reason = BlockReason::NoModulation;
      return std::nullopt;
    }
    res.slots = required_slots(req.bandwidth_gbps, *mod, sc_.options.slice_ghz);
    return std::pair{std::move(*path), mod};
  }

  ActiveConnection make_connection(const RequestSpec& req, const Path& path, const Modulation* mod,
                                   const Fit& fit, int slots) const {
    ActiveConnection c;
    c.id = req.id;
    c.sct = req.sct;
    c.bandwidth_gbps = req.bandwidth_gbps;
    c.path = path;
    c.start = fit.start;
    c.slots = slots;
    c.modulation = mod->name;
    c.working = fit_segments(path.links, fit, slots);
    return c;
  }

  long long spare_slices_in(const std::vector<Segment>& segs) const {
    if (sc_.policy != Policy::Pwcg) return 0;
    long long n = 0;
    for (const auto& s : segs) {
      if (sc_.plan->in_group(s.link, s.core, CoreGroup::Spare)) n += s.count;
    }
    return n;
  }

  void allocate_working(const ActiveConnection& c) {
    grid_.allocate(c.working, working_owner(c.id));
    spare_used_ += spare_slices_in(c.working);
  }

  void release_working(ActiveConnection& c) {
    if (c.working.empty()) return;
    grid_.release(working_owner(c.id));
    spare_used_ -= spare_slices_in(c.working);
    c.working.clear();
  }

  void release_backup(ActiveConnection& c) {
    if (c.backup.empty()) return;
    grid_.release(backup_owner(c.id));
    for (const auto& s : c.backup) backup_slices_ -= s.count;
    c.backup.clear();
    c.backup_path.reset();
  }

  void drop_pledges(ActiveConnection& c) {
    for (const auto& p : c.pledges) ledger_.remove(p.link, p.core, p.start, p.count);
    c.pledges.clear();
  }

  // Replaces the failed hop by the protection route at the same slices.
  void switch_to_backup_route(ActiveConnection& conn, LinkId failed) {
    const auto& net = *sc_.network;
    auto hop = std::find(conn.path.links.begin(), conn.path.links.end(), failed) - conn.path.links.begin();
    auto seg = std::find_if(conn.working.begin(), conn.working.end(),
                            [&](const Segment& s) { return s.link == failed; });
    const BackupRoute* br = sc_.backups->find(failed, seg->core);
    if (!br) throw Error(Errc::Internal, "SCT-I on unprotected core during restoration");

    std::vector<LinkId> links = br->path.links;
    std::vector<NodeId> nodes = br->path.nodes;
    std::vector<CoreId> spares = br->spare_cores;
    if (nodes.front() != conn.path.nodes[static_cast<std::size_t>(hop)]) {
      std::reverse(links.begin(), links.end());
      std::reverse(nodes.begin(), nodes.end());
      std::reverse(spares.begin(), spares.end());
    }
    std::vector<Segment> detour;
    for (std::size_t i = 0; i < links.size(); ++i) detour.push_back({links[i], spares[i], conn.start, conn.slots});
    try {
      grid_.allocate(detour, working_owner(conn.id));
    } catch (const Error& e) {
      throw Error(Errc::Internal, "SCT-I " + std::to_string(conn.id) + " could not be restored: " + e.what());
    }
    spare_used_ += spare_slices_in(detour);
    auto removed = grid_.release_on_link(working_owner(conn.id), failed);
    spare_used_ -= spare_slices_in(removed);

    conn.working.erase(seg);
    conn.working.insert(conn.working.end(), detour.begin(), detour.end());
    Path p;
    const auto h = static_cast<std::size_t>(hop);
    p.links.assign(conn.path.links.begin(), conn.path.links.begin() + static_cast<std::ptrdiff_t>(h));
    p.links.insert(p.links.end(), links.begin(), links.end());
    p.links.insert(p.links.end(), conn.path.links.begin() + static_cast<std::ptrdiff_t>(h) + 1,
                   conn.path.links.end());
    p.nodes.assign(conn.path.nodes.begin(), conn.path.nodes.begin() + static_cast<std::ptrdiff_t>(h));
    p.nodes.insert(p.nodes.end(), nodes.begin(), nodes.end());
    p.nodes.insert(p.nodes.end(), conn.path.nodes.begin() + static_cast<std::ptrdiff_t>(h) + 2,
                   conn.path.nodes.end());
    for (LinkId l : p.links) p.length_km += net.link(l).length_km;
    conn.path = std::move(p);
    drop_pledges(conn);
    conn.state = ProtectionState::Restored;
  }

  void switch_to_dedicated_backup(ActiveConnection& conn) {
    auto segs = conn.backup;
    auto path = *conn.backup_path;
    release_working(conn);
    release_backup(conn);
    conn.working = std::move(segs);
    conn.path = std::move(path);
    conn.start = conn.working.front().start;
    conn.slots = conn.working.front().count;
    grid_.allocate(conn.working, working_owner(conn.id));
    conn.state = ProtectionState::Restored;
    conn.placement = Placement::LdppPrimaryOnly;
  }

  // Fresh route around the failed link(s) with a re-picked modulation.
  template <typename Allowed>
  bool reroute(ActiveConnection& conn, Allowed&& allowed) {
    const auto& net = *sc_.network;
    const auto& opt = sc_.options;
    release_working(conn);
    const auto& ends = conn.path.nodes;
    auto path = shortest_path(net, ends.front(), ends.back(), down_);
    if (!path) return false;
    const Modulation* mod = nullptr;
    try {
      mod = &pick_modulation(opt.modulations, path->length_km);
    } catch (const Error& e) {
      if (e.code() != Errc::NoModulation) throw;
      return false;
    }
    const int slots = required_slots(conn.bandwidth_gbps, *mod, opt.slice_ghz);
    auto fit = first_fit(grid_, path->links, slots, opt.xt, allowed);
    if (!fit) return false;
    conn.path = std::move(*path);
    conn.start = fit->start;
    conn.slots = slots;
    conn.modulation = mod->name;
    conn.working = fit_segments(conn.path.links, *fit, slots);
    allocate_working(conn);
    conn.state = ProtectionState::Restored;
    return true;
  }

  void tally(RunRecord& rec, const RequestSpec& req, const ProvisionResult& res) const {
    auto& t = rec.by_sct[index(req.sct)];
    ++t.arrivals;
    t.arrived_gbps += req.bandwidth_gbps;
    t.arrived_slots += res.slots;
    if (!res.admitted()) {
      ++t.blocked;
      t.blocked_gbps += req.bandwidth_gbps;
      t.blocked_slots += res.slots;
      if (res.reason == BlockReason::NoModulation) ++rec.no_modulation_blocks;
    }
  }

  Scenario sc_;
  SpectrumGrid grid_;
  PledgeLedger ledger_;
  std::map<std::int64_t, ActiveConnection> active_;
  LinkMask down_;
  long long spare_capacity_ = 0;
  long long spare_used_ = 0;
  long long backup_slices_ = 0;
};

inline RunRecord run(Scenario scenario) { return Simulator(std::move(scenario)).run(); }

}  // namespace pwcg
