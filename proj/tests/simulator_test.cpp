#include <gtest/gtest.h>

#include <climits>

#include "test_support.hpp"

namespace pwcg {
namespace {

using testing::fixture;
using testing::make_net;

RequestSpec req(std::int64_t id, NodeId src, NodeId dst, double bw, Sct sct, double arrival = 0.0,
                double holding = 1.0) {
  RequestSpec r;
  r.id = id;
  r.src = src;
  r.dst = dst;
  r.bandwidth_gbps = bw;
  r.sct = sct;
  r.arrival = arrival;
  r.holding = holding;
  return r;
}

SimulationOptions options(int slices = 320, bool xt = true) {
  SimulationOptions o;
  o.slices = slices;
  if (!xt) o.xt.max_adjacent_overlap = INT_MAX;
  return o;
}

Scenario pwcg_scenario(const Network& net, SimulationOptions opt = options()) {
  auto p = testing::plan_for(net);
  Scenario sc;
  sc.network = std::make_shared<const Network>(net);
  sc.policy = Policy::Pwcg;
  sc.plan = p.plan;
  sc.backups = p.backups;
  sc.options = std::move(opt);
  return sc;
}

Scenario ldpp_scenario(const Network& net, SimulationOptions opt = options()) {
  Scenario sc;
  sc.network = std::make_shared<const Network>(net);
  sc.policy = Policy::Ldpp;
  sc.options = std::move(opt);
  return sc;
}

constexpr NodeId A = 0, B = 1, C = 2, D = 3;

// ---------------------------------------------------------------- PWCG admission

TEST(ProvisionPwcg, SctOneOnEmptyGridUsesProtectedCoreAtOrigin) {
  Simulator sim(pwcg_scenario(fixture("triangle")));
  auto res = sim.offer(req(0, A, B, 100, Sct::I));
  ASSERT_TRUE(res.admitted());
  EXPECT_EQ(res.placement, Placement::Pwcg);
  const auto& conn = sim.active().at(0);
  EXPECT_EQ(conn.start, 0);
  const auto& plan = *sim.scenario().plan;
  for (const auto& s : conn.working) EXPECT_EQ(plan.group(s.link, s.core), CoreGroup::Protected);
  // The backup route A-C-B is pledged on both spare cores at the same slices.
  EXPECT_EQ(conn.pledges.size(), 2u);
  for (const auto& p : conn.pledges) {
    EXPECT_EQ(plan.group(p.link, p.core), CoreGroup::Spare);
    EXPECT_EQ(p.start, conn.start);
    EXPECT_EQ(p.count, conn.slots);
  }
}

TEST(ProvisionPwcg, SctTwoAndThreeUseUnprotectedCores) {
  Simulator sim(pwcg_scenario(fixture("triangle")));
  const auto& plan = *sim.scenario().plan;
  ASSERT_TRUE(sim.offer(req(0, A, C, 100, Sct::II)).admitted());
  ASSERT_TRUE(sim.offer(req(1, C, A, 100, Sct::III)).admitted());
  for (std::int64_t id : {0, 1}) {
    EXPECT_EQ(sim.active().at(id).placement, Placement::Upwcg);
    for (const auto& s : sim.active().at(id).working) {
      EXPECT_EQ(plan.group(s.link, s.core), CoreGroup::Unprotected);
    }
  }
  EXPECT_TRUE(sim.pledges().empty());
}

// Triangle with a 20-slice grid and no crosstalk limit: 25 requests of 4
// slices fill the five unprotected cores of B-C.
class Dscg : public ::testing::Test {
 protected:
  Simulator sim{pwcg_scenario(fixture("triangle"), options(20, false))};
  LinkId bc = fixture("triangle").link_named("B", "C");

  void fill_bc() {
    for (int i = 0; i < 25; ++i) ASSERT_TRUE(sim.offer(req(100 + i, B, C, 250, Sct::II)).admitted());
    ASSERT_FALSE(sim.offer(req(99, B, C, 250, Sct::II)).admitted());
  }
};

TEST_F(Dscg, SpareCoreBelowThresholdAdmitsSctThree) {
  ASSERT_TRUE(sim.offer(req(0, A, B, 250, Sct::I)).admitted());  // 4 slices pledged on B-C spare
  fill_bc();
  const CoreId spare = sim.scenario().plan->cores_in(bc, CoreGroup::Spare).front();
  EXPECT_DOUBLE_EQ(sim.pledges().epv(bc, spare), 0.2);
  auto res = sim.offer(req(1, B, C, 100, Sct::III));
  ASSERT_TRUE(res.admitted());
  EXPECT_EQ(res.placement, Placement::Dscg);
  const auto& seg = sim.active().at(1).working.front();
  EXPECT_EQ(seg.core, spare);
  EXPECT_EQ(seg.start, 4);  // pledged slices 0-3 stay untouched
  EXPECT_TRUE(sim.accounting_consistent());
}

TEST_F(Dscg, SpareCoreAtThresholdBlocksSctThree) {
  ASSERT_TRUE(sim.offer(req(0, A, B, 375, Sct::I)).admitted());  // 5 of 20 slices: epv 0.25
  fill_bc();
  auto res = sim.offer(req(1, B, C, 100, Sct::III));
  EXPECT_FALSE(res.admitted());
  EXPECT_EQ(res.reason, BlockReason::NoSpectrum);
}

TEST_F(Dscg, ReservedFractionThresholdIsStricter) {
  auto opt = options(20, false);
  opt.epv_threshold = EpvThreshold::ReservedFraction;  // 0.25 * 1/7
  sim = Simulator(pwcg_scenario(fixture("triangle"), opt));
  ASSERT_TRUE(sim.offer(req(0, A, B, 250, Sct::I)).admitted());
  fill_bc();
  EXPECT_FALSE(sim.offer(req(1, B, C, 100, Sct::III)).admitted());
}

TEST(ProvisionPwcg, NoModulationIsBlockedWithReason) {
  auto net = make_net(3, {{0, 1, 5000}, {1, 2, 5000}, {0, 2, 5000}});
  Simulator sim(pwcg_scenario(net));
  auto res = sim.offer(req(0, A, B, 100, Sct::II));
  EXPECT_FALSE(res.admitted());
  EXPECT_EQ(res.reason, BlockReason::NoModulation);
}

// ---------------------------------------------------------------- PWCG restoration

TEST(Restore, IdleLinkGivesEmptyReport) {
  Simulator sim(pwcg_scenario(fixture("triangle")));
  ASSERT_TRUE(sim.offer(req(0, A, B, 100, Sct::II)).admitted());
  auto report = sim.restore(fixture("triangle").link_named("B", "C"));
  EXPECT_EQ(report.affected(), 0u);
  EXPECT_TRUE(sim.link_down(1));
}

TEST(Restore, SctOneSwitchesToSurvivingArcAtSameSlices) {
  auto net = fixture("triangle");
  Simulator sim(pwcg_scenario(net));
  ASSERT_TRUE(sim.offer(req(0, B, C, 50, Sct::II)).admitted());
  ASSERT_TRUE(sim.offer(req(1, A, B, 100, Sct::I)).admitted());
  const int start = sim.active().at(1).start;
  const LinkId ab = net.link_named("A", "B");
  auto report = sim.restore(ab);
  ASSERT_EQ(report.affected(), 1u);
  EXPECT_EQ(report.entries[0].outcome, Outcome::Restored);
  const auto& conn = sim.active().at(1);
  EXPECT_EQ(conn.state, ProtectionState::Restored);
  EXPECT_EQ(net.describe(conn.path), "A-C-B");
  const auto& plan = *sim.scenario().plan;
  for (const auto& s : conn.working) {
    EXPECT_NE(s.link, ab);
    EXPECT_EQ(s.start, start);
    EXPECT_EQ(plan.group(s.link, s.core), CoreGroup::Spare);
  }
  EXPECT_TRUE(conn.pledges.empty());
  EXPECT_TRUE(sim.pledges().empty());
  EXPECT_TRUE(sim.accounting_consistent());
}

TEST(Restore, DscgSquattersArePreemptedFirst) {
  Simulator sim(pwcg_scenario(fixture("triangle"), options(20, false)));
  ASSERT_TRUE(sim.offer(req(0, A, B, 250, Sct::I)).admitted());
  for (int i = 0; i < 25; ++i) ASSERT_TRUE(sim.offer(req(100 + i, B, C, 250, Sct::II)).admitted());
  ASSERT_EQ(sim.offer(req(1, B, C, 100, Sct::III)).placement, Placement::Dscg);
  auto report = sim.restore(0);  // A-B
  EXPECT_EQ(report.count(Outcome::Preempted), 1u);
  EXPECT_EQ(report.count(Outcome::Restored), 1u);
  EXPECT_EQ(sim.active().count(1), 0u);
  auto f = Simulator::summarize(report, 0.0);
  EXPECT_EQ(f.preempted, 1);
  EXPECT_EQ(f.total_affected(), f.total_restored() + f.total_dropped());
  EXPECT_TRUE(sim.accounting_consistent());
}

TEST(Restore, SctTwoReroutesOverUnprotectedCores) {
  auto net = fixture("triangle");
  Simulator sim(pwcg_scenario(net));
  ASSERT_TRUE(sim.offer(req(0, A, B, 100, Sct::II)).admitted());
  auto report = sim.restore(net.link_named("A", "B"));
  ASSERT_EQ(report.affected(), 1u);
  EXPECT_EQ(report.entries[0].outcome, Outcome::Restored);
  const auto& conn = sim.active().at(0);
  EXPECT_EQ(net.describe(conn.path), "A-C-B");
  for (const auto& s : conn.working) {
    EXPECT_EQ(sim.scenario().plan->group(s.link, s.core), CoreGroup::Unprotected);
  }
}

TEST(Restore, SctTwoBeyondBpskReachIsDropped) {
  auto net = make_net(3, {{0, 1, 100}, {1, 2, 3000}, {0, 2, 3000}});
  Simulator sim(pwcg_scenario(net));
  ASSERT_TRUE(sim.offer(req(0, A, B, 100, Sct::II)).admitted());
  auto report = sim.restore(0);
  ASSERT_EQ(report.affected(), 1u);
  EXPECT_EQ(report.entries[0].outcome, Outcome::Dropped);
  EXPECT_TRUE(sim.active().empty());
  EXPECT_EQ(sim.grid().occupied_total(), 0);
  sim.depart(0);  // no-op for a dropped connection
  EXPECT_EQ(sim.grid().occupied_total(), 0);
}

TEST(Restore, SctTwoWithinReachIsRestoredWithNewModulation) {
  auto net = make_net(3, {{0, 1, 100}, {1, 2, 1500}, {0, 2, 1500}});
  Simulator sim(pwcg_scenario(net));
  ASSERT_TRUE(sim.offer(req(0, A, B, 100, Sct::II)).admitted());
  EXPECT_EQ(sim.active().at(0).modulation, "64QAM");
  sim.restore(0);
  EXPECT_EQ(sim.active().at(0).modulation, "BPSK");
  EXPECT_EQ(sim.active().at(0).slots, 8);
}

TEST(Restore, SctThreeOnFailedLinkIsDropped) {
  Simulator sim(pwcg_scenario(fixture("triangle")));
  ASSERT_TRUE(sim.offer(req(0, A, B, 100, Sct::III)).admitted());
  auto report = sim.restore(0);
  ASSERT_EQ(report.affected(), 1u);
  EXPECT_EQ(report.entries[0].outcome, Outcome::Dropped);
  EXPECT_EQ(sim.grid().occupied_total(), 0);
}

TEST(Restore, FailedLinkStaysDownForLaterArrivals) {
  auto net = fixture("triangle");
  Simulator sim(pwcg_scenario(net));
  sim.restore(net.link_named("A", "B"));
  ASSERT_TRUE(sim.offer(req(0, A, B, 100, Sct::II)).admitted());
  EXPECT_EQ(net.describe(sim.active().at(0).path), "A-C-B");
  EXPECT_THROW(sim.restore(net.link_named("A", "B")), Error);
}

TEST(Restore, EverySctOneSurvivesEverySingleFailureOfItsLinks) {
  auto net = fixture("finland12");
  Config cfg;
  cfg.requests = 1500;
  auto trace = make_trace(net, cfg, 3, 3200);
  Simulator sim(pwcg_scenario(net));
  for (const auto& r : trace) sim.offer(r);
  int checked = 0;
  for (const auto& [id, conn] : sim.active()) {
    if (conn.sct != Sct::I) continue;
    for (LinkId l : conn.path.links) {
      Simulator clone = sim;
      auto report = clone.restore(l);
      for (const auto& e : report.entries) {
        if (e.sct == Sct::I) {
          EXPECT_EQ(e.outcome, Outcome::Restored);
        }
      }
      const auto& after = clone.active().at(id);
      EXPECT_EQ(after.state, ProtectionState::Restored);
      EXPECT_FALSE(after.path.uses(l));
      for (const auto& [oid, other] : clone.active()) EXPECT_FALSE(other.traverses(l));
      EXPECT_TRUE(clone.accounting_consistent());
      ++checked;
    }
  }
  EXPECT_GT(checked, 50);
}

// ---------------------------------------------------------------- LDPP

TEST(ProvisionLdpp, SctOneOnBridgeIsBlocked) {
  Simulator sim(ldpp_scenario(make_net(3, {{0, 1, 1}, {1, 2, 1}})));
  auto res = sim.offer(req(0, A, B, 100, Sct::I));
  EXPECT_FALSE(res.admitted());
  EXPECT_EQ(res.reason, BlockReason::NoBackup);
  EXPECT_EQ(sim.grid().occupied_total(), 0);
}

TEST(ProvisionLdpp, SctOneGetsDedicatedDisjointBackup) {
  auto net = fixture("ring4");
  Simulator sim(ldpp_scenario(net));
  auto res = sim.offer(req(0, A, B, 100, Sct::I));
  ASSERT_EQ(res.admission, Admission::Admitted);
  EXPECT_EQ(res.placement, Placement::LdppPrimaryBackup);
  const auto& conn = sim.active().at(0);
  EXPECT_EQ(net.describe(conn.path), "A-B");
  EXPECT_EQ(net.describe(*conn.backup_path), "A-D-C-B");
  EXPECT_EQ(sim.reserved_slices(), 3 * conn.slots);
  EXPECT_EQ(sim.working_slices(), conn.slots);
}

class LdppExhausted : public ::testing::Test {
 protected:
  Network net = fixture("ring4");

  // Fills every core of C-D so no A-B backup can be placed.
  Simulator filled(LdppFallback mode) {
    auto opt = options(4, false);
    opt.ldpp_sct2 = mode;
    Simulator sim(ldpp_scenario(net, opt));
    for (int i = 0; i < 7; ++i) EXPECT_TRUE(sim.offer(req(100 + i, C, D, 250, Sct::III)).admitted());
    return sim;
  }
};

TEST_F(LdppExhausted, SctTwoDegradesToUnprotected) {
  auto sim = filled(LdppFallback::Degrade);
  auto res = sim.offer(req(0, A, B, 250, Sct::II));
  EXPECT_EQ(res.admission, Admission::AdmittedUnprotected);
  EXPECT_EQ(sim.active().at(0).state, ProtectionState::Unprotected);
  EXPECT_EQ(sim.reserved_slices(), 0);
}

TEST_F(LdppExhausted, SctTwoBlockModeBlocks) {
  auto sim = filled(LdppFallback::Block);
  const auto before = sim.grid().occupied_total();
  auto res = sim.offer(req(0, A, B, 250, Sct::II));
  EXPECT_FALSE(res.admitted());
  EXPECT_EQ(res.reason, BlockReason::NoBackup);
  EXPECT_EQ(sim.grid().occupied_total(), before);
}

TEST(ProvisionLdpp, SctThreeIsPrimaryOnly) {
  Simulator sim(ldpp_scenario(fixture("ring4")));
  auto res = sim.offer(req(0, A, B, 100, Sct::III));
  EXPECT_EQ(res.admission, Admission::Admitted);
  EXPECT_EQ(res.placement, Placement::LdppPrimaryOnly);
  EXPECT_EQ(sim.reserved_slices(), 0);
}

TEST(RestoreLdpp, ProtectedConnectionSwitchesToItsBackup) {
  auto net = fixture("ring4");
  Simulator sim(ldpp_scenario(net));
  ASSERT_TRUE(sim.offer(req(0, A, B, 100, Sct::I)).admitted());
  auto report = sim.restore_ldpp(net.link_named("A", "B"));
  ASSERT_EQ(report.affected(), 1u);
  EXPECT_EQ(report.entries[0].outcome, Outcome::Restored);
  const auto& conn = sim.active().at(0);
  EXPECT_EQ(net.describe(conn.path), "A-D-C-B");
  EXPECT_EQ(sim.reserved_slices(), 0);
  EXPECT_TRUE(sim.accounting_consistent());
}

TEST(RestoreLdpp, UnprotectedSctTwoWithoutSurvivingPathIsDropped) {
  Simulator sim(ldpp_scenario(make_net(3, {{0, 1, 1}, {1, 2, 1}})));
  ASSERT_EQ(sim.offer(req(0, A, B, 100, Sct::II)).admission, Admission::AdmittedUnprotected);
  auto report = sim.restore_ldpp(0);
  ASSERT_EQ(report.affected(), 1u);
  EXPECT_EQ(report.entries[0].outcome, Outcome::Dropped);
  EXPECT_EQ(sim.grid().occupied_total(), 0);
}

TEST(RestoreLdpp, UnprotectedSctTwoReroutesOverAnyCore) {
  auto net = fixture("ring4");
  auto opt = options(4, false);
  Simulator sim(ldpp_scenario(net, opt));
  for (int i = 0; i < 7; ++i) ASSERT_TRUE(sim.offer(req(100 + i, C, D, 250, Sct::III)).admitted());
  ASSERT_EQ(sim.offer(req(0, A, B, 250, Sct::II)).admission, Admission::AdmittedUnprotected);
  for (int i = 0; i < 7; ++i) sim.depart(100 + i);
  auto report = sim.restore_ldpp(net.link_named("A", "B"));
  ASSERT_EQ(report.affected(), 1u);
  EXPECT_EQ(report.entries[0].outcome, Outcome::Restored);
  EXPECT_EQ(net.describe(sim.active().at(0).path), "A-D-C-B");
}

TEST(RestoreLdpp, FailureOnBackupOnlyLinkReleasesTheBackup) {
  auto net = fixture("ring4");
  Simulator sim(ldpp_scenario(net));
  ASSERT_TRUE(sim.offer(req(0, A, B, 100, Sct::I)).admitted());
  auto report = sim.restore_ldpp(net.link_named("C", "D"));
  EXPECT_EQ(report.affected(), 0u);
  const auto& conn = sim.active().at(0);
  EXPECT_EQ(conn.state, ProtectionState::Unprotected);
  EXPECT_TRUE(conn.backup.empty());
  EXPECT_EQ(sim.reserved_slices(), 0);
  EXPECT_TRUE(sim.accounting_consistent());
}

TEST(RestoreLdpp, SctThreeOnFailedLinkIsDropped) {
  Simulator sim(ldpp_scenario(fixture("ring4")));
  ASSERT_TRUE(sim.offer(req(0, A, B, 100, Sct::III)).admitted());
  auto report = sim.restore_ldpp(0);
  ASSERT_EQ(report.affected(), 1u);
  EXPECT_EQ(report.entries[0].outcome, Outcome::Dropped);
}

// ---------------------------------------------------------------- failure draw

TEST(DrawFailure, EqualMttfGivesUniformLink) {
  std::vector<testing::Edge> ring;
  for (int i = 0; i < 10; ++i) ring.emplace_back(i, (i + 1) % 10, 5.0);
  for (auto& [a, b, len] : ring) {
    if (a > b) std::swap(a, b);
  }
  auto net = make_net(10, ring);
  Rng rng(17);
  std::vector<int> counts(10, 0);
  const int draws = 10000;
  for (int i = 0; i < draws; ++i) {
    auto d = draw_failure(net, rng, 100.0);
    ++counts[static_cast<std::size_t>(d.link)];
    ASSERT_GE(d.time, 25.0);
    ASSERT_LE(d.time, 75.0);
  }
  double chi2 = 0;
  for (int c : counts) chi2 += (c - draws / 10.0) * (c - draws / 10.0) / (draws / 10.0);
  EXPECT_LT(chi2, 21.666);  // chi-square, 9 degrees of freedom, 1% level
}

TEST(DrawFailure, VeryShortMttfAlwaysFails) {
  auto net = make_net(3, {{0, 1, 1}, {1, 2, 1}, {0, 2, 1e12}});
  Rng rng(2);
  for (int i = 0; i < 200; ++i) EXPECT_EQ(draw_failure(net, rng, 10.0).link, 2);
}

TEST(ScheduleFailure, FixedAndNoneModes) {
  auto net = fixture("triangle");
  Rng rng(1);
  FailureSchedule fs;
  fs.mode = FailureSchedule::Mode::Fixed;
  fs.link = 2;
  fs.time = 4.5;
  auto d = schedule_failure(net, fs, rng, 10.0);
  ASSERT_TRUE(d);
  EXPECT_EQ(d->link, 2);
  EXPECT_EQ(d->time, 4.5);
  fs.link = 9;
  EXPECT_THROW(schedule_failure(net, fs, rng, 10.0), Error);
  fs.mode = FailureSchedule::Mode::None;
  EXPECT_FALSE(schedule_failure(net, fs, rng, 10.0));
}

// ---------------------------------------------------------------- whole runs

Scenario finland_run(Policy policy, std::uint64_t seed, int requests = 3000, double load = 2600) {
  auto net = fixture("finland12");
  Config cfg;
  cfg.requests = requests;
  auto sc = policy == Policy::Pwcg ? pwcg_scenario(net, cfg.simulation_options())
                                   : ldpp_scenario(net, cfg.simulation_options());
  sc.trace = std::make_shared<const std::vector<RequestSpec>>(make_trace(net, cfg, seed, load));
  sc.seed = seed;
  return sc;
}

TEST(Run, NoFailureLeavesSnapshotEmpty) {
  auto sc = finland_run(Policy::Pwcg, 1, 500);
  sc.failure.mode = FailureSchedule::Mode::None;
  auto rec = run(sc);
  EXPECT_FALSE(rec.failure);
  EXPECT_EQ(rec.arrivals(), 450);
}

TEST(Run, SingleRequestIsNotBlocked) {
  auto sc = pwcg_scenario(fixture("triangle"));
  sc.trace = std::make_shared<const std::vector<RequestSpec>>(std::vector{req(0, A, B, 100, Sct::II)});
  sc.options.warmup_fraction = 0;
  sc.failure.mode = FailureSchedule::Mode::None;
  auto rec = run(sc);
  EXPECT_EQ(rec.arrivals(), 1);
  EXPECT_EQ(rec.blocked(), 0);
}

TEST(Run, DepartureIsProcessedBeforeSimultaneousArrival) {
  auto sc = pwcg_scenario(fixture("triangle"), options(4, false));
  std::vector<RequestSpec> trace;
  for (int i = 0; i < 5; ++i) {
    const double a = 0.125 * i;
    trace.push_back(req(i, A, B, 250, Sct::II, a, 1.0 - a));
  }
  trace.push_back(req(5, A, B, 250, Sct::II, 1.0, 1.0));
  sc.trace = std::make_shared<const std::vector<RequestSpec>>(trace);
  sc.options.warmup_fraction = 0;
  sc.failure.mode = FailureSchedule::Mode::None;
  EXPECT_EQ(run(sc).blocked(), 0);
}

TEST(Run, AccountingHoldsAtEveryEventForBothPolicies) {
  for (Policy p : {Policy::Pwcg, Policy::Ldpp}) {
    auto sc = finland_run(p, 4, 3000, 3200);
    sc.options.check_invariants = true;
    auto rec = run(sc);
    ASSERT_TRUE(rec.failure);
    EXPECT_EQ(rec.failure->total_affected(), rec.failure->total_restored() + rec.failure->total_dropped());
    EXPECT_LE(rec.blocked(), rec.arrivals());
  }
}

TEST(Run, PwcgRestoresEveryAffectedSctOne) {
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    auto rec = run(finland_run(Policy::Pwcg, seed));
    ASSERT_TRUE(rec.failure);
    EXPECT_EQ(rec.failure->restored[0], rec.failure->affected[0]) << "seed " << seed;
  }
}

TEST(Run, IdenticalScenarioGivesIdenticalRecord) {
  for (Policy p : {Policy::Pwcg, Policy::Ldpp}) {
    auto sc = finland_run(p, 9);
    sc.options.record_log = true;
    auto a = run(sc);
    auto b = run(sc);
    EXPECT_EQ(a.trace_hash, b.trace_hash);
    EXPECT_EQ(a.blocked(), b.blocked());
    EXPECT_EQ(a.blocked_gbps(), b.blocked_gbps());
    EXPECT_EQ(a.working_slice_seconds, b.working_slice_seconds);
    EXPECT_EQ(a.spare_slice_seconds, b.spare_slice_seconds);
    ASSERT_TRUE(a.failure && b.failure);
    EXPECT_EQ(a.failure->link, b.failure->link);
    EXPECT_EQ(a.failure->time, b.failure->time);
    EXPECT_EQ(a.failure->affected, b.failure->affected);
    EXPECT_EQ(a.failure->restored, b.failure->restored);
    ASSERT_EQ(a.log.size(), b.log.size());
    for (std::size_t i = 0; i < a.log.size(); ++i) {
      EXPECT_EQ(a.log[i].id, b.log[i].id);
      EXPECT_EQ(a.log[i].admitted, b.log[i].admitted);
    }
  }
}

TEST(Run, SameSeedGivesSameFailureForBothPolicies) {
  auto a = run(finland_run(Policy::Pwcg, 5, 1000));
  auto b = run(finland_run(Policy::Ldpp, 5, 1000));
  ASSERT_TRUE(a.failure && b.failure);
  EXPECT_EQ(a.failure->link, b.failure->link);
  EXPECT_EQ(a.failure->time, b.failure->time);
  EXPECT_EQ(a.trace_hash, b.trace_hash);
}

TEST(Simulator, RejectsMismatchedPlan) {
  auto sc = pwcg_scenario(fixture("triangle"));
  sc.network = std::make_shared<const Network>(fixture("ring4"));
  EXPECT_THROW(Simulator{sc}, Error);
  sc.plan.reset();
  EXPECT_THROW(Simulator{sc}, Error);
}

}  // namespace
}  // namespace pwcg
