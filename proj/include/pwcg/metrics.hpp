#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "pwcg/error.hpp"
#include "pwcg/simulator.hpp"

namespace pwcg {

inline double cbr(const RunRecord& r) {
  if (r.arrivals() <= 0) throw Error(Errc::Precondition, "cbr needs at least one arrival");
  return static_cast<double>(r.blocked()) / static_cast<double>(r.arrivals());
}

inline double bbr(const RunRecord& r) {
  if (r.arrivals() <= 0) throw Error(Errc::Precondition, "bbr needs at least one arrival");
  return r.blocked_gbps() / r.arrived_gbps();
}

inline const FailureOutcome& failure_of(const RunRecord& r) {
  if (!r.failure) throw Error(Errc::NoFailure, "run has no link failure");
  return *r.failure;
}

inline double acr(const RunRecord& r) { return static_cast<double>(failure_of(r).total_affected()); }
inline double abw(const RunRecord& r) { return static_cast<double>(failure_of(r).affected_slots); }

inline double protection_level(const RunRecord& r) {
  const auto& f = failure_of(r);
  if (f.total_affected() == 0) return 100.0;
  return 100.0 * static_cast<double>(f.total_restored()) / static_cast<double>(f.total_affected());
}

inline double redundancy(const RunRecord& r) {
  if (!(r.working_slice_seconds > 0)) return 0.0;
  return r.spare_slice_seconds / r.working_slice_seconds;
}

// One row of the results table. Failure metrics are NaN when the run had no
// failure (written as empty CSV cells).
struct MetricsRow {
  double cbr = 0.0;
  double bbr = 0.0;
  double acr = NAN;
  double abw = NAN;
  double protection_level = NAN;
  double redundancy = 0.0;
};

inline MetricsRow metrics_of(const RunRecord& r) {
  MetricsRow m;
  m.cbr = cbr(r);
  m.bbr = bbr(r);
  if (r.failure) {
    m.acr = acr(r);
    m.abw = abw(r);
    m.protection_level = protection_level(r);
  }
  m.redundancy = redundancy(r);
  return m;
}

struct Summary {
  MetricsRow mean;
  MetricsRow stddev;  // sample standard deviation; 0 for a single report
  std::size_t count = 0;
};

namespace detail {

template <typename Get>
void mean_sd(const std::vector<MetricsRow>& rows, Get get, double& mean, double& sd) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& r : rows) {
    const double v = get(r);
    if (std::isnan(v)) continue;
    sum += v;
    ++n;
  }
  if (n == 0) {
    mean = sd = NAN;
    return;
  }
  mean = sum / static_cast<double>(n);
  auto present = [&](const MetricsRow& r) { return !std::isnan(get(r)); };
  const double v0 = get(*std::find_if(rows.begin(), rows.end(), present));
  if (std::all_of(rows.begin(), rows.end(), [&](const MetricsRow& r) { return !present(r) || get(r) == v0; })) {
    mean = v0;
    sd = 0.0;
    return;
  }
  double ss = 0.0;
  for (const auto& r : rows) {
    const double v = get(r);
    if (!std::isnan(v)) ss += (v - mean) * (v - mean);
  }
  sd = n > 1 ? std::sqrt(ss / static_cast<double>(n - 1)) : 0.0;
}

}  // namespace detail

inline Summary aggregate(const std::vector<MetricsRow>& rows) {
  if (rows.empty()) throw Error(Errc::Precondition, "aggregate needs at least one report");
  Summary s;
  s.count = rows.size();
  detail::mean_sd(rows, [](const MetricsRow& r) { return r.cbr; }, s.mean.cbr, s.stddev.cbr);
  detail::mean_sd(rows, [](const MetricsRow& r) { return r.bbr; }, s.mean.bbr, s.stddev.bbr);
  detail::mean_sd(rows, [](const MetricsRow& r) { return r.acr; }, s.mean.acr, s.stddev.acr);
  detail::mean_sd(rows, [](const MetricsRow& r) { return r.abw; }, s.mean.abw, s.stddev.abw);
  detail::mean_sd(rows, [](const MetricsRow& r) { return r.protection_level; }, s.mean.protection_level,
                  s.stddev.protection_level);
  detail::mean_sd(rows, [](const MetricsRow& r) { return r.redundancy; }, s.mean.redundancy,
                  s.stddev.redundancy);
  return s;
}

inline constexpr const char* kCsvHeader = "policy,load,seed,cbr,bbr,acr,abw,protection_level,redundancy";

inline std::string format_number(double v) {
  if (std::isnan(v)) return "";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

inline std::string csv_row(const std::string& policy, double load, const std::string& seed,
                           const MetricsRow& m) {
  std::string row = policy + "," + format_number(load) + "," + seed;
  for (double v : {m.cbr, m.bbr, m.acr, m.abw, m.protection_level, m.redundancy}) {
    row += ",";
    row += format_number(v);
  }
  return row;
}

inline MetricsRow difference(const MetricsRow& a, const MetricsRow& b) {
  return {a.cbr - b.cbr,
          a.bbr - b.bbr,
          a.acr - b.acr,
          a.abw - b.abw,
          a.protection_level - b.protection_level,
          a.redundancy - b.redundancy};
}

}  // namespace pwcg
