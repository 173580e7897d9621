#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "pwcg/error.hpp"
#include "pwcg/topology.hpp"

namespace pwcg {

enum class Sct : std::uint8_t { I = 0, II = 1, III = 2 };
inline constexpr int kSctCount = 3;

inline const char* to_string(Sct s) {
  switch (s) {
    case Sct::I: return "SCT-I";
    case Sct::II: return "SCT-II";
    case Sct::III: return "SCT-III";
  }
  return "?";
}

inline std::size_t index(Sct s) { return static_cast<std::size_t>(s); }

struct RequestSpec {
  std::int64_t id = 0;
  double arrival = 0.0;
  double holding = 0.0;
  NodeId src = 0;
  NodeId dst = 0;
  double bandwidth_gbps = 0.0;
  Sct sct = Sct::I;

  friend bool operator==(const RequestSpec&, const RequestSpec&) = default;
};

struct Modulation {
  std::string name;
  int bits_per_symbol = 1;
  double max_reach_km = 0.0;
};

class ModulationTable {
 public:
  explicit ModulationTable(std::vector<Modulation> levels) : levels_(std::move(levels)) {
    if (levels_.empty()) throw Error(Errc::Config, "modulation table is empty");
    for (std::size_t i = 1; i < levels_.size(); ++i) {
      if (levels_[i].bits_per_symbol <= levels_[i - 1].bits_per_symbol ||
          levels_[i].max_reach_km >= levels_[i - 1].max_reach_km) {
        throw Error(Errc::Config,
                    "modulation table must have increasing bits/symbol and decreasing reach");
      }
    }
  }

  // BPSK through 64QAM on a halving reach ladder.
  static ModulationTable defaults() {
    return ModulationTable({{"BPSK", 1, 4000.0},
                            {"QPSK", 2, 2000.0},
                            {"8QAM", 3, 1000.0},
                            {"16QAM", 4, 500.0},
                            {"32QAM", 5, 250.0},
                            {"64QAM", 6, 125.0}});
  }

  const std::vector<Modulation>& levels() const { return levels_; }

 private:
  std::vector<Modulation> levels_;
};

// Highest-order format whose reach covers the route.
inline const Modulation& pick_modulation(const ModulationTable& table, double path_km) {
  if (!(path_km > 0)) throw Error(Errc::Precondition, "path length must be positive");
  const auto& levels = table.levels();
  for (auto it = levels.rbegin(); it != levels.rend(); ++it) {
    if (it->max_reach_km >= path_km) return *it;
  }
  throw Error(Errc::NoModulation, "route of " + std::to_string(path_km) + " km exceeds every reach");
}

// ceil(bandwidth / (slice_ghz * bits_per_symbol)), one Gbps per GHz per bit.
inline int required_slots(double bandwidth_gbps, const Modulation& m, double slice_ghz = 12.5) {
  if (!(bandwidth_gbps > 0)) throw Error(Errc::Precondition, "bandwidth must be positive");
  const double per_slot = slice_ghz * m.bits_per_symbol;
  return static_cast<int>(std::ceil(bandwidth_gbps / per_slot - 1e-12));
}

// 64-bit Mersenne Twister seeded through SplitMix64; stream(seed, k) gives
// independent, reproducible sub-streams.
class Rng {
 public:
  static constexpr const char* kAlgorithm = "mt19937_64/splitmix64";

  explicit Rng(std::uint64_t seed) : engine_(splitmix(seed)) {}

  static Rng stream(std::uint64_t seed, std::uint64_t stream_id) {
    return Rng(splitmix(seed) ^ splitmix(stream_id + 0x632be59bd9b4e019ULL));
  }

  static std::uint64_t splitmix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
  }

  double exponential(double rate) { return std::exponential_distribution<double>(rate)(engine_); }
  double uniform01() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }
  int uniform_int(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(engine_); }
  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

struct TrafficParameters {
  double arrival_rate = 1.0;   // requests per second
  double mean_holding = 1.0;   // seconds
  std::vector<double> bandwidth_grid{50, 75, 100, 125, 150, 175, 200, 225, 250};
};

// Poisson arrivals, exponential holding, uniform ordered node pair, uniform
// bandwidth from the grid, uniform service class.
inline std::vector<RequestSpec> generate_requests(Rng& rng, int n, const TrafficParameters& tp,
                                                  const Network& net) {
  if (n < 1) throw Error(Errc::Precondition, "request count must be positive");
  if (!(tp.arrival_rate > 0) || !(tp.mean_holding > 0)) {
    throw Error(Errc::Precondition, "arrival rate and mean holding time must be positive");
  }
  if (tp.bandwidth_grid.empty()) throw Error(Errc::Config, "bandwidth grid is empty");
  if (net.node_count() < 2) throw Error(Errc::Precondition, "need at least two nodes");

  std::vector<RequestSpec> out;
  out.reserve(static_cast<std::size_t>(n));
  double t = 0.0;
  const int v = net.node_count();
  const int bw_last = static_cast<int>(tp.bandwidth_grid.size()) - 1;
  for (int i = 0; i < n; ++i) {
    double next = t + rng.exponential(tp.arrival_rate);
    if (!(next > t)) next = std::nextafter(t, std::numeric_limits<double>::infinity());
    t = next;
    RequestSpec r;
    r.id = i;
    r.arrival = t;
    do {
      r.holding = rng.exponential(1.0 / tp.mean_holding);
    } while (!(r.holding > 0));
    r.src = rng.uniform_int(0, v - 1);
    r.dst = rng.uniform_int(0, v - 2);
    if (r.dst >= r.src) ++r.dst;
    r.bandwidth_gbps = tp.bandwidth_grid[static_cast<std::size_t>(rng.uniform_int(0, bw_last))];
    r.sct = static_cast<Sct>(rng.uniform_int(0, kSctCount - 1));
    out.push_back(r);
  }
  return out;
}

// FNV-1a over the exact field bytes; identifies a trace in run metadata.
inline std::uint64_t trace_hash(const std::vector<RequestSpec>& trace) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&](const void* p, std::size_t n) {
    const auto* b = static_cast<const unsigned char*>(p);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= b[i];
      h *= 0x100000001b3ULL;
    }
  };
  for (const auto& r : trace) {
    mix(&r.id, sizeof r.id);
    mix(&r.arrival, sizeof r.arrival);
    mix(&r.holding, sizeof r.holding);
    mix(&r.src, sizeof r.src);
    mix(&r.dst, sizeof r.dst);
    mix(&r.bandwidth_gbps, sizeof r.bandwidth_gbps);
    const auto s = static_cast<std::uint8_t>(r.sct);
    mix(&s, 1);
  }
  return h;
}

// Trace text format: header line then one CSV record per request,
//   id,arrival,holding,src,dst,bandwidth_gbps,sct   (sct as 1, 2 or 3)
// Reals are written with 17 significant digits so a round trip is exact.
inline std::string write_trace(const std::vector<RequestSpec>& trace) {
  std::string out = "id,arrival,holding,src,dst,bandwidth_gbps,sct\n";
  char buf[256];
  for (const auto& r : trace) {
    std::snprintf(buf, sizeof buf, "%lld,%.17g,%.17g,%d,%d,%.17g,%d\n",
                  static_cast<long long>(r.id), r.arrival, r.holding, r.src, r.dst,
                  r.bandwidth_gbps, static_cast<int>(r.sct) + 1);
    out += buf;
  }
  return out;
}

inline std::vector<RequestSpec> read_trace(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::vector<RequestSpec> out;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (lineno == 1 || line.empty()) continue;
    RequestSpec r;
    long long id = 0;
    int sct = 0;
    if (std::sscanf(line.c_str(), "%lld,%lf,%lf,%d,%d,%lf,%d", &id, &r.arrival, &r.holding, &r.src,
                    &r.dst, &r.bandwidth_gbps, &sct) != 7 ||
        sct < 1 || sct > 3) {
      throw Error(Errc::Parse, "trace line " + std::to_string(lineno) + ": malformed record");
    }
    r.id = id;
    r.sct = static_cast<Sct>(sct - 1);
    out.push_back(r);
  }
  return out;
}

}  // namespace pwcg
