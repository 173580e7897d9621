#pragma once

#include <bitset>
#include <concepts>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "pwcg/error.hpp"
#include "pwcg/planner.hpp"
#include "pwcg/topology.hpp"

namespace pwcg {

inline constexpr int kMaxSlices = 1024;
using SliceSet = std::bitset<kMaxSlices>;
using OwnerId = std::int64_t;
inline constexpr OwnerId kFree = -1;

// Crosstalk admissibility: a slice may be used on a core while at most
// `max_adjacent_overlap` adjacent cores occupy the same slice. 0 means strict
// avoidance.
struct XtRule {
  int max_adjacent_overlap = 1;
};

// Contiguous slice block on one core of one link.
struct Segment {
  LinkId link = 0;
  CoreId core = 0;
  int start = 0;
  int count = 0;
  friend bool operator==(const Segment&, const Segment&) = default;
};

inline SliceSet slice_range(int start, int count) {
  SliceSet s;
  for (int i = start; i < start + count; ++i) s.set(static_cast<std::size_t>(i));
  return s;
}

class SpectrumGrid {
 public:
  SpectrumGrid() = default;

  SpectrumGrid(int links, CoreLayout layout, int slices = 320, double slice_ghz = 12.5)
      : links_(links), layout_(std::move(layout)), slices_(slices), slice_ghz_(slice_ghz) {
    if (links < 0) throw Error(Errc::Precondition, "negative link count");
    if (slices < 1 || slices > kMaxSlices) {
      throw Error(Errc::Config, "slices per core must be in 1.." + std::to_string(kMaxSlices));
    }
    const auto cells = static_cast<std::size_t>(links) * static_cast<std::size_t>(cores());
    owners_.assign(cells * static_cast<std::size_t>(slices), kFree);
    occupied_.assign(cells, SliceSet{});
    counts_.assign(cells, 0);
    for (int i = 0; i < slices; ++i) all_.set(static_cast<std::size_t>(i));
  }

  int links() const { return links_; }
  int cores() const { return layout_.size(); }
  int slices() const { return slices_; }
  double slice_ghz() const { return slice_ghz_; }
  const CoreLayout& layout() const { return layout_; }
  const SliceSet& all_slices() const { return all_; }

  OwnerId owner(LinkId l, CoreId k, int slice) const {
    return owners_[cell(l, k) * static_cast<std::size_t>(slices_) + static_cast<std::size_t>(slice)];
  }

  const SliceSet& occupied(LinkId l, CoreId k) const { return occupied_[cell(l, k)]; }
  int occupied_count(LinkId l, CoreId k) const { return counts_[cell(l, k)]; }
  long long occupied_total() const { return total_; }

  bool is_free(LinkId l, CoreId k, int start, int count) const {
    if (start < 0 || count < 1 || start + count > slices_) return false;
    const auto& occ = occupied(l, k);
    for (int i = start; i < start + count; ++i) {
      if (occ.test(static_cast<std::size_t>(i))) return false;
    }
    return true;
  }

  bool owns(OwnerId id) const { return by_owner_.count(id) != 0; }

  const std::vector<Segment>& segments(OwnerId id) const {
    auto it = by_owner_.find(id);
    if (it == by_owner_.end()) throw Error(Errc::UnknownOwner, "owner " + std::to_string(id));
    return it->second;
  }

  // All-or-nothing: either every segment is placed or the grid is unchanged.
  void allocate(std::span<const Segment> segs, OwnerId id) {
    if (id < 0) throw Error(Errc::Precondition, "owner ids must be nonnegative");
    for (std::size_t i = 0; i < segs.size(); ++i) {
      const auto& s = segs[i];
      check_segment(s);
      if (!is_free(s.link, s.core, s.start, s.count)) {
        throw Error(Errc::DoubleAllocation, describe(s) + " already occupied");
      }
      for (std::size_t j = 0; j < i; ++j) {
        const auto& o = segs[j];
        if (o.link == s.link && o.core == s.core && o.start < s.start + s.count &&
            s.start < o.start + o.count) {
          throw Error(Errc::DoubleAllocation, describe(s) + " overlaps another segment");
        }
      }
    }
    auto& mine = by_owner_[id];
    for (const auto& s : segs) {
      write(s, id);
      mine.push_back(s);
    }
  }

  void allocate(const Segment& seg, OwnerId id) { allocate(std::span<const Segment>(&seg, 1), id); }

  void release(OwnerId id) {
    auto it = by_owner_.find(id);
    if (it == by_owner_.end()) throw Error(Errc::UnknownOwner, "owner " + std::to_string(id));
    for (const auto& s : it->second) write(s, kFree);
    by_owner_.erase(it);
  }

  // Releases the owner's segments on one link and returns them.
  std::vector<Segment> release_on_link(OwnerId id, LinkId l) {
    auto it = by_owner_.find(id);
    if (it == by_owner_.end()) throw Error(Errc::UnknownOwner, "owner " + std::to_string(id));
    std::vector<Segment> removed;
    auto& segs = it->second;
    for (auto s = segs.begin(); s != segs.end();) {
      if (s->link == l) {
        write(*s, kFree);
        removed.push_back(*s);
        s = segs.erase(s);
      } else {
        ++s;
      }
    }
    if (segs.empty()) by_owner_.erase(it);
    return removed;
  }

  // Empty when every slice is either free or owned by exactly the owner whose
  // segment list covers it, and per-core counters agree.
  std::vector<std::string> check_conservation() const {
    std::vector<std::string> problems;
    std::vector<OwnerId> expect(owners_.size(), kFree);
    for (const auto& [id, segs] : by_owner_) {
      for (const auto& s : segs) {
        for (int i = s.start; i < s.start + s.count; ++i) {
          auto idx = cell(s.link, s.core) * static_cast<std::size_t>(slices_) + static_cast<std::size_t>(i);
          if (expect[idx] != kFree) problems.push_back("slice owned twice: " + describe(s));
          expect[idx] = id;
        }
      }
    }
    if (expect != owners_) problems.push_back("owner table disagrees with segment lists");
    long long total = 0;
    for (LinkId l = 0; l < links_; ++l) {
      for (CoreId k = 0; k < cores(); ++k) {
        int used = 0;
        for (int i = 0; i < slices_; ++i) used += owner(l, k, i) != kFree;
        if (used != occupied_count(l, k) || static_cast<int>(occupied(l, k).count()) != used) {
          problems.push_back("occupancy counter mismatch on link " + std::to_string(l) + " core " +
                             std::to_string(k));
        }
        total += used;
      }
    }
    if (total != total_) problems.push_back("total occupancy counter mismatch");
    return problems;
  }

  friend bool operator==(const SpectrumGrid& a, const SpectrumGrid& b) {
    return a.links_ == b.links_ && a.slices_ == b.slices_ && a.owners_ == b.owners_ &&
           a.by_owner_ == b.by_owner_;
  }

  const std::map<OwnerId, std::vector<Segment>>& owners() const { return by_owner_; }

 private:
  std::size_t cell(LinkId l, CoreId k) const {
    return static_cast<std::size_t>(l) * static_cast<std::size_t>(cores()) + static_cast<std::size_t>(k);
  }

  void check_segment(const Segment& s) const {
    if (s.link < 0 || s.link >= links_ || s.core < 0 || s.core >= cores() || s.count < 1 ||
        s.start < 0 || s.start + s.count > slices_) {
      throw Error(Errc::Precondition, "segment out of range: " + describe(s));
    }
  }

  void write(const Segment& s, OwnerId id) {
    const auto c = cell(s.link, s.core);
    auto* row = &owners_[c * static_cast<std::size_t>(slices_)];
    for (int i = s.start; i < s.start + s.count; ++i) {
      row[i] = id;
      occupied_[c].set(static_cast<std::size_t>(i), id != kFree);
    }
    const int delta = id == kFree ? -s.count : s.count;
    counts_[c] += delta;
    total_ += delta;
  }

  static std::string describe(const Segment& s) {
    return "link " + std::to_string(s.link) + " core " + std::to_string(s.core) + " slices [" +
           std::to_string(s.start) + "," + std::to_string(s.start + s.count) + ")";
  }

  int links_ = 0;
  CoreLayout layout_;
  int slices_ = 0;
  double slice_ghz_ = 12.5;
  std::vector<OwnerId> owners_;
  std::vector<SliceSet> occupied_;
  std::vector<int> counts_;
  long long total_ = 0;
  SliceSet all_;
  std::map<OwnerId, std::vector<Segment>> by_owner_;
};

inline bool xt_admissible(const SpectrumGrid& grid, LinkId l, CoreId k, int start, int count,
                          const XtRule& rule) {
  for (int i = start; i < start + count; ++i) {
    int adjacent = 0;
    for (CoreId n : grid.layout().neighbors(k)) {
      adjacent += grid.owner(l, n, i) != kFree;
    }
    if (adjacent > rule.max_adjacent_overlap) return false;
  }
  return true;
}

// Slices of (l, k) that are free and crosstalk-admissible one at a time.
inline SliceSet xt_usable(const SpectrumGrid& grid, LinkId l, CoreId k, const XtRule& rule) {
  const int h = rule.max_adjacent_overlap;
  const auto& nbrs = grid.layout().neighbors(k);
  SliceSet usable = grid.all_slices() & ~grid.occupied(l, k);
  if (h >= static_cast<int>(nbrs.size())) return usable;
  // at_least[j]: slices where at least j+1 neighbors are occupied.
  std::vector<SliceSet> at_least(static_cast<std::size_t>(h) + 1);
  for (CoreId n : nbrs) {
    const auto& occ = grid.occupied(l, n);
    for (std::size_t j = at_least.size(); j-- > 1;) at_least[j] |= at_least[j - 1] & occ;
    at_least[0] |= occ;
  }
  return usable & ~at_least[static_cast<std::size_t>(h)];
}

// Start positions s such that [s, s+count) lies entirely inside `usable`.
inline SliceSet block_starts(const SliceSet& usable, int count) {
  SliceSet starts = usable;
  for (int i = 1; i < count && starts.any(); ++i) starts &= usable >> static_cast<std::size_t>(i);
  return starts;
}

struct Fit {
  int start = 0;
  std::vector<CoreId> cores;  // one per path link
};

struct NoExclusion {
  const SliceSet* operator()(LinkId, CoreId) const { return nullptr; }
};

// Smallest start slice at which every link of the route has an allowed core
// whose [start, start+count) block is free and crosstalk-admissible; on each
// link the lowest such core is chosen.
//
// allowed(hop, link, core) -> bool; exclude(link, core) -> slices that must
// stay untouched on that core, or nullptr.
template <typename Allowed, typename Exclude = NoExclusion>
  requires std::predicate<Allowed&, std::size_t, LinkId, CoreId>
std::optional<Fit> first_fit(const SpectrumGrid& grid, std::span<const LinkId> links, int count,
                             const XtRule& rule, Allowed&& allowed, Exclude&& exclude = {}) {
  if (count < 1) throw Error(Errc::Precondition, "first_fit needs at least one slot");
  if (links.empty() || count > grid.slices()) return std::nullopt;
  const int k = grid.cores();
  std::vector<SliceSet> starts(links.size() * static_cast<std::size_t>(k));
  std::vector<std::uint8_t> usable_core(starts.size(), 0);
  SliceSet common = grid.all_slices();
  for (std::size_t hop = 0; hop < links.size(); ++hop) {
    SliceSet any;
    for (CoreId c = 0; c < k; ++c) {
      if (!allowed(hop, links[hop], c)) continue;
      SliceSet usable = xt_usable(grid, links[hop], c, rule);
      if (const SliceSet* ex = exclude(links[hop], c)) usable &= ~*ex;
      auto& st = starts[hop * static_cast<std::size_t>(k) + static_cast<std::size_t>(c)];
      st = block_starts(usable, count);
      usable_core[hop * static_cast<std::size_t>(k) + static_cast<std::size_t>(c)] = 1;
      any |= st;
    }
    common &= any;
    if (common.none()) return std::nullopt;
  }
  std::size_t s = 0;
  while (!common.test(s)) ++s;

  Fit fit;
  fit.start = static_cast<int>(s);
  for (std::size_t hop = 0; hop < links.size(); ++hop) {
    for (CoreId c = 0; c < k; ++c) {
      const auto idx = hop * static_cast<std::size_t>(k) + static_cast<std::size_t>(c);
      if (usable_core[idx] && starts[idx].test(s)) {
        fit.cores.push_back(c);
        break;
      }
    }
  }
  return fit;
}

// Convenience overload: explicit allowed core set per hop.
inline std::optional<Fit> first_fit(const SpectrumGrid& grid, std::span<const LinkId> links,
                                    int count, const XtRule& rule,
                                    const std::vector<std::vector<CoreId>>& allowed) {
  return first_fit(grid, links, count, rule, [&](std::size_t hop, LinkId, CoreId c) {
    const auto& a = allowed[hop];
    return std::find(a.begin(), a.end(), c) != a.end();
  });
}

inline std::vector<Segment> fit_segments(std::span<const LinkId> links, const Fit& fit, int count) {
  std::vector<Segment> segs;
  segs.reserve(links.size());
  for (std::size_t i = 0; i < links.size(); ++i) segs.push_back({links[i], fit.cores[i], fit.start, count});
  return segs;
}

// An active connection that relies on the protection structure: the
// (link, protected core) hops of its working route and its slice block.
struct ProtectedWork {
  std::vector<std::pair<LinkId, CoreId>> hops;
  int start = 0;
  int slots = 0;
};

struct EpvReading {
  LinkId link = 0;
  CoreId core = 0;
  int committed = 0;
  double epv = 0.0;
};

// Fraction of a spare core's slices that active protected connections would
// occupy if each were switched onto its backup route.
inline EpvReading epv(const SpectrumGrid& grid, const BackupMap& backups,
                      std::span<const ProtectedWork> active, LinkId link, CoreId spare_core) {
  SliceSet committed;
  for (const auto& w : active) {
    for (auto [l, k] : w.hops) {
      const BackupRoute* route = backups.find(l, k);
      if (!route) continue;
      for (std::size_t i = 0; i < route->path.links.size(); ++i) {
        if (route->path.links[i] == link && route->spare_cores[i] == spare_core) {
          committed |= slice_range(w.start, w.slots);
        }
      }
    }
  }
  EpvReading r;
  r.link = link;
  r.core = spare_core;
  r.committed = static_cast<int>(committed.count());
  r.epv = static_cast<double>(r.committed) / static_cast<double>(grid.slices());
  return r;
}

// Incrementally maintained backup pledges per (link, spare core). Slices are
// reference counted so overlapping pledges form a union.
class PledgeLedger {
 public:
  PledgeLedger() = default;
  PledgeLedger(int links, int cores, int slices)
      : cores_(cores),
        slices_(slices),
        counts_(static_cast<std::size_t>(links) * static_cast<std::size_t>(cores) *
                    static_cast<std::size_t>(slices),
                0),
        pledged_(static_cast<std::size_t>(links) * static_cast<std::size_t>(cores)) {}

  void add(LinkId l, CoreId k, int start, int count) { update(l, k, start, count, +1); }
  void remove(LinkId l, CoreId k, int start, int count) { update(l, k, start, count, -1); }

  const SliceSet& pledged(LinkId l, CoreId k) const { return pledged_[cell(l, k)]; }
  int committed(LinkId l, CoreId k) const { return static_cast<int>(pledged(l, k).count()); }
  double epv(LinkId l, CoreId k) const {
    return static_cast<double>(committed(l, k)) / static_cast<double>(slices_);
  }
  bool empty() const {
    for (const auto& p : pledged_) {
      if (p.any()) return false;
    }
    return true;
  }

 private:
  std::size_t cell(LinkId l, CoreId k) const {
    return static_cast<std::size_t>(l) * static_cast<std::size_t>(cores_) + static_cast<std::size_t>(k);
  }

  void update(LinkId l, CoreId k, int start, int count, int sign) {
    const auto c = cell(l, k);
    auto* row = &counts_[c * static_cast<std::size_t>(slices_)];
    for (int i = start; i < start + count; ++i) {
      row[i] = static_cast<std::uint16_t>(row[i] + sign);
      pledged_[c].set(static_cast<std::size_t>(i), row[i] != 0);
    }
  }

  int cores_ = 0;
  int slices_ = 0;
  std::vector<std::uint16_t> counts_;
  std::vector<SliceSet> pledged_;
};

struct Utilization {
  std::vector<double> per_core;  // averaged over links
  double overall = 0.0;
};

inline Utilization utilization(const SpectrumGrid& grid) {
  Utilization u;
  u.per_core.assign(static_cast<std::size_t>(grid.cores()), 0.0);
  if (grid.links() == 0) return u;
  const double per_core_total = static_cast<double>(grid.links()) * grid.slices();
  for (CoreId k = 0; k < grid.cores(); ++k) {
    long long used = 0;
    for (LinkId l = 0; l < grid.links(); ++l) used += grid.occupied_count(l, k);
    u.per_core[static_cast<std::size_t>(k)] = static_cast<double>(used) / per_core_total;
  }
  u.overall = static_cast<double>(grid.occupied_total()) / (per_core_total * grid.cores());
  return u;
}

// Diagnostic dump: {"slices", "slice_ghz", "cores": [{"link", "core",
// "runs": [[start, length, owner], ...]}]}; only non-empty cores are listed.
inline nlohmann::json snapshot(const SpectrumGrid& grid) {
  nlohmann::json doc;
  doc["slices"] = grid.slices();
  doc["slice_ghz"] = grid.slice_ghz();
  doc["cores"] = nlohmann::json::array();
  for (LinkId l = 0; l < grid.links(); ++l) {
    for (CoreId k = 0; k < grid.cores(); ++k) {
      if (grid.occupied_count(l, k) == 0) continue;
      nlohmann::json runs = nlohmann::json::array();
      int i = 0;
      while (i < grid.slices()) {
        const OwnerId o = grid.owner(l, k, i);
        int j = i;
        while (j < grid.slices() && grid.owner(l, k, j) == o) ++j;
        if (o != kFree) runs.push_back({i, j - i, o});
        i = j;
      }
      doc["cores"].push_back({{"link", l}, {"core", k}, {"runs", runs}});
    }
  }
  return doc;
}

}  // namespace pwcg
