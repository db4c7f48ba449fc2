#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "motifrules/error.hpp"
#include "motifrules/series.hpp"

namespace motifrules {

// A template-like window found by scanning.
struct Occurrence {
    std::size_t start = 0;
    std::size_t length = 0;
    double dist = 0.0;
    double time = 0.0; // timestamp of the first sample

    [[nodiscard]] std::size_t last() const noexcept { return start + length - 1; }
};

struct ScanCandidate {
    std::size_t start = 0;
    double dist = 0.0;
};

// Greedy overlap removal: visit candidates by ascending distance (ties by
// start) and keep each one that overlaps nothing kept so far. Result is sorted
// by start. Times are left at zero; scan_similar fills them in.
[[nodiscard]] inline std::vector<Occurrence> remove_overlaps(std::vector<ScanCandidate> candidates,
                                                             std::size_t length) {
    std::sort(candidates.begin(), candidates.end(), [](const ScanCandidate& a, const ScanCandidate& b) {
        return a.dist != b.dist ? a.dist < b.dist : a.start < b.start;
    });
    // `taken` is kept sorted by start so each acceptance test is a neighbour lookup.
    std::vector<std::size_t> taken;
    std::vector<Occurrence> kept;
    for (const auto& c : candidates) {
        const auto it = std::lower_bound(taken.begin(), taken.end(), c.start);
        if (it != taken.end() && *it - c.start < length) continue;
        if (it != taken.begin() && c.start - *std::prev(it) < length) continue;
        taken.insert(it, c.start);
        kept.push_back(Occurrence{c.start, length, c.dist, 0.0});
    }
    std::sort(kept.begin(), kept.end(),
              [](const Occurrence& a, const Occurrence& b) { return a.start < b.start; });
    return kept;
}

// All non-overlapping windows within `threshold` (strict) of the template.
// Every window is scored, so the cost is O(|template| * |series|).
[[nodiscard]] inline std::vector<Occurrence> scan_similar(const TimeSeries& series,
                                                          std::span<const double> templ,
                                                          double threshold,
                                                          DistanceMode mode = DistanceMode::raw) {
    const std::size_t len = templ.size();
    if (len == 0) throw ArgumentError("scan_similar: empty template");
    if (len > series.size())
        throw ArgumentError("scan_similar: template length " + std::to_string(len) +
                            " exceeds series length " + std::to_string(series.size()));

    const auto x = series.values();
    std::vector<double> normalized_templ;
    if (mode == DistanceMode::znorm && len >= 2) normalized_templ = znormalize(templ);

    std::vector<ScanCandidate> candidates;
    // Loose squared pre-filter; the strict test below is on the distance itself.
    const double bound = threshold * threshold * (1.0 + 1e-12);
    for (std::size_t s = 0; s + len <= x.size(); ++s) {
        double d = 0.0;
        if (mode == DistanceMode::raw) {
            const double sq = squared_distance(x.subspan(s, len), templ);
            if (!(sq < bound)) continue;
            d = std::sqrt(sq);
        } else if (len >= 2) {
            d = distance(znormalize(x.subspan(s, len)), normalized_templ);
        }
        if (d < threshold) candidates.push_back({s, d});
    }

    auto occ = remove_overlaps(std::move(candidates), len);
    for (auto& o : occ) o.time = series.time_at(o.start);
    return occ;
}

} // namespace motifrules
