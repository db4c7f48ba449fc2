#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "motifrules/error.hpp"
#include "motifrules/series.hpp"

namespace motifrules {

// A closest pair of non-overlapping equal-length windows. The template is the
// member with the smaller start; later stages measure against it alone.
struct Motif {
    Subsequence templ;
    Subsequence partner;
    double pair_distance = 0.0;
    double roughness = 0.0;

    [[nodiscard]] std::size_t length() const noexcept { return templ.length; }
};

// Total variation: sum of absolute successive differences.
[[nodiscard]] inline double roughness(std::span<const double> values) {
    if (values.size() < 2) throw ArgumentError("roughness requires at least 2 samples");
    double tv = 0.0;
    for (std::size_t i = 1; i < values.size(); ++i) tv += std::abs(values[i] - values[i - 1]);
    return tv;
}

[[nodiscard]] inline double roughness(const Subsequence& sub) { return roughness(sub.values()); }

namespace motif_detail {

struct PairCandidate {
    double sq = std::numeric_limits<double>::infinity();
    std::size_t i = 0;
    std::size_t j = 0;
};

// Exact per-pair squared distance under `mode`, matching mode_distance()^2.
class PairMetric {
public:
    PairMetric(std::span<const double> x, std::size_t len, DistanceMode mode)
        : x_(x), len_(len), mode_(mode) {
        if (mode_ == DistanceMode::znorm) {
            const std::size_t nw = x.size() - len + 1;
            normalized_.resize(nw);
            for (std::size_t w = 0; w < nw; ++w)
                normalized_[w] = len >= 2 ? znormalize(x.subspan(w, len))
                                          : std::vector<double>(len, 0.0);
        }
    }

    [[nodiscard]] double exact(std::size_t i, std::size_t j) const {
        if (mode_ == DistanceMode::raw) return squared_distance(x_.subspan(i, len_), x_.subspan(j, len_));
        return squared_distance(normalized_[i], normalized_[j]);
    }

    // Same accumulation order as exact(); gives up with +inf once the partial
    // sum reaches `bound` (or exceeds it when `allow_tie`). Partial sums of
    // non-negative terms never decrease, so abandoning is safe.
    [[nodiscard]] double exact_bounded(std::size_t i, std::size_t j, double bound, bool allow_tie) const {
        const double* a = mode_ == DistanceMode::raw ? x_.data() + i : normalized_[i].data();
        const double* b = mode_ == DistanceMode::raw ? x_.data() + j : normalized_[j].data();
        double acc = 0.0;
        for (std::size_t t = 0; t < len_; ++t) {
            const double d = a[t] - b[t];
            acc += d * d;
            if (allow_tie ? acc > bound : acc >= bound) return std::numeric_limits<double>::infinity();
        }
        return acc;
    }

private:
    std::span<const double> x_;
    std::size_t len_;
    DistanceMode mode_;
    std::vector<std::vector<double>> normalized_;
};

// Fast running estimate of window moments for the z-normalized path.
struct WindowStats {
    std::vector<double> mean;
    std::vector<double> sd;
};

inline WindowStats window_stats(std::span<const double> x, std::size_t len) {
    const std::size_t nw = x.size() - len + 1;
    WindowStats s{std::vector<double>(nw), std::vector<double>(nw)};
    for (std::size_t w = 0; w < nw; ++w) {
        double m = 0.0;
        for (std::size_t t = 0; t < len; ++t) m += x[w + t];
        m /= static_cast<double>(len);
        double v = 0.0;
        for (std::size_t t = 0; t < len; ++t) v += (x[w + t] - m) * (x[w + t] - m);
        s.mean[w] = m;
        s.sd[w] = std::sqrt(v / static_cast<double>(len));
    }
    return s;
}

inline bool key_less(const PairCandidate& a, const PairCandidate& b) noexcept {
    if (a.sq != b.sq) return a.sq < b.sq;
    return a.i != b.i ? a.i < b.i : a.j < b.j;
}

// One full pass over every admissible pair, returning the `capacity` smallest
// pairs by (squared distance, i, j) in ascending order. Distances are tracked
// incrementally along each diagonal; any pair whose estimate lands within
// `tol` of the current cut-off is re-evaluated exactly, so the returned keys
// are exactly those an exhaustive search would produce.
inline std::vector<PairCandidate> closest_pairs(std::span<const double> x, std::size_t len, DistanceMode mode,
                                                const std::vector<char>& excluded, const PairMetric& metric,
                                                const WindowStats* stats, std::size_t capacity) {
    const std::size_t nw = x.size() - len + 1;
    const double L = static_cast<double>(len);
    double tol = 0.0;
    if (mode == DistanceMode::raw) {
        const auto [mn, mx] = std::minmax_element(x.begin(), x.end());
        const double range = *mx - *mn;
        tol = 1e-10 * L * range * range + 1e-300;
    } else {
        tol = 1e-6 * L;
    }
    constexpr std::size_t kResync = 128;

    // Max-heap on key: front() is the worst kept pair.
    std::vector<PairCandidate> heap;
    heap.reserve(capacity);
    const auto worse = [](const PairCandidate& a, const PairCandidate& b) { return key_less(a, b); };

    const auto offer = [&](std::size_t i, std::size_t j, double est) {
        if (heap.size() < capacity) {
            heap.push_back(PairCandidate{metric.exact(i, j), i, j});
            std::push_heap(heap.begin(), heap.end(), worse);
            return;
        }
        const PairCandidate& top = heap.front();
        if (est > top.sq + tol) return;
        const bool earlier = i < top.i || (i == top.i && j < top.j);
        const double sq = metric.exact_bounded(i, j, top.sq, earlier);
        if (sq == std::numeric_limits<double>::infinity()) return;
        const PairCandidate cand{sq, i, j};
        if (!key_less(cand, top)) return;
        std::pop_heap(heap.begin(), heap.end(), worse);
        heap.back() = cand;
        std::push_heap(heap.begin(), heap.end(), worse);
    };

    for (std::size_t k = len; k < nw; ++k) {
        double running = 0.0;
        if (mode == DistanceMode::raw) {
            for (std::size_t i = 0; i + k < nw; ++i) {
                const std::size_t j = i + k;
                if (i % kResync == 0) {
                    running = 0.0;
                    for (std::size_t t = 0; t < len; ++t) {
                        const double d = x[i + t] - x[j + t];
                        running += d * d;
                    }
                } else {
                    const double out = x[i - 1] - x[j - 1];
                    const double in = x[i + len - 1] - x[j + len - 1];
                    running += in * in - out * out;
                }
                if (excluded[i] || excluded[j]) continue;
                if (heap.size() == capacity && running > heap.front().sq + tol) continue;
                offer(i, j, running);
            }
        } else {
            for (std::size_t i = 0; i + k < nw; ++i) {
                const std::size_t j = i + k;
                if (i % kResync == 0) {
                    running = 0.0;
                    for (std::size_t t = 0; t < len; ++t) running += x[i + t] * x[j + t];
                } else {
                    running += x[i + len - 1] * x[j + len - 1] - x[i - 1] * x[j - 1];
                }
                if (excluded[i] || excluded[j]) continue;
                const bool fi = stats->sd[i] < kFlatStddev;
                const bool fj = stats->sd[j] < kFlatStddev;
                double est = 0.0;
                if (fi && fj) est = 0.0;
                else if (fi || fj) est = L;
                else {
                    const double corr = (running - L * stats->mean[i] * stats->mean[j]) /
                                        (L * stats->sd[i] * stats->sd[j]);
                    est = 2.0 * L * (1.0 - corr);
                }
                offer(i, j, est);
            }
        }
    }
    std::sort_heap(heap.begin(), heap.end(), worse);
    return heap;
}

} // namespace motif_detail

// Up to `count` motifs of one length, each the closest non-overlapping window
// pair that does not overlap any member of an earlier motif. Output is in
// ascending pair distance, ties on smallest (template start, partner start).
// Equivalent to exhaustive search; only the evaluation order is optimized.
[[nodiscard]] inline std::vector<Motif> find_motifs(const TimeSeries& series, std::size_t length,
                                                    std::size_t count,
                                                    DistanceMode mode = DistanceMode::raw) {
    if (length == 0) throw ArgumentError("find_motifs: length must be positive");
    if (count == 0) throw ArgumentError("find_motifs: count must be positive");
    if (length > series.size())
        throw ArgumentError("find_motifs: motif length " + std::to_string(length) +
                            " exceeds series length " + std::to_string(series.size()));
    if (series.size() < 2 * length)
        throw ArgumentError("find_motifs: series of length " + std::to_string(series.size()) +
                            " is shorter than twice the motif length " + std::to_string(length));

    const auto x = series.values();
    const std::size_t nw = x.size() - length + 1;
    const motif_detail::PairMetric metric(x, length, mode);

    // The z-normalized estimate works on a globally centered copy to limit
    // cancellation in the running dot products.
    std::vector<double> centered;
    motif_detail::WindowStats stats;
    std::span<const double> scan_values = x;
    if (mode == DistanceMode::znorm) {
        double mean = 0.0;
        for (double v : x) mean += v;
        mean /= static_cast<double>(x.size());
        centered.reserve(x.size());
        for (double v : x) centered.push_back(v - mean);
        scan_values = centered;
        stats = motif_detail::window_stats(scan_values, length);
    }

    std::vector<char> excluded(nw, 0);
    const auto exclude_around = [&](std::size_t s) {
        const std::size_t lo = s >= length - 1 ? s - (length - 1) : 0;
        const std::size_t hi = std::min(nw - 1, s + length - 1);
        for (std::size_t w = lo; w <= hi; ++w) excluded[w] = 1;
    };

    // Each pass caches the best admissible pairs. Exclusions only grow, so
    // the first still-admissible cached pair is the global answer; a fresh
    // pass is needed only once a full cache runs dry.
    constexpr std::size_t kCache = 8192;
    const auto pass = [&] {
        return motif_detail::closest_pairs(scan_values, length, mode, excluded, metric,
                                           mode == DistanceMode::znorm ? &stats : nullptr, kCache);
    };
    std::vector<Motif> motifs;
    auto cache = pass();
    std::size_t pos = 0;
    while (motifs.size() < count) {
        while (pos < cache.size() && (excluded[cache[pos].i] || excluded[cache[pos].j])) ++pos;
        if (pos == cache.size()) {
            if (cache.size() < kCache) break;
            cache = pass();
            pos = 0;
            if (cache.empty()) break;
            continue;
        }
        const auto best = cache[pos++];
        Motif m;
        m.templ = Subsequence(series, best.i, length);
        m.partner = Subsequence(series, best.j, length);
        m.pair_distance = std::sqrt(best.sq);
        m.roughness = length >= 2 ? roughness(m.templ) : 0.0;
        motifs.push_back(m);
        exclude_around(best.i);
        exclude_around(best.j);
    }
    return motifs;
}

// Top-k motifs by descending roughness; ties by ascending pair distance, then
// ascending template start.
[[nodiscard]] inline std::vector<Motif> sort_top_k(std::vector<Motif> motifs, std::size_t k) {
    std::stable_sort(motifs.begin(), motifs.end(), [](const Motif& a, const Motif& b) {
        if (a.roughness != b.roughness) return a.roughness > b.roughness;
        if (a.pair_distance != b.pair_distance) return a.pair_distance < b.pair_distance;
        return a.templ.start < b.templ.start;
    });
    if (motifs.size() > k) motifs.resize(k);
    return motifs;
}

} // namespace motifrules
