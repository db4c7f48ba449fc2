#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "motifrules/error.hpp"
#include "motifrules/miner.hpp"
#include "motifrules/series.hpp"

namespace motifrules {

// Raised when Q cannot be computed (no firings, or a zero denominator).
class EvaluationError : public Error {
public:
    using Error::Error;
};

struct FireEvent {
    std::size_t index = 0;
    double dist = 0.0;
};

struct Firing {
    std::size_t fire_index = 0;
    double fire_dist = 0.0;
    std::size_t predicted_index = 0;
    double predicted_dist = 0.0;
};

struct Match {
    std::size_t index = 0;
    double dist = 0.0;
};

// Left-to-right scan for antecedent matches. After a firing the scan resumes
// one antecedent length later, so firings never overlap.
[[nodiscard]] inline std::vector<FireEvent> fire_rule(const Rule& rule, const TimeSeries& test_a,
                                                      DistanceMode mode = DistanceMode::raw) {
    const auto& ant = rule.antecedent.values;
    const std::size_t len = ant.size();
    std::vector<FireEvent> fired;
    if (len == 0 || len > test_a.size()) return fired;
    const auto x = test_a.values();
    for (std::size_t s = 0; s + len <= x.size();) {
        const double d = mode_distance(x.subspan(s, len), ant, mode);
        if (d < rule.theta) {
            fired.push_back({s, d});
            s += len;
        } else {
            ++s;
        }
    }
    return fired;
}

// Range of consequent starts x in `series` with 0 < time(x) - anchor_time < tau,
// truncated at the series end. Returns [first, last] or nullopt when empty.
[[nodiscard]] inline std::optional<std::pair<std::size_t, std::size_t>>
prediction_window(const TimeSeries& series, std::size_t consequent_length, double anchor_time, double tau) {
    if (consequent_length == 0 || consequent_length > series.size()) return std::nullopt;
    const std::size_t last_start = series.size() - consequent_length;
    const double rel = (anchor_time - series.start_time()) / series.period();
    std::int64_t lo = static_cast<std::int64_t>(std::floor(rel));
    if (lo < 0) lo = 0;
    while (static_cast<std::size_t>(lo) <= last_start && !(series.time_at(lo) - anchor_time > 0.0)) ++lo;
    if (static_cast<std::size_t>(lo) > last_start) return std::nullopt;
    std::size_t hi = static_cast<std::size_t>(lo);
    // Walk forward while the gap stays below tau; bounded by the window width.
    while (hi + 1 <= last_start && series.time_at(hi + 1) - anchor_time < tau) ++hi;
    if (!(series.time_at(lo) - anchor_time < tau)) return std::nullopt;
    return std::make_pair(static_cast<std::size_t>(lo), hi);
}

// Best consequent match after a firing: the window start with gap in (0, tau)
// after `fire_end_time` that minimizes distance to the consequent; earliest
// index on ties.
[[nodiscard]] inline Match best_match_position(const Rule& rule, const TimeSeries& test_b,
                                               double fire_end_time, double tau,
                                               DistanceMode mode = DistanceMode::raw) {
    const auto& cons = rule.consequent.values;
    const auto range = prediction_window(test_b, cons.size(), fire_end_time, tau);
    if (!range) throw EvaluationError("best_match_position: empty prediction window");
    Match best{range->first, std::numeric_limits<double>::infinity()};
    for (std::size_t x = range->first; x <= range->second; ++x) {
        const double d = mode_distance(test_b.window(x, cons.size()), cons, mode);
        if (d < best.dist) best = {x, d};
    }
    return best;
}

struct Evaluation {
    std::vector<Firing> firings;
    std::optional<double> q;
    std::string failure; // set when q is empty
};

// Q = sum d(consequent, best match after firing i) / sum d(consequent, random
// start v_i), averaged over `repetitions` independent draws of the v_i.
// Repetition r draws from its own stream seeded by (seed, r), so the result
// is a pure function of the inputs. Firings whose prediction window falls
// past the end of test_b are dropped.
[[nodiscard]] inline Evaluation evaluate_rule(const Rule& rule, const TimeSeries& test_a,
                                              const TimeSeries& test_b, std::size_t repetitions,
                                              std::uint64_t seed, DistanceMode mode = DistanceMode::raw) {
    Evaluation ev;
    const auto& cons = rule.consequent.values;
    if (cons.empty() || cons.size() > test_b.size()) {
        ev.failure = "consequent longer than test series";
        return ev;
    }
    for (const auto& f : fire_rule(rule, test_a, mode)) {
        const double end_time = test_a.time_at(f.index + rule.antecedent.length() - 1);
        if (!prediction_window(test_b, cons.size(), end_time, rule.tau)) continue;
        const auto m = best_match_position(rule, test_b, end_time, rule.tau, mode);
        ev.firings.push_back({f.index, f.dist, m.index, m.dist});
    }
    if (ev.firings.empty()) {
        ev.failure = "rule never fired on the test data";
        return ev;
    }
    if (repetitions == 0) {
        ev.failure = "repetitions must be positive";
        return ev;
    }

    const std::size_t n_starts = test_b.size() - cons.size() + 1;
    std::vector<double> dist_at(n_starts);
    for (std::size_t x = 0; x < n_starts; ++x) dist_at[x] = mode_distance(test_b.window(x, cons.size()), cons, mode);

    double numerator = 0.0;
    for (const auto& f : ev.firings) numerator += f.predicted_dist;

    double q_sum = 0.0;
    for (std::size_t r = 0; r < repetitions; ++r) {
        std::uniform_int_distribution<std::size_t> pick(0, n_starts - 1);
        std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                          static_cast<std::uint32_t>(r), static_cast<std::uint32_t>(r >> 32)};
        std::mt19937_64 rng(seq);
        double denominator = 0.0;
        for (std::size_t i = 0; i < ev.firings.size(); ++i) denominator += dist_at[pick(rng)];
        if (!(denominator > 0.0)) {
            ev.failure = "zero denominator: random positions match the consequent exactly";
            return ev;
        }
        q_sum += numerator / denominator;
    }
    ev.q = q_sum / static_cast<double>(repetitions);
    return ev;
}

// Throwing form of evaluate_rule() for callers that only want the number.
[[nodiscard]] inline double q_metric(const Rule& rule, const TimeSeries& test_a, const TimeSeries& test_b,
                                     std::size_t repetitions, std::uint64_t seed,
                                     DistanceMode mode = DistanceMode::raw) {
    auto ev = evaluate_rule(rule, test_a, test_b, repetitions, seed, mode);
    if (!ev.q) throw EvaluationError(ev.failure);
    return *ev.q;
}

} // namespace motifrules
