#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "motifrules/error.hpp"
#include "motifrules/matching.hpp"
#include "motifrules/mdl.hpp"
#include "motifrules/motif.hpp"
#include "motifrules/scan.hpp"
#include "motifrules/series.hpp"

namespace motifrules {

// Self-contained shape: carries its own values so a rule outlives the
// training series it was mined from.
struct Pattern {
    std::string series;
    std::size_t start = 0;
    std::vector<double> values;

    [[nodiscard]] std::size_t length() const noexcept { return values.size(); }

    [[nodiscard]] static Pattern from(const Subsequence& sub) {
        const auto v = sub.values();
        return Pattern{sub.source->name(), sub.start, std::vector<double>(v.begin(), v.end())};
    }
};

// Antecedent shape predicts consequent shape within `tau` seconds; the rule
// fires on any window closer than `theta` to the antecedent.
struct Rule {
    Pattern antecedent;
    Pattern consequent;
    double tau = 0.0;
    double theta = 0.0;
};

struct MinerConfig {
    std::vector<std::size_t> motif_lengths{30, 50};
    std::size_t k_motifs = 5;
    std::size_t k_rules = 5;
    double tau = 300.0;
    double theta = 5.0;
    std::optional<double> consequent_theta; // defaults to theta
    int bits = kDefaultBits;
    DistanceMode mode = DistanceMode::raw;
    unsigned jobs = 1;

    [[nodiscard]] double scan_theta_b() const { return consequent_theta.value_or(theta); }

    void validate() const {
        if (motif_lengths.empty()) throw ArgumentError("motif lengths must not be empty");
        for (auto l : motif_lengths)
            if (l < 2) throw ArgumentError("motif lengths must be at least 2");
        if (k_motifs == 0) throw ArgumentError("k_motifs must be positive");
        if (!(tau > 0.0)) throw ArgumentError("tau must be positive");
        if (!(theta > 0.0)) throw ArgumentError("theta must be positive");
        if (consequent_theta && !(*consequent_theta > 0.0))
            throw ArgumentError("consequent theta must be positive");
        if (bits < kMinBits || bits > kMaxBits) throw ArgumentError("bits must lie in [2, 16]");
    }
};

// Matched instance, for audit output.
struct Instance {
    std::size_t a_start = 0;
    std::size_t b_start = 0;
    double gap = 0.0;
};

struct ScoredRule {
    Rule rule;
    MatchGraph graph;
    MatchResult match;
    RuleScore parts;
    double score = 0.0;

    [[nodiscard]] std::size_t n_antecedents() const noexcept { return graph.antecedents.size(); }

    [[nodiscard]] std::vector<Instance> instances() const {
        std::vector<Instance> out;
        out.reserve(match.selected.size());
        for (auto k : match.selected) {
            const auto& e = graph.edges[k];
            out.push_back({graph.antecedents[e.ant].start, graph.consequents[e.con].start, e.weight});
        }
        return out;
    }
};

// Scans both series for the motif pair, matches the occurrences, and scores
// the resulting rule. A pair without antecedent occurrences scores 0.
[[nodiscard]] inline ScoredRule score_pair(const Motif& m_a, const Motif& m_b, const TimeSeries& t_a,
                                           const TimeSeries& t_b, const MinerConfig& cfg,
                                           const DigitConfig& digits) {
    if (m_a.templ.source != &t_a || m_b.templ.source != &t_b)
        throw ArgumentError("score_pair: motif templates must come from the given series");
    ScoredRule out;
    out.rule.antecedent = Pattern::from(m_a.templ);
    out.rule.consequent = Pattern::from(m_b.templ);
    out.rule.tau = cfg.tau;
    out.rule.theta = cfg.theta;

    auto ants = scan_similar(t_a, m_a.templ.values(), cfg.theta, cfg.mode);
    auto cons = scan_similar(t_b, m_b.templ.values(), cfg.scan_theta_b(), cfg.mode);
    out.graph = build_graph(std::move(ants), std::move(cons), cfg.tau, t_a.period());
    out.match = match_noncrossing(out.graph);
    if (out.graph.antecedents.empty()) return out;
    out.parts = score_rule(m_b.templ.values(), out.graph, out.match, t_b.values(), digits);
    out.score = out.parts.value();
    return out;
}

[[nodiscard]] inline ScoredRule score_pair(const Motif& m_a, const Motif& m_b, const TimeSeries& t_a,
                                           const TimeSeries& t_b, const MinerConfig& cfg) {
    return score_pair(m_a, m_b, t_a, t_b, cfg, shared_digitization(t_a.values(), t_b.values(), cfg.bits));
}

// The k roughest motifs of each configured length. Total variation grows with
// length, so lengths are ranked separately rather than against each other.
[[nodiscard]] inline std::vector<Motif> candidate_motifs(const TimeSeries& series, const MinerConfig& cfg) {
    std::vector<Motif> all;
    for (auto len : cfg.motif_lengths) {
        auto top = sort_top_k(find_motifs(series, len, cfg.k_motifs, cfg.mode), cfg.k_motifs);
        all.insert(all.end(), top.begin(), top.end());
    }
    return all;
}

// Descending score; ties by antecedent start, then consequent start and lengths.
inline void order_rules(std::vector<ScoredRule>& rules) {
    std::stable_sort(rules.begin(), rules.end(), [](const ScoredRule& a, const ScoredRule& b) {
        if (a.score != b.score) return a.score > b.score;
        const auto& ra = a.rule;
        const auto& rb = b.rule;
        if (ra.antecedent.start != rb.antecedent.start) return ra.antecedent.start < rb.antecedent.start;
        if (ra.consequent.start != rb.consequent.start) return ra.consequent.start < rb.consequent.start;
        if (ra.antecedent.length() != rb.antecedent.length())
            return ra.antecedent.length() < rb.antecedent.length();
        return ra.consequent.length() < rb.consequent.length();
    });
}

// Scores every (antecedent motif, consequent motif) pair and keeps the best
// k_rules. Pairs are independent; with cfg.jobs > 1 they are scored on worker
// threads into fixed slots, so the result does not depend on scheduling.
[[nodiscard]] inline std::vector<ScoredRule> rank_rules(const TimeSeries& t_a, const TimeSeries& t_b,
                                                        const std::vector<Motif>& m_a,
                                                        const std::vector<Motif>& m_b,
                                                        const MinerConfig& cfg) {
    if (cfg.k_rules == 0) return {};
    const auto digits = shared_digitization(t_a.values(), t_b.values(), cfg.bits);
    const std::size_t total = m_a.size() * m_b.size();
    std::vector<ScoredRule> scored(total);

    const auto work = [&](std::size_t idx) {
        scored[idx] = score_pair(m_a[idx / m_b.size()], m_b[idx % m_b.size()], t_a, t_b, cfg, digits);
    };
    const unsigned jobs = std::max(1u, std::min<unsigned>(cfg.jobs, static_cast<unsigned>(total)));
    if (jobs <= 1) {
        for (std::size_t i = 0; i < total; ++i) work(i);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::exception_ptr> errors(jobs);
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < jobs; ++w) {
            pool.emplace_back([&, w] {
                try {
                    for (std::size_t i = next++; i < total; i = next++) work(i);
                } catch (...) {
                    errors[w] = std::current_exception();
                }
            });
        }
        for (auto& t : pool) t.join();
        for (auto& e : errors)
            if (e) std::rethrow_exception(e);
    }

    order_rules(scored);
    if (scored.size() > cfg.k_rules) scored.resize(cfg.k_rules);
    return scored;
}

// Top-k rules for a series pair. Pass the same series twice for single-series
// mining.
[[nodiscard]] inline std::vector<ScoredRule> find_top_rules(const TimeSeries& t_a, const TimeSeries& t_b,
                                                            const MinerConfig& cfg) {
    cfg.validate();
    const auto longest = *std::max_element(cfg.motif_lengths.begin(), cfg.motif_lengths.end());
    for (const auto* s : {&t_a, &t_b}) {
        if (s->size() < 2 * longest)
            throw ArgumentError("series '" + s->name() + "' of length " + std::to_string(s->size()) +
                                " is shorter than twice the longest motif length " + std::to_string(longest));
    }
    if (cfg.k_rules == 0) return {};
    const auto m_a = candidate_motifs(t_a, cfg);
    const auto m_b = &t_a == &t_b ? m_a : candidate_motifs(t_b, cfg);
    return rank_rules(t_a, t_b, m_a, m_b, cfg);
}

} // namespace motifrules
