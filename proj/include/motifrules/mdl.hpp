#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <queue>
#include <span>
#include <vector>

#include "motifrules/error.hpp"
#include "motifrules/matching.hpp"

namespace motifrules {

// Quantized subsequence: values affinely mapped from [lo, hi] onto
// {0, ..., 2^bits - 1}.
struct DigitalSeq {
    std::vector<std::int32_t> symbols;
    int bits = 6;
    double lo = 0.0;
    double hi = 0.0;

    [[nodiscard]] std::size_t size() const noexcept { return symbols.size(); }
};

inline constexpr int kDefaultBits = 6;
inline constexpr int kMinBits = 2;
inline constexpr int kMaxBits = 16;

[[nodiscard]] inline DigitalSeq digitize(std::span<const double> values, int bits, double lo, double hi) {
    if (bits < kMinBits || bits > kMaxBits)
        throw ArgumentError("digitize: bits must lie in [" + std::to_string(kMinBits) + ", " +
                            std::to_string(kMaxBits) + "], got " + std::to_string(bits));
    if (!(lo <= hi)) throw ArgumentError("digitize: lo must not exceed hi");
    DigitalSeq out;
    out.bits = bits;
    out.lo = lo;
    out.hi = hi;
    out.symbols.resize(values.size(), 0);
    if (hi == lo) return out;
    const double top = static_cast<double>((1 << bits) - 1);
    const double scale = top / (hi - lo);
    for (std::size_t i = 0; i < values.size(); ++i) {
        double s = std::round((values[i] - lo) * scale);
        s = std::clamp(s, 0.0, top);
        out.symbols[i] = static_cast<std::int32_t>(s);
    }
    return out;
}

// Literal description length: every symbol costs `bits` bits.
[[nodiscard]] inline std::int64_t dl(const DigitalSeq& seq) {
    return static_cast<std::int64_t>(seq.size()) * seq.bits;
}

// Per-distinct-symbol codebook cost: residuals span [-(2^b - 1), 2^b - 1],
// which takes b + 1 bits, plus one bit of structure.
[[nodiscard]] inline std::int64_t codebook_bits(int bits) { return bits + 2; }

namespace mdl_detail {

// Huffman code lengths for the given symbol frequencies, built with a binary
// heap over explicit tree nodes. A single symbol gets length 0.
inline std::vector<int> huffman_lengths(const std::vector<std::int64_t>& freq) {
    const std::size_t n = freq.size();
    if (n <= 1) return std::vector<int>(n, 0);
    std::vector<std::size_t> parent(2 * n - 1, 0);
    using Node = std::pair<std::int64_t, std::size_t>;
    std::priority_queue<Node, std::vector<Node>, std::greater<>> heap;
    for (std::size_t i = 0; i < n; ++i) heap.emplace(freq[i], i);
    std::size_t next = n;
    while (heap.size() > 1) {
        const auto a = heap.top();
        heap.pop();
        const auto b = heap.top();
        heap.pop();
        parent[a.second] = next;
        parent[b.second] = next;
        heap.emplace(a.first + b.first, next);
        ++next;
    }
    const std::size_t root = next - 1;
    std::vector<int> depth(2 * n - 1, 0);
    for (std::size_t v = root; v-- > 0;) depth[v] = depth[parent[v]] + 1;
    return std::vector<int>(depth.begin(), depth.begin() + static_cast<std::ptrdiff_t>(n));
}

} // namespace mdl_detail

// Conditional description length of x given y: Huffman-code the residuals
// x - y, plus codebook_bits(b) per distinct residual value.
[[nodiscard]] inline std::int64_t dl_conditional(const DigitalSeq& x, const DigitalSeq& y) {
    if (x.size() != y.size())
        throw ArgumentError("dl_conditional: length mismatch (" + std::to_string(x.size()) + " vs " +
                            std::to_string(y.size()) + ")");
    if (x.bits != y.bits) throw ArgumentError("dl_conditional: cardinality mismatch");
    std::map<std::int32_t, std::int64_t> counts;
    for (std::size_t i = 0; i < x.size(); ++i) ++counts[x.symbols[i] - y.symbols[i]];
    std::vector<std::int64_t> freq;
    freq.reserve(counts.size());
    for (const auto& [sym, c] : counts) freq.push_back(c);
    const auto lengths = mdl_detail::huffman_lengths(freq);
    std::int64_t total = 0;
    for (std::size_t k = 0; k < freq.size(); ++k) total += freq[k] * lengths[k];
    return total + static_cast<std::int64_t>(freq.size()) * codebook_bits(x.bits);
}

// Bits saved by encoding an observed consequent relative to the rule's
// consequent instead of literally. Negative for dissimilar shapes.
[[nodiscard]] inline std::int64_t bit_saved(const DigitalSeq& instance, const DigitalSeq& rule_consequent) {
    return dl(instance) - dl_conditional(instance, rule_consequent);
}

// Shared quantization for one mining run.
struct DigitConfig {
    int bits = kDefaultBits;
    double lo = 0.0;
    double hi = 0.0;

    [[nodiscard]] DigitalSeq apply(std::span<const double> values) const {
        return digitize(values, bits, lo, hi);
    }
};

// Range spanning both training series, so bit counts compare across rules.
[[nodiscard]] inline DigitConfig shared_digitization(std::span<const double> a, std::span<const double> b,
                                                     int bits = kDefaultBits) {
    DigitConfig cfg;
    cfg.bits = bits;
    bool first = true;
    for (auto series : {a, b}) {
        for (double v : series) {
            if (first) {
                cfg.lo = cfg.hi = v;
                first = false;
            }
            cfg.lo = std::min(cfg.lo, v);
            cfg.hi = std::max(cfg.hi, v);
        }
    }
    return cfg;
}

// Score pieces kept as integers so the final ratio can be checked exactly:
// score = matched * (total_bit_saved - model_bits) / n_antecedents.
struct RuleScore {
    std::size_t matched = 0;        // s
    std::size_t n_antecedents = 0;  // |antecedent occurrences|
    std::int64_t total_bit_saved = 0;
    std::int64_t model_bits = 0;    // dl of the rule consequent

    [[nodiscard]] std::int64_t numerator() const noexcept {
        return static_cast<std::int64_t>(matched) * (total_bit_saved - model_bits);
    }
    [[nodiscard]] double value() const noexcept {
        if (n_antecedents == 0) return 0.0;
        return static_cast<double>(numerator()) / static_cast<double>(n_antecedents);
    }
};

// Ratio-weighted MDL score of a matched instance set. `instance_consequents`
// holds the digitized consequent of every selected instance.
[[nodiscard]] inline RuleScore score_instances(const std::vector<DigitalSeq>& instance_consequents,
                                               const DigitalSeq& rule_consequent,
                                               std::size_t n_antecedents) {
    if (n_antecedents == 0) throw ArgumentError("score_rule: no antecedent occurrences");
    if (instance_consequents.size() > n_antecedents)
        throw ArgumentError("score_rule: more matched instances than antecedent occurrences");
    RuleScore s;
    s.matched = instance_consequents.size();
    s.n_antecedents = n_antecedents;
    for (const auto& inst : instance_consequents) s.total_bit_saved += bit_saved(inst, rule_consequent);
    s.model_bits = dl(rule_consequent);
    return s;
}

// Scores a match over a graph whose consequent occurrences index into
// `consequent_series`; the rule consequent is `rule_consequent` (raw values).
[[nodiscard]] inline RuleScore score_rule(std::span<const double> rule_consequent, const MatchGraph& graph,
                                          const MatchResult& match, std::span<const double> consequent_series,
                                          const DigitConfig& digits) {
    std::vector<DigitalSeq> inst;
    inst.reserve(match.selected.size());
    for (auto k : match.selected) {
        const auto& occ = graph.consequents[graph.edges[k].con];
        if (occ.length != rule_consequent.size())
            throw ArgumentError("score_rule: consequent occurrence length differs from the rule consequent");
        inst.push_back(digits.apply(consequent_series.subspan(occ.start, occ.length)));
    }
    return score_instances(inst, digits.apply(rule_consequent), graph.antecedents.size());
}

} // namespace motifrules
