#pragma once

#include <algorithm>
#include <cstddef>
#include <functional>
#include <limits>
#include <vector>

#include "motifrules/error.hpp"
#include "motifrules/scan.hpp"

namespace motifrules {

// Candidate rule instance: antecedent occurrence `ant` followed by consequent
// occurrence `con` after a gap of `weight` seconds.
struct Edge {
    std::size_t ant = 0;
    std::size_t con = 0;
    double weight = 0.0;
};

// Weighted bipartite instance graph. Edges are stored in (ant, con) order,
// which also defines the edge index used for tie-breaking.
struct MatchGraph {
    std::vector<Occurrence> antecedents;
    std::vector<Occurrence> consequents;
    std::vector<Edge> edges;
    double tau = 0.0;
};

struct MatchResult {
    std::vector<std::size_t> selected; // ascending edge indices
    std::size_t cardinality = 0;
    double total_weight = 0.0;
};

// Anchors of the gap between an antecedent and a consequent occurrence: the
// antecedent's last sample and the consequent's first sample.
[[nodiscard]] inline double antecedent_anchor(const Occurrence& o, double period) {
    return o.time + static_cast<double>(o.length - 1) * period;
}

// Builds the feasible-instance graph: edge (i, j) iff 0 < gap < tau, where gap
// runs from the end of antecedent i to the start of consequent j. Occurrence
// times must already be set (scan_similar does this).
[[nodiscard]] inline MatchGraph build_graph(std::vector<Occurrence> ants, std::vector<Occurrence> cons,
                                            double tau, double antecedent_period) {
    if (!(tau > 0.0)) throw ArgumentError("build_graph: tau must be positive");
    MatchGraph g;
    g.tau = tau;
    g.antecedents = std::move(ants);
    g.consequents = std::move(cons);
    for (std::size_t i = 0; i < g.antecedents.size(); ++i) {
        const double t_a = antecedent_anchor(g.antecedents[i], antecedent_period);
        for (std::size_t j = 0; j < g.consequents.size(); ++j) {
            const double gap = g.consequents[j].time - t_a;
            if (gap > 0.0 && gap < tau) g.edges.push_back(Edge{i, j, gap});
        }
    }
    return g;
}

// Graph from an explicit edge list, for callers that already know the
// feasible pairs (tests, replaying audits). Edges are sorted into index order.
[[nodiscard]] inline MatchGraph graph_from_edges(std::size_t p, std::size_t q, std::vector<Edge> edges,
                                                 double tau = std::numeric_limits<double>::infinity()) {
    MatchGraph g;
    g.tau = tau;
    g.antecedents.resize(p);
    g.consequents.resize(q);
    for (const auto& e : edges) {
        if (e.ant >= p || e.con >= q) throw ArgumentError("graph_from_edges: endpoint out of range");
    }
    std::sort(edges.begin(), edges.end(), [](const Edge& a, const Edge& b) {
        return a.ant != b.ant ? a.ant < b.ant : a.con < b.con;
    });
    for (std::size_t k = 1; k < edges.size(); ++k) {
        if (edges[k].ant == edges[k - 1].ant && edges[k].con == edges[k - 1].con)
            throw ArgumentError("graph_from_edges: duplicate edge");
    }
    g.edges = std::move(edges);
    return g;
}

namespace matching_detail {

struct Value {
    std::size_t count = 0;
    double weight = 0.0;
};

// Lexicographic objective: more edges first, then less total weight.
inline bool better(const Value& a, const Value& b) {
    if (a.count != b.count) return a.count > b.count;
    return a.weight < b.weight;
}

inline bool same(const Value& a, const Value& b) { return a.count == b.count && a.weight == b.weight; }

} // namespace matching_detail

// Maximum-cardinality, then minimum-weight, non-crossing matching.
//
// Selected edges preserve order on both sides, so a solution is an
// order-preserving partial alignment of the two time-sorted occurrence lists.
// best[i][j] holds the optimum over antecedents i.. and consequents j..;
// reconstruction walks forward taking the smallest edge index that still
// attains the optimum, which yields the lexicographically smallest edge list
// among equal (count, weight) solutions.
[[nodiscard]] inline MatchResult match_noncrossing(const MatchGraph& graph) {
    using matching_detail::Value;
    const std::size_t p = graph.antecedents.size();
    const std::size_t q = graph.consequents.size();
    MatchResult result;
    if (graph.edges.empty()) return result;

    // Dense edge lookup: index into graph.edges or npos.
    constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();
    std::vector<std::size_t> edge_at(p * q, npos);
    for (std::size_t k = 0; k < graph.edges.size(); ++k) {
        const auto& e = graph.edges[k];
        edge_at[e.ant * q + e.con] = k;
    }

    const std::size_t stride = q + 1;
    std::vector<Value> best((p + 1) * (q + 1));
    const auto at = [&](std::size_t i, std::size_t j) -> Value& { return best[i * stride + j]; };

    for (std::size_t i = p; i-- > 0;) {
        for (std::size_t j = q; j-- > 0;) {
            Value v = at(i + 1, j);
            if (matching_detail::better(at(i, j + 1), v)) v = at(i, j + 1);
            if (const auto k = edge_at[i * q + j]; k != npos) {
                const Value& rest = at(i + 1, j + 1);
                const Value take{rest.count + 1, graph.edges[k].weight + rest.weight};
                if (matching_detail::better(take, v)) v = take;
            }
            at(i, j) = v;
        }
    }

    std::size_t i = 0;
    std::size_t j = 0;
    while (i < p && j < q && at(i, j).count > 0) {
        const Value target = at(i, j);
        for (std::size_t b = j; b < q; ++b) {
            const auto k = edge_at[i * q + b];
            if (k == npos) continue;
            const Value& rest = at(i + 1, b + 1);
            const Value take{rest.count + 1, graph.edges[k].weight + rest.weight};
            if (matching_detail::same(take, target)) {
                result.selected.push_back(k);
                j = b + 1;
                break;
            }
        }
        ++i;
    }

    result.cardinality = result.selected.size();
    for (auto k : result.selected) result.total_weight += graph.edges[k].weight;
    return result;
}

// Largest graph brute_force_match accepts on either side.
inline constexpr std::size_t kBruteForceMaxSide = 8;

// Exhaustive oracle: enumerates every edge subset that satisfies the degree and
// parallel constraints and keeps the lexicographic optimum (max count, min
// weight, then smallest sorted edge-index list). Infeasible branches are cut
// as soon as a newly added edge violates a constraint against an earlier one.
[[nodiscard]] inline MatchResult brute_force_match(const MatchGraph& graph) {
    if (graph.antecedents.size() > kBruteForceMaxSide || graph.consequents.size() > kBruteForceMaxSide)
        throw ArgumentError("brute_force_match: graph exceeds " + std::to_string(kBruteForceMaxSide) +
                            " vertices per side");
    const auto& edges = graph.edges;
    MatchResult best;
    bool have = false;
    std::vector<std::size_t> chosen;

    const auto conflicts = [&](const Edge& a, const Edge& b) {
        if (a.ant == b.ant || a.con == b.con) return true;
        // x_ij + x_kl <= 1 for i > k and l < j
        if (a.ant > b.ant && b.con > a.con) return true;
        if (b.ant > a.ant && a.con > b.con) return true;
        return false;
    };

    const std::function<void(std::size_t)> visit = [&](std::size_t next) {
        if (next == edges.size()) {
            double w = 0.0;
            for (auto k : chosen) w += edges[k].weight;
            const bool wins = !have || chosen.size() > best.cardinality ||
                              (chosen.size() == best.cardinality &&
                               (w < best.total_weight ||
                                (w == best.total_weight && chosen < best.selected)));
            if (wins) {
                best.selected = chosen;
                best.cardinality = chosen.size();
                best.total_weight = w;
                have = true;
            }
            return;
        }
        bool feasible = true;
        for (auto k : chosen) {
            if (conflicts(edges[k], edges[next])) {
                feasible = false;
                break;
            }
        }
        if (feasible) {
            chosen.push_back(next);
            visit(next + 1);
            chosen.pop_back();
        }
        visit(next + 1);
    };
    visit(0);
    return best;
}

} // namespace motifrules
