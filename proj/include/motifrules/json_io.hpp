#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "motifrules/error.hpp"
#include "motifrules/evaluation.hpp"
#include "motifrules/miner.hpp"
#include "motifrules/synthetic.hpp"

// JSON schemas for rule files, evaluation reports, and synthetic ground truth.

namespace motifrules {

inline std::string to_string(DistanceMode mode) { return mode == DistanceMode::raw ? "raw" : "znorm"; }

inline DistanceMode distance_mode_from(const std::string& s) {
    if (s == "raw") return DistanceMode::raw;
    if (s == "znorm") return DistanceMode::znorm;
    throw InputError("unknown distance mode '" + s + "'");
}

inline void to_json(nlohmann::json& j, const Pattern& p) {
    j = nlohmann::json{{"series", p.series}, {"start", p.start}, {"length", p.length()}, {"values", p.values}};
}

inline void from_json(const nlohmann::json& j, Pattern& p) {
    p.series = j.at("series").get<std::string>();
    p.start = j.at("start").get<std::size_t>();
    p.values = j.at("values").get<std::vector<double>>();
    if (j.contains("length") && j.at("length").get<std::size_t>() != p.values.size())
        throw InputError("pattern length does not match its values");
    if (p.values.empty()) throw InputError("pattern has no values");
}

inline nlohmann::json config_to_json(const MinerConfig& cfg) {
    nlohmann::json j{{"motif_lengths", cfg.motif_lengths},
                     {"k_motifs", cfg.k_motifs},
                     {"k_rules", cfg.k_rules},
                     {"tau", cfg.tau},
                     {"theta", cfg.theta},
                     {"bits", cfg.bits},
                     {"distance", to_string(cfg.mode)}};
    j["consequent_theta"] = cfg.consequent_theta ? nlohmann::json(*cfg.consequent_theta) : nlohmann::json();
    return j;
}

inline MinerConfig config_from_json(const nlohmann::json& j) {
    MinerConfig cfg;
    cfg.motif_lengths = j.at("motif_lengths").get<std::vector<std::size_t>>();
    cfg.k_motifs = j.at("k_motifs").get<std::size_t>();
    cfg.k_rules = j.at("k_rules").get<std::size_t>();
    cfg.tau = j.at("tau").get<double>();
    cfg.theta = j.at("theta").get<double>();
    cfg.bits = j.at("bits").get<int>();
    cfg.mode = distance_mode_from(j.value("distance", std::string("raw")));
    if (j.contains("consequent_theta") && !j.at("consequent_theta").is_null())
        cfg.consequent_theta = j.at("consequent_theta").get<double>();
    return cfg;
}

inline nlohmann::json rule_to_json(const ScoredRule& r) {
    nlohmann::json inst = nlohmann::json::array();
    for (const auto& i : r.instances())
        inst.push_back({{"a_start", i.a_start}, {"b_start", i.b_start}, {"gap", i.gap}});
    return nlohmann::json{{"antecedent", r.rule.antecedent},
                          {"consequent", r.rule.consequent},
                          {"tau", r.rule.tau},
                          {"theta", r.rule.theta},
                          {"score", r.score},
                          {"s", r.match.cardinality},
                          {"n_antecedents", r.n_antecedents()},
                          {"n_consequents", r.graph.consequents.size()},
                          {"total_gap", r.match.total_weight},
                          {"total_bit_saved", r.parts.total_bit_saved},
                          {"model_bits", r.parts.model_bits},
                          {"matched_instances", inst}};
}

inline Rule rule_from_json(const nlohmann::json& j) {
    Rule r;
    r.antecedent = j.at("antecedent").get<Pattern>();
    r.consequent = j.at("consequent").get<Pattern>();
    r.tau = j.at("tau").get<double>();
    r.theta = j.at("theta").get<double>();
    if (!(r.tau > 0.0) || !(r.theta > 0.0)) throw InputError("rule tau and theta must be positive");
    return r;
}

inline nlohmann::json evaluation_to_json(const Evaluation& ev) {
    nlohmann::json fires = nlohmann::json::array();
    for (const auto& f : ev.firings)
        fires.push_back({{"fire_index", f.fire_index},
                         {"fire_dist", f.fire_dist},
                         {"predicted_index", f.predicted_index},
                         {"dist", f.predicted_dist}});
    nlohmann::json j{{"N_firings", ev.firings.size()}, {"firings", fires}};
    j["Q"] = ev.q ? nlohmann::json(*ev.q) : nlohmann::json();
    if (!ev.q) j["error"] = ev.failure;
    return j;
}

inline nlohmann::json truth_to_json(const SynthConfig& cfg, const SynthData& data) {
    nlohmann::json inst = nlohmann::json::array();
    for (const auto& i : data.instances)
        inst.push_back({{"a_start", i.a_start}, {"b_start", i.b_start}, {"gap", i.gap}});
    return nlohmann::json{{"config",
                           {{"length", cfg.length},
                            {"instances", cfg.instances},
                            {"gap_lo", cfg.gap_lo},
                            {"gap_hi", cfg.gap_hi},
                            {"noise", cfg.noise_sd},
                            {"seed", cfg.seed},
                            {"antecedent_length", cfg.antecedent_length},
                            {"consequent_length", cfg.consequent_length},
                            {"amplitude", cfg.amplitude},
                            {"walk_step", cfg.walk_step}}},
                          {"antecedent_shape", data.planted.antecedent.values},
                          {"consequent_shape", data.planted.consequent.values},
                          {"suggested_tau", data.planted.tau},
                          {"suggested_theta", data.planted.theta},
                          {"instances", inst}};
}

} // namespace motifrules
