#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "motifrules/error.hpp"
#include "motifrules/miner.hpp"
#include "motifrules/series.hpp"

namespace motifrules {

struct SynthConfig {
    std::size_t length = 10000;
    std::size_t instances = 20;
    std::size_t gap_lo = 10;  // samples from antecedent end to consequent start
    std::size_t gap_hi = 100;
    double noise_sd = 0.5;
    std::uint64_t seed = 1;
    std::size_t antecedent_length = 40;
    std::size_t consequent_length = 30;
    double amplitude = 10.0;
    double walk_step = 1.0;
    bool same_series = false; // plant both shapes into series A
};

struct PlantedInstance {
    std::size_t a_start = 0;
    std::size_t b_start = 0;
    std::size_t gap = 0;
};

struct SynthData {
    TimeSeries a;
    TimeSeries b;
    Rule planted;
    std::vector<PlantedInstance> instances;
};

// Antecedent: two superposed sines. Consequent: a three-cycle square wave
// with a ramp. Both are far rougher than the random-walk background.
[[nodiscard]] inline std::vector<double> synth_antecedent_shape(std::size_t len, double amplitude) {
    std::vector<double> v(len);
    for (std::size_t t = 0; t < len; ++t) {
        const double u = static_cast<double>(t) / static_cast<double>(len);
        v[t] = amplitude * (std::sin(2.0 * std::numbers::pi * 2.0 * u) +
                            0.5 * std::sin(2.0 * std::numbers::pi * 5.0 * u));
    }
    return v;
}

[[nodiscard]] inline std::vector<double> synth_consequent_shape(std::size_t len, double amplitude) {
    std::vector<double> v(len);
    for (std::size_t t = 0; t < len; ++t) {
        const double u = static_cast<double>(t) / static_cast<double>(len);
        const bool high = static_cast<int>(std::floor(u * 6.0)) % 2 == 0;
        v[t] = amplitude * ((high ? 1.0 : -1.0) + 0.5 * u);
    }
    return v;
}

// Random-walk background in both series with one antecedent/consequent
// episode per equal-width slot. Planted windows are overwritten by the shape,
// then Gaussian noise is added everywhere. Gap g means the consequent starts
// g samples after the antecedent's last sample.
[[nodiscard]] inline SynthData gen_synthetic(const SynthConfig& cfg) {
    if (cfg.instances == 0) throw ArgumentError("gen_synthetic: instances must be positive");
    if (cfg.antecedent_length < 2 || cfg.consequent_length < 2)
        throw ArgumentError("gen_synthetic: shape lengths must be at least 2");
    if (cfg.gap_lo == 0 || cfg.gap_lo > cfg.gap_hi)
        throw ArgumentError("gen_synthetic: gap range must satisfy 1 <= lo <= hi");
    if (cfg.noise_sd < 0.0) throw ArgumentError("gen_synthetic: noise must be non-negative");

    const std::size_t la = cfg.antecedent_length;
    const std::size_t lb = cfg.consequent_length;
    const std::size_t span = la - 1 + cfg.gap_hi + lb; // antecedent start to consequent end
    const std::size_t slot = cfg.length / cfg.instances;
    if (slot < span + 1)
        throw ArgumentError("gen_synthetic: infeasible placement: " + std::to_string(cfg.instances) +
                            " episodes of up to " + std::to_string(span) + " samples do not fit in " +
                            std::to_string(cfg.length));

    std::mt19937_64 rng(cfg.seed);
    std::normal_distribution<double> step(0.0, cfg.walk_step);
    const auto walk = [&] {
        std::vector<double> v(cfg.length);
        double level = 0.0;
        for (auto& x : v) {
            level += step(rng);
            x = level;
        }
        return v;
    };
    auto a = walk();
    auto b = cfg.same_series ? std::vector<double>{} : walk();
    auto& b_target = cfg.same_series ? a : b;

    const auto ant = synth_antecedent_shape(la, cfg.amplitude);
    const auto con = synth_consequent_shape(lb, cfg.amplitude);

    SynthData out;
    std::uniform_int_distribution<std::size_t> gap_pick(cfg.gap_lo, cfg.gap_hi);
    for (std::size_t k = 0; k < cfg.instances; ++k) {
        const std::size_t gap = gap_pick(rng);
        const std::size_t used = la - 1 + gap + lb;
        std::uniform_int_distribution<std::size_t> offset_pick(0, slot - 1 - used);
        const std::size_t a_start = k * slot + offset_pick(rng);
        const std::size_t b_start = a_start + la - 1 + gap;
        std::copy(ant.begin(), ant.end(), a.begin() + static_cast<std::ptrdiff_t>(a_start));
        std::copy(con.begin(), con.end(), b_target.begin() + static_cast<std::ptrdiff_t>(b_start));
        out.instances.push_back({a_start, b_start, gap});
    }

    if (cfg.noise_sd > 0.0) {
        std::normal_distribution<double> noise(0.0, cfg.noise_sd);
        for (auto& x : a) x += noise(rng);
        for (auto& x : b) x += noise(rng);
    }

    out.a = TimeSeries(std::move(a), 0.0, 1.0, "A");
    out.b = cfg.same_series ? out.a : TimeSeries(std::move(b), 0.0, 1.0, "B");
    out.planted.antecedent = Pattern{"A", out.instances.front().a_start, ant};
    out.planted.consequent = Pattern{cfg.same_series ? "A" : "B", out.instances.front().b_start, con};
    out.planted.tau = static_cast<double>(cfg.gap_hi + 1);
    // Three times the typical distance between two noisy copies of the longer shape.
    out.planted.theta = 3.0 * cfg.noise_sd * std::sqrt(2.0 * static_cast<double>(std::max(la, lb))) + 1e-6;
    return out;
}

} // namespace motifrules
