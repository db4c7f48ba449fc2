#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "motifrules/evaluation.hpp"
#include "motifrules/json_io.hpp"
#include "motifrules/synthetic.hpp"
#include "oracles.hpp"

using namespace motifrules;

namespace {

std::vector<double> shape(std::size_t len, double amp) {
    std::vector<double> v(len);
    for (std::size_t t = 0; t < len; ++t) v[t] = amp * std::sin(0.9 * t) + amp * 0.3 * (t % 4);
    return v;
}

Rule make_rule(std::vector<double> ant, std::vector<double> con, double tau, double theta) {
    return Rule{Pattern{"A", 0, std::move(ant)}, Pattern{"B", 0, std::move(con)}, tau, theta};
}

} // namespace

TEST(FireRule, SingleEmbeddedCopy) {
    const auto ant = shape(10, 5.0);
    auto x = oracle::uniform_vec(200, 1, -0.1, 0.1);
    std::copy(ant.begin(), ant.end(), x.begin() + 77);
    const auto fired = fire_rule(make_rule(ant, ant, 10, 1.0), TimeSeries(x, 0.0, 1.0));
    ASSERT_EQ(fired.size(), 1u);
    EXPECT_EQ(fired[0].index, 77u);
}

TEST(FireRule, ZeroThetaNeverFires) {
    const auto ant = shape(10, 5.0);
    std::vector<double> x(100, 0.0);
    std::copy(ant.begin(), ant.end(), x.begin() + 5);
    EXPECT_TRUE(fire_rule(make_rule(ant, ant, 10, 0.0), TimeSeries(x, 0.0, 1.0)).empty());
}

TEST(FireRule, TiledCopiesDoNotOverlap) {
    const auto ant = shape(8, 3.0);
    std::vector<double> x;
    for (int c = 0; c < 4; ++c) {
        x.insert(x.end(), ant.begin(), ant.end());
        x.insert(x.end(), 5, 0.0);
    }
    const auto fired = fire_rule(make_rule(ant, ant, 10, 1e6), TimeSeries(x, 0.0, 1.0));
    // With an unbounded threshold every window fires, so the advance rule
    // alone decides: firings at 0, 8, 16, ...
    for (std::size_t k = 1; k < fired.size(); ++k) EXPECT_GE(fired[k].index, fired[k - 1].index + 8);
    const auto strict = fire_rule(make_rule(ant, ant, 10, 0.5), TimeSeries(x, 0.0, 1.0));
    ASSERT_EQ(strict.size(), 4u);
    for (std::size_t k = 0; k < 4; ++k) EXPECT_EQ(strict[k].index, 13 * k);
}

TEST(BestMatch, PlantedCopyInWindow) {
    const auto con = shape(6, 4.0);
    auto y = oracle::uniform_vec(300, 2, -1.0, 1.0);
    std::copy(con.begin(), con.end(), y.begin() + 140);
    const auto m = best_match_position(make_rule({0.0}, con, 50, 1.0), TimeSeries(y, 0.0, 1.0), 120.0, 50.0);
    EXPECT_EQ(m.index, 140u);
    EXPECT_EQ(m.dist, 0.0);
}

TEST(BestMatch, FlatWindowPicksEarliest) {
    const std::vector<double> con{1, 2, 3};
    TimeSeries y(std::vector<double>(100, 0.0), 0.0, 1.0);
    const auto m = best_match_position(make_rule({0.0}, con, 20, 1.0), y, 30.0, 20.0);
    EXPECT_EQ(m.index, 31u);
}

TEST(BestMatch, RandomWindowEqualsExhaustiveScan) {
    std::mt19937_64 rng(4);
    for (int trial = 0; trial < 50; ++trial) {
        const auto y = oracle::random_walk(400, rng());
        const std::size_t len = 3 + rng() % 15;
        const auto con = oracle::uniform_vec(len, rng(), -3, 3);
        const double tau = 1.0 + static_cast<double>(rng() % 80);
        const double end = static_cast<double>(rng() % 350);
        TimeSeries ys(y, 0.0, 1.0);
        const auto range = prediction_window(ys, len, end, tau);
        if (!range) {
            EXPECT_THROW((void)best_match_position(make_rule({0.0}, con, tau, 1), ys, end, tau), EvaluationError);
            continue;
        }
        double best = std::numeric_limits<double>::infinity();
        std::size_t at = 0;
        for (std::size_t x = 0; x + len <= y.size(); ++x) {
            const double gap = static_cast<double>(x) - end;
            if (!(gap > 0 && gap < tau)) continue;
            double acc = 0;
            for (std::size_t t = 0; t < len; ++t) acc += (y[x + t] - con[t]) * (y[x + t] - con[t]);
            if (std::sqrt(acc) < best) best = std::sqrt(acc), at = x;
        }
        const auto m = best_match_position(make_rule({0.0}, con, tau, 1), ys, end, tau);
        EXPECT_EQ(m.index, at);
        EXPECT_NEAR(m.dist, best, 1e-9);
    }
}

TEST(PredictionWindow, TruncatesAndRejectsEmpty) {
    TimeSeries y(std::vector<double>(50, 0.0), 0.0, 1.0);
    const auto w = prediction_window(y, 5, 40.0, 100.0);
    ASSERT_TRUE(w);
    EXPECT_EQ(w->first, 41u);
    EXPECT_EQ(w->second, 45u);
    EXPECT_FALSE(prediction_window(y, 5, 45.0, 100.0));
    EXPECT_FALSE(prediction_window(y, 5, 10.0, 1.0));
    const auto tight = prediction_window(y, 5, 10.0, 1.5);
    ASSERT_TRUE(tight);
    EXPECT_EQ(tight->first, 11u);
    EXPECT_EQ(tight->second, 11u);
    // Time base in seconds.
    TimeSeries z(std::vector<double>(50, 0.0), 1000.0, 60.0);
    const auto t = prediction_window(z, 3, 1000.0 + 60.0 * 10, 300.0);
    ASSERT_TRUE(t);
    EXPECT_EQ(t->first, 11u);
    EXPECT_EQ(t->second, 14u);
}

TEST(QMetric, PerfectPredictionIsZero) {
    const auto ant = shape(10, 5.0);
    const auto con = shape(7, -4.0);
    auto a = oracle::random_walk(3000, 10, 0.2);
    auto b = oracle::random_walk(3000, 11, 0.2);
    for (std::size_t pos = 100; pos + 60 < a.size(); pos += 300) {
        std::copy(ant.begin(), ant.end(), a.begin() + pos);
        std::copy(con.begin(), con.end(), b.begin() + pos + 9 + 20);
    }
    const auto rule = make_rule(ant, con, 40, 0.5);
    const auto ev = evaluate_rule(rule, TimeSeries(a, 0.0, 1.0), TimeSeries(b, 0.0, 1.0), 200, 1);
    ASSERT_TRUE(ev.q) << ev.failure;
    EXPECT_EQ(*ev.q, 0.0);
    EXPECT_EQ(ev.firings.size(), 10u);
    for (const auto& f : ev.firings) {
        EXPECT_EQ(f.predicted_index, f.fire_index + 29);
        EXPECT_LT(f.fire_dist, rule.theta);
    }
}

TEST(QMetric, RandomRuleNearOne) {
    // Firings land on random places and the predicted window carries no
    // information: numerator and denominator have the same distribution.
    const auto a = oracle::random_walk(20000, 20, 1.0);
    const auto b = oracle::uniform_vec(20000, 21, -1.0, 1.0);
    const std::vector<double> ant(a.begin() + 500, a.begin() + 520);
    const auto rule = make_rule(ant, oracle::uniform_vec(15, 22, -1.0, 1.0), 1.5, 1e9);
    const double q = q_metric(rule, TimeSeries(a, 0.0, 1.0), TimeSeries(b, 0.0, 1.0), 300, 3);
    EXPECT_NEAR(q, 1.0, 0.05);
}

TEST(QMetric, ScaleInvariant) {
    const auto a = oracle::random_walk(2000, 30, 1.0);
    const auto b = oracle::random_walk(2000, 31, 1.0);
    const std::vector<double> ant(a.begin() + 100, a.begin() + 130);
    const std::vector<double> con(b.begin() + 400, b.begin() + 420);
    const auto rule = make_rule(ant, con, 200, 15.0);
    const double q1 = q_metric(rule, TimeSeries(a, 0.0, 1.0), TimeSeries(b, 0.0, 1.0), 100, 9);
    const double c = 3.5;
    auto scale = [c](std::vector<double> v) {
        for (auto& x : v) x *= c;
        return v;
    };
    const auto rule2 = make_rule(scale(ant), scale(con), 200, 15.0 * c);
    const double q2 = q_metric(rule2, TimeSeries(scale(a), 0.0, 1.0), TimeSeries(scale(b), 0.0, 1.0), 100, 9);
    EXPECT_NEAR(q1, q2, 1e-9 * std::max(1.0, q1));
    EXPECT_GE(q1, 0.0);
}

TEST(QMetric, DeterministicForSeed) {
    const auto a = oracle::random_walk(3000, 40, 1.0);
    const auto b = oracle::random_walk(3000, 41, 1.0);
    const std::vector<double> ant(a.begin() + 10, a.begin() + 40);
    const std::vector<double> con(b.begin() + 70, b.begin() + 90);
    const auto rule = make_rule(ant, con, 100, 20.0);
    TimeSeries ta(a, 0.0, 1.0), tb(b, 0.0, 1.0);
    EXPECT_EQ(q_metric(rule, ta, tb, 50, 5), q_metric(rule, ta, tb, 50, 5));
    EXPECT_NE(q_metric(rule, ta, tb, 50, 5), q_metric(rule, ta, tb, 50, 6));
}

TEST(QMetric, Failures) {
    const auto ant = shape(10, 5.0);
    TimeSeries flat(std::vector<double>(500, 0.0), 0.0, 1.0);
    const auto never = make_rule(ant, ant, 10, 0.1);
    EXPECT_THROW((void)q_metric(never, flat, flat, 10, 1), EvaluationError);
    EXPECT_FALSE(evaluate_rule(never, flat, flat, 10, 1).q);

    // Every window fires, and the consequent equals the constant test series.
    const auto always = make_rule(std::vector<double>(10, 0.0), std::vector<double>(5, 0.0), 10, 1.0);
    const auto ev = evaluate_rule(always, flat, flat, 10, 1);
    EXPECT_FALSE(ev.q);
    EXPECT_NE(ev.failure.find("zero denominator"), std::string::npos);
    EXPECT_FALSE(evaluate_rule(always, flat, TimeSeries({1.0, 2.0}, 0.0, 1.0), 10, 1).q);
}

TEST(Synthetic, NoiselessRecoveryOfFiveInstances) {
    SynthConfig c;
    c.length = 3000;
    c.instances = 5;
    c.noise_sd = 0.0;
    const auto d = gen_synthetic(c);
    ASSERT_EQ(d.instances.size(), 5u);
    const auto ants = scan_similar(d.a, d.planted.antecedent.values, 1e-6);
    const auto cons = scan_similar(d.b, d.planted.consequent.values, 1e-6);
    ASSERT_EQ(ants.size(), 5u);
    ASSERT_EQ(cons.size(), 5u);
    for (std::size_t k = 0; k < 5; ++k) {
        EXPECT_EQ(ants[k].start, d.instances[k].a_start);
        EXPECT_EQ(cons[k].start, d.instances[k].b_start);
        EXPECT_GE(d.instances[k].gap, c.gap_lo);
        EXPECT_LE(d.instances[k].gap, c.gap_hi);
        EXPECT_EQ(d.instances[k].b_start, d.instances[k].a_start + c.antecedent_length - 1 + d.instances[k].gap);
    }
}

TEST(Synthetic, GapsAboveTauGiveNoInstances) {
    SynthConfig c;
    c.length = 4000;
    c.instances = 8;
    c.gap_lo = 150;
    c.gap_hi = 180;
    const auto d = gen_synthetic(c);
    MinerConfig cfg;
    cfg.tau = 100;
    cfg.theta = d.planted.theta;
    Motif ma, mb;
    ma.templ = Subsequence(d.a, d.instances[0].a_start, c.antecedent_length);
    mb.templ = Subsequence(d.b, d.instances[0].b_start, c.consequent_length);
    const auto r = score_pair(ma, mb, d.a, d.b, cfg);
    EXPECT_EQ(r.match.cardinality, 0u);
    EXPECT_EQ(r.score, 0.0);
}

TEST(Synthetic, SeedDeterminism) {
    SynthConfig c;
    c.seed = 99;
    const auto d1 = gen_synthetic(c);
    const auto d2 = gen_synthetic(c);
    EXPECT_TRUE(std::equal(d1.a.values().begin(), d1.a.values().end(), d2.a.values().begin()));
    EXPECT_TRUE(std::equal(d1.b.values().begin(), d1.b.values().end(), d2.b.values().begin()));
    c.seed = 100;
    const auto d3 = gen_synthetic(c);
    EXPECT_FALSE(std::equal(d1.a.values().begin(), d1.a.values().end(), d3.a.values().begin()));
}

TEST(Synthetic, InfeasiblePlacement) {
    SynthConfig c;
    c.length = 1000;
    c.instances = 20;
    EXPECT_THROW((void)gen_synthetic(c), ArgumentError);
    c = SynthConfig{};
    c.gap_lo = 50;
    c.gap_hi = 10;
    EXPECT_THROW((void)gen_synthetic(c), ArgumentError);
}

TEST(Json, RuleRoundTrip) {
    SynthConfig c;
    c.length = 3000;
    c.instances = 5;
    const auto d = gen_synthetic(c);
    MinerConfig cfg;
    cfg.tau = 101;
    cfg.theta = d.planted.theta;
    Motif ma, mb;
    ma.templ = Subsequence(d.a, d.instances[0].a_start, c.antecedent_length);
    mb.templ = Subsequence(d.b, d.instances[0].b_start, c.consequent_length);
    const auto r = score_pair(ma, mb, d.a, d.b, cfg);
    const auto j = rule_to_json(r);
    EXPECT_EQ(j.at("s").get<std::size_t>(), r.match.cardinality);
    EXPECT_EQ(j.at("matched_instances").size(), r.match.cardinality);
    const auto back = rule_from_json(nlohmann::json::parse(j.dump()));
    EXPECT_EQ(back.antecedent.values, r.rule.antecedent.values);
    EXPECT_EQ(back.consequent.values, r.rule.consequent.values);
    EXPECT_EQ(back.antecedent.series, "A");
    EXPECT_EQ(back.consequent.series, "B");
    EXPECT_EQ(back.tau, 101.0);
    EXPECT_EQ(back.theta, d.planted.theta);

    auto bad = j;
    bad["tau"] = 0;
    EXPECT_THROW((void)rule_from_json(bad), InputError);
    bad = j;
    bad["antecedent"]["length"] = 3;
    EXPECT_THROW((void)rule_from_json(bad), InputError);
}

TEST(Json, ConfigRoundTrip) {
    MinerConfig cfg;
    cfg.motif_lengths = {12, 34};
    cfg.consequent_theta = 2.5;
    cfg.mode = DistanceMode::znorm;
    const auto back = config_from_json(config_to_json(cfg));
    EXPECT_EQ(back.motif_lengths, cfg.motif_lengths);
    EXPECT_EQ(back.consequent_theta, cfg.consequent_theta);
    EXPECT_EQ(back.mode, DistanceMode::znorm);
    EXPECT_THROW((void)distance_mode_from("cosine"), InputError);
}
