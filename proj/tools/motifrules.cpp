// motifrules: mine predictive shape rules from time series, evaluate them on
// held-out data, and generate synthetic data with planted rules.
//
//   motifrules mine  --series-a a.csv [--series-b b.csv] --out DIR
//   motifrules mine  --pairs-dir DIR --out DIR
//   motifrules eval  --rules DIR/rules.json --test-a a.csv [--test-b b.csv] --out DIR
//   motifrules synth --out-dir DIR
//
// Exit codes: 0 success, 1 bad input or I/O failure, 2 mining found no rules.

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <limits>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>
#include <openssl/evp.h>

#include "motifrules.hpp"
#include "motifrules/json_io.hpp"

#ifndef MOTIFRULES_VERSION
#define MOTIFRULES_VERSION "unknown"
#endif

namespace fs = std::filesystem;
using nlohmann::json;
using namespace motifrules;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitNoRules = 2;
constexpr const char* kManifestName = "manifest.json";

// Failure attributed to one command-line flag.
class FlagError : public std::runtime_error {
public:
    FlagError(const std::string& flag, const std::string& what) : std::runtime_error(flag + ": " + what) {}
};

class Stopwatch {
public:
    double lap_ms() {
        const auto now = std::chrono::steady_clock::now();
        const double ms = std::chrono::duration<double, std::milli>(now - last_).count();
        last_ = now;
        return ms;
    }

private:
    std::chrono::steady_clock::time_point last_ = std::chrono::steady_clock::now();
};

std::string sha256_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot read " + path.string());
    const std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), md.data(), &len, EVP_sha256(), nullptr) != 1)
        throw Error("sha256 failed for " + path.string());
    std::string hex;
    char buf[3];
    for (unsigned int i = 0; i < len; ++i) {
        std::snprintf(buf, sizeof buf, "%02x", md[i]);
        hex += buf;
    }
    return hex;
}

// Column given as text: all digits selects by index, anything else by header name.
ColumnRef parse_column(const std::string& s) {
    if (!s.empty() && std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isdigit(c); }))
        return static_cast<std::size_t>(std::stoul(s));
    return s;
}

// Index of the last column in the file's first non-empty line.
std::size_t last_column(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot read " + path.string());
    std::string line;
    while (std::getline(in, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        return static_cast<std::size_t>(std::count(line.begin(), line.end(), ','));
    }
    throw InputError(path.string() + ": no data rows");
}

struct SeriesOptions {
    std::string column;      // empty: last column
    std::string time_column; // empty: no timestamps
};

struct LoadedSeries {
    fs::path path;
    TimeSeries series;
    std::string digest;
};

LoadedSeries load_series(const std::string& flag, const fs::path& path, const SeriesOptions& opt) {
    try {
        const ColumnRef col = opt.column.empty() ? ColumnRef{last_column(path)} : parse_column(opt.column);
        std::optional<ColumnRef> ts;
        if (!opt.time_column.empty()) ts = parse_column(opt.time_column);
        return LoadedSeries{path, load_csv(path, col, ts), sha256_file(path)};
    } catch (const Error& e) {
        throw FlagError(flag, e.what());
    }
}

json input_entry(const std::string& role, const LoadedSeries& s) {
    return json{{"role", role},
                {"path", s.path.string()},
                {"sha256", s.digest},
                {"series", s.series.name()},
                {"samples", s.series.size()},
                {"period", s.series.period()},
                {"start_time", s.series.start_time()}};
}

json base_manifest(const std::string& command, const std::vector<std::string>& argv) {
    return json{{"tool", "motifrules"}, {"version", MOTIFRULES_VERSION}, {"command", command}, {"argv", argv}};
}

void write_text(const fs::path& path, const std::string& body) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError("cannot write " + path.string());
    out << body;
    if (!out) throw InputError("write failed for " + path.string());
}

void write_json(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

void ensure_dir(const std::string& flag, const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) throw FlagError(flag, "cannot create directory " + dir.string());
}

// File-name-safe form of a series name.
std::string safe_name(const std::string& name) {
    std::string out;
    for (unsigned char c : name) out += (std::isalnum(c) || c == '-' || c == '_' || c == '.') ? static_cast<char>(c) : '_';
    if (out.empty() || out == "." || out == "..") out = "series";
    return out;
}

std::string format_real(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// ---------------------------------------------------------------------------
// mine

struct MineArgs {
    std::string series_a, series_b, pairs_dir, out;
    SeriesOptions io;
    MinerConfig cfg;
    std::optional<double> consequent_theta;
    bool normalize = false;
};

void check_lengths(const MinerConfig& cfg, const TimeSeries& s) {
    const auto longest = *std::max_element(cfg.motif_lengths.begin(), cfg.motif_lengths.end());
    if (s.size() < 2 * longest)
        throw FlagError("--motif-lengths", "longest motif length " + std::to_string(longest) + " needs at least " +
                                               std::to_string(2 * longest) + " samples, but series '" + s.name() +
                                               "' has " + std::to_string(s.size()));
}

json rules_document(const LoadedSeries& a, const LoadedSeries& b, const MinerConfig& cfg,
                    const std::vector<ScoredRule>& rules) {
    json list = json::array();
    for (std::size_t k = 0; k < rules.size(); ++k) {
        auto r = rule_to_json(rules[k]);
        r["rank"] = k + 1;
        list.push_back(std::move(r));
    }
    return json{{"manifest", kManifestName},
                {"series_a", a.series.name()},
                {"series_b", b.series.name()},
                {"config", config_to_json(cfg)},
                {"rules", list}};
}

int run_mine(const MineArgs& args, const std::vector<std::string>& argv) {
    Stopwatch clock;
    json timings;
    MinerConfig cfg = args.cfg;
    cfg.consequent_theta = args.consequent_theta;
    cfg.mode = args.normalize ? DistanceMode::znorm : DistanceMode::raw;
    try {
        cfg.validate();
    } catch (const Error& e) {
        throw FlagError("--motif-lengths/--tau/--theta/--bits", e.what());
    }

    std::vector<LoadedSeries> series;
    if (!args.pairs_dir.empty()) {
        if (!args.series_a.empty() || !args.series_b.empty())
            throw FlagError("--pairs-dir", "cannot be combined with --series-a/--series-b");
        const fs::path dir(args.pairs_dir);
        if (!fs::is_directory(dir)) throw FlagError("--pairs-dir", "not a directory: " + dir.string());
        std::vector<fs::path> files;
        for (const auto& entry : fs::directory_iterator(dir))
            if (entry.is_regular_file() && entry.path().extension() == ".csv") files.push_back(entry.path());
        std::sort(files.begin(), files.end());
        if (files.size() < 2) throw FlagError("--pairs-dir", "needs at least two .csv files in " + dir.string());
        std::map<std::string, fs::path> seen;
        for (const auto& f : files) {
            series.push_back(load_series("--pairs-dir", f, args.io));
            const auto& name = series.back().series.name();
            if (auto it = seen.find(name); it != seen.end())
                throw FlagError("--pairs-dir", "series name '" + name + "' appears in both " + it->second.string() +
                                                   " and " + f.string());
            seen.emplace(name, f);
        }
    } else {
        if (args.series_a.empty()) throw FlagError("--series-a", "required (or use --pairs-dir)");
        series.push_back(load_series("--series-a", args.series_a, args.io));
        if (!args.series_b.empty()) series.push_back(load_series("--series-b", args.series_b, args.io));
    }
    for (const auto& s : series) check_lengths(cfg, s.series);
    timings["load_ms"] = clock.lap_ms();

    const fs::path out(args.out);
    ensure_dir("--out", out);

    std::vector<std::vector<Motif>> motifs(series.size());
    for (std::size_t k = 0; k < series.size(); ++k) motifs[k] = candidate_motifs(series[k].series, cfg);
    timings["motifs_ms"] = clock.lap_ms();

    std::size_t total_rules = 0;
    json outputs = json::array();
    if (args.pairs_dir.empty()) {
        const auto& a = series.front();
        const auto& b = series.size() > 1 ? series[1] : series.front();
        const auto& mb = series.size() > 1 ? motifs[1] : motifs[0];
        const auto rules = cfg.k_rules == 0 ? std::vector<ScoredRule>{}
                                            : rank_rules(a.series, b.series, motifs[0], mb, cfg);
        total_rules = rules.size();
        timings["score_ms"] = clock.lap_ms();
        write_json(out / "rules.json", rules_document(a, b, cfg, rules));
        outputs.push_back("rules.json");
    } else {
        for (std::size_t i = 0; i < series.size(); ++i)
            for (std::size_t j = 0; j < series.size(); ++j) {
                if (i == j) continue;
                const auto rules = cfg.k_rules == 0
                                       ? std::vector<ScoredRule>{}
                                       : rank_rules(series[i].series, series[j].series, motifs[i], motifs[j], cfg);
                total_rules += rules.size();
                const std::string name = "rules_" + safe_name(series[i].series.name()) + "__" +
                                         safe_name(series[j].series.name()) + ".json";
                write_json(out / name, rules_document(series[i], series[j], cfg, rules));
                outputs.push_back(name);
            }
        timings["score_ms"] = clock.lap_ms();
    }

    json inputs = json::array();
    for (std::size_t k = 0; k < series.size(); ++k)
        inputs.push_back(input_entry(args.pairs_dir.empty() ? (k == 0 ? "series_a" : "series_b") : "pairs_dir", series[k]));
    auto manifest = base_manifest("mine", argv);
    manifest["config"] = config_to_json(cfg);
    manifest["column"] = args.io.column;
    manifest["time_column"] = args.io.time_column;
    manifest["inputs"] = inputs;
    manifest["seed"] = nullptr; // mining is deterministic
    manifest["outputs"] = outputs;
    manifest["rules_found"] = total_rules;
    timings["write_ms"] = clock.lap_ms();
    manifest["timings"] = timings;
    write_json(out / kManifestName, manifest);

    std::cout << "mined " << total_rules << " rule(s) into " << out.string() << "\n";
    return total_rules > 0 ? kExitOk : kExitNoRules;
}

// ---------------------------------------------------------------------------
// eval

struct EvalArgs {
    std::string rules, test_a, test_b, out;
    SeriesOptions io;
    std::size_t repetitions = 1000;
    std::uint64_t seed = 1;
    bool plot = false;
};

constexpr std::size_t kReportTop = 5;

json pattern_ref(const Pattern& p) { return json{{"series", p.series}, {"start", p.start}, {"length", p.length()}}; }

int run_eval(const EvalArgs& args, const std::vector<std::string>& argv) {
    Stopwatch clock;
    json timings;
    if (args.repetitions == 0) throw FlagError("--repetitions", "must be positive");

    json doc;
    try {
        std::ifstream in(args.rules);
        if (!in) throw InputError("cannot read " + args.rules);
        doc = json::parse(in);
    } catch (const json::exception& e) {
        throw FlagError("--rules", std::string("invalid JSON: ") + e.what());
    } catch (const Error& e) {
        throw FlagError("--rules", e.what());
    }

    std::vector<Rule> rules;
    DistanceMode mode = DistanceMode::raw;
    try {
        if (doc.contains("config")) mode = distance_mode_from(doc.at("config").value("distance", std::string("raw")));
        for (const auto& r : doc.at("rules")) rules.push_back(rule_from_json(r));
    } catch (const json::exception& e) {
        throw FlagError("--rules", std::string("malformed rule file: ") + e.what());
    } catch (const Error& e) {
        throw FlagError("--rules", e.what());
    }

    std::vector<LoadedSeries> tests;
    tests.push_back(load_series("--test-a", args.test_a, args.io));
    if (!args.test_b.empty()) tests.push_back(load_series("--test-b", args.test_b, args.io));
    std::map<std::string, const TimeSeries*> by_name;
    for (const auto& t : tests) by_name.emplace(t.series.name(), &t.series);
    const auto lookup = [&](const std::string& name, std::size_t rank) -> const TimeSeries& {
        const auto it = by_name.find(name);
        if (it == by_name.end()) {
            std::string have;
            for (const auto& [n, s] : by_name) have += (have.empty() ? "" : ", ") + n;
            throw FlagError(args.test_b.empty() ? "--test-a" : "--test-a/--test-b",
                            "rule " + std::to_string(rank) + " references series '" + name +
                                "', which is not among the test inputs (have: " + have + ")");
        }
        return *it->second;
    };
    // Resolve every rule before evaluating any, so a bad input fails fast.
    std::vector<std::pair<const TimeSeries*, const TimeSeries*>> targets;
    for (std::size_t k = 0; k < rules.size(); ++k)
        targets.emplace_back(&lookup(rules[k].antecedent.series, k + 1), &lookup(rules[k].consequent.series, k + 1));
    timings["load_ms"] = clock.lap_ms();

    const fs::path out(args.out);
    ensure_dir("--out", out);

    json per_rule = json::array();
    std::vector<double> top_q;
    json plots = json::array();
    for (std::size_t k = 0; k < rules.size(); ++k) {
        const auto& rule = rules[k];
        const auto& [ta, tb] = targets[k];
        const auto ev = evaluate_rule(rule, *ta, *tb, args.repetitions, args.seed, mode);
        auto entry = evaluation_to_json(ev);
        entry["rank"] = k + 1;
        entry["antecedent"] = pattern_ref(rule.antecedent);
        entry["consequent"] = pattern_ref(rule.consequent);
        entry["tau"] = rule.tau;
        entry["theta"] = rule.theta;
        per_rule.push_back(std::move(entry));
        if (k < kReportTop && ev.q) top_q.push_back(*ev.q);

        if (args.plot) {
            std::vector<std::optional<double>> overlay(tb->size());
            for (const auto& f : ev.firings)
                for (std::size_t t = 0; t < rule.consequent.length(); ++t)
                    overlay[f.predicted_index + t] = rule.consequent.values[t];
            std::ostringstream csv;
            csv << "index,actual,predicted_overlay\n";
            for (std::size_t i = 0; i < tb->size(); ++i) {
                csv << i << ',' << format_real((*tb)[i]) << ',';
                if (overlay[i]) csv << format_real(*overlay[i]);
                csv << '\n';
            }
            const std::string name = "plot_rule_" + std::to_string(k + 1) + ".csv";
            write_text(out / name, csv.str());
            plots.push_back(name);
        }
    }
    timings["evaluate_ms"] = clock.lap_ms();

    json mean = nullptr;
    if (!top_q.empty()) {
        double sum = 0.0;
        for (double q : top_q) sum += q;
        mean = sum / static_cast<double>(top_q.size());
    }
    json report{{"manifest", kManifestName},
                {"rules_file", fs::path(args.rules).filename().string()},
                {"repetitions", args.repetitions},
                {"seed", args.seed},
                {"distance", to_string(mode)},
                {"rules", per_rule},
                {"top5_mean_Q", mean},
                {"top5_evaluated", top_q.size()}};
    write_json(out / "report.json", report);

    json inputs = json::array();
    json rules_input{{"role", "rules"}, {"path", args.rules}, {"sha256", sha256_file(args.rules)}};
    inputs.push_back(rules_input);
    for (std::size_t k = 0; k < tests.size(); ++k) inputs.push_back(input_entry(k == 0 ? "test_a" : "test_b", tests[k]));
    auto manifest = base_manifest("eval", argv);
    manifest["inputs"] = inputs;
    manifest["column"] = args.io.column;
    manifest["time_column"] = args.io.time_column;
    manifest["seed"] = args.seed;
    manifest["repetitions"] = args.repetitions;
    json outputs = json::array({"report.json"});
    for (const auto& p : plots) outputs.push_back(p);
    manifest["outputs"] = outputs;
    timings["write_ms"] = clock.lap_ms();
    manifest["timings"] = timings;
    write_json(out / kManifestName, manifest);

    std::cout << "evaluated " << rules.size() << " rule(s); top-5 mean Q = "
              << (mean.is_null() ? std::string("n/a") : format_real(mean.get<double>())) << "\n";
    return kExitOk;
}

// ---------------------------------------------------------------------------
// synth

int run_synth(const SynthConfig& cfg, const std::string& out_dir, const std::vector<std::string>& argv) {
    Stopwatch clock;
    SynthData data;
    try {
        data = gen_synthetic(cfg);
    } catch (const Error& e) {
        throw FlagError("--length/--instances/--gap-lo/--gap-hi", e.what());
    }
    const double generate_ms = clock.lap_ms();

    const fs::path out(out_dir);
    ensure_dir("--out-dir", out);
    const auto write_series = [&](const std::string& file, const TimeSeries& s) {
        std::ostringstream csv;
        csv << "time," << s.name() << "\n";
        for (std::size_t i = 0; i < s.size(); ++i) csv << i << ',' << format_real(s[i]) << '\n';
        write_text(out / file, csv.str());
    };
    write_series("T_A.csv", data.a);
    write_series("T_B.csv", data.b);
    auto truth = truth_to_json(cfg, data);
    truth["manifest"] = kManifestName;
    write_json(out / "truth.json", truth);

    auto manifest = base_manifest("synth", argv);
    manifest["seed"] = cfg.seed;
    manifest["inputs"] = json::array();
    manifest["outputs"] = json::array({"T_A.csv", "T_B.csv", "truth.json"});
    manifest["timings"] = json{{"generate_ms", generate_ms}, {"write_ms", clock.lap_ms()}};
    write_json(out / kManifestName, manifest);

    std::cout << "wrote " << cfg.instances << " planted episode(s) to " << out.string() << "\n";
    return kExitOk;
}

// Rejects zero, negatives and non-numbers with a readable message.
const CLI::Validator kPositive(
    [](std::string& text) -> std::string {
        double v = 0.0;
        if (!CLI::detail::lexical_cast(text, v) || !(v > 0.0) || !std::isfinite(v))
            return "must be a positive number, got '" + text + "'";
        return {};
    },
    "POSITIVE");

const CLI::Validator kNonNegative(
    [](std::string& text) -> std::string {
        double v = 0.0;
        if (!CLI::detail::lexical_cast(text, v) || !(v >= 0.0) || !std::isfinite(v))
            return "must be a non-negative number, got '" + text + "'";
        return {};
    },
    "NONNEGATIVE");

void add_series_options(CLI::App* cmd, SeriesOptions& io) {
    cmd->add_option("--column", io.column, "Value column: header name or 0-based index (default: last column)");
    cmd->add_option("--time-column", io.time_column,
                    "Timestamp column in seconds: header name or 0-based index (default: none, period 1)");
}

} // namespace

int main(int argc, char** argv) {
    const std::vector<std::string> args(argv, argv + argc);
    CLI::App app{"Mine and evaluate predictive time-series shape rules"};
    app.set_version_flag("--version", std::string(MOTIFRULES_VERSION));
    app.require_subcommand(1);

    MineArgs mine;
    auto* mine_cmd = app.add_subcommand("mine", "Find the top-K rules for one series or a series pair");
    mine_cmd->add_option("--series-a", mine.series_a, "Antecedent series CSV");
    mine_cmd->add_option("--series-b", mine.series_b, "Consequent series CSV (default: --series-a)");
    mine_cmd->add_option("--pairs-dir", mine.pairs_dir, "Directory of CSVs; mine every ordered pair");
    add_series_options(mine_cmd, mine.io);
    mine_cmd->add_option("--motif-lengths", mine.cfg.motif_lengths, "Comma-separated motif lengths")
        ->delimiter(',')
        ->check(CLI::Range(std::size_t{2}, std::numeric_limits<std::size_t>::max() / 4))
        ->capture_default_str();
    mine_cmd->add_option("--k-motifs", mine.cfg.k_motifs, "Motifs kept per series and length")
        ->check(kPositive)
        ->capture_default_str();
    mine_cmd->add_option("--k-rules", mine.cfg.k_rules, "Rules reported")->capture_default_str();
    mine_cmd->add_option("--tau", mine.cfg.tau, "Maximum gap between antecedent and consequent, in seconds")
        ->check(kPositive)
        ->capture_default_str();
    mine_cmd->add_option("--theta", mine.cfg.theta, "Distance threshold for antecedent matches")
        ->check(kPositive)
        ->capture_default_str();
    mine_cmd->add_option("--consequent-theta", mine.consequent_theta,
                         "Distance threshold for consequent matches (default: --theta)")
        ->check(kPositive);
    mine_cmd->add_option("--bits", mine.cfg.bits, "Digitization bits")
        ->check(CLI::Range(kMinBits, kMaxBits))
        ->capture_default_str();
    mine_cmd->add_flag("--normalize", mine.normalize, "Z-normalize windows before measuring distance");
    mine_cmd->add_option("--jobs", mine.cfg.jobs, "Worker threads for pair scoring")
        ->check(kPositive)
        ->capture_default_str();
    mine_cmd->add_option("--out", mine.out, "Output directory")->required();

    EvalArgs eval;
    auto* eval_cmd = app.add_subcommand("eval", "Compute the Q metric of mined rules on held-out data");
    eval_cmd->add_option("--rules", eval.rules, "rules.json written by mine")->required();
    eval_cmd->add_option("--test-a", eval.test_a, "Held-out antecedent series CSV")->required();
    eval_cmd->add_option("--test-b", eval.test_b, "Held-out consequent series CSV");
    add_series_options(eval_cmd, eval.io);
    eval_cmd->add_option("--repetitions", eval.repetitions, "Random baseline draws averaged into Q")
        ->capture_default_str();
    eval_cmd->add_option("--seed", eval.seed, "Seed for the random baseline")->capture_default_str();
    eval_cmd->add_flag("--plot", eval.plot, "Also write plot_rule_<k>.csv overlays");
    eval_cmd->add_option("--out", eval.out, "Output directory")->required();

    SynthConfig synth;
    std::string synth_out;
    auto* synth_cmd = app.add_subcommand("synth", "Generate a series pair with a planted rule");
    synth_cmd->add_option("--length", synth.length, "Samples per series")->capture_default_str();
    synth_cmd->add_option("--instances", synth.instances, "Planted episodes")->capture_default_str();
    synth_cmd->add_option("--gap-lo", synth.gap_lo, "Smallest gap in samples")->capture_default_str();
    synth_cmd->add_option("--gap-hi", synth.gap_hi, "Largest gap in samples")->capture_default_str();
    synth_cmd->add_option("--noise", synth.noise_sd, "Gaussian noise standard deviation")
        ->check(kNonNegative)
        ->capture_default_str();
    synth_cmd->add_option("--seed", synth.seed, "Random seed")->capture_default_str();
    synth_cmd->add_flag("--same-series", synth.same_series, "Plant both shapes into T_A (T_B is a copy)");
    synth_cmd->add_option("--out-dir", synth_out, "Output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitError;
    }

    try {
        if (mine_cmd->parsed()) return run_mine(mine, args);
        if (eval_cmd->parsed()) return run_eval(eval, args);
        if (synth_cmd->parsed()) return run_synth(synth, synth_out, args);
    } catch (const FlagError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitError;
    }
    return kExitError;
}
