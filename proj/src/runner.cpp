#include "tclevy/runner.hpp"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "tclevy/acceptance.hpp"
#include "tclevy/classify.hpp"
#include "tclevy/common.hpp"
#include "tclevy/config.hpp"
#include "tclevy/csvio.hpp"
#include "tclevy/entrance.hpp"
#include "tclevy/excursion.hpp"
#include "tclevy/levy.hpp"
#include "tclevy/rate.hpp"
#include "tclevy/stats.hpp"
#include "tclevy/time_change.hpp"

namespace tclevy {

namespace {

constexpr const char* kToolVersion = "1.0.0";

std::string default_out_dir() {
    const char* env = std::getenv("TCLEVY_OUT");
    return (env && *env) ? env : ".";
}

void write_text(const std::string& dir, const std::string& name,
                const std::string& content, std::vector<std::string>& artifacts) {
    std::filesystem::create_directories(dir);
    std::ofstream out(dir + "/" + name, std::ios::binary);
    if (!out) throw ConfigError("cannot write artifact '" + dir + "/" + name + "'");
    out << content;
    artifacts.push_back(name);
}

void write_manifest(const Config& cfg, const std::string& sub, const std::string& dir,
                    std::uint64_t seed, std::vector<std::string>& artifacts) {
    nlohmann::json j;
    j["subcommand"] = sub;
    j["seed"] = seed;
    j["config_hash"] = fnv1a_hex(cfg.canonical());
    j["config"] = nlohmann::json::object();
    for (const auto& [k, v] : cfg.entries()) j["config"][k] = v;
    j["artifacts"] = artifacts;
    j["versions"] = {{"tool", kToolVersion}, {"csv_schema", kCsvSchemaVersion}};
    write_text(dir, "manifest.json", j.dump(2) + "\n", artifacts);
}

// Model and rate strings come from the command line or the config file, so
// anything wrong with them is a configuration error, not a runtime failure.
LevyModel model_from(const Config& cfg) {
    const std::string& text = cfg.get("run.model");
    try {
        return LevyModel::parse(text);
    } catch (const Error& e) {
        throw ConfigError("run.model (" + cfg.where("run.model") + "): " + e.what());
    }
}

RateFunction rate_from(const Config& cfg) {
    const std::string& text = cfg.get("run.rate");
    try {
        return RateFunction::parse(text);
    } catch (const Error& e) {
        throw ConfigError("run.rate (" + cfg.where("run.rate") + "): " + e.what());
    }
}

double freq_se(double p, double n) { return std::sqrt(std::max(p * (1.0 - p), 0.0) / n); }

int cmd_classify(const Config& cfg, const std::string& dir, std::uint64_t seed) {
    BoundaryReport rep = classify_boundary(model_from(cfg), rate_from(cfg));
    std::string j = rep.to_json();
    std::cout << j << "\n";
    std::vector<std::string> artifacts;
    write_text(dir, "classify.json", j + "\n", artifacts);
    write_manifest(cfg, "classify", dir, seed, artifacts);
    return 0;
}

int cmd_simulate(const Config& cfg, const std::string& dir, std::uint64_t seed) {
    LevyModel m = model_from(cfg);
    RateFunction R = rate_from(cfg);
    double x0 = cfg.get_double("simulate.x0");
    double horizon = cfg.get_double_or("simulate.horizon", 1.0);
    double dt = cfg.get_double_or("simulate.dt", 1e-2);
    double levy_dt = cfg.get_double_or("simulate.levy_dt", 1e-3);
    double s_max = cfg.get_double_or("simulate.s_max", 100.0);
    std::uint64_t n = cfg.get_u64_or("simulate.n", 1);
    if (!(horizon > 0) || !(dt > 0) || !(levy_dt > 0) || !(s_max > 0))
        throw ConfigError("simulate: horizon, dt, levy_dt, s_max must be positive");

    std::vector<double> tg;
    for (double t = 0.0; t <= horizon + 1e-12; t += dt) tg.push_back(t);
    std::vector<Path> paths;
    paths.reserve(n);
    for (std::uint64_t i = 0; i < n; ++i) {
        Path lv = make_levy_path(m, levy_dt, s_max, seed, streams::increments, i);
        paths.push_back(apply_time_change(lv, R, x0, tg));
    }
    std::ostringstream os;
    write_paths_csv(os, paths);
    std::vector<std::string> artifacts;
    write_text(dir, "paths.csv", os.str(), artifacts);
    write_manifest(cfg, "simulate", dir, seed, artifacts);
    return 0;
}

int cmd_entrance_study(const Config& cfg, const std::string& dir, std::uint64_t seed) {
    LevyModel m = model_from(cfg);
    RateFunction R = rate_from(cfg);
    std::vector<double> levels = cfg.get_list("entrance.levels");
    double t_probe = cfg.get_double("entrance.t_probe");
    double b_level = cfg.get_double("entrance.b_level");
    std::uint64_t n = cfg.get_u64_or("entrance.n", 200);
    StabilizationReport rep = from_infinity_study(m, R, levels, t_probe, b_level, n, seed);

    std::vector<StudyRow> rows;
    double dn = static_cast<double>(n);
    for (const LevelStudy& ls : rep.levels) {
        rows.push_back({"level", ls.x0, "finite_freq", ls.finite_freq,
                        freq_se(ls.finite_freq, dn)});
        rows.push_back({"level", ls.x0, "crossed_freq", ls.crossed_freq,
                        freq_se(ls.crossed_freq, dn)});
        if (!ls.marginal.empty()) {
            double mean = mean_of(ls.marginal);
            double se = std::sqrt(sample_variance(ls.marginal) /
                                  static_cast<double>(ls.marginal.size()));
            rows.push_back({"level", ls.x0, "marginal_mean", mean, se});
        }
        if (!ls.hit_time.empty()) {
            double mean = mean_of(ls.hit_time);
            double se = std::sqrt(sample_variance(ls.hit_time) /
                                  static_cast<double>(ls.hit_time.size()));
            rows.push_back({"level", ls.x0, "mean_hit_time", mean, se});
        }
    }
    for (std::size_t i = 0; i < rep.ks_consecutive.size(); ++i)
        rows.push_back({"consecutive", rep.levels[i + 1].x0, "ks_to_previous",
                        rep.ks_consecutive[i], 0.0});
    rows.push_back({"summary", 0.0, "ks_shrinks", rep.ks_shrinks ? 1.0 : 0.0, 0.0});

    std::ostringstream os;
    write_study_csv(os, rows);
    std::vector<std::string> artifacts;
    write_text(dir, "entrance_study.csv", os.str(), artifacts);
    write_manifest(cfg, "entrance-study", dir, seed, artifacts);
    return 0;
}

int cmd_speed(const Config& cfg, const std::string& dir, std::uint64_t seed) {
    LevyModel m = model_from(cfg);
    RateFunction R = rate_from(cfg);
    double x_proxy = cfg.get_double("speed.x_proxy");
    std::vector<double> window = cfg.get_list("speed.t_window");
    std::uint64_t n = cfg.get_u64_or("speed.n", 2000);
    SpeedReport rep = speed_law(m, R, x_proxy, window, n, seed);

    std::vector<StudyRow> rows;
    auto emit = [&rows](const char* key, const std::vector<SpeedPoint>& pts) {
        for (const SpeedPoint& p : pts) {
            rows.push_back({key, p.t, "median_raw", p.median_raw, 0.0});
            rows.push_back({key, p.t, "iqr_raw", p.iqr_raw, 0.0});
            rows.push_back({key, p.t, "median_aligned", p.median_aligned, 0.0});
            rows.push_back({key, p.t, "iqr_aligned", p.iqr_aligned, 0.0});
        }
    };
    emit("speed", rep.points);
    emit("speed_doubled", rep.points_doubled);
    rows.push_back({"summary", 0.0, "gamma", rep.gamma, 0.0});
    rows.push_back({"summary", 0.0, "phi_proxy", rep.phi_proxy, 0.0});
    rows.push_back({"summary", 0.0, "doubling_max_rel_change", rep.doubling_max_rel_change, 0.0});

    std::ostringstream os;
    write_study_csv(os, rows);
    std::vector<std::string> artifacts;
    write_text(dir, "speed_study.csv", os.str(), artifacts);
    write_manifest(cfg, "speed", dir, seed, artifacts);
    return 0;
}

int cmd_undershoot(const Config& cfg, const std::string& dir, std::uint64_t seed) {
    LevyModel m = model_from(cfg);
    RateFunction R = rate_from(cfg);
    double x_proxy = cfg.get_double("undershoot.x_proxy");
    std::vector<double> levels = cfg.get_list("undershoot.levels");
    std::uint64_t n = cfg.get_u64_or("undershoot.n", 500);
    UndershootReport rep = undershoot_stationarity(m, R, x_proxy, levels, n, seed);

    std::vector<StudyRow> rows;
    for (std::size_t j = 0; j < rep.levels.size(); ++j) {
        const auto& s = rep.samples[j];
        if (!s.empty()) {
            double mean = mean_of(s);
            double se = std::sqrt(sample_variance(s) / static_cast<double>(s.size()));
            rows.push_back({"level", rep.levels[j], "mean_undershoot", mean, se});
        }
        if (j > 0 && !rep.ks.empty())
            rows.push_back({"level", rep.levels[j], "ks_vs_first", rep.ks[0][j], 0.0});
    }
    rows.push_back({"summary", 0.0, "max_pairwise_ks", rep.max_pairwise_ks, 0.0});
    rows.push_back({"summary", 0.0, "critical_001", rep.critical_001, 0.0});
    rows.push_back({"summary", 0.0, "level_independent", rep.level_independent ? 1.0 : 0.0, 0.0});
    rows.push_back({"summary", 0.0, "ks_vs_stationary", rep.ks_vs_stationary, 0.0});
    rows.push_back({"summary", 0.0, "matches_stationary", rep.matches_stationary ? 1.0 : 0.0, 0.0});

    std::ostringstream os;
    write_study_csv(os, rows);
    std::vector<std::string> artifacts;
    write_text(dir, "undershoot_study.csv", os.str(), artifacts);
    write_manifest(cfg, "undershoot", dir, seed, artifacts);
    return 0;
}

int cmd_excursions(const Config& cfg, const std::string& dir, std::uint64_t seed) {
    LevyModel m = model_from(cfg);
    RateFunction R = rate_from(cfg);
    std::string mode = cfg.get("excursions.mode");
    double theta = cfg.get_double("excursions.theta");
    std::uint64_t n = cfg.get_u64_or("excursions.n", 200);

    std::vector<ExcursionSample> exc;
    if (mode == "jump_in") {
        double M = cfg.get_double("excursions.M");
        exc = sample_excursion_jump_in(m, R, theta, M, n, seed);
    } else if (mode == "continuous") {
        double y = cfg.get_double("excursions.y");
        double x_proxy = cfg.get_double("excursions.x_proxy");
        exc = sample_excursion_continuous(m, R, theta, y, x_proxy, n, seed);
    } else {
        throw ConfigError(cfg.where("excursions.mode") +
                          ": field 'excursions.mode' must be jump_in or continuous, got '" +
                          mode + "'");
    }

    std::ostringstream os;
    os << kPathCsvHeader << '\n';
    for (std::size_t i = 0; i < exc.size(); ++i)
        append_path_rows(os, exc[i].path, static_cast<int>(i));

    std::vector<StudyRow> rows;
    for (std::size_t i = 0; i < exc.size(); ++i) {
        double id = static_cast<double>(i);
        rows.push_back({"excursion", id, "lifetime", exc[i].lifetime, 0.0});
        rows.push_back({"excursion", id, "min_level", exc[i].min_level, 0.0});
        if (exc[i].entry_mode == ExcursionSample::Entry::JumpIn)
            rows.push_back({"excursion", id, "x_entry", exc[i].x_entry, 0.0});
    }
    if (!exc.empty())
        rows.push_back({"summary", 0.0, "weight", exc.front().weight, 0.0});

    std::ostringstream os2;
    write_study_csv(os2, rows);
    std::vector<std::string> artifacts;
    write_text(dir, "excursions.csv", os.str(), artifacts);
    write_text(dir, "excursion_stats.csv", os2.str(), artifacts);
    write_manifest(cfg, "excursions", dir, seed, artifacts);
    return 0;
}

int cmd_glue(const Config& cfg, const std::string& dir, std::uint64_t seed) {
    LevyModel m = model_from(cfg);
    RateFunction R = rate_from(cfg);
    double theta = cfg.get_double("glue.theta");
    double a_threshold = cfg.get_double("glue.a_threshold");
    double horizon = cfg.get_double("glue.horizon");
    std::uint64_t n_real = cfg.get_u64_or("glue.n_real", 100);
    std::optional<double> x_start;
    if (cfg.has("glue.x_start")) x_start = cfg.get_double("glue.x_start");
    GluedExtension g =
        glue_recurrent_extension(m, R, theta, a_threshold, horizon, n_real, seed, x_start);

    std::ostringstream os;
    os << kPathCsvHeader << '\n';
    append_path_rows(os, g.path, g.excursion_id);

    std::vector<StudyRow> rows;
    for (std::size_t k = 0; k < g.excursion_min.size(); ++k) {
        double id = static_cast<double>(k);
        rows.push_back({"excursion", id, "min_level", g.excursion_min[k], 0.0});
        rows.push_back({"excursion", id, "lifetime", g.excursion_lifetime[k], 0.0});
        rows.push_back({"excursion", id, "arrival_local_time", g.arrival_local_time[k], 0.0});
    }
    rows.push_back({"summary", 0.0, "local_time_span", g.local_time_span, 0.0});
    rows.push_back({"summary", 0.0, "total_duration", g.total_duration, 0.0});
    rows.push_back({"summary", 0.0, "intensity", g.intensity, 0.0});
    rows.push_back({"summary", 0.0, "neglect_per_local", g.neglect_per_local, 0.0});
    rows.push_back({"summary", 0.0, "neglect_fraction", g.neglect_fraction, 0.0});

    std::ostringstream os2;
    write_study_csv(os2, rows);
    std::vector<std::string> artifacts;
    write_text(dir, "glued.csv", os.str(), artifacts);
    write_text(dir, "glue_stats.csv", os2.str(), artifacts);
    write_manifest(cfg, "glue", dir, seed, artifacts);
    return 0;
}

int cmd_cramer_limit(const Config& cfg, const std::string& dir, std::uint64_t seed) {
    LevyModel m = model_from(cfg);
    RateFunction R = rate_from(cfg);
    double theta = cfg.get_double("cramer.theta");
    double y = cfg.get_double("cramer.y");
    std::vector<double> x_grid = cfg.get_list("cramer.x_grid");
    std::uint64_t n = cfg.get_u64_or("cramer.n", 10000);
    CramerTable tab = cramer_limit_check(m, R, theta, y, x_grid, n, seed);

    std::vector<StudyRow> rows;
    for (const CramerRow& row : tab.rows) {
        double boost = std::exp(tab.theta * row.x);
        rows.push_back({"x", row.x, "p_hat", row.p_hat, row.se_scaled / boost});
        rows.push_back({"x", row.x, "scaled", row.scaled, row.se_scaled});
    }
    if (tab.have_constant)
        rows.push_back({"summary", 0.0, "expected_constant", tab.expected_constant, 0.0});

    std::ostringstream os;
    write_study_csv(os, rows);
    std::vector<std::string> artifacts;
    write_text(dir, "cramer_study.csv", os.str(), artifacts);
    write_manifest(cfg, "cramer-limit", dir, seed, artifacts);
    return 0;
}

int cmd_selftest(const Config& cfg, const std::string& dir, std::uint64_t seed) {
    std::string suite = cfg.get_or("selftest.suite", "quick");
    if (suite != "quick" && suite != "full")
        throw ConfigError("selftest: suite must be quick or full, got '" + suite + "'");
    std::vector<CriterionResult> results = run_acceptance();

    bool all = true;
    std::vector<StudyRow> rows;
    for (const CriterionResult& r : results) {
        all = all && r.pass;
        std::cout << (r.pass ? "[PASS]" : "[FAIL]") << " criterion " << r.id << ": "
                  << r.name << " (" << format_g17(r.seconds) << " s): " << r.detail
                  << "\n";
        rows.push_back({"criterion", static_cast<double>(r.id), "pass",
                        r.pass ? 1.0 : 0.0, 0.0});
        rows.push_back({"criterion", static_cast<double>(r.id), "seconds", r.seconds, 0.0});
    }
    std::ostringstream os;
    write_study_csv(os, rows);
    std::vector<std::string> artifacts;
    write_text(dir, "selftest.csv", os.str(), artifacts);
    write_manifest(cfg, "selftest", dir, seed, artifacts);
    std::cout << (all ? "all criteria passed" : "some criteria FAILED") << "\n";
    return all ? 0 : 1;
}

struct SubSpec {
    const char* name;
    const char* help;
    int (*handler)(const Config&, const std::string&, std::uint64_t);
    // flag, config key, help
    std::vector<std::array<const char*, 3>> options;
};

const std::vector<SubSpec>& subcommands() {
    static const std::vector<SubSpec> specs = {
        {"classify", "classify the boundary at infinity", cmd_classify, {}},
        {"simulate",
         "simulate time-changed paths on a fixed grid",
         cmd_simulate,
         {{"--x0", "simulate.x0", "start position"},
          {"--horizon", "simulate.horizon", "changed-time horizon"},
          {"--dt", "simulate.dt", "output grid step"},
          {"--levy-dt", "simulate.levy_dt", "underlying grid step"},
          {"--s-max", "simulate.s_max", "underlying time budget"},
          {"--n", "simulate.n", "number of paths"}}},
        {"entrance-study",
         "stabilization of the start-from-high-level law",
         cmd_entrance_study,
         {{"--levels", "entrance.levels", "comma-separated start levels"},
          {"--t-probe", "entrance.t_probe", "probe time"},
          {"--b-level", "entrance.b_level", "crossing level"},
          {"--n", "entrance.n", "paths per level"}}},
        {"speed",
         "small-time descent speed from a high proxy level",
         cmd_speed,
         {{"--x-proxy", "speed.x_proxy", "proxy start level"},
          {"--t-window", "speed.t_window", "comma-separated probe times"},
          {"--n", "speed.n", "number of paths"}}},
        {"undershoot",
         "level independence of the crossing undershoot",
         cmd_undershoot,
         {{"--x-proxy", "undershoot.x_proxy", "far start level"},
          {"--levels", "undershoot.levels", "comma-separated crossing levels"},
          {"--n", "undershoot.n", "paths per level"}}},
        {"excursions",
         "sample excursions away from the boundary",
         cmd_excursions,
         {{"--mode", "excursions.mode", "jump_in or continuous"},
          {"--theta", "excursions.theta", "exponential tilt parameter"},
          {"--M", "excursions.M", "entry window top (jump_in)"},
          {"--y", "excursions.y", "conditioning level (continuous)"},
          {"--x-proxy", "excursions.x_proxy", "descent proxy (continuous)"},
          {"--n", "excursions.n", "number of excursions"}}},
        {"glue",
         "build a recurrent extension by gluing excursions",
         cmd_glue,
         {{"--theta", "glue.theta", "exponential tilt parameter"},
          {"--a-threshold", "glue.a_threshold", "conditioning threshold"},
          {"--horizon", "glue.horizon", "real-time budget"},
          {"--n-real", "glue.n_real", "maximum excursions"},
          {"--x-start", "glue.x_start", "optional ordinary start point"}}},
        {"cramer-limit",
         "scaled hitting probabilities across start levels",
         cmd_cramer_limit,
         {{"--theta", "cramer.theta", "exponential rate of decay"},
          {"--y", "cramer.y", "target level"},
          {"--x-grid", "cramer.x_grid", "comma-separated start levels"},
          {"--n", "cramer.n", "paths per level"}}},
        {"selftest",
         "run the acceptance checks",
         cmd_selftest,
         {{"--suite", "selftest.suite", "quick or full"}}},
    };
    return specs;
}

} // namespace

int run_cli(int argc, char** argv) {
    CLI::App app{"simulation and classification laboratory for time-changed Levy processes"};
    app.require_subcommand(1);

    std::vector<std::pair<std::string, std::string>> overrides;
    std::string config_path;

    for (const SubSpec& spec : subcommands()) {
        CLI::App* sub = app.add_subcommand(spec.name, spec.help);
        sub->add_option("--config", config_path, "key=value config file");
        sub->add_option_function<std::string>(
            "--model", [&overrides](const std::string& v) { overrides.emplace_back("run.model", v); },
            "model text, e.g. brownian:a=1,s2=4");
        sub->add_option_function<std::string>(
            "--rate", [&overrides](const std::string& v) { overrides.emplace_back("run.rate", v); },
            "rate expression, e.g. exp(x)");
        sub->add_option_function<std::string>(
            "--seed", [&overrides](const std::string& v) { overrides.emplace_back("run.seed", v); },
            "base seed");
        sub->add_option_function<std::string>(
            "--out", [&overrides](const std::string& v) { overrides.emplace_back("run.out", v); },
            "output directory (default $TCLEVY_OUT or .)");
        for (const auto& opt : spec.options) {
            std::string key = opt[1];
            sub->add_option_function<std::string>(
                opt[0],
                [&overrides, key](const std::string& v) { overrides.emplace_back(key, v); },
                opt[2]);
        }
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2; // usage problems share the config exit code
    }

    try {
        Config cfg;
        if (!config_path.empty()) cfg = Config::parse_file(config_path);
        for (const auto& [k, v] : overrides) cfg.set(k, v);

        for (const SubSpec& spec : subcommands()) {
            if (!app.got_subcommand(spec.name)) continue;
            cfg.set("run.subcommand", spec.name);
            std::string dir = cfg.get_or("run.out", default_out_dir());
            std::uint64_t seed = cfg.get_u64_or("run.seed", 1);
            return spec.handler(cfg, dir, seed);
        }
        std::cerr << "error: no subcommand selected\n";
        return 2;
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

} // namespace tclevy
