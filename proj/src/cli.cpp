#include "cbfswarm/cli.hpp"

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

#include "cbfswarm/config.hpp"
#include "cbfswarm/csv.hpp"
#include "cbfswarm/log.hpp"
#include "cbfswarm/riskmap.hpp"

namespace fs = std::filesystem;

namespace cbfswarm::cli {
namespace {

struct CommonOpts {
    std::string scenario = "swap";
    std::string out_dir = "out";
    std::string controller;  // empty keeps the config's value
    std::string convention;
    std::optional<std::uint64_t> seed;
    std::optional<double> alpha;
    std::optional<double> dt;
    std::vector<std::string> sets;
};

void add_common(CLI::App* cmd, CommonOpts& o) {
    cmd->add_option("--scenario", o.scenario, "ramp, swap or file:<path>")
        ->capture_default_str();
    cmd->add_option("--controller", o.controller, "risk-aware, fixed:<w> or centralized");
    cmd->add_option("--seed", o.seed, "master seed (u64)");
    cmd->add_option("--alpha", o.alpha, "CVaR confidence level in (0,1)");
    cmd->add_option("--convention", o.convention, "conservative or paper-literal");
    cmd->add_option("--dt", o.dt, "integration step (s)");
    cmd->add_option("--out", o.out_dir, "output directory")->capture_default_str();
    cmd->add_option("--set", o.sets, "dotted-path override, e.g. swap.circle_radius=25");
}

cfg::Json build_config(const CommonOpts& o) {
    cfg::Json config;
    if (o.scenario.rfind("file:", 0) == 0) {
        config = cfg::load_config_file(o.scenario.substr(5));
    } else {
        config = cfg::default_config(o.scenario);
    }
    if (!o.controller.empty()) cfg::apply_override(config, "controller", o.controller);
    if (!o.convention.empty()) cfg::apply_override(config, "convention", o.convention);
    if (o.seed) cfg::apply_override(config, "seed", std::to_string(*o.seed));
    if (o.alpha) cfg::apply_override(config, "alpha", fmt_double(*o.alpha));
    if (o.dt) cfg::apply_override(config, "dt", fmt_double(*o.dt));
    for (const std::string& kv : o.sets) {
        const std::size_t eq = kv.find('=');
        if (eq == std::string::npos || eq == 0) {
            throw InvalidArgument("--set expects path=value, got: " + kv);
        }
        cfg::apply_override(config, kv.substr(0, eq), kv.substr(eq + 1));
    }
    return config;
}

fs::path prepare_out_dir(const std::string& out_dir, const cfg::Json& config) {
    fs::path out(out_dir);
    std::error_code ec;
    fs::create_directories(out, ec);
    if (ec) {
        throw IoError("cannot create output directory " + out.string() + ": " + ec.message());
    }
    cfg::write_text_file(out / "resolved_config.json", config.dump(2) + "\n");
    return out;
}

std::ofstream open_out(const fs::path& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open file for writing: " + path.string());
    return f;
}

std::string opt_time(const std::optional<double>& t) {
    return t ? fmt_double(*t) : std::string("none");
}

void print_metrics_summary(std::ostream& os, const cfg::Json& config,
                           const sim::Metrics& m) {
    os << "scenario=" << config.at("scenario").get<std::string>()
       << " controller=" << config.at("controller").get<std::string>()
       << " seed=" << config.at("seed").get<std::uint64_t>() << "\n";
    os << "  steps_executed            " << m.steps_executed << "\n";
    os << "  completion_time           " << opt_time(m.completion_time) << "\n";
    os << "  min_pairwise_distance     " << fmt_double(m.min_pairwise_distance) << "\n";
    os << "  collision_occurred        " << (m.collision_occurred ? "yes" : "no") << "\n";
    os << "  total_deviation_integral  " << fmt_double(m.total_deviation_integral) << "\n";
    os << "  max_individual_deviation  " << fmt_double(m.max_individual_deviation) << "\n";
    os << "  deviation_active_duration " << fmt_double(m.deviation_active_duration) << "\n";
    os << "  relaxed_step_count        " << m.relaxed_step_count << "\n";
}

int cmd_run(const CommonOpts& o) {
    const cfg::Json config = build_config(o);
    const fs::path out = prepare_out_dir(o.out_dir, config);
    const sim::Scenario sc = cfg::materialize(config);
    const sim::TrajectoryLog log = sim::run(sc.scene, sc.config, sc.targets);

    {
        auto f = open_out(out / "trajectory.csv");
        sim::write_trajectory_csv(log, f);
    }
    {
        auto f = open_out(out / "pairs.csv");
        sim::write_pairs_csv(log, f);
    }
    const cfg::Json m = cfg::metrics_json(
        log.metrics, config.at("scenario").get<std::string>(),
        config.at("controller").get<std::string>(), config.at("seed").get<std::uint64_t>(),
        log.loss_offset_c);
    cfg::write_text_file(out / "metrics.json-lines", m.dump() + "\n");

    print_metrics_summary(std::cout, config, log.metrics);
    std::cout << "wrote " << (out / "trajectory.csv").string()
              << ", pairs.csv, metrics.json-lines\n";
    return log.metrics.collision_occurred ? 2 : 0;
}

struct PairMin {
    int i = 0, j = 0;
    double distance = 0.0;
};

// Per-pair minimum over the same state set Metrics scans: every pre-step
// snapshot (the first of which is the initial state) plus the final states.
std::vector<PairMin> pair_minima(const sim::TrajectoryLog& log) {
    std::map<std::pair<int, int>, double> best;
    for (const sim::StepRecord& step : log.steps) {
        for (const sim::PairRecord& p : step.pairs) {
            const std::pair<int, int> key{p.i, p.j};
            auto [it, fresh] = best.emplace(key, p.distance);
            if (!fresh && p.distance < it->second) it->second = p.distance;
        }
    }
    const std::vector<AgentState>& fin = log.final_states;
    for (std::size_t a = 0; a < fin.size(); ++a) {
        for (std::size_t b = a + 1; b < fin.size(); ++b) {
            const double d = (fin[a].position - fin[b].position).norm();
            const std::pair<int, int> key{fin[a].id, fin[b].id};
            auto [it, fresh] = best.emplace(key, d);
            if (!fresh && d < it->second) it->second = d;
        }
    }
    std::vector<PairMin> out;
    out.reserve(best.size());
    for (const auto& [key, d] : best) out.push_back({key.first, key.second, d});
    return out;
}

struct TrialResult {
    std::uint64_t seed = 0;
    sim::Metrics metrics;
    std::vector<PairMin> pair_mins;
};

int cmd_trials(const CommonOpts& o, int n) {
    if (n < 1) throw InvalidArgument("--trials must be >= 1");
    const cfg::Json base = build_config(o);
    const fs::path out = prepare_out_dir(o.out_dir, base);
    const std::uint64_t seed0 = base.at("seed").get<std::uint64_t>();
    const std::string scenario = base.at("scenario").get<std::string>();
    const std::string controller = base.at("controller").get<std::string>();

    std::vector<TrialResult> results(static_cast<std::size_t>(n));
    std::vector<std::string> errors(static_cast<std::size_t>(n));
    std::vector<std::string> metric_lines(static_cast<std::size_t>(n));

#pragma omp parallel for schedule(dynamic)
    for (int t = 0; t < n; ++t) {
        try {
            cfg::Json config = base;
            const std::uint64_t seed = seed0 + static_cast<std::uint64_t>(t);
            cfg::apply_override(config, "seed", std::to_string(seed));
            const sim::Scenario sc = cfg::materialize(config);
            const sim::TrajectoryLog log = sim::run(sc.scene, sc.config, sc.targets);

            char dirname[32];
            std::snprintf(dirname, sizeof dirname, "trial_%03d", t);
            const fs::path trial_dir = out / dirname;
            std::error_code ec;
            fs::create_directories(trial_dir, ec);
            if (ec) throw IoError("cannot create " + trial_dir.string() + ": " + ec.message());
            cfg::write_text_file(trial_dir / "resolved_config.json", config.dump(2) + "\n");
            const cfg::Json m =
                cfg::metrics_json(log.metrics, scenario, controller, seed, log.loss_offset_c);
            cfg::write_text_file(trial_dir / "metrics.json-lines", m.dump() + "\n");

            metric_lines[t] = m.dump() + "\n";
            results[t] = {seed, log.metrics, pair_minima(log)};
        } catch (const std::exception& e) {
            errors[t] = e.what();
        }
    }
    for (int t = 0; t < n; ++t) {
        if (!errors[t].empty()) {
            throw InvalidArgument("trial " + std::to_string(t) + " failed: " + errors[t]);
        }
    }

    {
        auto f = open_out(out / "trials.csv");
        f << "trial,seed,i,j,min_distance,collision\n";
        for (int t = 0; t < n; ++t) {
            const TrialResult& r = results[t];
            for (const PairMin& p : r.pair_mins) {
                f << t << ',' << r.seed << ',' << p.i << ',' << p.j << ','
                  << fmt_double(p.distance) << ',' << (r.metrics.collision_occurred ? 1 : 0)
                  << "\n";
            }
        }
    }
    {
        auto f = open_out(out / "metrics.json-lines");
        for (int t = 0; t < n; ++t) f << metric_lines[t];
    }

    double global_min = std::numeric_limits<double>::infinity();
    int collisions = 0;
    for (const TrialResult& r : results) {
        global_min = std::min(global_min, r.metrics.min_pairwise_distance);
        if (r.metrics.collision_occurred) ++collisions;
    }
    std::cout << "trials complete: n=" << n << " scenario=" << scenario
              << " controller=" << controller << " seed0=" << seed0 << "\n";
    std::cout << "  global_min_pairwise_distance " << fmt_double(global_min) << "\n";
    std::cout << "  collisions                   " << collisions << "\n";
    return collisions > 0 ? 2 : 0;
}

std::vector<double> parse_csv_doubles(const std::string& text, const std::string& what) {
    std::vector<double> vals;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            vals.push_back(std::stod(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw InvalidArgument(what + ": bad number \"" + item + "\"");
        }
    }
    return vals;
}

int cmd_riskmap(const CommonOpts& o, int resolution, const std::string& bounds_text,
                int agents_limit, const std::vector<std::string>& add_agents,
                double probe_radius) {
    const cfg::Json config = build_config(o);
    const fs::path out = prepare_out_dir(o.out_dir, config);
    const sim::Scenario sc = cfg::materialize(config);

    std::vector<AgentState> agents = sc.scene.agents;
    if (agents_limit > 0) {
        if (agents_limit > static_cast<int>(agents.size())) {
            throw InvalidArgument("--agents-limit exceeds the scene's agent count");
        }
        agents.resize(static_cast<std::size_t>(agents_limit));
    }
    for (const std::string& text : add_agents) {
        const std::vector<double> v = parse_csv_doubles(text, "--add-agent");
        if (v.size() != 2 && v.size() != 4 && v.size() != 6) {
            throw InvalidArgument("--add-agent expects px,py[,vx,vy[,radius,gamma]]");
        }
        const AgentState like = agents.back();  // copy: emplace may reallocate
        int next_id = 0;
        for (const AgentState& a : agents) next_id = std::max(next_id, a.id);
        agents.emplace_back(next_id + 1, Vec2{v[0], v[1]},
                            v.size() >= 4 ? Vec2{v[2], v[3]} : Vec2{0.0, 0.0},
                            v.size() >= 6 ? v[4] : like.safety_radius,
                            v.size() >= 6 ? v[5] : like.gamma, like.noise);
    }

    riskmap::Rect bounds;
    if (!bounds_text.empty()) {
        const std::vector<double> v = parse_csv_doubles(bounds_text, "--bounds");
        if (v.size() != 4) throw InvalidArgument("--bounds expects xmin,ymin,xmax,ymax");
        bounds = {{v[0], v[1]}, {v[2], v[3]}};
    } else {
        Vec2 lo = agents.front().position, hi = lo;
        double max_r = 0.0;
        for (const AgentState& a : agents) {
            lo = {std::min(lo.x, a.position.x), std::min(lo.y, a.position.y)};
            hi = {std::max(hi.x, a.position.x), std::max(hi.y, a.position.y)};
            max_r = std::max(max_r, a.safety_radius);
        }
        const double pad = std::max(1.0, 2.0 * max_r);
        bounds = {lo - Vec2{pad, pad}, hi + Vec2{pad, pad}};
    }

    const riskmap::RiskGrid grid = riskmap::compute_grid(
        agents, sc.scene.alpha, sc.scene.loss_offset_c, bounds, resolution, probe_radius);
    {
        auto f = open_out(out / "riskmap.csv");
        riskmap::write_grid_csv(grid, f);
    }
    riskmap::export_raster(grid, out / "riskmap.pgm");

    const auto [lo_v, hi_v] = riskmap::grid_min_max(grid);
    char hash_hex[24];
    std::snprintf(hash_hex, sizeof hash_hex, "%016llx",
                  static_cast<unsigned long long>(riskmap::scene_fingerprint(
                      agents, sc.scene.alpha, sc.scene.loss_offset_c)));
    cfg::Json meta{{"scenario", config.at("scenario").get<std::string>()},
                   {"agents", agents.size()},
                   {"alpha", sc.scene.alpha},
                   {"loss_offset_c", sc.scene.loss_offset_c},
                   {"probe_radius", probe_radius},
                   {"bounds", {bounds.min.x, bounds.min.y, bounds.max.x, bounds.max.y}},
                   {"resolution", resolution},
                   {"cell_size", grid.cell_size},
                   {"width", grid.width},
                   {"height", grid.height},
                   {"min", lo_v},
                   {"max", hi_v},
                   {"scene_hash", std::string(hash_hex)}};
    cfg::write_text_file(out / "riskmap.meta.json-lines", meta.dump() + "\n");

    std::cout << "riskmap complete: " << grid.width << "x" << grid.height
              << " cells, risk range [" << fmt_double(lo_v) << ", " << fmt_double(hi_v)
              << "]\n";
    std::cout << "wrote " << (out / "riskmap.csv").string()
              << ", riskmap.pgm, riskmap.meta.json-lines\n";
    return 0;
}

int cmd_compare(const CommonOpts& o, const std::vector<std::string>& controllers) {
    if (controllers.size() < 2) {
        throw InvalidArgument("--controllers needs at least two variants");
    }
    const cfg::Json base = build_config(o);
    const fs::path out = prepare_out_dir(o.out_dir, base);
    const std::string scenario = base.at("scenario").get<std::string>();
    const std::uint64_t seed = base.at("seed").get<std::uint64_t>();

    bool any_collision = false;
    std::vector<report::RunSummary> runs;
    for (const std::string& label : controllers) {
        cfg::Json config = base;
        cfg::apply_override(config, "controller", label);
        const sim::Scenario sc = cfg::materialize(config);
        const sim::TrajectoryLog log = sim::run(sc.scene, sc.config, sc.targets);
        any_collision = any_collision || log.metrics.collision_occurred;
        runs.push_back(cfg::run_summary(log, label, scenario, seed));
    }
    const report::ComparisonTable table = report::compare(runs);
    {
        auto f = open_out(out / "compare.csv");
        report::write_compare_csv(table, f);
    }
    report::print_table(table, std::cout);
    std::cout << "wrote " << (out / "compare.csv").string() << "\n";
    return any_collision ? 2 : 0;
}

}  // namespace

int cli_main(int argc, char** argv) {
    CLI::App app{"CBF-inspired risk evaluation and safe multi-agent control"};
    app.require_subcommand(1);

    CommonOpts run_opts;
    CLI::App* run_cmd = app.add_subcommand("run", "execute one scenario and log it");
    add_common(run_cmd, run_opts);

    CommonOpts trials_opts;
    int n_trials = 50;
    CLI::App* trials_cmd =
        app.add_subcommand("trials", "batch of seeded randomized instances");
    add_common(trials_cmd, trials_opts);
    trials_cmd->add_option("--trials", n_trials, "number of trials")->capture_default_str();

    CommonOpts map_opts;
    int resolution = 200;
    int agents_limit = 0;
    double probe_radius = 0.0;
    std::string bounds_text;
    std::vector<std::string> add_agents;
    CLI::App* map_cmd = app.add_subcommand("riskmap", "render the scene's risk field");
    add_common(map_cmd, map_opts);
    map_cmd->add_option("--resolution", resolution, "cells along the longer side")
        ->capture_default_str();
    map_cmd->add_option("--bounds", bounds_text, "xmin,ymin,xmax,ymax (default: padded bbox)");
    map_cmd->add_option("--agents-limit", agents_limit,
                        "use only the first k agents of the scene");
    map_cmd->add_option("--add-agent", add_agents,
                        "append an agent: px,py[,vx,vy[,radius,gamma]]");
    map_cmd->add_option("--probe-radius", probe_radius, "virtual probe safety radius")
        ->capture_default_str();

    CommonOpts cmp_opts;
    std::vector<std::string> controllers{"risk-aware", "fixed:0.5"};
    CLI::App* cmp_cmd =
        app.add_subcommand("compare", "run controller variants on one seed and diff them");
    add_common(cmp_cmd, cmp_opts);
    cmp_cmd->add_option("--controllers", controllers, "variants to run")
        ->delimiter(',')
        ->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (run_cmd->parsed()) return cmd_run(run_opts);
        if (trials_cmd->parsed()) return cmd_trials(trials_opts, n_trials);
        if (map_cmd->parsed()) {
            return cmd_riskmap(map_opts, resolution, bounds_text, agents_limit, add_agents,
                               probe_radius);
        }
        if (cmp_cmd->parsed()) return cmd_compare(cmp_opts, controllers);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    std::cerr << "error: no subcommand given\n";
    return 1;
}

}  // namespace cbfswarm::cli
