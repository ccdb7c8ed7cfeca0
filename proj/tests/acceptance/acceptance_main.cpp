// End-to-end acceptance gate. Each check prints exactly one line,
// [PASS]/[FAIL] plus its wall time; the exit code is the failure count.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <cbfswarm/allocation.hpp>
#include <cbfswarm/cli.hpp>
#include <cbfswarm/config.hpp>
#include <cbfswarm/control.hpp>
#include <cbfswarm/metrics_report.hpp>
#include <cbfswarm/qp.hpp>
#include <cbfswarm/riskmap.hpp>
#include <cbfswarm/rng.hpp>
#include <cbfswarm/scenarios.hpp>
#include <cbfswarm/sim.hpp>
#include <cbfswarm/uncertainty.hpp>

#include "../support/ensembles.hpp"

namespace {

using namespace cbfswarm;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fail(const std::string& reason) { return reason; }

std::string format_count(const char* what, long long n) {
    std::ostringstream out;
    out << n << " " << what;
    return out.str();
}

// ---------------------------------------------------------------------------
// 1. Responsibility weights: partition of unity, higher risk -> smaller
//    share, 1e5+ random pairs in under a second.
std::string check_partition_of_unity() {
    SplitRng rng(20260814u);
    const auto t0 = Clock::now();
    const int trials = 120000;
    for (int k = 0; k < trials; ++k) {
        const double scale = std::pow(10.0, rng.uniform(-6.0, 6.0));
        double ri = scale * rng.uniform(0.0, 1.0);
        double rj = scale * rng.uniform(0.0, 1.0);
        if (k % 977 == 0) ri = 0.0;
        if (k % 1009 == 0) rj = 0.0;
        const alloc::PairWeights w = alloc::responsibility_weights(ri, rj);
        if (std::abs(w.w_i + w.w_j - 1.0) > 1e-12) {
            return fail("weights do not sum to one for (" + std::to_string(ri) + ", " +
                        std::to_string(rj) + ")");
        }
        if (ri > rj && w.w_i > w.w_j) {
            return fail("higher-risk agent got the larger share");
        }
        if (rj > ri && w.w_j > w.w_i) {
            return fail("higher-risk agent got the larger share");
        }
    }
    const double elapsed = seconds_since(t0);
    if (elapsed >= 1.0) {
        return fail("took " + std::to_string(elapsed) + " s for " +
                    format_count("pairs", trials));
    }
    return {};
}

// ---------------------------------------------------------------------------
// 2. Recombined pair budgets: on full default runs of both scenarios under
//    the risk-aware controller, every pair with two optimal solves obeys
//    a . (u_i - u_j) <= b_raw within 1e-9.
std::string check_pair_budget_recombination() {
    long long checked = 0;
    for (const char* kind : {"swap", "ramp"}) {
        const sim::Scenario sc = cfg::materialize(cfg::default_config(kind));
        const sim::TrajectoryLog log = sim::run(sc.scene, sc.config, sc.targets);
        const std::size_t n = sc.scene.agents.size();
        for (const sim::StepRecord& step : log.steps) {
            for (std::size_t i = 0; i < n; ++i) {
                for (std::size_t j = i + 1; j < n; ++j) {
                    if (step.decisions[i].qp_status != qp::Status::Optimal) continue;
                    if (step.decisions[j].qp_status != qp::Status::Optimal) continue;
                    const AgentState& si = step.states[i];
                    const AgentState& sj = step.states[j];
                    const Vec2 a = (si.position - sj.position) * -2.0;
                    const double lhs =
                        a.dot(step.decisions[i].u_applied - step.decisions[j].u_applied);
                    const double b_raw = control::pair_constraint_offset(
                        si, sj, sc.scene.alpha, sc.config.convention);
                    if (lhs > b_raw + 1e-9) {
                        return fail(std::string(kind) + " step " +
                                    std::to_string(step.step) + ": lhs " +
                                    std::to_string(lhs) + " > b_raw " +
                                    std::to_string(b_raw));
                    }
                    ++checked;
                }
            }
        }
    }
    if (checked < 1000) {
        return fail("only " + format_count("pairs checked", checked));
    }
    return {};
}

// ---------------------------------------------------------------------------
// 3. Safety margin replication: 50 randomized merge trials, every pairwise
//    distance trace stays at or above 5 m, zero collisions, under 30 s.
std::string check_merge_safety_margin() {
    const auto t0 = Clock::now();
    const sim::RampParams params;
    double global_min = 1e300;
    for (std::uint64_t seed = 1; seed <= 50; ++seed) {
        const sim::Scenario sc = sim::scenario_ramp_merge_randomized(params, seed);
        const sim::TrajectoryLog log = sim::run(sc.scene, sc.config, sc.targets);
        if (log.metrics.collision_occurred) {
            return fail("collision in trial seed " + std::to_string(seed));
        }
        for (const sim::StepRecord& step : log.steps) {
            for (const sim::PairRecord& pr : step.pairs) {
                global_min = std::min(global_min, pr.distance);
                if (pr.distance < 5.0) {
                    return fail("distance " + std::to_string(pr.distance) +
                                " m below margin in trial seed " + std::to_string(seed));
                }
            }
        }
    }
    const double elapsed = seconds_since(t0);
    if (elapsed >= 30.0) {
        return fail("took " + std::to_string(elapsed) + " s");
    }
    return {};
}

// ---------------------------------------------------------------------------
// 4. CVaR closed form vs a seeded million-sample estimate, plus exact
//    translation and scaling behavior over 1e4 random cases each.
std::string check_cvar_oracles() {
    const double closed = cvar::gaussian_cvar(0.0, 1.0, 0.95);
    std::vector<double> samples(1000000);
    SplitRng rng(4u);
    for (double& s : samples) s = rng.gauss();
    const double estimated = cvar::empirical_cvar(samples, 0.95);
    if (std::abs(closed - estimated) > 1e-2) {
        return fail("closed form " + std::to_string(closed) + " vs empirical " +
                    std::to_string(estimated));
    }

    SplitRng prop(0xc0a7u);
    for (int k = 0; k < 10000; ++k) {
        const double m = prop.uniform(-50.0, 50.0);
        const double v = prop.uniform(0.0, 100.0);
        const double alpha = prop.uniform(0.01, 0.99);
        const double t = prop.uniform(-100.0, 100.0);
        const double base = cvar::gaussian_cvar(m, v, alpha);
        if (std::abs(cvar::gaussian_cvar(m + t, v, alpha) - (base + t)) > 1e-10) {
            return fail("translation drift at case " + std::to_string(k));
        }
        const double s = prop.uniform(1e-3, 10.0);
        if (std::abs(cvar::gaussian_cvar(s * m, s * s * v, alpha) - s * base) > 1e-10) {
            return fail("scaling drift at case " + std::to_string(k));
        }
    }
    return {};
}

// ---------------------------------------------------------------------------
// 5. QP solver vs the exhaustive grid: 1000 random instances agree within
//    two grid spacings and 1e-3 objective; 100 constructed contradictions
//    are flagged infeasible by both.
std::string check_qp_oracle() {
    SplitRng rng(0x9b5de7a4u);
    for (int k = 0; k < 1000; ++k) {
        const qp::Problem p = testsupport::random_feasible_problem(rng);
        const qp::Solution exact = qp::solve(p);
        const qp::Solution grid = qp::brute_force_solve(p, 1000);
        if (exact.status != qp::Status::Optimal || grid.status != qp::Status::Optimal) {
            return fail("instance " + std::to_string(k) + " not optimal on both paths");
        }
        const double spacing = testsupport::grid_spacing(p, 1000);
        if ((exact.u - grid.u).norm() > 2.0 * spacing) {
            return fail("control gap " + std::to_string((exact.u - grid.u).norm()) +
                        " beyond two spacings at instance " + std::to_string(k));
        }
        if (std::abs(exact.objective - grid.objective) > 1e-3) {
            return fail("objective gap at instance " + std::to_string(k));
        }
        if (qp::max_violation(p, exact.u) > 1e-9) {
            return fail("solver left the feasible set at instance " + std::to_string(k));
        }
    }
    for (int k = 0; k < 100; ++k) {
        const qp::Problem p = testsupport::contradiction_problem(rng);
        if (qp::solve(p).status == qp::Status::Optimal) {
            return fail("contradiction " + std::to_string(k) + " solved as optimal");
        }
        if (qp::brute_force_solve(p, 1000).status != qp::Status::Infeasible) {
            return fail("grid missed contradiction " + std::to_string(k));
        }
    }
    return {};
}

// ---------------------------------------------------------------------------
// 6. Discrete forward invariance: noise-free head-on pair at dt = 0.02
//    keeps h_{t+1} >= (1 - gamma dt) h_t - 10 u_max^2 dt^2.
std::string check_forward_invariance() {
    sim::SwapParams params;
    params.sigma = 0.0;
    const sim::Scenario sc = sim::scenario_swap(2, params);
    const sim::TrajectoryLog log = sim::run(sc.scene, sc.config, sc.targets);
    if (!log.metrics.completion_time.has_value()) {
        return fail("head-on pair never completed");
    }
    const double dt = sc.config.dt;
    const double u_max = sc.config.bounds.upper.x;
    const double gamma = risk::pair_gamma(sc.scene.agents[0], sc.scene.agents[1]);
    const double tol = 10.0 * u_max * u_max * dt * dt;

    const auto h_of = [](const std::vector<AgentState>& states) {
        return risk::safety_value(states[0], states[1]);
    };
    for (std::size_t s = 0; s + 1 <= log.steps.size(); ++s) {
        const double h_t = h_of(log.steps[s].states);
        const double h_next = s + 1 < log.steps.size() ? h_of(log.steps[s + 1].states)
                                                       : h_of(log.final_states);
        if (h_next < (1.0 - gamma * dt) * h_t - tol) {
            return fail("barrier decayed too fast at step " + std::to_string(s) + ": " +
                        std::to_string(h_next) + " < " +
                        std::to_string((1.0 - gamma * dt) * h_t - tol));
        }
    }
    return {};
}

// ---------------------------------------------------------------------------
// 7. Risk map field properties plus a 200x200 render inside 5 s.
std::string check_risk_map() {
    const NoiseModel no_noise({0.0, 0.0}, Mat2::diagonal(0.0, 0.0));
    const auto agent = [&](int id, Vec2 p, Vec2 v, double gamma) {
        return AgentState(id, p, v, 2.0, gamma, no_noise);
    };

    // Monotone decay along rays from a lone stationary agent.
    const std::vector<AgentState> lone{agent(1, {0, 0}, {0, 0}, 1.0)};
    for (const Vec2 dir : {Vec2{1, 0}, Vec2{0, 1}, Vec2{0.6, -0.8}}) {
        double prev = 1e300;
        for (double r = 3.0; r <= 40.0; r += 0.5) {
            const double v = riskmap::point_risk(lone, 0.95, 2000.0, dir * r);
            if (v >= prev) {
                return fail("risk failed to decay along a ray at r = " + std::to_string(r));
            }
            prev = v;
        }
    }

    // Velocity lobe: the heading-side reading beats the perpendicular one.
    const std::vector<AgentState> mover{agent(1, {0, 0}, {3, 0}, 1.0),
                                        agent(2, {100, 100}, {0, 0}, 1.0)};
    if (riskmap::point_risk(mover, 0.95, 2000.0, {8, 0}) <=
        riskmap::point_risk(mover, 0.95, 2000.0, {0, 8})) {
        return fail("heading lobe not elongated");
    }

    // Smaller gamma -> larger iso-risk radius.
    const std::vector<AgentState> cautious{agent(1, {0, 0}, {0, 0}, 0.4)};
    const std::vector<AgentState> bold{agent(1, {0, 0}, {0, 0}, 1.6)};
    const double level = 0.5 * (riskmap::point_risk(cautious, 0.95, 2000.0, {10, 0}) +
                                riskmap::point_risk(bold, 0.95, 2000.0, {10, 0}));
    const auto crossing = [&](const std::vector<AgentState>& field) {
        double lo = 2.5, hi = 80.0;
        for (int it = 0; it < 60; ++it) {
            const double mid = 0.5 * (lo + hi);
            (riskmap::point_risk(field, 0.95, 2000.0, {mid, 0}) > level ? lo : hi) = mid;
        }
        return lo;
    };
    if (crossing(cautious) <= crossing(bold)) {
        return fail("smaller gamma did not grow the iso-risk disk");
    }

    // Adding an agent raises every cell; timed at the acceptance size.
    const std::vector<AgentState> two{agent(1, {-8, 0}, {0, 0}, 1.0),
                                      agent(2, {8, 0}, {0, 0}, 1.0)};
    std::vector<AgentState> three = two;
    three.push_back(agent(3, {0, 12}, {0, 0}, 1.0));
    const riskmap::Rect bounds{{-20, -20}, {20, 20}};
    const auto t0 = Clock::now();
    const riskmap::RiskGrid before = riskmap::compute_grid(two, 0.95, 10000.0, bounds, 200);
    const riskmap::RiskGrid after = riskmap::compute_grid(three, 0.95, 10000.0, bounds, 200);
    const double elapsed = seconds_since(t0);
    if (before.width != 200 || before.height != 200) {
        return fail("unexpected grid dimensions");
    }
    for (std::size_t k = 0; k < before.values.size(); ++k) {
        if (after.values[k] <= before.values[k]) {
            return fail("added agent did not raise cell " + std::to_string(k));
        }
    }
    if (elapsed >= 5.0) {
        return fail("200x200 render took " + std::to_string(elapsed) + " s");
    }
    return {};
}

// ---------------------------------------------------------------------------
// 8. Determinism of the command-line front end: identical config and seed
//    produce byte-identical logs.
int run_cli(std::vector<std::string> args) {
    args.insert(args.begin(), "cbf_swarm");
    std::vector<char*> argv;
    argv.reserve(args.size());
    for (std::string& a : args) argv.push_back(a.data());
    return cli::cli_main(static_cast<int>(argv.size()), argv.data());
}

std::string read_bytes(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::string check_cli_determinism() {
    const fs::path base = fs::temp_directory_path() / "cbfswarm_acceptance_det";
    const fs::path a = base / "a";
    const fs::path b = base / "b";
    fs::remove_all(base);
    fs::create_directories(a);
    fs::create_directories(b);
    for (const fs::path& out : {a, b}) {
        if (run_cli({"run", "--scenario", "swap", "--out", out.string()}) != 0) {
            return fail("run into " + out.string() + " did not exit cleanly");
        }
    }
    for (const char* name : {"trajectory.csv", "pairs.csv", "metrics.json-lines"}) {
        const std::string ba = read_bytes(a / name);
        const std::string bb = read_bytes(b / name);
        if (ba.empty() || ba != bb) {
            return fail(std::string(name) + " differs between identical runs");
        }
    }
    fs::remove_all(base);
    return {};
}

// ---------------------------------------------------------------------------
// 9. Shipped swap seed comparison: the risk-aware controller completes and
//    its peak individual deviation does not exceed the fixed-share split;
//    both figures land in compare.csv.
std::string check_swap_comparison() {
    cfg::Json ra_cfg = cfg::default_config("swap");
    cfg::Json fs_cfg = cfg::default_config("swap");
    cfg::apply_override(fs_cfg, "controller", "fixed:0.5");

    const sim::Scenario ra_sc = cfg::materialize(ra_cfg);
    const sim::Scenario fs_sc = cfg::materialize(fs_cfg);
    const sim::TrajectoryLog ra_log = sim::run(ra_sc.scene, ra_sc.config, ra_sc.targets);
    const sim::TrajectoryLog fs_log = sim::run(fs_sc.scene, fs_sc.config, fs_sc.targets);

    if (!ra_log.metrics.completion_time.has_value()) {
        return fail("risk-aware run did not complete");
    }
    if (ra_log.metrics.max_individual_deviation > fs_log.metrics.max_individual_deviation) {
        return fail("risk-aware peak deviation " +
                    std::to_string(ra_log.metrics.max_individual_deviation) +
                    " exceeds fixed-share " +
                    std::to_string(fs_log.metrics.max_individual_deviation));
    }

    const std::uint64_t seed = ra_sc.config.seed;
    const std::vector<report::RunSummary> runs{
        cfg::run_summary(ra_log, "risk-aware", "swap", seed),
        cfg::run_summary(fs_log, "fixed:0.5", "swap", seed)};
    const report::ComparisonTable table = report::compare(runs);

    const fs::path out = fs::temp_directory_path() / "cbfswarm_acceptance_compare.csv";
    std::ofstream file(out, std::ios::binary);
    report::write_compare_csv(table, file);
    file.close();
    const std::string csv = read_bytes(out);
    fs::remove(out);
    if (csv.find("completion_time") == std::string::npos ||
        csv.find("max_individual_deviation") == std::string::npos) {
        return fail("compare.csv is missing the required metric columns");
    }
    if (csv.find("run,risk-aware,") == std::string::npos ||
        csv.find("run,fixed:0.5,") == std::string::npos) {
        return fail("compare.csv is missing a controller row");
    }
    return {};
}

struct Check {
    const char* name;
    std::string (*body)();
};

}  // namespace

int main() {
    const Check checks[] = {
        {"responsibility weights partition unity over 1.2e5 pairs", check_partition_of_unity},
        {"recombined pair budgets hold on full runs of both scenarios",
         check_pair_budget_recombination},
        {"50 randomized merge trials stay above the 5 m margin", check_merge_safety_margin},
        {"closed-form CVaR matches the seeded million-sample estimate", check_cvar_oracles},
        {"active-set solver agrees with the resolution-1000 grid oracle", check_qp_oracle},
        {"noise-free head-on pair satisfies discrete forward invariance",
         check_forward_invariance},
        {"risk map decay, lobe, iso-disk and monotone-add properties", check_risk_map},
        {"repeated runs with one seed produce byte-identical logs", check_cli_determinism},
        {"risk-aware beats fixed-share peak deviation on the shipped swap seed",
         check_swap_comparison},
    };

    int failures = 0;
    int index = 0;
    for (const Check& check : checks) {
        ++index;
        const auto t0 = Clock::now();
        std::string reason;
        try {
            reason = check.body();
        } catch (const std::exception& e) {
            reason = std::string("exception: ") + e.what();
        }
        const double elapsed = seconds_since(t0);
        if (reason.empty()) {
            std::printf("[PASS] %d. %s (%.2f s)\n", index, check.name, elapsed);
        } else {
            std::printf("[FAIL] %d. %s (%.2f s): %s\n", index, check.name, elapsed,
                        reason.c_str());
            ++failures;
        }
        std::fflush(stdout);
    }
    if (failures == 0) {
        std::printf("all %d checks passed\n", index);
    } else {
        std::printf("%d of %d checks failed\n", failures, index);
    }
    return failures;
}
