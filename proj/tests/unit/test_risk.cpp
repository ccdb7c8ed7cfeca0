#include <doctest.h>

#include <cbfswarm/risk.hpp>
#include <cbfswarm/rng.hpp>
#include <cbfswarm/uncertainty.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <vector>

using namespace cbfswarm;
using namespace cbfswarm::risk;

namespace {

const NoiseModel kNoNoise({0.0, 0.0}, Mat2::diagonal(0.0, 0.0));

AgentState still(int id, double px, double py, double r = 5.0, double gamma = 1.0) {
    return AgentState(id, {px, py}, {0.0, 0.0}, r, gamma, kNoNoise);
}

AgentState moving(int id, Vec2 p, Vec2 v, double r = 5.0, double gamma = 1.0) {
    return AgentState(id, p, v, r, gamma, kNoNoise);
}

}  // namespace

TEST_CASE("safety_value boundary and interior") {
    CHECK(safety_value(still(1, 0, 0), still(2, 5, 0)) == doctest::Approx(0.0));
    CHECK(safety_value(still(1, 0, 0), still(2, 13, 0)) == doctest::Approx(144.0));
    CHECK(safety_value(still(1, 0, 0), still(2, 3, 4)) == doctest::Approx(0.0));
    CHECK_THROWS_AS(safety_value(still(1, 0, 0), still(1, 5, 0)), InvalidArgument);
}

TEST_CASE("pair_gamma takes the stricter agent") {
    CHECK(pair_gamma(still(1, 0, 0, 5, 0.3), still(2, 9, 0, 5, 0.8)) == 0.3);
    CHECK(pair_gamma(still(1, 0, 0, 5, 2.0), still(2, 9, 0, 5, 2.0)) == 2.0);
}

TEST_CASE("safety_loss stationary boundary pair is the offset") {
    // All velocity, noise, and h terms vanish: L = c.
    const double c = 10.0;
    CHECK(safety_loss(still(1, 0, 0), still(2, 5, 0), 0.95, c) == doctest::Approx(c));
}

TEST_CASE("safety_loss hand-evaluated approach and retreat") {
    // d = x_i - x_j = (-10, 0), h = 75, gamma = 0.1, c = 100, no noise.
    // Approaching (relative velocity (2,0)): -2 d.(v_i-v_j) = +40,
    // so L = 40 - 7.5 + 100 = 132.5. Retreating flips the velocity term.
    const AgentState i = moving(1, {0, 0}, {1, 0}, 5, 0.1);
    const AgentState j = moving(2, {10, 0}, {-1, 0}, 5, 0.1);
    CHECK(safety_loss(i, j, 0.95, 100.0) == doctest::Approx(132.5));

    const AgentState i2 = moving(1, {0, 0}, {-1, 0}, 5, 0.1);
    const AgentState j2 = moving(2, {10, 0}, {1, 0}, 5, 0.1);
    CHECK(safety_loss(i2, j2, 0.95, 100.0) == doctest::Approx(52.5));
}

TEST_CASE("safety_loss closing faster raises the loss") {
    const double c = 500.0;
    double prev = -1e300;
    for (double speed = 0.0; speed <= 4.0; speed += 0.5) {
        const AgentState i = moving(1, {0, 0}, {speed, 0});
        const AgentState j = moving(2, {12, 0}, {-speed, 0});
        const double loss = safety_loss(i, j, 0.95, c);
        CHECK(loss > prev);
        prev = loss;
    }
}

TEST_CASE("safety_loss noise term uses the tail of the pair projection") {
    // Zero-mean noise still raises the loss via the CVaR margin:
    // L gains -2 * cvar(d.(e_i - e_j)) ... the term is subtracted, and for
    // zero-mean noise the CVaR is positive, so the quiet pair scores lower.
    const AgentState qi = moving(1, {0, 0}, {0, 0});
    const AgentState qj = moving(2, {12, 0}, {0, 0});
    AgentState ni = qi;
    AgentState nj = qj;
    ni.noise = NoiseModel({0, 0}, Mat2::diagonal(0.25, 0.25));
    nj.noise = NoiseModel({0, 0}, Mat2::diagonal(0.25, 0.25));
    const double quiet = safety_loss(qi, qj, 0.95, 200.0);
    const double noisy = safety_loss(ni, nj, 0.95, 200.0);
    CHECK(noisy < quiet);
    const double d = 12.0;
    const double margin = 2.0 * cvar::gaussian_cvar(0.0, d * 0.5 * d, 0.95);
    CHECK(quiet - noisy == doctest::Approx(margin));
}

TEST_CASE("safety_loss exchange symmetry with equal gamma and radii") {
    SplitRng rng(31, 4);
    for (int k = 0; k < 500; ++k) {
        const AgentState a = moving(1, {rng.uniform(-20, 20), rng.uniform(-20, 20)},
                                    {rng.uniform(-3, 3), rng.uniform(-3, 3)});
        const AgentState b = moving(2, {rng.uniform(-20, 20), rng.uniform(-20, 20)},
                                    {rng.uniform(-3, 3), rng.uniform(-3, 3)});
        const double lab = safety_loss(a, b, 0.95, 5000.0);
        const double lba = safety_loss(b, a, 0.95, 5000.0);
        CHECK(lab == doctest::Approx(lba).epsilon(1e-12));
    }
}

TEST_CASE("two-agent report wires the single pair into both rows") {
    const Scene s({still(1, 0, 0), still(2, 9, 0)}, 0.95, 300.0);
    const Report r = evaluate_scene_risk(s);
    CHECK(r.agent_count == 2);
    CHECK(r.loss(0, 1) == doctest::Approx(r.loss(1, 0)));
    CHECK(r.loss(0, 0) == 0.0);
    CHECK(r.agent_risk[0] == doctest::Approx(r.loss(0, 1)));
    CHECK(r.agent_risk[1] == doctest::Approx(r.loss(1, 0)));
}

TEST_CASE("symmetric ring reports equal risks") {
    std::vector<AgentState> ring;
    const int n = 6;
    for (int k = 0; k < n; ++k) {
        const double t = 2.0 * std::numbers::pi * k / n;
        ring.push_back(still(k + 1, 15.0 * std::cos(t), 15.0 * std::sin(t), 2.0));
    }
    const Scene s(ring, 0.95, 4000.0);
    const Report r = evaluate_scene_risk(s);
    for (int k = 1; k < n; ++k) {
        CHECK(r.agent_risk[static_cast<std::size_t>(k)] ==
              doctest::Approx(r.agent_risk[0]).epsilon(1e-12));
    }
}

TEST_CASE("adding a distant agent raises every existing risk") {
    std::vector<AgentState> base{still(1, 0, 0, 2), still(2, 8, 0, 2), still(3, 0, 9, 2)};
    // Large enough that even the (50,50) pair keeps a positive loss.
    const double c = 50000.0;
    const Report before = evaluate_scene_risk(Scene(base, 0.95, c));

    std::vector<AgentState> more = base;
    more.push_back(still(4, 50, 50, 2));
    const Report after = evaluate_scene_risk(Scene(more, 0.95, c));
    for (std::size_t k = 0; k < base.size(); ++k) {
        CHECK(after.agent_risk[k] > before.agent_risk[k]);
        // The increment is exactly that pair's (positive) loss.
        const double inc = after.agent_risk[k] - before.agent_risk[k];
        CHECK(inc == doctest::Approx(after.loss(static_cast<int>(k), 3)));
        CHECK(inc > 0.0);
    }
}

TEST_CASE("agent order permutation permutes the report") {
    std::vector<AgentState> fwd{moving(1, {0, 0}, {1, 0}, 3), moving(2, {7, 1}, {0, -1}, 3),
                                moving(3, {-2, 6}, {0.5, 0.5}, 3)};
    std::vector<AgentState> rev{fwd[2], fwd[0], fwd[1]};
    const Report a = evaluate_scene_risk(Scene(fwd, 0.95, 2000.0));
    const Report b = evaluate_scene_risk(Scene(rev, 0.95, 2000.0));
    // Same ids carry the same risk regardless of storage order.
    for (int id = 1; id <= 3; ++id) {
        const auto ia = std::find(a.agent_ids.begin(), a.agent_ids.end(), id);
        const auto ib = std::find(b.agent_ids.begin(), b.agent_ids.end(), id);
        REQUIRE(ia != a.agent_ids.end());
        REQUIRE(ib != b.agent_ids.end());
        const auto ka = static_cast<std::size_t>(ia - a.agent_ids.begin());
        const auto kb = static_cast<std::size_t>(ib - b.agent_ids.begin());
        CHECK(a.agent_risk[ka] == doctest::Approx(b.agent_risk[kb]).epsilon(1e-12));
    }
}

TEST_CASE("parallel and serial risk evaluation agree bitwise") {
    SplitRng rng(77, 5);
    std::vector<AgentState> agents;
    for (int k = 0; k < 24; ++k) {
        AgentState a = moving(k + 1, {rng.uniform(-40, 40), rng.uniform(-40, 40)},
                              {rng.uniform(-4, 4), rng.uniform(-4, 4)}, 2.0,
                              rng.uniform(0.2, 2.0));
        a.noise = NoiseModel({0, 0}, Mat2::diagonal(0.01, 0.02));
        agents.push_back(a);
    }
    const Scene s(agents, 0.99, 60000.0);
    const Report par = evaluate_scene_risk(s, 3);
    const Report ser = evaluate_scene_risk_serial(s, 3);
    CHECK(par.step == ser.step);
    REQUIRE(par.pair_loss.size() == ser.pair_loss.size());
    for (std::size_t k = 0; k < par.pair_loss.size(); ++k) {
        CHECK(par.pair_loss[k] == ser.pair_loss[k]);
    }
    for (std::size_t k = 0; k < par.agent_risk.size(); ++k) {
        CHECK(par.agent_risk[k] == ser.agent_risk[k]);
    }
}

TEST_CASE("neighbor cutoff drops distant pairs") {
    const Scene s({still(1, 0, 0, 2), still(2, 6, 0, 2), still(3, 100, 0, 2)}, 0.95,
                  500.0);
    const Report full = evaluate_scene_risk(s);
    const Report cut = evaluate_scene_risk(s, 0, 50.0);
    CHECK(cut.loss(0, 2) == 0.0);
    CHECK(cut.loss(2, 0) == 0.0);
    CHECK(cut.loss(0, 1) == doctest::Approx(full.loss(0, 1)));
    CHECK(cut.agent_risk[0] == doctest::Approx(cut.loss(0, 1)));
}

TEST_CASE("risk row sums hold exactly") {
    SplitRng rng(13, 6);
    std::vector<AgentState> agents;
    for (int k = 0; k < 9; ++k) {
        agents.push_back(moving(k + 1, {rng.uniform(-30, 30), rng.uniform(-30, 30)},
                                {rng.uniform(-2, 2), rng.uniform(-2, 2)}, 1.5));
    }
    const Report r = evaluate_scene_risk(Scene(agents, 0.9, 20000.0));
    for (int i = 0; i < r.agent_count; ++i) {
        double sum = 0.0;
        for (int j = 0; j < r.agent_count; ++j) sum += r.loss(i, j);
        CHECK(r.agent_risk[static_cast<std::size_t>(i)] == doctest::Approx(sum).epsilon(1e-15));
    }
}

TEST_CASE("risk report CSV shape") {
    const Scene s({still(1, 0, 0, 2), still(2, 6, 0, 2)}, 0.95, 200.0);
    const Report r = evaluate_scene_risk(s, 4);
    std::ostringstream out;
    write_csv(r, out);
    std::istringstream in(out.str());
    std::string line;
    int pair_rows = 0, agent_rows = 0;
    while (std::getline(in, line)) {
        const auto commas = std::count(line.begin(), line.end(), ',');
        if (commas == 3) ++pair_rows;
        if (commas == 2) ++agent_rows;
        CHECK(line.rfind("4,", 0) == 0);
    }
    CHECK(pair_rows == 2);
    CHECK(agent_rows == 2);
}
