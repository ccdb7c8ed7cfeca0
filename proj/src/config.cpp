#include "cbfswarm/config.hpp"

#include <fstream>
#include <numbers>

namespace cbfswarm::cfg {

namespace {

Json vec2_json(const Vec2& v) { return Json::array({v.x, v.y}); }

Vec2 vec2_from(const Json& j, const std::string& what) {
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
        throw InvalidArgument(what + " must be a [x, y] number pair");
    }
    return {j[0].get<double>(), j[1].get<double>()};
}

Json deadlock_json(const sim::DeadlockConfig& d) {
    return Json{{"enabled", d.enabled},
                {"v_eps_factor", d.v_eps_factor},
                {"d_eps_factor", d.d_eps_factor},
                {"t_dead_steps", d.t_dead_steps},
                {"rotation_deg", d.rotation_rad * 180.0 / std::numbers::pi}};
}

sim::DeadlockConfig deadlock_from(const Json& j) {
    sim::DeadlockConfig d;
    d.enabled = j.at("enabled").get<bool>();
    d.v_eps_factor = j.at("v_eps_factor").get<double>();
    d.d_eps_factor = j.at("d_eps_factor").get<double>();
    d.t_dead_steps = j.at("t_dead_steps").get<int>();
    d.rotation_rad = j.at("rotation_deg").get<double>() * std::numbers::pi / 180.0;
    return d;
}

Json ramp_json(const sim::RampParams& p) {
    return Json{{"lane_length", p.lane_length},
                {"merge_x", p.merge_x},
                {"ramp_angle_deg", p.ramp_angle_deg},
                {"safety_radius", p.safety_radius},
                {"gamma", p.gamma},
                {"alpha", p.alpha},
                {"sigma", p.sigma},
                {"dt", p.dt},
                {"horizon_steps", p.horizon_steps},
                {"target_spacing", p.target_spacing},
                {"target_runout", p.target_runout},
                {"goal_tolerance", p.goal_tolerance},
                {"goal_gain", p.goal_gain},
                {"command_lower", vec2_json(p.command_lower)},
                {"command_upper", vec2_json(p.command_upper)},
                {"accel_lower", vec2_json(p.accel_lower)},
                {"accel_upper", vec2_json(p.accel_upper)},
                {"velocity_tracking_gain", p.velocity_tracking_gain},
                {"waypoint_switch_radius", p.waypoint_switch_radius},
                {"main_x_min", p.main_x_min},
                {"main_x_max", p.main_x_max},
                {"ramp_near_min", p.ramp_near_min},
                {"ramp_near_max", p.ramp_near_max},
                {"ramp_far_min", p.ramp_far_min},
                {"ramp_far_max", p.ramp_far_max},
                {"init_speed_min", p.init_speed_min},
                {"init_speed_max", p.init_speed_max},
                {"cruise_min", p.cruise_min},
                {"cruise_max", p.cruise_max}};
}

sim::RampParams ramp_from(const Json& j) {
    sim::RampParams p;
    p.lane_length = j.at("lane_length").get<double>();
    p.merge_x = j.at("merge_x").get<double>();
    p.ramp_angle_deg = j.at("ramp_angle_deg").get<double>();
    p.safety_radius = j.at("safety_radius").get<double>();
    p.gamma = j.at("gamma").get<double>();
    p.alpha = j.at("alpha").get<double>();
    p.sigma = j.at("sigma").get<double>();
    p.dt = j.at("dt").get<double>();
    p.horizon_steps = j.at("horizon_steps").get<int>();
    p.target_spacing = j.at("target_spacing").get<double>();
    p.target_runout = j.at("target_runout").get<double>();
    p.goal_tolerance = j.at("goal_tolerance").get<double>();
    p.goal_gain = j.at("goal_gain").get<double>();
    p.command_lower = vec2_from(j.at("command_lower"), "ramp.command_lower");
    p.command_upper = vec2_from(j.at("command_upper"), "ramp.command_upper");
    p.accel_lower = vec2_from(j.at("accel_lower"), "ramp.accel_lower");
    p.accel_upper = vec2_from(j.at("accel_upper"), "ramp.accel_upper");
    p.velocity_tracking_gain = j.at("velocity_tracking_gain").get<double>();
    p.waypoint_switch_radius = j.at("waypoint_switch_radius").get<double>();
    p.main_x_min = j.at("main_x_min").get<double>();
    p.main_x_max = j.at("main_x_max").get<double>();
    p.ramp_near_min = j.at("ramp_near_min").get<double>();
    p.ramp_near_max = j.at("ramp_near_max").get<double>();
    p.ramp_far_min = j.at("ramp_far_min").get<double>();
    p.ramp_far_max = j.at("ramp_far_max").get<double>();
    p.init_speed_min = j.at("init_speed_min").get<double>();
    p.init_speed_max = j.at("init_speed_max").get<double>();
    p.cruise_min = j.at("cruise_min").get<double>();
    p.cruise_max = j.at("cruise_max").get<double>();
    return p;
}

Json swap_json(const sim::SwapParams& p, int agents) {
    sim::DeadlockConfig dl;
    dl.enabled = true;
    return Json{{"agents", agents},
                {"circle_radius", p.circle_radius},
                {"safety_radius", p.safety_radius},
                {"gamma", p.gamma},
                {"alpha", p.alpha},
                {"sigma", p.sigma},
                {"dt", p.dt},
                {"horizon_steps", p.horizon_steps},
                {"goal_tolerance", p.goal_tolerance},
                {"goal_gain", p.goal_gain},
                {"command_lower", vec2_json(p.command_lower)},
                {"command_upper", vec2_json(p.command_upper)},
                {"deadlock", deadlock_json(dl)}};
}

sim::SwapParams swap_from(const Json& j) {
    sim::SwapParams p;
    p.circle_radius = j.at("circle_radius").get<double>();
    p.safety_radius = j.at("safety_radius").get<double>();
    p.gamma = j.at("gamma").get<double>();
    p.alpha = j.at("alpha").get<double>();
    p.sigma = j.at("sigma").get<double>();
    p.dt = j.at("dt").get<double>();
    p.horizon_steps = j.at("horizon_steps").get<int>();
    p.goal_tolerance = j.at("goal_tolerance").get<double>();
    p.goal_gain = j.at("goal_gain").get<double>();
    p.command_lower = vec2_from(j.at("command_lower"), "swap.command_lower");
    p.command_upper = vec2_from(j.at("command_upper"), "swap.command_upper");
    return p;
}

Json custom_json() {
    return Json{{"agents", Json::array()},
                {"targets", Json::array()},
                {"alpha", 0.95},
                {"loss_offset_c", nullptr},
                {"dynamics", "single"},
                {"noise_channel", "position-rate"},
                {"dt", 0.02},
                {"horizon_steps", 10000},
                {"goal_tolerance", 0.5},
                {"goal_gain", 1.0},
                {"command_lower", Json::array({-1.0, -1.0})},
                {"command_upper", Json::array({1.0, 1.0})},
                {"accel_lower", Json::array({-6.0, -6.0})},
                {"accel_upper", Json::array({6.0, 6.0})},
                {"velocity_tracking_gain", 5.0},
                {"deadlock", deadlock_json(sim::DeadlockConfig{})}};
}

}  // namespace

Json default_config(const std::string& scenario_kind) {
    Json cfg{{"scenario", scenario_kind},
             {"seed", 10},
             {"controller", "risk-aware"},
             {"convention", "conservative"},
             // null means "use the scenario block's value".
             {"alpha", nullptr},
             {"dt", nullptr},
             {"horizon_steps", nullptr},
             {"goal_tolerance", nullptr},
             {"loss_offset_c", nullptr},
             {"weight_smoothing", 0.0},
             {"noise_channel", nullptr}};
    if (scenario_kind == "ramp") {
        cfg["seed"] = 1;
        cfg["ramp"] = ramp_json(sim::RampParams{});
    } else if (scenario_kind == "swap") {
        cfg["swap"] = swap_json(sim::SwapParams{}, 6);
    } else if (scenario_kind == "custom") {
        cfg["custom"] = custom_json();
    } else {
        throw InvalidArgument("unknown scenario kind: " + scenario_kind);
    }
    return cfg;
}

void merge_overlay(Json& base, const Json& overlay, const std::string& path) {
    if (!overlay.is_object() || !base.is_object()) {
        base = overlay;
        return;
    }
    for (const auto& [key, value] : overlay.items()) {
        const std::string where = path.empty() ? key : path + "." + key;
        if (!base.contains(key)) {
            throw InvalidArgument("unknown config field: " + where);
        }
        if (base[key].is_object() && value.is_object()) {
            merge_overlay(base[key], value, where);
        } else {
            base[key] = value;
        }
    }
}

Json load_config_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open config file: " + path.string());
    }
    Json raw;
    try {
        raw = Json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw InvalidArgument("config parse error in " + path.string() + ": " + e.what());
    }
    if (!raw.is_object() || !raw.contains("scenario") || !raw["scenario"].is_string()) {
        throw InvalidArgument("config " + path.string() +
                              " must be an object with a string \"scenario\" field");
    }
    Json cfg = default_config(raw["scenario"].get<std::string>());
    merge_overlay(cfg, raw);
    return cfg;
}

void apply_override(Json& config, const std::string& dotted_path, const std::string& value) {
    Json parsed;
    try {
        parsed = Json::parse(value);
    } catch (const nlohmann::json::parse_error&) {
        parsed = value;  // plain string
    }
    Json* node = &config;
    std::size_t start = 0;
    while (true) {
        const std::size_t dot = dotted_path.find('.', start);
        const std::string key = dotted_path.substr(start, dot - start);
        if (key.empty()) {
            throw InvalidArgument("bad override path: " + dotted_path);
        }
        if (dot == std::string::npos) {
            if (!node->contains(key)) {
                throw InvalidArgument("unknown config field: " + dotted_path);
            }
            (*node)[key] = parsed;
            return;
        }
        if (!node->contains(key) || !(*node)[key].is_object()) {
            throw InvalidArgument("override path not found: " + dotted_path);
        }
        node = &(*node)[key];
        start = dot + 1;
    }
}

control::ControllerKind parse_controller(const std::string& text) {
    if (text == "risk-aware") return control::ControllerKind::risk_aware();
    if (text == "centralized") return control::ControllerKind::centralized();
    if (text.rfind("fixed:", 0) == 0) {
        const std::string num = text.substr(6);
        try {
            return control::ControllerKind::fixed_share(std::stod(num));
        } catch (const std::exception&) {
            throw InvalidArgument("bad fixed share value: " + num);
        }
    }
    throw InvalidArgument("unknown controller: " + text +
                          " (expected risk-aware, fixed:<w> or centralized)");
}

namespace {

sim::Scenario materialize_custom(const Json& c) {
    std::vector<AgentState> agents;
    for (const Json& ja : c.at("agents")) {
        const Vec2 mean = ja.contains("noise_mean")
                              ? vec2_from(ja.at("noise_mean"), "custom agent noise_mean")
                              : Vec2{0.0, 0.0};
        Mat2 cov;
        if (ja.contains("noise_cov")) {
            const Json& jc = ja.at("noise_cov");
            if (!jc.is_array() || jc.size() != 4) {
                throw InvalidArgument("custom agent noise_cov must be [c00,c01,c10,c11]");
            }
            cov = Mat2(jc[0].get<double>(), jc[1].get<double>(), jc[2].get<double>(),
                       jc[3].get<double>());
        }
        agents.emplace_back(ja.at("id").get<int>(),
                            vec2_from(ja.at("position"), "custom agent position"),
                            vec2_from(ja.at("velocity"), "custom agent velocity"),
                            ja.at("safety_radius").get<double>(),
                            ja.at("gamma").get<double>(), NoiseModel(mean, cov));
    }
    std::vector<Vec2> targets;
    for (const Json& jt : c.at("targets")) {
        targets.push_back(vec2_from(jt, "custom target"));
    }
    if (targets.size() != agents.size()) {
        throw InvalidArgument("custom scenario needs one target per agent");
    }
    const double alpha = c.at("alpha").get<double>();
    const double offset = c.at("loss_offset_c").is_null()
                              ? Scene::default_loss_offset(agents)
                              : c.at("loss_offset_c").get<double>();

    sim::Scenario sc;
    sc.name = "custom";
    sc.scene = Scene(agents, alpha, offset);
    sc.targets = std::move(targets);

    sim::SimConfig& cfg = sc.config;
    const std::string dyn = c.at("dynamics").get<std::string>();
    if (dyn == "single") {
        cfg.dynamics = sim::Dynamics::SingleIntegrator;
    } else if (dyn == "double") {
        cfg.dynamics = sim::Dynamics::DoubleIntegrator;
    } else {
        throw InvalidArgument("custom.dynamics must be \"single\" or \"double\"");
    }
    cfg.dt = c.at("dt").get<double>();
    cfg.horizon_steps = c.at("horizon_steps").get<int>();
    cfg.goal_tolerance = c.at("goal_tolerance").get<double>();
    cfg.goal_gain = c.at("goal_gain").get<double>();
    cfg.bounds = {vec2_from(c.at("command_lower"), "custom.command_lower"),
                  vec2_from(c.at("command_upper"), "custom.command_upper")};
    cfg.accel_lower = vec2_from(c.at("accel_lower"), "custom.accel_lower");
    cfg.accel_upper = vec2_from(c.at("accel_upper"), "custom.accel_upper");
    cfg.velocity_tracking_gain = c.at("velocity_tracking_gain").get<double>();
    cfg.nominal = sim::NominalKind::MoveToGoal;
    cfg.deadlock = deadlock_from(c.at("deadlock"));
    return sc;
}

sim::NoiseChannel channel_from(const std::string& text) {
    if (text == "position-rate") return sim::NoiseChannel::PositionRate;
    if (text == "velocity") return sim::NoiseChannel::Velocity;
    throw InvalidArgument("noise_channel must be \"position-rate\" or \"velocity\"");
}

}  // namespace

sim::Scenario materialize(const Json& config) {
    const std::string kind = config.at("scenario").get<std::string>();
    const std::uint64_t seed = config.at("seed").get<std::uint64_t>();

    sim::Scenario sc;
    if (kind == "ramp") {
        sc = sim::scenario_ramp_merge_randomized(ramp_from(config.at("ramp")), seed);
    } else if (kind == "swap") {
        sc = sim::scenario_swap(config.at("swap").at("agents").get<int>(),
                                swap_from(config.at("swap")));
        sc.config.deadlock = deadlock_from(config.at("swap").at("deadlock"));
    } else if (kind == "custom") {
        sc = materialize_custom(config.at("custom"));
    } else {
        throw InvalidArgument("unknown scenario kind: " + kind);
    }
    sc.config.seed = seed;
    sc.config.controller = parse_controller(config.at("controller").get<std::string>());
    sc.config.convention =
        cvar::convention_from_string(config.at("convention").get<std::string>());
    sc.config.weight_smoothing = config.at("weight_smoothing").get<double>();

    double alpha = sc.scene.alpha;
    double offset = sc.scene.loss_offset_c;
    if (!config.at("alpha").is_null()) alpha = config.at("alpha").get<double>();
    if (!config.at("loss_offset_c").is_null()) {
        offset = config.at("loss_offset_c").get<double>();
    }
    if (alpha != sc.scene.alpha || offset != sc.scene.loss_offset_c) {
        sc.scene = Scene(sc.scene.agents, alpha, offset);
    }
    if (!config.at("dt").is_null()) sc.config.dt = config.at("dt").get<double>();
    if (!config.at("horizon_steps").is_null()) {
        sc.config.horizon_steps = config.at("horizon_steps").get<int>();
    }
    if (!config.at("goal_tolerance").is_null()) {
        sc.config.goal_tolerance = config.at("goal_tolerance").get<double>();
    }
    if (!config.at("noise_channel").is_null()) {
        sc.config.noise_channel = channel_from(config.at("noise_channel").get<std::string>());
    }
    return sc;
}

Json metrics_json(const sim::Metrics& metrics, const std::string& scenario,
                  const std::string& controller, std::uint64_t seed, double loss_offset_c) {
    Json j{{"scenario", scenario},
           {"controller", controller},
           {"seed", seed},
           {"min_pairwise_distance", metrics.min_pairwise_distance},
           {"collision_occurred", metrics.collision_occurred},
           {"completion_time", nullptr},
           {"total_deviation_integral", metrics.total_deviation_integral},
           {"max_individual_deviation", metrics.max_individual_deviation},
           {"deviation_active_duration", metrics.deviation_active_duration},
           {"relaxed_step_count", metrics.relaxed_step_count},
           {"steps_executed", metrics.steps_executed},
           {"loss_offset_c", loss_offset_c}};
    if (metrics.completion_time) j["completion_time"] = *metrics.completion_time;
    return j;
}

report::RunSummary run_summary(const sim::TrajectoryLog& log, const std::string& label,
                               const std::string& scenario, std::uint64_t seed) {
    report::RunSummary s;
    s.label = label;
    s.scenario = scenario;
    s.seed = seed;
    s.metrics = log.metrics;
    return s;
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot open file for writing: " + path.string());
    }
    out << content;
    if (!out) {
        throw IoError("failed writing file: " + path.string());
    }
}

}  // namespace cbfswarm::cfg
