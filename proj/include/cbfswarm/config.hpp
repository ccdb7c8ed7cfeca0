#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include <json.hpp>

#include "cbfswarm/metrics_report.hpp"
#include "cbfswarm/scenarios.hpp"

namespace cbfswarm::cfg {

/// Key order is preserved so serialized configs and metrics lines are
/// byte-stable across runs.
using Json = nlohmann::ordered_json;

/// Fully materialized defaults for a scenario kind ("ramp", "swap" or
/// "custom"); every tunable appears explicitly so a resolved config is
/// self-describing.
Json default_config(const std::string& scenario_kind);

/// Parses a config file and deep-merges it over the defaults of its
/// "scenario" kind. Throws InvalidArgument with file/field context.
Json load_config_file(const std::filesystem::path& path);

/// Leaves of overlay replace the same path in base; objects merge
/// recursively; unknown keys are rejected (they are almost always typos).
void merge_overlay(Json& base, const Json& overlay, const std::string& path = "");

/// Dotted-path assignment, e.g. "swap.circle_radius=25". The value text is
/// parsed as JSON when possible and treated as a string otherwise.
void apply_override(Json& config, const std::string& dotted_path, const std::string& value);

control::ControllerKind parse_controller(const std::string& text);

/// Builds the runnable scenario: scene, sim config and targets, with every
/// top-level override (controller, convention, seed, alpha, dt, ...)
/// applied. Ramp initial conditions are drawn from the config seed.
sim::Scenario materialize(const Json& config);

/// One summary object per run for the metrics.json-lines stream.
Json metrics_json(const sim::Metrics& metrics, const std::string& scenario,
                  const std::string& controller, std::uint64_t seed, double loss_offset_c);

report::RunSummary run_summary(const sim::TrajectoryLog& log, const std::string& label,
                               const std::string& scenario, std::uint64_t seed);

void write_text_file(const std::filesystem::path& path, const std::string& content);

}  // namespace cbfswarm::cfg
