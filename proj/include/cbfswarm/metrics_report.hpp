#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "cbfswarm/sim.hpp"

namespace cbfswarm::report {

struct RunSummary {
    std::string label;  // controller variant, e.g. "risk-aware"
    std::string scenario;
    std::uint64_t seed = 0;
    sim::Metrics metrics;
};

/// Percentage change of run b relative to run a, per metric. NaN marks an
/// undefined delta (division by zero, or a missing completion time); CSV
/// renders those cells empty.
struct Delta {
    std::string label_a;
    std::string label_b;
    double completion_time = 0.0;
    double total_deviation_integral = 0.0;
    double max_individual_deviation = 0.0;
    double deviation_active_duration = 0.0;
    double relaxed_step_count = 0.0;
    double min_pairwise_distance = 0.0;
};

struct ComparisonTable {
    std::vector<RunSummary> rows;
    std::vector<Delta> deltas;  // every ordered pair of rows (a before b)
};

/// Lines up controller variants that ran the same scenario and seed;
/// mismatched runs are rejected so deltas never compare unlike inputs.
ComparisonTable compare(std::span<const RunSummary> runs);

/// One "run" row per summary, then one "delta_pct" row per pair.
void write_compare_csv(const ComparisonTable& table, std::ostream& out);

/// Human-readable fixed-width rendering of the same data.
void print_table(const ComparisonTable& table, std::ostream& out);

}  // namespace cbfswarm::report
