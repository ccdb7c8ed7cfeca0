#include "cbfswarm/metrics_report.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

#include "cbfswarm/csv.hpp"

namespace cbfswarm::report {

namespace {

double pct_change(double a, double b) {
    if (a == 0.0) {
        return b == 0.0 ? 0.0 : std::numeric_limits<double>::quiet_NaN();
    }
    return (b - a) / std::abs(a) * 100.0;
}

double opt_pct(const std::optional<double>& a, const std::optional<double>& b) {
    if (!a.has_value() || !b.has_value()) {
        return std::numeric_limits<double>::quiet_NaN();
    }
    return pct_change(*a, *b);
}

std::string cell(double v) { return std::isfinite(v) ? fmt_double(v) : std::string(); }

std::string cell(const std::optional<double>& v) {
    return v.has_value() ? fmt_double(*v) : std::string();
}

}  // namespace

ComparisonTable compare(std::span<const RunSummary> runs) {
    if (runs.empty()) {
        throw InvalidArgument("compare needs at least one run");
    }
    for (const RunSummary& r : runs) {
        if (r.scenario != runs.front().scenario) {
            throw InvalidArgument("compare: runs must share a scenario (got '" + r.scenario +
                                  "' vs '" + runs.front().scenario + "')");
        }
        if (r.seed != runs.front().seed) {
            throw InvalidArgument("compare: runs must share a seed");
        }
    }
    ComparisonTable table;
    table.rows.assign(runs.begin(), runs.end());
    for (std::size_t i = 0; i < runs.size(); ++i) {
        for (std::size_t j = i + 1; j < runs.size(); ++j) {
            const sim::Metrics& a = runs[i].metrics;
            const sim::Metrics& b = runs[j].metrics;
            Delta d;
            d.label_a = runs[i].label;
            d.label_b = runs[j].label;
            d.completion_time = opt_pct(a.completion_time, b.completion_time);
            d.total_deviation_integral =
                pct_change(a.total_deviation_integral, b.total_deviation_integral);
            d.max_individual_deviation =
                pct_change(a.max_individual_deviation, b.max_individual_deviation);
            d.deviation_active_duration =
                pct_change(a.deviation_active_duration, b.deviation_active_duration);
            d.relaxed_step_count = pct_change(a.relaxed_step_count, b.relaxed_step_count);
            d.min_pairwise_distance =
                pct_change(a.min_pairwise_distance, b.min_pairwise_distance);
            table.deltas.push_back(d);
        }
    }
    return table;
}

void write_compare_csv(const ComparisonTable& table, std::ostream& out) {
    out << "kind,label_a,label_b,scenario,seed,completion_time,total_deviation_integral,"
           "max_individual_deviation,deviation_active_duration,relaxed_step_count,"
           "min_pairwise_distance\n";
    for (const RunSummary& r : table.rows) {
        out << "run," << r.label << ",," << r.scenario << ',' << r.seed << ','
            << cell(r.metrics.completion_time) << ','
            << fmt_double(r.metrics.total_deviation_integral) << ','
            << fmt_double(r.metrics.max_individual_deviation) << ','
            << fmt_double(r.metrics.deviation_active_duration) << ','
            << r.metrics.relaxed_step_count << ','
            << fmt_double(r.metrics.min_pairwise_distance) << '\n';
    }
    for (const Delta& d : table.deltas) {
        out << "delta_pct," << d.label_a << ',' << d.label_b << ','
            << table.rows.front().scenario << ',' << table.rows.front().seed << ','
            << cell(d.completion_time) << ',' << cell(d.total_deviation_integral) << ','
            << cell(d.max_individual_deviation) << ',' << cell(d.deviation_active_duration)
            << ',' << cell(d.relaxed_step_count) << ',' << cell(d.min_pairwise_distance)
            << '\n';
    }
}

void print_table(const ComparisonTable& table, std::ostream& out) {
    char line[256];
    std::snprintf(line, sizeof(line), "%-22s %12s %12s %12s %12s %8s %10s\n", "run",
                  "completion", "dev_integr", "dev_max", "dev_active", "relaxed",
                  "min_dist");
    out << line;
    for (const RunSummary& r : table.rows) {
        const std::string completion =
            r.metrics.completion_time ? fmt_double(*r.metrics.completion_time) : "none";
        std::snprintf(line, sizeof(line), "%-22s %12s %12.4f %12.4f %12.4f %8d %10.4f\n",
                      r.label.c_str(), completion.c_str(),
                      r.metrics.total_deviation_integral, r.metrics.max_individual_deviation,
                      r.metrics.deviation_active_duration, r.metrics.relaxed_step_count,
                      r.metrics.min_pairwise_distance);
        out << line;
    }
    for (const Delta& d : table.deltas) {
        const std::string pair = d.label_b + " vs " + d.label_a;
        const auto pct = [](double v) {
            return std::isfinite(v) ? fmt_double(v) + "%" : std::string("n/a");
        };
        std::snprintf(line, sizeof(line), "%-22s %12s %12s %12s %12s %8s %10s\n",
                      pair.c_str(), pct(d.completion_time).c_str(),
                      pct(d.total_deviation_integral).c_str(),
                      pct(d.max_individual_deviation).c_str(),
                      pct(d.deviation_active_duration).c_str(),
                      pct(d.relaxed_step_count).c_str(),
                      pct(d.min_pairwise_distance).c_str());
        out << line;
    }
}

}  // namespace cbfswarm::report
