#pragma once

// Evaluation of follower traces: velocity/acceleration variances, final
// position gap, and the spacing error against Pipe's law.

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "lcfollow/error.hpp"
#include "lcfollow/phase.hpp"
#include "lcfollow/plant.hpp"
#include "lcfollow/text.hpp"

namespace lcfollow::metrics {

/// Population variance (divides by N).
inline double variance(std::span<const double> series)
{
    if (series.size() < 2) throw DataError("variance needs at least 2 samples");
    double mean = 0.0;
    for (double v : series) mean += v;
    mean /= static_cast<double>(series.size());
    double acc = 0.0;
    for (double v : series) acc += (v - mean) * (v - mean);
    return acc / static_cast<double>(series.size());
}

/// Variance of the concatenation of several series.
inline double pooled_variance(std::span<const std::vector<double>> parts)
{
    std::vector<double> all;
    for (const auto& p : parts) all.insert(all.end(), p.begin(), p.end());
    return variance(all);
}

/// Signed gap minus Pipe's spacing at each trace sample.
inline std::vector<double> pipes_error_series(const plant::SimTrace& trace, double length)
{
    std::vector<double> out;
    out.reserve(trace.size());
    for (const auto& p : trace.points) out.push_back(p.state.d - phase::pipes_distance(length, std::max(0.0, p.state.v)));
    return out;
}

struct TimeWindow {
    double from = -std::numeric_limits<double>::infinity();
    double to = std::numeric_limits<double>::infinity();
    bool contains(double t) const { return t >= from - 1e-9 && t <= to + 1e-9; }
};

struct SubjectRow {
    std::string subject;
    double velocity_variance = 0.0;
    double acceleration_variance = 0.0;
    double final_position_gap = std::numeric_limits<double>::quiet_NaN();  // vs the reference subject
    double mean_abs_pipes_error = std::numeric_limits<double>::quiet_NaN();
    double max_abs_pipes_error = std::numeric_limits<double>::quiet_NaN();
};

struct ComparisonReport {
    std::vector<SubjectRow> rows;  // ordered by subject name

    const SubjectRow* find(const std::string& subject) const
    {
        for (const auto& r : rows)
            if (r.subject == subject) return &r;
        return nullptr;
    }
};

struct CompareOptions {
    TimeWindow variance_window;  // samples used for the variances
    TimeWindow pipes_window;     // samples used for the Pipe's-law error statistics
    std::optional<std::string> reference;  // subject whose final position anchors the position gap
};

inline void require_same_grid(const plant::SimTrace& a, const plant::SimTrace& b, const std::string& what)
{
    if (a.size() != b.size()) throw DataError("trace window mismatch for " + what + ": different lengths");
    for (std::size_t k = 0; k < a.size(); ++k)
        if (std::abs(a.points[k].t - b.points[k].t) > 1e-6) throw DataError("trace window mismatch for " + what + ": time grids differ");
}

inline ComparisonReport compare(const std::map<std::string, plant::SimTrace>& traces, double length, const CompareOptions& opt = {})
{
    if (traces.empty()) throw DataError("compare needs at least one trace");
    const auto& first = traces.begin()->second;
    for (const auto& [name, tr] : traces) require_same_grid(first, tr, name);
    const plant::SimTrace* reference = nullptr;
    if (opt.reference) {
        auto it = traces.find(*opt.reference);
        if (it == traces.end()) throw DataError("reference subject '" + *opt.reference + "' has no trace");
        reference = &it->second;
    }

    ComparisonReport report;
    for (const auto& [name, tr] : traces) {
        SubjectRow row;
        row.subject = name;
        std::vector<double> v, a;
        for (const auto& p : tr.points) {
            if (!opt.variance_window.contains(p.t)) continue;
            v.push_back(p.state.v);
            a.push_back(p.state.a);
        }
        row.velocity_variance = variance(v);
        row.acceleration_variance = variance(a);
        if (reference && !tr.points.empty()) row.final_position_gap = tr.points.back().x_fv - reference->points.back().x_fv;

        const auto err = pipes_error_series(tr, length);
        double sum = 0.0, worst = 0.0;
        std::size_t count = 0;
        for (std::size_t k = 0; k < err.size(); ++k) {
            if (!opt.pipes_window.contains(tr.points[k].t)) continue;
            sum += std::abs(err[k]);
            worst = std::max(worst, std::abs(err[k]));
            ++count;
        }
        if (count > 0) {
            row.mean_abs_pipes_error = sum / static_cast<double>(count);
            row.max_abs_pipes_error = worst;
        }
        report.rows.push_back(row);
    }
    return report;
}

/// Pooled ("all vehicles") velocity and acceleration variances per subject.
struct PooledRow {
    double velocity_variance = std::numeric_limits<double>::quiet_NaN();
    double acceleration_variance = std::numeric_limits<double>::quiet_NaN();
};

inline std::map<std::string, PooledRow> pooled(const std::map<std::string, std::vector<plant::SimTrace>>& traces)
{
    std::map<std::string, PooledRow> out;
    for (const auto& [name, list] : traces) {
        std::vector<std::vector<double>> v, a;
        for (const auto& tr : list) {
            v.push_back(tr.velocities());
            a.push_back(tr.accelerations());
        }
        out[name] = {pooled_variance(v), pooled_variance(a)};
    }
    return out;
}

inline std::string format_optional(double v) { return std::isnan(v) ? "NA" : text::format_number(v); }

/// Comparison CSV with one row per subject.
inline std::string report_to_csv(const ComparisonReport& report, const std::map<std::string, PooledRow>& all = {})
{
    std::ostringstream out;
    out << "subject,velocity_variance,velocity_variance_all,acceleration_variance,acceleration_variance_all,"
           "final_position_gap,mean_abs_pipes_error,max_abs_pipes_error\n";
    for (const auto& r : report.rows) {
        const auto it = all.find(r.subject);
        const PooledRow p = it == all.end() ? PooledRow{} : it->second;
        out << r.subject << ',' << format_optional(r.velocity_variance) << ',' << format_optional(p.velocity_variance) << ','
            << format_optional(r.acceleration_variance) << ',' << format_optional(p.acceleration_variance) << ','
            << format_optional(r.final_position_gap) << ',' << format_optional(r.mean_abs_pipes_error) << ','
            << format_optional(r.max_abs_pipes_error) << "\n";
    }
    return out.str();
}

/// Tidy per-step plot data: one row per subject and sample.
inline std::string plot_data_csv(const std::map<std::string, plant::SimTrace>& traces, double length)
{
    using text::format_number;
    std::ostringstream out;
    out << "subject,t,x_fv,v,a,d,pipes_error\n";
    for (const auto& [name, tr] : traces) {
        const auto err = pipes_error_series(tr, length);
        for (std::size_t k = 0; k < tr.size(); ++k) {
            const auto& p = tr.points[k];
            out << name << ',' << format_number(p.t) << ',' << format_number(p.x_fv) << ',' << format_number(p.state.v) << ','
                << format_number(p.state.a) << ',' << format_number(p.state.d) << ',' << format_number(err[k]) << "\n";
        }
    }
    return out.str();
}

}  // namespace lcfollow::metrics
