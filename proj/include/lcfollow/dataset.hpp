#pragma once

// Controller training rows extracted from annotated scenarios, and their CSV
// form: [scenario,]vlat,jerk,dlong,dlat,accel_target.

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "lcfollow/anfis.hpp"
#include "lcfollow/error.hpp"
#include "lcfollow/phase.hpp"
#include "lcfollow/text.hpp"
#include "lcfollow/track.hpp"

namespace lcfollow::dataset {

inline const std::vector<std::string> input_columns{"vlat", "jerk", "dlong", "dlat"};
inline const std::string target_column = "accel_target";

/// Samples from anticipation start (or the window start) to relaxation end
/// (or the window end): recorded FV lateral velocity, |jerk|, FV-LC gap and
/// lateral offset as inputs; recorded FV longitudinal acceleration as target.
inline anfis::Dataset training_rows(const MergeScenario& sc, const phase::PhaseAnnotation& ann, long long group)
{
    sc.require_aligned();
    const double from = ann.anticipation_start.value_or(sc.fv.t.front());
    const double to = ann.relaxation_end.value_or(sc.fv.t.back());
    anfis::Dataset rows;
    for (std::size_t k = 0; k < sc.size(); ++k) {
        if (sc.fv.t[k] < from - 1e-9 || sc.fv.t[k] > to + 1e-9) continue;
        rows.push_back({{sc.fv.v_lat[k], std::abs(sc.fv.jerk[k]), sc.fv_lc_gap(k), sc.fv_lc_lateral(k)}, sc.fv.a_long[k], group});
    }
    return rows;
}

inline std::string to_csv(const anfis::Dataset& data)
{
    std::ostringstream out;
    out << "scenario";
    for (const auto& c : input_columns) out << ',' << c;
    out << ',' << target_column << "\n";
    for (const auto& s : data) {
        out << s.group;
        for (double v : s.x) out << ',' << text::format_number(v);
        out << ',' << text::format_number(s.y) << "\n";
    }
    return out.str();
}

/// Reads the four input columns and the target by name; an optional
/// `scenario` column groups rows by maneuver.
inline anfis::Dataset from_csv(std::istream& in, const std::string& source)
{
    const auto table = text::parse_numeric_csv(in, source);
    std::vector<std::size_t> cols;
    for (const auto& c : input_columns) {
        auto i = table.column(c);
        if (!i) throw DataError(source + ": missing column '" + c + "'");
        cols.push_back(*i);
    }
    const auto target = table.column(target_column);
    if (!target) throw DataError(source + ": missing column '" + target_column + "'");
    const auto group = table.column("scenario");
    anfis::Dataset data;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& row = table.rows[r];
        anfis::TrainingSample s;
        for (auto c : cols) s.x.push_back(row[c]);
        s.y = row[*target];
        s.group = group ? static_cast<long long>(row[*group]) : 0;
        for (double v : s.x)
            if (!std::isfinite(v)) throw DataError(source + ":" + std::to_string(table.line_numbers[r]) + ": non-finite input");
        if (!std::isfinite(s.y)) throw DataError(source + ":" + std::to_string(table.line_numbers[r]) + ": non-finite target");
        data.push_back(std::move(s));
    }
    return data;
}

inline anfis::Dataset load(const std::string& path)
{
    auto in = text::open_input(path);
    return from_csv(in, path);
}

}  // namespace lcfollow::dataset
