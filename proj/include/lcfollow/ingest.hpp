#pragma once

// NGSim-style trajectory ingestion: CSV parsing, smoothing and finite
// differencing of the kinematic series, and merge-scenario extraction.

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "lcfollow/error.hpp"
#include "lcfollow/text.hpp"
#include "lcfollow/track.hpp"

namespace lcfollow::ingest {

/// Required columns (any order; additional columns are ignored). SI units.
inline const std::vector<std::string> trajectory_columns{"vehicle_id", "frame_id", "local_x", "local_y", "v_vel",
                                                         "v_acc",      "lane_id",  "v_length", "preceding_id",
                                                         "following_id"};

struct RawRow {
    long long vehicle_id = 0;
    long long frame_id = 0;
    double local_x = 0.0;  // lateral, m
    double local_y = 0.0;  // longitudinal, m
    double v_vel = 0.0;
    double v_acc = 0.0;
    long long lane_id = 0;
    double v_length = 0.0;
    long long preceding_id = 0;  // 0 = none
    long long following_id = 0;
    std::size_t line = 0;
};

inline std::vector<RawRow> parse_trajectory_csv(std::istream& in, const std::string& source)
{
    std::string line;
    std::size_t line_no = 0;
    std::vector<std::size_t> col(trajectory_columns.size());
    std::size_t field_count = 0;
    bool have_header = false;
    std::vector<RawRow> rows;
    std::set<std::pair<long long, long long>> seen;

    auto where = [&](std::size_t ln) { return source + ":" + std::to_string(ln) + ": "; };

    while (std::getline(in, line)) {
        ++line_no;
        const auto body = text::trim(line);
        if (body.empty()) continue;
        const auto fields = text::split(body, ',');
        if (!have_header) {
            std::map<std::string, std::size_t> pos;
            for (std::size_t i = 0; i < fields.size(); ++i) pos[std::string(text::trim(fields[i]))] = i;
            std::string missing;
            for (std::size_t c = 0; c < trajectory_columns.size(); ++c) {
                auto it = pos.find(trajectory_columns[c]);
                if (it == pos.end()) missing += (missing.empty() ? "" : ", ") + trajectory_columns[c];
                else col[c] = it->second;
            }
            if (!missing.empty()) throw DataError(where(line_no) + "header is missing column(s): " + missing);
            field_count = fields.size();
            have_header = true;
            continue;
        }
        if (fields.size() != field_count) {
            throw DataError(where(line_no) + "expected " + std::to_string(field_count) + " fields, found " +
                            std::to_string(fields.size()));
        }
        auto real = [&](std::size_t c) {
            auto v = text::parse_double(fields[col[c]]);
            if (!v || !std::isfinite(*v)) throw DataError(where(line_no) + "column '" + trajectory_columns[c] + "' is not a finite number");
            return *v;
        };
        auto integer = [&](std::size_t c) {
            auto v = text::parse_integer(fields[col[c]]);
            if (!v) throw DataError(where(line_no) + "column '" + trajectory_columns[c] + "' is not an integer");
            return *v;
        };
        RawRow r;
        r.vehicle_id = integer(0);
        r.frame_id = integer(1);
        r.local_x = real(2);
        r.local_y = real(3);
        r.v_vel = real(4);
        r.v_acc = real(5);
        r.lane_id = integer(6);
        r.v_length = real(7);
        r.preceding_id = integer(8);
        r.following_id = integer(9);
        r.line = line_no;
        if (!seen.emplace(r.vehicle_id, r.frame_id).second) {
            throw DataError(where(line_no) + "duplicate row for vehicle " + std::to_string(r.vehicle_id) + " frame " +
                            std::to_string(r.frame_id));
        }
        rows.push_back(r);
    }
    if (!have_header) throw DataError(source + ": empty file (no header)");
    return rows;
}

inline std::vector<RawRow> parse_trajectory_csv(const std::string& path)
{
    auto in = text::open_input(path);
    return parse_trajectory_csv(in, path);
}

/// Centred moving average; the window shrinks symmetrically near the ends.
inline std::vector<double> moving_average(std::span<const double> x, std::size_t window)
{
    if (window == 0 || window % 2 == 0) throw DataError("smoothing window must be a positive odd number");
    const std::size_t n = x.size();
    const std::size_t half = window / 2;
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t h = std::min({half, i, n - 1 - i});
        double acc = 0.0;
        for (std::size_t k = i - h; k <= i + h; ++k) acc += x[k];
        out[i] = acc / static_cast<double>(2 * h + 1);
    }
    return out;
}

/// Central differences in the interior, one-sided at both ends.
inline std::vector<double> differentiate(std::span<const double> x, double dt)
{
    const std::size_t n = x.size();
    std::vector<double> out(n, 0.0);
    if (n < 2) return out;
    out[0] = (x[1] - x[0]) / dt;
    out[n - 1] = (x[n - 1] - x[n - 2]) / dt;
    for (std::size_t i = 1; i + 1 < n; ++i) out[i] = (x[i + 1] - x[i - 1]) / (2.0 * dt);
    return out;
}

/// Derives velocities, accelerations, total acceleration and jerk from
/// smoothed positions. Rows must belong to one vehicle.
inline VehicleTrack build_track(std::vector<RawRow> rows, std::size_t smoothing_window = 5, double dt = frame_period)
{
    if (rows.empty()) throw DataError("build_track: no rows");
    if (rows.size() < smoothing_window) {
        throw DataError("vehicle " + std::to_string(rows.front().vehicle_id) + ": track of " + std::to_string(rows.size()) +
                        " samples is shorter than the smoothing window");
    }
    std::sort(rows.begin(), rows.end(), [](const RawRow& a, const RawRow& b) { return a.frame_id < b.frame_id; });
    for (std::size_t k = 1; k < rows.size(); ++k) {
        if (rows[k].vehicle_id != rows[0].vehicle_id) throw DataError("build_track: rows from several vehicles");
        if (rows[k].frame_id != rows[k - 1].frame_id + 1) {
            throw DataError("vehicle " + std::to_string(rows[0].vehicle_id) + ": frame gap between " +
                            std::to_string(rows[k - 1].frame_id) + " and " + std::to_string(rows[k].frame_id));
        }
    }
    VehicleTrack tr;
    tr.id = rows.front().vehicle_id;
    tr.length = rows.front().v_length;
    std::vector<double> raw_x, raw_y;
    for (const auto& r : rows) {
        tr.t.push_back(static_cast<double>(r.frame_id) / (1.0 / dt));
        raw_x.push_back(r.local_x);
        raw_y.push_back(r.local_y);
        tr.v_recorded.push_back(r.v_vel);
        tr.a_recorded.push_back(r.v_acc);
        tr.lane_id.push_back(r.lane_id);
        tr.preceding_id.push_back(r.preceding_id);
        tr.following_id.push_back(r.following_id);
    }
    tr.x_lat = moving_average(raw_x, smoothing_window);
    tr.y_long = moving_average(raw_y, smoothing_window);
    tr.v_lat = differentiate(tr.x_lat, dt);
    tr.v_long = differentiate(tr.y_long, dt);
    tr.a_lat = differentiate(tr.v_lat, dt);
    tr.a_long = differentiate(tr.v_long, dt);
    tr.a_tot.resize(tr.size());
    for (std::size_t k = 0; k < tr.size(); ++k) tr.a_tot[k] = std::hypot(tr.a_lat[k], tr.a_long[k]);
    tr.jerk = differentiate(tr.a_tot, dt);
    return tr;
}

/// Groups rows by vehicle and builds every track, ordered by vehicle id.
inline std::vector<VehicleTrack> build_tracks(std::span<const RawRow> rows, std::size_t smoothing_window = 5)
{
    std::map<long long, std::vector<RawRow>> by_vehicle;
    for (const auto& r : rows) by_vehicle[r.vehicle_id].push_back(r);
    std::vector<VehicleTrack> out;
    for (auto& [id, vrows] : by_vehicle) out.push_back(build_track(std::move(vrows), smoothing_window));
    return out;
}

struct SkippedEvent {
    long long lc_id = 0;
    double time = 0.0;
    std::string reason;
};

struct Extraction {
    std::vector<MergeScenario> scenarios;
    std::vector<SkippedEvent> skipped;
};

struct ExtractionOptions {
    double context_seconds = 15.0;  // kept on each side of the lane change
    double fv_search_seconds = 3.0; // how long after the change the FV link may appear
};

/// One scenario per lane_id change: the changing vehicle is the LC, the FV is
/// the target-lane vehicle listing the LC as its leader, and the LV is the
/// LC's leader in the source lane just before the change.
inline Extraction extract_merge_scenarios(std::span<const VehicleTrack> tracks, const ExtractionOptions& opt = {})
{
    std::map<long long, const VehicleTrack*> by_id;
    for (const auto& tr : tracks) by_id[tr.id] = &tr;

    auto frame_of = [](const VehicleTrack& tr, std::size_t k) { return std::llround(tr.t[k] / frame_period); };
    auto index_of_frame = [&](const VehicleTrack& tr, long long frame) -> std::optional<std::size_t> {
        if (tr.empty()) return std::nullopt;
        const long long k = frame - frame_of(tr, 0);
        if (k < 0 || k >= static_cast<long long>(tr.size())) return std::nullopt;
        return static_cast<std::size_t>(k);
    };

    Extraction out;
    const long long context = std::llround(opt.context_seconds / frame_period);
    const long long search = std::llround(opt.fv_search_seconds / frame_period);
    for (const auto& [lc_id, lc_ptr] : by_id) {
        const auto& lc = *lc_ptr;
        for (std::size_t k = 1; k < lc.lane_id.size(); ++k) {
            if (lc.lane_id[k] == lc.lane_id[k - 1]) continue;
            const long long change_frame = frame_of(lc, k);
            const long long target_lane = lc.lane_id[k];
            auto skip = [&](std::string reason) { out.skipped.push_back({lc_id, lc.t[k], std::move(reason)}); };

            const long long lv_id = lc.preceding_id[k - 1];
            if (lv_id == 0 || !by_id.count(lv_id)) {
                skip("no leading vehicle in the source lane");
                continue;
            }
            long long fv_id = 0;
            for (const auto& [cand_id, cand] : by_id) {
                if (cand_id == lc_id || cand_id == lv_id) continue;
                for (long long f = change_frame; f < change_frame + search && fv_id == 0; ++f) {
                    auto j = index_of_frame(*cand, f);
                    if (j && cand->lane_id[*j] == target_lane && cand->preceding_id[*j] == lc_id) fv_id = cand_id;
                }
                if (fv_id != 0) break;
            }
            if (fv_id == 0) {
                skip("no follower in the target lane lists the lane changer as leader");
                continue;
            }
            const auto& fv = *by_id.at(fv_id);
            const auto& lv = *by_id.at(lv_id);
            long long first = change_frame - context, last = change_frame + context;
            for (const auto* tr : {&lc, &fv, &lv}) {
                first = std::max(first, frame_of(*tr, 0));
                last = std::min(last, frame_of(*tr, tr->size() - 1));
            }
            if (first > change_frame || last < change_frame) {
                skip("tracks do not overlap at the lane-change frame");
                continue;
            }
            auto cut = [&](const VehicleTrack& tr) {
                const auto b = *index_of_frame(tr, first);
                const auto e = *index_of_frame(tr, last) + 1;
                return tr.slice(b, e);
            };
            MergeScenario sc;
            sc.id = "lc" + std::to_string(lc_id) + "_f" + std::to_string(change_frame);
            sc.fv = cut(fv);
            sc.lc = cut(lc);
            sc.lv = cut(lv);
            sc.lane_change_index = static_cast<std::size_t>(change_frame - first);
            out.scenarios.push_back(std::move(sc));
        }
    }
    return out;
}

}  // namespace lcfollow::ingest
