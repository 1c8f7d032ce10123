#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "lcfollow/error.hpp"

namespace lcfollow {

/// Sampling period of the trajectory data (10 Hz).
inline constexpr double frame_period = 0.1;

/// Kinematic history of one vehicle on a uniform time grid. Positions are
/// front-bumper coordinates: x_lat across the road, y_long along it.
struct VehicleTrack {
    long long id = 0;
    double length = 0.0;

    std::vector<double> t;
    std::vector<double> x_lat, y_long;
    std::vector<double> v_lat, v_long;
    std::vector<double> a_lat, a_long;
    std::vector<double> a_tot;  // magnitude of the acceleration vector
    std::vector<double> jerk;   // time derivative of a_tot
    std::vector<double> v_recorded, a_recorded;
    std::vector<long long> lane_id, preceding_id, following_id;

    std::size_t size() const noexcept { return t.size(); }
    bool empty() const noexcept { return t.empty(); }

    /// Index of the sample nearest to `time`, if it lies on the grid span.
    std::optional<std::size_t> index_at(double time) const
    {
        if (t.empty()) return std::nullopt;
        const double k = std::round((time - t.front()) / frame_period);
        if (k < 0 || k >= static_cast<double>(t.size())) return std::nullopt;
        return static_cast<std::size_t>(k);
    }

    /// Samples [begin, end).
    VehicleTrack slice(std::size_t begin, std::size_t end) const
    {
        if (begin > end || end > size()) throw DataError("track slice out of range");
        VehicleTrack out;
        out.id = id;
        out.length = length;
        auto cut = [&](const auto& src, auto& dst) {
            if (src.size() == size()) dst.assign(src.begin() + static_cast<std::ptrdiff_t>(begin), src.begin() + static_cast<std::ptrdiff_t>(end));
        };
        cut(t, out.t);
        cut(x_lat, out.x_lat);
        cut(y_long, out.y_long);
        cut(v_lat, out.v_lat);
        cut(v_long, out.v_long);
        cut(a_lat, out.a_lat);
        cut(a_long, out.a_long);
        cut(a_tot, out.a_tot);
        cut(jerk, out.jerk);
        cut(v_recorded, out.v_recorded);
        cut(a_recorded, out.a_recorded);
        cut(lane_id, out.lane_id);
        cut(preceding_id, out.preceding_id);
        cut(following_id, out.following_id);
        return out;
    }

    /// Throws when the derived series are missing or of unequal length.
    void require_kinematics() const
    {
        const auto n = size();
        if (n == 0) throw DataError("vehicle " + std::to_string(id) + ": empty track");
        for (const auto* s : {&x_lat, &y_long, &v_lat, &v_long, &a_lat, &a_long, &a_tot, &jerk}) {
            if (s->size() != n) throw DataError("vehicle " + std::to_string(id) + ": kinematic series length mismatch");
        }
    }
};

/// FV, LC and LV tracks on one shared time window around a lane change.
/// The LC moves into the FV's lane, ahead of it.
struct MergeScenario {
    std::string id;
    std::string source;
    VehicleTrack fv, lc, lv;
    std::optional<std::size_t> lane_change_index;  // first sample with the LC in its new lane; empty if it never changes

    std::size_t size() const noexcept { return fv.size(); }

    void require_aligned() const
    {
        fv.require_kinematics();
        lc.require_kinematics();
        lv.require_kinematics();
        if (lc.size() != fv.size() || lv.size() != fv.size()) throw DataError("scenario " + id + ": tracks are not time-aligned");
        for (std::size_t k = 0; k < fv.size(); ++k) {
            if (std::abs(fv.t[k] - lc.t[k]) > 1e-6 || std::abs(fv.t[k] - lv.t[k]) > 1e-6)
                throw DataError("scenario " + id + ": tracks are not time-aligned");
        }
        if (lane_change_index && *lane_change_index >= fv.size()) throw DataError("scenario " + id + ": lane-change index outside the window");
    }

    /// Bumper-to-bumper longitudinal gap from the FV to the LC at sample k.
    double fv_lc_gap(std::size_t k) const { return lc.y_long[k] - fv.y_long[k] - lc.length; }

    /// Lateral offset of the LC relative to the FV at sample k.
    double fv_lc_lateral(std::size_t k) const { return lc.x_lat[k] - fv.x_lat[k]; }
};

}  // namespace lcfollow
