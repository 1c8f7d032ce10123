#pragma once

// Detection of the follower's merge sub-behaviors on a recorded scenario:
// anticipation, perception, preparation and relaxation.

#include <cmath>
#include <optional>
#include <string>
#include <string_view>

#include "lcfollow/error.hpp"
#include "lcfollow/track.hpp"

namespace lcfollow::phase {

struct Thresholds {
    double vlat_threshold = 0.2;           // m/s, |FV lateral velocity| that starts anticipation
    double jerk_threshold = 0.6;           // m/s^3, calm bound on |d a_tot / dt|
    double perception_min_duration = 0.5;  // s
    double lc_settle_displacement = 0.01;  // m per step of LC lateral motion
    double cautious_factor = 1.5;          // gap above this multiple of Pipe's spacing means no relaxation

    void validate() const
    {
        if (!(vlat_threshold > 0 && jerk_threshold > 0 && perception_min_duration > 0 && lc_settle_displacement > 0 &&
              cautious_factor > 0)) {
            throw DataError("phase thresholds must be strictly positive");
        }
    }
};

/// Pipe's safe spacing for a follower of length `length` at speed `speed`.
inline double pipes_distance(double length, double speed)
{
    if (!(length > 0)) throw DataError("pipes_distance: vehicle length must be > 0");
    if (!(speed >= 0)) throw DataError("pipes_distance: speed must be >= 0");
    return length * (1.0 + speed / 4.47);
}

enum class RelaxationCase { intersection, aggressive_min_deviation, cautious_no_relaxation };

inline constexpr std::string_view relaxation_case_name(RelaxationCase c)
{
    switch (c) {
    case RelaxationCase::intersection: return "intersection";
    case RelaxationCase::aggressive_min_deviation: return "aggressive-min-deviation";
    case RelaxationCase::cautious_no_relaxation: return "cautious-no-relaxation";
    }
    return "?";
}

inline std::optional<RelaxationCase> relaxation_case_from_name(std::string_view name)
{
    for (auto c : {RelaxationCase::intersection, RelaxationCase::aggressive_min_deviation, RelaxationCase::cautious_no_relaxation})
        if (relaxation_case_name(c) == name) return c;
    return std::nullopt;
}

struct Interval {
    double start = 0.0;
    double end = 0.0;
    double duration() const { return end - start; }
};

struct SettleResult {
    double time = 0.0;
    std::size_t index = 0;
    bool settled = false;
};

struct RelaxationResult {
    double time = 0.0;
    RelaxationCase kind = RelaxationCase::intersection;
};

/// Detected boundaries; absent members mean the stage was not observed.
struct PhaseAnnotation {
    std::optional<double> anticipation_start;
    std::optional<Interval> perception;
    std::optional<double> preparation_start;
    std::optional<double> lane_change_complete;
    bool lane_change_settled = false;
    std::optional<double> relaxation_end;
    std::optional<RelaxationCase> relaxation_case;

    /// anticipation <= perception.start < perception.end <= preparation <= completion <= relaxation end,
    /// checked over the boundaries that are present.
    bool ordered() const
    {
        double last = -INFINITY;
        auto step = [&last](std::optional<double> v, bool strict = false) {
            if (!v) return true;
            const bool ok = strict ? *v > last : *v >= last - 1e-9;
            last = *v;
            return ok;
        };
        bool ok = step(anticipation_start);
        if (perception) {
            ok = step(perception->start) && ok;
            ok = step(perception->end, true) && ok;
        }
        ok = step(preparation_start) && ok;
        ok = step(lane_change_complete) && ok;
        ok = step(relaxation_end) && ok;
        return ok;
    }
};

namespace detail {
inline constexpr double time_eps = 1e-9;
}

/// Earliest time with |v_lat| above the threshold.
inline std::optional<double> detect_anticipation_start(const VehicleTrack& fv, const Thresholds& th = {})
{
    th.validate();
    if (fv.v_lat.size() != fv.size()) throw DataError("vehicle " + std::to_string(fv.id) + ": missing lateral velocity series");
    for (std::size_t k = 0; k < fv.size(); ++k)
        if (std::abs(fv.v_lat[k]) > th.vlat_threshold) return fv.t[k];
    return std::nullopt;
}

/// First calm window (|jerk| <= threshold) starting at or after `from` that
/// lasts at least the minimum duration. The window ends at the first
/// exceedance, or at `until` when the jerk stays calm up to that bound.
inline std::optional<Interval> detect_perception(const VehicleTrack& fv, double from, double until, const Thresholds& th = {})
{
    th.validate();
    if (fv.jerk.size() != fv.size()) throw DataError("vehicle " + std::to_string(fv.id) + ": missing jerk series");
    const auto calm = [&](std::size_t k) { return std::abs(fv.jerk[k]) <= th.jerk_threshold; };
    std::size_t k = 0;
    while (k < fv.size() && fv.t[k] < from - detail::time_eps) ++k;
    while (k < fv.size() && fv.t[k] <= until + detail::time_eps) {
        if (!calm(k)) {
            ++k;
            continue;
        }
        const std::size_t start = k;
        while (k < fv.size() && fv.t[k] <= until + detail::time_eps && calm(k)) ++k;
        const bool exceeded = k < fv.size() && fv.t[k] <= until + detail::time_eps;
        const double end = exceeded ? fv.t[k] : until;
        if (end - fv.t[start] >= th.perception_min_duration - detail::time_eps && end > fv.t[start]) return Interval{fv.t[start], end};
    }
    return std::nullopt;
}

/// Preparation starts at the first jerk exceedance after the calm window.
inline double detect_preparation_start(const Interval& perception) { return perception.end; }

/// First sample at or after `crossing_index` from which every following step
/// moves the LC laterally by less than the settle displacement.
inline SettleResult detect_lane_change_complete(const VehicleTrack& lc, std::size_t crossing_index, const Thresholds& th = {})
{
    th.validate();
    if (lc.x_lat.size() != lc.size() || lc.empty()) throw DataError("vehicle " + std::to_string(lc.id) + ": missing lateral position series");
    if (crossing_index >= lc.size()) throw DataError("lane-change crossing index outside the track");
    std::size_t k = crossing_index;
    for (std::size_t j = crossing_index + 1; j < lc.size(); ++j)
        if (std::abs(lc.x_lat[j] - lc.x_lat[j - 1]) >= th.lc_settle_displacement) k = j;
    const bool settled = k + 1 < lc.size();
    return {lc.t[k], k, settled};
}

/// Relaxation end from the FV-LC gap against Pipe's spacing, starting at the
/// completed lane change.
inline RelaxationResult detect_relaxation_end(const MergeScenario& sc, std::size_t complete_index, const Thresholds& th = {})
{
    th.validate();
    sc.require_aligned();
    if (complete_index >= sc.size()) throw DataError("relaxation start outside the scenario");
    const auto deviation = [&](std::size_t k) {
        return sc.fv_lc_gap(k) - pipes_distance(sc.fv.length, std::max(0.0, sc.fv.v_long[k]));
    };
    const double gap0 = sc.fv_lc_gap(complete_index);
    const double safe0 = pipes_distance(sc.fv.length, std::max(0.0, sc.fv.v_long[complete_index]));
    if (gap0 > th.cautious_factor * safe0) return {sc.fv.t[complete_index], RelaxationCase::cautious_no_relaxation};

    const double d0 = deviation(complete_index);
    if (d0 == 0.0) return {sc.fv.t[complete_index], RelaxationCase::intersection};
    for (std::size_t k = complete_index + 1; k < sc.size(); ++k) {
        const double d = deviation(k);
        if (d == 0.0 || (d > 0) != (d0 > 0)) return {sc.fv.t[k], RelaxationCase::intersection};
    }
    std::size_t best = complete_index;
    for (std::size_t k = complete_index + 1; k < sc.size(); ++k)
        if (std::abs(deviation(k)) < std::abs(deviation(best))) best = k;
    return {sc.fv.t[best], RelaxationCase::aggressive_min_deviation};
}

/// Runs the detectors in order. Stages that cannot be observed, or whose
/// result would break the boundary ordering, are left absent.
inline PhaseAnnotation annotate(const MergeScenario& sc, const Thresholds& th = {})
{
    th.validate();
    sc.require_aligned();
    PhaseAnnotation ann;
    ann.anticipation_start = detect_anticipation_start(sc.fv, th);
    if (!sc.lane_change_index) return ann;

    const auto settle = detect_lane_change_complete(sc.lc, *sc.lane_change_index, th);
    ann.lane_change_complete = settle.time;
    ann.lane_change_settled = settle.settled;
    const auto relax = detect_relaxation_end(sc, settle.index, th);
    ann.relaxation_end = relax.time;
    ann.relaxation_case = relax.kind;

    // a lateral-velocity crossing after the lane change settled does not anticipate it
    if (ann.anticipation_start && *ann.anticipation_start > settle.time + detail::time_eps) ann.anticipation_start.reset();
    if (ann.anticipation_start) {
        ann.perception = detect_perception(sc.fv, *ann.anticipation_start, settle.time, th);
        if (ann.perception) ann.preparation_start = detect_preparation_start(*ann.perception);
    }
    return ann;
}

}  // namespace lcfollow::phase
