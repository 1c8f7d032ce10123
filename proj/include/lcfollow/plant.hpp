#pragma once

// Two-vehicle string: follower with first-order driveline lag behind a
// leader whose velocity is taken from a recording,
//
//   d' = v0 - v,   v' = a,   a' = (u - a) / tau,
//
// discretized exactly under a zero-order hold on u and v0.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "lcfollow/controller.hpp"
#include "lcfollow/error.hpp"
#include "lcfollow/text.hpp"
#include "lcfollow/track.hpp"

namespace lcfollow::plant {

struct PlantState {
    double d = 0.0;  // gap to the leader, m (negative means collision)
    double v = 0.0;  // follower velocity, m/s
    double a = 0.0;  // follower acceleration, m/s^2
    friend bool operator==(const PlantState&, const PlantState&) = default;
};

struct SimConfig {
    double ts = 0.1;
    double tau = 0.1;
    double horizon = std::numeric_limits<double>::infinity();  // s; clipped to the recording
    double u_min = -4.0;
    double u_max = 4.0;

    void validate() const
    {
        if (!(ts > 0)) throw DataError("sampling interval must be > 0");
        if (!(tau > 0)) throw DataError("driveline time constant must be > 0");
        if (!(horizon >= 0)) throw DataError("horizon must be >= 0");
        if (!(u_min < u_max)) throw DataError("actuator bounds require u_min < u_max");
    }
};

struct TracePoint {
    double t = 0.0;
    PlantState state;
    double u = 0.0;
    double v0 = 0.0;
    double x_fv = 0.0;  // follower position along the road
};

struct SimTrace {
    std::vector<TracePoint> points;

    std::size_t size() const { return points.size(); }
    bool collided() const
    {
        return std::any_of(points.begin(), points.end(), [](const TracePoint& p) { return p.state.d < 0; });
    }
    template <typename F>
    std::vector<double> column(F&& get) const
    {
        std::vector<double> out;
        out.reserve(points.size());
        for (const auto& p : points) out.push_back(get(p));
        return out;
    }
    std::vector<double> times() const { return column([](const TracePoint& p) { return p.t; }); }
    std::vector<double> velocities() const { return column([](const TracePoint& p) { return p.state.v; }); }
    std::vector<double> accelerations() const { return column([](const TracePoint& p) { return p.state.a; }); }
    std::vector<double> gaps() const { return column([](const TracePoint& p) { return p.state.d; }); }
    std::vector<double> positions() const { return column([](const TracePoint& p) { return p.x_fv; }); }
};

namespace detail {

inline void require_finite(std::initializer_list<double> values, const char* what)
{
    for (double v : values)
        if (!std::isfinite(v)) throw DataError(std::string("plant_step: non-finite ") + what);
}

}  // namespace detail

/// Distance the follower travels during one step.
inline double step_displacement(const PlantState& s, double u, const SimConfig& cfg)
{
    const double e = std::exp(-cfg.ts / cfg.tau);
    return s.v * cfg.ts + 0.5 * u * cfg.ts * cfg.ts + (s.a - u) * cfg.tau * (cfg.ts - cfg.tau * (1.0 - e));
}

inline PlantState plant_step(const PlantState& s, double v0, double u, const SimConfig& cfg)
{
    detail::require_finite({s.d, s.v, s.a}, "state");
    detail::require_finite({v0, u}, "input");
    const double e = std::exp(-cfg.ts / cfg.tau);
    PlantState next;
    next.a = u + (s.a - u) * e;
    next.v = s.v + u * cfg.ts + (s.a - u) * cfg.tau * (1.0 - e);
    next.d = s.d + v0 * cfg.ts - step_displacement(s, u, cfg);
    return next;
}

/// Closed loop over the recorded scenario from `start_time` for cfg.horizon
/// seconds (clipped to the recording). The LC is the leader; the plant starts
/// from the recorded FV state. Controller inputs combine the recorded FV
/// lateral motion and LC lateral offset with the fed-back gap and the jerk of
/// the plant's total acceleration.
inline SimTrace simulate_closed_loop(const MergeScenario& sc, const Controller& controller, const SimConfig& cfg,
                                     std::optional<double> start_time = std::nullopt)
{
    cfg.validate();
    sc.require_aligned();
    if (std::abs(cfg.ts - frame_period) > 1e-12) throw DataError("scenario replay requires ts equal to the recording period");
    const std::size_t k0 = start_time ? sc.fv.index_at(*start_time).value_or(sc.size()) : 0;
    if (k0 >= sc.size()) throw DataError("simulation start lies outside the scenario");
    std::size_t steps = sc.size() - 1 - k0;
    if (std::isfinite(cfg.horizon)) steps = std::min(steps, static_cast<std::size_t>(std::llround(cfg.horizon / cfg.ts)));

    PlantState state{sc.fv_lc_gap(k0), sc.fv.v_long[k0], sc.fv.a_long[k0]};
    double x = sc.fv.y_long[k0];
    double prev_a_tot = std::hypot(state.a, sc.fv.a_lat[k0]);
    SimTrace trace;
    trace.points.reserve(steps + 1);
    for (std::size_t j = 0; j <= steps; ++j) {
        const std::size_t k = k0 + j;
        const double a_tot = std::hypot(state.a, sc.fv.a_lat[k]);
        const double jerk = j == 0 ? sc.fv.jerk[k] : (a_tot - prev_a_tot) / cfg.ts;
        prev_a_tot = a_tot;
        const ControllerInputs in{sc.fv.v_lat[k], std::abs(jerk), state.d, sc.fv_lc_lateral(k)};
        double u = 0.0;
        try {
            u = controller.acceleration(in);
        } catch (const Error& e) {
            throw NumericalError("controller failed at step " + std::to_string(j) + " (t = " + text::format_number(sc.fv.t[k]) +
                                 "): " + e.what());
        }
        if (!std::isfinite(u)) throw NumericalError("controller returned a non-finite command at step " + std::to_string(j));
        u = std::clamp(u, cfg.u_min, cfg.u_max);
        const double v0 = sc.lc.v_long[k];
        trace.points.push_back({sc.fv.t[k], state, u, v0, x});
        if (j == steps) break;
        x += step_displacement(state, u, cfg);
        state = plant_step(state, v0, u, cfg);
    }
    return trace;
}

/// The recorded FV expressed as a trace on the same grid; u carries the
/// recorded longitudinal acceleration.
inline SimTrace replay_human(const MergeScenario& sc, std::optional<double> start_time = std::nullopt,
                             double horizon = std::numeric_limits<double>::infinity())
{
    sc.require_aligned();
    const std::size_t k0 = start_time ? sc.fv.index_at(*start_time).value_or(sc.size()) : 0;
    if (k0 >= sc.size()) throw DataError("replay start lies outside the scenario");
    std::size_t steps = sc.size() - 1 - k0;
    if (std::isfinite(horizon)) steps = std::min(steps, static_cast<std::size_t>(std::llround(horizon / frame_period)));
    SimTrace trace;
    for (std::size_t k = k0; k <= k0 + steps; ++k) {
        trace.points.push_back({sc.fv.t[k], {sc.fv_lc_gap(k), sc.fv.v_long[k], sc.fv.a_long[k]}, sc.fv.a_long[k], sc.lc.v_long[k],
                                sc.fv.y_long[k]});
    }
    return trace;
}

inline constexpr std::string_view trace_header = "t,d,v,a,u,v0,x_fv";

inline std::string trace_to_csv(const SimTrace& trace)
{
    using text::format_number;
    std::ostringstream out;
    out << trace_header << "\n";
    for (const auto& p : trace.points) {
        out << format_number(p.t) << ',' << format_number(p.state.d) << ',' << format_number(p.state.v) << ','
            << format_number(p.state.a) << ',' << format_number(p.u) << ',' << format_number(p.v0) << ','
            << format_number(p.x_fv) << "\n";
    }
    return out.str();
}

inline SimTrace trace_from_csv(std::istream& in, const std::string& source)
{
    const auto table = text::parse_numeric_csv(in, source);
    std::string expected(trace_header);
    std::string got;
    for (std::size_t i = 0; i < table.header.size(); ++i) got += (i ? "," : "") + table.header[i];
    if (got != expected) throw DataError(source + ": trace header must be '" + expected + "', found '" + got + "'");
    SimTrace trace;
    for (const auto& r : table.rows) trace.points.push_back({r[0], {r[1], r[2], r[3]}, r[4], r[5], r[6]});
    return trace;
}

inline SimTrace load_trace(const std::string& path)
{
    auto in = text::open_input(path);
    return trace_from_csv(in, path);
}

}  // namespace lcfollow::plant
