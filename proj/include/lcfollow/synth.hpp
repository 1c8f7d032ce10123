#pragma once

// Synthetic NGSim-style merge traffic: a lane changer (LC) cuts in between a
// follower (FV) and the LC's source-lane leader (LV). The FV is driven by a
// delayed, noisy human car-following law so recorded trajectories carry the
// irregularities of real drivers.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <sstream>
#include <vector>

#include "lcfollow/ingest.hpp"
#include "lcfollow/phase.hpp"
#include "lcfollow/text.hpp"

namespace lcfollow::synth {

struct MergeEventConfig {
    double duration = 40.0;      // s
    double lane_width = 3.7;     // m
    double lc_speed = 12.0;      // m/s
    double fv_speed = 13.0;      // m/s
    double cut_in_ratio = 0.75;  // FV-LC gap at lane-boundary crossing / Pipe's spacing
    double reaction_delay = 1.0; // s, human observation delay after perception
    double accel_noise = 0.6;    // m/s^2, std of the human acceleration disturbance
    double noise_correlation = 1.0; // s
    double position_resolution = 0.001; // m, recorded position rounding
};

namespace detail {

// 0 -> 1 cosine ramp over [0, 1]
inline double ramp(double s)
{
    s = std::clamp(s, 0.0, 1.0);
    return 0.5 - 0.5 * std::cos(M_PI * s);
}

inline double quantize(double v, double step) { return std::round(v / step) * step; }

}  // namespace detail

/// Rows for one merge event. Vehicle ids are id_base+1 (LV), +2 (LC), +3 (FV).
inline std::vector<ingest::RawRow> merge_event(long long id_base, long long first_frame, std::uint64_t seed,
                                               const MergeEventConfig& cfg = {})
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const double dt = frame_period;
    const auto n = static_cast<std::size_t>(std::llround(cfg.duration / dt));

    const double source_x = 0.5 * cfg.lane_width;
    const double target_x = 1.5 * cfg.lane_width;
    const double boundary = cfg.lane_width;
    const double lc_start = 14.0 + 2.0 * uni(rng);
    const double lc_span = 3.5 + 1.0 * uni(rng);
    const double antic = lc_start - 1.2 - 0.6 * uni(rng);
    const double perception = 0.8 + 0.6 * uni(rng);
    const double len_lv = 4.3 + 0.6 * uni(rng);
    const double len_lc = 4.3 + 0.6 * uni(rng);
    const double len_fv = 4.4 + 0.8 * uni(rng);
    const double lc_speed = cfg.lc_speed + uni(rng) - 0.5;
    const double fv_speed = cfg.fv_speed + uni(rng) - 0.5;
    const double ratio = cfg.cut_in_ratio + 0.15 * (uni(rng) - 0.5);

    // LC and LV longitudinal motion: gentle speed oscillation
    const double phase_lc = 2 * M_PI * uni(rng), phase_lv = 2 * M_PI * uni(rng);
    std::vector<double> y_lc(n), v_lc(n), y_lv(n), v_lv(n), x_lc(n);
    double y = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double t = k * dt;
        v_lc[k] = lc_speed + 0.4 * std::sin(0.25 * t + phase_lc);
        y_lc[k] = y;
        y += v_lc[k] * dt;
        x_lc[k] = source_x + cfg.lane_width * detail::ramp((t - lc_start) / lc_span);
    }
    y = 20.0 + 5.0 * uni(rng);
    for (std::size_t k = 0; k < n; ++k) {
        v_lv[k] = lc_speed + 0.8 + 0.3 * std::sin(0.2 * k * dt + phase_lv);
        y_lv[k] = y;
        y += v_lv[k] * dt;
    }
    // the LC crosses into the target lane halfway through its lateral move
    const double cross_time = lc_start + 0.5 * lc_span;
    const auto cross = static_cast<std::size_t>(std::ceil(cross_time / dt));

    // FV: start so the cut-in gap is `ratio` times Pipe's spacing, assuming cruise
    const double pipes_at_cut = phase::pipes_distance(len_fv, fv_speed);
    double y_fv = y_lc[cross] - len_lc - ratio * pipes_at_cut - fv_speed * cross * dt;
    double v_fv = fv_speed;
    double a_fv = 0.0;
    double noise = 0.0;
    const double rho = std::exp(-dt / cfg.noise_correlation);
    const auto delay = static_cast<std::size_t>(std::llround(cfg.reaction_delay / dt));

    std::vector<double> ys(n), vs(n), as(n), xs(n);
    double held = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double t = k * dt;
        ys[k] = y_fv;
        vs[k] = v_fv;
        as[k] = a_fv;
        // anticipation: the FV drifts laterally away from the LC, then returns
        xs[k] = target_x + 0.35 * detail::ramp((t - antic) / 1.5) - 0.35 * detail::ramp((t - lc_start - lc_span - 2.0) / 4.0);

        double desired;
        if (t < antic) {
            desired = 0.3 * (fv_speed - v_fv);
            held = a_fv;
        } else if (t < antic + perception) {
            desired = held;  // perception: hold the pedal
        } else {
            const std::size_t j = k >= delay ? k - delay : 0;
            const double gap = y_lc[j] - ys[j] - len_lc;
            const double safe = phase::pipes_distance(len_fv, std::max(0.0, vs[j]));
            desired = 0.12 * (gap - safe) + 0.45 * (v_lc[j] - vs[j]);
        }
        noise = rho * noise + std::sqrt(1 - rho * rho) * cfg.accel_noise * gauss(rng);
        const double target_a = std::clamp(desired + (t >= antic + perception ? noise : 0.1 * noise), -3.0, 2.0);
        a_fv += (target_a - a_fv) * (1.0 - std::exp(-dt / 0.4));
        y_fv += v_fv * dt + 0.5 * a_fv * dt * dt;
        v_fv = std::max(0.0, v_fv + a_fv * dt);
    }

    const long long lv_id = id_base + 1, lc_id = id_base + 2, fv_id = id_base + 3;
    std::vector<ingest::RawRow> rows;
    rows.reserve(3 * n);
    const double y_offset = 100.0;
    for (std::size_t k = 0; k < n; ++k) {
        const long long frame = first_frame + static_cast<long long>(k);
        const bool changed = x_lc[k] >= boundary;
        ingest::RawRow lv{lv_id, frame, detail::quantize(source_x, cfg.position_resolution),
                          detail::quantize(y_offset + y_lv[k], cfg.position_resolution), v_lv[k], 0.0, 1, len_lv, 0,
                          changed ? 0 : lc_id, 0};
        ingest::RawRow lc{lc_id, frame, detail::quantize(x_lc[k], cfg.position_resolution),
                          detail::quantize(y_offset + y_lc[k], cfg.position_resolution), v_lc[k], 0.0, changed ? 2 : 1,
                          len_lc, changed ? 0 : lv_id, changed ? fv_id : 0, 0};
        ingest::RawRow fv{fv_id, frame, detail::quantize(xs[k], cfg.position_resolution),
                          detail::quantize(y_offset + ys[k], cfg.position_resolution), vs[k], as[k], 2, len_fv,
                          changed ? lc_id : 0, 0, 0};
        rows.push_back(lv);
        rows.push_back(lc);
        rows.push_back(fv);
    }
    return rows;
}

/// `events` independent merge events sharing one frame range.
inline std::vector<ingest::RawRow> merge_traffic(std::size_t events, std::uint64_t seed, const MergeEventConfig& cfg = {})
{
    std::vector<ingest::RawRow> rows;
    for (std::size_t e = 0; e < events; ++e) {
        auto part = merge_event(static_cast<long long>(10 * (e + 1)), 1000, seed + 7919 * e, cfg);
        rows.insert(rows.end(), part.begin(), part.end());
    }
    return rows;
}

inline std::string rows_to_csv(const std::vector<ingest::RawRow>& rows)
{
    using text::format_number;
    std::ostringstream out;
    for (std::size_t i = 0; i < ingest::trajectory_columns.size(); ++i) out << (i ? "," : "") << ingest::trajectory_columns[i];
    out << "\n";
    for (const auto& r : rows) {
        out << r.vehicle_id << ',' << r.frame_id << ',' << format_number(r.local_x) << ',' << format_number(r.local_y) << ','
            << format_number(r.v_vel) << ',' << format_number(r.v_acc) << ',' << r.lane_id << ',' << format_number(r.v_length)
            << ',' << r.preceding_id << ',' << r.following_id << "\n";
    }
    return out.str();
}

}  // namespace lcfollow::synth
