#pragma once

// Fixtures shared by the unit and acceptance tests.

#include <cmath>
#include <random>
#include <vector>

#include "lcfollow/anfis.hpp"
#include "lcfollow/fis.hpp"
#include "lcfollow/track.hpp"

namespace lcfollow::fixtures {

/// Track with every series present, sampled at t = k / 10 for k in [0, n).
inline VehicleTrack blank_track(long long id, std::size_t n, double length = 4.5)
{
    VehicleTrack tr;
    tr.id = id;
    tr.length = length;
    for (std::size_t k = 0; k < n; ++k) tr.t.push_back(static_cast<double>(k) / 10.0);
    for (auto* s : {&tr.x_lat, &tr.y_long, &tr.v_lat, &tr.v_long, &tr.a_lat, &tr.a_long, &tr.a_tot, &tr.jerk, &tr.v_recorded,
                    &tr.a_recorded})
        s->assign(n, 0.0);
    for (auto* s : {&tr.lane_id, &tr.preceding_id, &tr.following_id}) s->assign(n, 0);
    return tr;
}

/// Scenario with known boundaries: anticipation 4.0 s, perception
/// [6.0, 7.0] s, preparation 7.0 s, lane-change completion 9.0 s and
/// relaxation end 12.0 s. The FV drives at 4.47 m/s with L = 5 m, so Pipe's
/// spacing is 10 m; the gap falls from 14 m at 9 s by 4/3 m/s.
inline MergeScenario known_boundary_scenario()
{
    constexpr std::size_t n = 201;
    MergeScenario sc;
    sc.id = "known";
    sc.source = "constructed";
    sc.fv = blank_track(3, n, 5.0);
    sc.lc = blank_track(2, n, 4.0);
    sc.lv = blank_track(1, n, 4.0);
    for (std::size_t k = 0; k < n; ++k) {
        const double t = sc.fv.t[k];
        sc.fv.v_lat[k] = t >= 4.0 - 1e-9 ? 0.3 : 0.0;
        const bool calm = t < 4.0 - 1e-9 || (t >= 6.0 - 1e-9 && t < 7.0 - 1e-9);
        sc.fv.jerk[k] = calm ? 0.0 : 1.0;
        sc.fv.v_long[k] = 4.47;
        sc.fv.y_long[k] = 4.47 * t;
        const double gap = t <= 9.0 ? 14.0 : 14.0 - 4.0 / 3.0 * (t - 9.0);
        sc.lc.y_long[k] = sc.fv.y_long[k] + gap + sc.lc.length;
        sc.lc.v_long[k] = 4.47 - (t > 9.0 ? 4.0 / 3.0 : 0.0);
        // lateral move from 3.7 m to 0 m between 7 s and 9 s
        sc.lc.x_lat[k] = t <= 7.0 ? 3.7 : t >= 9.0 ? 0.0 : 3.7 * (9.0 - t) / 2.0;
        sc.lv.y_long[k] = sc.lc.y_long[k] + 30.0;
        sc.lv.v_long[k] = 4.47;
    }
    sc.lane_change_index = 80;
    return sc;
}

/// Grid FIS over [-1, 1]^inputs with gaussian MFs near the default grid and
/// seeded random consequents.
inline FuzzyInferenceSystem generator_fis(std::size_t inputs, std::uint64_t seed)
{
    std::vector<FuzzyVariable> vars;
    for (std::size_t i = 0; i < inputs; ++i) {
        FuzzyVariable v{"x" + std::to_string(i + 1), -1.0, 1.0, {}};
        v.mfs = {MembershipFunction(MfFamily::gaussian, {0.42, -1.0}), MembershipFunction(MfFamily::gaussian, {0.42, 0.05}),
                 MembershipFunction(MfFamily::gaussian, {0.42, 1.0})};
        vars.push_back(std::move(v));
    }
    auto grid = make_grid_fis(vars, "y");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> coef(-2.0, 2.0);
    auto rules = grid.rules();
    for (auto& r : rules)
        for (auto& c : r.consequent) c = coef(rng);
    return {vars, "y", rules};
}

inline anfis::Dataset sample_fis(const FuzzyInferenceSystem& fis, std::size_t rows, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    anfis::Dataset data;
    for (std::size_t r = 0; r < rows; ++r) {
        std::vector<double> x;
        for (const auto& v : fis.inputs()) x.push_back(std::uniform_real_distribution<double>(v.lo, v.hi)(rng));
        const double y = fis.infer(x);
        data.push_back({std::move(x), y, 0});
    }
    return data;
}

/// Random grid-complete FIS: 1 to 3 inputs, 1 to 3 MFs per input of random
/// families placed on an even grid, random consequents.
inline FuzzyInferenceSystem random_fis(std::mt19937_64& rng)
{
    std::uniform_int_distribution<std::size_t> count(1, 3), fam(0, all_mf_families.size() - 1);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<FuzzyVariable> vars;
    const std::size_t n = count(rng);
    for (std::size_t i = 0; i < n; ++i) {
        const double lo = -10.0 + 10.0 * unit(rng);
        const double hi = lo + 0.5 + 10.0 * unit(rng);
        const std::size_t m = count(rng);
        FuzzyVariable v{"in" + std::to_string(i), lo, hi, {}};
        for (std::size_t j = 0; j < m; ++j) v.mfs.push_back(MembershipFunction::grid_member(all_mf_families[fam(rng)], lo, hi, m, j));
        vars.push_back(std::move(v));
    }
    auto grid = make_grid_fis(vars, "y");
    auto rules = grid.rules();
    std::uniform_real_distribution<double> coef(-5.0, 5.0);
    for (auto& r : rules)
        for (auto& c : r.consequent) c = coef(rng);
    return {vars, "y", rules};
}

}  // namespace lcfollow::fixtures
