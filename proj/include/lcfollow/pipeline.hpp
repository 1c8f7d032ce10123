#pragma once

// Glue shared by the command-line tool and the end-to-end tests: annotate
// scenarios, turn them into a training set, and run one closed-loop
// comparison against the recorded driver.

#include <algorithm>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "lcfollow/dataset.hpp"
#include "lcfollow/metrics.hpp"
#include "lcfollow/phase.hpp"
#include "lcfollow/plant.hpp"
#include "lcfollow/track.hpp"

namespace lcfollow::pipeline {

struct AnnotatedScenario {
    MergeScenario scenario;
    phase::PhaseAnnotation annotation;
};

inline std::vector<AnnotatedScenario> annotate_all(std::vector<MergeScenario> scenarios, const phase::Thresholds& th = {})
{
    std::vector<AnnotatedScenario> out;
    out.reserve(scenarios.size());
    for (auto& sc : scenarios) {
        auto ann = phase::annotate(sc, th);
        out.push_back({std::move(sc), std::move(ann)});
    }
    return out;
}

/// Training rows of every scenario; the scenario's position is its group.
inline anfis::Dataset build_dataset(const std::vector<AnnotatedScenario>& scenarios)
{
    anfis::Dataset all;
    long long group = 0;
    for (const auto& s : scenarios) {
        auto rows = dataset::training_rows(s.scenario, s.annotation, group++);
        all.insert(all.end(), rows.begin(), rows.end());
    }
    return all;
}

/// The engagement window runs from anticipation start to relaxation end and
/// falls back to the recording edges when a boundary is missing.
struct Window {
    double start = 0.0;
    double end = 0.0;
    double completion = 0.0;  // lane-change completion, or start when absent
    double horizon() const { return end - start; }
};

inline Window engagement_window(const MergeScenario& sc, const phase::PhaseAnnotation& ann)
{
    Window w;
    w.start = ann.anticipation_start.value_or(sc.fv.t.front());
    w.end = ann.relaxation_end.value_or(sc.fv.t.back());
    if (w.end < w.start) w.end = sc.fv.t.back();
    w.completion = std::clamp(ann.lane_change_complete.value_or(w.start), w.start, w.end);
    return w;
}

/// Variances over the engagement window, Pipe's-law error over the relaxation
/// part of it (completion to relaxation end).
inline metrics::CompareOptions compare_options(const Window& w, std::optional<std::string> reference = "human")
{
    metrics::CompareOptions opt;
    opt.variance_window = {w.start, w.end};
    opt.pipes_window = {w.completion, w.end};
    opt.reference = std::move(reference);
    return opt;
}

struct Comparison {
    Window window;
    plant::SimTrace controller;
    plant::SimTrace human;
    metrics::ComparisonReport report;
};

inline Comparison compare_with_human(const AnnotatedScenario& s, const Controller& controller, plant::SimConfig cfg = {})
{
    Comparison c;
    c.window = engagement_window(s.scenario, s.annotation);
    cfg.horizon = c.window.horizon();
    c.controller = plant::simulate_closed_loop(s.scenario, controller, cfg, c.window.start);
    c.human = plant::replay_human(s.scenario, c.window.start, cfg.horizon);
    c.report = metrics::compare({{"controller", c.controller}, {"human", c.human}}, s.scenario.fv.length,
                                compare_options(c.window));
    return c;
}

}  // namespace lcfollow::pipeline
