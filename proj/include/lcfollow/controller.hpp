#pragma once

#include <array>
#include <functional>
#include <utility>

#include "lcfollow/fis.hpp"

namespace lcfollow {

/// The four follower-controller inputs.
struct ControllerInputs {
    double vlat = 0.0;   // FV lateral velocity, m/s
    double jerk = 0.0;   // |d a_tot / dt| of the FV, m/s^3
    double dlong = 0.0;  // FV-LC longitudinal gap, m
    double dlat = 0.0;   // LC-FV lateral offset, m

    std::array<double, 4> as_array() const { return {vlat, jerk, dlong, dlat}; }
};

inline const std::array<const char*, 4> controller_input_names{"vlat", "jerk", "dlong", "dlat"};

/// Maps controller inputs to a commanded acceleration (m/s^2). Baseline
/// controllers for comparison plug in here.
class Controller {
public:
    virtual ~Controller() = default;
    virtual double acceleration(const ControllerInputs& in) const = 0;
};

class FisController final : public Controller {
public:
    explicit FisController(FuzzyInferenceSystem fis) : fis_(std::move(fis))
    {
        if (fis_.input_count() != 4) throw DataError("controller FIS must have exactly 4 inputs");
    }
    double acceleration(const ControllerInputs& in) const override
    {
        const auto x = in.as_array();
        return fis_.infer(x);
    }
    const FuzzyInferenceSystem& fis() const { return fis_; }

private:
    FuzzyInferenceSystem fis_;
};

class ConstantController final : public Controller {
public:
    explicit ConstantController(double u) : u_(u) {}
    double acceleration(const ControllerInputs&) const override { return u_; }

private:
    double u_;
};

/// Adapts any callable, e.g. a hand-written baseline law.
class FunctionController final : public Controller {
public:
    explicit FunctionController(std::function<double(const ControllerInputs&)> f) : f_(std::move(f)) {}
    double acceleration(const ControllerInputs& in) const override { return f_(in); }

private:
    std::function<double(const ControllerInputs&)> f_;
};

}  // namespace lcfollow
