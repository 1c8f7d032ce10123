#pragma once

// First-order Takagi-Sugeno inference: product t-norm over the antecedent
// memberships, weighted average of the linear rule consequents.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "lcfollow/error.hpp"
#include "lcfollow/membership.hpp"

namespace lcfollow {

struct FuzzyVariable {
    std::string name;
    double lo = 0.0;
    double hi = 1.0;
    std::vector<MembershipFunction> mfs;

    double clamp(double x) const { return std::clamp(x, lo, hi); }
    friend bool operator==(const FuzzyVariable&, const FuzzyVariable&) = default;
};

struct Rule {
    std::vector<std::size_t> antecedent;  // one MF index per input
    std::vector<double> consequent;       // p_1..p_n, r

    /// p . x + r
    double evaluate(std::span<const double> x) const
    {
        double acc = consequent.back();
        for (std::size_t i = 0; i < x.size(); ++i) acc += consequent[i] * x[i];
        return acc;
    }
    friend bool operator==(const Rule&, const Rule&) = default;
};

class FuzzyInferenceSystem {
public:
    FuzzyInferenceSystem() = default;

    FuzzyInferenceSystem(std::vector<FuzzyVariable> inputs, std::string output_name, std::vector<Rule> rules)
        : inputs_(std::move(inputs)), output_name_(std::move(output_name)), rules_(std::move(rules))
    {
        validate();
    }

    const std::vector<FuzzyVariable>& inputs() const noexcept { return inputs_; }
    const std::string& output_name() const noexcept { return output_name_; }
    const std::vector<Rule>& rules() const noexcept { return rules_; }
    std::size_t input_count() const noexcept { return inputs_.size(); }
    std::size_t rule_count() const noexcept { return rules_.size(); }

    /// True when the rules cover every combination of input MFs exactly once.
    bool is_grid_complete() const
    {
        std::size_t product = 1;
        for (const auto& v : inputs_) product *= v.mfs.size();
        return product == rules_.size();
    }

    std::vector<double> clamp_to_universe(std::span<const double> x) const
    {
        require_dimension(x);
        std::vector<double> out(x.begin(), x.end());
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = inputs_[i].clamp(out[i]);
        return out;
    }

    /// Product of the rule's antecedent memberships at x (no clamping).
    double firing_strength(const Rule& rule, std::span<const double> x) const
    {
        require_dimension(x);
        double w = 1.0;
        for (std::size_t i = 0; i < x.size(); ++i) w *= inputs_[i].mfs[rule.antecedent[i]](x[i]);
        return w;
    }

    std::vector<double> firing_strengths(std::span<const double> x) const
    {
        std::vector<double> w(rules_.size());
        for (std::size_t r = 0; r < rules_.size(); ++r) w[r] = firing_strength(rules_[r], x);
        return w;
    }

    /// Firing strengths divided by their sum; x is clamped first.
    std::vector<double> normalized_strengths(std::span<const double> x) const
    {
        const auto xc = clamp_to_universe(x);
        auto w = firing_strengths(xc);
        const double total = std::accumulate(w.begin(), w.end(), 0.0);
        if (!(total > 0.0)) throw NoRuleFiresError("no rule fires at the given input");
        for (double& v : w) v /= total;
        return w;
    }

    /// Crisp output. Inputs outside a universe are clamped to its bounds.
    double infer(std::span<const double> x) const
    {
        const auto xc = clamp_to_universe(x);
        double num = 0.0, den = 0.0;
        for (const auto& rule : rules_) {
            const double w = firing_strength(rule, xc);
            if (w == 0.0) continue;
            num += w * rule.evaluate(xc);
            den += w;
        }
        if (!(den > 0.0)) throw NoRuleFiresError("no rule fires at the given input");
        return num / den;
    }

    friend bool operator==(const FuzzyInferenceSystem&, const FuzzyInferenceSystem&) = default;

private:
    void require_dimension(std::span<const double> x) const
    {
        if (x.size() != inputs_.size()) {
            throw DataError("input dimension " + std::to_string(x.size()) + " does not match the " +
                            std::to_string(inputs_.size()) + " FIS inputs");
        }
    }

    void validate() const
    {
        if (inputs_.empty()) throw DataError("FIS needs at least one input variable");
        for (const auto& v : inputs_) {
            if (!(v.lo < v.hi)) throw DataError("input '" + v.name + "' has an empty universe");
            if (v.mfs.empty()) throw DataError("input '" + v.name + "' has no membership functions");
        }
        if (rules_.empty()) throw DataError("FIS rule list is empty");
        std::set<std::vector<std::size_t>> seen;
        for (std::size_t r = 0; r < rules_.size(); ++r) {
            const auto& rule = rules_[r];
            const auto where = "rule " + std::to_string(r);
            if (rule.antecedent.size() != inputs_.size()) throw DataError(where + ": antecedent length mismatch");
            if (rule.consequent.size() != inputs_.size() + 1) throw DataError(where + ": consequent needs n+1 coefficients");
            for (std::size_t i = 0; i < inputs_.size(); ++i) {
                if (rule.antecedent[i] >= inputs_[i].mfs.size()) throw DataError(where + ": MF index out of range");
            }
            for (double c : rule.consequent)
                if (!std::isfinite(c)) throw DataError(where + ": non-finite consequent");
            if (!seen.insert(rule.antecedent).second) throw DataError(where + ": duplicate antecedent");
        }
    }

    std::vector<FuzzyVariable> inputs_;
    std::string output_name_ = "y";
    std::vector<Rule> rules_;
};

/// Every MF combination, enumerated with the last input varying fastest.
inline std::vector<std::vector<std::size_t>> grid_antecedents(std::span<const FuzzyVariable> inputs)
{
    std::vector<std::vector<std::size_t>> out;
    std::vector<std::size_t> idx(inputs.size(), 0);
    while (true) {
        out.push_back(idx);
        bool carry = true;
        for (std::size_t k = inputs.size(); carry && k > 0;) {
            --k;
            if (++idx[k] < inputs[k].mfs.size()) carry = false;
            else idx[k] = 0;
        }
        if (carry) return out;
    }
}

/// Grid-partition FIS with all consequents set to zero.
inline FuzzyInferenceSystem make_grid_fis(std::vector<FuzzyVariable> inputs, std::string output_name)
{
    std::vector<Rule> rules;
    for (auto& ant : grid_antecedents(inputs)) rules.push_back({std::move(ant), std::vector<double>(inputs.size() + 1, 0.0)});
    return {std::move(inputs), std::move(output_name), std::move(rules)};
}

/// Evenly spaced partition of [lo, hi] into `count` sets of one family.
inline FuzzyVariable make_grid_variable(std::string name, double lo, double hi, std::size_t count, MfFamily family)
{
    FuzzyVariable v{std::move(name), lo, hi, {}};
    for (std::size_t k = 0; k < count; ++k) v.mfs.push_back(MembershipFunction::grid_member(family, lo, hi, count, k));
    return v;
}

}  // namespace lcfollow
