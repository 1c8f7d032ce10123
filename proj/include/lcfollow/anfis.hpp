#pragma once

// Hybrid ANFIS training for grid-partition Takagi-Sugeno systems: batch least
// squares for the linear consequents alternated with a gradient step on the
// membership-function (premise) parameters.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "lcfollow/error.hpp"
#include "lcfollow/fis.hpp"
#include "lcfollow/membership.hpp"

namespace lcfollow::anfis {

struct TrainingSample {
    std::vector<double> x;
    double y = 0.0;
    long long group = 0;  // source maneuver; the train/validation split keeps groups whole
};

using Dataset = std::vector<TrainingSample>;

struct TrainingConfig {
    std::size_t epochs = 500;
    double learning_rate = 0.01;
    double lr_growth = 1.1;  // applied after an epoch that lowers the train RMSE
    double lr_decay = 0.9;   // applied otherwise
    double ridge = 0.0;
    std::uint64_t seed = 1;
    std::size_t mfs_per_input = 3;
    double init_jitter = 0.1;  // premise shift at initialization, fraction of the MF spacing

    void validate() const
    {
        if (epochs < 1) throw DataError("epochs must be >= 1");
        if (!(learning_rate > 0)) throw DataError("learning_rate must be > 0");
        if (!(lr_growth > 0) || !(lr_decay > 0)) throw DataError("learning-rate factors must be > 0");
        if (!(ridge >= 0)) throw DataError("ridge must be >= 0");
        if (mfs_per_input < 1) throw DataError("mfs_per_input must be >= 1");
        if (!(init_jitter >= 0)) throw DataError("init_jitter must be >= 0");
    }
};

struct EvalReport {
    double rmse = 0.0;
    std::optional<double> r_squared;  // absent when the targets have zero variance
    std::size_t samples = 0;
};

struct EpochRecord {
    std::size_t epoch = 0;  // 1-based
    double rmse_before_lse = 0.0;
    double train_rmse = 0.0;
    double validation_rmse = std::numeric_limits<double>::quiet_NaN();
    double learning_rate = 0.0;
};

struct TrainingResult {
    FuzzyInferenceSystem fis;
    std::vector<EpochRecord> history;
    std::size_t best_epoch = 0;
};

enum class SingularPolicy {
    minimum_norm,  // rank-deficient systems get the minimum-norm least-squares solution
    raise,         // rank deficiency at ridge 0 throws SingularSystemError
};

struct LseResult {
    FuzzyInferenceSystem fis;
    std::size_t rank = 0;
    std::size_t unknowns = 0;
    bool rank_deficient() const { return rank < unknowns; }
};

inline EvalReport evaluate(const FuzzyInferenceSystem& fis, std::span<const TrainingSample> data)
{
    if (data.empty()) throw DataError("evaluate needs a non-empty dataset");
    double ss_res = 0.0, mean = 0.0;
    for (const auto& s : data) mean += s.y;
    mean /= static_cast<double>(data.size());
    double ss_tot = 0.0;
    for (const auto& s : data) {
        const double r = s.y - fis.infer(s.x);
        ss_res += r * r;
        ss_tot += (s.y - mean) * (s.y - mean);
    }
    EvalReport report;
    report.samples = data.size();
    report.rmse = std::sqrt(ss_res / static_cast<double>(data.size()));
    if (ss_tot > 0.0) report.r_squared = 1.0 - ss_res / ss_tot;
    return report;
}

namespace detail {

/// Flattened view of a grid FIS used by the training passes.
class PremiseModel {
public:
    explicit PremiseModel(const FuzzyInferenceSystem& fis) : fis_(fis)
    {
        std::size_t offset = 0;
        for (const auto& v : fis.inputs()) {
            offsets_.push_back(offset);
            offset += v.mfs.size();
        }
        mf_total_ = offset;
    }

    std::size_t inputs() const { return fis_.input_count(); }
    std::size_t rules() const { return fis_.rule_count(); }
    std::size_t mf_total() const { return mf_total_; }
    std::size_t slot(std::size_t input, std::size_t mf) const { return offsets_[input] + mf; }
    const FuzzyInferenceSystem& fis() const { return fis_; }

    /// Membership degrees, row-major [sample][slot], inputs clamped to their universes.
    std::vector<double> memberships(std::span<const TrainingSample> data) const
    {
        std::vector<double> mu(data.size() * mf_total_);
        for (std::size_t s = 0; s < data.size(); ++s) {
            for (std::size_t i = 0; i < inputs(); ++i) {
                const auto& var = fis_.inputs()[i];
                const double x = var.clamp(data[s].x[i]);
                for (std::size_t j = 0; j < var.mfs.size(); ++j) mu[s * mf_total_ + slot(i, j)] = var.mfs[j](x);
            }
        }
        return mu;
    }

    /// Raw firing strengths for one sample from its membership row.
    void strengths(const double* mu_row, std::vector<double>& w) const
    {
        w.resize(rules());
        for (std::size_t r = 0; r < rules(); ++r) {
            const auto& ant = fis_.rules()[r].antecedent;
            double p = 1.0;
            for (std::size_t i = 0; i < ant.size(); ++i) p *= mu_row[slot(i, ant[i])];
            w[r] = p;
        }
    }

private:
    const FuzzyInferenceSystem& fis_;
    std::vector<std::size_t> offsets_;
    std::size_t mf_total_ = 0;
};

inline std::vector<double> clamped(const FuzzyInferenceSystem& fis, std::span<const double> x)
{
    return fis.clamp_to_universe(x);
}

/// Training-time prediction; NaN where no rule fires.
inline std::vector<double> predictions(const FuzzyInferenceSystem& fis, std::span<const TrainingSample> data)
{
    PremiseModel model(fis);
    const auto mu = model.memberships(data);
    std::vector<double> out(data.size());
    std::vector<double> w;
    for (std::size_t s = 0; s < data.size(); ++s) {
        model.strengths(&mu[s * model.mf_total()], w);
        const auto x = clamped(fis, data[s].x);
        double num = 0.0, den = 0.0;
        for (std::size_t r = 0; r < w.size(); ++r) {
            if (w[r] == 0.0) continue;
            num += w[r] * fis.rules()[r].evaluate(x);
            den += w[r];
        }
        out[s] = den > 0.0 ? num / den : std::numeric_limits<double>::quiet_NaN();
    }
    return out;
}

inline double rmse_of(const FuzzyInferenceSystem& fis, std::span<const TrainingSample> data)
{
    const auto pred = predictions(fis, data);
    double acc = 0.0;
    for (std::size_t s = 0; s < data.size(); ++s) {
        const double r = pred[s] - data[s].y;
        acc += r * r;
    }
    return std::sqrt(acc / static_cast<double>(data.size()));
}

inline FuzzyInferenceSystem with_consequents(const FuzzyInferenceSystem& fis, const Eigen::VectorXd& theta)
{
    const std::size_t width = fis.input_count() + 1;
    auto rules = fis.rules();
    for (std::size_t r = 0; r < rules.size(); ++r)
        for (std::size_t k = 0; k < width; ++k) rules[r].consequent[k] = theta[static_cast<Eigen::Index>(r * width + k)];
    return {fis.inputs(), fis.output_name(), std::move(rules)};
}

inline void check_batch(const FuzzyInferenceSystem& fis, std::span<const TrainingSample> batch)
{
    if (batch.empty()) throw DataError("training batch is empty");
    for (const auto& s : batch) {
        if (s.x.size() != fis.input_count()) throw DataError("sample dimension does not match the FIS inputs");
        if (!std::isfinite(s.y)) throw DataError("non-finite training target");
        for (double v : s.x)
            if (!std::isfinite(v)) throw DataError("non-finite training input");
    }
}

}  // namespace detail

/// Jointly refits every rule's linear consequent by (ridge-)least squares on
/// the normalized-firing-strength design matrix; premises stay fixed.
inline LseResult lse_consequents(const FuzzyInferenceSystem& fis, std::span<const TrainingSample> batch, double ridge,
                                 SingularPolicy policy = SingularPolicy::minimum_norm)
{
    detail::check_batch(fis, batch);
    if (!(ridge >= 0)) throw DataError("ridge must be >= 0");
    const detail::PremiseModel model(fis);
    const std::size_t n = fis.input_count();
    const std::size_t width = n + 1;
    const auto cols = static_cast<Eigen::Index>(fis.rule_count() * width);
    const auto rows = static_cast<Eigen::Index>(batch.size());

    const auto mu = model.memberships(batch);
    Eigen::MatrixXd design = Eigen::MatrixXd::Zero(rows, cols);
    Eigen::VectorXd target(rows);
    std::vector<double> w;
    for (std::size_t s = 0; s < batch.size(); ++s) {
        model.strengths(&mu[s * model.mf_total()], w);
        double total = 0.0;
        for (double v : w) total += v;
        const auto row = static_cast<Eigen::Index>(s);
        target[row] = batch[s].y;
        if (!(total > 0.0)) continue;
        const auto x = fis.clamp_to_universe(batch[s].x);
        for (std::size_t r = 0; r < w.size(); ++r) {
            const double wn = w[r] / total;
            const auto base = static_cast<Eigen::Index>(r * width);
            for (std::size_t k = 0; k < n; ++k) design(row, base + static_cast<Eigen::Index>(k)) = wn * x[k];
            design(row, base + static_cast<Eigen::Index>(n)) = wn;
        }
    }

    Eigen::VectorXd theta;
    std::size_t rank = static_cast<std::size_t>(cols);
    if (ridge > 0.0) {
        Eigen::MatrixXd normal = Eigen::MatrixXd::Zero(cols, cols);
        normal.selfadjointView<Eigen::Lower>().rankUpdate(design.transpose());
        normal.diagonal().array() += ridge;
        Eigen::VectorXd rhs = design.transpose() * target;
        Eigen::LDLT<Eigen::MatrixXd> ldlt(normal.selfadjointView<Eigen::Lower>());
        if (ldlt.info() != Eigen::Success) throw SingularSystemError("ridge-regularized normal matrix factorization failed");
        theta = ldlt.solve(rhs);
    } else {
        Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(design);
        rank = static_cast<std::size_t>(cod.rank());
        if (rank < static_cast<std::size_t>(cols) && policy == SingularPolicy::raise) {
            throw SingularSystemError("least-squares normal matrix is singular (rank " + std::to_string(rank) + " of " +
                                      std::to_string(cols) + "); use a positive ridge");
        }
        theta = cod.solve(target);
    }
    if (!theta.allFinite()) throw NumericalError("least-squares consequents are not finite; use a positive ridge");
    return {detail::with_consequents(fis, theta), rank, static_cast<std::size_t>(cols)};
}

/// Gradient of the batch MSE with respect to every MF parameter, laid out
/// per input, per MF, in parameter order. Gaussian parameters are
/// differentiated analytically; the other families use a central finite
/// difference of the membership function itself.
inline std::vector<std::vector<std::vector<double>>> premise_gradient(const FuzzyInferenceSystem& fis,
                                                                      std::span<const TrainingSample> batch)
{
    detail::check_batch(fis, batch);
    const detail::PremiseModel model(fis);
    const std::size_t n = fis.input_count();
    const std::size_t slots = model.mf_total();
    const auto mu = model.memberships(batch);
    const auto inv_n = 1.0 / static_cast<double>(batch.size());

    // dE/dmu per sample and slot
    std::vector<double> dmu(batch.size() * slots, 0.0);
    std::vector<double> w, f(fis.rule_count());
    for (std::size_t s = 0; s < batch.size(); ++s) {
        const double* row = &mu[s * slots];
        model.strengths(row, w);
        double total = 0.0;
        for (double v : w) total += v;
        if (!(total > 0.0)) continue;
        const auto x = fis.clamp_to_universe(batch[s].x);
        double out = 0.0;
        for (std::size_t r = 0; r < w.size(); ++r) {
            f[r] = fis.rules()[r].evaluate(x);
            out += w[r] * f[r];
        }
        out /= total;
        const double de_dout = 2.0 * (out - batch[s].y) * inv_n;
        for (std::size_t r = 0; r < w.size(); ++r) {
            const auto& ant = fis.rules()[r].antecedent;
            const double dout_dw = (f[r] - out) / total;
            for (std::size_t i = 0; i < n; ++i) {
                double others = 1.0;
                for (std::size_t k = 0; k < n; ++k)
                    if (k != i) others *= row[model.slot(k, ant[k])];
                dmu[s * slots + model.slot(i, ant[i])] += de_dout * dout_dw * others;
            }
        }
    }

    std::vector<std::vector<std::vector<double>>> grad(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& var = fis.inputs()[i];
        grad[i].resize(var.mfs.size());
        for (std::size_t j = 0; j < var.mfs.size(); ++j) {
            const auto& mf = var.mfs[j];
            auto& g = grad[i][j];
            g.assign(mf.params().size(), 0.0);
            std::vector<double> p(mf.params().begin(), mf.params().end());
            for (std::size_t s = 0; s < batch.size(); ++s) {
                const double upstream = dmu[s * slots + model.slot(i, j)];
                if (upstream == 0.0) continue;
                const double x = var.clamp(batch[s].x[i]);
                if (mf.family() == MfFamily::gaussian) {
                    const auto d = MembershipFunction::gaussian_gradient(p, x);
                    g[0] += upstream * d[0];
                    g[1] += upstream * d[1];
                    continue;
                }
                for (std::size_t k = 0; k < p.size(); ++k) {
                    const double orig = p[k];
                    const double h = 1e-6 * std::max(1.0, std::abs(orig));
                    p[k] = orig + h;
                    const double up = MembershipFunction::evaluate(mf.family(), p, x);
                    p[k] = orig - h;
                    const double down = MembershipFunction::evaluate(mf.family(), p, x);
                    p[k] = orig;
                    g[k] += upstream * (up - down) / (2.0 * h);
                }
            }
        }
    }
    return grad;
}

/// One steepest-descent step on the premise parameters with the consequents
/// held fixed. The step has Euclidean length `learning_rate` along the
/// negative gradient; a vanishing gradient leaves the premises unchanged.
/// Parameters leaving the admissible region are projected back.
inline FuzzyInferenceSystem premise_gradient_step(const FuzzyInferenceSystem& fis, std::span<const TrainingSample> batch,
                                                  double learning_rate)
{
    if (!(learning_rate > 0)) throw DataError("learning_rate must be > 0");
    auto grad = premise_gradient(fis, batch);
    double norm2 = 0.0;
    for (const auto& per_input : grad)
        for (const auto& per_mf : per_input)
            for (double g : per_mf) norm2 += g * g;
    const double norm = std::sqrt(norm2);
    if (!std::isfinite(norm)) throw NumericalError("premise gradient is not finite");
    if (norm < 1e-15) return fis;
    for (auto& per_input : grad)
        for (auto& per_mf : per_input)
            for (double& g : per_mf) g /= norm;
    auto inputs = fis.inputs();
    for (std::size_t i = 0; i < inputs.size(); ++i) {
        for (std::size_t j = 0; j < inputs[i].mfs.size(); ++j) {
            const auto& mf = inputs[i].mfs[j];
            std::vector<double> p(mf.params().begin(), mf.params().end());
            for (std::size_t k = 0; k < p.size(); ++k) {
                p[k] -= learning_rate * grad[i][j][k];
                if (!std::isfinite(p[k])) {
                    throw NumericalError("premise update produced a non-finite value for input '" + inputs[i].name + "' MF " +
                                         std::to_string(j) + " parameter " + std::to_string(k));
                }
            }
            MembershipFunction::project(mf.family(), p);
            inputs[i].mfs[j] = MembershipFunction(mf.family(), std::move(p));
        }
    }
    return {std::move(inputs), fis.output_name(), fis.rules()};
}

/// Grid-partition starting point: universes from the data range, evenly
/// spaced MFs shifted by a seeded jitter. Pass every sample the system must
/// cover (train and validation) so held-out inputs are not clamped.
inline FuzzyInferenceSystem initial_fis(std::span<const TrainingSample> data, std::span<const std::string> input_names,
                                        const std::string& output_name, MfFamily family, const TrainingConfig& cfg)
{
    if (data.empty()) throw DataError("cannot initialize a FIS from an empty dataset");
    const std::size_t n = data.front().x.size();
    if (input_names.size() != n) throw DataError("input name count does not match the sample dimension");
    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    std::vector<FuzzyVariable> inputs;
    for (std::size_t i = 0; i < n; ++i) {
        double lo = data.front().x[i], hi = lo;
        for (const auto& s : data) {
            lo = std::min(lo, s.x[i]);
            hi = std::max(hi, s.x[i]);
        }
        if (!(hi - lo > 1e-9)) {
            lo -= 0.5;
            hi += 0.5;
        }
        auto var = make_grid_variable(input_names[i], lo, hi, cfg.mfs_per_input, family);
        const double spacing = cfg.mfs_per_input > 1 ? (hi - lo) / static_cast<double>(cfg.mfs_per_input - 1) : hi - lo;
        for (auto& mf : var.mfs) {
            const double shift = cfg.init_jitter * spacing * unit(rng);
            std::vector<double> p(mf.params().begin(), mf.params().end());
            switch (family) {
            case MfFamily::triangular:
            case MfFamily::trapezoidal:
            case MfFamily::pi_shaped:
                for (double& v : p) v += shift;
                break;
            case MfFamily::generalized_bell: p[2] += shift; break;
            case MfFamily::gaussian: p[1] += shift; break;
            case MfFamily::gaussian_combination:
            case MfFamily::diff_sigmoid:
            case MfFamily::prod_sigmoid:
                p[1] += shift;
                p[3] += shift;
                break;
            }
            mf = MembershipFunction(family, std::move(p));
        }
        inputs.push_back(std::move(var));
    }
    return make_grid_fis(std::move(inputs), output_name);
}

/// Runs `cfg.epochs` hybrid epochs (least squares, then a premise step) and
/// returns the system with the lowest validation RMSE; the train RMSE is used
/// for selection when no validation data is given.
inline TrainingResult train(const FuzzyInferenceSystem& start, std::span<const TrainingSample> train_set,
                            std::span<const TrainingSample> validation_set, const TrainingConfig& cfg)
{
    cfg.validate();
    detail::check_batch(start, train_set);
    if (!validation_set.empty()) detail::check_batch(start, validation_set);

    TrainingResult result{start, {}, 0};
    result.history.reserve(cfg.epochs);
    FuzzyInferenceSystem current = start;
    double lr = cfg.learning_rate;
    double best = std::numeric_limits<double>::infinity();
    double previous_train = std::numeric_limits<double>::infinity();

    for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
        EpochRecord rec;
        rec.epoch = epoch;
        rec.learning_rate = lr;
        rec.rmse_before_lse = detail::rmse_of(current, train_set);
        current = lse_consequents(current, train_set, cfg.ridge).fis;
        rec.train_rmse = detail::rmse_of(current, train_set);
        if (!std::isfinite(rec.train_rmse)) {
            throw NumericalError("non-finite training loss at epoch " + std::to_string(epoch) +
                                 " (a training sample fires no rule or a consequent overflowed)");
        }
        if (!validation_set.empty()) rec.validation_rmse = detail::rmse_of(current, validation_set);
        const double score = validation_set.empty() ? rec.train_rmse : rec.validation_rmse;
        if (std::isfinite(score) && score < best) {
            best = score;
            result.fis = current;
            result.best_epoch = epoch;
        }
        result.history.push_back(rec);

        lr *= rec.train_rmse < previous_train ? cfg.lr_growth : cfg.lr_decay;
        previous_train = rec.train_rmse;
        if (epoch < cfg.epochs) current = premise_gradient_step(current, train_set, lr);
    }
    if (result.best_epoch == 0) throw NumericalError("validation loss was never finite; no system selected");
    return result;
}

struct FamilyRow {
    MfFamily family = MfFamily::gaussian;
    double mean_rmse = std::numeric_limits<double>::quiet_NaN();
    double mean_r_squared = std::numeric_limits<double>::quiet_NaN();
    std::size_t runs = 0;
    std::size_t failed_runs = 0;
    std::string failure;  // first failure message
    bool failed() const { return failed_runs > 0; }
};

/// Trains every MF family `runs` times with seeds seed, seed+1, ... and
/// averages the held-out RMSE and R^2.
inline std::vector<FamilyRow> mf_family_comparison(std::span<const TrainingSample> train_set,
                                                   std::span<const TrainingSample> validation_set,
                                                   std::span<const std::string> input_names, const TrainingConfig& cfg,
                                                   std::size_t runs = 10,
                                                   std::span<const MfFamily> families = all_mf_families)
{
    cfg.validate();
    if (runs < 1) throw DataError("runs must be >= 1");
    const auto held_out = validation_set.empty() ? train_set : validation_set;
    Dataset coverage(train_set.begin(), train_set.end());
    coverage.insert(coverage.end(), validation_set.begin(), validation_set.end());
    std::vector<FamilyRow> table;
    for (auto family : families) {
        FamilyRow row;
        row.family = family;
        row.runs = runs;
        double rmse_sum = 0.0, r2_sum = 0.0;
        for (std::size_t run = 0; run < runs; ++run) {
            auto run_cfg = cfg;
            run_cfg.seed = cfg.seed + run;
            try {
                const auto start = initial_fis(coverage, input_names, "y", family, run_cfg);
                const auto trained = train(start, train_set, validation_set, run_cfg);
                const auto report = evaluate(trained.fis, held_out);
                rmse_sum += report.rmse;
                r2_sum += report.r_squared.value_or(std::numeric_limits<double>::quiet_NaN());
            } catch (const Error& e) {
                if (row.failed_runs++ == 0) row.failure = e.what();
            }
        }
        if (!row.failed()) {
            row.mean_rmse = rmse_sum / static_cast<double>(runs);
            row.mean_r_squared = r2_sum / static_cast<double>(runs);
        }
        table.push_back(row);
    }
    return table;
}

/// Deterministic 75/25-style split that keeps each group (maneuver) whole.
/// Groups are taken in order of first appearance; with a single group the
/// split falls back to rows. Every k-th unit goes to validation so the
/// validation share approximates 1 - train_fraction.
inline std::pair<Dataset, Dataset> split_dataset(std::span<const TrainingSample> data, double train_fraction = 0.75)
{
    if (!(train_fraction > 0 && train_fraction <= 1)) throw DataError("train_fraction must be in (0, 1]");
    std::vector<long long> groups;
    for (const auto& s : data)
        if (std::find(groups.begin(), groups.end(), s.group) == groups.end()) groups.push_back(s.group);
    const double hold = 1.0 - train_fraction;
    auto is_validation = [hold](std::size_t k) {
        return std::floor(static_cast<double>(k + 1) * hold + 1e-9) > std::floor(static_cast<double>(k) * hold + 1e-9);
    };
    Dataset train_set, validation_set;
    if (groups.size() > 1) {
        for (const auto& s : data) {
            const auto k = static_cast<std::size_t>(std::find(groups.begin(), groups.end(), s.group) - groups.begin());
            (is_validation(k) ? validation_set : train_set).push_back(s);
        }
    } else {
        for (std::size_t k = 0; k < data.size(); ++k) (is_validation(k) ? validation_set : train_set).push_back(data[k]);
    }
    return {std::move(train_set), std::move(validation_set)};
}

}  // namespace lcfollow::anfis
