#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "lcfollow/anfis.hpp"
#include "support.hpp"

using namespace lcfollow;

namespace {

FuzzyInferenceSystem zero_consequents(const FuzzyInferenceSystem& fis)
{
    auto rules = fis.rules();
    for (auto& r : rules) std::fill(r.consequent.begin(), r.consequent.end(), 0.0);
    return {fis.inputs(), fis.output_name(), rules};
}

double rmse(const FuzzyInferenceSystem& fis, const anfis::Dataset& d) { return anfis::evaluate(fis, d).rmse; }

const std::vector<std::string> two_names{"x1", "x2"};

}  // namespace

TEST(Lse, RecoversGeneratorConsequents)
{
    const auto gen = fixtures::generator_fis(2, 3);
    const auto data = fixtures::sample_fis(gen, 300, 4);
    const auto fit = anfis::lse_consequents(zero_consequents(gen), data, 0.0);
    EXPECT_FALSE(fit.rank_deficient());
    for (std::size_t r = 0; r < gen.rule_count(); ++r)
        for (std::size_t k = 0; k < 3; ++k) EXPECT_NEAR(fit.fis.rules()[r].consequent[k], gen.rules()[r].consequent[k], 1e-8);
    EXPECT_LT(rmse(fit.fis, data), 1e-8);
}

TEST(Lse, IdenticalSamplesAreMatchedExactly)
{
    const auto gen = fixtures::generator_fis(2, 3);
    const anfis::Dataset data(20, anfis::TrainingSample{{0.3, -0.2}, 1.25, 0});
    const auto fit = anfis::lse_consequents(zero_consequents(gen), data, 0.0);
    EXPECT_TRUE(fit.rank_deficient());
    EXPECT_NEAR(fit.fis.infer(std::vector<double>{0.3, -0.2}), 1.25, 1e-12);
}

TEST(Lse, SingularSystemCanBeRefused)
{
    const auto gen = fixtures::generator_fis(2, 3);
    const anfis::Dataset data(20, anfis::TrainingSample{{0.3, -0.2}, 1.25, 0});
    EXPECT_THROW(anfis::lse_consequents(gen, data, 0.0, anfis::SingularPolicy::raise), SingularSystemError);
    EXPECT_NO_THROW(anfis::lse_consequents(gen, data, 1e-3, anfis::SingularPolicy::raise));
}

TEST(Lse, LargeRidgeShrinksConsequentsToZero)
{
    const auto gen = fixtures::generator_fis(2, 3);
    const auto data = fixtures::sample_fis(gen, 100, 4);
    const auto fit = anfis::lse_consequents(gen, data, 1e12);
    for (const auto& r : fit.fis.rules())
        for (double c : r.consequent) EXPECT_LT(std::abs(c), 1e-9);
}

TEST(Lse, NeverRaisesRmseWithoutRidge)
{
    std::mt19937_64 rng(12);
    for (int trial = 0; trial < 40; ++trial) {
        const auto fis = fixtures::random_fis(rng);
        anfis::Dataset data;
        std::normal_distribution<double> noise(0.0, 1.0);
        for (int s = 0; s < 60; ++s) {
            std::vector<double> x;
            for (const auto& v : fis.inputs()) x.push_back(std::uniform_real_distribution<double>(v.lo, v.hi)(rng));
            data.push_back({x, noise(rng), 0});
        }
        const double before = rmse(fis, data);
        const double after = rmse(anfis::lse_consequents(fis, data, 0.0).fis, data);
        EXPECT_LE(after, before + 1e-12);
    }
}

TEST(Lse, RejectsBadInput)
{
    const auto gen = fixtures::generator_fis(2, 3);
    EXPECT_THROW(anfis::lse_consequents(gen, anfis::Dataset{}, 0.0), DataError);
    EXPECT_THROW(anfis::lse_consequents(gen, anfis::Dataset{{{1.0}, 0.0, 0}}, 0.0), DataError);
    EXPECT_THROW(anfis::lse_consequents(gen, fixtures::sample_fis(gen, 10, 1), -1.0), DataError);
}

TEST(PremiseStep, ZeroErrorLeavesParametersUnchanged)
{
    const auto gen = fixtures::generator_fis(2, 3);
    const auto data = fixtures::sample_fis(gen, 50, 4);
    EXPECT_EQ(anfis::premise_gradient_step(gen, data, 0.1), gen);
}

// One input, two gaussian sets, constant consequents 0 and 1. At x = 0.5
// with both widths 0.5 the output is 0.5 above the target 0, so
// dE/dsigma_A = 2 (out - y) * (-w_B / (w_A + w_B)^2) * w_A (x - c_A)^2 / sigma_A^3 < 0
// and the step must widen set A.
TEST(PremiseStep, SigmaMovesAgainstHandDerivedGradient)
{
    const FuzzyInferenceSystem fis(
        {FuzzyVariable{"x", -1, 2, {MembershipFunction(MfFamily::gaussian, {0.5, 0.0}), MembershipFunction(MfFamily::gaussian, {0.5, 1.0})}}},
        "y", {Rule{{0}, {0, 0}}, Rule{{1}, {0, 1}}});
    const anfis::Dataset one{{{0.5}, 0.0, 0}};
    const double wa = std::exp(-0.5), wb = std::exp(-0.5), out = 0.5;
    const double expected = 2 * (out - 0.0) * (-wb / ((wa + wb) * (wa + wb))) * wa * 0.25 / 0.125;
    const auto g = anfis::premise_gradient(fis, one);
    EXPECT_NEAR(g[0][0][0], expected, 1e-12);
    const auto stepped = anfis::premise_gradient_step(fis, one, 0.01);
    EXPECT_GT(stepped.inputs()[0].mfs[0].params()[0], 0.5);
}

TEST(PremiseStep, FiniteDifferenceFamiliesMatchLossDifferences)
{
    for (auto family : all_mf_families) {
        if (family == MfFamily::gaussian) continue;
        anfis::TrainingConfig cfg;
        cfg.mfs_per_input = 3;
        auto data = fixtures::sample_fis(fixtures::generator_fis(2, 8), 40, 9);
        auto fis = anfis::initial_fis(data, two_names, "y", family, cfg);
        fis = anfis::lse_consequents(fis, data, 1e-6).fis;
        const auto g = anfis::premise_gradient(fis, data);
        auto mse = [&](const FuzzyInferenceSystem& f) { return std::pow(rmse(f, data), 2); };
        // Check the centre parameter of the middle set of the first input.
        const std::size_t k = family == MfFamily::generalized_bell ? 2 : 1;
        auto inputs = fis.inputs();
        std::vector<double> p(inputs[0].mfs[1].params().begin(), inputs[0].mfs[1].params().end());
        const double h = 1e-5;
        auto shifted = [&](double delta) {
            auto q = p;
            q[k] += delta;
            auto in = inputs;
            in[0].mfs[1] = MembershipFunction(family, q);
            return FuzzyInferenceSystem(in, "y", fis.rules());
        };
        const double fd = (mse(shifted(h)) - mse(shifted(-h))) / (2 * h);
        EXPECT_NEAR(g[0][1][k], fd, 1e-4 * std::max(1.0, std::abs(fd))) << mf_family_name(family);
    }
}

TEST(PremiseStep, ProjectionKeepsSigmaPositive)
{
    const FuzzyInferenceSystem fis(
        {FuzzyVariable{"x", -1, 2, {MembershipFunction(MfFamily::gaussian, {1e-3, 0.0}), MembershipFunction(MfFamily::gaussian, {0.5, 1.0})}}},
        "y", {Rule{{0}, {0, 0}}, Rule{{1}, {0, 1}}});
    const anfis::Dataset data{{{0.0}, 5.0, 0}, {{0.9}, -3.0, 0}};
    const auto stepped = anfis::premise_gradient_step(fis, data, 10.0);
    for (const auto& mf : stepped.inputs()[0].mfs) EXPECT_GE(mf.params()[0], min_width);
}

TEST(Train, ConstantTargetIsAbsorbedInFirstEpoch)
{
    anfis::Dataset data;
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(-1, 1);
    for (int i = 0; i < 80; ++i) data.push_back({{u(rng), u(rng)}, 0.7, i % 8});
    anfis::TrainingConfig cfg;
    cfg.epochs = 5;
    const auto [tr, va] = anfis::split_dataset(data);
    const auto res = anfis::train(anfis::initial_fis(data, two_names, "y", MfFamily::gaussian, cfg), tr, va, cfg);
    EXPECT_EQ(res.history.size(), 5u);
    EXPECT_LT(res.history.front().train_rmse, 1e-12);
}

TEST(Train, OneEpochGivesOneHistoryRow)
{
    const auto data = fixtures::sample_fis(fixtures::generator_fis(2, 1), 100, 2);
    anfis::TrainingConfig cfg;
    cfg.epochs = 1;
    const auto res = anfis::train(anfis::initial_fis(data, two_names, "y", MfFamily::gaussian, cfg), data, {}, cfg);
    ASSERT_EQ(res.history.size(), 1u);
    EXPECT_EQ(res.best_epoch, 1u);
}

TEST(Train, BitReproducibleForSeed)
{
    const auto data = fixtures::sample_fis(fixtures::generator_fis(2, 1), 120, 2);
    const auto [tr, va] = anfis::split_dataset(data);
    anfis::TrainingConfig cfg;
    cfg.epochs = 30;
    cfg.seed = 77;
    auto run = [&] { return anfis::train(anfis::initial_fis(data, two_names, "y", MfFamily::gaussian, cfg), tr, va, cfg).fis; };
    EXPECT_EQ(run(), run());
    auto other = cfg;
    other.seed = 78;
    EXPECT_NE(anfis::initial_fis(data, two_names, "y", MfFamily::gaussian, cfg),
              anfis::initial_fis(data, two_names, "y", MfFamily::gaussian, other));
}

TEST(Train, ConfigValidation)
{
    anfis::TrainingConfig cfg;
    cfg.epochs = 0;
    EXPECT_THROW(cfg.validate(), DataError);
    cfg = {};
    cfg.learning_rate = 0;
    EXPECT_THROW(cfg.validate(), DataError);
    cfg = {};
    cfg.ridge = -1;
    EXPECT_THROW(cfg.validate(), DataError);
}

TEST(Evaluate, PerfectAndMeanPredictors)
{
    const auto gen = fixtures::generator_fis(2, 1);
    const auto data = fixtures::sample_fis(gen, 50, 2);
    const auto perfect = anfis::evaluate(gen, data);
    EXPECT_NEAR(perfect.rmse, 0.0, 1e-15);
    EXPECT_NEAR(*perfect.r_squared, 1.0, 1e-15);

    double mean = 0;
    for (const auto& s : data) mean += s.y;
    mean /= static_cast<double>(data.size());
    const FuzzyInferenceSystem constant({FuzzyVariable{"x1", -1, 1, {MembershipFunction(MfFamily::gaussian, {1, 0})}},
                                         FuzzyVariable{"x2", -1, 1, {MembershipFunction(MfFamily::gaussian, {1, 0})}}},
                                        "y", {Rule{{0, 0}, {0, 0, mean}}});
    EXPECT_NEAR(*anfis::evaluate(constant, data).r_squared, 0.0, 1e-12);

    anfis::Dataset flat(10, anfis::TrainingSample{{0.1, 0.1}, 2.0, 0});
    EXPECT_FALSE(anfis::evaluate(constant, flat).r_squared.has_value());
    EXPECT_THROW(anfis::evaluate(constant, anfis::Dataset{}), DataError);
}

TEST(Evaluate, RmseIgnoresSampleOrder)
{
    const auto gen = fixtures::generator_fis(2, 1);
    auto data = fixtures::sample_fis(gen, 60, 2);
    const auto other = fixtures::generator_fis(2, 9);
    const double a = anfis::evaluate(other, data).rmse;
    std::reverse(data.begin(), data.end());
    EXPECT_NEAR(anfis::evaluate(other, data).rmse, a, 1e-14);
}

TEST(Split, KeepsGroupsWholeEveryFourthToValidation)
{
    anfis::Dataset data;
    for (long long g = 0; g < 8; ++g)
        for (int i = 0; i < 3; ++i) data.push_back({{0.0}, 0.0, 100 + g});
    const auto [tr, va] = anfis::split_dataset(data);
    EXPECT_EQ(tr.size(), 18u);
    EXPECT_EQ(va.size(), 6u);
    for (const auto& s : va) EXPECT_TRUE(s.group == 103 || s.group == 107);
}

TEST(Split, SingleGroupSplitsRows)
{
    anfis::Dataset data(100, anfis::TrainingSample{{0.0}, 0.0, 0});
    const auto [tr, va] = anfis::split_dataset(data);
    EXPECT_EQ(tr.size(), 75u);
    EXPECT_EQ(va.size(), 25u);
}

TEST(Comparison, DeterministicAndCoversAllFamilies)
{
    const auto data = fixtures::sample_fis(fixtures::generator_fis(2, 5), 120, 17);
    const auto [tr, va] = anfis::split_dataset(data);
    anfis::TrainingConfig cfg;
    cfg.epochs = 10;
    const auto a = anfis::mf_family_comparison(tr, va, two_names, cfg, 2);
    const auto b = anfis::mf_family_comparison(tr, va, two_names, cfg, 2);
    ASSERT_EQ(a.size(), 8u);
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_EQ(a[i].family, all_mf_families[i]);
        EXPECT_EQ(a[i].runs, 2u);
        if (std::isnan(a[i].mean_rmse))
            EXPECT_TRUE(std::isnan(b[i].mean_rmse));
        else
            EXPECT_EQ(a[i].mean_rmse, b[i].mean_rmse);
    }
}
