#include <gtest/gtest.h>

#include <sstream>

#include "lcfollow/controller.hpp"
#include "lcfollow/plant.hpp"
#include "support.hpp"

using namespace lcfollow;
using plant::PlantState;
using plant::SimConfig;

namespace {

// Fine RK4 integration of a' = (u - a) / tau, v' = a, x' = v over one step.
struct Fine {
    double x, v, a;
};

Fine rk4(Fine s, double u, double ts, double tau, int n = 2000)
{
    const double h = ts / n;
    auto f = [&](const Fine& q) { return Fine{q.v, q.a, (u - q.a) / tau}; };
    for (int i = 0; i < n; ++i) {
        const Fine k1 = f(s);
        const Fine k2 = f({s.x + h / 2 * k1.x, s.v + h / 2 * k1.v, s.a + h / 2 * k1.a});
        const Fine k3 = f({s.x + h / 2 * k2.x, s.v + h / 2 * k2.v, s.a + h / 2 * k2.a});
        const Fine k4 = f({s.x + h * k3.x, s.v + h * k3.v, s.a + h * k3.a});
        s.x += h / 6 * (k1.x + 2 * k2.x + 2 * k3.x + k4.x);
        s.v += h / 6 * (k1.v + 2 * k2.v + 2 * k3.v + k4.v);
        s.a += h / 6 * (k1.a + 2 * k2.a + 2 * k3.a + k4.a);
    }
    return s;
}

MergeScenario steady_scenario()
{
    auto sc = fixtures::known_boundary_scenario();
    for (std::size_t k = 0; k < sc.size(); ++k) {
        sc.lc.v_long[k] = 4.47;
        sc.lc.y_long[k] = sc.fv.y_long[k] + 14.0 + sc.lc.length;
    }
    return sc;
}

}  // namespace

TEST(PlantStep, AccelerationResponse)
{
    const auto s = plant::plant_step({10.0, 5.0, 0.0}, 5.0, 1.0, {});
    EXPECT_NEAR(s.a, 1.0 - std::exp(-1.0), 1e-15);
    EXPECT_NEAR(s.a, 0.63212, 1e-5);
}

TEST(PlantStep, GapGrowsWithLeaderSpeed)
{
    const auto s = plant::plant_step({10.0, 3.0, 0.0}, 5.0, 0.0, {});
    EXPECT_NEAR(s.d, 10.2, 1e-12);
    EXPECT_DOUBLE_EQ(s.v, 3.0);
}

TEST(PlantStep, EquilibriumIsFixed)
{
    const PlantState s0{12.0, 7.0, 0.0};
    const auto s = plant::plant_step(s0, 7.0, 0.0, {});
    EXPECT_DOUBLE_EQ(s.d, s0.d);
    EXPECT_DOUBLE_EQ(s.v, s0.v);
    EXPECT_DOUBLE_EQ(s.a, s0.a);
}

TEST(PlantStep, MatchesFineIntegration)
{
    for (double tau : {0.05, 0.1, 0.5}) {
        SimConfig cfg;
        cfg.tau = tau;
        const PlantState s0{20.0, 8.0, -0.7};
        const double u = 1.3, v0 = 9.0;
        const auto s = plant::plant_step(s0, v0, u, cfg);
        const auto f = rk4({0.0, s0.v, s0.a}, u, cfg.ts, tau);
        EXPECT_NEAR(s.a, f.a, 1e-12);
        EXPECT_NEAR(s.v, f.v, 1e-12);
        EXPECT_NEAR(plant::step_displacement(s0, u, cfg), f.x, 1e-12);
        EXPECT_NEAR(s.d, s0.d + v0 * cfg.ts - f.x, 1e-12);
    }
}

TEST(PlantStep, RejectsNonFiniteValues)
{
    EXPECT_THROW(plant::plant_step({NAN, 0, 0}, 1.0, 0.0, {}), DataError);
    EXPECT_THROW(plant::plant_step({1, 0, 0}, 1.0, INFINITY, {}), DataError);
}

TEST(ClosedLoop, ZeroHorizonGivesInitialState)
{
    const auto sc = steady_scenario();
    SimConfig cfg;
    cfg.horizon = 0.0;
    const auto tr = plant::simulate_closed_loop(sc, ConstantController(0.0), cfg, 5.0);
    ASSERT_EQ(tr.size(), 1u);
    EXPECT_DOUBLE_EQ(tr.points[0].t, 5.0);
    EXPECT_DOUBLE_EQ(tr.points[0].state.d, 14.0);
}

TEST(ClosedLoop, SteadyFollowingKeepsSpacing)
{
    const auto sc = steady_scenario();
    const auto tr = plant::simulate_closed_loop(sc, ConstantController(0.0), {});
    EXPECT_EQ(tr.size(), sc.size());
    for (const auto& p : tr.points) EXPECT_NEAR(p.state.d, 14.0, 1e-9);
    EXPECT_FALSE(tr.collided());
}

TEST(ClosedLoop, HorizonAndPositionsAreConsistent)
{
    const auto sc = steady_scenario();
    SimConfig cfg;
    cfg.horizon = 3.0;
    const auto tr = plant::simulate_closed_loop(sc, ConstantController(0.5), cfg, 2.0);
    ASSERT_EQ(tr.size(), 31u);
    EXPECT_NEAR(tr.points.back().t, 5.0, 1e-9);
    for (std::size_t k = 1; k < tr.size(); ++k) {
        const double moved = tr.points[k].x_fv - tr.points[k - 1].x_fv;
        const double leader = tr.points[k - 1].v0 * cfg.ts;
        EXPECT_NEAR(tr.points[k].state.d - tr.points[k - 1].state.d, leader - moved, 1e-9);
    }
}

TEST(ClosedLoop, CommandIsClamped)
{
    const auto tr = plant::simulate_closed_loop(steady_scenario(), ConstantController(100.0), {});
    for (const auto& p : tr.points) EXPECT_EQ(p.u, 4.0);
}

TEST(ClosedLoop, CollisionIsFlagged)
{
    EXPECT_TRUE(plant::simulate_closed_loop(steady_scenario(), ConstantController(4.0), {}).collided());
}

TEST(ClosedLoop, Errors)
{
    const auto sc = steady_scenario();
    SimConfig cfg;
    cfg.ts = 0.2;
    EXPECT_THROW(plant::simulate_closed_loop(sc, ConstantController(0.0), cfg), DataError);
    EXPECT_THROW(plant::simulate_closed_loop(sc, ConstantController(0.0), {}, 99.0), DataError);

    int calls = 0;
    const FunctionController failing([&](const ControllerInputs&) -> double {
        if (calls++ == 5) throw DataError("boom");
        return 0.0;
    });
    try {
        plant::simulate_closed_loop(sc, failing, {});
        FAIL() << "expected NumericalError";
    } catch (const NumericalError& e) {
        EXPECT_NE(std::string(e.what()).find("step 5"), std::string::npos);
    }
    const FunctionController nan_out([](const ControllerInputs&) { return NAN; });
    EXPECT_THROW(plant::simulate_closed_loop(sc, nan_out, {}), NumericalError);
}

TEST(Replay, FollowsRecordingGrid)
{
    const auto sc = steady_scenario();
    const auto tr = plant::replay_human(sc, 3.0, 2.0);
    ASSERT_EQ(tr.size(), 21u);
    for (std::size_t k = 0; k < tr.size(); ++k) {
        EXPECT_NEAR(tr.points[k].t, 3.0 + 0.1 * static_cast<double>(k), 1e-9);
        EXPECT_NEAR(tr.points[k].state.d, 14.0, 1e-9);
        EXPECT_DOUBLE_EQ(tr.points[k].state.v, 4.47);
    }
}

TEST(Trace, CsvRoundTrip)
{
    const auto tr = plant::simulate_closed_loop(steady_scenario(), ConstantController(0.3), {});
    std::istringstream in(plant::trace_to_csv(tr));
    const auto back = plant::trace_from_csv(in, "mem");
    ASSERT_EQ(back.size(), tr.size());
    for (std::size_t k = 0; k < tr.size(); ++k) {
        EXPECT_EQ(back.points[k].t, tr.points[k].t);
        EXPECT_EQ(back.points[k].state.d, tr.points[k].state.d);
        EXPECT_EQ(back.points[k].state.v, tr.points[k].state.v);
        EXPECT_EQ(back.points[k].state.a, tr.points[k].state.a);
        EXPECT_EQ(back.points[k].u, tr.points[k].u);
        EXPECT_EQ(back.points[k].x_fv, tr.points[k].x_fv);
    }
    std::istringstream bad("t,d,v\n0,1,2\n");
    EXPECT_THROW(plant::trace_from_csv(bad, "mem"), DataError);
}
