#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>

#include "lcfollow/dataset.hpp"
#include "lcfollow/ingest.hpp"
#include "lcfollow/scenario_io.hpp"
#include "lcfollow/synth.hpp"
#include "support.hpp"

using namespace lcfollow;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name)
{
    const auto dir = fs::temp_directory_path() / ("lcfollow_io_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

void expect_same_track(const VehicleTrack& a, const VehicleTrack& b)
{
    EXPECT_EQ(a.id, b.id);
    EXPECT_EQ(a.length, b.length);
    EXPECT_EQ(a.t, b.t);
    EXPECT_EQ(a.x_lat, b.x_lat);
    EXPECT_EQ(a.y_long, b.y_long);
    EXPECT_EQ(a.v_lat, b.v_lat);
    EXPECT_EQ(a.v_long, b.v_long);
    EXPECT_EQ(a.a_long, b.a_long);
    EXPECT_EQ(a.a_tot, b.a_tot);
    EXPECT_EQ(a.jerk, b.jerk);
    EXPECT_EQ(a.lane_id, b.lane_id);
}

}  // namespace

TEST(Bundle, ScenarioRoundTrip)
{
    const auto ex = ingest::extract_merge_scenarios(ingest::build_tracks(synth::merge_event(10, 1000, 5)));
    ASSERT_EQ(ex.scenarios.size(), 1u);
    const auto& sc = ex.scenarios.front();
    const auto root = scratch_dir("bundle");
    bundle::write_scenario(root / sc.id, sc);
    const auto listed = bundle::list_scenarios(root);
    ASSERT_EQ(listed.size(), 1u);
    const auto back = bundle::read_scenario(listed.front());
    EXPECT_EQ(back.id, sc.id);
    EXPECT_EQ(back.lane_change_index, sc.lane_change_index);
    expect_same_track(back.fv, sc.fv);
    expect_same_track(back.lc, sc.lc);
    expect_same_track(back.lv, sc.lv);
    fs::remove_all(root);
}

TEST(Bundle, MissingDirectoryIsReported)
{
    EXPECT_THROW(bundle::read_scenario(fs::temp_directory_path() / "lcfollow_io_absent"), DataError);
}

TEST(Annotations, CsvRoundTrip)
{
    const auto full = phase::annotate(fixtures::known_boundary_scenario());
    phase::PhaseAnnotation empty;
    const auto dir = scratch_dir("ann");
    const auto path = (dir / "a.csv").string();
    text::write_file(path, std::string(bundle::annotation_header) + "\n" + bundle::annotation_row("full", full) +
                               bundle::annotation_row("empty", empty));
    const auto back = bundle::read_annotations(path);
    ASSERT_EQ(back.size(), 2u);
    const auto& f = back.at("full");
    EXPECT_EQ(f.anticipation_start, full.anticipation_start);
    ASSERT_TRUE(f.perception);
    EXPECT_EQ(f.perception->start, full.perception->start);
    EXPECT_EQ(f.perception->end, full.perception->end);
    EXPECT_EQ(f.preparation_start, full.preparation_start);
    EXPECT_EQ(f.lane_change_complete, full.lane_change_complete);
    EXPECT_EQ(f.lane_change_settled, full.lane_change_settled);
    EXPECT_EQ(f.relaxation_end, full.relaxation_end);
    EXPECT_EQ(f.relaxation_case, full.relaxation_case);
    const auto& e = back.at("empty");
    EXPECT_FALSE(e.anticipation_start || e.perception || e.lane_change_complete || e.relaxation_end || e.relaxation_case);

    text::write_file(path, "wrong,header\n");
    EXPECT_THROW(bundle::read_annotations(path), DataError);
    fs::remove_all(dir);
}

TEST(Dataset, CsvRoundTrip)
{
    const auto sc = fixtures::known_boundary_scenario();
    const auto rows = dataset::training_rows(sc, phase::annotate(sc), 7);
    ASSERT_EQ(rows.size(), 81u);  // 4.0 s to 12.0 s inclusive
    std::istringstream in(dataset::to_csv(rows));
    const auto back = dataset::from_csv(in, "mem");
    ASSERT_EQ(back.size(), rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        EXPECT_EQ(back[i].x, rows[i].x);
        EXPECT_EQ(back[i].y, rows[i].y);
        EXPECT_EQ(back[i].group, 7);
    }
}

TEST(Dataset, ColumnsByNameAndOptionalGroup)
{
    std::istringstream in("accel_target,dlat,dlong,jerk,vlat\n0.5,4,3,2,1\n");
    const auto d = dataset::from_csv(in, "mem");
    ASSERT_EQ(d.size(), 1u);
    EXPECT_EQ(d[0].x, (std::vector<double>{1, 2, 3, 4}));
    EXPECT_EQ(d[0].y, 0.5);
    EXPECT_EQ(d[0].group, 0);
    std::istringstream missing("vlat,jerk,dlong,accel_target\n1,2,3,4\n");
    EXPECT_THROW(dataset::from_csv(missing, "mem"), DataError);
}
