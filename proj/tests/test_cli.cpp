#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>

#include "lcfollow/text.hpp"

namespace fs = std::filesystem;
using lcfollow::text::read_file;
using lcfollow::text::write_file;

namespace {

const std::string data_dir = LCFOLLOW_DATA_DIR;

struct Outcome {
    int code;
    std::string output;
};

class Cli : public ::testing::Test {
protected:
    static inline fs::path dir;

    static void SetUpTestSuite()
    {
        dir = fs::temp_directory_path() / "lcfollow_cli_test";
        fs::remove_all(dir);
        fs::create_directories(dir);
        const auto r = invoke("ingest --input " + data_dir + "/sample_3veh.csv --out " + path("bundles"));
        ASSERT_EQ(r.code, 0) << r.output;
        ASSERT_EQ(invoke("detect --scenarios " + path("bundles") + " --out " + path("ann.csv") + " --dataset " + path("ds.csv")).code, 0);
    }
    static void TearDownTestSuite() { fs::remove_all(dir); }

    static std::string path(const std::string& name) { return (dir / name).string(); }

    static Outcome invoke(const std::string& args)
    {
        const std::string log = path("last.log");
        const int status = std::system((std::string(LCFOLLOW_CLI) + " " + args + " > " + log + " 2>&1").c_str());
        return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, fs::exists(log) ? read_file(log) : ""};
    }

    static std::string bundle() { return path("bundles/lc12_f1174"); }
};

}  // namespace

TEST_F(Cli, IngestWritesBundles)
{
    EXPECT_TRUE(fs::exists(fs::path(bundle()) / "scenario.json"));
    EXPECT_TRUE(fs::exists(path("bundles/run.ini")));
}

TEST_F(Cli, IngestOfHeaderOnlyFileFindsNothing)
{
    write_file(path("empty.csv"), "vehicle_id,frame_id,local_x,local_y,v_vel,v_acc,lane_id,v_length,preceding_id,following_id\n");
    const auto r = invoke("ingest --input " + path("empty.csv") + " --out " + path("empty_out"));
    EXPECT_EQ(r.code, 0) << r.output;
    EXPECT_NE(r.output.find("0 scenario"), std::string::npos) << r.output;
}

TEST_F(Cli, IngestReportsMissingColumns)
{
    write_file(path("bad.csv"), "vehicle_id,frame_id\n1,1\n");
    const auto r = invoke("ingest --input " + path("bad.csv") + " --out " + path("bad_out"));
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.output.find("missing column"), std::string::npos) << r.output;
}

TEST_F(Cli, DetectIsDeterministic)
{
    ASSERT_EQ(invoke("detect --scenarios " + path("bundles") + " --out " + path("ann2.csv")).code, 0);
    EXPECT_EQ(read_file(path("ann.csv")), read_file(path("ann2.csv")));
}

TEST_F(Cli, TrainWritesOneHistoryRowPerEpoch)
{
    const auto r = invoke("train --dataset " + path("ds.csv") + " --out " + path("one.fis") + " --epochs 1");
    ASSERT_EQ(r.code, 0) << r.output;
    std::size_t lines = 0;
    for (char c : read_file(path("one.fis.history.csv"))) lines += c == '\n';
    EXPECT_EQ(lines, 2u);
}

TEST_F(Cli, TrainIsReproducibleForASeed)
{
    ASSERT_EQ(invoke("--seed 5 train --dataset " + path("ds.csv") + " --out " + path("a.fis") + " --epochs 3").code, 0);
    ASSERT_EQ(invoke("--seed 5 train --dataset " + path("ds.csv") + " --out " + path("b.fis") + " --epochs 3").code, 0);
    EXPECT_EQ(read_file(path("a.fis")), read_file(path("b.fis")));
}

TEST_F(Cli, SnapshotReproducesRun)
{
    ASSERT_EQ(invoke("--seed 9 train --dataset " + path("ds.csv") + " --out " + path("s.fis") + " --epochs 2").code, 0);
    const auto first = read_file(path("s.fis"));
    ASSERT_EQ(invoke("--config " + path("s.fis.run.ini") + " train").code, 0);
    EXPECT_EQ(read_file(path("s.fis")), first);
}

TEST_F(Cli, MissingFisFailsWithoutOutputs)
{
    const auto r = invoke("simulate --scenario " + bundle() + " --fis " + path("absent.fis") + " --out " + path("none.csv"));
    EXPECT_NE(r.code, 0);
    EXPECT_FALSE(fs::exists(path("none.csv")));
}

TEST_F(Cli, SimulateAndEvaluate)
{
    ASSERT_EQ(invoke("simulate --scenario " + bundle() + " --constant 0 --out " + path("c.csv") + " --replay-out " + path("h.csv")).code, 0);
    const auto r = invoke("evaluate --trace const=" + path("c.csv") + " --trace human=" + path("h.csv") + " --scenario " + bundle() +
                       " --annotations " + path("ann.csv") + " --reference human --out " + path("rep.csv"));
    ASSERT_EQ(r.code, 0) << r.output;
    const auto rep = read_file(path("rep.csv"));
    EXPECT_EQ(rep.rfind("subject,velocity_variance,", 0), 0u);
    EXPECT_NE(rep.find("\nconst,"), std::string::npos);
    EXPECT_NE(rep.find("\nhuman,"), std::string::npos);
    EXPECT_TRUE(fs::exists(path("rep.csv.plot.csv")));
}

TEST_F(Cli, UnknownFlagIsAUsageError)
{
    EXPECT_EQ(invoke("train --dataset x --out y --bogus 1").code, 1);
    EXPECT_EQ(invoke("").code, 1);
}
