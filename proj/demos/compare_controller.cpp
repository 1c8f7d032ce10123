// Runs a trained controller through one recorded merge and prints how it
// compares with the recorded driver.
//
//   compare_controller <scenario-bundle> <controller.fis>

#include <cstdio>

#include "lcfollow/controller.hpp"
#include "lcfollow/fis_io.hpp"
#include "lcfollow/metrics.hpp"
#include "lcfollow/pipeline.hpp"
#include "lcfollow/scenario_io.hpp"

using namespace lcfollow;

int main(int argc, char** argv)
{
    if (argc != 3) {
        std::fprintf(stderr, "usage: %s <scenario-bundle> <controller.fis>\n", argv[0]);
        return 1;
    }
    try {
        const auto scenario = bundle::read_scenario(argv[1]);
        const auto annotated = pipeline::annotate_all({scenario});

        const FisController controller(load_fis(argv[2]));
        const auto result = pipeline::compare_with_human(annotated.front(), controller, {});

        for (const auto& row : result.report.rows)
            std::printf("%s: velocity variance %.3f, mean Pipe's error %.3f m\n", row.subject.c_str(), row.velocity_variance,
                        row.mean_abs_pipes_error);
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
}
