// lcfollow: command-line front end for the lane-change follower pipeline.
//
//   ingest      trajectory CSV -> scenario bundles
//   detect      scenario bundles -> phase annotations (+ training dataset)
//   train       dataset -> FIS file + training history
//   compare-mfs dataset -> membership-family comparison table
//   simulate    scenario + FIS -> closed-loop trace (+ human replay)
//   evaluate    traces -> comparison report + plot data
//   synth       synthetic trajectory CSV in the ingest schema
//
// Exit codes: 0 success, 1 usage, 2 data error, 3 numerical failure.
// Outputs are assembled in memory and written only after a subcommand
// succeeds, so a failed run leaves nothing behind.

#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#if __has_include(<CLI/CLI.hpp>)
#include <CLI/CLI.hpp>
#else
#include <CLI11.hpp>
#endif

#include "lcfollow/anfis.hpp"
#include "lcfollow/controller.hpp"
#include "lcfollow/dataset.hpp"
#include "lcfollow/fis_io.hpp"
#include "lcfollow/ingest.hpp"
#include "lcfollow/metrics.hpp"
#include "lcfollow/phase.hpp"
#include "lcfollow/pipeline.hpp"
#include "lcfollow/plant.hpp"
#include "lcfollow/scenario_io.hpp"
#include "lcfollow/synth.hpp"

namespace fs = std::filesystem;
using namespace lcfollow;

namespace {

/// Files to write once the command has finished without error.
class Outputs {
public:
    void add(fs::path path, std::string content) { files_.emplace_back(std::move(path), std::move(content)); }
    void commit() const
    {
        for (const auto& [path, content] : files_) {
            if (path.has_parent_path()) fs::create_directories(path.parent_path());
            text::write_file(path.string(), content);
        }
    }

private:
    std::vector<std::pair<fs::path, std::string>> files_;
};

struct Common {
    std::uint64_t seed = 1;
    std::string snapshot;
};

struct TrainOptions {
    std::string family = "gaussmf";
    std::size_t mfs = 3;
    std::size_t epochs = 500;
    double learning_rate = 0.01;
    double ridge = 0.0;
    double init_jitter = 0.1;
    double train_fraction = 0.75;

    anfis::TrainingConfig config(std::uint64_t seed) const
    {
        anfis::TrainingConfig cfg;
        cfg.epochs = epochs;
        cfg.learning_rate = learning_rate;
        cfg.ridge = ridge;
        cfg.seed = seed;
        cfg.mfs_per_input = mfs;
        cfg.init_jitter = init_jitter;
        cfg.validate();
        return cfg;
    }
};

void add_training_flags(CLI::App* cmd, TrainOptions& t)
{
    cmd->add_option("--mfs", t.mfs, "membership functions per input")->capture_default_str();
    cmd->add_option("--epochs", t.epochs, "training epochs")->capture_default_str();
    cmd->add_option("--learning-rate", t.learning_rate, "initial premise step length")->capture_default_str();
    cmd->add_option("--ridge", t.ridge, "ridge penalty of the consequent least squares")->capture_default_str();
    cmd->add_option("--init-jitter", t.init_jitter, "seeded premise shift at initialization, fraction of MF spacing")
        ->capture_default_str();
    cmd->add_option("--train-fraction", t.train_fraction, "share of scenarios used for training")->capture_default_str();
}

void add_threshold_flags(CLI::App* cmd, phase::Thresholds& th)
{
    cmd->add_option("--vlat-threshold", th.vlat_threshold, "m/s")->capture_default_str();
    cmd->add_option("--jerk-threshold", th.jerk_threshold, "m/s^3")->capture_default_str();
    cmd->add_option("--perception-min", th.perception_min_duration, "s")->capture_default_str();
    cmd->add_option("--settle-displacement", th.lc_settle_displacement, "m per step")->capture_default_str();
    cmd->add_option("--cautious-factor", th.cautious_factor, "multiple of Pipe's spacing")->capture_default_str();
}

/// Resolved settings of the global options and the active subcommand, in a
/// form accepted back by --config.
std::string snapshot_of(const CLI::App& app)
{
    const auto active = app.get_subcommands().front()->get_name() + ".";
    std::istringstream all(app.config_to_str(true, false));
    std::string line, out;
    while (std::getline(all, line)) {
        const auto key = line.substr(0, line.find('='));
        if (key == "snapshot") continue;
        if (key.find('.') == std::string::npos || key.rfind(active, 0) == 0) out += line + "\n";
    }
    return out;
}

fs::path snapshot_path(const Common& c, const fs::path& main_output)
{
    if (!c.snapshot.empty()) return c.snapshot;
    return fs::path(main_output.string() + ".run.ini");
}

std::vector<MergeScenario> load_bundles(const std::string& root)
{
    std::vector<MergeScenario> out;
    for (const auto& dir : bundle::list_scenarios(root)) out.push_back(bundle::read_scenario(dir));
    if (out.empty()) throw DataError("no scenario bundles under '" + root + "'");
    return out;
}

std::pair<std::string, std::string> split_assignment(const std::string& spec)
{
    const auto eq = spec.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == spec.size())
        throw CLI::ValidationError("--trace", "expected subject=path, got '" + spec + "'");
    return {spec.substr(0, eq), spec.substr(eq + 1)};
}

metrics::TimeWindow parse_window(const std::string& spec, const std::string& flag)
{
    const auto colon = spec.find(':');
    if (colon == std::string::npos) throw CLI::ValidationError(flag, "expected from:to");
    auto from = text::parse_double(spec.substr(0, colon));
    auto to = text::parse_double(spec.substr(colon + 1));
    if (!from || !to || *to < *from) throw CLI::ValidationError(flag, "expected from:to with from <= to");
    return {*from, *to};
}

/// Annotation for a scenario: from a file when given, else detected.
phase::PhaseAnnotation annotation_for(const MergeScenario& sc, const std::string& annotations_path)
{
    if (annotations_path.empty()) return phase::annotate(sc);
    const auto all = bundle::read_annotations(annotations_path);
    const auto it = all.find(sc.id);
    if (it == all.end()) throw DataError(annotations_path + ": no annotation for scenario '" + sc.id + "'");
    return it->second;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Perception-based fuzzy car-following for lane-change followers"};
    app.require_subcommand(1);
    app.fallthrough();
    app.set_config("--config", "", "key-value config file (INI/TOML; [subcommand] sections)");
    Common common;
    app.add_option("--seed", common.seed, "seed for every random choice")->capture_default_str();
    app.add_option("--snapshot", common.snapshot, "where to write the resolved configuration (default: <output>.run.ini)");

    Outputs outputs;
    std::function<void()> run;

    // ingest
    std::string ingest_in, ingest_out;
    std::size_t smooth_window = 5;
    ingest::ExtractionOptions extract;
    auto* ingest_cmd = app.add_subcommand("ingest", "extract merge scenarios from a trajectory CSV");
    ingest_cmd->add_option("--input", ingest_in, "trajectory CSV")->required();
    ingest_cmd->add_option("--out", ingest_out, "directory receiving one bundle per scenario")->required();
    ingest_cmd->add_option("--smoothing-window", smooth_window, "odd moving-average window, samples")->capture_default_str();
    ingest_cmd->add_option("--context", extract.context_seconds, "seconds kept on each side of the lane change")
        ->capture_default_str();
    ingest_cmd->add_option("--follower-search", extract.fv_search_seconds, "seconds after the change to find the follower")
        ->capture_default_str();
    ingest_cmd->callback([&] {
        run = [&] {
            const bool blank = text::trim(text::read_file(ingest_in)).empty();
            const auto rows = blank ? std::vector<ingest::RawRow>{} : ingest::parse_trajectory_csv(ingest_in);
            const auto tracks = ingest::build_tracks(rows, smooth_window);
            auto ex = ingest::extract_merge_scenarios(tracks, extract);
            for (auto& sc : ex.scenarios) {
                sc.source = fs::path(ingest_in).filename().string();
                const fs::path dir = fs::path(ingest_out) / sc.id;
                outputs.add(dir / "fv.csv", bundle::track_to_csv(sc.fv));
                outputs.add(dir / "lc.csv", bundle::track_to_csv(sc.lc));
                outputs.add(dir / "lv.csv", bundle::track_to_csv(sc.lv));
                outputs.add(dir / "scenario.json", bundle::scenario_metadata(sc).dump(2) + "\n");
            }
            outputs.add(common.snapshot.empty() ? fs::path(ingest_out) / "run.ini" : fs::path(common.snapshot), snapshot_of(app));
            std::cout << ex.scenarios.size() << " scenario(s) written to " << ingest_out << "\n";
            for (const auto& s : ex.skipped)
                std::cout << "skipped lane change of vehicle " << s.lc_id << " at t=" << text::format_number(s.time) << ": "
                          << s.reason << "\n";
        };
    });

    // detect
    std::string detect_in, detect_out, detect_dataset;
    phase::Thresholds thresholds;
    auto* detect_cmd = app.add_subcommand("detect", "annotate merge phases of scenario bundles");
    detect_cmd->add_option("--scenarios", detect_in, "bundle directory or a root holding bundles")->required();
    detect_cmd->add_option("--out", detect_out, "annotation CSV")->required();
    detect_cmd->add_option("--dataset", detect_dataset, "also write the training dataset CSV here");
    add_threshold_flags(detect_cmd, thresholds);
    detect_cmd->callback([&] {
        run = [&] {
            thresholds.validate();
            const auto annotated = pipeline::annotate_all(load_bundles(detect_in), thresholds);
            std::string csv = std::string(bundle::annotation_header) + "\n";
            for (const auto& s : annotated) csv += bundle::annotation_row(s.scenario.id, s.annotation);
            outputs.add(detect_out, csv);
            if (!detect_dataset.empty()) outputs.add(detect_dataset, dataset::to_csv(pipeline::build_dataset(annotated)));
            outputs.add(snapshot_path(common, detect_out), snapshot_of(app));
            std::size_t complete = 0;
            for (const auto& s : annotated) complete += s.annotation.relaxation_end.has_value();
            std::cout << annotated.size() << " scenario(s) annotated, " << complete << " with a relaxation end\n";
        };
    });

    // train
    std::string train_in, train_out, train_history;
    TrainOptions train_opt;
    auto* train_cmd = app.add_subcommand("train", "fit a first-order Sugeno FIS with hybrid ANFIS learning");
    train_cmd->add_option("--dataset", train_in, "training dataset CSV")->required();
    train_cmd->add_option("--out", train_out, "FIS file")->required();
    train_cmd->add_option("--history", train_history, "per-epoch history CSV (default: <out>.history.csv)");
    train_cmd->add_option("--family", train_opt.family, "membership family")->capture_default_str();
    add_training_flags(train_cmd, train_opt);
    train_cmd->callback([&] {
        run = [&] {
            const auto family = mf_family_from_name(train_opt.family);
            if (!family) throw CLI::ValidationError("--family", "unknown membership family '" + train_opt.family + "'");
            const auto cfg = train_opt.config(common.seed);
            const auto data = dataset::load(train_in);
            if (data.empty()) throw DataError(train_in + ": dataset has no rows");
            const auto [tr, va] = anfis::split_dataset(data, train_opt.train_fraction);
            const auto start = anfis::initial_fis(data, dataset::input_columns, dataset::target_column, *family, cfg);
            const auto result = anfis::train(start, tr, va, cfg);

            std::ostringstream hist;
            hist << "epoch,rmse_before_lse,train_rmse,validation_rmse,learning_rate\n";
            for (const auto& h : result.history)
                hist << h.epoch << ',' << metrics::format_optional(h.rmse_before_lse) << ',' << metrics::format_optional(h.train_rmse)
                     << ',' << metrics::format_optional(h.validation_rmse) << ',' << text::format_number(h.learning_rate) << "\n";
            outputs.add(train_out, serialize_fis(result.fis));
            outputs.add(train_history.empty() ? train_out + ".history.csv" : train_history, hist.str());
            outputs.add(snapshot_path(common, train_out), snapshot_of(app));

            const auto& best = result.history.at(result.best_epoch - 1);
            std::cout << "best epoch " << best.epoch << ": train RMSE " << text::format_number(best.train_rmse)
                      << ", validation RMSE " << metrics::format_optional(best.validation_rmse) << "\n";
        };
    });

    // compare-mfs
    std::string cmp_in, cmp_out;
    std::size_t cmp_runs = 10;
    TrainOptions cmp_opt;
    auto* cmp_cmd = app.add_subcommand("compare-mfs", "train every membership family and tabulate held-out accuracy");
    cmp_cmd->add_option("--dataset", cmp_in, "training dataset CSV")->required();
    cmp_cmd->add_option("--out", cmp_out, "comparison CSV")->required();
    cmp_cmd->add_option("--runs", cmp_runs, "seeded runs per family")->capture_default_str();
    add_training_flags(cmp_cmd, cmp_opt);
    cmp_cmd->callback([&] {
        run = [&] {
            const auto cfg = cmp_opt.config(common.seed);
            const auto data = dataset::load(cmp_in);
            if (data.empty()) throw DataError(cmp_in + ": dataset has no rows");
            const auto [tr, va] = anfis::split_dataset(data, cmp_opt.train_fraction);
            const auto table = anfis::mf_family_comparison(tr, va, dataset::input_columns, cfg, cmp_runs);
            std::ostringstream csv;
            csv << "family,mean_rmse,mean_r_squared,runs,failed_runs,failure\n";
            for (const auto& row : table) {
                std::string why = row.failure;
                std::replace(why.begin(), why.end(), ',', ';');
                csv << mf_family_name(row.family) << ',' << metrics::format_optional(row.mean_rmse) << ','
                    << metrics::format_optional(row.mean_r_squared) << ',' << row.runs << ',' << row.failed_runs << ',' << why
                    << "\n";
            }
            outputs.add(cmp_out, csv.str());
            outputs.add(snapshot_path(common, cmp_out), snapshot_of(app));
            std::cout << csv.str();
        };
    });

    // simulate
    std::string sim_scenario, sim_fis, sim_out, sim_replay, sim_annotations;
    std::optional<double> sim_constant, sim_start, sim_horizon;
    bool sim_full = false;
    plant::SimConfig sim_cfg;
    auto* sim_cmd = app.add_subcommand("simulate", "run the closed loop on a recorded scenario");
    sim_cmd->add_option("--scenario", sim_scenario, "scenario bundle directory")->required();
    auto* fis_opt = sim_cmd->add_option("--fis", sim_fis, "trained FIS file");
    auto* const_opt = sim_cmd->add_option("--constant", sim_constant, "use a constant command (m/s^2) instead of a FIS");
    fis_opt->excludes(const_opt);
    sim_cmd->add_option("--out", sim_out, "controller trace CSV")->required();
    sim_cmd->add_option("--replay-out", sim_replay, "also write the recorded driver on the same grid");
    sim_cmd->add_option("--annotations", sim_annotations, "annotation CSV (default: detect on the fly)");
    sim_cmd->add_option("--start", sim_start, "start time, s (default: anticipation start)");
    sim_cmd->add_option("--horizon", sim_horizon, "duration, s (default: until relaxation end)");
    sim_cmd->add_flag("--full", sim_full, "simulate the whole recording");
    sim_cmd->add_option("--tau", sim_cfg.tau, "driveline time constant, s")->capture_default_str();
    sim_cmd->add_option("--u-min", sim_cfg.u_min, "lower command bound, m/s^2")->capture_default_str();
    sim_cmd->add_option("--u-max", sim_cfg.u_max, "upper command bound, m/s^2")->capture_default_str();
    sim_cmd->callback([&] {
        run = [&] {
            if (sim_fis.empty() && !sim_constant) throw CLI::RequiredError("--fis or --constant");
            const auto sc = bundle::read_scenario(sim_scenario);
            std::unique_ptr<Controller> controller;
            if (sim_constant)
                controller = std::make_unique<ConstantController>(*sim_constant);
            else
                controller = std::make_unique<FisController>(load_fis(sim_fis));

            std::optional<double> start;
            double horizon = std::numeric_limits<double>::infinity();
            if (!sim_full) {
                const auto w = pipeline::engagement_window(sc, annotation_for(sc, sim_annotations));
                start = w.start;
                horizon = w.horizon();
            }
            if (sim_start) start = *sim_start;
            if (sim_horizon) horizon = *sim_horizon;
            sim_cfg.horizon = horizon;
            const auto trace = plant::simulate_closed_loop(sc, *controller, sim_cfg, start);
            outputs.add(sim_out, plant::trace_to_csv(trace));
            if (!sim_replay.empty()) outputs.add(sim_replay, plant::trace_to_csv(plant::replay_human(sc, start, horizon)));
            outputs.add(snapshot_path(common, sim_out), snapshot_of(app));
            std::cout << trace.size() << " samples simulated" << (trace.collided() ? " (collision: gap went negative)" : "")
                      << "\n";
        };
    });

    // evaluate
    std::vector<std::string> eval_traces, eval_pool;
    std::string eval_scenario, eval_out, eval_plot, eval_reference, eval_annotations, eval_var_window, eval_pipes_window;
    std::optional<double> eval_length;
    bool eval_full = false;
    auto* eval_cmd = app.add_subcommand("evaluate", "compare traces by variance and Pipe's-law spacing error");
    eval_cmd->add_option("--trace", eval_traces, "subject=trace.csv, repeatable")->required();
    eval_cmd->add_option("--pool", eval_pool, "subject=trace.csv from other scenarios, pooled into the *_all columns");
    auto* len_opt = eval_cmd->add_option("--length", eval_length, "follower length, m");
    auto* scen_opt = eval_cmd->add_option("--scenario", eval_scenario, "scenario bundle (supplies length and windows)");
    len_opt->excludes(scen_opt);
    eval_cmd->add_option("--annotations", eval_annotations, "annotation CSV used with --scenario");
    eval_cmd->add_option("--reference", eval_reference, "subject anchoring the final position gap");
    eval_cmd->add_option("--variance-window", eval_var_window, "from:to seconds for the variances");
    eval_cmd->add_option("--pipes-window", eval_pipes_window, "from:to seconds for the Pipe's-law error");
    eval_cmd->add_flag("--full-trace", eval_full, "ignore detected windows and use every sample");
    eval_cmd->add_option("--out", eval_out, "report CSV")->required();
    eval_cmd->add_option("--plot-data", eval_plot, "tidy per-step CSV (default: <out>.plot.csv)");
    eval_cmd->callback([&] {
        run = [&] {
            if (!eval_length && eval_scenario.empty()) throw CLI::RequiredError("--length or --scenario");
            std::map<std::string, plant::SimTrace> traces;
            for (const auto& spec : eval_traces) {
                auto [name, path] = split_assignment(spec);
                if (traces.count(name)) throw CLI::ValidationError("--trace", "subject '" + name + "' given twice");
                traces[name] = plant::load_trace(path);
            }
            metrics::CompareOptions opt;
            double length = eval_length.value_or(0.0);
            if (!eval_scenario.empty()) {
                const auto sc = bundle::read_scenario(eval_scenario);
                length = sc.fv.length;
                if (!eval_full) opt = pipeline::compare_options(pipeline::engagement_window(sc, annotation_for(sc, eval_annotations)), {});
            }
            if (!eval_var_window.empty()) opt.variance_window = parse_window(eval_var_window, "--variance-window");
            if (!eval_pipes_window.empty()) opt.pipes_window = parse_window(eval_pipes_window, "--pipes-window");
            if (!eval_reference.empty()) opt.reference = eval_reference;
            const auto report = metrics::compare(traces, length, opt);

            std::map<std::string, std::vector<plant::SimTrace>> pool;
            for (const auto& [name, tr] : traces) pool[name].push_back(tr);
            for (const auto& spec : eval_pool) {
                auto [name, path] = split_assignment(spec);
                if (!traces.count(name)) throw CLI::ValidationError("--pool", "subject '" + name + "' has no --trace");
                pool[name].push_back(plant::load_trace(path));
            }
            const auto csv = metrics::report_to_csv(report, metrics::pooled(pool));
            outputs.add(eval_out, csv);
            outputs.add(eval_plot.empty() ? eval_out + ".plot.csv" : eval_plot, metrics::plot_data_csv(traces, length));
            outputs.add(snapshot_path(common, eval_out), snapshot_of(app));
            std::cout << csv;
        };
    });

    // synth
    std::string synth_out;
    std::size_t synth_events = 1;
    auto* synth_cmd = app.add_subcommand("synth", "generate NGSim-style merge traffic for testing");
    synth_cmd->add_option("--events", synth_events, "independent merge events")->capture_default_str()->check(CLI::PositiveNumber);
    synth_cmd->add_option("--out", synth_out, "trajectory CSV")->required();
    synth_cmd->callback([&] {
        run = [&] {
            outputs.add(synth_out, synth::rows_to_csv(synth::merge_traffic(synth_events, common.seed)));
            outputs.add(snapshot_path(common, synth_out), snapshot_of(app));
            std::cout << synth_events << " merge event(s) written to " << synth_out << "\n";
        };
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        run();
        outputs.commit();
        return 0;
    } catch (const CLI::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return 3;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.kind() == ErrorKind::usage ? 1 : 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
