#pragma once

// Scenario bundle: a directory holding fv.csv, lc.csv, lv.csv and
// scenario.json. See docs/file_formats.md.

#include <algorithm>
#include <filesystem>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "lcfollow/error.hpp"
#include "lcfollow/phase.hpp"
#include "lcfollow/text.hpp"
#include "lcfollow/track.hpp"

namespace lcfollow::bundle {

namespace fs = std::filesystem;

inline constexpr std::string_view track_header =
    "t,x_lat,y_long,v_lat,v_long,a_lat,a_long,a_tot,jerk,v_recorded,a_recorded,lane_id,preceding_id,following_id";

inline std::string track_to_csv(const VehicleTrack& tr)
{
    using text::format_number;
    std::ostringstream out;
    out << track_header << "\n";
    auto at = [](const auto& v, std::size_t k, auto fallback) { return k < v.size() ? v[k] : fallback; };
    for (std::size_t k = 0; k < tr.size(); ++k) {
        out << format_number(tr.t[k]) << ',' << format_number(tr.x_lat[k]) << ',' << format_number(tr.y_long[k]) << ','
            << format_number(tr.v_lat[k]) << ',' << format_number(tr.v_long[k]) << ',' << format_number(tr.a_lat[k]) << ','
            << format_number(tr.a_long[k]) << ',' << format_number(tr.a_tot[k]) << ',' << format_number(tr.jerk[k]) << ','
            << format_number(at(tr.v_recorded, k, tr.v_long[k])) << ',' << format_number(at(tr.a_recorded, k, tr.a_long[k]))
            << ',' << at(tr.lane_id, k, 0LL) << ',' << at(tr.preceding_id, k, 0LL) << ',' << at(tr.following_id, k, 0LL) << "\n";
    }
    return out.str();
}

inline VehicleTrack track_from_csv(const std::string& path, long long id, double length)
{
    auto in = text::open_input(path);
    const auto table = text::parse_numeric_csv(in, path);
    const auto names = text::split(track_header, ',');
    if (table.header.size() != names.size()) throw DataError(path + ": track header must be '" + std::string(track_header) + "'");
    for (std::size_t i = 0; i < names.size(); ++i)
        if (table.header[i] != names[i]) throw DataError(path + ": unexpected column '" + table.header[i] + "'");
    VehicleTrack tr;
    tr.id = id;
    tr.length = length;
    for (const auto& r : table.rows) {
        tr.t.push_back(r[0]);
        tr.x_lat.push_back(r[1]);
        tr.y_long.push_back(r[2]);
        tr.v_lat.push_back(r[3]);
        tr.v_long.push_back(r[4]);
        tr.a_lat.push_back(r[5]);
        tr.a_long.push_back(r[6]);
        tr.a_tot.push_back(r[7]);
        tr.jerk.push_back(r[8]);
        tr.v_recorded.push_back(r[9]);
        tr.a_recorded.push_back(r[10]);
        tr.lane_id.push_back(static_cast<long long>(r[11]));
        tr.preceding_id.push_back(static_cast<long long>(r[12]));
        tr.following_id.push_back(static_cast<long long>(r[13]));
    }
    for (std::size_t k = 1; k < tr.size(); ++k) {
        if (std::abs(tr.t[k] - tr.t[k - 1] - frame_period) > 1e-6) throw DataError(path + ": time column is not on the 0.1 s grid");
    }
    return tr;
}

inline nlohmann::json scenario_metadata(const MergeScenario& sc)
{
    nlohmann::json meta;
    meta["format"] = "lcfollow-scenario";
    meta["version"] = 1;
    meta["id"] = sc.id;
    meta["source"] = sc.source;
    meta["lane_change_index"] = sc.lane_change_index ? nlohmann::json(*sc.lane_change_index) : nlohmann::json(nullptr);
    meta["samples"] = sc.size();
    auto vehicle = [](const VehicleTrack& tr) { return nlohmann::json{{"id", tr.id}, {"length", tr.length}}; };
    meta["fv"] = vehicle(sc.fv);
    meta["lc"] = vehicle(sc.lc);
    meta["lv"] = vehicle(sc.lv);
    return meta;
}

/// Writes <dir>/fv.csv, lc.csv, lv.csv and scenario.json.
inline void write_scenario(const fs::path& dir, const MergeScenario& sc)
{
    fs::create_directories(dir);
    text::write_file((dir / "fv.csv").string(), track_to_csv(sc.fv));
    text::write_file((dir / "lc.csv").string(), track_to_csv(sc.lc));
    text::write_file((dir / "lv.csv").string(), track_to_csv(sc.lv));
    text::write_file((dir / "scenario.json").string(), scenario_metadata(sc).dump(2) + "\n");
}

inline MergeScenario read_scenario(const fs::path& dir)
{
    const auto meta_path = (dir / "scenario.json").string();
    nlohmann::json meta;
    try {
        meta = nlohmann::json::parse(text::read_file(meta_path));
    } catch (const nlohmann::json::exception& e) {
        throw DataError(meta_path + ": " + e.what());
    }
    try {
        if (meta.at("format") != "lcfollow-scenario" || meta.at("version") != 1) throw DataError(meta_path + ": unsupported scenario format");
        MergeScenario sc;
        sc.id = meta.at("id").get<std::string>();
        sc.source = meta.value("source", "");
        if (!meta.at("lane_change_index").is_null()) sc.lane_change_index = meta.at("lane_change_index").get<std::size_t>();
        auto load = [&](const char* role) {
            const auto& v = meta.at(role);
            return track_from_csv((dir / (std::string(role) + ".csv")).string(), v.at("id").get<long long>(), v.at("length").get<double>());
        };
        sc.fv = load("fv");
        sc.lc = load("lc");
        sc.lv = load("lv");
        sc.require_aligned();
        return sc;
    } catch (const nlohmann::json::exception& e) {
        throw DataError(meta_path + ": " + e.what());
    }
}

/// Scenario sub-directories of a bundle root, sorted by name.
inline std::vector<fs::path> list_scenarios(const fs::path& root)
{
    if (!fs::is_directory(root)) throw DataError("'" + root.string() + "' is not a directory");
    if (fs::exists(root / "scenario.json")) return {root};
    std::vector<fs::path> out;
    for (const auto& entry : fs::directory_iterator(root))
        if (entry.is_directory() && fs::exists(entry.path() / "scenario.json")) out.push_back(entry.path());
    std::sort(out.begin(), out.end());
    return out;
}

inline constexpr std::string_view annotation_header =
    "scenario,anticipation_start,perception_start,perception_end,preparation_start,lane_change_complete,relaxation_end,"
    "relaxation_case,lane_change_settled";

inline std::string annotation_row(const std::string& scenario_id, const phase::PhaseAnnotation& a)
{
    auto num = [](const std::optional<double>& v) { return v ? text::format_number(*v) : std::string("NA"); };
    std::ostringstream out;
    out << scenario_id << ',' << num(a.anticipation_start) << ','
        << num(a.perception ? std::optional<double>(a.perception->start) : std::nullopt) << ','
        << num(a.perception ? std::optional<double>(a.perception->end) : std::nullopt) << ',' << num(a.preparation_start) << ','
        << num(a.lane_change_complete) << ',' << num(a.relaxation_end) << ','
        << (a.relaxation_case ? std::string(phase::relaxation_case_name(*a.relaxation_case)) : std::string("NA")) << ','
        << (a.lane_change_complete ? (a.lane_change_settled ? "1" : "0") : "NA") << "\n";
    return out.str();
}

/// Parses one annotation CSV (as written by annotation_row) keyed by scenario id.
inline std::map<std::string, phase::PhaseAnnotation> read_annotations(const std::string& path)
{
    auto in = text::open_input(path);
    std::string line;
    std::size_t line_no = 0;
    std::map<std::string, phase::PhaseAnnotation> out;
    while (std::getline(in, line)) {
        ++line_no;
        const auto body = text::trim(line);
        if (body.empty()) continue;
        if (line_no == 1) {
            if (body != annotation_header) throw DataError(path + ":1: unexpected annotation header");
            continue;
        }
        const auto f = text::split(body, ',');
        if (f.size() != 9) throw DataError(path + ":" + std::to_string(line_no) + ": expected 9 fields");
        auto num = [&](std::size_t i) -> std::optional<double> {
            if (text::trim(f[i]) == "NA") return std::nullopt;
            auto v = text::parse_double(f[i]);
            if (!v) throw DataError(path + ":" + std::to_string(line_no) + ": bad number in field " + std::to_string(i + 1));
            return v;
        };
        phase::PhaseAnnotation a;
        a.anticipation_start = num(1);
        const auto ps = num(2), pe = num(3);
        if (ps && pe) a.perception = phase::Interval{*ps, *pe};
        a.preparation_start = num(4);
        a.lane_change_complete = num(5);
        a.relaxation_end = num(6);
        if (text::trim(f[7]) != "NA") a.relaxation_case = phase::relaxation_case_from_name(text::trim(f[7]));
        a.lane_change_settled = text::trim(f[8]) == "1";
        out[std::string(text::trim(f[0]))] = a;
    }
    return out;
}

}  // namespace lcfollow::bundle
