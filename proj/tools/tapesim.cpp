/*
 * Copyright 2026 The tapesim Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */


// tapesim command line: run, rail, sweep, analyze, validate.

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>

#include "tapesim/analytics.hpp"
#include "tapesim/export.hpp"
#include "tapesim/kpi.hpp"
#include "tapesim/rail.hpp"
#include "tapesim/sweep.hpp"

using namespace tapesim;

namespace {

struct Common {
    std::string config_path;
    std::map<std::string, std::string> flags;  // flag name -> value, filled by CLI11
    std::string out_dir;
    bool no_trace = false;
    bool paranoid = false;

    SimConfig load() const {
        ConfigOverrides ov;
        for (const auto& [k, v] : flags)
            if (!v.empty()) ov[k] = v;
        return load_config(config_path, ov);
    }

    std::string output_dir() const {
        if (!out_dir.empty()) return out_dir;
        if (const char* env = std::getenv("TAPESIM_OUT_DIR"); env && *env) return env;
        return ".";
    }
};

void add_config_flags(CLI::App* app, Common& c, bool needs_config = true) {
    auto* opt = app->add_option("config", c.config_path, "configuration file");
    if (needs_config) opt->required()->check(CLI::ExistingFile);
    std::vector<std::string> names = config_keys();
    for (const char* alias : {"threshold", "seed", "libraries"}) names.emplace_back(alias);
    for (const auto& name : names) {
        c.flags[name];
        app->add_option("--" + name, c.flags[name], "override config key " + name)->group("Config overrides");
    }
}

std::string fmt_seconds(const LatencyStats& s) {
    return s.has_data() ? format_double(std::round(s.mean * 10.0) / 10.0) : kNoData;
}

// A DR queue whose last quarter averages over twice its first quarter, and
// is not tiny, is still building up at the horizon.
void warn_if_growing(const KpiReport& k, const std::string& where) {
    const auto& q = k.dr_queue_by_hour;
    if (q.size() < 4) return;
    const std::size_t quarter = q.size() / 4;
    double head = 0.0, tail = 0.0;
    for (std::size_t i = 0; i < quarter; ++i) {
        head += q[i] / static_cast<double>(quarter);
        tail += q[q.size() - 1 - i] / static_cast<double>(quarter);
    }
    if (tail > 10.0 && tail > 2.0 * head)
        std::cerr << "warning: " << where << "DR queue still growing at the horizon (first quarter mean "
                  << format_double(head) << ", last quarter mean " << format_double(tail)
                  << "); the system may be unstable\n";
}

void write_rail_summary(const RailResult& r, const std::string& dir) {
    const auto path = (std::filesystem::path(dir) / "rail_report.txt").string();
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    auto stats = [&](const char* name, const LatencyStats& s) {
        out << name << "_count = " << s.count << '\n';
        const char* keys[] = {"min", "mean", "max", "stddev"};
        const double vals[] = {s.min, s.mean, s.max, s.stddev};
        for (int i = 0; i < 4; ++i)
            out << name << '_' << keys[i] << "_minutes = "
                << (s.has_data() ? format_double(vals[i] / 60.0) : std::string(kNoData)) << '\n';
    };
    out << "libraries = " << r.num_libraries << '\n';
    out << "object_requests = " << r.objects << '\n';
    out << "lambda_per_step = " << format_double(r.lambda) << '\n';
    out << "lambda_j_per_step = " << format_double(r.lambda_j) << '\n';
    out << "lambda_prime_j_per_step = " << format_double(r.lambda_prime_j) << '\n';
    out << "failure_multiplier = " << format_double(r.multiplier) << '\n';
    out << "touch_rate_correction = " << format_double(r.touch_correction) << '\n';
    for (std::size_t i = 0; i < r.fragments_per_library.size(); ++i)
        out << "library_" << i << "_fragments = " << r.fragments_per_library[i]
            << "\nlibrary_" << i << "_background = " << r.background_per_library[i] << '\n';
    stats("first_byte_latency", r.first_byte);
    stats("last_byte_latency", r.last_byte);
    out << "retrieval_failures = " << r.aggregate.retrieval_failures << '\n';
    out << "objects_in_flight = " << r.aggregate.in_flight << '\n';
    out << "integrity_errors = " << r.aggregate.integrity_errors.size() << '\n';
    out << "sum_kth_latency_over_min_fragments_seconds = "
        << (r.kth_latency_estimate ? format_double(*r.kth_latency_estimate) : std::string(kNoData)) << '\n';
    if (!out.flush()) throw std::runtime_error("write failed for '" + path + "'");
}

int cmd_run(const Common& c, bool force_rail) {
    const SimConfig cfg = c.load();
    const std::string dir = c.output_dir();
    std::filesystem::create_directories(dir);
    RunOptions run;
    run.paranoid = c.paranoid;

    if (cfg.num_libraries == 1 && !force_rail) {
        const SimResult res = run_simulation(cfg, run);
        const KpiReport k = compute_kpis(res);
        if (!c.no_trace) write_trace(res.trace, (std::filesystem::path(dir) / trace_file_name({})).string());
        write_report(k, cfg, dir, "");
        warn_if_growing(k, "");
        std::cout << "objects=" << k.objects_dispatched << " complete=" << k.objects_complete
                  << " unrecoverable=" << k.objects_unrecoverable << " in_flight=" << k.objects_in_flight
                  << " last_byte_mean_s=" << fmt_seconds(k.last_byte)
                  << " last_byte_sd_s=" << (k.last_byte.has_data() ? format_double(k.last_byte.stddev) : kNoData)
                  << " objects_touched=" << k.objects_touched << " read_errors=" << k.read_errors
                  << " mean_dr_queue=" << format_double(k.mean_dr_queue) << " out=" << dir << '\n';
        return 0;
    }

    RailOptions opts;
    opts.run = run;
    const RailResult r = run_rail(cfg, opts);
    std::int64_t touched = 0;
    for (std::size_t i = 0; i < r.libraries.size(); ++i) {
        const KpiReport k = compute_kpis(r.libraries[i]);
        touched += k.objects_touched;
        if (!c.no_trace)
            write_trace(r.libraries[i].trace,
                        (std::filesystem::path(dir) / trace_file_name(static_cast<int>(i))).string());
        write_report(k, cfg, dir, "lib" + std::to_string(i) + "_");
        warn_if_growing(k, "library " + std::to_string(i) + ": ");
    }
    write_rail_summary(r, dir);
    for (const auto& e : r.aggregate.integrity_errors) std::cerr << "integrity: " << e << '\n';
    std::cout << "libraries=" << r.num_libraries << " objects=" << r.objects
              << " complete=" << r.last_byte.count << " failures=" << r.aggregate.retrieval_failures
              << " in_flight=" << r.aggregate.in_flight << " last_byte_mean_s=" << fmt_seconds(r.last_byte)
              << " last_byte_sd_s=" << (r.last_byte.has_data() ? format_double(r.last_byte.stddev) : kNoData)
              << " objects_touched=" << touched << " out=" << dir << '\n';
    return r.aggregate.integrity_errors.empty() ? 0 : 3;
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream in(s);
    std::string item;
    while (std::getline(in, item, ','))
        if (!item.empty()) out.push_back(item);
    return out;
}

struct SweepArgs {
    std::string parameter;
    std::string values;
    int runs = 1;
    std::string output = "last_byte_mean";
    std::string csv;
};

int cmd_sweep(const Common& c, const SweepArgs& a) {
    const SimConfig cfg = c.load();
    SweepSpec spec;
    spec.parameter = a.parameter;
    spec.values = split_list(a.values);
    spec.runs = a.runs;
    spec.output = parse_sweep_output(a.output);
    const auto rows = run_sweep(cfg, spec);
    std::ostringstream csv;
    write_sweep_csv(spec, rows, csv);
    std::cout << csv.str();
    if (!a.csv.empty()) {
        std::ofstream out(a.csv, std::ios::binary);
        if (!(out << csv.str())) throw std::runtime_error("cannot write '" + a.csv + "'");
    }
    for (const auto& r : rows)
        for (const auto& e : r.errors) std::cerr << a.parameter << '=' << r.value << ": " << e << '\n';
    return 0;
}

struct AnalyzeArgs {
    std::string lambdas;  // objects per day
    double robot_mu = 0.0, drive_mu = 0.0;  // per second
    int robots = 0, drives = 0;
    double ca2 = 1.0, cs2_robot = 1.0, cs2_drive = 1.0;
    std::string form = "erlang";
};

int cmd_analyze(const Common& c, AnalyzeArgs a) {
    std::optional<SimConfig> cfg;
    if (!c.config_path.empty()) cfg = c.load();
    double per_object = 1.0;
    if (cfg) {
        // Robot: one exchange per fragment. Drive: load, position, transfer.
        if (a.robot_mu <= 0) a.robot_mu = cfg->robot_xph / kSecondsPerHour;
        if (a.robots <= 0) a.robots = cfg->num_robots;
        if (a.drives <= 0) a.drives = cfg->num_drives;
        if (a.drive_mu <= 0)
            a.drive_mu = 1.0 / (cfg->mean_load_time + cfg->mean_position_time +
                                cfg->mean_object_size() / cfg->code_k / cfg->drive_rate);
        per_object = cfg->initial_fragments();
        if (a.lambdas.empty()) {
            const double base = derive_arrival_rate(*cfg) / cfg->step_seconds * kSecondsPerDay;
            for (double f : {0.25, 0.5, 0.75, 1.0, 1.25, 1.5, 2.0, 3.0})
                a.lambdas += format_double(base * f) + ",";
        }
    }
    if (a.robot_mu <= 0 || a.drive_mu <= 0 || a.robots <= 0 || a.drives <= 0 || a.lambdas.empty())
        throw std::invalid_argument("analyze needs a config or --robot-mu, --drive-mu, --robots, --drives and --lambdas");
    const LqForm form = a.form == "rho-power" ? LqForm::RhoPower : LqForm::ErlangC;
    QueueModelParams robot{0.0, a.robot_mu, a.robots, a.ca2, a.cs2_robot};
    QueueModelParams drive{0.0, a.drive_mu, a.drives, a.ca2, a.cs2_drive};
    std::vector<double> rates, per_day;
    for (const auto& s : split_list(a.lambdas)) {
        per_day.push_back(std::stod(s));
        rates.push_back(per_day.back() * per_object / kSecondsPerDay);
    }
    std::cout << "objects_per_day,fragments_per_second,rho_robot,rho_drive,stable,wq_robot_s,wq_drive_s,"
                 "gq_robot_s,gq_drive_s,end_to_end_s\n";
    const auto rows = sizing_table(robot, drive, rates, form);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& r = rows[i];
        std::cout << format_double(per_day[i]) << ',' << format_double(r.lambda) << ','
                  << format_double(r.rho_robot) << ',' << format_double(r.rho_drive) << ','
                  << (r.stable ? "true" : "false");
        if (r.stable)
            std::cout << ',' << format_double(r.wq_robot) << ',' << format_double(r.wq_drive) << ','
                      << format_double(r.gq_robot) << ',' << format_double(r.gq_drive) << ','
                      << format_double(r.end_to_end);
        else
            std::cout << ",,,,,";
        std::cout << '\n';
    }
    return 0;
}

int cmd_validate(const Common& c) {
    const SimConfig cfg = c.load();
    std::cout << serialize_config(cfg);
    std::cerr << c.config_path << ": ok\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Tape library simulator"};
    app.require_subcommand(1);

    Common run_c, rail_c, sweep_c, analyze_c, validate_c;

    auto* run = app.add_subcommand("run", "simulate the configured system (array when num_libraries > 1)");
    add_config_flags(run, run_c);
    run->add_option("--out", run_c.out_dir, "output directory (default $TAPESIM_OUT_DIR or .)");
    run->add_flag("--no-trace", run_c.no_trace, "skip simQ*.csv");
    run->add_flag("--paranoid", run_c.paranoid, "check engine invariants every step");

    auto* rail = app.add_subcommand("rail", "simulate as an array, one trace per library");
    add_config_flags(rail, rail_c);
    rail->add_option("--out", rail_c.out_dir, "output directory (default $TAPESIM_OUT_DIR or .)");
    rail->add_flag("--no-trace", rail_c.no_trace, "skip simQ*.csv");
    rail->add_flag("--paranoid", rail_c.paranoid, "check engine invariants every step");

    SweepArgs sweep_a;
    auto* sweep = app.add_subcommand("sweep", "vary one config key, CSV of (value, mean, stddev)");
    add_config_flags(sweep, sweep_c);
    sweep->add_option("--param", sweep_a.parameter, "config key to vary")->required();
    sweep->add_option("--values", sweep_a.values, "comma-separated values")->required();
    sweep->add_option("--runs", sweep_a.runs, "runs per value");
    sweep->add_option("--output", sweep_a.output,
                      "last_byte_mean, last_byte_stddev, first_byte_mean, mean_dr_queue, final_dr_queue, "
                      "objects_touched");
    sweep->add_option("--csv", sweep_a.csv, "also write the table here");

    AnalyzeArgs an;
    auto* analyze = app.add_subcommand("analyze", "closed-form sizing table as CSV");
    add_config_flags(analyze, analyze_c, false);
    analyze->add_option("--lambdas", an.lambdas, "object requests per day, comma-separated");
    analyze->add_option("--robot-mu", an.robot_mu, "exchanges per second of one robot");
    analyze->add_option("--drive-mu", an.drive_mu, "services per second of one drive");
    analyze->add_option("--robots", an.robots);
    analyze->add_option("--drives", an.drives);
    analyze->add_option("--ca2", an.ca2, "squared CoV of inter-arrival times");
    analyze->add_option("--cs2-robot", an.cs2_robot, "squared CoV of robot service");
    analyze->add_option("--cs2-drive", an.cs2_drive, "squared CoV of drive service");
    analyze->add_option("--form", an.form, "erlang (default) or rho-power")
        ->check(CLI::IsMember({"erlang", "rho-power"}));

    auto* validate_cmd = app.add_subcommand("validate", "parse and check a config, print it canonically");
    add_config_flags(validate_cmd, validate_c);

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) return cmd_run(run_c, false);
        if (rail->parsed()) return cmd_run(rail_c, true);
        if (sweep->parsed()) return cmd_sweep(sweep_c, sweep_a);
        if (analyze->parsed()) return cmd_analyze(analyze_c, an);
        if (validate_cmd->parsed()) return cmd_validate(validate_c);
    } catch (const ConfigParseError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const ConfigValidationError& e) {
        std::cerr << "error: invalid '" << e.field() << "': " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
