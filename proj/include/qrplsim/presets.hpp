#pragma once
#include <atomic>
#include <filesystem>
#include <fstream>
#include <functional>
#include <string>
#include <thread>
#include <vector>

#include "config_parser.hpp"
#include "engine.hpp"
#include "metrics.hpp"
#include "types.hpp"

namespace qrplsim {

// A preset is a figure-shaped experiment: a set of objective-function
// variants crossed with one swept parameter, everything else from the base
// config (fixed overrides applied first).
struct ExperimentPreset {
    std::string name;
    std::vector<ObjectiveFunction> variants;
    std::string sweep_key;
    std::vector<double> sweep_values;
    std::vector<std::string> overrides;
};

// The evaluated setup leaves deployment area, radio budget and the backoff
// window open. Two regimes cover the figure families:
//  - funnel: 80x80 m, multi-hop funnels toward the root; relays saturate as
//    load grows, which is where queue losses and delay separate the variants.
//  - provisioned: 48x48 m, every fringe node sees several relays and the
//    balanced assignment fits relay service; concentration alone overflows.
// The steeper exponent (4, with the budget rescaled to keep roughly the same
// range) keeps in-range links reliable, so relay quality differences are
// stable rather than drowned in shadowing noise. Backoff 16/24 slows per-node
// service into the regime where buffers, not the channel, bound throughput.
inline std::vector<std::string> funnel_profile(int backoff_max) {
    return {"area_width_m=80", "area_height_m=80", "channel.pathloss_exponent=4",
            "channel.rx_sensitivity_dbm=-103",
            "mac.backoff_max_slots=" + std::to_string(backoff_max)};
}

inline std::vector<std::string> provisioned_profile() {
    return {"area_width_m=48", "area_height_m=48", "channel.pathloss_exponent=4",
            "channel.rx_sensitivity_dbm=-103", "mac.backoff_max_slots=24"};
}

inline const std::vector<ExperimentPreset>& preset_catalog() {
    static const std::vector<double> loads{30, 60, 90, 120};
    static const std::vector<ExperimentPreset> catalog = {
        {"loss-breakdown", {ObjectiveFunction::MRHOF}, "traffic_ppm", loads,
         funnel_profile(24)},
        {"per-node-qlr",
         {ObjectiveFunction::MRHOF, ObjectiveFunction::QRPL},
         "traffic_ppm",
         {90},
         funnel_profile(24)},
        {"topology",
         {ObjectiveFunction::MRHOF, ObjectiveFunction::QRPL},
         "traffic_ppm",
         {90},
         funnel_profile(16)},
        {"qlr-sweep",
         {ObjectiveFunction::OF0, ObjectiveFunction::MRHOF, ObjectiveFunction::QRPL},
         "traffic_ppm",
         loads,
         provisioned_profile()},
        {"buffer-study",
         {ObjectiveFunction::MRHOF, ObjectiveFunction::QRPL},
         "buffer_size",
         {10, 20, 30, 40},
         [] {
             auto ov = provisioned_profile();
             ov.push_back("traffic_ppm=120");
             return ov;
         }()},
        {"pdr-sweep",
         {ObjectiveFunction::OF0, ObjectiveFunction::MRHOF, ObjectiveFunction::QRPL},
         "traffic_ppm",
         loads,
         provisioned_profile()},
        {"delay-sweep",
         {ObjectiveFunction::OF0, ObjectiveFunction::MRHOF, ObjectiveFunction::QRPL},
         "traffic_ppm",
         loads,
         funnel_profile(16)},
        {"dio-overhead",
         {ObjectiveFunction::MRHOF, ObjectiveFunction::QRPL},
         "traffic_ppm",
         loads,
         funnel_profile(16)},
    };
    return catalog;
}

inline const ExperimentPreset& find_preset(const std::string& name) {
    for (const auto& p : preset_catalog())
        if (p.name == name) return p;
    std::string known;
    for (const auto& p : preset_catalog()) known += (known.empty() ? "" : ", ") + p.name;
    throw ConfigInvalid("unknown preset '" + name + "' (known: " + known + ")");
}

struct PresetTask {
    ObjectiveFunction variant;
    double sweep_value = 0.0;
    SimConfig config;
    std::string report_file;  // basename inside the output directory
};

inline std::vector<PresetTask> preset_tasks(const ExperimentPreset& preset,
                                            const SimConfig& base) {
    std::vector<PresetTask> tasks;
    for (const auto of : preset.variants) {
        for (const double value : preset.sweep_values) {
            PresetTask t;
            t.variant = of;
            t.sweep_value = value;
            t.config = base;
            for (const auto& ov : preset.overrides) apply_override(t.config, ov);
            t.config.objective_function = of;
            apply_override(t.config, preset.sweep_key + "=" + format_double(value));
            t.config.validate();
            t.report_file = preset.name + "_" + to_string(of) + "_" + preset.sweep_key +
                            format_double(value) + ".json";
            tasks.push_back(std::move(t));
        }
    }
    return tasks;
}

struct PresetTaskResult {
    bool ok = false;
    std::string error;
    MetricsReport report;
};

// Executes every task, writing one JSON report per (variant, sweep point) as
// it completes; the comparison table is written only when the whole preset
// succeeded, so a partial output directory is recognizable. Returns the
// process exit code (0 ok, 2 when any task failed). before_task is a test
// hook for failure injection.
inline int run_preset(const ExperimentPreset& preset, const SimConfig& base,
                      const std::string& out_dir, int jobs,
                      const Topology* fixed_topology = nullptr,
                      const std::function<void(const PresetTask&)>& before_task = {}) {
    std::filesystem::create_directories(out_dir);
    auto tasks = preset_tasks(preset, base);
    std::vector<PresetTaskResult> results(tasks.size());

    auto execute = [&](std::size_t i) {
        auto& res = results[i];
        try {
            if (before_task) before_task(tasks[i]);
            res.report = run_experiment(tasks[i].config, fixed_topology);
            const auto json_path =
                (std::filesystem::path(out_dir) / tasks[i].report_file).string();
            std::ofstream out(json_path, std::ios::binary);
            if (!out) throw IoFailure("cannot write report '" + json_path + "'");
            out << report_to_json_text(res.report);
            res.ok = true;
        } catch (const std::exception& ex) {
            res.error = ex.what();
        }
    };

    if (jobs <= 1 || tasks.size() <= 1) {
        for (std::size_t i = 0; i < tasks.size(); ++i) execute(i);
    } else {
        std::atomic<std::size_t> next{0};
        const auto workers = static_cast<std::size_t>(
            std::min<std::size_t>(static_cast<std::size_t>(jobs), tasks.size()));
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (std::size_t i = next.fetch_add(1); i < tasks.size();
                     i = next.fetch_add(1))
                    execute(i);
            });
        }
        for (auto& th : pool) th.join();
    }

    bool all_ok = true;
    for (const auto& r : results) all_ok = all_ok && r.ok;
    if (!all_ok) return 2;

    const auto cmp_path = (std::filesystem::path(out_dir) / "comparison.csv").string();
    std::ofstream cmp(cmp_path, std::ios::binary);
    if (!cmp) throw IoFailure("cannot write comparison table '" + cmp_path + "'");
    cmp << "variant,sweep_key,sweep_value,metric,value\n";
    for (std::size_t i = 0; i < tasks.size(); ++i) {
        const auto agg = results[i].report.aggregate();
        auto row = [&](const char* metric, double v) {
            cmp << to_string(tasks[i].variant) << "," << preset.sweep_key << ","
                << format_double(tasks[i].sweep_value) << "," << metric << ","
                << format_double(v) << "\n";
        };
        row("pdr", agg.pdr);
        row("qlr_avg", agg.qlr_avg);
        row("delay_avg_s", agg.delay_avg_s);
        row("dio_per_node_avg", agg.dio_per_node_avg);
        row("dio_overhead_fraction", agg.dio_overhead_fraction);
        row("children_stddev", agg.children_stddev);
        row("queue_loss_frac", agg.queue_loss_frac);
        row("link_loss_frac", agg.link_loss_frac);
    }
    return 0;
}

} // namespace qrplsim
