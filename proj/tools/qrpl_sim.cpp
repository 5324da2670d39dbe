// qrpl-sim: batch driver for the simulator library.
//   run    — one experiment (config + optional overrides) -> report.json/.csv
//   preset — a figure-shaped sweep across OF variants -> per-point reports
//   topo   — export a placement for replay, or validate an existing file
// Exit codes: 0 success, 1 configuration error, 2 run failure.

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qrplsim/qrplsim.hpp"

namespace {

struct CommonOpts {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<int> runs;
    int jobs = 1;
    std::vector<std::string> overrides;
    std::string topology_path;
    std::string out_dir;
};

void add_common(CLI::App* cmd, CommonOpts& opts, bool out_required) {
    cmd->add_option("--config", opts.config_path, "config file (defaults when omitted)");
    cmd->add_option("--seed", opts.seed, "override rng_seed");
    cmd->add_option("--runs", opts.runs, "override run count");
    cmd->add_option("--jobs", opts.jobs, "parallel simulations (presets)");
    cmd->add_option("--override", opts.overrides, "extra key=value settings")
        ->take_all();
    cmd->add_option("--topology", opts.topology_path,
                    "fixed topology file shared by every simulation");
    auto* out = cmd->add_option("--out", opts.out_dir, "output directory");
    if (out_required) out->required();
}

qrplsim::SimConfig resolve_config(const CommonOpts& opts) {
    qrplsim::SimConfig cfg;
    if (!opts.config_path.empty()) cfg = qrplsim::parse_config(opts.config_path);
    if (opts.seed) cfg.rng_seed = *opts.seed;
    if (opts.runs) cfg.runs = *opts.runs;
    for (const auto& ov : opts.overrides) qrplsim::apply_override(cfg, ov);
    cfg.validate();
    return cfg;
}

std::optional<qrplsim::Topology> resolve_topology(const CommonOpts& opts) {
    if (opts.topology_path.empty()) return std::nullopt;
    return qrplsim::import_topology(opts.topology_path);
}

int cmd_run(const CommonOpts& opts) {
    const auto cfg = resolve_config(opts);
    const auto topo = resolve_topology(opts);
    const auto report =
        qrplsim::run_experiment(cfg, topo ? &*topo : nullptr);
    std::filesystem::create_directories(opts.out_dir);
    const auto base = std::filesystem::path(opts.out_dir);
    qrplsim::export_report(report, (base / "report.json").string(),
                           (base / "report.csv").string());
    const auto agg = report.aggregate();
    std::cout << "of=" << qrplsim::to_string(cfg.objective_function)
              << " load_ppm=" << qrplsim::format_double(cfg.traffic_ppm)
              << " runs=" << cfg.runs << " pdr=" << qrplsim::format_double(agg.pdr)
              << " qlr=" << qrplsim::format_double(agg.qlr_avg)
              << " delay_s=" << qrplsim::format_double(agg.delay_avg_s)
              << " dio_per_node=" << qrplsim::format_double(agg.dio_per_node_avg)
              << "\n";
    return 0;
}

int cmd_preset(const std::string& name, const CommonOpts& opts) {
    const auto& preset = qrplsim::find_preset(name);
    const auto base = resolve_config(opts);
    const auto topo = resolve_topology(opts);
    const int code = qrplsim::run_preset(preset, base, opts.out_dir, opts.jobs,
                                         topo ? &*topo : nullptr);
    if (code == 0)
        std::cout << "preset " << name << ": wrote "
                  << qrplsim::preset_tasks(preset, base).size()
                  << " reports and comparison.csv to " << opts.out_dir << "\n";
    else
        std::cerr << "preset " << name << ": at least one simulation failed\n";
    return code;
}

int cmd_topo_export(const std::string& file, const CommonOpts& opts) {
    const auto cfg = resolve_config(opts);
    qrplsim::RngStream rng =
        qrplsim::make_substream(cfg.rng_seed, 0, "topology");
    const auto topo = qrplsim::place_nodes(cfg, rng);
    qrplsim::export_topology(topo, file);
    std::cout << "wrote " << topo.node_count() << " node positions to " << file << "\n";
    return 0;
}

int cmd_topo_import(const std::string& file) {
    const auto topo = qrplsim::import_topology(file);
    double min_x = 0, min_y = 0, max_x = 0, max_y = 0;
    for (int i = 0; i < topo.node_count(); ++i) {
        const auto& p = topo.positions[i];
        if (i == 0 || p.x < min_x) min_x = p.x;
        if (i == 0 || p.y < min_y) min_y = p.y;
        if (i == 0 || p.x > max_x) max_x = p.x;
        if (i == 0 || p.y > max_y) max_y = p.y;
    }
    std::cout << "topology ok: " << topo.node_count() << " nodes, bbox ["
              << qrplsim::format_double(min_x) << "," << qrplsim::format_double(min_y)
              << "] - [" << qrplsim::format_double(max_x) << ","
              << qrplsim::format_double(max_y) << "]\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"deterministic RPL/Q-routing network simulator"};
    app.require_subcommand(1);

    CommonOpts run_opts;
    auto* run_cmd = app.add_subcommand("run", "run one experiment");
    add_common(run_cmd, run_opts, true);

    CommonOpts preset_opts;
    std::string preset_name;
    auto* preset_cmd = app.add_subcommand("preset", "run a named experiment sweep");
    preset_cmd->add_option("name", preset_name, "preset name")->required();
    add_common(preset_cmd, preset_opts, true);

    auto* topo_cmd = app.add_subcommand("topo", "topology utilities");
    topo_cmd->require_subcommand(1);
    CommonOpts topo_opts;
    std::string topo_export_file;
    auto* export_cmd = topo_cmd->add_subcommand("export", "place nodes and write a topology file");
    export_cmd->add_option("file", topo_export_file, "output file")->required();
    add_common(export_cmd, topo_opts, false);
    std::string topo_import_file;
    auto* import_cmd = topo_cmd->add_subcommand("import", "validate a topology file");
    import_cmd->add_option("file", topo_import_file, "input file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (run_cmd->parsed()) return cmd_run(run_opts);
        if (preset_cmd->parsed()) return cmd_preset(preset_name, preset_opts);
        if (export_cmd->parsed()) return cmd_topo_export(topo_export_file, topo_opts);
        if (import_cmd->parsed()) return cmd_topo_import(topo_import_file);
    } catch (const qrplsim::ConfigInvalid& ex) {
        std::cerr << "configuration error: " << ex.what() << "\n";
        return 1;
    } catch (const qrplsim::IoFailure& ex) {
        std::cerr << "i/o error: " << ex.what() << "\n";
        return 1;
    } catch (const std::exception& ex) {
        std::cerr << "run failure: " << ex.what() << "\n";
        return 2;
    }
    return 1;
}
