#pragma once
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <string>
#include <vector>

#include <json.hpp>

#include "config.hpp"
#include "types.hpp"

namespace qrplsim {

// Shortest-roundtrip decimal image, identical across replays of the same
// run, so reports can be compared byte for byte.
inline std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

struct NodeCounters {
    std::uint64_t generated = 0;     // packets originated here (post-warm-up)
    std::uint64_t forwarded = 0;     // transactions delivered to the next hop
    std::uint64_t queue_drops = 0;   // overflow drops at this node's buffer
    std::uint64_t link_drops = 0;    // transactions exhausted at this node
    std::uint64_t mac_offered = 0;   // completed transactions (delivered + exhausted)
    std::uint64_t dio_sent = 0;      // DIO frames committed in the measured window
    std::uint64_t data_tx = 0;       // data frames committed in the measured window
    std::uint64_t collision_attempts = 0;     // failed attempts classified as collisions
    std::uint64_t channel_loss_attempts = 0;  // failed attempts classified as channel losses
    std::uint64_t parent_changes = 0;         // preferred-parent switches after joining
    int hop_at_end = -1;             // parent-chain depth at the end snapshot
    int children = 0;                // children in the end snapshot
};

struct RunTotals {
    std::uint64_t generated = 0;
    std::uint64_t delivered = 0;
    std::uint64_t queue_drops = 0;
    std::uint64_t link_drops = 0;
    std::uint64_t in_queue_end = 0;
    std::uint64_t in_flight_end = 0;
};

// queue drops per packet the node offered to its link layer
inline double node_qlr(const NodeCounters& c) {
    // A node that never offered anything to its link layer (e.g. one that
    // stayed detached the whole run) has no meaningful loss ratio.
    if (c.mac_offered == 0) return 0.0;
    return static_cast<double>(c.queue_drops) /
           static_cast<double>(c.queue_drops + c.mac_offered);
}

// Population standard deviation of per-node children counts.
inline double children_stddev(const std::vector<int>& children_counts) {
    if (children_counts.empty()) return 0.0;
    double mean = 0.0;
    for (int c : children_counts) mean += c;
    mean /= static_cast<double>(children_counts.size());
    double var = 0.0;
    for (int c : children_counts) {
        const double d = c - mean;
        var += d * d;
    }
    var /= static_cast<double>(children_counts.size());
    return std::sqrt(var);
}

struct RunMetrics {
    int run_index = 0;
    RunTotals totals;
    std::vector<NodeCounters> per_node;  // indexed by node id

    double pdr = 0.0;
    double qlr_avg = 0.0;       // mean of per-node QLR over non-root nodes
    double delay_avg_s = std::numeric_limits<double>::quiet_NaN();
    std::uint64_t delivered_count = 0;
    double dio_per_node_avg = 0.0;
    double dio_overhead_fraction = 0.0;
    double children_stddev = 0.0;

    double delivered_frac = 0.0;
    double queue_loss_frac = 0.0;
    double link_loss_frac = 0.0;
    double residual_frac = 0.0;  // still queued or in flight when the run ended
};

// Derives every per-run metric from the raw counters.
inline RunMetrics compute_run_metrics(int run_index, const RunTotals& totals,
                                      std::vector<NodeCounters> per_node, double delay_sum_s,
                                      std::uint64_t delivered_count) {
    RunMetrics m;
    m.run_index = run_index;
    m.totals = totals;
    m.per_node = std::move(per_node);

    const auto g = static_cast<double>(totals.generated);
    if (totals.generated > 0) {
        m.pdr = static_cast<double>(totals.delivered) / g;
        m.delivered_frac = m.pdr;
        m.queue_loss_frac = static_cast<double>(totals.queue_drops) / g;
        m.link_loss_frac = static_cast<double>(totals.link_drops) / g;
        m.residual_frac =
            static_cast<double>(totals.in_queue_end + totals.in_flight_end) / g;
    }

    double qlr_sum = 0.0;
    int non_root = 0;
    std::uint64_t dio_total = 0;
    std::uint64_t data_total = 0;
    std::vector<int> children_counts;
    for (std::size_t i = 0; i < m.per_node.size(); ++i) {
        const auto& c = m.per_node[i];
        dio_total += c.dio_sent;
        data_total += c.data_tx;
        if (i != kRootId) {
            qlr_sum += node_qlr(c);
            ++non_root;
            children_counts.push_back(c.children);
        }
    }
    if (non_root > 0) m.qlr_avg = qlr_sum / non_root;
    if (!m.per_node.empty())
        m.dio_per_node_avg = static_cast<double>(dio_total) / m.per_node.size();
    if (dio_total + data_total > 0)
        m.dio_overhead_fraction =
            static_cast<double>(dio_total) / static_cast<double>(dio_total + data_total);
    m.children_stddev = qrplsim::children_stddev(children_counts);

    m.delivered_count = delivered_count;
    if (delivered_count > 0) m.delay_avg_s = delay_sum_s / static_cast<double>(delivered_count);
    return m;
}

inline double avg_delay(const RunMetrics& m) {
    if (m.delivered_count == 0) throw NoDeliveries("no packet reached the root in this run");
    return m.delay_avg_s;
}

struct MetricsReport {
    SimConfig config;
    std::vector<RunMetrics> runs;

    struct Aggregate {
        double pdr = 0.0;
        double qlr_avg = 0.0;
        double delay_avg_s = std::numeric_limits<double>::quiet_NaN();
        double dio_per_node_avg = 0.0;
        double dio_overhead_fraction = 0.0;
        double children_stddev = 0.0;
        double delivered_frac = 0.0;
        double queue_loss_frac = 0.0;
        double link_loss_frac = 0.0;
        double residual_frac = 0.0;
    };

    // Arithmetic mean over runs; delay averages only runs that delivered.
    Aggregate aggregate() const {
        Aggregate a;
        if (runs.empty()) return a;
        double delay_sum = 0.0;
        int delay_runs = 0;
        for (const auto& r : runs) {
            a.pdr += r.pdr;
            a.qlr_avg += r.qlr_avg;
            a.dio_per_node_avg += r.dio_per_node_avg;
            a.dio_overhead_fraction += r.dio_overhead_fraction;
            a.children_stddev += r.children_stddev;
            a.delivered_frac += r.delivered_frac;
            a.queue_loss_frac += r.queue_loss_frac;
            a.link_loss_frac += r.link_loss_frac;
            a.residual_frac += r.residual_frac;
            if (r.delivered_count > 0) {
                delay_sum += r.delay_avg_s;
                ++delay_runs;
            }
        }
        const double n = static_cast<double>(runs.size());
        a.pdr /= n;
        a.qlr_avg /= n;
        a.dio_per_node_avg /= n;
        a.dio_overhead_fraction /= n;
        a.children_stddev /= n;
        a.delivered_frac /= n;
        a.queue_loss_frac /= n;
        a.link_loss_frac /= n;
        a.residual_frac /= n;
        if (delay_runs > 0) a.delay_avg_s = delay_sum / delay_runs;
        return a;
    }
};

inline nlohmann::ordered_json config_to_json(const SimConfig& c) {
    nlohmann::ordered_json j;
    j["node_count"] = c.node_count;
    j["area_width_m"] = c.area_width_m;
    j["area_height_m"] = c.area_height_m;
    j["traffic_ppm"] = c.traffic_ppm;
    j["packet_bytes"] = c.packet_bytes;
    j["buffer_size"] = c.buffer_size;
    j["retransmission_limit"] = c.retransmission_limit;
    j["ewma_beta"] = c.ewma_beta;
    j["objective_function"] = to_string(c.objective_function);
    j["slot_duration_s"] = c.slot_duration_s;
    j["slots_per_slotframe"] = c.slots_per_slotframe;
    j["slotframes_total"] = c.slotframes_total;
    j["warmup_slotframes"] = c.warmup_slotframes;
    j["rng_seed"] = c.rng_seed;
    j["runs"] = c.runs;
    j["learning"] = {{"alpha", c.learning.alpha},
                     {"bf_th", c.learning.bf_th},
                     {"theta", c.learning.theta}};
    j["trickle"] = {{"i_min_s", c.trickle.i_min_s},
                    {"doublings", c.trickle.doublings},
                    {"phi_0", c.trickle.phi_0},
                    {"phi_init", c.trickle.phi_init},
                    {"window_x_s", c.trickle.window_x_s},
                    {"reset_on_parent_change",
                     c.trickle.reset_on_parent_change == ParentChangeReset::Auto
                         ? "auto"
                         : (c.trickle.reset_on_parent_change == ParentChangeReset::On ? "on"
                                                                                      : "off")}};
    j["channel"] = {{"tx_power_dbm", c.channel.tx_power_dbm},
                    {"pathloss_ref_db", c.channel.pathloss_ref_db},
                    {"pathloss_exponent", c.channel.pathloss_exponent},
                    {"shadowing_sigma_db", c.channel.shadowing_sigma_db},
                    {"rx_sensitivity_dbm", c.channel.rx_sensitivity_dbm},
                    {"shadowing_mode",
                     c.channel.shadowing_mode == ShadowingMode::PerPacket ? "per_packet"
                                                                          : "static_per_link"},
                    {"interference_range_factor", c.channel.interference_range_factor}};
    j["mac"] = {{"backoff_min_slots", c.mac.backoff_min_slots},
                {"backoff_max_slots", c.mac.backoff_max_slots},
                {"cca_enabled", c.mac.cca_enabled}};
    j["rpl"] = {{"eta", c.rpl.eta},
                {"etx_window", c.rpl.etx_window},
                {"etx_unknown", c.rpl.etx_unknown},
                {"mrhof_hysteresis", c.rpl.mrhof_hysteresis},
                {"mrhof_rank_unit", c.rpl.mrhof_rank_unit}};
    return j;
}

inline nlohmann::ordered_json run_to_json(const RunMetrics& r) {
    nlohmann::ordered_json j;
    j["run"] = r.run_index;
    j["pdr"] = r.pdr;
    j["qlr_avg"] = r.qlr_avg;
    if (r.delivered_count > 0)
        j["delay_avg_s"] = r.delay_avg_s;
    else
        j["delay_avg_s"] = nullptr;
    j["dio_per_node_avg"] = r.dio_per_node_avg;
    j["dio_overhead_fraction"] = r.dio_overhead_fraction;
    j["children_stddev"] = r.children_stddev;
    j["loss"] = {{"delivered_frac", r.delivered_frac},
                 {"queue_loss_frac", r.queue_loss_frac},
                 {"link_loss_frac", r.link_loss_frac},
                 {"residual_frac", r.residual_frac}};
    j["totals"] = {{"generated", r.totals.generated},
                   {"delivered", r.totals.delivered},
                   {"queue_drops", r.totals.queue_drops},
                   {"link_drops", r.totals.link_drops},
                   {"in_queue_end", r.totals.in_queue_end},
                   {"in_flight_end", r.totals.in_flight_end}};
    nlohmann::ordered_json nodes = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < r.per_node.size(); ++i) {
        const auto& c = r.per_node[i];
        nodes.push_back({{"node", i},
                         {"generated", c.generated},
                         {"forwarded", c.forwarded},
                         {"queue_drops", c.queue_drops},
                         {"link_drops", c.link_drops},
                         {"mac_offered", c.mac_offered},
                         {"dio_sent", c.dio_sent},
                         {"data_tx", c.data_tx},
                         {"collision_attempts", c.collision_attempts},
                         {"channel_loss_attempts", c.channel_loss_attempts},
                         {"parent_changes", c.parent_changes},
                         {"qlr", node_qlr(c)},
                         {"hop_at_end", c.hop_at_end},
                         {"children", c.children}});
    }
    j["per_node"] = std::move(nodes);
    return j;
}

inline nlohmann::ordered_json report_to_json(const MetricsReport& rep) {
    nlohmann::ordered_json j;
    j["config"] = config_to_json(rep.config);
    j["assumptions"] = rep.config.assumption_notes();
    nlohmann::ordered_json runs = nlohmann::ordered_json::array();
    for (const auto& r : rep.runs) runs.push_back(run_to_json(r));
    j["runs"] = std::move(runs);

    const auto a = rep.aggregate();
    nlohmann::ordered_json agg;
    agg["pdr"] = a.pdr;
    agg["qlr_avg"] = a.qlr_avg;
    if (std::isnan(a.delay_avg_s))
        agg["delay_avg_s"] = nullptr;
    else
        agg["delay_avg_s"] = a.delay_avg_s;
    agg["dio_per_node_avg"] = a.dio_per_node_avg;
    agg["dio_overhead_fraction"] = a.dio_overhead_fraction;
    agg["children_stddev"] = a.children_stddev;
    agg["loss"] = {{"delivered_frac", a.delivered_frac},
                   {"queue_loss_frac", a.queue_loss_frac},
                   {"link_loss_frac", a.link_loss_frac},
                   {"residual_frac", a.residual_frac}};
    auto per_run = [&](auto getter) {
        nlohmann::ordered_json v = nlohmann::ordered_json::array();
        for (const auto& r : rep.runs) v.push_back(getter(r));
        return v;
    };
    agg["per_run"] = {
        {"pdr", per_run([](const RunMetrics& r) { return r.pdr; })},
        {"qlr_avg", per_run([](const RunMetrics& r) { return r.qlr_avg; })},
        {"delay_avg_s", per_run([](const RunMetrics& r) {
             return r.delivered_count > 0 ? nlohmann::ordered_json(r.delay_avg_s)
                                          : nlohmann::ordered_json(nullptr);
         })},
        {"dio_per_node_avg",
         per_run([](const RunMetrics& r) { return r.dio_per_node_avg; })},
        {"children_stddev",
         per_run([](const RunMetrics& r) { return r.children_stddev; })},
    };
    j["aggregate"] = std::move(agg);
    return j;
}

inline std::string report_to_json_text(const MetricsReport& rep) {
    return report_to_json(rep).dump(2) + "\n";
}

inline MetricsReport report_from_json(const nlohmann::json& j) {
    // Round-trip support for tooling and tests; only the numeric payload is
    // reconstructed, the config echo is re-parsed field by field.
    MetricsReport rep;
    const auto& c = j.at("config");
    rep.config.node_count = c.at("node_count").get<int>();
    rep.config.area_width_m = c.at("area_width_m").get<double>();
    rep.config.area_height_m = c.at("area_height_m").get<double>();
    rep.config.traffic_ppm = c.at("traffic_ppm").get<double>();
    rep.config.packet_bytes = c.at("packet_bytes").get<int>();
    rep.config.buffer_size = c.at("buffer_size").get<int>();
    rep.config.retransmission_limit = c.at("retransmission_limit").get<int>();
    rep.config.ewma_beta = c.at("ewma_beta").get<double>();
    const std::string of = c.at("objective_function").get<std::string>();
    rep.config.objective_function = of == "OF0"    ? ObjectiveFunction::OF0
                                    : of == "MRHOF" ? ObjectiveFunction::MRHOF
                                                    : ObjectiveFunction::QRPL;
    rep.config.slot_duration_s = c.at("slot_duration_s").get<double>();
    rep.config.slots_per_slotframe = c.at("slots_per_slotframe").get<int>();
    rep.config.slotframes_total = c.at("slotframes_total").get<int>();
    rep.config.warmup_slotframes = c.at("warmup_slotframes").get<int>();
    rep.config.rng_seed = c.at("rng_seed").get<std::uint64_t>();
    rep.config.runs = c.at("runs").get<int>();
    for (const auto& rj : j.at("runs")) {
        RunMetrics r;
        r.run_index = rj.at("run").get<int>();
        r.pdr = rj.at("pdr").get<double>();
        r.qlr_avg = rj.at("qlr_avg").get<double>();
        if (!rj.at("delay_avg_s").is_null()) {
            r.delay_avg_s = rj.at("delay_avg_s").get<double>();
            r.delivered_count = rj.at("totals").at("delivered").get<std::uint64_t>();
        }
        r.dio_per_node_avg = rj.at("dio_per_node_avg").get<double>();
        r.dio_overhead_fraction = rj.at("dio_overhead_fraction").get<double>();
        r.children_stddev = rj.at("children_stddev").get<double>();
        const auto& loss = rj.at("loss");
        r.delivered_frac = loss.at("delivered_frac").get<double>();
        r.queue_loss_frac = loss.at("queue_loss_frac").get<double>();
        r.link_loss_frac = loss.at("link_loss_frac").get<double>();
        r.residual_frac = loss.at("residual_frac").get<double>();
        const auto& t = rj.at("totals");
        r.totals.generated = t.at("generated").get<std::uint64_t>();
        r.totals.delivered = t.at("delivered").get<std::uint64_t>();
        r.totals.queue_drops = t.at("queue_drops").get<std::uint64_t>();
        r.totals.link_drops = t.at("link_drops").get<std::uint64_t>();
        r.totals.in_queue_end = t.at("in_queue_end").get<std::uint64_t>();
        r.totals.in_flight_end = t.at("in_flight_end").get<std::uint64_t>();
        for (const auto& nj : rj.at("per_node")) {
            NodeCounters nc;
            nc.generated = nj.at("generated").get<std::uint64_t>();
            nc.forwarded = nj.at("forwarded").get<std::uint64_t>();
            nc.queue_drops = nj.at("queue_drops").get<std::uint64_t>();
            nc.link_drops = nj.at("link_drops").get<std::uint64_t>();
            nc.mac_offered = nj.at("mac_offered").get<std::uint64_t>();
            nc.dio_sent = nj.at("dio_sent").get<std::uint64_t>();
            nc.data_tx = nj.at("data_tx").get<std::uint64_t>();
            nc.collision_attempts = nj.at("collision_attempts").get<std::uint64_t>();
            nc.channel_loss_attempts = nj.at("channel_loss_attempts").get<std::uint64_t>();
            nc.parent_changes = nj.at("parent_changes").get<std::uint64_t>();
            nc.hop_at_end = nj.at("hop_at_end").get<int>();
            nc.children = nj.at("children").get<int>();
            r.per_node.push_back(nc);
        }
        rep.runs.push_back(std::move(r));
    }
    return rep;
}

inline constexpr const char* kCsvHeader = "run,scope,node_id,metric,value";

// One row per (run, scope, metric): network-scope rows first, then per-node
// rows in node order.
inline void export_csv(const MetricsReport& rep, std::ostream& out) {
    out << kCsvHeader << "\n";
    auto net_row = [&](int run, const char* metric, double v) {
        out << run << ",network,," << metric << "," << format_double(v) << "\n";
    };
    for (const auto& r : rep.runs) {
        net_row(r.run_index, "pdr", r.pdr);
        net_row(r.run_index, "qlr_avg", r.qlr_avg);
        net_row(r.run_index, "delay_avg_s", r.delay_avg_s);
        net_row(r.run_index, "dio_per_node_avg", r.dio_per_node_avg);
        net_row(r.run_index, "dio_overhead_fraction", r.dio_overhead_fraction);
        net_row(r.run_index, "children_stddev", r.children_stddev);
        net_row(r.run_index, "delivered_frac", r.delivered_frac);
        net_row(r.run_index, "queue_loss_frac", r.queue_loss_frac);
        net_row(r.run_index, "link_loss_frac", r.link_loss_frac);
        net_row(r.run_index, "residual_frac", r.residual_frac);
        for (std::size_t i = 0; i < r.per_node.size(); ++i) {
            const auto& c = r.per_node[i];
            auto node_row = [&](const char* metric, const std::string& v) {
                out << r.run_index << ",node," << i << "," << metric << "," << v << "\n";
            };
            node_row("generated", std::to_string(c.generated));
            node_row("forwarded", std::to_string(c.forwarded));
            node_row("queue_drops", std::to_string(c.queue_drops));
            node_row("link_drops", std::to_string(c.link_drops));
            node_row("mac_offered", std::to_string(c.mac_offered));
            node_row("dio_sent", std::to_string(c.dio_sent));
            node_row("data_tx", std::to_string(c.data_tx));
            node_row("collision_attempts", std::to_string(c.collision_attempts));
            node_row("channel_loss_attempts", std::to_string(c.channel_loss_attempts));
            node_row("parent_changes", std::to_string(c.parent_changes));
            node_row("qlr", format_double(node_qlr(c)));
            node_row("hop_at_end", std::to_string(c.hop_at_end));
            node_row("children", std::to_string(c.children));
        }
    }
}

inline void export_report(const MetricsReport& rep, const std::string& json_path,
                          const std::string& csv_path) {
    {
        std::ofstream out(json_path, std::ios::binary);
        if (!out) throw IoFailure("cannot write report '" + json_path + "'");
        out << report_to_json_text(rep);
    }
    {
        std::ofstream out(csv_path, std::ios::binary);
        if (!out) throw IoFailure("cannot write report '" + csv_path + "'");
        export_csv(rep, out);
    }
}

} // namespace qrplsim
