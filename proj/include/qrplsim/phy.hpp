#pragma once
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "config.hpp"
#include "rng.hpp"
#include "types.hpp"

namespace qrplsim {

struct Position {
    double x = 0.0;
    double y = 0.0;
};

inline double distance(const Position& a, const Position& b) {
    return std::hypot(a.x - b.x, a.y - b.y);
}

struct Topology {
    std::vector<Position> positions;  // indexed by node id, root is id 0

    int node_count() const { return static_cast<int>(positions.size()); }
    double dist(node_id a, node_id b) const { return distance(positions[a], positions[b]); }
};

inline double standard_normal_cdf(double x) {
    return 0.5 * std::erfc(-x / 1.4142135623730950488016887242097);
}

// Mean received power from the log-distance part of the link budget.
inline double mean_rx_power_dbm(double d_m, const ChannelParams& p) {
    return p.tx_power_dbm - p.pathloss_ref_db -
           10.0 * p.pathloss_exponent * std::log10(d_m);
}

// Per-transmission delivery probability. In per_packet mode the shadowing
// term is redrawn every transmission, so success = Phi(margin/sigma); the
// static mode freezes one shadow draw per link instead (see LinkModel).
inline double link_success_prob(double d_m, const ChannelParams& p) {
    if (d_m <= 0.0)
        throw InvalidDistance("link distance must be positive, got " + std::to_string(d_m));
    const double margin_db = mean_rx_power_dbm(d_m, p) - p.rx_sensitivity_dbm;
    if (p.shadowing_sigma_db == 0.0) return margin_db >= 0.0 ? 1.0 : 0.0;
    return standard_normal_cdf(margin_db / p.shadowing_sigma_db);
}

// Pairwise delivery model over the placed topology. Mean-power symmetry holds
// by construction (probability depends only on distance); the static mode
// draws one shadow per unordered pair so both directions stay identical.
class LinkModel {
public:
    LinkModel() = default;

    LinkModel(const Topology& topo, const ChannelParams& params, RngStream& shadow_rng)
        : params_(params), n_(topo.node_count()) {
        prob_.assign(static_cast<std::size_t>(n_) * n_, 0.0);
        static_shadow_db_.assign(static_cast<std::size_t>(n_) * n_, 0.0);
        for (int a = 0; a < n_; ++a) {
            for (int b = a + 1; b < n_; ++b) {
                const double d = topo.dist(static_cast<node_id>(a), static_cast<node_id>(b));
                double p;
                if (params.shadowing_mode == ShadowingMode::PerPacket) {
                    p = link_success_prob(d, params);
                } else {
                    const double shadow = params.shadowing_sigma_db * shadow_rng.normal();
                    const double margin = mean_rx_power_dbm(d, params) -
                                          params.rx_sensitivity_dbm + shadow;
                    p = margin >= 0.0 ? 1.0 : 0.0;
                    static_shadow_db_[idx(a, b)] = shadow;
                    static_shadow_db_[idx(b, a)] = shadow;
                }
                prob_[idx(a, b)] = p;
                prob_[idx(b, a)] = p;
            }
        }
    }

    double success_prob(node_id tx, node_id rx) const {
        check(tx, rx);
        return prob_[idx(tx, rx)];
    }

    double static_shadow_db(node_id tx, node_id rx) const {
        check(tx, rx);
        return static_shadow_db_[idx(tx, rx)];
    }

    bool draw_delivery(node_id tx, node_id rx, RngStream& rng) const {
        const double p = success_prob(tx, rx);
        if (params_.shadowing_mode == ShadowingMode::StaticPerLink) return p >= 1.0;
        if (p >= 1.0) return true;
        if (p <= 0.0) return false;
        return rng.bernoulli(p);
    }

    const ChannelParams& params() const { return params_; }

private:
    std::size_t idx(int a, int b) const {
        return static_cast<std::size_t>(a) * n_ + static_cast<std::size_t>(b);
    }
    void check(node_id tx, node_id rx) const {
        if (tx >= n_ || rx >= n_ || tx == rx)
            throw UnknownLink("no link (" + std::to_string(tx) + "," + std::to_string(rx) + ")");
    }

    ChannelParams params_;
    int n_ = 0;
    std::vector<double> prob_;
    std::vector<double> static_shadow_db_;
};

// Connectivity requirement: every node reaches the root through links whose
// mean-power margin is strictly positive.
inline bool topology_connected(const Topology& topo, const ChannelParams& params) {
    const int n = topo.node_count();
    std::vector<bool> seen(n, false);
    std::vector<int> stack{kRootId};
    seen[kRootId] = true;
    int reached = 1;
    while (!stack.empty()) {
        const int u = stack.back();
        stack.pop_back();
        for (int v = 0; v < n; ++v) {
            if (seen[v] || v == u) continue;
            const double d = topo.dist(static_cast<node_id>(u), static_cast<node_id>(v));
            if (d <= 0.0) continue;
            if (mean_rx_power_dbm(d, params) - params.rx_sensitivity_dbm > 0.0) {
                seen[v] = true;
                ++reached;
                stack.push_back(v);
            }
        }
    }
    return reached == n;
}

inline constexpr int kPlacementRetries = 100;

// Root at the area center, the rest uniform; redraws the whole placement
// until the connectivity requirement holds.
inline Topology place_nodes(const SimConfig& cfg, RngStream& rng) {
    for (int attempt = 0; attempt < kPlacementRetries; ++attempt) {
        Topology topo;
        topo.positions.resize(cfg.node_count);
        topo.positions[kRootId] = {cfg.area_width_m / 2.0, cfg.area_height_m / 2.0};
        for (int i = 1; i < cfg.node_count; ++i) {
            topo.positions[i] = {rng.u01() * cfg.area_width_m, rng.u01() * cfg.area_height_m};
        }
        if (topology_connected(topo, cfg.channel)) return topo;
    }
    throw PlacementFailed("no connected placement after " +
                          std::to_string(kPlacementRetries) +
                          " attempts; area too sparse for the radio parameters");
}

// Plain-text topology table: one `node_id x y` row per node, so a fixed
// placement can be replayed across objective-function variants.
inline void export_topology(const Topology& topo, std::ostream& out) {
    out << "# node_id x_m y_m\n";
    for (int i = 0; i < topo.node_count(); ++i) {
        std::ostringstream row;
        row.precision(17);
        row << i << " " << topo.positions[i].x << " " << topo.positions[i].y << "\n";
        out << row.str();
    }
}

inline void export_topology(const Topology& topo, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoFailure("cannot write topology file '" + path + "'");
    export_topology(topo, out);
}

inline Topology import_topology(std::istream& in, const std::string& source_name) {
    Topology topo;
    std::string line;
    int line_no = 0;
    std::vector<std::pair<int, Position>> rows;
    while (std::getline(in, line)) {
        ++line_no;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream fields(line);
        int id;
        double x, y;
        if (!(fields >> id)) continue;  // blank line
        if (!(fields >> x >> y) || id < 0)
            throw IoFailure(source_name + ":" + std::to_string(line_no) +
                            ": expected 'node_id x y'");
        rows.emplace_back(id, Position{x, y});
    }
    if (rows.empty()) throw IoFailure(source_name + ": empty topology file");
    std::size_t max_id = 0;
    for (const auto& [id, pos] : rows) max_id = std::max(max_id, static_cast<std::size_t>(id));
    if (max_id + 1 != rows.size())
        throw IoFailure(source_name + ": node ids must cover 0.." +
                        std::to_string(rows.size() - 1) + " exactly");
    topo.positions.resize(rows.size());
    std::vector<bool> filled(rows.size(), false);
    for (const auto& [id, pos] : rows) {
        if (filled[id]) throw IoFailure(source_name + ": duplicate node id " + std::to_string(id));
        filled[id] = true;
        topo.positions[id] = pos;
    }
    return topo;
}

inline Topology import_topology(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoFailure("cannot open topology file '" + path + "'");
    return import_topology(in, path);
}

} // namespace qrplsim
