#pragma once
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "types.hpp"

namespace qrplsim {

enum class ObjectiveFunction : std::uint8_t { OF0, MRHOF, QRPL };

inline const char* to_string(ObjectiveFunction of) {
    switch (of) {
        case ObjectiveFunction::OF0: return "OF0";
        case ObjectiveFunction::MRHOF: return "MRHOF";
        default: return "QRPL";
    }
}

enum class ShadowingMode : std::uint8_t { PerPacket, StaticPerLink };

struct ChannelParams {
    double tx_power_dbm = 0.0;
    double pathloss_ref_db = 40.0;   // path loss at 1 m
    double pathloss_exponent = 3.0;
    double shadowing_sigma_db = 14.0;
    double rx_sensitivity_dbm = -85.0;
    ShadowingMode shadowing_mode = ShadowingMode::PerPacket;
    double interference_range_factor = 1.0;

    // distance at which the mean link margin reaches 0 dB
    double comm_range_m() const {
        const double budget_db = tx_power_dbm - pathloss_ref_db - rx_sensitivity_dbm;
        return std::pow(10.0, budget_db / (10.0 * pathloss_exponent));
    }
};

struct MacParams {
    int backoff_min_slots = 1;
    int backoff_max_slots = 8;
    bool cca_enabled = true;
};

enum class ParentChangeReset : std::uint8_t { Auto, On, Off };

struct TrickleParams {
    double i_min_s = 3.0;
    int doublings = 8;          // i_max = i_min * 2^doublings
    int phi_0 = 2;              // threshold increment after each reset
    int phi_init = 2;           // initial consecutive-loss threshold
    double window_x_s = 0.100;  // no-loss window that reinitializes phi
    ParentChangeReset reset_on_parent_change = ParentChangeReset::Auto;

    double i_max_s() const { return i_min_s * std::pow(2.0, doublings); }
};

struct LearningParams {
    double alpha = 0.3;   // learning rate
    double bf_th = 0.5;   // congestion threshold on the backlog factor
    double theta = 1.0;   // exploration temperature
};

struct RplParams {
    int eta = 100;          // RANK codec base
    int etx_window = 32;    // sliding window of MAC attempts
    double etx_unknown = 16.0;
    double mrhof_hysteresis = 0.5;   // ETX improvement needed to switch parent
    double mrhof_rank_unit = 128.0;  // rank units per 1.0 ETX of path cost
};

struct SimConfig {
    int node_count = 30;             // includes the root (id 0)
    double area_width_m = 100.0;
    double area_height_m = 100.0;
    double traffic_ppm = 90.0;       // packets per minute per node
    int packet_bytes = 100;
    int buffer_size = 10;            // packets
    int retransmission_limit = 3;
    double ewma_beta = 0.3;          // backlog-factor smoothing weight
    ObjectiveFunction objective_function = ObjectiveFunction::QRPL;

    double slot_duration_s = 0.010;
    int slots_per_slotframe = 500;
    int slotframes_total = 1000;
    int warmup_slotframes = 50;      // excluded from all metrics

    LearningParams learning;
    TrickleParams trickle;
    ChannelParams channel;
    MacParams mac;
    RplParams rpl;

    std::uint64_t rng_seed = 1;
    int runs = 10;

    bool trickle_resets_on_parent_change() const {
        if (trickle.reset_on_parent_change == ParentChangeReset::On) return true;
        if (trickle.reset_on_parent_change == ParentChangeReset::Off) return false;
        // The modified reset strategy replaces the topology reset; with
        // stochastic reselection a parent change is routine, not an
        // inconsistency. Baselines keep the standard behaviour.
        return objective_function != ObjectiveFunction::QRPL;
    }

    slot_t end_slot() const {
        return static_cast<slot_t>(slots_per_slotframe) * slotframes_total;
    }
    slot_t warmup_end_slot() const {
        return static_cast<slot_t>(slots_per_slotframe) * warmup_slotframes;
    }
    double measured_duration_s() const {
        return static_cast<double>(end_slot() - warmup_end_slot()) * slot_duration_s;
    }

    // Throws ConfigInvalid naming every offending field.
    void validate() const {
        std::vector<std::string> faults;
        auto require = [&](bool ok, const std::string& msg) {
            if (!ok) faults.push_back(msg);
        };
        require(node_count >= 2, "node_count must be >= 2 (root plus at least one node)");
        require(area_width_m > 0, "area_width_m must be positive");
        require(area_height_m > 0, "area_height_m must be positive");
        require(traffic_ppm > 0, "traffic_ppm must be positive");
        require(packet_bytes > 0, "packet_bytes must be positive");
        require(buffer_size > 0, "buffer_size must be positive");
        require(retransmission_limit >= 0, "retransmission_limit must be >= 0");
        require(ewma_beta > 0 && ewma_beta <= 1, "ewma_beta must be in (0,1]");
        require(slot_duration_s > 0, "slot_duration_s must be positive");
        require(slots_per_slotframe > 0, "slots_per_slotframe must be positive");
        require(slotframes_total > 0, "slotframes_total must be positive");
        require(warmup_slotframes >= 0 && warmup_slotframes < slotframes_total,
                "warmup_slotframes must be in [0, slotframes_total)");
        require(learning.alpha > 0 && learning.alpha <= 1, "learning.alpha must be in (0,1]");
        require(learning.bf_th > 0 && learning.bf_th < 1, "learning.bf_th must be in (0,1)");
        require(learning.theta > 0, "learning.theta must be positive");
        require(trickle.i_min_s > 0, "trickle.i_min_s must be positive");
        require(trickle.doublings >= 0, "trickle.doublings must be >= 0");
        require(trickle.phi_0 > 0, "trickle.phi_0 must be positive");
        require(trickle.phi_init > 0, "trickle.phi_init must be positive");
        require(trickle.window_x_s > 0, "trickle.window_x_s must be positive");
        require(channel.shadowing_sigma_db >= 0, "channel.shadowing_sigma_db must be >= 0");
        require(channel.pathloss_exponent > 0, "channel.pathloss_exponent must be positive");
        require(channel.interference_range_factor >= 1.0,
                "channel.interference_range_factor must be >= 1.0");
        require(mac.backoff_min_slots >= 1, "mac.backoff_min_slots must be >= 1");
        require(mac.backoff_max_slots >= mac.backoff_min_slots,
                "mac.backoff_max_slots must be >= mac.backoff_min_slots");
        require(rpl.eta >= 2, "rpl.eta must be >= 2");
        require(rpl.etx_window > 0, "rpl.etx_window must be positive");
        require(rpl.etx_unknown >= 1.0, "rpl.etx_unknown must be >= 1.0");
        require(rpl.mrhof_hysteresis >= 0, "rpl.mrhof_hysteresis must be >= 0");
        require(rpl.mrhof_rank_unit > 0, "rpl.mrhof_rank_unit must be positive");
        require(runs >= 1, "runs must be >= 1");
        if (!faults.empty()) {
            std::string msg = "invalid configuration:";
            for (const auto& f : faults) msg += "\n  - " + f;
            throw ConfigInvalid(msg);
        }
    }

    // Parameters the evaluated setup leaves open; echoed into every report.
    std::vector<std::string> assumption_notes() const {
        std::vector<std::string> notes;
        notes.push_back("deployment area " + std::to_string(area_width_m) + " x " +
                        std::to_string(area_height_m) +
                        " m with root at center (area not given in the evaluated setup)");
        notes.push_back("radio defaults: tx " + std::to_string(channel.tx_power_dbm) +
                        " dBm, ref loss " + std::to_string(channel.pathloss_ref_db) +
                        " dB @1m, exponent " + std::to_string(channel.pathloss_exponent) +
                        ", sensitivity " + std::to_string(channel.rx_sensitivity_dbm) + " dBm");
        notes.push_back(std::string("per-transmission shadowing success = Phi(margin/sigma); mode=") +
                        (channel.shadowing_mode == ShadowingMode::PerPacket ? "per_packet"
                                                                            : "static_per_link"));
        notes.push_back("backlog factor EWMA beta " + std::to_string(ewma_beta) +
                        ", sampled after every enqueue outcome and dequeue");
        notes.push_back("ETX over sliding window of " + std::to_string(rpl.etx_window) +
                        " MAC attempts, " + std::to_string(rpl.etx_unknown) +
                        " before the first success");
        notes.push_back("exploration temperature theta " + std::to_string(learning.theta));
        notes.push_back("phi initialized to " + std::to_string(trickle.phi_init) +
                        "; i_max = i_min * 2^" + std::to_string(trickle.doublings));
        notes.push_back("selection weights renormalized over the candidate set; parent re-drawn "
                        "after every DIO-driven Q-update");
        notes.push_back("first " + std::to_string(warmup_slotframes) +
                        " slotframes excluded from metrics as formation transient");
        notes.push_back(std::string("trickle reset on parent change: ") +
                        (trickle_resets_on_parent_change() ? "yes" : "no"));
        notes.push_back("per-node QLR denominator: queue drops + packets offered to the link layer "
                        "at that node");
        return notes;
    }
};

} // namespace qrplsim
