#pragma once
#include <cstdint>
#include <vector>

#include "config.hpp"
#include "phy.hpp"
#include "rng.hpp"
#include "rpl.hpp"
#include "types.hpp"

namespace qrplsim {

enum class TxStatus : std::uint8_t { Delivered, ChannelLoss, Collision, Exhausted };

inline const char* to_string(TxStatus s) {
    switch (s) {
        case TxStatus::Delivered: return "Delivered";
        case TxStatus::ChannelLoss: return "ChannelLoss";
        case TxStatus::Collision: return "Collision";
        default: return "Exhausted";
    }
}

// Terminal record of one link-layer transaction.
struct TxOutcome {
    TxStatus status = TxStatus::Delivered;
    int attempts_used = 0;
    slot_t completion_slot = 0;
    TxStatus last_failure = TxStatus::ChannelLoss;  // meaningful when Exhausted
};

// A frame committed to the air in the current slot. rx is kNoNode for DIO
// broadcasts. Commit order is the CCA order and fixes all resolution draws.
struct CommittedTx {
    node_id tx = kNoNode;
    node_id rx = kNoNode;
    bool dio = false;
    DioMessage msg;
};

// Idealized carrier sense: busy iff some already-committed transmitter lies
// within communication range of `node` (itself included). Deferred attempts
// back off without consuming a retry.
inline bool cca_busy(node_id node, const std::vector<CommittedTx>& committed,
                     const Topology& topo, double comm_range_m) {
    for (const auto& c : committed) {
        if (c.tx == node) return true;
        if (topo.dist(c.tx, node) <= comm_range_m) return true;
    }
    return false;
}

inline bool is_committed_transmitter(node_id node, const std::vector<CommittedTx>& committed) {
    for (const auto& c : committed)
        if (c.tx == node) return true;
    return false;
}

// Receiver-centric overlap: the frame from `tx` collides at `rx` iff any
// other committed transmitter sits within interference range of `rx`.
inline bool collision_at(node_id rx, node_id tx, const std::vector<CommittedTx>& committed,
                         const Topology& topo, double interference_range_m) {
    for (const auto& c : committed) {
        if (c.tx == tx) continue;
        if (topo.dist(c.tx, rx) <= interference_range_m) return true;
    }
    return false;
}

// Classifies one committed unicast attempt at slot end. A transmitting
// receiver is deaf and counts as a collision; only interference-free
// attempts consume a channel draw, so the draw sequence is a deterministic
// function of the commit schedule.
inline TxStatus resolve_attempt(const CommittedTx& frame, const std::vector<CommittedTx>& committed,
                                const Topology& topo, double interference_range_m,
                                const LinkModel& link, RngStream& channel_rng) {
    if (is_committed_transmitter(frame.rx, committed)) return TxStatus::Collision;
    if (collision_at(frame.rx, frame.tx, committed, topo, interference_range_m))
        return TxStatus::Collision;
    return link.draw_delivery(frame.tx, frame.rx, channel_rng) ? TxStatus::Delivered
                                                               : TxStatus::ChannelLoss;
}

inline slot_t draw_backoff(const MacParams& mac, RngStream& rng) {
    return rng.uniform_int(mac.backoff_min_slots, mac.backoff_max_slots);
}

} // namespace qrplsim
