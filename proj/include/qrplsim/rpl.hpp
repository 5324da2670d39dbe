#pragma once
#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <deque>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "config.hpp"
#include "rng.hpp"
#include "types.hpp"

namespace qrplsim {

// ---------------------------------------------------------------------------
// RANK piggyback codec: rank = eta * (hop + 1) + q with q the quantized
// backlog factor, so one 16-bit field carries both values.
// ---------------------------------------------------------------------------

inline int round_half_even(double v) {
    const double fl = std::floor(v);
    const double frac = v - fl;
    const auto lo = static_cast<long long>(fl);
    if (frac > 0.5) return static_cast<int>(lo + 1);
    if (frac < 0.5) return static_cast<int>(lo);
    return static_cast<int>(lo % 2 == 0 ? lo : lo + 1);
}

struct RankCodec {
    int eta = 100;

    int max_hops() const { return 65536 / eta - 2; }

    // Quantizes bf to q in [0, eta-1]; hop beyond max_hops() cannot be
    // represented for every bf and is rejected outright.
    std::uint16_t encode(int hop, double bf) const {
        if (hop < 0 || hop > max_hops())
            throw HopOverflow("hop " + std::to_string(hop) +
                              " does not fit the 16-bit rank with eta " + std::to_string(eta));
        const int q = round_half_even(bf * (eta - 1));
        const long long rank = static_cast<long long>(eta) * (hop + 1) + q;
        return static_cast<std::uint16_t>(rank);
    }

    struct Decoded {
        double bf = 0.0;
        int hop = 0;
    };

    Decoded decode(std::uint16_t rank) const {
        const int hop = rank / eta - 1;
        if (hop < 0)
            throw MalformedRank("rank " + std::to_string(rank) + " decodes to hop " +
                                std::to_string(hop));
        const int q = rank % eta;
        return Decoded{static_cast<double>(q) / (eta - 1), hop};
    }
};

// In MRHOF mode the same 16-bit field carries the advertised ETX path cost
// in fixed rank units instead of the (hop, bf) packing.
inline std::uint16_t encode_path_cost(double cost, double rank_unit) {
    const double scaled = cost * rank_unit;
    // 0xFFFF doubles as the unreachable sentinel, so saturate everything at or
    // above it (including inf) before rounding.
    if (!(scaled < 65535.0)) return 65535;
    return static_cast<std::uint16_t>(std::llround(scaled));
}

inline double decode_path_cost(std::uint16_t rank, double rank_unit) {
    return static_cast<double>(rank) / rank_unit;
}

// ---------------------------------------------------------------------------
// DIO message and its fixed 8-byte trace image (little-endian).
// ---------------------------------------------------------------------------

struct DioMessage {
    node_id sender = kNoNode;
    std::uint16_t rank_new = 0;
    slot_t emit_slot = 0;
};

inline std::array<std::uint8_t, 8> dio_wire_bytes(const DioMessage& dio) {
    std::array<std::uint8_t, 8> out{};
    const auto put16 = [&](int at, std::uint16_t v) {
        out[at] = static_cast<std::uint8_t>(v & 0xFF);
        out[at + 1] = static_cast<std::uint8_t>(v >> 8);
    };
    put16(0, dio.sender);
    put16(2, dio.rank_new);
    const auto slot = static_cast<std::uint32_t>(dio.emit_slot);
    out[4] = static_cast<std::uint8_t>(slot & 0xFF);
    out[5] = static_cast<std::uint8_t>((slot >> 8) & 0xFF);
    out[6] = static_cast<std::uint8_t>((slot >> 16) & 0xFF);
    out[7] = static_cast<std::uint8_t>((slot >> 24) & 0xFF);
    return out;
}

inline DioMessage dio_from_wire(const std::array<std::uint8_t, 8>& in) {
    DioMessage dio;
    dio.sender = static_cast<node_id>(in[0] | (in[1] << 8));
    dio.rank_new = static_cast<std::uint16_t>(in[2] | (in[3] << 8));
    dio.emit_slot = static_cast<slot_t>(
        static_cast<std::uint32_t>(in[4]) | (static_cast<std::uint32_t>(in[5]) << 8) |
        (static_cast<std::uint32_t>(in[6]) << 16) | (static_cast<std::uint32_t>(in[7]) << 24));
    return dio;
}

// ---------------------------------------------------------------------------
// ETX over a sliding window of MAC attempts.
// ---------------------------------------------------------------------------

class EtxEstimator {
public:
    EtxEstimator() = default;
    EtxEstimator(int window, double etx_unknown)
        : window_(window), etx_unknown_(etx_unknown) {}

    // A completed transaction contributes one entry per MAC attempt; only
    // the final attempt of a delivered transaction is a success.
    void record_transaction(int attempts_used, bool delivered) {
        for (int i = 0; i < attempts_used; ++i) {
            const bool success = delivered && i == attempts_used - 1;
            push(success);
        }
    }

    double etx() const {
        if (successes_ == 0) return etx_unknown_;
        return static_cast<double>(attempts_.size()) / successes_;
    }

    int window_attempts() const { return static_cast<int>(attempts_.size()); }
    int window_successes() const { return successes_; }

    // A full window without a single success marks the uplink as dead, as
    // opposed to merely unmeasured.
    bool measured_unreachable() const {
        return successes_ == 0 && static_cast<int>(attempts_.size()) >= window_;
    }

private:
    void push(bool success) {
        attempts_.push_back(success);
        if (success) ++successes_;
        if (static_cast<int>(attempts_.size()) > window_) {
            if (attempts_.front()) --successes_;
            attempts_.pop_front();
        }
    }

    int window_ = 32;
    double etx_unknown_ = 16.0;
    std::deque<bool> attempts_;
    int successes_ = 0;
};

// ---------------------------------------------------------------------------
// Neighbor table. Entries are created by DIO reception only, so every entry
// carries decoded advertisement state; stale entries are evicted by the
// liveness sweep.
// ---------------------------------------------------------------------------

struct NeighborEntry {
    node_id neighbor = kNoNode;
    int hop = -1;             // decoded H(y); -1 until meaningful
    double bf = 0.0;          // decoded BF(y)
    double path_cost = std::numeric_limits<double>::infinity();  // MRHOF advertisement
    slot_t last_dio_slot = 0;
    EtxEstimator etx;
};

class NeighborTable {
public:
    NeighborTable() = default;
    NeighborTable(int etx_window, double etx_unknown)
        : etx_window_(etx_window), etx_unknown_(etx_unknown) {}

    NeighborEntry* find(node_id id) {
        for (auto& e : entries_)
            if (e.neighbor == id) return &e;
        return nullptr;
    }
    const NeighborEntry* find(node_id id) const {
        for (const auto& e : entries_)
            if (e.neighbor == id) return &e;
        return nullptr;
    }

    // Ordered by id so every iteration over neighbors is deterministic.
    NeighborEntry& get_or_create(node_id id, bool& created) {
        if (auto* e = find(id)) {
            created = false;
            return *e;
        }
        created = true;
        auto at = std::find_if(entries_.begin(), entries_.end(),
                               [&](const NeighborEntry& e) { return e.neighbor > id; });
        at = entries_.insert(at, NeighborEntry{});
        at->neighbor = id;
        at->etx = EtxEstimator(etx_window_, etx_unknown_);
        return *at;
    }

    template <typename Fn>
    void erase_if(Fn&& pred) {
        entries_.erase(std::remove_if(entries_.begin(), entries_.end(), pred), entries_.end());
    }

    std::vector<NeighborEntry>& entries() { return entries_; }
    const std::vector<NeighborEntry>& entries() const { return entries_; }
    bool empty() const { return entries_.empty(); }
    std::size_t size() const { return entries_.size(); }

private:
    int etx_window_ = 32;
    double etx_unknown_ = 16.0;
    std::vector<NeighborEntry> entries_;
};

// ---------------------------------------------------------------------------
// Trickle timer with the consecutive-queue-loss reset strategy. Suppression
// is disabled: every fire emits a DIO.
// ---------------------------------------------------------------------------

class TrickleState {
public:
    TrickleState() = default;
    TrickleState(const TrickleParams& params, double slot_duration_s)
        : params_(params),
          slot_duration_s_(slot_duration_s),
          current_interval_s_(params.i_min_s),
          phi_(params.phi_init) {}

    bool running() const { return running_; }
    double current_interval_s() const { return current_interval_s_; }
    int phi() const { return phi_; }
    slot_t next_fire_slot() const { return next_fire_slot_; }
    const TrickleParams& params() const { return params_; }

    slot_t start(slot_t now, RngStream& rng) {
        running_ = true;
        current_interval_s_ = params_.i_min_s;
        return reschedule(now, rng);
    }

    // Fire: emit unconditionally, double the interval (clamped at i_max) and
    // draw the next fire point in [I/2, I) of the new interval.
    slot_t on_fire(slot_t now, RngStream& rng) {
        current_interval_s_ = std::min(2.0 * current_interval_s_, params_.i_max_s());
        return reschedule(now, rng);
    }

    // Queue-loss trigger: at phi consecutive overflow drops the interval
    // collapses to i_min and phi is raised by phi_0.
    bool on_queue_loss(slot_t now, int consecutive_drops, RngStream& rng) {
        if (consecutive_drops < phi_) return false;
        current_interval_s_ = params_.i_min_s;
        reschedule(now, rng);
        phi_ += params_.phi_0;
        return true;
    }

    // No-loss window X elapsed: reinitialize the threshold.
    void on_window_x() { phi_ = params_.phi_init; }

    // Standard topology-inconsistency reset (baselines only by default).
    slot_t on_inconsistency(slot_t now, RngStream& rng) {
        current_interval_s_ = params_.i_min_s;
        return reschedule(now, rng);
    }

    double draw_gap_s(RngStream& rng) const {
        return rng.uniform(current_interval_s_ / 2.0, current_interval_s_);
    }

    slot_t window_x_slots() const {
        return std::max<slot_t>(1, static_cast<slot_t>(
                                       std::llround(params_.window_x_s / slot_duration_s_)));
    }

private:
    slot_t reschedule(slot_t now, RngStream& rng) {
        const double gap_s = draw_gap_s(rng);
        const auto gap_slots =
            std::max<slot_t>(1, static_cast<slot_t>(std::llround(gap_s / slot_duration_s_)));
        next_fire_slot_ = now + gap_slots;
        return next_fire_slot_;
    }

    TrickleParams params_;
    double slot_duration_s_ = 0.010;
    double current_interval_s_ = 3.0;
    int phi_ = 2;
    slot_t next_fire_slot_ = 0;
    bool running_ = false;
};

// ---------------------------------------------------------------------------
// Baseline objective functions.
// ---------------------------------------------------------------------------

struct ParentCandidate {
    node_id id = kNoNode;
    double etx = 0.0;
    int hop = -1;
    double path_cost = std::numeric_limits<double>::infinity();  // neighbor's advertisement

    double total_cost() const { return etx + path_cost; }
};

// MRHOF: minimize etx(x,y) + advertised path cost of y, with a switching
// hysteresis against the incumbent. Ties break toward the lowest id.
inline node_id mrhof_select(const std::vector<ParentCandidate>& candidates,
                            std::optional<node_id> incumbent, double hysteresis) {
    if (candidates.empty()) throw NoViableParent("empty candidate set");
    const ParentCandidate* best = nullptr;
    for (const auto& c : candidates) {
        if (!std::isfinite(c.total_cost())) continue;
        if (!best || c.total_cost() < best->total_cost() ||
            (c.total_cost() == best->total_cost() && c.id < best->id)) {
            best = &c;
        }
    }
    if (!best) throw NoViableParent("every candidate has infinite path cost");
    if (incumbent) {
        for (const auto& c : candidates) {
            if (c.id != *incumbent || !std::isfinite(c.total_cost())) continue;
            if (best->total_cost() + hysteresis >= c.total_cost()) return c.id;
        }
    }
    return best->id;
}

// OF0: minimum advertised hop; ties by lowest etx, then lowest id.
inline node_id of0_select(const std::vector<ParentCandidate>& candidates) {
    if (candidates.empty()) throw NoViableParent("empty candidate set");
    const ParentCandidate* best = nullptr;
    for (const auto& c : candidates) {
        if (c.hop < 0) continue;
        if (!best) {
            best = &c;
            continue;
        }
        if (c.hop != best->hop) {
            if (c.hop < best->hop) best = &c;
        } else if (c.etx != best->etx) {
            if (c.etx < best->etx) best = &c;
        } else if (c.id < best->id) {
            best = &c;
        }
    }
    if (!best) throw NoViableParent("no candidate advertises a hop count");
    return best->id;
}

} // namespace qrplsim
