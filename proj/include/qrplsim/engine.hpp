#pragma once
#include <algorithm>
#include <cassert>
#include <climits>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "config.hpp"
#include "events.hpp"
#include "mac.hpp"
#include "metrics.hpp"
#include "phy.hpp"
#include "qroute.hpp"
#include "queue_state.hpp"
#include "rng.hpp"
#include "rpl.hpp"
#include "types.hpp"

namespace qrplsim {

// Poisson arrivals as sorted absolute times; the in-run generator uses the
// same one-gap-ahead recurrence, so both share one distribution.
inline std::vector<double> generate_arrivals(double rate_ppm, double duration_s,
                                             RngStream& rng) {
    std::vector<double> times;
    if (rate_ppm <= 0.0) return times;
    const double mean_gap_s = 60.0 / rate_ppm;
    double t = rng.exponential(mean_gap_s);
    while (t < duration_s) {
        times.push_back(t);
        t += rng.exponential(mean_gap_s);
    }
    return times;
}

// After slotframes_total, arrivals and the control plane stop but pending
// transactions keep running so queued packets can reach a terminal state.
inline constexpr int kDrainSlotframesCap = 20;

struct Transaction {
    bool active = false;
    node_id dest = kNoNode;  // bound when the transaction starts
    int attempts = 0;
    std::uint64_t packet_id = 0;
    bool counted = false;
    TxStatus last_failure = TxStatus::ChannelLoss;
};

struct QSnapshotRow {
    slot_t slot = 0;
    node_id node = kNoNode;
    node_id neighbor = kNoNode;
    double q = 0.0;
};

struct NodeState {
    QueueState queue;
    NeighborTable neighbors;
    TrickleState trickle;
    QTable qtable;
    node_id parent = kNoNode;
    Transaction tx;
    bool trickle_started = false;
    bool dio_pending = false;
    std::uint64_t trickle_epoch = 0;  // stale TrickleFire events carry old epochs
    std::uint64_t loss_epoch = 0;     // stale window-X events carry old epochs
    double next_arrival_s = 0.0;
    NodeCounters counters;
    RngStream traffic_rng;
    RngStream backoff_rng;
    RngStream selection_rng;
    RngStream trickle_rng;
};

class Simulation {
public:
    Simulation(const SimConfig& cfg, std::uint32_t run_index,
               const Topology* fixed_topology = nullptr)
        : cfg_(cfg), run_index_(run_index), codec_{cfg.rpl.eta} {
        if (fixed_topology) {
            if (fixed_topology->node_count() != cfg.node_count)
                throw ConfigInvalid("fixed topology has " +
                                    std::to_string(fixed_topology->node_count()) +
                                    " nodes but node_count is " +
                                    std::to_string(cfg.node_count));
            topo_ = *fixed_topology;
        } else {
            RngStream topo_rng = make_substream(cfg.rng_seed, run_index, "topology");
            topo_ = place_nodes(cfg, topo_rng);
        }
        shadow_rng_ = make_substream(cfg.rng_seed, run_index, "shadowing");
        link_ = LinkModel(topo_, cfg.channel, shadow_rng_);

        comm_range_m_ = cfg.channel.comm_range_m();
        interference_range_m_ = comm_range_m_ * cfg.channel.interference_range_factor;
        end_slot_ = cfg.end_slot();
        warmup_end_ = cfg.warmup_end_slot();
        drain_end_ = end_slot_ + static_cast<slot_t>(kDrainSlotframesCap) *
                                     cfg.slots_per_slotframe;
        liveness_age_slots_ = static_cast<slot_t>(
            std::llround(4.0 * cfg.trickle.i_max_s() / cfg.slot_duration_s));

        const int n = cfg.node_count;
        nodes_.resize(n);
        neighbor_ids_.resize(n);
        for (int i = 0; i < n; ++i) {
            auto& node = nodes_[i];
            node.queue = QueueState(cfg.buffer_size, cfg.ewma_beta);
            node.neighbors = NeighborTable(cfg.rpl.etx_window, cfg.rpl.etx_unknown);
            node.trickle = TrickleState(cfg.trickle, cfg.slot_duration_s);
            node.traffic_rng =
                make_substream(cfg.rng_seed, run_index, "traffic-per-node",
                               static_cast<node_id>(i));
            node.backoff_rng = make_substream(cfg.rng_seed, run_index, "mac-backoff",
                                              static_cast<node_id>(i));
            node.selection_rng = make_substream(cfg.rng_seed, run_index,
                                                "parent-selection",
                                                static_cast<node_id>(i));
            node.trickle_rng = make_substream(cfg.rng_seed, run_index, "trickle",
                                              static_cast<node_id>(i));
            for (int j = 0; j < n; ++j) {
                if (j == i) continue;
                if (topo_.dist(static_cast<node_id>(i), static_cast<node_id>(j)) <=
                    comm_range_m_)
                    neighbor_ids_[i].push_back(static_cast<node_id>(j));
            }
        }
    }

    const Topology& topology() const { return topo_; }

    // Optional trace sinks, filled when non-null.
    std::vector<DioMessage>* dio_trace = nullptr;
    std::vector<QSnapshotRow>* q_trace = nullptr;

    RunMetrics run() {
        if (ran_) throw std::logic_error("Simulation::run may only be called once");
        ran_ = true;

        // Root runs Trickle from the start; everyone else joins on a DIO.
        start_trickle(kRootId, 0);
        const double mean_gap_s = 60.0 / cfg_.traffic_ppm;
        for (int i = 1; i < cfg_.node_count; ++i) {
            auto& node = nodes_[i];
            node.next_arrival_s = node.traffic_rng.exponential(mean_gap_s);
            schedule_arrival(static_cast<node_id>(i), 0);
        }
        eq_.schedule(Event{static_cast<slot_t>(cfg_.slots_per_slotframe), 0,
                           EventKind::QueueSample, kNoNode, 0},
                     0);
        eq_.schedule(Event{end_slot_, 0, EventKind::RunEnd, kNoNode, 0}, 0);

        while (!eq_.empty()) {
            const slot_t slot = eq_.top().fire_slot;
            if (slot > drain_end_) break;
            committed_.clear();
            while (!eq_.empty() && eq_.top().fire_slot == slot) dispatch(eq_.pop(), slot);
            resolve_slot(slot);
        }
        return finalize();
    }

private:
    // ---- scheduling helpers -------------------------------------------------

    void schedule_arrival(node_id v, slot_t now) {
        const auto& node = nodes_[v];
        const auto slot = static_cast<slot_t>(node.next_arrival_s / cfg_.slot_duration_s);
        if (slot >= end_slot_) return;
        eq_.schedule(Event{std::max(slot, now), 0, EventKind::PacketArrival, v, 0}, now);
    }

    void start_trickle(node_id v, slot_t now) {
        auto& node = nodes_[v];
        node.trickle_started = true;
        node.trickle.start(now, node.trickle_rng);
        schedule_trickle_fire(v, now);
    }

    void schedule_trickle_fire(node_id v, slot_t now) {
        auto& node = nodes_[v];
        ++node.trickle_epoch;
        eq_.schedule(Event{node.trickle.next_fire_slot(), 0, EventKind::TrickleFire, v,
                           node.trickle_epoch},
                     now);
    }

    void start_transaction(node_id v, slot_t now) {
        auto& node = nodes_[v];
        const Packet* head = node.queue.front();
        node.tx.active = true;
        node.tx.dest = node.parent;
        node.tx.attempts = 0;
        node.tx.packet_id = head->id;
        node.tx.counted = head->counted;
        eq_.schedule(Event{now + 1, 0, EventKind::MacAttempt, v, 0}, now);
    }

    // ---- event dispatch -----------------------------------------------------

    void dispatch(const Event& ev, slot_t slot) {
        switch (ev.kind) {
            case EventKind::PacketArrival: on_arrival(ev.node, slot); break;
            case EventKind::MacAttempt:
                if (ev.token == 1)
                    on_dio_attempt(ev.node, slot);
                else
                    on_data_attempt(ev.node, slot);
                break;
            case EventKind::TrickleFire: on_trickle_fire(ev.node, ev.token, slot); break;
            case EventKind::TrickleWindowX: on_window_x(ev.node, ev.token, slot); break;
            case EventKind::QueueSample: on_housekeeping(slot); break;
            case EventKind::RunEnd: on_run_end(slot); break;
        }
    }

    void on_arrival(node_id v, slot_t slot) {
        auto& node = nodes_[v];
        Packet pkt;
        pkt.id = next_packet_id_++;
        pkt.src = v;
        pkt.gen_slot = slot;
        pkt.counted = slot >= warmup_end_;
        if (pkt.counted) {
            ++node.counters.generated;
            ++totals_.generated;
        }
        accept_packet(v, pkt, slot);
        const double mean_gap_s = 60.0 / cfg_.traffic_ppm;
        node.next_arrival_s += node.traffic_rng.exponential(mean_gap_s);
        schedule_arrival(v, slot);
    }

    // Shared by local arrivals and forwarded deliveries: enqueue, run the
    // overflow machinery, and kick the transmitter when it sits idle.
    void accept_packet(node_id v, const Packet& pkt, slot_t slot) {
        auto& node = nodes_[v];
        const auto outcome = node.queue.enqueue(pkt);
        if (outcome == EnqueueResult::Accepted) {
            if (!node.tx.active && node.parent != kNoNode) start_transaction(v, slot);
            return;
        }
        if (pkt.counted) {
            ++node.counters.queue_drops;
            ++totals_.queue_drops;
        }
        // The congestion-triggered reset is the learning variant's machinery;
        // baselines run the standard timer and only reset on parent change.
        if (cfg_.objective_function == ObjectiveFunction::QRPL &&
            node.trickle_started && slot < end_slot_) {
            ++node.loss_epoch;
            eq_.schedule(Event{slot + node.trickle.window_x_slots(), 0,
                               EventKind::TrickleWindowX, v, node.loss_epoch},
                         slot);
            if (node.trickle.on_queue_loss(slot, node.queue.consecutive_drops(),
                                           node.trickle_rng))
                schedule_trickle_fire(v, slot);
        }
    }

    void on_data_attempt(node_id v, slot_t slot) {
        auto& node = nodes_[v];
        if (!node.tx.active) return;  // parent loss can orphan a scheduled attempt
        if (is_committed_transmitter(v, committed_) ||
            (cfg_.mac.cca_enabled && cca_busy(v, committed_, topo_, comm_range_m_))) {
            eq_.schedule(Event{slot + draw_backoff(cfg_.mac, node.backoff_rng), 0,
                               EventKind::MacAttempt, v, 0},
                         slot);
            return;
        }
        committed_.push_back(CommittedTx{v, node.tx.dest, false, DioMessage{}});
        ++node.tx.attempts;
        if (slot >= warmup_end_ && slot < end_slot_) ++node.counters.data_tx;
    }

    void on_dio_attempt(node_id v, slot_t slot) {
        auto& node = nodes_[v];
        if (!node.dio_pending) return;
        if (slot >= end_slot_) {
            node.dio_pending = false;
            return;
        }
        if (is_committed_transmitter(v, committed_) ||
            (cfg_.mac.cca_enabled && cca_busy(v, committed_, topo_, comm_range_m_))) {
            eq_.schedule(Event{slot + draw_backoff(cfg_.mac, node.backoff_rng), 0,
                               EventKind::MacAttempt, v, 1},
                         slot);
            return;
        }
        node.dio_pending = false;
        DioMessage msg = make_dio(v, slot);
        committed_.push_back(CommittedTx{v, kNoNode, true, msg});
        if (slot >= warmup_end_) ++node.counters.dio_sent;
        if (dio_trace) dio_trace->push_back(msg);
    }

    void on_trickle_fire(node_id v, std::uint64_t token, slot_t slot) {
        auto& node = nodes_[v];
        if (token != node.trickle_epoch) return;  // superseded by a reset
        if (slot >= end_slot_) return;            // control plane stops at the end
        const bool attached = v == kRootId || node.parent != kNoNode;
        if (attached && !node.dio_pending) {
            node.dio_pending = true;
            eq_.schedule(Event{slot, 0, EventKind::MacAttempt, v, 1}, slot);
        }
        node.trickle.on_fire(slot, node.trickle_rng);
        schedule_trickle_fire(v, slot);
    }

    void on_window_x(node_id v, std::uint64_t token, slot_t slot) {
        auto& node = nodes_[v];
        if (token != node.loss_epoch) return;  // a later drop restarted the window
        if (slot >= end_slot_) return;
        node.trickle.on_window_x();
        node.queue.clear_consecutive_drops();
    }

    void on_housekeeping(slot_t slot) {
        if (slot >= end_slot_) return;
        evict_stale_neighbors(slot);
        assert_acyclic();
        if (q_trace) {
            for (std::size_t v = 0; v < nodes_.size(); ++v)
                for (const auto& e : nodes_[v].qtable.entries())
                    q_trace->push_back(QSnapshotRow{slot, static_cast<node_id>(v),
                                                    e.neighbor, e.q});
        }
        eq_.schedule(Event{slot + cfg_.slots_per_slotframe, 0, EventKind::QueueSample,
                           kNoNode, 0},
                     slot);
    }

    void on_run_end(slot_t slot) {
        // End-of-run snapshot; MAC keeps draining afterwards.
        for (std::size_t v = 0; v < nodes_.size(); ++v) {
            nodes_[v].counters.hop_at_end = tree_depth(static_cast<node_id>(v));
            if (v != kRootId && nodes_[v].parent != kNoNode)
                ++nodes_[nodes_[v].parent].counters.children;
        }
        (void)slot;
    }

    // ---- slot resolution ----------------------------------------------------

    void resolve_slot(slot_t slot) {
        for (const auto& frame : committed_) {
            if (frame.dio)
                resolve_dio(frame, slot);
            else
                resolve_data(frame, slot);
        }
    }

    void resolve_dio(const CommittedTx& frame, slot_t slot) {
        for (node_id v : neighbor_ids_[frame.tx]) {
            if (is_committed_transmitter(v, committed_)) continue;
            if (collision_at(v, frame.tx, committed_, topo_, interference_range_m_))
                continue;
            if (!link_.draw_delivery(frame.tx, v, shadow_rng_)) continue;
            if (v != kRootId) process_dio(v, frame.msg, slot);
        }
    }

    void resolve_data(const CommittedTx& frame, slot_t slot) {
        const TxStatus status = resolve_attempt(frame, committed_, topo_,
                                                interference_range_m_, link_, shadow_rng_);
        auto& node = nodes_[frame.tx];
        auto& tx = node.tx;
        if (status == TxStatus::Delivered) {
            record_etx(frame.tx, tx.dest, tx.attempts, true);
            auto pkt = node.queue.dequeue();
            assert(pkt && pkt->id == tx.packet_id);
            if (tx.counted) {
                ++node.counters.mac_offered;
                ++node.counters.forwarded;
            }
            if (tx.dest == kRootId) {
                if (pkt->counted) {
                    ++totals_.delivered;
                    ++delivered_count_;
                    delay_sum_s_ +=
                        static_cast<double>(slot - pkt->gen_slot) * cfg_.slot_duration_s;
                }
            } else {
                accept_packet(tx.dest, *pkt, slot);
            }
            finish_transaction(frame.tx, slot);
            return;
        }
        tx.last_failure = status;
        if (status == TxStatus::Collision)
            ++node.counters.collision_attempts;
        else
            ++node.counters.channel_loss_attempts;
        if (tx.attempts >= cfg_.retransmission_limit + 1) {
            record_etx(frame.tx, tx.dest, tx.attempts, false);
            auto pkt = node.queue.dequeue();
            assert(pkt && pkt->id == tx.packet_id);
            (void)pkt;
            if (tx.counted) {
                ++node.counters.mac_offered;
                ++node.counters.link_drops;
                ++totals_.link_drops;
            }
            finish_transaction(frame.tx, slot);
            return;
        }
        eq_.schedule(Event{slot + draw_backoff(cfg_.mac, node.backoff_rng), 0,
                           EventKind::MacAttempt, frame.tx, 0},
                     slot);
    }

    void finish_transaction(node_id v, slot_t slot) {
        auto& node = nodes_[v];
        node.tx.active = false;
        if (!node.queue.empty() && node.parent != kNoNode) start_transaction(v, slot);
    }

    void record_etx(node_id v, node_id dest, int attempts, bool delivered) {
        // The destination may have been evicted mid-transaction; attempts on
        // a vanished entry are simply not recorded.
        if (auto* e = nodes_[v].neighbors.find(dest)) e->etx.record_transaction(attempts, delivered);
    }

    // ---- control plane ------------------------------------------------------

    DioMessage make_dio(node_id v, slot_t slot) {
        DioMessage msg;
        msg.sender = v;
        msg.emit_slot = slot;
        if (cfg_.objective_function == ObjectiveFunction::MRHOF) {
            msg.rank_new = encode_path_cost(advertised_cost(v), cfg_.rpl.mrhof_rank_unit);
        } else {
            const double bf = v == kRootId ? 0.0 : std::clamp(nodes_[v].queue.bf(), 0.0, 1.0);
            msg.rank_new = codec_.encode(advertised_hop(v), bf);
        }
        return msg;
    }

    int advertised_hop(node_id v) const {
        if (v == kRootId) return 0;
        const auto& node = nodes_[v];
        if (node.parent == kNoNode) return -1;
        const auto* e = node.neighbors.find(node.parent);
        return e && e->hop >= 0 ? e->hop + 1 : -1;
    }

    double advertised_cost(node_id v) const {
        if (v == kRootId) return 0.0;
        const auto& node = nodes_[v];
        if (node.parent == kNoNode) return std::numeric_limits<double>::infinity();
        const auto* e = node.neighbors.find(node.parent);
        if (!e) return std::numeric_limits<double>::infinity();
        return e->path_cost + e->etx.etx();
    }

    void process_dio(node_id v, const DioMessage& msg, slot_t slot) {
        auto& node = nodes_[v];
        bool created = false;
        auto& e = node.neighbors.get_or_create(msg.sender, created);
        e.last_dio_slot = slot;
        if (cfg_.objective_function == ObjectiveFunction::MRHOF) {
            e.path_cost = msg.rank_new == 0xFFFF
                              ? std::numeric_limits<double>::infinity()
                              : decode_path_cost(msg.rank_new, cfg_.rpl.mrhof_rank_unit);
        } else {
            const auto dec = codec_.decode(msg.rank_new);
            e.hop = dec.hop;
            e.bf = dec.bf;
        }
        switch (cfg_.objective_function) {
            case ObjectiveFunction::QRPL: {
                // Feed the learner only once the uplink has a real ETX sample.
                // An unmeasured link would inject the pessimistic etx_unknown
                // placeholder and its huge Q would swamp the softmax; leaving
                // Q at the initial 0 keeps fresh links attractive until tried.
                if (e.etx.window_successes() > 0) {
                    const double r =
                        reward(e.bf, e.etx.etx(), e.hop, cfg_.learning.bf_th);
                    node.qtable.update(msg.sender, r, cfg_.learning.alpha);
                } else {
                    node.qtable.ensure(msg.sender);
                }
                reselect_qrpl(v, slot);
                break;
            }
            case ObjectiveFunction::OF0: reselect_of0(v, slot); break;
            case ObjectiveFunction::MRHOF: reselect_mrhof(v, slot); break;
        }
    }

    bool creates_cycle(node_id v, node_id candidate) const {
        node_id cur = candidate;
        for (int steps = 0; steps <= cfg_.node_count; ++steps) {
            if (cur == v) return true;
            if (cur == kRootId || cur == kNoNode) return false;
            cur = nodes_[cur].parent;
        }
        return true;  // over-long chain; treat as unsafe
    }

    void adopt_parent(node_id v, node_id y, slot_t slot) {
        auto& node = nodes_[v];
        const bool changed = node.parent != y;
        node.parent = y;
        if (changed && node.trickle_started) ++node.counters.parent_changes;
        if (!node.trickle_started) {
            start_trickle(v, slot);
        } else if (changed && cfg_.trickle_resets_on_parent_change()) {
            node.trickle.on_inconsistency(slot, node.trickle_rng);
            schedule_trickle_fire(v, slot);
        }
        if (!node.tx.active && !node.queue.empty()) start_transaction(v, slot);
    }

    // Stochastic QRPL choice over the hop-filtered candidate set, re-drawn on
    // every received DIO. Candidates whose adoption would close a routing
    // loop are excluded and the distribution re-formed over the rest.
    void reselect_qrpl(node_id v, slot_t slot) {
        auto& node = nodes_[v];
        const int own = advertised_hop(v);
        const int own_hop = own >= 0 ? own : INT_MAX;
        std::vector<const NeighborEntry*> lower, equal;
        for (const auto& e : node.neighbors.entries()) {
            if (e.hop < 0) continue;
            // A dead uplink would enter the softmax with a huge Q and flatten
            // the whole distribution toward uniform; treat it as out of range.
            if (e.etx.measured_unreachable()) continue;
            if (e.hop < own_hop)
                lower.push_back(&e);
            else if (e.hop == own_hop)
                equal.push_back(&e);
        }
        std::vector<const NeighborEntry*> remaining = lower.empty() ? equal : lower;
        while (!remaining.empty()) {
            std::vector<double> q;
            q.reserve(remaining.size());
            for (const auto* e : remaining) q.push_back(node.qtable.value(e->neighbor));
            const auto probs = selection_distribution(q, cfg_.learning.theta);
            const auto idx = sample_index(probs, node.selection_rng);
            const node_id y = remaining[idx]->neighbor;
            if (!creates_cycle(v, y)) {
                adopt_parent(v, y, slot);
                return;
            }
            remaining.erase(remaining.begin() + idx);
        }
        // every candidate closes a loop: keep the current parent
    }

    void reselect_of0(node_id v, slot_t slot) {
        auto& node = nodes_[v];
        std::vector<ParentCandidate> cands;
        for (const auto& e : node.neighbors.entries()) {
            if (e.hop < 0) continue;
            cands.push_back(ParentCandidate{e.neighbor, e.etx.etx(), e.hop, 0.0});
        }
        while (!cands.empty()) {
            node_id y;
            try {
                y = of0_select(cands);
            } catch (const NoViableParent&) {
                return;
            }
            if (!creates_cycle(v, y)) {
                adopt_parent(v, y, slot);
                return;
            }
            cands.erase(std::find_if(cands.begin(), cands.end(),
                                     [&](const ParentCandidate& c) { return c.id == y; }));
        }
    }

    void reselect_mrhof(node_id v, slot_t slot) {
        auto& node = nodes_[v];
        std::vector<ParentCandidate> cands;
        for (const auto& e : node.neighbors.entries()) {
            if (!std::isfinite(e.path_cost)) continue;
            cands.push_back(ParentCandidate{e.neighbor, e.etx.etx(), e.hop, e.path_cost});
        }
        std::optional<node_id> incumbent;
        if (node.parent != kNoNode) incumbent = node.parent;
        while (!cands.empty()) {
            node_id y;
            try {
                y = mrhof_select(cands, incumbent, cfg_.rpl.mrhof_hysteresis);
            } catch (const NoViableParent&) {
                return;
            }
            if (!creates_cycle(v, y)) {
                adopt_parent(v, y, slot);
                return;
            }
            cands.erase(std::find_if(cands.begin(), cands.end(),
                                     [&](const ParentCandidate& c) { return c.id == y; }));
            if (incumbent && *incumbent == y) incumbent.reset();
        }
    }

    void evict_stale_neighbors(slot_t slot) {
        const slot_t horizon = slot - liveness_age_slots_;
        if (horizon <= 0) return;
        for (std::size_t v = 1; v < nodes_.size(); ++v) {
            auto& node = nodes_[v];
            bool lost_parent = false;
            node.neighbors.erase_if([&](const NeighborEntry& e) {
                if (e.last_dio_slot >= horizon) return false;
                node.qtable.erase(e.neighbor);
                if (e.neighbor == node.parent) lost_parent = true;
                return true;
            });
            if (lost_parent) {
                node.parent = kNoNode;
                switch (cfg_.objective_function) {
                    case ObjectiveFunction::QRPL:
                        reselect_qrpl(static_cast<node_id>(v), slot);
                        break;
                    case ObjectiveFunction::OF0:
                        reselect_of0(static_cast<node_id>(v), slot);
                        break;
                    case ObjectiveFunction::MRHOF:
                        reselect_mrhof(static_cast<node_id>(v), slot);
                        break;
                }
            }
        }
    }

    void assert_acyclic() const {
        for (std::size_t v = 1; v < nodes_.size(); ++v) {
            node_id cur = nodes_[v].parent;
            for (int steps = 0; steps <= cfg_.node_count; ++steps) {
                if (cur == kRootId || cur == kNoNode) break;
                if (steps == cfg_.node_count)
                    throw std::logic_error("parent graph contains a cycle through node " +
                                           std::to_string(v));
                cur = nodes_[cur].parent;
            }
        }
    }

    int tree_depth(node_id v) const {
        if (v == kRootId) return 0;
        int depth = 0;
        node_id cur = v;
        while (cur != kRootId) {
            cur = nodes_[cur].parent;
            if (cur == kNoNode) return -1;
            ++depth;
            if (depth > cfg_.node_count) return -1;
        }
        return depth;
    }

    // ---- end of run ---------------------------------------------------------

    RunMetrics finalize() {
        for (std::size_t v = 1; v < nodes_.size(); ++v) {
            const auto& node = nodes_[v];
            std::size_t at = 0;
            for (const auto& pkt : node.queue.backlog()) {
                if (pkt.counted) {
                    const bool in_service = node.tx.active && at == 0;
                    if (in_service)
                        ++totals_.in_flight_end;
                    else
                        ++totals_.in_queue_end;
                }
                ++at;
            }
        }
        const std::uint64_t accounted = totals_.delivered + totals_.queue_drops +
                                        totals_.link_drops + totals_.in_queue_end +
                                        totals_.in_flight_end;
        if (accounted != totals_.generated)
            throw std::logic_error("packet conservation violated: generated " +
                                   std::to_string(totals_.generated) + ", accounted " +
                                   std::to_string(accounted));
        std::vector<NodeCounters> per_node;
        per_node.reserve(nodes_.size());
        for (const auto& node : nodes_) per_node.push_back(node.counters);
        return compute_run_metrics(static_cast<int>(run_index_), totals_,
                                   std::move(per_node), delay_sum_s_, delivered_count_);
    }

    SimConfig cfg_;
    std::uint32_t run_index_ = 0;
    RankCodec codec_;
    Topology topo_;
    RngStream shadow_rng_;
    LinkModel link_;
    EventQueue eq_;
    std::vector<NodeState> nodes_;
    std::vector<std::vector<node_id>> neighbor_ids_;
    std::vector<CommittedTx> committed_;

    double comm_range_m_ = 0.0;
    double interference_range_m_ = 0.0;
    slot_t end_slot_ = 0;
    slot_t warmup_end_ = 0;
    slot_t drain_end_ = 0;
    slot_t liveness_age_slots_ = 0;

    std::uint64_t next_packet_id_ = 0;
    RunTotals totals_;
    double delay_sum_s_ = 0.0;
    std::uint64_t delivered_count_ = 0;
    bool ran_ = false;
};

// Runs cfg.runs independent replications and aggregates them.
inline MetricsReport run_experiment(const SimConfig& cfg,
                                    const Topology* fixed_topology = nullptr) {
    cfg.validate();
    MetricsReport report;
    report.config = cfg;
    for (int r = 0; r < cfg.runs; ++r) {
        Simulation sim(cfg, static_cast<std::uint32_t>(r), fixed_topology);
        report.runs.push_back(sim.run());
    }
    return report;
}

} // namespace qrplsim
