#pragma once
#include <cstdint>
#include <queue>
#include <vector>

#include "types.hpp"

namespace qrplsim {

enum class EventKind : std::uint8_t {
    PacketArrival,
    MacAttempt,
    TrickleFire,
    TrickleWindowX,
    QueueSample,
    RunEnd,
};

// Payload is deliberately flat: node addresses the acting node, token carries
// kind-specific data (loss-epoch for TrickleWindowX, dio flag for MacAttempt).
struct Event {
    slot_t fire_slot = 0;
    std::uint64_t sequence = 0;
    EventKind kind = EventKind::RunEnd;
    node_id node = kNoNode;
    std::uint64_t token = 0;
};

struct EventHandle {
    slot_t fire_slot = 0;
    std::uint64_t sequence = 0;
};

// Min-heap on (fire_slot, sequence): equal-slot events dispatch FIFO in
// insertion order.
class EventQueue {
public:
    EventHandle schedule(Event ev, slot_t current_slot) {
        if (ev.fire_slot < current_slot)
            throw SchedulingInPast("event at slot " + std::to_string(ev.fire_slot) +
                                   " scheduled while clock is at slot " +
                                   std::to_string(current_slot));
        ev.sequence = next_sequence_++;
        heap_.push(ev);
        return EventHandle{ev.fire_slot, ev.sequence};
    }

    bool empty() const { return heap_.empty(); }
    std::size_t size() const { return heap_.size(); }
    const Event& top() const { return heap_.top(); }

    Event pop() {
        Event ev = heap_.top();
        heap_.pop();
        return ev;
    }

private:
    struct Later {
        bool operator()(const Event& a, const Event& b) const {
            if (a.fire_slot != b.fire_slot) return a.fire_slot > b.fire_slot;
            return a.sequence > b.sequence;
        }
    };

    std::priority_queue<Event, std::vector<Event>, Later> heap_;
    std::uint64_t next_sequence_ = 0;
};

} // namespace qrplsim
