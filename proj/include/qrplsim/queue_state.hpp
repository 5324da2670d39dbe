#pragma once
#include <deque>
#include <optional>

#include "types.hpp"

namespace qrplsim {

enum class EnqueueResult : std::uint8_t { Accepted, DroppedOverflow };

// Per-node FIFO output buffer. Tracks the EWMA backlog factor fed into the
// reward signal and the consecutive-overflow count that drives the Trickle
// reset trigger. The instantaneous ratio is sampled after each enqueue
// outcome and each dequeue, using the post-operation queue length.
class QueueState {
public:
    QueueState() = default;
    QueueState(int capacity, double ewma_beta) : capacity_(capacity), beta_(ewma_beta) {}

    EnqueueResult enqueue(const Packet& pkt) {
        EnqueueResult result;
        if (static_cast<int>(backlog_.size()) < capacity_) {
            backlog_.push_back(pkt);
            consecutive_drops_ = 0;
            result = EnqueueResult::Accepted;
        } else {
            ++consecutive_drops_;
            result = EnqueueResult::DroppedOverflow;
        }
        update_bf();
        return result;
    }

    std::optional<Packet> dequeue() {
        if (backlog_.empty()) return std::nullopt;
        Packet pkt = backlog_.front();
        backlog_.pop_front();
        update_bf();
        return pkt;
    }

    // bf := beta * (len/capacity) + (1 - beta) * bf
    double update_bf() {
        const double ratio = static_cast<double>(backlog_.size()) / capacity_;
        bf_ = beta_ * ratio + (1.0 - beta_) * bf_;
        return bf_;
    }

    const Packet* front() const { return backlog_.empty() ? nullptr : &backlog_.front(); }
    int length() const { return static_cast<int>(backlog_.size()); }
    int capacity() const { return capacity_; }
    bool empty() const { return backlog_.empty(); }
    double bf() const { return bf_; }
    int consecutive_drops() const { return consecutive_drops_; }
    void clear_consecutive_drops() { consecutive_drops_ = 0; }

    const std::deque<Packet>& backlog() const { return backlog_; }

private:
    int capacity_ = 10;
    double beta_ = 0.3;
    std::deque<Packet> backlog_;
    double bf_ = 0.0;
    int consecutive_drops_ = 0;
};

} // namespace qrplsim
