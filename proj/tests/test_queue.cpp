#include <catch2/catch_amalgamated.hpp>

#include "qrplsim/queue_state.hpp"

using namespace qrplsim;

static Packet pkt(std::uint64_t id) {
    Packet p;
    p.id = id;
    p.src = 1;
    p.gen_slot = 0;
    return p;
}

TEST_CASE("queue preserves FIFO order") {
    QueueState q(4, 0.3);
    for (std::uint64_t i = 0; i < 4; ++i) REQUIRE(q.enqueue(pkt(i)) == EnqueueResult::Accepted);
    REQUIRE(q.length() == 4);
    REQUIRE(q.front()->id == 0);
    for (std::uint64_t i = 0; i < 4; ++i) {
        const auto out = q.dequeue();
        REQUIRE(out);
        CHECK(out->id == i);
    }
    CHECK(q.empty());
    CHECK(q.dequeue() == std::nullopt);
    CHECK(q.front() == nullptr);
}

TEST_CASE("enqueue beyond capacity drops and counts consecutively") {
    QueueState q(2, 0.3);
    CHECK(q.enqueue(pkt(0)) == EnqueueResult::Accepted);
    CHECK(q.enqueue(pkt(1)) == EnqueueResult::Accepted);
    CHECK(q.enqueue(pkt(2)) == EnqueueResult::DroppedOverflow);
    CHECK(q.enqueue(pkt(3)) == EnqueueResult::DroppedOverflow);
    CHECK(q.consecutive_drops() == 2);
    CHECK(q.length() == 2);

    // an accepted packet breaks the streak
    q.dequeue();
    CHECK(q.enqueue(pkt(4)) == EnqueueResult::Accepted);
    CHECK(q.consecutive_drops() == 0);
}

TEST_CASE("clear_consecutive_drops resets only the streak") {
    QueueState q(1, 0.3);
    q.enqueue(pkt(0));
    q.enqueue(pkt(1));
    REQUIRE(q.consecutive_drops() == 1);
    q.clear_consecutive_drops();
    CHECK(q.consecutive_drops() == 0);
    CHECK(q.length() == 1);
}

TEST_CASE("backlog factor is a post-operation EWMA") {
    QueueState q(10, 0.3);
    CHECK(q.bf() == 0.0);
    q.enqueue(pkt(0));  // ratio 0.1
    CHECK(q.bf() == Catch::Approx(0.03));
    q.enqueue(pkt(1));  // ratio 0.2
    CHECK(q.bf() == Catch::Approx(0.3 * 0.2 + 0.7 * 0.03));
    q.dequeue();  // ratio 0.1
    CHECK(q.bf() == Catch::Approx(0.3 * 0.1 + 0.7 * (0.3 * 0.2 + 0.7 * 0.03)));
}

TEST_CASE("one enqueue filling the queue moves bf to beta") {
    QueueState q(1, 0.3);
    q.enqueue(pkt(0));
    CHECK(q.bf() == Catch::Approx(0.3));
    // overflow samples the (still full) queue again
    q.enqueue(pkt(1));
    CHECK(q.bf() == Catch::Approx(0.3 + 0.7 * 0.3));
}

TEST_CASE("bf converges toward the sustained occupancy ratio") {
    QueueState q(4, 0.3);
    q.enqueue(pkt(0));
    q.enqueue(pkt(1));  // hold at ratio 0.5
    for (int i = 0; i < 100; ++i) q.update_bf();
    CHECK(q.bf() == Catch::Approx(0.5).margin(1e-9));
}

TEST_CASE("backlog view exposes queued packets in order") {
    QueueState q(3, 0.3);
    q.enqueue(pkt(7));
    q.enqueue(pkt(8));
    REQUIRE(q.backlog().size() == 2);
    CHECK(q.backlog().front().id == 7);
    CHECK(q.backlog().back().id == 8);
    CHECK(q.capacity() == 3);
}
