#include <catch2/catch_amalgamated.hpp>

#include "qrplsim/events.hpp"

using namespace qrplsim;

TEST_CASE("events pop in fire-slot order") {
    EventQueue eq;
    eq.schedule(Event{30, 0, EventKind::TrickleFire, 1, 0}, 0);
    eq.schedule(Event{10, 0, EventKind::PacketArrival, 2, 0}, 0);
    eq.schedule(Event{20, 0, EventKind::MacAttempt, 3, 0}, 0);
    REQUIRE(eq.size() == 3);
    REQUIRE(eq.pop().fire_slot == 10);
    REQUIRE(eq.pop().fire_slot == 20);
    REQUIRE(eq.pop().fire_slot == 30);
    REQUIRE(eq.empty());
}

TEST_CASE("equal-slot events dispatch FIFO in insertion order") {
    EventQueue eq;
    for (std::uint64_t token = 0; token < 50; ++token)
        eq.schedule(Event{5, 0, EventKind::MacAttempt, 0, token}, 0);
    for (std::uint64_t token = 0; token < 50; ++token) {
        const Event ev = eq.pop();
        REQUIRE(ev.fire_slot == 5);
        REQUIRE(ev.token == token);
    }
}

TEST_CASE("interleaved slots keep per-slot FIFO") {
    EventQueue eq;
    eq.schedule(Event{2, 0, EventKind::MacAttempt, 0, 10}, 0);
    eq.schedule(Event{1, 0, EventKind::MacAttempt, 0, 20}, 0);
    eq.schedule(Event{2, 0, EventKind::MacAttempt, 0, 11}, 0);
    eq.schedule(Event{1, 0, EventKind::MacAttempt, 0, 21}, 0);
    REQUIRE(eq.pop().token == 20);
    REQUIRE(eq.pop().token == 21);
    REQUIRE(eq.pop().token == 10);
    REQUIRE(eq.pop().token == 11);
}

TEST_CASE("scheduling into the past is rejected") {
    EventQueue eq;
    REQUIRE_THROWS_AS(eq.schedule(Event{4, 0, EventKind::RunEnd, 0, 0}, 5),
                      SchedulingInPast);
    REQUIRE_NOTHROW(eq.schedule(Event{5, 0, EventKind::RunEnd, 0, 0}, 5));
}

TEST_CASE("handles expose the assigned sequence numbers") {
    EventQueue eq;
    const auto h1 = eq.schedule(Event{1, 0, EventKind::RunEnd, 0, 0}, 0);
    const auto h2 = eq.schedule(Event{1, 0, EventKind::RunEnd, 0, 0}, 0);
    REQUIRE(h2.sequence > h1.sequence);
    REQUIRE(h1.fire_slot == 1);
}

TEST_CASE("top peeks without removing") {
    EventQueue eq;
    eq.schedule(Event{7, 0, EventKind::QueueSample, 4, 0}, 0);
    REQUIRE(eq.top().fire_slot == 7);
    REQUIRE(eq.top().node == 4);
    REQUIRE(eq.size() == 1);
}
