#include <catch2/catch_amalgamated.hpp>

#include <vector>

#include "qrplsim/config.hpp"
#include "qrplsim/rng.hpp"
#include "qrplsim/rpl.hpp"

using namespace qrplsim;

TEST_CASE("interval doubles per fire and saturates at i_max") {
    TrickleState t(TrickleParams{}, 0.010);
    RngStream rng(1);
    REQUIRE_FALSE(t.running());
    t.start(0, rng);
    REQUIRE(t.running());

    std::vector<double> intervals{t.current_interval_s()};
    for (int i = 0; i < 9; ++i) {
        t.on_fire(t.next_fire_slot(), rng);
        intervals.push_back(t.current_interval_s());
    }
    const std::vector<double> expect{3, 6, 12, 24, 48, 96, 192, 384, 768, 768};
    REQUIRE(intervals.size() == expect.size());
    for (std::size_t i = 0; i < expect.size(); ++i)
        CHECK(intervals[i] == Catch::Approx(expect[i]));
}

TEST_CASE("fires land in the second half of the current interval") {
    TrickleState t(TrickleParams{}, 0.010);
    RngStream rng(3);
    slot_t now = 0;
    t.start(now, rng);
    for (int i = 0; i < 40; ++i) {
        const double gap_s = static_cast<double>(t.next_fire_slot() - now) * 0.010;
        const double interval = t.current_interval_s();
        CHECK(gap_s >= interval / 2.0 - 0.005);
        CHECK(gap_s <= interval + 0.005);
        now = t.next_fire_slot();
        t.on_fire(now, rng);
    }
}

TEST_CASE("queue-loss reset triggers exactly at phi and raises it by phi_0") {
    TrickleState t(TrickleParams{}, 0.010);
    RngStream rng(5);
    t.start(0, rng);
    for (int i = 0; i < 8; ++i) t.on_fire(t.next_fire_slot(), rng);
    REQUIRE(t.current_interval_s() == Catch::Approx(768.0));
    REQUIRE(t.phi() == 2);

    CHECK_FALSE(t.on_queue_loss(100, 1, rng));
    REQUIRE(t.current_interval_s() == Catch::Approx(768.0));
    CHECK(t.on_queue_loss(101, 2, rng));
    CHECK(t.current_interval_s() == Catch::Approx(3.0));
    CHECK(t.phi() == 4);

    // the raised threshold gates the next reset
    t.on_fire(t.next_fire_slot(), rng);
    CHECK_FALSE(t.on_queue_loss(200, 3, rng));
    CHECK(t.on_queue_loss(201, 4, rng));
    CHECK(t.phi() == 6);
}

TEST_CASE("window X reinitializes the loss threshold") {
    TrickleState t(TrickleParams{}, 0.010);
    RngStream rng(7);
    t.start(0, rng);
    t.on_queue_loss(1, 2, rng);
    t.on_queue_loss(2, 4, rng);
    REQUIRE(t.phi() == 6);
    t.on_window_x();
    CHECK(t.phi() == 2);
}

TEST_CASE("window X length is the configured gap in whole slots") {
    TrickleParams params;  // 100 ms
    TrickleState t(params, 0.010);
    CHECK(t.window_x_slots() == 10);
    TrickleState coarse(params, 1.0);  // window shorter than a slot still waits one
    CHECK(coarse.window_x_slots() == 1);
}

TEST_CASE("inconsistency reset collapses the interval without touching phi") {
    TrickleState t(TrickleParams{}, 0.010);
    RngStream rng(9);
    t.start(0, rng);
    for (int i = 0; i < 5; ++i) t.on_fire(t.next_fire_slot(), rng);
    REQUIRE(t.current_interval_s() == Catch::Approx(96.0));
    t.on_inconsistency(t.next_fire_slot(), rng);
    CHECK(t.current_interval_s() == Catch::Approx(3.0));
    CHECK(t.phi() == 2);
}

TEST_CASE("rescheduling never lands on the current slot") {
    TrickleParams params;
    TrickleState t(params, 10.0);  // slots far coarser than i_min
    RngStream rng(11);
    t.start(100, rng);
    CHECK(t.next_fire_slot() >= 101);
}

TEST_CASE("draw_gap_s samples within the half-open interval") {
    TrickleState t(TrickleParams{}, 0.010);
    RngStream rng(13);
    for (int i = 0; i < 1000; ++i) {
        const double gap = t.draw_gap_s(rng);
        CHECK(gap >= 1.5);
        CHECK(gap < 3.0);
    }
}
