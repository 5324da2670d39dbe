#include <catch2/catch_amalgamated.hpp>

#include <chrono>
#include <cmath>
#include <limits>

#include "qrplsim/rpl.hpp"

using namespace qrplsim;

TEST_CASE("round_half_even breaks ties toward even") {
    CHECK(round_half_even(0.4) == 0);
    CHECK(round_half_even(0.5) == 0);
    CHECK(round_half_even(0.6) == 1);
    CHECK(round_half_even(1.5) == 2);
    CHECK(round_half_even(2.5) == 2);
    CHECK(round_half_even(3.5) == 4);
    CHECK(round_half_even(2.0) == 2);
}

TEST_CASE("rank codec round-trips every hop and quantized bf exactly") {
    const RankCodec codec{100};
    REQUIRE(codec.max_hops() == 653);
    const auto t0 = std::chrono::steady_clock::now();
    int checked = 0;
    for (int hop = 0; hop <= codec.max_hops(); ++hop) {
        for (int q = 0; q < 100; ++q) {
            const double bf = static_cast<double>(q) / 99.0;
            const std::uint16_t rank = codec.encode(hop, bf);
            if (rank != static_cast<std::uint16_t>(100 * (hop + 1) + q)) {
                REQUIRE(rank == static_cast<std::uint16_t>(100 * (hop + 1) + q));
            }
            const auto dec = codec.decode(rank);
            if (dec.hop != hop) REQUIRE(dec.hop == hop);
            if (dec.bf != bf) REQUIRE(dec.bf == bf);
            ++checked;
        }
    }
    REQUIRE(checked == 65400);
    const auto elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0);
    CHECK(elapsed.count() < 1.0);
}

TEST_CASE("rank codec rejects out-of-range hops and malformed ranks") {
    const RankCodec codec{100};
    REQUIRE_THROWS_AS(codec.encode(-1, 0.0), HopOverflow);
    REQUIRE_THROWS_AS(codec.encode(654, 0.0), HopOverflow);
    REQUIRE_NOTHROW(codec.encode(653, 0.99));
    REQUIRE_THROWS_AS(codec.decode(99), MalformedRank);
    const auto dec = codec.decode(100);
    CHECK(dec.hop == 0);
    CHECK(dec.bf == 0.0);
}

TEST_CASE("path cost encoding saturates at the sentinel") {
    CHECK(encode_path_cost(2.0, 128.0) == 256);
    CHECK(decode_path_cost(256, 128.0) == Catch::Approx(2.0));
    CHECK(encode_path_cost(0.0, 128.0) == 0);
    CHECK(encode_path_cost(1000.0, 128.0) == 65535);
    CHECK(encode_path_cost(std::numeric_limits<double>::infinity(), 128.0) == 65535);
    const double roundtrip = decode_path_cost(encode_path_cost(7.25, 128.0), 128.0);
    CHECK(roundtrip == Catch::Approx(7.25).margin(1.0 / 128.0));
}

TEST_CASE("dio wire format is 8 bytes little-endian") {
    DioMessage dio;
    dio.sender = 0x0102;
    dio.rank_new = 0x0304;
    dio.emit_slot = 0x05060708;
    const auto wire = dio_wire_bytes(dio);
    const std::array<std::uint8_t, 8> expect{0x02, 0x01, 0x04, 0x03, 0x08, 0x07, 0x06, 0x05};
    REQUIRE(wire == expect);
    const DioMessage back = dio_from_wire(wire);
    CHECK(back.sender == dio.sender);
    CHECK(back.rank_new == dio.rank_new);
    CHECK(back.emit_slot == dio.emit_slot);
}

TEST_CASE("etx estimator averages attempts per success over its window") {
    EtxEstimator etx(4, 16.0);
    CHECK(etx.etx() == 16.0);  // unmeasured
    CHECK_FALSE(etx.measured_unreachable());

    etx.record_transaction(2, true);  // miss, hit
    CHECK(etx.window_attempts() == 2);
    CHECK(etx.window_successes() == 1);
    CHECK(etx.etx() == Catch::Approx(2.0));

    etx.record_transaction(1, true);  // hit
    CHECK(etx.etx() == Catch::Approx(1.5));

    // two more attempts slide the oldest (a miss) out of the window
    etx.record_transaction(2, false);
    CHECK(etx.window_attempts() == 4);
    CHECK(etx.window_successes() == 2);
    CHECK(etx.etx() == Catch::Approx(2.0));
}

TEST_CASE("a full window without success marks the link unreachable") {
    EtxEstimator etx(3, 16.0);
    etx.record_transaction(2, false);
    CHECK_FALSE(etx.measured_unreachable());
    etx.record_transaction(1, false);
    CHECK(etx.measured_unreachable());
    CHECK(etx.etx() == 16.0);
    // a success clears the verdict
    etx.record_transaction(1, true);
    CHECK_FALSE(etx.measured_unreachable());
}

TEST_CASE("neighbor table keeps entries ordered by id") {
    NeighborTable table(32, 16.0);
    bool created = false;
    table.get_or_create(7, created);
    REQUIRE(created);
    table.get_or_create(3, created);
    REQUIRE(created);
    table.get_or_create(7, created);
    REQUIRE_FALSE(created);
    table.get_or_create(5, created);
    REQUIRE(table.size() == 3);
    CHECK(table.entries()[0].neighbor == 3);
    CHECK(table.entries()[1].neighbor == 5);
    CHECK(table.entries()[2].neighbor == 7);
    CHECK(table.find(5) != nullptr);
    CHECK(table.find(4) == nullptr);

    table.erase_if([](const NeighborEntry& e) { return e.neighbor == 5; });
    REQUIRE(table.size() == 2);
    CHECK(table.find(5) == nullptr);
}

TEST_CASE("fresh neighbor entries start unmeasured") {
    NeighborTable table(8, 12.0);
    bool created = false;
    const auto& e = table.get_or_create(2, created);
    CHECK(e.hop == -1);
    CHECK(e.bf == 0.0);
    CHECK(std::isinf(e.path_cost));
    CHECK(e.etx.etx() == 12.0);
}

static ParentCandidate cand(node_id id, double etx, int hop, double path_cost) {
    return ParentCandidate{id, etx, hop, path_cost};
}

TEST_CASE("mrhof picks the lowest etx plus path cost") {
    const std::vector<ParentCandidate> cands = {cand(1, 0.5, 1, 1.5), cand(2, 1.5, 1, 2.0)};
    CHECK(mrhof_select(cands, std::nullopt, 0.5) == 1);
}

TEST_CASE("mrhof keeps the incumbent inside the hysteresis band") {
    const std::vector<ParentCandidate> cands = {cand(1, 1.0, 1, 1.0),   // incumbent, cost 2.0
                                                cand(2, 0.7, 1, 1.0)};  // challenger, cost 1.7
    CHECK(mrhof_select(cands, 1, 0.5) == 1);
    // a challenger clear of the band wins
    const std::vector<ParentCandidate> better = {cand(1, 1.0, 1, 1.0), cand(2, 0.4, 1, 1.0)};
    CHECK(mrhof_select(better, 1, 0.5) == 2);
    // exactly at the band edge the incumbent is retained
    const std::vector<ParentCandidate> edge = {cand(1, 1.0, 1, 1.0), cand(2, 0.5, 1, 1.0)};
    CHECK(mrhof_select(edge, 1, 0.5) == 1);
}

TEST_CASE("mrhof ties break toward the lowest id") {
    const std::vector<ParentCandidate> cands = {cand(9, 1.0, 1, 1.0), cand(4, 1.0, 1, 1.0)};
    CHECK(mrhof_select(cands, std::nullopt, 0.5) == 4);
}

TEST_CASE("mrhof needs at least one finite-cost candidate") {
    const double inf = std::numeric_limits<double>::infinity();
    REQUIRE_THROWS_AS(mrhof_select({}, std::nullopt, 0.5), NoViableParent);
    const std::vector<ParentCandidate> cands = {cand(1, 1.0, 1, inf), cand(2, 1.0, 1, inf)};
    REQUIRE_THROWS_AS(mrhof_select(cands, std::nullopt, 0.5), NoViableParent);
    // an infinite-cost incumbent cannot be retained
    const std::vector<ParentCandidate> mixed = {cand(1, 1.0, 1, inf), cand(2, 1.0, 1, 1.0)};
    CHECK(mrhof_select(mixed, 1, 0.5) == 2);
}

TEST_CASE("of0 minimizes hop, then etx, then id") {
    const std::vector<ParentCandidate> cands = {cand(1, 1.0, 2, 0.0), cand(2, 3.0, 1, 0.0),
                                                cand(3, 2.0, 1, 0.0)};
    CHECK(of0_select(cands) == 3);
    const std::vector<ParentCandidate> tie = {cand(8, 2.0, 1, 0.0), cand(2, 2.0, 1, 0.0)};
    CHECK(of0_select(tie) == 2);
}

TEST_CASE("of0 ignores candidates without a decoded hop") {
    const std::vector<ParentCandidate> cands = {cand(1, 1.0, -1, 0.0), cand(2, 5.0, 3, 0.0)};
    CHECK(of0_select(cands) == 2);
    const std::vector<ParentCandidate> none = {cand(1, 1.0, -1, 0.0)};
    REQUIRE_THROWS_AS(of0_select(none), NoViableParent);
    REQUIRE_THROWS_AS(of0_select({}), NoViableParent);
}
