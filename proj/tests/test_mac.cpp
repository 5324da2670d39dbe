#include <catch2/catch_amalgamated.hpp>

#include <set>

#include "qrplsim/mac.hpp"

using namespace qrplsim;

namespace {

// root at 0, two nodes within range of it, one far-off node
Topology cross_topology() {
    Topology t;
    t.positions = {{0.0, 0.0}, {20.0, 0.0}, {0.0, 20.0}, {300.0, 0.0}};
    return t;
}

ChannelParams crisp_channel() {
    ChannelParams p;
    p.shadowing_sigma_db = 0.0;  // step links: in range -> certain
    return p;
}

CommittedTx data(node_id tx, node_id rx) { return CommittedTx{tx, rx, false, DioMessage{}}; }

}  // namespace

TEST_CASE("cca reports busy within range and for the node itself") {
    const Topology topo = cross_topology();
    const double range = crisp_channel().comm_range_m();
    std::vector<CommittedTx> committed{data(1, 0)};
    CHECK(cca_busy(1, committed, topo, range));   // own commitment
    CHECK(cca_busy(2, committed, topo, range));   // 28 m apart, inside 31.6
    CHECK_FALSE(cca_busy(3, committed, topo, range));  // 280 m away
    CHECK_FALSE(cca_busy(2, {}, topo, range));    // idle air
}

TEST_CASE("is_committed_transmitter matches only the sender list") {
    std::vector<CommittedTx> committed{data(1, 0), data(3, 0)};
    CHECK(is_committed_transmitter(1, committed));
    CHECK(is_committed_transmitter(3, committed));
    CHECK_FALSE(is_committed_transmitter(0, committed));
    CHECK_FALSE(is_committed_transmitter(2, committed));
}

TEST_CASE("collision_at sees any other transmitter near the receiver") {
    const Topology topo = cross_topology();
    std::vector<CommittedTx> committed{data(1, 0), data(2, 0)};
    CHECK(collision_at(0, 1, committed, topo, 31.6));  // node 2 is 20 m from the root
    CHECK(collision_at(0, 2, committed, topo, 31.6));
    // the frame's own transmitter never interferes with itself
    std::vector<CommittedTx> solo{data(1, 0)};
    CHECK_FALSE(collision_at(0, 1, solo, topo, 31.6));
}

TEST_CASE("clean in-range unicast is delivered") {
    const Topology topo = cross_topology();
    RngStream shadow(1);
    const LinkModel link(topo, crisp_channel(), shadow);
    RngStream channel(2);
    std::vector<CommittedTx> committed{data(1, 0)};
    CHECK(resolve_attempt(committed[0], committed, topo, 31.6, link, channel) ==
          TxStatus::Delivered);
}

TEST_CASE("out-of-range unicast is a channel loss") {
    const Topology topo = cross_topology();
    RngStream shadow(1);
    const LinkModel link(topo, crisp_channel(), shadow);
    RngStream channel(2);
    std::vector<CommittedTx> committed{data(3, 0)};  // 300 m
    CHECK(resolve_attempt(committed[0], committed, topo, 31.6, link, channel) ==
          TxStatus::ChannelLoss);
}

TEST_CASE("synchronized transmitters collide at a shared receiver") {
    const Topology topo = cross_topology();
    RngStream shadow(1);
    const LinkModel link(topo, crisp_channel(), shadow);
    RngStream channel(2);
    std::vector<CommittedTx> committed{data(1, 0), data(2, 0)};
    CHECK(resolve_attempt(committed[0], committed, topo, 31.6, link, channel) ==
          TxStatus::Collision);
    CHECK(resolve_attempt(committed[1], committed, topo, 31.6, link, channel) ==
          TxStatus::Collision);
}

TEST_CASE("a transmitting receiver is deaf") {
    const Topology topo = cross_topology();
    RngStream shadow(1);
    const LinkModel link(topo, crisp_channel(), shadow);
    RngStream channel(2);
    std::vector<CommittedTx> committed{data(1, 2), data(2, 0)};
    CHECK(resolve_attempt(committed[0], committed, topo, 31.6, link, channel) ==
          TxStatus::Collision);
}

TEST_CASE("interference range extends beyond decode range") {
    // receiver at origin; far transmitter is outside comm range but inside
    // the widened interference disk, so it jams without being decodable
    Topology topo;
    topo.positions = {{0.0, 0.0}, {20.0, 0.0}, {45.0, 0.0}};
    RngStream shadow(1);
    const LinkModel link(topo, crisp_channel(), shadow);
    RngStream channel(2);
    std::vector<CommittedTx> committed{data(1, 0), data(2, 1)};
    CHECK(resolve_attempt(committed[0], committed, topo, 50.0, link, channel) ==
          TxStatus::Collision);
    CHECK(resolve_attempt(committed[0], committed, topo, 40.0, link, channel) ==
          TxStatus::Delivered);
}

TEST_CASE("global carrier sense admits one transmitter per slot") {
    // when everyone hears everyone, the committed list can never grow past
    // one, and single-transmitter slots cannot collide
    const Topology topo = cross_topology();
    const double range = 1000.0;  // all nodes mutually audible
    std::vector<CommittedTx> committed;
    for (node_id v : {node_id(1), node_id(2), node_id(3)}) {
        if (is_committed_transmitter(v, committed) || cca_busy(v, committed, topo, range))
            continue;
        committed.push_back(data(v, 0));
    }
    REQUIRE(committed.size() == 1);
    CHECK_FALSE(collision_at(0, committed[0].tx, committed, topo, range));
}

TEST_CASE("backoff draws cover the inclusive window") {
    MacParams mac;
    mac.backoff_min_slots = 1;
    mac.backoff_max_slots = 8;
    RngStream rng(17);
    std::set<slot_t> seen;
    for (int i = 0; i < 5000; ++i) {
        const slot_t b = draw_backoff(mac, rng);
        REQUIRE(b >= 1);
        REQUIRE(b <= 8);
        seen.insert(b);
    }
    CHECK(seen.size() == 8);
}

TEST_CASE("tx status names are stable") {
    CHECK(std::string(to_string(TxStatus::Delivered)) == "Delivered");
    CHECK(std::string(to_string(TxStatus::ChannelLoss)) == "ChannelLoss");
    CHECK(std::string(to_string(TxStatus::Collision)) == "Collision");
    CHECK(std::string(to_string(TxStatus::Exhausted)) == "Exhausted");
}
