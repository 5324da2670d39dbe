#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <vector>

#include "qrplsim/qroute.hpp"
#include "qrplsim/rng.hpp"

using namespace qrplsim;

TEST_CASE("lambda weight is the max of the two congestion branches") {
    CHECK(lambda_weight(0.0, 0.5) == Catch::Approx(1.0));
    CHECK(lambda_weight(0.75, 0.5) == Catch::Approx(1.5));
    CHECK(lambda_weight(0.25, 0.5) == Catch::Approx(0.5));
    CHECK(lambda_weight(1.0, 0.5) == Catch::Approx(2.0));
}

TEST_CASE("lambda weight bottoms out at half the threshold with value one half") {
    for (const double th : {0.3, 0.5, 0.7}) {
        double min_v = 1e9;
        double min_bf = -1.0;
        for (int i = 0; i <= 1000; ++i) {
            const double bf = static_cast<double>(i) / 1000.0;
            const double v = lambda_weight(bf, th);
            CHECK(v == Catch::Approx(std::max(bf / th, 1.0 - bf / th)));
            if (v < min_v) {
                min_v = v;
                min_bf = bf;
            }
        }
        CHECK(min_bf == Catch::Approx(th / 2.0).margin(5e-4));
        CHECK(min_v == Catch::Approx(0.5).margin(1e-9));
    }
}

TEST_CASE("reward composes congestion, link quality and depth") {
    CHECK(reward(0.0, 1.0, 1, 0.5) == Catch::Approx(2.0));
    CHECK(reward(0.8, 2.0, 3, 0.5) == Catch::Approx(6.28));
    CHECK(reward(1.0, 1.0, 1, 0.5) == Catch::Approx(4.0));
}

TEST_CASE("reward increases in etx and hop, and in bf above the congestion knee") {
    const double base = reward(0.4, 1.0, 1, 0.5);
    CHECK(reward(0.4, 1.1, 1, 0.5) > base);
    CHECK(reward(0.4, 1.0, 2, 0.5) > base);
    for (const double th : {0.3, 0.5, 0.7}) {
        double prev = reward(th / 2.0, 1.0, 1, th);
        for (int i = 1; i <= 100; ++i) {
            const double bf = th / 2.0 + (1.0 - th / 2.0) * i / 100.0;
            const double cur = reward(bf, 1.0, 1, th);
            CHECK(cur > prev);
            prev = cur;
        }
    }
}

TEST_CASE("q_update moves a fixed fraction toward the sample") {
    CHECK(q_update(0.0, 2.0, 0.3) == Catch::Approx(0.6));
    CHECK(q_update(5.0, 5.0, 0.3) == Catch::Approx(5.0));
    CHECK(q_update(1.0, 0.0, 1.0) == Catch::Approx(0.0));
}

TEST_CASE("repeated updates contract geometrically to the sample") {
    RngStream rng(31);
    for (int trial = 0; trial < 1000; ++trial) {
        const double q0 = rng.uniform(0.0, 10.0);
        const double r = rng.uniform(0.0, 10.0);
        const double alpha = rng.uniform(0.05, 1.0);
        double q = q0;
        for (int t = 1; t <= 50; ++t) {
            q = q_update(q, r, alpha);
            const double expect = std::pow(1.0 - alpha, t) * std::abs(q0 - r);
            REQUIRE(std::abs(std::abs(q - r) - expect) < 1e-10);
        }
    }
}

TEST_CASE("selection distribution matches the two-neighbor closed form") {
    const auto probs = selection_distribution({1.0, 2.0}, 1.0);
    REQUIRE(probs.size() == 2);
    CHECK(probs[0] == Catch::Approx(0.7311).margin(1e-4));
    CHECK(probs[1] == Catch::Approx(0.2689).margin(1e-4));
}

TEST_CASE("symmetric tables split the mass evenly") {
    const auto two = selection_distribution({3.0, 3.0}, 1.0);
    CHECK(two[0] == Catch::Approx(0.5));
    CHECK(two[1] == Catch::Approx(0.5));
    const auto three = selection_distribution({0.0, 0.0, 0.0}, 1.0);
    for (const double p : three) CHECK(p == Catch::Approx(1.0 / 3.0));
}

TEST_CASE("a sole candidate gets the whole distribution") {
    const auto probs = selection_distribution({42.0}, 1.0);
    REQUIRE(probs.size() == 1);
    CHECK(probs[0] == 1.0);
}

TEST_CASE("empty candidate sets are rejected") {
    REQUIRE_THROWS_AS(selection_distribution({}, 1.0), NoViableParent);
}

TEST_CASE("distributions sum to one and prefer lower Q") {
    RngStream rng(37);
    for (int trial = 0; trial < 1000; ++trial) {
        const auto n = static_cast<std::size_t>(rng.uniform_int(1, 8));
        std::vector<double> q(n);
        for (auto& v : q) v = rng.uniform(0.0, 8.0);
        const auto probs = selection_distribution(q, 1.0);
        double sum = 0.0;
        for (const double p : probs) {
            REQUIRE(p >= 0.0);
            REQUIRE(p <= 1.0);
            sum += p;
        }
        REQUIRE(std::abs(sum - 1.0) <= 1e-12);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                if (q[i] < q[j] && probs[i] <= probs[j]) REQUIRE(probs[i] > probs[j]);
            }
        }
    }
}

TEST_CASE("the distribution stays deliberately flat") {
    // no candidate can exceed a 1/(n-1) share, however bad the others are
    const auto probs = selection_distribution({0.0, 50.0, 60.0, 70.0}, 1.0);
    for (const double p : probs) CHECK(p <= 1.0 / 3.0 + 1e-12);
    CHECK(probs[0] == Catch::Approx(1.0 / 3.0).margin(1e-9));
}

TEST_CASE("sampling frequencies converge to the distribution") {
    const auto probs = selection_distribution({1.0, 2.0}, 1.0);
    RngStream rng(41);
    const int n = 100000;
    int first = 0;
    for (int i = 0; i < n; ++i)
        if (sample_index(probs, rng) == 0) ++first;
    const double freq = static_cast<double>(first) / n;
    CHECK(freq == Catch::Approx(probs[0]).margin(0.005));
}

TEST_CASE("sample_index lands the residue on the last bin") {
    RngStream rng(43);
    const std::vector<double> degenerate{0.0, 0.0, 1.0};
    for (int i = 0; i < 100; ++i) REQUIRE(sample_index(degenerate, rng) == 2);
}

TEST_CASE("q table defaults, updates and eviction") {
    QTable table;
    CHECK(table.value(3) == 0.0);
    CHECK_FALSE(table.contains(3));
    table.ensure(3);
    CHECK(table.contains(3));
    CHECK(table.value(3) == 0.0);

    table.update(3, 2.0, 0.3);
    CHECK(table.value(3) == Catch::Approx(0.6));
    table.update(3, 2.0, 0.3);
    CHECK(table.value(3) == Catch::Approx(0.6 + 0.3 * (2.0 - 0.6)));

    // update on an absent neighbor creates it from the zero prior
    table.update(1, 1.0, 0.5);
    CHECK(table.value(1) == Catch::Approx(0.5));

    REQUIRE(table.size() == 2);
    CHECK(table.entries()[0].neighbor == 1);
    CHECK(table.entries()[1].neighbor == 3);

    table.erase(3);
    CHECK_FALSE(table.contains(3));
    CHECK(table.value(3) == 0.0);
    REQUIRE(table.size() == 1);
}
