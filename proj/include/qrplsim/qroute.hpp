#pragma once
#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "rng.hpp"
#include "types.hpp"

namespace qrplsim {

// Congestion weight: rises once the advertised backlog crosses the
// threshold, and also rises toward 1 as the backlog empties so the bf term
// never vanishes from the reward.
inline double lambda_weight(double bf, double bf_threshold) {
    const double ratio = bf / bf_threshold;
    return std::max(ratio, 1.0 - ratio);
}

// Per-sample cost of routing through a neighbor: weighted backlog plus link
// ETX plus the neighbor's hop distance. Lower is better.
inline double reward(double bf, double etx, int hop, double bf_threshold) {
    return lambda_weight(bf, bf_threshold) * bf + etx + static_cast<double>(hop);
}

// Exponential moving Q update.
inline double q_update(double q_old, double reward_sample, double alpha) {
    return q_old + alpha * (reward_sample - q_old);
}

// Inverted-softmax selection: each candidate receives weight
// 1 - softmax(Q), so low-cost parents are preferred but the distribution
// stays deliberately flat (max probability 1/(n-1) share of the mass),
// which spreads children across candidates instead of funneling them.
inline std::vector<double> selection_distribution(const std::vector<double>& q, double theta) {
    if (q.empty()) throw NoViableParent("selection over an empty candidate set");
    const std::size_t n = q.size();
    if (n == 1) return {1.0};
    const double q_max = *std::max_element(q.begin(), q.end());
    std::vector<double> soft(n);
    double denom = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        soft[i] = std::exp((q[i] - q_max) / theta);
        denom += soft[i];
    }
    std::vector<double> probs(n);
    double norm = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        probs[i] = 1.0 - soft[i] / denom;
        norm += probs[i];
    }
    for (auto& p : probs) p /= norm;  // norm is exactly n-1 up to rounding
    return probs;
}

inline std::size_t sample_index(const std::vector<double>& probs, RngStream& rng) {
    const double u = rng.u01();
    double cum = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        cum += probs[i];
        if (u < cum) return i;
    }
    return probs.size() - 1;  // fp residue on the final bin
}

// Per-node Q table keyed by neighbor id, iterated in id order.
class QTable {
public:
    double value(node_id id) const {
        if (const auto* e = find(id)) return e->q;
        return 0.0;
    }

    bool contains(node_id id) const { return find(id) != nullptr; }

    void ensure(node_id id) { get_or_create(id); }

    void update(node_id id, double reward_sample, double alpha) {
        auto& e = get_or_create(id);
        e.q = q_update(e.q, reward_sample, alpha);
    }

    void erase(node_id id) {
        entries_.erase(std::remove_if(entries_.begin(), entries_.end(),
                                      [&](const Entry& e) { return e.neighbor == id; }),
                       entries_.end());
    }

    std::size_t size() const { return entries_.size(); }

    struct Entry {
        node_id neighbor = kNoNode;
        double q = 0.0;
    };
    const std::vector<Entry>& entries() const { return entries_; }

private:
    const Entry* find(node_id id) const {
        for (const auto& e : entries_)
            if (e.neighbor == id) return &e;
        return nullptr;
    }

    Entry& get_or_create(node_id id) {
        for (auto& e : entries_)
            if (e.neighbor == id) return e;
        auto at = std::find_if(entries_.begin(), entries_.end(),
                               [&](const Entry& e) { return e.neighbor > id; });
        at = entries_.insert(at, Entry{id, 0.0});
        return *at;
    }

    std::vector<Entry> entries_;
};

} // namespace qrplsim
