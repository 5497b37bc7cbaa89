// matching.hpp - per-query maximum-weight client/slot assignment
#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "adsim/instance.hpp"

namespace adsim {

constexpr double kIneligible = -std::numeric_limits<double>::infinity();

/// Dense client-by-slot weight matrix. Ineligible pairs carry kIneligible so a
/// zero-weight eligible edge stays distinguishable from a forbidden one.
struct WeightMatrix {
    int num_clients = 0;
    int num_slots = 0;
    std::vector<double> w;  // row-major [i*num_slots + s]

    WeightMatrix() = default;
    WeightMatrix(int clients, int slots, double fill = kIneligible)
        : num_clients(clients), num_slots(slots), w(clients * slots, fill) {}

    double& at(int i, int s) { return w[i * num_slots + s]; }
    double at(int i, int s) const { return w[i * num_slots + s]; }
    bool edge(int i, int s) const { return std::isfinite(at(i, s)); }
};

/// A (partial) one-to-one assignment of clients to slots.
struct Assignment {
    std::vector<int> slot_of_client;  // -1 = not posted
    std::vector<int> client_of_slot;  // -1 = empty slot
    double total_weight = 0.0;

    Assignment() = default;
    Assignment(int clients, int slots)
        : slot_of_client(clients, -1), client_of_slot(slots, -1) {}

    bool posted(int i) const { return slot_of_client[i] >= 0; }
    int size() const {
        int n = 0;
        for (int s : slot_of_client)
            if (s >= 0) ++n;
        return n;
    }
    bool operator==(const Assignment& other) const {
        return slot_of_client == other.slot_of_client;
    }
};

/// Checks the one-to-one and eligibility invariants of an assignment for
/// keyword q on the given instance.
inline bool assignment_valid(const Assignment& a, const ProblemInstance& inst, int q) {
    if ((int)a.slot_of_client.size() != inst.num_clients) return false;
    if ((int)a.client_of_slot.size() != inst.num_slots) return false;
    std::vector<int> seen(inst.num_slots, 0);
    for (int i = 0; i < inst.num_clients; ++i) {
        int s = a.slot_of_client[i];
        if (s < 0) continue;
        if (s >= inst.num_slots) return false;
        if (seen[s]++) return false;
        if (a.client_of_slot[s] != i) return false;
        if (!inst.eligible(q, i, s)) return false;
    }
    for (int s = 0; s < inst.num_slots; ++s) {
        int i = a.client_of_slot[s];
        if (i >= 0 && a.slot_of_client[i] != s) return false;
    }
    return true;
}

/// Maximum-weight matching over the positive-weight edges of `wm` by
/// successive best-gain augmenting paths (Bellman-Ford on the residual
/// graph). The empty assignment is always admissible, so the optimum total is
/// >= 0 and edges with weight <= 0 are never used. Deterministic: clients and
/// slots are scanned in ascending index order and ties keep the first find.
inline Assignment max_weight_assignment(const WeightMatrix& wm) {
    const int nc = wm.num_clients, ns = wm.num_slots;
    Assignment a(nc, ns);
    const double kNeg = -std::numeric_limits<double>::infinity();

    while (true) {
        std::vector<double> dist_c(nc, kNeg), dist_s(ns, kNeg);
        std::vector<int> par_s(ns, -1);  // client that reaches slot s
        for (int i = 0; i < nc; ++i)
            if (!a.posted(i)) dist_c[i] = 0.0;

        for (int round = 0; round < nc + ns + 1; ++round) {
            bool changed = false;
            for (int i = 0; i < nc; ++i) {
                if (dist_c[i] == kNeg) continue;
                for (int s = 0; s < ns; ++s) {
                    double w = wm.at(i, s);
                    if (!(w > 0.0) || a.slot_of_client[i] == s) continue;
                    double cand = dist_c[i] + w;
                    if (cand > dist_s[s] + 1e-15) {
                        dist_s[s] = cand;
                        par_s[s] = i;
                        changed = true;
                    }
                }
            }
            for (int s = 0; s < ns; ++s) {
                int j = a.client_of_slot[s];
                if (j < 0 || dist_s[s] == kNeg) continue;
                double cand = dist_s[s] - wm.at(j, s);
                if (cand > dist_c[j] + 1e-15) {
                    dist_c[j] = cand;
                    changed = true;
                }
            }
            if (!changed) break;
        }

        int best_slot = -1;
        double best_gain = 1e-12;  // require strictly positive gain
        for (int s = 0; s < ns; ++s)
            if (a.client_of_slot[s] < 0 && dist_s[s] > best_gain) {
                best_gain = dist_s[s];
                best_slot = s;
            }
        if (best_slot < 0) break;

        // Flip edges back along the alternating path.
        int s = best_slot;
        while (true) {
            int i = par_s[s];
            int prev = a.slot_of_client[i];  // slot i was matched to (or -1)
            a.slot_of_client[i] = s;
            a.client_of_slot[s] = i;
            if (prev < 0) break;
            s = prev;
        }
    }

    a.total_weight = 0.0;
    for (int i = 0; i < nc; ++i)
        if (a.posted(i)) a.total_weight += wm.at(i, a.slot_of_client[i]);
    return a;
}

/// Exhaustive oracle: best assignment by enumerating every partial matching.
/// Guarded to small sizes; throws std::invalid_argument beyond the guard.
inline Assignment enumerate_assignments(const WeightMatrix& wm) {
    const int nc = wm.num_clients, ns = wm.num_slots;
    if (ns > 12 || std::pow((double)nc + 1, (double)ns) > 4e6)
        throw std::invalid_argument("enumerate_assignments: instance too large");

    Assignment best(nc, ns);
    Assignment cur(nc, ns);
    double cur_total = 0.0;

    auto rec = [&](auto&& self, int s) -> void {
        if (s == ns) {
            if (cur_total > best.total_weight + 1e-15) {
                best = cur;
                best.total_weight = cur_total;
            }
            return;
        }
        self(self, s + 1);  // leave slot s empty
        for (int i = 0; i < nc; ++i) {
            if (cur.posted(i) || !wm.edge(i, s)) continue;
            cur.slot_of_client[i] = s;
            cur.client_of_slot[s] = i;
            cur_total += wm.at(i, s);
            self(self, s + 1);
            cur_total -= wm.at(i, s);
            cur.slot_of_client[i] = -1;
            cur.client_of_slot[s] = -1;
        }
    };
    rec(rec, 0);
    // Recompute the total in client order so equal assignments report
    // bitwise-equal totals regardless of search order.
    best.total_weight = 0.0;
    for (int i = 0; i < nc; ++i)
        if (best.posted(i)) best.total_weight += wm.at(i, best.slot_of_client[i]);
    return best;
}

}  // namespace adsim
