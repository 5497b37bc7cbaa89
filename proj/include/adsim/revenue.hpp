// revenue.hpp - online revenue maximization over budgeting cycles
#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>
#include <vector>

#include "adsim/instance.hpp"
#include "adsim/matching.hpp"
#include "adsim/rng.hpp"

namespace adsim {

enum class RevenueVariant { standard, underdraft, estimated };

/// Per-client overdraft (or underdraft) queues plus the algorithm knobs.
/// Queues are frozen for the duration of a budgeting cycle and updated once at
/// its end.
struct OverdraftState {
    std::vector<double> Q;
    double epsilon = 0.0;
    RevenueVariant variant = RevenueVariant::standard;

    // underdraft variant
    std::vector<double> gamma;  // per-client ceiling offset
    std::vector<double> cap;    // per-client floor is -cap[i]

    // estimated variant: the algorithm's ctr belief (weights only; clicks
    // always sample from the true ctr)
    std::vector<std::vector<std::vector<double>>> ctr_hat;

    // pay-per-impression accounting: A accrues r per impression instead of
    // r per click
    bool pay_per_impression = false;

    static OverdraftState make(const ProblemInstance& inst, double epsilon) {
        OverdraftState st;
        st.Q.assign(inst.num_clients, 0.0);
        st.epsilon = epsilon;
        return st;
    }
};

/// Gamma_i = min(floor(b_i) - N max_{q,s} r c, 0) and C_i = 1/eps - Gamma_i,
/// the thresholds of the underdraft variant.
inline std::pair<std::vector<double>, std::vector<double>> underdraft_thresholds(
    const ProblemInstance& inst, double epsilon) {
    std::vector<double> gamma(inst.num_clients), cap(inst.num_clients);
    for (int i = 0; i < inst.num_clients; ++i) {
        gamma[i] = std::min(std::floor(inst.budget[i]) -
                                inst.cycle_slots * inst.max_cr_client(i),
                            0.0);
        cap[i] = 1.0 / epsilon - gamma[i];
    }
    return {gamma, cap};
}

inline OverdraftState make_underdraft_state(const ProblemInstance& inst, double epsilon) {
    OverdraftState st = OverdraftState::make(inst, epsilon);
    st.variant = RevenueVariant::underdraft;
    auto [g, c] = underdraft_thresholds(inst, epsilon);
    st.gamma = std::move(g);
    st.cap = std::move(c);
    return st;
}

/// ctr_hat = c (1 + delta u), u uniform in [-1,1] per entry.
inline OverdraftState make_estimated_state(const ProblemInstance& inst, double epsilon,
                                           double delta, RngStream& stream) {
    OverdraftState st = OverdraftState::make(inst, epsilon);
    st.variant = RevenueVariant::estimated;
    st.ctr_hat = inst.ctr;
    for (auto& qi : st.ctr_hat)
        for (auto& is : qi)
            for (auto& c : is) c *= 1.0 + delta * (2.0 * stream.uniform() - 1.0);
    return st;
}

/// Per-query weights: c r (1/eps - Q_i), with ctr_hat under the estimated
/// variant and (Gamma_i - Q_i) replacing (1/eps - Q_i) under underdraft.
inline WeightMatrix revenue_weights(const ProblemInstance& inst, const OverdraftState& st,
                                    int q) {
    WeightMatrix wm(inst.num_clients, inst.num_slots);
    const auto& c = st.variant == RevenueVariant::estimated ? st.ctr_hat : inst.ctr;
    for (int i = 0; i < inst.num_clients; ++i) {
        double lever = st.variant == RevenueVariant::underdraft
                           ? st.gamma[i] - st.Q[i]
                           : 1.0 / st.epsilon - st.Q[i];
        for (int s = 0; s < inst.num_slots; ++s)
            if (inst.eligible(q, i, s))
                wm.at(i, s) = c[q][i][s] * inst.bid_of(q, i) * lever;
    }
    return wm;
}

inline double update_overdraft(double q, double a, double b_tilde) {
    return std::max(q + a - b_tilde, 0.0);
}

inline double update_underdraft(double q, double a, double b_tilde, double cap) {
    return std::max(q + a - b_tilde, -cap);
}

struct CycleOutcome {
    std::vector<double> A;               // revenue charged per client
    std::vector<long long> realized_budget;
    std::vector<double> Q_after;
    int num_queries = 0;
    int num_clicks = 0;
};

/// Runs one budgeting cycle of N slots: queries arrive, ads are matched with
/// weights built from the cycle-start queues, clicks are charged, and the
/// queues are settled against the randomized integer budgets at the end.
/// Mutates st.Q.
inline CycleOutcome run_budgeting_cycle(const ProblemInstance& inst, OverdraftState& st,
                                        SimStreams& streams) {
    CycleOutcome out;
    out.A.assign(inst.num_clients, 0.0);
    out.realized_budget.assign(inst.num_clients, 0);
    for (int t = 0; t < inst.cycle_slots; ++t) {
        int q = sample_query(inst, streams.arrivals);
        if (q < 0) continue;
        ++out.num_queries;
        auto a = max_weight_assignment(revenue_weights(inst, st, q));
        for (int i = 0; i < inst.num_clients; ++i) {
            int s = a.slot_of_client[i];
            if (s < 0) continue;
            bool clicked = sample_click(inst, streams.clicks, q, i, s);
            if (clicked) ++out.num_clicks;
            if (st.pay_per_impression)
                out.A[i] += inst.bid_of(q, i);
            else if (clicked)
                out.A[i] += inst.bid_of(q, i);
        }
    }
    for (int i = 0; i < inst.num_clients; ++i) {
        out.realized_budget[i] = sample_integer_budget(streams.budgets, inst.budget[i]);
        if (st.variant == RevenueVariant::underdraft)
            st.Q[i] = update_underdraft(st.Q[i], out.A[i], (double)out.realized_budget[i],
                                        st.cap[i]);
        else
            st.Q[i] = update_overdraft(st.Q[i], out.A[i], (double)out.realized_budget[i]);
    }
    out.Q_after = st.Q;
    return out;
}

struct RevenueSimResult {
    std::vector<CycleOutcome> cycles;
    double total_revenue = 0.0;       // sum over clients and cycles
    double average_revenue = 0.0;     // per time slot
    std::vector<double> mean_Q;       // time-average queues (at cycle ends)
    double max_Q = 0.0;
    int hard_bound_violations = 0;    // standard variant only
};

/// Multi-cycle driver. Checks the hard overdraft bound after every cycle of a
/// standard-variant run (a violation indicates an implementation bug, so it is
/// counted, never silently dropped).
inline RevenueSimResult simulate_revenue(const ProblemInstance& inst, OverdraftState& st,
                                         SimStreams& streams, int cycles,
                                         bool keep_rows = true) {
    RevenueSimResult res;
    res.mean_Q.assign(inst.num_clients, 0.0);
    std::vector<double> hard;
    if (st.variant == RevenueVariant::standard)
        hard = overdraft_hard_bound(inst, st.epsilon);
    for (int k = 0; k < cycles; ++k) {
        auto out = run_budgeting_cycle(inst, st, streams);
        for (int i = 0; i < inst.num_clients; ++i) {
            res.total_revenue += out.A[i];
            res.mean_Q[i] += st.Q[i];
            res.max_Q = std::max(res.max_Q, st.Q[i]);
            if (st.variant == RevenueVariant::standard && st.Q[i] > hard[i])
                ++res.hard_bound_violations;
        }
        if (keep_rows) res.cycles.push_back(std::move(out));
    }
    for (auto& v : res.mean_Q) v /= std::max(cycles, 1);
    res.average_revenue = res.total_revenue / ((double)cycles * inst.cycle_slots);
    return res;
}

// ---------------------------------------------------------------------------
// Temporary-unfairness demo (underdraft variant, batch arrivals).
// ---------------------------------------------------------------------------

struct UnfairnessDemo {
    std::vector<double> weight1, weight2;  // per-cycle weights c r (Gamma - Q)
    std::vector<double> Q1, Q2;
};

/// Two symmetric clients (b=0.6, c=0.5, r=1, N=1) with a batch arrival process
/// outside the Bernoulli model: 2 queries w.p. 0.5 per slot, served
/// sequentially within the slot. Client 1 starts at Q=Gamma (zero weight),
/// client 2 at Q=-C (maximal weight); the demo records how long client 2
/// monopolizes service.
inline UnfairnessDemo unfairness_demo(double epsilon, int horizon,
                                      std::uint64_t seed = 20260823) {
    const double b = 0.6, c = 0.5, r = 1.0;
    const double gamma = std::min(std::floor(b) - 1.0 * c * r, 0.0);  // -0.5
    const double cap = 1.0 / epsilon - gamma;
    UnfairnessDemo d;
    double q1 = gamma, q2 = -cap;
    SimStreams streams(seed);
    for (int k = 0; k < horizon; ++k) {
        double w1 = c * r * (gamma - q1), w2 = c * r * (gamma - q2);
        d.weight1.push_back(w1);
        d.weight2.push_back(w2);
        d.Q1.push_back(q1);
        d.Q2.push_back(q2);
        double a1 = 0.0, a2 = 0.0;
        if (streams.arrivals.bernoulli(0.5)) {
            for (int arrival = 0; arrival < 2; ++arrival) {
                // One slot: serve the larger positive weight; ties favor client 1.
                if (w1 <= 0.0 && w2 <= 0.0) break;
                bool serve1 = w1 >= w2;
                if (streams.clicks.bernoulli(c)) (serve1 ? a1 : a2) += r;
            }
        }
        double b1 = (double)sample_integer_budget(streams.budgets, b);
        double b2 = (double)sample_integer_budget(streams.budgets, b);
        q1 = update_underdraft(q1, a1, b1, cap);
        q2 = update_underdraft(q2, a2, b2, cap);
    }
    return d;
}

}  // namespace adsim
