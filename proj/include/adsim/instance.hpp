// instance.hpp - problem instance data model, validation and closed-form constants
#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace adsim {

/// An ad-assignment problem instance. Immutable after construction by
/// convention; all simulators and solvers take it by const reference.
///
/// Dimensions: `num_keywords` keywords (q), `num_clients` clients (i),
/// `num_slots` webpage slots (s). A revenue-model instance carries per-client
/// budgets; a CTR-model instance carries per-client impression requirements.
struct ProblemInstance {
    int num_keywords = 0;
    int num_clients = 0;
    int num_slots = 0;

    // ctr[q][i][s]: click probability when client i's ad sits in slot s for keyword q.
    std::vector<std::vector<std::vector<double>>> ctr;
    // bid[q][i]: per-click payment (revenue model; may be empty for CTR model).
    std::vector<std::vector<double>> bid;
    // budget[i]: money per budgeting cycle (revenue model only).
    std::vector<double> budget;
    // requirement[i]: impressions per requirement cycle (CTR model only).
    std::vector<double> requirement;

    double arrival_prob = 0.0;            // nu, Bernoulli per time slot
    std::vector<double> keyword_prob;     // theta_q, sums to 1
    int cycle_slots = 1;                  // N

    // eligibility[q][i][s]: whether (i,s) may be matched for keyword q.
    std::vector<std::vector<std::vector<char>>> eligibility;

    bool revenue_model() const { return !budget.empty(); }
    bool ctr_model() const { return !requirement.empty(); }

    bool eligible(int q, int i, int s) const {
        return eligibility[q][i][s] != 0;
    }
    double joint_rate(int q) const { return arrival_prob * keyword_prob[q]; }
    double bid_of(int q, int i) const { return bid.empty() ? 0.0 : bid[q][i]; }

    // Largest c*r over eligible (q,i,s) triples.
    double max_cr() const {
        double m = 0.0;
        for (int q = 0; q < num_keywords; ++q)
            for (int i = 0; i < num_clients; ++i)
                for (int s = 0; s < num_slots; ++s)
                    if (eligible(q, i, s))
                        m = std::max(m, ctr[q][i][s] * bid_of(q, i));
        return m;
    }

    // Largest r*c over eligible (q,s) pairs for client i.
    double max_cr_client(int i) const {
        double m = 0.0;
        for (int q = 0; q < num_keywords; ++q)
            for (int s = 0; s < num_slots; ++s)
                if (eligible(q, i, s))
                    m = std::max(m, ctr[q][i][s] * bid_of(q, i));
        return m;
    }

    // Fills eligibility from the ctr support (entry eligible iff ctr > 0).
    void default_eligibility() {
        eligibility.assign(num_keywords,
            std::vector<std::vector<char>>(num_clients, std::vector<char>(num_slots, 0)));
        for (int q = 0; q < num_keywords; ++q)
            for (int i = 0; i < num_clients; ++i)
                for (int s = 0; s < num_slots; ++s)
                    eligibility[q][i][s] = ctr[q][i][s] > 0.0 ? 1 : 0;
    }
};

struct Violation {
    std::string field;
    std::string message;
};

namespace detail {
inline bool prob_ok(double p) { return p >= 0.0 && p <= 1.0; }
}  // namespace detail

/// Checks all instance invariants. Returns an empty list iff the instance is
/// valid; never throws. Each violation names the offending field.
inline std::vector<Violation> validate_instance(const ProblemInstance& inst) {
    std::vector<Violation> out;
    auto add = [&](std::string field, std::string msg) {
        out.push_back({std::move(field), std::move(msg)});
    };

    if (inst.num_keywords <= 0) add("num_keywords", "must be positive");
    if (inst.num_clients <= 0) add("num_clients", "must be positive");
    if (inst.num_slots <= 0) add("num_slots", "must be positive");
    if (inst.cycle_slots <= 0) add("cycle_slots", "must be a positive integer");
    if (!out.empty()) return out;  // dimension errors make the rest moot

    auto dims3 = [&](const auto& a, const char* name) {
        if ((int)a.size() != inst.num_keywords) { add(name, "keyword dimension mismatch"); return false; }
        for (const auto& qi : a) {
            if ((int)qi.size() != inst.num_clients) { add(name, "client dimension mismatch"); return false; }
            for (const auto& is : qi)
                if ((int)is.size() != inst.num_slots) { add(name, "slot dimension mismatch"); return false; }
        }
        return true;
    };
    bool ctr_ok = dims3(inst.ctr, "ctr");
    bool elig_ok = dims3(inst.eligibility, "eligibility");

    if (ctr_ok) {
        for (int q = 0; q < inst.num_keywords; ++q)
            for (int i = 0; i < inst.num_clients; ++i)
                for (int s = 0; s < inst.num_slots; ++s)
                    if (!detail::prob_ok(inst.ctr[q][i][s]))
                        add("ctr[" + std::to_string(q) + "][" + std::to_string(i) + "][" +
                                std::to_string(s) + "]",
                            "click-through rate must lie in [0,1]");
    }

    if (!inst.bid.empty()) {
        if ((int)inst.bid.size() != inst.num_keywords)
            add("bid", "keyword dimension mismatch");
        else
            for (int q = 0; q < inst.num_keywords; ++q) {
                if ((int)inst.bid[q].size() != inst.num_clients) {
                    add("bid", "client dimension mismatch");
                    break;
                }
                for (int i = 0; i < inst.num_clients; ++i)
                    if (inst.bid[q][i] < 0.0)
                        add("bid[" + std::to_string(q) + "][" + std::to_string(i) + "]",
                            "bids must be nonnegative");
            }
    }

    if (!(inst.arrival_prob > 0.0 && inst.arrival_prob < 1.0))
        add("arrival_prob", "arrival_prob must lie strictly in (0,1)");

    if ((int)inst.keyword_prob.size() != inst.num_keywords) {
        add("keyword_prob", "keyword dimension mismatch");
    } else {
        double sum = 0.0;
        for (int q = 0; q < inst.num_keywords; ++q) {
            if (!detail::prob_ok(inst.keyword_prob[q]))
                add("keyword_prob[" + std::to_string(q) + "]", "must lie in [0,1]");
            sum += inst.keyword_prob[q];
        }
        if (std::abs(sum - 1.0) > 1e-12)
            add("keyword_prob", "must sum to 1 (within 1e-12)");
    }

    if (!inst.budget.empty() && (int)inst.budget.size() != inst.num_clients)
        add("budget", "client dimension mismatch");
    for (size_t i = 0; i < inst.budget.size(); ++i)
        if (inst.budget[i] < 0.0)
            add("budget[" + std::to_string(i) + "]", "budgets must be nonnegative");
    if (!inst.requirement.empty() && (int)inst.requirement.size() != inst.num_clients)
        add("requirement", "client dimension mismatch");
    for (size_t i = 0; i < inst.requirement.size(); ++i)
        if (inst.requirement[i] < 0.0)
            add("requirement[" + std::to_string(i) + "]", "requirements must be nonnegative");
    if (inst.budget.empty() && inst.requirement.empty())
        add("budget", "either budget or requirement must be present");

    if (elig_ok) {
        bool any = false;
        for (int q = 0; q < inst.num_keywords && !any; ++q)
            for (int i = 0; i < inst.num_clients && !any; ++i)
                for (int s = 0; s < inst.num_slots && !any; ++s)
                    if (inst.eligibility[q][i][s]) any = true;
        if (!any) add("eligibility", "mask is empty; instance is degenerate");
    }
    return out;
}

/// Non-fatal diagnostics (currently: non-integer bids, which break the
/// integer-valued-queue analysis but not the algorithm).
inline std::vector<std::string> instance_warnings(const ProblemInstance& inst) {
    std::vector<std::string> out;
    for (int q = 0; q < (int)inst.bid.size(); ++q)
        for (int i = 0; i < (int)inst.bid[q].size(); ++i)
            if (inst.bid[q][i] != std::floor(inst.bid[q][i]))
                out.push_back("bid[" + std::to_string(q) + "][" + std::to_string(i) +
                              "] is non-integer; integer-queue invariants do not apply");
    return out;
}

struct LargeNCheck {
    bool ok = true;                      // N meets every reachable client's threshold
    std::vector<double> threshold;       // per-client minimal N
    std::vector<std::string> diagnostics;  // "client unreachable" notes
};

/// Per-client budget-reachability threshold on the cycle length:
/// b_i / (sum_q nu_q r_qi max_{eligible s} c_qis). The check demands N beat
/// every threshold with a factor-two margin, so "relatively large" N leaves
/// genuine headroom rather than barely clearing the budget rate.
inline LargeNCheck check_large_N(const ProblemInstance& inst) {
    LargeNCheck res;
    res.threshold.assign(inst.num_clients, 0.0);
    for (int i = 0; i < inst.num_clients; ++i) {
        double denom = 0.0;
        for (int q = 0; q < inst.num_keywords; ++q) {
            double best_c = 0.0;
            for (int s = 0; s < inst.num_slots; ++s)
                if (inst.eligible(q, i, s)) best_c = std::max(best_c, inst.ctr[q][i][s]);
            denom += inst.joint_rate(q) * inst.bid_of(q, i) * best_c;
        }
        double b = i < (int)inst.budget.size() ? inst.budget[i] : 0.0;
        if (denom <= 0.0) {
            if (b > 0.0) {
                res.diagnostics.push_back("client " + std::to_string(i) + " unreachable");
                res.ok = false;
            }
            res.threshold[i] = std::numeric_limits<double>::infinity();
            if (b == 0.0) res.threshold[i] = 0.0;
            continue;
        }
        res.threshold[i] = b / denom;
        if (inst.cycle_slots < 2.0 * res.threshold[i]) res.ok = false;
    }
    return res;
}

namespace detail {
// E[x~^2] for the two-point integer randomization of a nonnegative mean x.
inline double randomized_square_mean(double x) {
    double lo = std::floor(x), hi = std::ceil(x);
    double frac = x - lo;
    return hi * hi * frac + lo * lo * (1.0 - frac);
}
}  // namespace detail

/// Drift constant for the revenue model:
/// B1 = 1/2 [ (N(N-1)L^2 + NL) (max c*r)^2 + sum_i E[b~_i^2] ].
inline double compute_B1(const ProblemInstance& inst) {
    double n = inst.cycle_slots, l = inst.num_slots;
    double cr = inst.max_cr();
    double sum = 0.0;
    for (double b : inst.budget) sum += detail::randomized_square_mean(b);
    return 0.5 * ((n * (n - 1) * l * l + n * l) * cr * cr + sum);
}

/// Drift constant for the CTR model:
/// D1 = 1/2 [ N(N-1)L^2 + NL + sum_i E[m~_i^2] ].
inline double compute_D1_for(const std::vector<double>& requirement, int cycle_slots,
                             int num_slots) {
    double n = cycle_slots, l = num_slots;
    double sum = 0.0;
    for (double m : requirement) sum += detail::randomized_square_mean(m);
    return 0.5 * (n * (n - 1) * l * l + n * l + sum);
}

inline double compute_D1(const ProblemInstance& inst) {
    return compute_D1_for(inst.requirement, inst.cycle_slots, inst.num_slots);
}

struct CtrConstants {
    double d1 = 0.0;
    double d3 = 0.0;
};

/// Hard transient cap on each overdraft queue under the standard variant:
/// Q_i(k) <= 1/eps + N max_{q,s}{r c} - floor(b_i).
inline std::vector<double> overdraft_hard_bound(const ProblemInstance& inst, double epsilon) {
    std::vector<double> out(inst.num_clients);
    for (int i = 0; i < inst.num_clients; ++i)
        out[i] = 1.0 / epsilon + inst.cycle_slots * inst.max_cr_client(i) -
                 std::floor(inst.budget[i]);
    return out;
}

}  // namespace adsim
