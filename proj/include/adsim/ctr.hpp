// ctr.hpp - online click-through-rate maximization with credit queues
#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "adsim/instance.hpp"
#include "adsim/matching.hpp"
#include "adsim/offline.hpp"
#include "adsim/rng.hpp"

namespace adsim {

/// Per-client credit queues (unfulfilled impression requirements). With
/// fast_T > 1 each requirement cycle is split into fast_T queueing cycles and
/// the queues are decremented at every queueing-cycle boundary.
struct CreditState {
    std::vector<double> Q;
    double epsilon = 0.0;
    int fast_T = 1;

    static CreditState make(const ProblemInstance& inst, double epsilon, int fast_T = 1) {
        if (fast_T < 1 || inst.cycle_slots % fast_T != 0)
            throw std::invalid_argument("fast_T must divide the cycle length");
        CreditState st;
        st.Q.assign(inst.num_clients, 0.0);
        st.epsilon = epsilon;
        st.fast_T = fast_T;
        return st;
    }
};

/// Per-query weights c/eps + Q_i on eligible pairs. Always >= 0; a strictly
/// positive weight is required to post, so c=0 clients with empty queues sit
/// out (posting them would be value-neutral).
inline WeightMatrix ctr_weights(const ProblemInstance& inst, const std::vector<double>& Q,
                                double epsilon, int q) {
    WeightMatrix wm(inst.num_clients, inst.num_slots);
    for (int i = 0; i < inst.num_clients; ++i)
        for (int s = 0; s < inst.num_slots; ++s)
            if (inst.eligible(q, i, s))
                wm.at(i, s) = inst.ctr[q][i][s] / epsilon + Q[i];
    return wm;
}

/// One fast-update settlement: Q <- [Q - service]^+ componentwise.
inline void fast_queue_update(std::vector<double>& Q, const std::vector<long long>& service) {
    for (size_t i = 0; i < Q.size(); ++i)
        Q[i] = std::max(Q[i] - (double)service[i], 0.0);
}

enum class CtrPolicy { mwm, mwm_fast, opt };

struct CycleServiceOutcome {
    std::vector<long long> S;       // impressions delivered per client
    std::vector<long long> m_tilde; // realized integer requirement
    std::vector<double> over;       // [S - m~]^+
    std::vector<double> under;      // [m~ - S]^+
    std::vector<double> Q_after;
    long long J = 0;                // clicks this cycle
    int num_queries = 0;
};

/// Runs one requirement cycle of N slots and settles the credit queues.
/// Mutates st.Q. Under mwm the queues are frozen all cycle; under mwm_fast
/// (st.fast_T queueing cycles) the realized requirement is credited at the
/// cycle start and impressions are debited at each queueing-cycle boundary;
/// under opt every query samples an assignment from `opt_policy` and the
/// queues follow the slow update for bookkeeping.
/// `hourly`, when nonempty, holds one joint-rate vector per hour (the cycle is
/// split evenly across them) and replaces the stationary arrival model.
inline CycleServiceOutcome run_requirement_cycle(
    const ProblemInstance& inst, CreditState& st, SimStreams& streams,
    CtrPolicy policy = CtrPolicy::mwm, const RandomizedPolicy* opt_policy = nullptr,
    const std::vector<std::vector<double>>* hourly = nullptr) {
    const int n = inst.num_clients;
    CycleServiceOutcome out;
    out.S.assign(n, 0);
    out.m_tilde.resize(n);
    for (int i = 0; i < n; ++i)
        out.m_tilde[i] = sample_integer_requirement(streams.budgets, inst.requirement[i]);

    const bool fast = policy == CtrPolicy::mwm_fast && st.fast_T > 1;
    if (fast)
        for (int i = 0; i < n; ++i) st.Q[i] += (double)out.m_tilde[i];

    const int slots_per_qc = inst.cycle_slots / (fast ? st.fast_T : 1);
    std::vector<long long> qc_service(n, 0);
    int hours = hourly ? (int)hourly->size() : 0;
    if (hours && inst.cycle_slots % hours != 0)
        throw std::invalid_argument("hour count must divide the cycle length");
    const int slots_per_hour = hours ? inst.cycle_slots / hours : 0;

    for (int t = 0; t < inst.cycle_slots; ++t) {
        int q = hours ? sample_query_rates((*hourly)[t / slots_per_hour], streams.arrivals)
                      : sample_query(inst, streams.arrivals);
        if (q >= 0) {
            ++out.num_queries;
            Assignment a;
            if (policy == CtrPolicy::opt) {
                double u = streams.misc.uniform();
                double cum = 0.0;
                a = Assignment(n, inst.num_slots);
                for (const auto& [cand, prob] : (*opt_policy)[q]) {
                    cum += prob;
                    if (u < cum) { a = cand; break; }
                }
            } else {
                a = max_weight_assignment(ctr_weights(inst, st.Q, st.epsilon, q));
            }
            for (int i = 0; i < n; ++i) {
                int s = a.slot_of_client[i];
                if (s < 0) continue;
                ++out.S[i];
                ++qc_service[i];
                if (sample_click(inst, streams.clicks, q, i, s)) ++out.J;
            }
        }
        if (fast && (t + 1) % slots_per_qc == 0) {
            fast_queue_update(st.Q, qc_service);
            qc_service.assign(n, 0);
        }
    }

    if (!fast)
        for (int i = 0; i < n; ++i)
            st.Q[i] = std::max(st.Q[i] + (double)out.m_tilde[i] - (double)out.S[i], 0.0);

    out.over.resize(n);
    out.under.resize(n);
    for (int i = 0; i < n; ++i) {
        out.over[i] = std::max((double)(out.S[i] - out.m_tilde[i]), 0.0);
        out.under[i] = std::max((double)(out.m_tilde[i] - out.S[i]), 0.0);
    }
    out.Q_after = st.Q;
    return out;
}

struct CtrSimResult {
    std::vector<CycleServiceOutcome> cycles;
    long long total_clicks = 0;
    double average_clicks_per_slot = 0.0;
    std::vector<double> mean_S;        // time-average impressions per cycle
    double mean_total_Q = 0.0;         // time-average of sum_i Q_i
    double mean_over_norm = 0.0;       // E[sum over]/sum m per cycle, averaged
    double mean_under_norm = 0.0;
    double sd_over_norm = 0.0;
    double sd_under_norm = 0.0;
};

inline CtrSimResult simulate_ctr(const ProblemInstance& inst, CreditState& st,
                                 SimStreams& streams, int cycles,
                                 CtrPolicy policy = CtrPolicy::mwm,
                                 const RandomizedPolicy* opt_policy = nullptr,
                                 const std::vector<std::vector<double>>* hourly = nullptr,
                                 bool keep_rows = true) {
    CtrSimResult res;
    res.mean_S.assign(inst.num_clients, 0.0);
    double total_m = 0.0;
    for (double m : inst.requirement) total_m += m;
    double so = 0.0, so2 = 0.0, su = 0.0, su2 = 0.0;
    for (int k = 0; k < cycles; ++k) {
        auto out = run_requirement_cycle(inst, st, streams, policy, opt_policy, hourly);
        res.total_clicks += out.J;
        double over = 0.0, under = 0.0, qsum = 0.0;
        for (int i = 0; i < inst.num_clients; ++i) {
            res.mean_S[i] += (double)out.S[i];
            over += out.over[i];
            under += out.under[i];
            qsum += st.Q[i];
        }
        res.mean_total_Q += qsum;
        double on = over / total_m, un = under / total_m;
        so += on; so2 += on * on;
        su += un; su2 += un * un;
        if (keep_rows) res.cycles.push_back(std::move(out));
    }
    double kc = std::max(cycles, 1);
    for (auto& v : res.mean_S) v /= kc;
    res.mean_total_Q /= kc;
    res.average_clicks_per_slot = res.total_clicks / (kc * inst.cycle_slots);
    res.mean_over_norm = so / kc;
    res.mean_under_norm = su / kc;
    res.sd_over_norm = std::sqrt(std::max(so2 / kc - res.mean_over_norm * res.mean_over_norm, 0.0));
    res.sd_under_norm =
        std::sqrt(std::max(su2 / kc - res.mean_under_norm * res.mean_under_norm, 0.0));
    return res;
}

// ---------------------------------------------------------------------------
// Requirement customization and the steady-state queue bound.
// ---------------------------------------------------------------------------

struct Theorem4Bound {
    double value = 0.0;
    double d1 = 0.0, d2_star = 0.0, d3 = 0.0;
    bool degenerate = false;  // no policy achieves D2 > 0
};

/// (D1 + D3/eps) / D2* from explicit constants.
inline double theorem4_bound_from(double d1, double d3, double d2_star, double epsilon) {
    return (d1 + d3 / epsilon) / d2_star;
}

/// (D1 + D3/eps) / D2*, the steady-state bound on E[sum_i Q_i].
inline Theorem4Bound theorem4_bound(const ProblemInstance& inst, const MaxMinResult& maxmin,
                                    double epsilon) {
    Theorem4Bound b;
    b.d1 = compute_D1(inst);
    b.d3 = compute_D3(inst);
    b.d2_star = maxmin.value;
    if (b.d2_star <= 0.0) {
        b.degenerate = true;
        return b;
    }
    b.value = (b.d1 + b.d3 / epsilon) / b.d2_star;
    return b;
}

struct CustomizedRequirements {
    std::vector<double> m;
    double xi = 0.0;
    RandomizedPolicy p;            // certificate policy
    std::vector<double> slack;     // capacity_i(p) - m_i (== xi up to the floor)
    bool feasible = true;
    std::string diagnostic;
};

/// Inner problem for a fixed slack target xi: maximize sum_i log m_i with
/// m_i = capacity_i(p) - xi over randomized policies p (the log objective
/// makes each constraint tight). Frank-Wolfe with a matching oracle, started
/// from the max-min-slack policy.
inline CustomizedRequirements customize_for_xi(const ProblemInstance& inst, double xi,
                                               int fw_iters = 300, double m_floor = 1e-3) {
    CustomizedRequirements res;
    res.xi = xi;
    const int n = inst.num_clients;

    // Interior start: the policy maximizing the minimum capacity slack.
    auto mm = solve_max_d2(inst, std::vector<double>(n, xi));
    if (mm.value <= m_floor) {
        res.feasible = false;
        res.diagnostic = "xi too large: no policy leaves slack above the floor";
        return res;
    }
    RandomizedPolicy p = std::move(mm.p);
    auto cap = impression_capacity(inst, p);

    for (int t = 0; t < fw_iters; ++t) {
        // Linear oracle: maximize sum_i capacity_i / (cap_i - xi).
        detail::PolicyAverager dir(inst.num_keywords);
        dir.observe_iteration();
        for (int q = 0; q < inst.num_keywords; ++q) {
            WeightMatrix wm(inst.num_clients, inst.num_slots);
            for (int i = 0; i < n; ++i)
                for (int s = 0; s < inst.num_slots; ++s)
                    if (inst.eligible(q, i, s))
                        wm.at(i, s) = 1.0 / (cap[i] - xi);
            dir.add(q, max_weight_assignment(wm));
        }
        auto vert = dir.policy(inst);
        auto vcap = impression_capacity(inst, vert);
        double gamma = 2.0 / (t + 2.0);
        // Backtrack if the step would pinch a slack below the floor.
        std::vector<double> cand(n);
        for (int bt = 0; bt < 40; ++bt, gamma *= 0.5) {
            bool ok = true;
            for (int i = 0; i < n; ++i) {
                cand[i] = (1 - gamma) * cap[i] + gamma * vcap[i];
                if (cand[i] - xi < m_floor) ok = false;
            }
            if (ok) break;
        }
        for (int i = 0; i < n; ++i)  // keep cand consistent with the final gamma
            cand[i] = (1 - gamma) * cap[i] + gamma * vcap[i];
        for (auto& kp : p)
            for (auto& [a, prob] : kp) prob *= 1 - gamma;
        for (int q = 0; q < inst.num_keywords; ++q)
            for (const auto& [a, prob] : vert[q]) {
                bool merged = false;
                for (auto& [pa, pprob] : p[q])
                    if (pa == a) { pprob += gamma * prob; merged = true; break; }
                if (!merged) p[q].push_back({a, gamma * prob});
            }
        cap = std::move(cand);
    }

    res.m.resize(n);
    res.slack.resize(n);
    for (int i = 0; i < n; ++i) {
        res.m[i] = std::max(cap[i] - xi, m_floor);
        res.slack[i] = cap[i] - res.m[i];
    }
    res.p = std::move(p);
    return res;
}

/// Picks impression requirements maximizing sum_i log m_i subject to
/// capacity_i(p) - m_i >= xi, where xi = (D1 + D3/eps)/Q_max keeps the
/// expected total queue below Q_max. D1 depends on the unknown m, so xi is
/// iterated to a fixed point around the inner solve.
inline CustomizedRequirements customize_requirements(const ProblemInstance& inst, double q_max,
                                                     double epsilon, int fw_iters = 300,
                                                     double m_floor_scale = 1e-6) {
    const double m_floor = m_floor_scale * inst.cycle_slots;
    const double d3 = compute_D3(inst);

    std::vector<double> m(inst.num_clients, 0.0);
    double xi = (compute_D1_for(m, inst.cycle_slots, inst.num_slots) + d3 / epsilon) / q_max;
    CustomizedRequirements res;
    for (int outer = 0; outer < 30; ++outer) {
        res = customize_for_xi(inst, xi, fw_iters, m_floor);
        if (!res.feasible) return res;
        double xi_new =
            (compute_D1_for(res.m, inst.cycle_slots, inst.num_slots) + d3 / epsilon) / q_max;
        bool done = std::abs(xi_new - xi) <= 1e-9 * std::max(1.0, xi);
        xi = xi_new;
        res.xi = xi;
        if (done) break;
    }
    return res;
}

// ---------------------------------------------------------------------------
// Short-term clients (non-stationary hourly arrivals).
// ---------------------------------------------------------------------------

/// alpha* = clip(l X Q / (H w), 0, 1): the fraction of a short-term type's
/// requirement the provider declines this cycle, from the quadratic
/// unhappiness model.
inline double short_term_alpha(double l, double x_k, double q, int hours, double w) {
    return std::clamp(l * x_k * q / (hours * w), 0.0, 1.0);
}

/// Q' = [Q + (1 - alpha*) l X - S]^+.
inline double short_term_credit_update(double q, double alpha_star, double l, double x_k,
                                       double s) {
    return std::max(q + (1.0 - alpha_star) * l * x_k - s, 0.0);
}

/// Short-term client types appended after the long-term clients of an
/// instance. Type j occupies client index long_term_clients + j.
struct ShortTermConfig {
    int long_term_clients = 0;
    std::vector<double> l;        // per-client requirement of one short-term client
    std::vector<double> x_mean;   // mean clients arriving per cycle, per type
    std::vector<double> w;        // unhappiness weight per type
    int hours = 1;                                // H, must divide N
    std::vector<std::vector<double>> hourly_rates;  // joint nu_q per hour
};

struct ShortTermCycleRow {
    std::vector<double> alpha;       // per type
    std::vector<long long> x;        // realized clients per type
    std::vector<long long> S;        // impressions per client (long + short)
    std::vector<double> Q_after;
    long long J = 0;
};

struct ShortTermSimResult {
    std::vector<ShortTermCycleRow> cycles;
    double mean_total_Q = 0.0;
    double second_half_mean_Q = 0.0;
    bool alpha_in_range = true;
};

/// Appendix-style mixed simulation: long-term clients keep the standard credit
/// update; each short-term type draws its population X(k), declines the
/// alpha* fraction, and credits the remainder.
inline ShortTermSimResult simulate_short_term(const ProblemInstance& inst,
                                              const ShortTermConfig& cfg, CreditState& st,
                                              SimStreams& streams, int cycles) {
    const int n = inst.num_clients;
    const int nl = cfg.long_term_clients;
    const int nt = n - nl;  // short-term types
    if ((int)cfg.l.size() != nt || (int)cfg.x_mean.size() != nt || (int)cfg.w.size() != nt)
        throw std::invalid_argument("short-term config size mismatch");
    if (inst.cycle_slots % cfg.hours != 0)
        throw std::invalid_argument("hours must divide the cycle length");
    const int slots_per_hour = inst.cycle_slots / cfg.hours;

    ShortTermSimResult res;
    for (int k = 0; k < cycles; ++k) {
        ShortTermCycleRow row;
        row.alpha.resize(nt);
        row.x.resize(nt);
        row.S.assign(n, 0);
        std::vector<long long> m_tilde(nl);
        for (int i = 0; i < nl; ++i)
            m_tilde[i] = sample_integer_requirement(streams.budgets, inst.requirement[i]);
        for (int j = 0; j < nt; ++j) {
            row.x[j] = sample_integer_budget(streams.misc, cfg.x_mean[j]);
            row.alpha[j] =
                short_term_alpha(cfg.l[j], (double)row.x[j], st.Q[nl + j], cfg.hours, cfg.w[j]);
            if (!(row.alpha[j] >= 0.0 && row.alpha[j] <= 1.0)) res.alpha_in_range = false;
        }

        for (int t = 0; t < inst.cycle_slots; ++t) {
            int q = sample_query_rates(cfg.hourly_rates[(t / slots_per_hour) % cfg.hourly_rates.size()],
                                       streams.arrivals);
            if (q < 0) continue;
            auto a = max_weight_assignment(ctr_weights(inst, st.Q, st.epsilon, q));
            for (int i = 0; i < n; ++i) {
                int s = a.slot_of_client[i];
                if (s < 0) continue;
                ++row.S[i];
                if (sample_click(inst, streams.clicks, q, i, s)) ++row.J;
            }
        }

        for (int i = 0; i < nl; ++i)
            st.Q[i] = std::max(st.Q[i] + (double)m_tilde[i] - (double)row.S[i], 0.0);
        for (int j = 0; j < nt; ++j)
            st.Q[nl + j] = short_term_credit_update(st.Q[nl + j], row.alpha[j], cfg.l[j],
                                                    (double)row.x[j], (double)row.S[nl + j]);
        double qsum = 0.0;
        for (double q : st.Q) qsum += q;
        res.mean_total_Q += qsum;
        if (k >= cycles / 2) res.second_half_mean_Q += qsum;
        row.Q_after = st.Q;
        res.cycles.push_back(std::move(row));
    }
    res.mean_total_Q /= std::max(cycles, 1);
    res.second_half_mean_Q /= std::max(cycles - cycles / 2, 1);
    return res;
}

}  // namespace adsim
