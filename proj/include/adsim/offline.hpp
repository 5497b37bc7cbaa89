// offline.hpp - dual-subgradient LP baselines for both models, plus oracles
#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "adsim/instance.hpp"
#include "adsim/matching.hpp"

namespace adsim {

/// Per-keyword randomized assignment choice: a sparse sub-distribution over
/// assignments. Probabilities sum to at most 1; the missing mass posts nothing.
using KeywordPolicy = std::vector<std::pair<Assignment, double>>;
using RandomizedPolicy = std::vector<KeywordPolicy>;  // indexed by keyword

struct OfflineSolution {
    RandomizedPolicy p;
    std::vector<double> delta;   // final duals, one per client
    std::vector<double> lambda;  // expected money charged per cycle, per client
    double R_star = 0.0;         // expected revenue per time slot
    double residual = 0.0;       // max_i [lambda_i - b_i]^+
    bool converged = true;
};

namespace detail {

// Expected per-slot value of posting `a` for keyword q: sum over posted pairs
// of c*r (revenue model) or c (value[q][i][s] generally).
inline double assignment_value(const ProblemInstance& inst, const Assignment& a, int q,
                               bool revenue) {
    double v = 0.0;
    for (int i = 0; i < inst.num_clients; ++i) {
        int s = a.slot_of_client[i];
        if (s < 0) continue;
        v += inst.ctr[q][i][s] * (revenue ? inst.bid_of(q, i) : 1.0);
    }
    return v;
}

}  // namespace detail

/// One projected dual-subgradient step for the revenue LP.
/// For each keyword the inner problem is a max-weight matching with weights
/// c_qis r_qi (1 - delta_i); the subgradient of the dual at delta is
/// N sum_q nu_q (charge rate of the maximizer) - b.
struct DualStepResult {
    std::vector<double> delta_next;
    std::vector<Assignment> maximizer;   // one per keyword
    std::vector<double> subgradient;     // per client
};

inline DualStepResult dual_gradient_step(const ProblemInstance& inst,
                                         const std::vector<double>& delta, double step) {
    DualStepResult res;
    res.maximizer.resize(inst.num_keywords);
    res.subgradient.assign(inst.num_clients, 0.0);
    for (int q = 0; q < inst.num_keywords; ++q) {
        WeightMatrix wm(inst.num_clients, inst.num_slots);
        for (int i = 0; i < inst.num_clients; ++i)
            for (int s = 0; s < inst.num_slots; ++s)
                if (inst.eligible(q, i, s))
                    wm.at(i, s) = inst.ctr[q][i][s] * inst.bid_of(q, i) * (1.0 - delta[i]);
        res.maximizer[q] = max_weight_assignment(wm);
        for (int i = 0; i < inst.num_clients; ++i) {
            int s = res.maximizer[q].slot_of_client[i];
            if (s >= 0)
                res.subgradient[i] +=
                    inst.cycle_slots * inst.joint_rate(q) * inst.ctr[q][i][s] * inst.bid_of(q, i);
        }
    }
    res.delta_next.resize(inst.num_clients);
    for (int i = 0; i < inst.num_clients; ++i) {
        res.subgradient[i] -= inst.budget[i];
        res.delta_next[i] = std::max(delta[i] + step * res.subgradient[i], 0.0);
    }
    return res;
}

/// Exact expectation of the money-charge rates under a randomized policy.
/// lambda_i = N sum_q nu_q sum_M p_qM sum_s M_is c_qis r_qi; R_bar = sum_i lambda_i / N.
/// Throws std::invalid_argument on a simplex violation.
inline std::pair<std::vector<double>, double> evaluate_rate_vector(const ProblemInstance& inst,
                                                                   const RandomizedPolicy& p) {
    if ((int)p.size() != inst.num_keywords)
        throw std::invalid_argument("evaluate_rate_vector: policy keyword count mismatch");
    std::vector<double> lambda(inst.num_clients, 0.0);
    for (int q = 0; q < inst.num_keywords; ++q) {
        double mass = 0.0;
        for (const auto& [a, prob] : p[q]) {
            if (prob < -1e-12 || prob > 1.0 + 1e-12)
                throw std::invalid_argument("evaluate_rate_vector: probability out of [0,1]");
            mass += prob;
            for (int i = 0; i < inst.num_clients; ++i) {
                int s = a.slot_of_client[i];
                if (s >= 0)
                    lambda[i] += inst.cycle_slots * inst.joint_rate(q) * prob *
                                 inst.ctr[q][i][s] * inst.bid_of(q, i);
            }
        }
        if (mass > 1.0 + 1e-9)
            throw std::invalid_argument("evaluate_rate_vector: keyword mass exceeds 1");
    }
    double r = 0.0;
    for (double l : lambda) r += l;
    return {lambda, r / inst.cycle_slots};
}

/// Dual function value at delta (upper bound on the LP optimum by weak
/// duality): sum_q nu_q [best matching value under weights c r (1-delta)]^+
/// + sum_i delta_i b_i / N.
inline double dual_value(const ProblemInstance& inst, const std::vector<double>& delta) {
    double g = 0.0;
    for (int q = 0; q < inst.num_keywords; ++q) {
        WeightMatrix wm(inst.num_clients, inst.num_slots);
        for (int i = 0; i < inst.num_clients; ++i)
            for (int s = 0; s < inst.num_slots; ++s)
                if (inst.eligible(q, i, s))
                    wm.at(i, s) = inst.ctr[q][i][s] * inst.bid_of(q, i) * (1.0 - delta[i]);
        g += inst.joint_rate(q) * max_weight_assignment(wm).total_weight;
    }
    for (int i = 0; i < inst.num_clients; ++i)
        g += delta[i] * inst.budget[i] / inst.cycle_slots;
    return g;
}

namespace detail {

// Accumulates per-keyword assignment frequencies into a sparse policy.
class PolicyAverager {
  public:
    explicit PolicyAverager(int num_keywords) : counts_(num_keywords) {}

    void add(int q, const Assignment& a) {
        if (a.size() == 0) return;  // empty choice = leftover simplex mass
        ++counts_[q][a.slot_of_client];
    }

    void observe_iteration() { ++iters_; }

    RandomizedPolicy policy(const ProblemInstance& inst) const {
        RandomizedPolicy p(counts_.size());
        for (size_t q = 0; q < counts_.size(); ++q)
            for (const auto& [key, n] : counts_[q]) {
                Assignment a((int)key.size(), inst.num_slots);
                a.slot_of_client = key;
                for (int i = 0; i < (int)key.size(); ++i)
                    if (key[i] >= 0) a.client_of_slot[key[i]] = i;
                p[q].push_back({std::move(a), (double)n / iters_});
            }
        return p;
    }

  private:
    std::vector<std::map<std::vector<int>, long long>> counts_;
    long long iters_ = 0;
};

}  // namespace detail

/// Solves the long-run-average revenue LP by projected dual subgradient with
/// primal averaging (constant step). Defaults: 1e5 iterations, residual
/// tolerance 1e-4 for the convergence flag.
inline OfflineSolution solve_offline(const ProblemInstance& inst, double step = 1e-2,
                                     int iterations = 100000, double feas_tol = 1e-4) {
    if (iterations < 1) throw std::invalid_argument("solve_offline: iterations must be >= 1");
    std::vector<double> delta(inst.num_clients, 0.0);
    detail::PolicyAverager avg(inst.num_keywords);
    for (int it = 0; it < iterations; ++it) {
        auto r = dual_gradient_step(inst, delta, step);
        avg.observe_iteration();
        for (int q = 0; q < inst.num_keywords; ++q) avg.add(q, r.maximizer[q]);
        delta = std::move(r.delta_next);
    }
    OfflineSolution sol;
    sol.p = avg.policy(inst);
    sol.delta = delta;
    auto [lambda, rbar] = evaluate_rate_vector(inst, sol.p);
    sol.lambda = std::move(lambda);
    sol.R_star = rbar;
    sol.residual = 0.0;
    for (int i = 0; i < inst.num_clients; ++i)
        sol.residual = std::max(sol.residual, sol.lambda[i] - inst.budget[i]);
    sol.converged = sol.residual <= feas_tol;
    return sol;
}

/// Grid-search oracle for the revenue LP on tiny instances. Enumerates each
/// keyword's nonempty assignments (guarded to <= 3 of them) and searches the
/// product of simplex grids with spacing 1/resolution. Returns the best
/// feasible per-slot revenue; feasibility allows a slack of 1e-9.
inline double brute_force_offline(const ProblemInstance& inst, int resolution = 50) {
    if (inst.num_keywords > 2)
        throw std::invalid_argument("brute_force_offline: too many keywords");
    // Candidate matrices: all nonempty assignments over eligible pairs.
    std::vector<std::vector<Assignment>> cands(inst.num_keywords);
    for (int q = 0; q < inst.num_keywords; ++q) {
        WeightMatrix wm(inst.num_clients, inst.num_slots);
        for (int i = 0; i < inst.num_clients; ++i)
            for (int s = 0; s < inst.num_slots; ++s)
                if (inst.eligible(q, i, s)) wm.at(i, s) = 1.0;
        // Enumerate via recursion over slots, mirroring enumerate_assignments.
        std::vector<Assignment> all;
        Assignment cur(inst.num_clients, inst.num_slots);
        auto rec = [&](auto&& self, int s) -> void {
            if (s == inst.num_slots) {
                if (cur.size() > 0) all.push_back(cur);
                return;
            }
            self(self, s + 1);
            for (int i = 0; i < inst.num_clients; ++i) {
                if (cur.posted(i) || !wm.edge(i, s)) continue;
                cur.slot_of_client[i] = s;
                cur.client_of_slot[s] = i;
                self(self, s + 1);
                cur.slot_of_client[i] = -1;
                cur.client_of_slot[s] = -1;
            }
        };
        rec(rec, 0);
        if ((int)all.size() > 3)
            throw std::invalid_argument("brute_force_offline: too many candidate matrices");
        cands[q] = std::move(all);
    }

    // Per-candidate per-slot revenue and per-client charge rates.
    struct Cand {
        double value;                  // c*r sum (per arrival)
        std::vector<double> charge;    // N nu_q c r per client
    };
    std::vector<std::vector<Cand>> cv(inst.num_keywords);
    for (int q = 0; q < inst.num_keywords; ++q)
        for (const auto& a : cands[q]) {
            Cand c{0.0, std::vector<double>(inst.num_clients, 0.0)};
            for (int i = 0; i < inst.num_clients; ++i) {
                int s = a.slot_of_client[i];
                if (s < 0) continue;
                double cr = inst.ctr[q][i][s] * inst.bid_of(q, i);
                c.value += cr;
                c.charge[i] = inst.cycle_slots * inst.joint_rate(q) * cr;
            }
            cv[q].push_back(std::move(c));
        }

    // Enumerate grid points of each keyword's simplex (weights summing to <= 1).
    auto grid_points = [&](int ncand) {
        std::vector<std::vector<int>> pts;
        std::vector<int> cur(ncand, 0);
        auto rec = [&](auto&& self, int j, int left) -> void {
            if (j == ncand) { pts.push_back(cur); return; }
            for (int v = 0; v <= left; ++v) {
                cur[j] = v;
                self(self, j + 1, left - v);
            }
        };
        rec(rec, 0, resolution);
        return pts;
    };

    double best = 0.0;
    std::vector<std::vector<std::vector<int>>> grids;
    for (int q = 0; q < inst.num_keywords; ++q) grids.push_back(grid_points((int)cv[q].size()));

    std::vector<const std::vector<int>*> pick(inst.num_keywords);
    auto rec = [&](auto&& self, int q) -> void {
        if (q == inst.num_keywords) {
            double obj = 0.0;
            std::vector<double> lam(inst.num_clients, 0.0);
            for (int qq = 0; qq < inst.num_keywords; ++qq)
                for (size_t j = 0; j < cv[qq].size(); ++j) {
                    double prob = (*pick[qq])[j] / (double)resolution;
                    if (prob == 0.0) continue;
                    obj += inst.joint_rate(qq) * prob * cv[qq][j].value;
                    for (int i = 0; i < inst.num_clients; ++i)
                        lam[i] += prob * cv[qq][j].charge[i];
                }
            for (int i = 0; i < inst.num_clients; ++i)
                if (lam[i] > inst.budget[i] + 1e-9) return;
            best = std::max(best, obj);
            return;
        }
        for (const auto& g : grids[q]) {
            pick[q] = &g;
            self(self, q + 1);
        }
    };
    rec(rec, 0);
    return best;
}

/// B2 = min_i (b_i - lambda_i): the worst-case budget slack of the offline
/// solution. Zero when some budget binds.
inline double compute_B2(const ProblemInstance& inst, const OfflineSolution& sol) {
    double b2 = std::numeric_limits<double>::infinity();
    for (int i = 0; i < inst.num_clients; ++i)
        b2 = std::min(b2, inst.budget[i] - sol.lambda[i]);
    return b2;
}

// ---------------------------------------------------------------------------
// CTR-model offline machinery.
// ---------------------------------------------------------------------------

/// Expected clicks per slot under a randomized policy (the CTR objective).
inline double expected_click_rate(const ProblemInstance& inst, const RandomizedPolicy& p) {
    double j = 0.0;
    for (int q = 0; q < inst.num_keywords; ++q)
        for (const auto& [a, prob] : p[q])
            j += inst.joint_rate(q) * prob * detail::assignment_value(inst, a, q, false);
    return j;
}

/// Expected impressions per cycle delivered to each client under a policy.
inline std::vector<double> impression_capacity(const ProblemInstance& inst,
                                               const RandomizedPolicy& p) {
    std::vector<double> cap(inst.num_clients, 0.0);
    for (int q = 0; q < inst.num_keywords; ++q)
        for (const auto& [a, prob] : p[q])
            for (int i = 0; i < inst.num_clients; ++i)
                if (a.slot_of_client[i] >= 0)
                    cap[i] += inst.cycle_slots * inst.joint_rate(q) * prob;
    return cap;
}

/// D3 = N * max unconstrained click rate: every keyword uses the matching that
/// maximizes the posted ctr sum.
inline double compute_D3(const ProblemInstance& inst) {
    double j = 0.0;
    for (int q = 0; q < inst.num_keywords; ++q) {
        WeightMatrix wm(inst.num_clients, inst.num_slots);
        for (int i = 0; i < inst.num_clients; ++i)
            for (int s = 0; s < inst.num_slots; ++s)
                if (inst.eligible(q, i, s)) wm.at(i, s) = inst.ctr[q][i][s];
        j += inst.joint_rate(q) * max_weight_assignment(wm).total_weight;
    }
    return inst.cycle_slots * j;
}

struct CtrOfflineSolution {
    RandomizedPolicy p;
    std::vector<double> delta;     // covering-constraint duals
    std::vector<double> capacity;  // impressions per cycle per client
    double J_star = 0.0;           // clicks per slot
    double residual = 0.0;         // max_i [m_i - capacity_i]^+
    bool converged = true;
};

/// Solves the CTR LP: maximize clicks/slot subject to capacity_i(p) >= m_i.
/// Dual subgradient on the covering constraints; inner matchings use weights
/// c_qis + delta_i.
inline CtrOfflineSolution solve_offline_ctr(const ProblemInstance& inst, double step = 1e-3,
                                            int iterations = 100000, double feas_tol = 1e-4) {
    std::vector<double> delta(inst.num_clients, 0.0);
    detail::PolicyAverager avg(inst.num_keywords);
    for (int it = 0; it < iterations; ++it) {
        std::vector<double> cap(inst.num_clients, 0.0);
        avg.observe_iteration();
        for (int q = 0; q < inst.num_keywords; ++q) {
            WeightMatrix wm(inst.num_clients, inst.num_slots);
            for (int i = 0; i < inst.num_clients; ++i)
                for (int s = 0; s < inst.num_slots; ++s)
                    if (inst.eligible(q, i, s))
                        wm.at(i, s) = inst.ctr[q][i][s] + delta[i];
            auto a = max_weight_assignment(wm);
            avg.add(q, a);
            for (int i = 0; i < inst.num_clients; ++i)
                if (a.slot_of_client[i] >= 0)
                    cap[i] += inst.cycle_slots * inst.joint_rate(q);
        }
        for (int i = 0; i < inst.num_clients; ++i)
            delta[i] = std::max(delta[i] + step * (inst.requirement[i] - cap[i]), 0.0);
    }
    CtrOfflineSolution sol;
    sol.p = avg.policy(inst);
    sol.delta = std::move(delta);
    sol.capacity = impression_capacity(inst, sol.p);
    sol.J_star = expected_click_rate(inst, sol.p);
    for (int i = 0; i < inst.num_clients; ++i)
        sol.residual = std::max(sol.residual, inst.requirement[i] - sol.capacity[i]);
    sol.converged = sol.residual <= feas_tol;
    return sol;
}

/// D2* = max over policies of min_i (capacity_i(p) - m_i), solved by
/// multiplicative weights over the clients with per-keyword matching best
/// responses, averaging the responses. Returns the max-min value and the
/// achieving policy.
struct MaxMinResult {
    double value = 0.0;
    RandomizedPolicy p;
};

inline MaxMinResult solve_max_d2(const ProblemInstance& inst,
                                 const std::vector<double>& requirement,
                                 int iterations = 4000) {
    const int n = inst.num_clients;
    std::vector<double> logw(n, 0.0);  // multiplicative weights in log space
    detail::PolicyAverager avg(inst.num_keywords);
    const double eta = 2.0 * std::sqrt(std::log((double)std::max(n, 2)) / iterations) /
                       std::max(1.0, (double)inst.cycle_slots);
    for (int it = 0; it < iterations; ++it) {
        double mx = *std::max_element(logw.begin(), logw.end());
        std::vector<double> y(n);
        double sum = 0.0;
        for (int i = 0; i < n; ++i) { y[i] = std::exp(logw[i] - mx); sum += y[i]; }
        for (auto& v : y) v /= sum;

        // Best response: maximize sum_i y_i capacity_i(p) over deterministic p.
        std::vector<double> cap(n, 0.0);
        avg.observe_iteration();
        for (int q = 0; q < inst.num_keywords; ++q) {
            WeightMatrix wm(inst.num_clients, inst.num_slots);
            for (int i = 0; i < n; ++i)
                for (int s = 0; s < inst.num_slots; ++s)
                    if (inst.eligible(q, i, s)) wm.at(i, s) = y[i] + 1e-15;
            auto a = max_weight_assignment(wm);
            avg.add(q, a);
            for (int i = 0; i < n; ++i)
                if (a.slot_of_client[i] >= 0)
                    cap[i] += inst.cycle_slots * inst.joint_rate(q);
        }
        // MW update: upweight clients with small slack.
        for (int i = 0; i < n; ++i)
            logw[i] -= eta * (cap[i] - requirement[i]);
    }
    MaxMinResult res;
    res.p = avg.policy(inst);
    auto cap = impression_capacity(inst, res.p);
    res.value = std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i)
        res.value = std::min(res.value, cap[i] - requirement[i]);
    return res;
}

}  // namespace adsim
