// bounds.hpp - queue-length lower bounds and the threshold-policy chain
#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "adsim/instance.hpp"

namespace adsim {

struct LowerBoundParams {
    double epsilon = 0.0;
    double phi = 0.0;     // Pr(no query arrival in a budgeting cycle)
    double p_plus = 1.0;  // Pr(b~_i > 0 for all i)
};

/// phi = (1-nu)^N and P_+ = prod_i Pr(b~_i > 0) for the Bernoulli model with
/// randomized integer budgets.
inline LowerBoundParams lower_bound_params(const ProblemInstance& inst, double epsilon) {
    LowerBoundParams p;
    p.epsilon = epsilon;
    p.phi = std::pow(1.0 - inst.arrival_prob, inst.cycle_slots);
    p.p_plus = 1.0;
    for (double b : inst.budget) {
        double pr = std::floor(b) >= 1.0 ? 1.0 : b - std::floor(b);
        p.p_plus *= pr;
    }
    return p;
}

/// ln(1/eps) / (2 (1 - ln(phi P_+))) - 1: the mean-queue lower bound for any
/// policy within eps of the single-queue revenue optimum.
inline double single_queue_lower_bound(const LowerBoundParams& p) {
    return std::log(1.0 / p.epsilon) / (2.0 * (1.0 - std::log(p.phi * p.p_plus))) - 1.0;
}

/// The per-client revenue region as halfspaces h^(n) . lambda <= d^(n),
/// lambda >= 0, with h >= 0 and d > 0.
struct HalfspaceRegion {
    std::vector<std::vector<double>> h;  // one row per halfspace
    std::vector<double> d;
};

/// One-keyword / two-client / one-slot region: the slot time-shares, so
/// lambda_1/(N nu c_1 r_1) + lambda_2/(N nu c_2 r_2) <= 1.
inline HalfspaceRegion two_client_region(const ProblemInstance& inst) {
    HalfspaceRegion reg;
    std::vector<double> row(2);
    for (int i = 0; i < 2; ++i)
        row[i] = 1.0 /
                 (inst.cycle_slots * inst.arrival_prob * inst.ctr[0][i][0] * inst.bid_of(0, i));
    reg.h.push_back(row);
    reg.d.push_back(1.0);
    return reg;
}

/// (ln(1/eps) - C2)/C1 - 1 with C1 = 2 (1 - ln(phi P_+)) max h and
/// C2 = max(ln(max h), 0).
inline double multi_queue_lower_bound(const LowerBoundParams& p, const HalfspaceRegion& reg) {
    double hmax = 0.0;
    for (const auto& row : reg.h)
        for (double h : row) hmax = std::max(hmax, h);
    double c1 = 2.0 * (1.0 - std::log(p.phi * p.p_plus)) * hmax;
    double c2 = std::max(std::log(hmax), 0.0);
    return (std::log(1.0 / p.epsilon) - c2) / c1 - 1.0;
}

// ---------------------------------------------------------------------------
// Threshold admission policy (batch arrivals of 2, unit service).
// ---------------------------------------------------------------------------

struct ThresholdPolicy {
    int T = 0;
    double p1 = 0.0, p2 = 0.0;
    double nu = 0.0;  // in (1/2, 1)
};

struct ThresholdStationary {
    std::vector<double> pi;  // states 0..T+1
    double throughput = 0.0;
    double mean_queue = 0.0;
};

/// Exact stationary distribution of the threshold chain via the cut balance
/// equations: pi_{i+1} = pi_i nu/(1-nu) for i <= T-2,
/// pi_T = pi_{T-1} nu / (1 - (p1+p2) nu), pi_{T+1} = pi_T p2 nu.
/// Throughput = nu [2 sum_{i<T} pi_i + pi_T (2 p2 + p1)].
inline ThresholdStationary threshold_policy_stationary(const ThresholdPolicy& pol) {
    if (!(pol.nu > 0.5 && pol.nu < 1.0))
        throw std::invalid_argument("threshold policy requires nu in (1/2, 1)");
    if (pol.p1 < 0.0 || pol.p2 < 0.0 || pol.p1 + pol.p2 > 1.0)
        throw std::invalid_argument("p1, p2 must be probabilities with p1+p2 <= 1");
    if (1.0 - (pol.p1 + pol.p2) * pol.nu <= 0.0)
        throw std::invalid_argument("threshold chain degenerate: 1 - (p1+p2) nu <= 0");

    const int t = pol.T;
    const double rho = pol.nu / (1.0 - pol.nu);
    std::vector<double> pi;
    pi.push_back(1.0);
    for (int i = 0; i < t - 1; ++i) pi.push_back(pi.back() * rho);  // pi_1..pi_{T-1}
    if (t >= 1) pi.push_back(pi.back() * pol.nu / (1.0 - (pol.p1 + pol.p2) * pol.nu));  // pi_T
    pi.push_back(pi[t] * pol.p2 * pol.nu);  // pi_{T+1}

    double sum = 0.0;
    for (double x : pi) sum += x;
    for (double& x : pi) x /= sum;

    ThresholdStationary res;
    res.pi = pi;
    double below = 0.0;
    for (int i = 0; i < t; ++i) below += pi[i];
    res.throughput = pol.nu * (2.0 * below + pi[t] * (2.0 * pol.p2 + pol.p1));
    for (size_t i = 0; i < pi.size(); ++i) res.mean_queue += (double)i * pi[i];
    return res;
}

struct ThresholdForEpsilon {
    double t_real = 0.0;       // closed-form threshold
    int t_int = 0;             // round(t_real), clipped at 0
    double throughput = 0.0;   // exact stationary throughput at t_int
    double mean_queue = 0.0;
};

/// Closed-form threshold achieving throughput 1 - eps:
/// T = (ln(1/eps) + ln C(eps)) / ln(nu/(1-nu)), with
/// C(eps) = (2nu-1+eps)(1-nu(p1+p2)) / (nu (2 - 2(1-nu) p2 - p1)).
inline ThresholdForEpsilon threshold_for_epsilon(double nu, double p1, double p2,
                                                 double epsilon) {
    double c = (2.0 * nu - 1.0 + epsilon) * (1.0 - nu * (p1 + p2)) /
               (nu * (2.0 - 2.0 * (1.0 - nu) * p2 - p1));
    ThresholdForEpsilon res;
    res.t_real = (std::log(1.0 / epsilon) + std::log(c)) / std::log(nu / (1.0 - nu));
    res.t_int = std::max((int)std::lround(res.t_real), 0);
    auto st = threshold_policy_stationary({res.t_int, p1, p2, nu});
    res.throughput = st.throughput;
    res.mean_queue = st.mean_queue;
    return res;
}

}  // namespace adsim
