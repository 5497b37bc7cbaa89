#include <cmath>
#include <random>

#include "doctest.h"

#include "adsim/bounds.hpp"
#include "test_helpers.hpp"

using namespace adsim;

TEST_CASE("single_queue_lower_bound closed forms") {
    CHECK(single_queue_lower_bound({0.01, 0.5, 1.0}) ==
          doctest::Approx(std::log(100.0) / (2.0 * (1.0 - std::log(0.5))) - 1.0));
    CHECK(single_queue_lower_bound({0.01, 0.5, 1.0}) == doctest::Approx(0.35996).epsilon(1e-4));
    CHECK(single_queue_lower_bound({1.0, 0.5, 1.0}) == doctest::Approx(-1.0));
    // phi -> 0+: the bound collapses toward its vacuous floor.
    CHECK(single_queue_lower_bound({0.01, 1e-300, 1.0}) == doctest::Approx(-1.0).epsilon(1e-1));
}

TEST_CASE("lower_bound_params from an instance") {
    auto inst = adsim::test::tiny_instance(0.3, 0.5, 1.0, 0.6, 2);
    auto p = lower_bound_params(inst, 0.01);
    CHECK(p.phi == doctest::Approx(0.49));
    CHECK(p.p_plus == doctest::Approx(0.6));  // b = 0.6 -> Pr(b~ > 0) = 0.6
    inst.budget = {2.5};
    CHECK(lower_bound_params(inst, 0.01).p_plus == 1.0);
}

TEST_CASE("multi_queue_lower_bound") {
    LowerBoundParams p{1e-4, 0.5, 0.9};
    SUBCASE("unit weights reduce to the single-queue bound") {
        HalfspaceRegion reg{{{1.0, 1.0}}, {1.0}};
        CHECK(multi_queue_lower_bound(p, reg) == doctest::Approx(single_queue_lower_bound(p)));
    }
    SUBCASE("max h = e shifts the numerator by 1") {
        HalfspaceRegion reg{{{std::exp(1.0), 0.5}}, {1.0}};
        double c1 = 2.0 * (1.0 - std::log(0.5 * 0.9)) * std::exp(1.0);
        CHECK(multi_queue_lower_bound(p, reg) ==
              doctest::Approx((std::log(1e4) - 1.0) / c1 - 1.0));
    }
    SUBCASE("worked example") {
        HalfspaceRegion reg{{{2.0, 1.0}}, {1.0}};
        CHECK(multi_queue_lower_bound(p, reg) == doctest::Approx(0.184).epsilon(1e-2));
    }
}

TEST_CASE("two_client_region helper") {
    ProblemInstance inst;
    inst.num_keywords = 1;
    inst.num_clients = 2;
    inst.num_slots = 1;
    inst.ctr = {{{0.5}, {0.25}}};
    inst.bid = {{2.0, 1.0}};
    inst.budget = {1.0, 1.0};
    inst.arrival_prob = 0.8;
    inst.keyword_prob = {1.0};
    inst.cycle_slots = 10;
    inst.default_eligibility();
    auto reg = two_client_region(inst);
    REQUIRE(reg.h.size() == 1);
    CHECK(reg.h[0][0] == doctest::Approx(1.0 / (10 * 0.8 * 1.0)));
    CHECK(reg.h[0][1] == doctest::Approx(1.0 / (10 * 0.8 * 0.25)));
    CHECK(reg.d[0] == 1.0);
}

TEST_CASE("threshold chain: exact stationary solve") {
    ThresholdPolicy pol{3, 0.5, 0.25, 0.7};
    auto st = threshold_policy_stationary(pol);
    REQUIRE(st.pi.size() == 5);
    double sum = 0.0;
    for (double x : st.pi) {
        CHECK(x >= 0.0);
        sum += x;
    }
    CHECK(std::abs(sum - 1.0) <= 1e-12);
    // Balance residuals of the implemented cut equations.
    double rho = pol.nu / (1.0 - pol.nu);
    for (int i = 0; i + 1 <= pol.T - 1; ++i)
        CHECK(std::abs(st.pi[i + 1] - st.pi[i] * rho) <= 1e-12);
    CHECK(std::abs(st.pi[pol.T] -
                   st.pi[pol.T - 1] * pol.nu / (1.0 - (pol.p1 + pol.p2) * pol.nu)) <= 1e-12);
    CHECK(std::abs(st.pi[pol.T + 1] - st.pi[pol.T] * pol.p2 * pol.nu) <= 1e-12);
}

TEST_CASE("threshold chain: Monte-Carlo cross-check") {
    ThresholdPolicy pol{3, 0.5, 0.25, 0.7};
    auto exact = threshold_policy_stationary(pol);
    std::mt19937_64 eng(2024);
    auto u = [&] { return (eng() >> 11) * 0x1.0p-53; };
    const long long n = 5000000;
    long long q = 0, admitted = 0;
    double qsum = 0.0;
    for (long long t = 0; t < n; ++t) {
        int a = u() < pol.nu ? 2 : 0;
        if (a == 2) {
            if (q > pol.T) a = 0;
            else if (q == pol.T) {
                double v = u();
                a = v < pol.p1 ? 1 : (v < pol.p1 + pol.p2 ? 2 : 0);
            }
        }
        admitted += a;
        q = std::max(q + a - 1, 0LL);
        qsum += (double)q;
    }
    double tp = (double)admitted / n;
    // ~3 sigma allowances for the chain's mixing.
    CHECK(std::abs(tp - exact.throughput) < 3e-3);
    CHECK(std::abs(qsum / n - exact.mean_queue) < 2e-2);
}

TEST_CASE("threshold chain edge cases and diagnostics") {
    SUBCASE("T = 0 is a two-state chain") {
        auto st = threshold_policy_stationary({0, 0.3, 0.2, 0.7});
        REQUIRE(st.pi.size() == 2);
        CHECK(st.pi[1] == doctest::Approx(st.pi[0] * 0.2 * 0.7));
        CHECK(st.throughput == doctest::Approx(0.7 * st.pi[0] * (2 * 0.2 + 0.3)));
    }
    SUBCASE("degenerate parameters are rejected") {
        CHECK_THROWS_AS(threshold_policy_stationary({3, 0.5, 0.25, 0.4}),
                        std::invalid_argument);
        CHECK_THROWS_AS(threshold_policy_stationary({3, 0.8, 0.3, 0.7}),
                        std::invalid_argument);
    }
}

TEST_CASE("throughput is nondecreasing in T") {
    double prev = -1.0;
    for (int t = 0; t <= 20; ++t) {
        auto st = threshold_policy_stationary({t, 0.5, 0.25, 0.7});
        CHECK(st.throughput >= prev - 1e-15);
        prev = st.throughput;
    }
}

TEST_CASE("threshold_for_epsilon") {
    SUBCASE("T shrinks as nu grows toward 1") {
        double prev = 1e9;
        for (double nu : {0.9, 0.95, 0.99}) {
            auto r = threshold_for_epsilon(nu, 0.5, 0.25, 0.01);
            CHECK(r.t_real < prev);
            prev = r.t_real;
        }
        CHECK(threshold_for_epsilon(0.99, 0.5, 0.25, 0.01).t_real < 2.0);
    }
    SUBCASE("halving epsilon adds ln2/ln(rho) to T") {
        double nu = 0.7;
        auto a = threshold_for_epsilon(nu, 0.5, 0.25, 1e-3);
        auto b = threshold_for_epsilon(nu, 0.5, 0.25, 5e-4);
        double slope = std::log(2.0) / std::log(nu / (1.0 - nu));
        CHECK(b.t_real - a.t_real == doctest::Approx(slope).epsilon(1e-2));
    }
    SUBCASE("stationary throughput brackets 1 - eps at adjacent integers") {
        for (double eps : {1e-2, 1e-3, 1e-4, 1e-5}) {
            auto r = threshold_for_epsilon(0.7, 0.5, 0.25, eps);
            double lo = threshold_policy_stationary({std::max(r.t_int - 1, 0), 0.5, 0.25, 0.7})
                            .throughput;
            double hi = threshold_policy_stationary({r.t_int + 1, 0.5, 0.25, 0.7}).throughput;
            CHECK(lo <= 1.0 - eps + 1e-12);
            CHECK(hi >= 1.0 - eps - 1e-12);
        }
    }
}
