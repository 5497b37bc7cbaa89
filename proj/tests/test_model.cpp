#include "doctest.h"

#include "adsim/instance.hpp"
#include "test_helpers.hpp"

using namespace adsim;
using test::tiny_instance;

TEST_CASE("validate_instance flags boundary arrival probability") {
    auto inst = tiny_instance(1.0, 0.5, 1.0, 1.0, 1);
    auto v = validate_instance(inst);
    REQUIRE(v.size() == 1);
    CHECK(v[0].field == "arrival_prob");
    CHECK(v[0].message == "arrival_prob must lie strictly in (0,1)");
}

TEST_CASE("validate_instance accepts a normalized two-keyword distribution") {
    ProblemInstance inst;
    inst.num_keywords = 2;
    inst.num_clients = 1;
    inst.num_slots = 1;
    inst.ctr = {{{0.5}}, {{0.4}}};
    inst.bid = {{1.0}, {1.0}};
    inst.budget = {1.0};
    inst.arrival_prob = 0.5;
    inst.keyword_prob = {0.5, 0.5};
    inst.cycle_slots = 5;
    inst.default_eligibility();
    CHECK(validate_instance(inst).empty());
}

TEST_CASE("validate_instance names the bad ctr entry") {
    auto inst = tiny_instance(0.5, 0.5, 1.0, 1.0, 1);
    inst.ctr[0][0][0] = 1.2;
    auto v = validate_instance(inst);
    REQUIRE(v.size() == 1);
    CHECK(v[0].field == "ctr[0][0][0]");
}

TEST_CASE("validate_instance is idempotent and side-effect free") {
    auto inst = tiny_instance(0.9, 0.5, 1.0, 0.3, 1);
    auto a = validate_instance(inst);
    auto b = validate_instance(inst);
    CHECK(a.size() == b.size());
    CHECK(inst.arrival_prob == 0.9);
}

TEST_CASE("non-integer bids raise a warning, not an error") {
    auto inst = tiny_instance(0.5, 0.5, 1.5, 1.0, 1);
    CHECK(validate_instance(inst).empty());
    CHECK(instance_warnings(inst).size() == 1);
}

TEST_CASE("check_large_N thresholds") {
    SUBCASE("b=0.3 fails at N=1") {
        auto inst = tiny_instance(0.9, 0.5, 1.0, 0.3, 1);
        auto res = check_large_N(inst);
        CHECK(res.threshold[0] == doctest::Approx(0.3 / 0.45));
        CHECK_FALSE(res.ok);
    }
    SUBCASE("b=0.2 passes at N=1") {
        auto inst = tiny_instance(0.9, 0.5, 1.0, 0.2, 1);
        auto res = check_large_N(inst);
        CHECK(res.threshold[0] == doctest::Approx(0.2 / 0.45));
        CHECK(res.ok);
    }
    SUBCASE("zero-ctr client with positive budget is unreachable") {
        auto inst = tiny_instance(0.9, 0.0, 1.0, 0.5, 1);
        inst.eligibility = {{{1}}};  // eligible but zero ctr
        auto res = check_large_N(inst);
        REQUIRE(res.diagnostics.size() == 1);
        CHECK(res.diagnostics[0] == "client 0 unreachable");
    }
}

TEST_CASE("compute_B1 closed form") {
    CHECK(compute_B1(tiny_instance(0.5, 0.5, 1.0, 1.0, 1)) == doctest::Approx(0.625));
    CHECK(compute_B1(tiny_instance(0.5, 0.5, 1.0, 0.5, 1)) == doctest::Approx(0.375));
    auto inst = tiny_instance(0.5, 0.0, 1.0, 2.0, 1);
    CHECK(compute_B1(inst) == doctest::Approx(2.0));
}

TEST_CASE("compute_B1 monotone in ctr, bid, N and L") {
    auto base = tiny_instance(0.5, 0.5, 2.0, 1.5, 3);
    double b0 = compute_B1(base);
    auto up = base;
    up.ctr[0][0][0] = 0.7;
    CHECK(compute_B1(up) >= b0);
    up = base;
    up.bid[0][0] = 3.0;
    CHECK(compute_B1(up) >= b0);
    up = base;
    up.cycle_slots = 4;
    CHECK(compute_B1(up) >= b0);
    ProblemInstance wide = base;
    wide.num_slots = 2;
    wide.ctr = {{{0.5, 0.5}}};
    wide.eligibility = {{{1, 1}}};
    CHECK(compute_B1(wide) >= b0);
}

TEST_CASE("integer budget kills the ceil term of the variance part") {
    // For integer b the randomization is deterministic: E[b~^2] = b^2.
    for (double b : {0.0, 1.0, 2.0, 7.0}) {
        auto inst = tiny_instance(0.5, 0.0, 1.0, b, 1);
        CHECK(compute_B1(inst) == doctest::Approx(0.5 * b * b));
    }
}

TEST_CASE("overdraft_hard_bound closed form") {
    SUBCASE("eps=0.01, N=1, max rc=0.5, b=0") {
        auto inst = tiny_instance(0.5, 0.5, 1.0, 0.0, 1);
        CHECK(overdraft_hard_bound(inst, 0.01)[0] == doctest::Approx(100.5));
    }
    SUBCASE("eps=0.001, N=10, max rc=1, b=3.7") {
        auto inst = tiny_instance(0.5, 1.0, 1.0, 3.7, 10);
        CHECK(overdraft_hard_bound(inst, 0.001)[0] == doctest::Approx(1007.0));
    }
    SUBCASE("zero ctr client") {
        auto inst = tiny_instance(0.5, 0.0, 1.0, 2.0, 5);
        CHECK(overdraft_hard_bound(inst, 0.01)[0] == doctest::Approx(100.0 - 2.0));
    }
    SUBCASE("decreasing in floor(b), increasing in 1/eps") {
        auto lo = tiny_instance(0.5, 0.5, 1.0, 1.0, 1);
        auto hi = tiny_instance(0.5, 0.5, 1.0, 2.0, 1);
        CHECK(overdraft_hard_bound(hi, 0.01)[0] < overdraft_hard_bound(lo, 0.01)[0]);
        CHECK(overdraft_hard_bound(lo, 0.005)[0] > overdraft_hard_bound(lo, 0.01)[0]);
    }
}

TEST_CASE("compute_D1 closed form at N=L=1, integer m") {
    std::vector<double> m = {1.0};
    CHECK(compute_D1_for(m, 1, 1) == doctest::Approx(1.0));
}
