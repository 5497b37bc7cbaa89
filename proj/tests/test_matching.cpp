#include <random>

#include "doctest.h"

#include "adsim/matching.hpp"

using namespace adsim;

namespace {

WeightMatrix full(int nc, int ns, const std::vector<std::vector<double>>& w) {
    WeightMatrix wm(nc, ns);
    for (int i = 0; i < nc; ++i)
        for (int s = 0; s < ns; ++s) wm.at(i, s) = w[i][s];
    return wm;
}

}  // namespace

TEST_CASE("2x2 all-eligible example") {
    auto wm = full(2, 2, {{3, 1}, {2, 2}});
    auto a = max_weight_assignment(wm);
    CHECK(a.total_weight == doctest::Approx(5.0));
    CHECK(a.slot_of_client[0] == 0);
    CHECK(a.slot_of_client[1] == 1);
}

TEST_CASE("all-negative weights give the empty assignment") {
    auto wm = full(2, 2, {{-1, -2}, {-3, -0.5}});
    auto a = max_weight_assignment(wm);
    CHECK(a.size() == 0);
    CHECK(a.total_weight == 0.0);
}

TEST_CASE("single positive edge is taken") {
    auto wm = full(1, 1, {{0.4}});
    auto a = max_weight_assignment(wm);
    CHECK(a.slot_of_client[0] == 0);
    CHECK(a.total_weight == doctest::Approx(0.4));
}

TEST_CASE("enumeration oracle edge cases") {
    WeightMatrix empty(2, 2);  // all ineligible
    CHECK(enumerate_assignments(empty).size() == 0);
    auto neg = full(1, 1, {{-0.1}});
    CHECK(enumerate_assignments(neg).size() == 0);
    WeightMatrix big(20, 13);
    CHECK_THROWS_AS(enumerate_assignments(big), std::invalid_argument);
}

TEST_CASE("oracle equivalence on random 4x3 matrices") {
    std::mt19937_64 eng(42);
    auto u = [&] { return (eng() >> 11) * 0x1.0p-53 * 2.0 - 1.0; };
    for (int trial = 0; trial < 10000; ++trial) {
        WeightMatrix wm(4, 3);
        for (int i = 0; i < 4; ++i)
            for (int s = 0; s < 3; ++s)
                if (eng() % 8 != 0) wm.at(i, s) = u();  // some pairs ineligible
        auto fast = max_weight_assignment(wm);
        auto slow = enumerate_assignments(wm);
        REQUIRE(fast.total_weight == slow.total_weight);
    }
}

TEST_CASE("scaling all weights by a positive constant keeps the assignment") {
    std::mt19937_64 eng(7);
    auto u = [&] { return (eng() >> 11) * 0x1.0p-53 * 2.0 - 1.0; };
    for (int trial = 0; trial < 500; ++trial) {
        WeightMatrix wm(4, 3);
        for (int i = 0; i < 4; ++i)
            for (int s = 0; s < 3; ++s) wm.at(i, s) = u();
        auto base = max_weight_assignment(wm);
        for (double scale : {2.0, 0.5, 4.0}) {  // exact in binary floating point
            WeightMatrix scaled = wm;
            for (auto& x : scaled.w) x *= scale;
            CHECK(max_weight_assignment(scaled).slot_of_client == base.slot_of_client);
        }
    }
}

TEST_CASE("raising an optimal edge keeps it optimal") {
    std::mt19937_64 eng(11);
    auto u = [&] { return (eng() >> 11) * 0x1.0p-53 * 2.0 - 1.0; };
    for (int trial = 0; trial < 500; ++trial) {
        WeightMatrix wm(4, 3);
        for (int i = 0; i < 4; ++i)
            for (int s = 0; s < 3; ++s) wm.at(i, s) = u();
        auto base = max_weight_assignment(wm);
        for (int i = 0; i < 4; ++i) {
            int s = base.slot_of_client[i];
            if (s < 0) continue;
            WeightMatrix bumped = wm;
            bumped.at(i, s) += 1.0;
            auto again = max_weight_assignment(bumped);
            CHECK(again.slot_of_client[i] == s);
        }
    }
}

TEST_CASE("output satisfies the assignment invariants") {
    std::mt19937_64 eng(3);
    auto u = [&] { return (eng() >> 11) * 0x1.0p-53 * 2.0 - 1.0; };
    for (int trial = 0; trial < 1000; ++trial) {
        WeightMatrix wm(5, 3);
        for (int i = 0; i < 5; ++i)
            for (int s = 0; s < 3; ++s)
                if (eng() % 4 != 0) wm.at(i, s) = u();
        auto a = max_weight_assignment(wm);
        std::vector<int> used(3, 0);
        for (int i = 0; i < 5; ++i) {
            int s = a.slot_of_client[i];
            if (s < 0) continue;
            CHECK(wm.edge(i, s));
            CHECK(wm.at(i, s) > 0.0);
            CHECK(used[s] == 0);
            used[s] = 1;
            CHECK(a.client_of_slot[s] == i);
        }
    }
}
