#include <cstdio>
#include <fstream>
#include <sstream>

#include "doctest.h"

#include "adsim/harness.hpp"
#include "test_helpers.hpp"

using namespace adsim;

TEST_CASE("instance JSON round trip") {
    auto inst = test::small_revenue_instance();
    auto j = instance_to_json(inst);
    auto back = instance_from_json(j);
    CHECK(back.num_keywords == inst.num_keywords);
    CHECK(back.ctr == inst.ctr);
    CHECK(back.bid == inst.bid);
    CHECK(back.budget == inst.budget);
    CHECK(back.keyword_prob == inst.keyword_prob);
    CHECK(back.eligibility == inst.eligibility);
    CHECK(validate_instance(back).empty());
}

TEST_CASE("bundled fixtures load and validate") {
    SUBCASE("small revenue instance") {
        auto inst = load_instance(fixture_path("small_revenue.json"));
        CHECK(validate_instance(inst).empty());
        CHECK(inst.num_clients == 3);
        CHECK(inst.cycle_slots == 10);
    }
    SUBCASE("five-keyword scenario") {
        auto inst = load_instance(fixture_path("table1.json"));
        CHECK(inst.num_keywords == 5);
        CHECK(inst.num_clients == 10);
        CHECK(inst.num_slots == 2);
        CHECK(inst.cycle_slots == 1440);
        CHECK(inst.arrival_prob == doctest::Approx(0.7));
        // Joint keyword rates as published.
        CHECK(inst.joint_rate(0) == doctest::Approx(0.2364));
        CHECK(inst.joint_rate(4) == doctest::Approx(0.1659));
        // Spot-check the ctr table.
        CHECK(inst.ctr[0][1][0] == doctest::Approx(0.519));
        CHECK(inst.ctr[0][2][0] == doctest::Approx(0.973));
        CHECK(inst.ctr[2][0][1] == doctest::Approx(0.118));
        CHECK(inst.ctr[4][5][1] == doctest::Approx(0.330));
        CHECK(inst.ctr[0][0][0] == 0.0);
        // No requirement shipped: it is computed, not published.
        CHECK(inst.requirement.empty());
        // Client 6 ("C7") is unrelated to keywords 1 and 5.
        CHECK(inst.ctr[0][6][0] == 0.0);
        CHECK(inst.ctr[4][6][0] == 0.0);
    }
}

TEST_CASE("csv writer emits provenance and rows") {
    std::string path = "adsim_test_tmp.csv";
    {
        CsvWriter csv(path);
        write_provenance(csv, 42, 0.01, "standard");
        csv.header({"cycle", "revenue"});
        csv.row(0, 1.5);
        csv.row(1, 2.5);
    }
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    auto text = ss.str();
    CHECK(text.find("# seed=42") != std::string::npos);
    CHECK(text.find("# epsilon=0.01") != std::string::npos);
    CHECK(text.find("# variant=standard") != std::string::npos);
    CHECK(text.find("cycle,revenue") != std::string::npos);
    CHECK(text.find("0,1.5") != std::string::npos);
    std::remove(path.c_str());
}

TEST_CASE("scenario validation") {
    Scenario sc;
    sc.instance = test::small_revenue_instance();
    CHECK(validate_scenario(sc).empty());
    SUBCASE("bad instance surfaces its violation") {
        sc.instance.arrival_prob = 1.0;
        CHECK(!validate_scenario(sc).empty());
    }
    SUBCASE("horizon must be positive") {
        sc.horizon = 0;
        CHECK(!validate_scenario(sc).empty());
    }
    SUBCASE("duplicate replica seeds are rejected") {
        sc.replicas = 2;
        sc.replica_seeds = {5, 5};
        CHECK(!validate_scenario(sc).empty());
        sc.replica_seeds = {5, 6};
        CHECK(validate_scenario(sc).empty());
    }
}

TEST_CASE("run_scenario is reproducible and aggregates replicas exactly") {
    Scenario sc;
    sc.instance = test::small_revenue_instance();
    sc.epsilon = 0.05;
    sc.horizon = 200;
    sc.seed = 77;
    sc.replicas = 3;
    auto a = run_scenario(sc);
    auto b = run_scenario(sc);
    REQUIRE(a.replicas.size() == 3);
    for (int r = 0; r < 3; ++r) {
        CHECK(a.replicas[r].objective == b.replicas[r].objective);
        CHECK(a.replicas[r].mean_total_Q == b.replicas[r].mean_total_Q);
    }
    // Aggregates recompute exactly from the per-replica values.
    double mean = 0.0;
    for (const auto& m : a.replicas) mean += m.objective;
    mean /= 3.0;
    CHECK(a.objective_mean == doctest::Approx(mean).epsilon(1e-15));
    // Distinct replicas see distinct randomness.
    CHECK(a.replicas[0].objective != a.replicas[1].objective);
}

TEST_CASE("single-cycle scenario produces one row of metrics") {
    Scenario sc;
    sc.instance = test::small_revenue_instance();
    sc.horizon = 1;
    auto res = run_scenario(sc);
    CHECK(res.replicas.size() == 1);
    CHECK(res.objective_sd == 0.0);
}

TEST_CASE("sweep_epsilon") {
    Scenario sc;
    sc.instance = test::small_revenue_instance();
    sc.horizon = 400;
    sc.seed = 5;
    SUBCASE("empty list throws") {
        CHECK_THROWS_AS(sweep_epsilon(sc, {}, 1.0), std::invalid_argument);
    }
    SUBCASE("single epsilon gives a single row") {
        auto rows = sweep_epsilon(sc, {1e-2}, 1.0);
        REQUIRE(rows.size() == 1);
        CHECK(rows[0].epsilon == 1e-2);
    }
    SUBCASE("queues grow as epsilon shrinks (paired paths)") {
        auto rows = sweep_epsilon(sc, {1e-1, 1e-3}, 1.0);
        REQUIRE(rows.size() == 2);
        CHECK(rows[1].mean_total_Q >= rows[0].mean_total_Q);
    }
}
