// harness.hpp - instance files, scenarios, CSV emission and epsilon sweeps
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <tuple>
#include <iomanip>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <json.hpp>

#include "adsim/bounds.hpp"
#include "adsim/ctr.hpp"
#include "adsim/instance.hpp"
#include "adsim/offline.hpp"
#include "adsim/revenue.hpp"
#include "adsim/rng.hpp"

namespace adsim {

// ---------------------------------------------------------------------------
// Instance file I/O (JSON).
// Keys: keywords, clients, slots, ctr, bid, budget, requirement, arrival_prob,
// keyword_prob, cycle_slots, eligibility (optional; defaults to ctr > 0).
// ---------------------------------------------------------------------------

inline ProblemInstance instance_from_json(const nlohmann::json& j) {
    ProblemInstance inst;
    inst.num_keywords = j.at("keywords").get<int>();
    inst.num_clients = j.at("clients").get<int>();
    inst.num_slots = j.at("slots").get<int>();
    inst.ctr = j.at("ctr").get<std::vector<std::vector<std::vector<double>>>>();
    if (j.contains("bid")) inst.bid = j.at("bid").get<std::vector<std::vector<double>>>();
    if (j.contains("budget")) inst.budget = j.at("budget").get<std::vector<double>>();
    if (j.contains("requirement"))
        inst.requirement = j.at("requirement").get<std::vector<double>>();
    inst.arrival_prob = j.at("arrival_prob").get<double>();
    inst.keyword_prob = j.at("keyword_prob").get<std::vector<double>>();
    inst.cycle_slots = j.at("cycle_slots").get<int>();
    if (j.contains("eligibility"))
        inst.eligibility = j.at("eligibility").get<std::vector<std::vector<std::vector<char>>>>();
    else
        inst.default_eligibility();
    return inst;
}

inline ProblemInstance load_instance(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open instance file: " + path);
    nlohmann::json j;
    in >> j;
    return instance_from_json(j);
}

inline nlohmann::json instance_to_json(const ProblemInstance& inst) {
    nlohmann::json j;
    j["keywords"] = inst.num_keywords;
    j["clients"] = inst.num_clients;
    j["slots"] = inst.num_slots;
    j["ctr"] = inst.ctr;
    if (!inst.bid.empty()) j["bid"] = inst.bid;
    if (!inst.budget.empty()) j["budget"] = inst.budget;
    if (!inst.requirement.empty()) j["requirement"] = inst.requirement;
    j["arrival_prob"] = inst.arrival_prob;
    j["keyword_prob"] = inst.keyword_prob;
    j["cycle_slots"] = inst.cycle_slots;
    j["eligibility"] = inst.eligibility;
    return j;
}

// ---------------------------------------------------------------------------
// CSV emission with provenance headers.
// ---------------------------------------------------------------------------

class CsvWriter {
  public:
    explicit CsvWriter(const std::string& path) : out_(path), path_(path) {
        if (!out_) throw std::runtime_error("cannot open output file: " + path);
        out_ << std::setprecision(17);
    }

    void comment(const std::string& line) { out_ << "# " << line << "\n"; }
    void header(const std::vector<std::string>& cols) { row_strings(cols); }

    template <typename... Ts>
    void row(const Ts&... vals) {
        bool first = true;
        ((out_ << (first ? "" : ","), first = false, put(vals)), ...);
        out_ << "\n";
    }

    void row_strings(const std::vector<std::string>& cells) {
        for (size_t i = 0; i < cells.size(); ++i) out_ << (i ? "," : "") << cells[i];
        out_ << "\n";
    }

    const std::string& path() const { return path_; }

  private:
    template <typename T>
    void put(const T& v) { out_ << v; }

    std::ofstream out_;
    std::string path_;
};

#ifndef ADSIM_VERSION_STRING
#define ADSIM_VERSION_STRING "dev"
#endif

/// Standard provenance block: every CSV records what produced it.
inline void write_provenance(CsvWriter& csv, std::uint64_t seed, double epsilon,
                             const std::string& variant) {
    csv.comment("adsim " ADSIM_VERSION_STRING);
    csv.comment("seed=" + std::to_string(seed));
    std::ostringstream eps;
    eps << std::setprecision(17) << epsilon;
    csv.comment("epsilon=" + eps.str());
    csv.comment("variant=" + variant);
}

// ---------------------------------------------------------------------------
// Scenarios.
// ---------------------------------------------------------------------------

enum class ScenarioKind { revenue, ctr };

struct Scenario {
    ProblemInstance instance;
    ScenarioKind kind = ScenarioKind::revenue;
    double epsilon = 1e-2;
    RevenueVariant revenue_variant = RevenueVariant::standard;
    double delta = 0.0;           // estimated-ctr perturbation
    CtrPolicy policy = CtrPolicy::mwm;
    int fast_T = 1;
    int horizon = 100;            // cycles
    std::uint64_t seed = 1;
    int replicas = 1;
    // Optional explicit per-replica seeds; must be distinct. When empty,
    // replica r uses the shared seed with stream block r.
    std::vector<std::uint64_t> replica_seeds;
};

inline std::vector<std::string> validate_scenario(const Scenario& sc) {
    std::vector<std::string> errs;
    for (const auto& v : validate_instance(sc.instance))
        errs.push_back(v.field + ": " + v.message);
    if (sc.horizon < 1) errs.push_back("horizon must be >= 1");
    if (sc.epsilon <= 0.0) errs.push_back("epsilon must be positive");
    if (sc.replicas < 1) errs.push_back("replicas must be >= 1");
    if (!sc.replica_seeds.empty()) {
        if ((int)sc.replica_seeds.size() != sc.replicas)
            errs.push_back("replica_seeds must match the replica count");
        auto seeds = sc.replica_seeds;
        std::sort(seeds.begin(), seeds.end());
        if (std::adjacent_find(seeds.begin(), seeds.end()) != seeds.end())
            errs.push_back("replica seeds must be distinct");
    }
    return errs;
}

struct ReplicaMetrics {
    double objective = 0.0;     // avg revenue or clicks per slot
    double mean_total_Q = 0.0;
    double max_Q = 0.0;
    double mean_over_norm = 0.0;   // ctr runs only
    double mean_under_norm = 0.0;
};

namespace detail {

inline ReplicaMetrics run_replica(const Scenario& sc, int replica) {
    SimStreams streams = sc.replica_seeds.empty()
                             ? SimStreams(sc.seed, (std::uint64_t)replica)
                             : SimStreams(sc.replica_seeds[replica], 0);
    ReplicaMetrics m;
    if (sc.kind == ScenarioKind::revenue) {
        OverdraftState st;
        switch (sc.revenue_variant) {
            case RevenueVariant::standard:
                st = OverdraftState::make(sc.instance, sc.epsilon);
                break;
            case RevenueVariant::underdraft:
                st = make_underdraft_state(sc.instance, sc.epsilon);
                break;
            case RevenueVariant::estimated:
                st = make_estimated_state(sc.instance, sc.epsilon, sc.delta, streams.misc);
                break;
        }
        auto res = simulate_revenue(sc.instance, st, streams, sc.horizon, false);
        m.objective = res.average_revenue;
        for (double q : res.mean_Q) m.mean_total_Q += q;
        m.max_Q = res.max_Q;
    } else {
        CreditState st = CreditState::make(sc.instance, sc.epsilon,
                                           sc.policy == CtrPolicy::mwm_fast ? sc.fast_T : 1);
        RandomizedPolicy opt;
        const RandomizedPolicy* optp = nullptr;
        if (sc.policy == CtrPolicy::opt) {
            opt = solve_offline_ctr(sc.instance).p;
            optp = &opt;
        }
        auto res = simulate_ctr(sc.instance, st, streams, sc.horizon, sc.policy, optp,
                                nullptr, false);
        m.objective = res.average_clicks_per_slot;
        m.mean_total_Q = res.mean_total_Q;
        for (double q : st.Q) m.max_Q = std::max(m.max_Q, q);
        m.mean_over_norm = res.mean_over_norm;
        m.mean_under_norm = res.mean_under_norm;
    }
    return m;
}

inline std::pair<double, double> mean_sd(const std::vector<double>& xs) {
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= xs.size();
    double var = 0.0;
    for (double x : xs) var += (x - mean) * (x - mean);
    var /= xs.size();
    return {mean, std::sqrt(var)};
}

}  // namespace detail

struct ScenarioResult {
    std::vector<ReplicaMetrics> replicas;
    double objective_mean = 0.0, objective_sd = 0.0;
    double queue_mean = 0.0, queue_sd = 0.0;
};

/// Runs all replicas (in parallel) and aggregates.
inline ScenarioResult run_scenario(const Scenario& sc) {
    auto errs = validate_scenario(sc);
    if (!errs.empty()) throw std::invalid_argument("invalid scenario: " + errs.front());
    ScenarioResult res;
    res.replicas.resize(sc.replicas);
    std::vector<std::thread> pool;
    for (int r = 0; r < sc.replicas; ++r)
        pool.emplace_back([&, r] { res.replicas[r] = detail::run_replica(sc, r); });
    for (auto& t : pool) t.join();
    std::vector<double> obj, qs;
    for (const auto& m : res.replicas) {
        obj.push_back(m.objective);
        qs.push_back(m.mean_total_Q);
    }
    std::tie(res.objective_mean, res.objective_sd) = detail::mean_sd(obj);
    std::tie(res.queue_mean, res.queue_sd) = detail::mean_sd(qs);
    return res;
}

struct SweepRow {
    double epsilon = 0.0;
    double objective = 0.0;   // achieved average revenue (or clicks) per slot
    double gap = 0.0;         // offline optimum minus achieved
    double mean_total_Q = 0.0;
    double max_Q = 0.0;
};

/// Runs the scenario at each epsilon with identical streams (the fixed
/// one-draw-per-slot arrival discipline keeps sample paths paired) and reports
/// the gap to `offline_objective`.
inline std::vector<SweepRow> sweep_epsilon(Scenario sc, const std::vector<double>& eps_list,
                                           double offline_objective) {
    if (eps_list.empty()) throw std::invalid_argument("sweep: empty epsilon list");
    std::vector<SweepRow> rows;
    for (double eps : eps_list) {
        if (eps <= 0.0) throw std::invalid_argument("sweep: epsilon must be positive");
        sc.epsilon = eps;
        auto res = run_scenario(sc);
        SweepRow row;
        row.epsilon = eps;
        row.objective = res.objective_mean;
        row.gap = offline_objective - res.objective_mean;
        row.mean_total_Q = res.queue_mean;
        for (const auto& m : res.replicas) row.max_Q = std::max(row.max_Q, m.max_Q);
        rows.push_back(row);
    }
    return rows;
}

inline std::string fixture_path(const std::string& name) {
#ifdef ADSIM_FIXTURE_DIR
    return std::string(ADSIM_FIXTURE_DIR) + "/" + name;
#else
    return "fixtures/" + name;
#endif
}

}  // namespace adsim
