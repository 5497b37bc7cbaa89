// adsim - command-line front end for the ad allocation simulators.
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "adsim/bounds.hpp"
#include "adsim/ctr.hpp"
#include "adsim/harness.hpp"
#include "adsim/offline.hpp"
#include "adsim/revenue.hpp"

namespace {

using namespace adsim;

// Input problems exit with code 2; runtime failures with 1.
struct ValidationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

ProblemInstance load_checked(const std::string& path, bool requirement_pending = false) {
    auto inst = load_instance(path);
    auto errs = validate_instance(inst);
    if (requirement_pending)  // requirements are about to be derived from a queue cap
        std::erase_if(errs, [](const Violation& v) { return v.field == "budget"; });
    if (!errs.empty()) {
        std::string msg = "invalid instance " + path + ":";
        for (const auto& v : errs) msg += "\n  " + v.field + ": " + v.message;
        throw ValidationError(msg);
    }
    return inst;
}

std::string resolve_out(const std::string& out_dir, const std::string& name) {
    std::filesystem::path p(name);
    if (p.is_absolute()) return name;
    std::filesystem::create_directories(out_dir);
    return (std::filesystem::path(out_dir) / p).string();
}

// foo.csv -> foo.r3.csv / foo.aggregate.csv
std::string tagged_path(const std::string& path, const std::string& tag) {
    std::filesystem::path p(path);
    auto ext = p.extension().string();
    auto stem = p.parent_path() / p.stem();
    return stem.string() + "." + tag + (ext.empty() ? ".csv" : ext);
}

void write_aggregate(const std::string& path, std::uint64_t seed, double epsilon,
                     const std::string& variant, const std::vector<std::string>& cols,
                     const std::vector<std::vector<double>>& per_replica) {
    CsvWriter csv(path);
    write_provenance(csv, seed, epsilon, variant);
    std::vector<std::string> header = {"replica"};
    header.insert(header.end(), cols.begin(), cols.end());
    csv.header(header);
    size_t n = per_replica.size(), m = cols.size();
    std::vector<double> mean(m, 0.0), sd(m, 0.0);
    for (size_t r = 0; r < n; ++r) {
        std::vector<std::string> cells = {std::to_string(r)};
        for (size_t j = 0; j < m; ++j) {
            std::ostringstream os;
            os << std::setprecision(17) << per_replica[r][j];
            cells.push_back(os.str());
            mean[j] += per_replica[r][j];
        }
        csv.row_strings(cells);
    }
    for (auto& v : mean) v /= (double)n;
    for (size_t r = 0; r < n; ++r)
        for (size_t j = 0; j < m; ++j)
            sd[j] += (per_replica[r][j] - mean[j]) * (per_replica[r][j] - mean[j]);
    for (size_t j = 0; j < m; ++j) sd[j] = std::sqrt(sd[j] / (double)n);
    auto stat_row = [&](const char* name, const std::vector<double>& v) {
        std::vector<std::string> cells = {name};
        for (size_t j = 0; j < m; ++j) {
            std::ostringstream os;
            os << std::setprecision(17) << v[j];
            cells.push_back(os.str());
        }
        csv.row_strings(cells);
    };
    stat_row("mean", mean);
    stat_row("sd", sd);
}

int run_simulate_revenue(const std::string& instance_path, double epsilon, int cycles,
                         std::uint64_t seed, int replicas, const std::string& variant,
                         double delta, const std::string& out) {
    auto inst = load_checked(instance_path);
    if (inst.budget.empty())
        throw ValidationError("simulate-revenue needs an instance with budgets");
    if (cycles < 1) throw ValidationError("cycles must be >= 1");
    if (epsilon <= 0.0) throw ValidationError("epsilon must be positive");

    std::vector<std::vector<double>> agg;
    for (int r = 0; r < replicas; ++r) {
        SimStreams streams(seed, (std::uint64_t)r);
        OverdraftState st;
        if (variant == "standard")
            st = OverdraftState::make(inst, epsilon);
        else if (variant == "underdraft")
            st = make_underdraft_state(inst, epsilon);
        else if (variant == "estimated")
            st = make_estimated_state(inst, epsilon, delta, streams.misc);
        else
            throw ValidationError("unknown variant: " + variant);

        auto res = simulate_revenue(inst, st, streams, cycles);
        std::string path = replicas > 1 ? tagged_path(out, "r" + std::to_string(r)) : out;
        CsvWriter csv(path);
        write_provenance(csv, seed, epsilon, variant);
        std::vector<std::string> cols = {"cycle"};
        for (int i = 0; i < inst.num_clients; ++i) cols.push_back("A_" + std::to_string(i));
        for (int i = 0; i < inst.num_clients; ++i) cols.push_back("Q_" + std::to_string(i));
        cols.push_back("revenue");
        cols.push_back("cum_avg_revenue");
        csv.header(cols);
        double cum = 0.0;
        for (int k = 0; k < cycles; ++k) {
            const auto& row = res.cycles[k];
            double rev = 0.0;
            for (double a : row.A) rev += a;
            cum += rev;
            std::vector<std::string> cells = {std::to_string(k)};
            auto put = [&](double v) {
                std::ostringstream os;
                os << std::setprecision(17) << v;
                cells.push_back(os.str());
            };
            for (double a : row.A) put(a);
            for (double q : row.Q_after) put(q);
            put(rev);
            put(cum / (k + 1));
            csv.row_strings(cells);
        }
        double qsum = 0.0;
        for (double q : res.mean_Q) qsum += q;
        agg.push_back({res.average_revenue, qsum, res.max_Q,
                       (double)res.hard_bound_violations});
    }
    write_aggregate(tagged_path(out, "aggregate"), seed, epsilon, variant,
                    {"avg_revenue_per_slot", "mean_total_Q", "max_Q", "hard_bound_violations"},
                    agg);
    return 0;
}

int run_simulate_ctr(const std::string& instance_path, double epsilon, int cycles,
                     std::uint64_t seed, int replicas, const std::string& policy_name,
                     int fast_T, double qmax, int hours, const std::string& out) {
    auto inst = load_checked(instance_path, qmax > 0.0);
    if (cycles < 1) throw ValidationError("cycles must be >= 1");
    if (epsilon <= 0.0) throw ValidationError("epsilon must be positive");

    CtrPolicy policy;
    if (policy_name == "mwm")
        policy = CtrPolicy::mwm;
    else if (policy_name == "mwm-fast")
        policy = CtrPolicy::mwm_fast;
    else if (policy_name == "opt")
        policy = CtrPolicy::opt;
    else
        throw ValidationError("unknown policy: " + policy_name);

    if (qmax > 0.0) {
        auto cust = customize_requirements(inst, qmax, epsilon);
        if (!cust.feasible)
            throw ValidationError("requirement customization failed: " + cust.diagnostic);
        inst.requirement = cust.m;
        std::cout << "customized requirements (xi=" << cust.xi << "):";
        for (double m : inst.requirement) std::cout << " " << m;
        std::cout << "\n";
    }
    if (inst.requirement.empty())
        throw ValidationError("instance has no requirement; pass --customize-qmax");

    // Non-stationary mode: hourly joint keyword rates come with the instance.
    std::vector<std::vector<double>> hourly;
    if (hours > 0) {
        std::ifstream in(instance_path);
        nlohmann::json j;
        in >> j;
        if (!j.contains("hourly_rates"))
            throw ValidationError("--hours given but instance has no hourly_rates");
        hourly = j.at("hourly_rates").get<std::vector<std::vector<double>>>();
        if ((int)hourly.size() != hours)
            throw ValidationError("hourly_rates must have one row per hour");
        for (const auto& row : hourly)
            if ((int)row.size() != inst.num_keywords)
                throw ValidationError("hourly_rates rows must cover every keyword");
        if (inst.cycle_slots % hours != 0)
            throw ValidationError("hours must divide cycle_slots");
    }

    RandomizedPolicy opt_policy;
    if (policy == CtrPolicy::opt) {
        auto lp = solve_offline_ctr(inst);
        if (!lp.converged)
            std::cerr << "warning: offline ctr LP residual " << lp.residual << "\n";
        opt_policy = lp.p;
    }

    double total_m = 0.0;
    for (double m : inst.requirement) total_m += m;

    std::vector<std::vector<double>> agg;
    for (int r = 0; r < replicas; ++r) {
        SimStreams streams(seed, (std::uint64_t)r);
        auto st = CreditState::make(inst, epsilon, policy == CtrPolicy::mwm_fast ? fast_T : 1);
        auto res = simulate_ctr(inst, st, streams, cycles, policy,
                                policy == CtrPolicy::opt ? &opt_policy : nullptr,
                                hourly.empty() ? nullptr : &hourly);
        std::string path = replicas > 1 ? tagged_path(out, "r" + std::to_string(r)) : out;
        CsvWriter csv(path);
        write_provenance(csv, seed, epsilon, policy_name);
        std::vector<std::string> cols = {"cycle"};
        for (int i = 0; i < inst.num_clients; ++i) cols.push_back("S_" + std::to_string(i));
        for (int i = 0; i < inst.num_clients; ++i) cols.push_back("over_" + std::to_string(i));
        for (int i = 0; i < inst.num_clients; ++i) cols.push_back("under_" + std::to_string(i));
        for (int i = 0; i < inst.num_clients; ++i) cols.push_back("Q_" + std::to_string(i));
        cols.push_back("J");
        cols.push_back("norm_over");
        cols.push_back("norm_under");
        csv.header(cols);
        for (int k = 0; k < cycles; ++k) {
            const auto& row = res.cycles[k];
            std::vector<std::string> cells = {std::to_string(k)};
            auto put = [&](double v) {
                std::ostringstream os;
                os << std::setprecision(17) << v;
                cells.push_back(os.str());
            };
            double over = 0.0, under = 0.0;
            for (int i = 0; i < inst.num_clients; ++i) put((double)row.S[i]);
            for (int i = 0; i < inst.num_clients; ++i) { put(row.over[i]); over += row.over[i]; }
            for (int i = 0; i < inst.num_clients; ++i) { put(row.under[i]); under += row.under[i]; }
            for (int i = 0; i < inst.num_clients; ++i) put(row.Q_after[i]);
            put((double)row.J);
            put(over / total_m);
            put(under / total_m);
            csv.row_strings(cells);
        }
        agg.push_back({res.average_clicks_per_slot, res.mean_total_Q, res.mean_over_norm,
                       res.mean_under_norm});
    }
    write_aggregate(tagged_path(out, "aggregate"), seed, epsilon, policy_name,
                    {"avg_clicks_per_slot", "mean_total_Q", "mean_over_norm",
                     "mean_under_norm"},
                    agg);
    return 0;
}

int run_offline_baseline(const std::string& instance_path, double step, int iters,
                         const std::string& out) {
    auto inst = load_checked(instance_path);
    if (inst.budget.empty())
        throw ValidationError("offline-baseline needs an instance with budgets");
    if (step <= 0.0 || iters < 1) throw ValidationError("step and iters must be positive");
    auto sol = solve_offline(inst, step, iters);
    nlohmann::json j;
    j["R_star"] = sol.R_star;
    j["lambda"] = sol.lambda;
    j["delta"] = sol.delta;
    j["residual"] = sol.residual;
    j["converged"] = sol.converged;
    nlohmann::json support = nlohmann::json::array();
    for (int q = 0; q < inst.num_keywords; ++q) {
        nlohmann::json kq = nlohmann::json::array();
        for (const auto& [a, prob] : sol.p[q])
            kq.push_back({{"slot_of_client", a.slot_of_client}, {"probability", prob}});
        support.push_back(kq);
    }
    j["p"] = support;
    std::ofstream f(out);
    if (!f) throw std::runtime_error("cannot open output file: " + out);
    f << j.dump(2) << "\n";
    return 0;
}

int run_threshold_policy(double nu, double p1, double p2,
                         const std::vector<double>& eps_list, const std::string& out) {
    if (eps_list.empty()) throw ValidationError("--epsilon-sweep must be nonempty");
    CsvWriter csv(out);
    csv.comment("adsim " ADSIM_VERSION_STRING);
    csv.comment("nu=" + std::to_string(nu) + " p1=" + std::to_string(p1) +
                " p2=" + std::to_string(p2));
    csv.header({"epsilon", "t_real", "t_int", "throughput", "mean_queue"});
    for (double eps : eps_list) {
        if (eps <= 0.0 || eps >= 1.0) throw ValidationError("epsilon must be in (0,1)");
        auto r = threshold_for_epsilon(nu, p1, p2, eps);
        csv.row(eps, r.t_real, r.t_int, r.throughput, r.mean_queue);
    }
    return 0;
}

int run_lower_bound(const std::string& params_path, const std::string& out) {
    std::ifstream in(params_path);
    if (!in) throw ValidationError("cannot open params file: " + params_path);
    nlohmann::json j;
    in >> j;
    LowerBoundParams p{j.at("epsilon").get<double>(), j.at("phi").get<double>(),
                       j.at("p_plus").get<double>()};
    if (p.epsilon <= 0.0 || p.phi <= 0.0 || p.phi >= 1.0 || p.p_plus <= 0.0 ||
        p.p_plus > 1.0)
        throw ValidationError("lower-bound params out of range");
    nlohmann::json result;
    result["single_queue_lower_bound"] = single_queue_lower_bound(p);
    if (j.contains("h")) {
        HalfspaceRegion reg{j.at("h").get<std::vector<std::vector<double>>>(),
                            j.at("d").get<std::vector<double>>()};
        result["multi_queue_lower_bound"] = multi_queue_lower_bound(p, reg);
    }
    std::cout << result.dump(2) << "\n";
    if (!out.empty()) {
        std::ofstream f(out);
        if (!f) throw std::runtime_error("cannot open output file: " + out);
        f << result.dump(2) << "\n";
    }
    return 0;
}

int run_sweep(const std::string& instance_path, const std::vector<double>& eps_list,
              int cycles, std::uint64_t seed, int replicas, const std::string& out) {
    auto inst = load_checked(instance_path);
    if (inst.budget.empty()) throw ValidationError("sweep needs an instance with budgets");
    Scenario sc;
    sc.instance = inst;
    sc.kind = ScenarioKind::revenue;
    sc.horizon = cycles;
    sc.seed = seed;
    sc.replicas = replicas;
    double r_star = solve_offline(inst).R_star;
    std::vector<SweepRow> rows;
    try {
        rows = sweep_epsilon(sc, eps_list, r_star);
    } catch (const std::invalid_argument& e) {
        throw ValidationError(e.what());
    }
    CsvWriter csv(out);
    write_provenance(csv, seed, eps_list.front(), "sweep");
    csv.comment("offline_R_star=" + std::to_string(r_star));
    csv.header({"epsilon", "objective", "gap", "mean_total_Q", "max_Q"});
    for (const auto& r : rows)
        csv.row(r.epsilon, r.objective, r.gap, r.mean_total_Q, r.max_Q);
    return 0;
}

int run_demo_unfairness(double epsilon, int horizon, std::uint64_t seed,
                        const std::string& out) {
    if (epsilon <= 0.0) throw ValidationError("epsilon must be positive");
    if (horizon < 1) throw ValidationError("horizon must be >= 1");
    auto d = unfairness_demo(epsilon, horizon, seed);
    CsvWriter csv(out);
    write_provenance(csv, seed, epsilon, "unfairness-demo");
    csv.header({"cycle", "weight1", "weight2", "Q1", "Q2"});
    for (size_t k = 0; k < d.weight1.size(); ++k)
        csv.row(k, d.weight1[k], d.weight2[k], d.Q1[k], d.Q2[k]);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"ad allocation simulators: online budgeted revenue and ctr maximization"};
    app.require_subcommand(1);

    std::uint64_t seed = 1;
    int replicas = 1;
    std::string out_dir = ".";
    app.add_option("--seed", seed, "base RNG seed");
    app.add_option("--replicas", replicas, "independent replicas per run")
        ->check(CLI::PositiveNumber);
    app.add_option("--out-dir", out_dir, "directory for output files");

    std::string instance_path, out, variant = "standard", policy = "mwm", params_path;
    double epsilon = 1e-2, delta = 0.5, step = 1e-2, qmax = 0.0;
    double nu = 0.7, p1 = 0.5, p2 = 0.25;
    int cycles = 1000, iters = 100000, fast_T = 1, hours = 0, horizon = 2000;
    std::vector<double> eps_list;

    auto* sr = app.add_subcommand("simulate-revenue", "run the budgeted revenue simulator");
    sr->add_option("--instance", instance_path)->required()->check(CLI::ExistingFile);
    sr->add_option("--epsilon", epsilon);
    sr->add_option("--cycles", cycles);
    sr->add_option("--variant", variant)
        ->check(CLI::IsMember({"standard", "underdraft", "estimated"}));
    sr->add_option("--delta", delta, "ctr perturbation half-width (estimated variant)");
    sr->add_option("--out", out)->required();

    auto* sct = app.add_subcommand("simulate-ctr", "run the impression/ctr simulator");
    sct->add_option("--instance", instance_path)->required()->check(CLI::ExistingFile);
    sct->add_option("--epsilon", epsilon);
    sct->add_option("--cycles", cycles);
    sct->add_option("--policy", policy)->check(CLI::IsMember({"mwm", "mwm-fast", "opt"}));
    sct->add_option("--fast-T", fast_T, "queueing cycles per requirement cycle");
    sct->add_option("--customize-qmax", qmax,
                    "derive impression requirements targeting this queue bound");
    sct->add_option("--hours", hours, "hours per cycle (hourly_rates in the instance)");
    sct->add_option("--out", out)->required();

    auto* ob = app.add_subcommand("offline-baseline", "solve the offline revenue LP");
    ob->add_option("--instance", instance_path)->required()->check(CLI::ExistingFile);
    ob->add_option("--step", step);
    ob->add_option("--iters", iters);
    ob->add_option("--out", out)->required();

    auto* tp = app.add_subcommand("threshold-policy", "exact threshold-chain sweep");
    tp->add_option("--nu", nu)->required();
    tp->add_option("--p1", p1)->required();
    tp->add_option("--p2", p2)->required();
    tp->add_option("--epsilon-sweep", eps_list)->required();
    tp->add_option("--out", out)->required();

    auto* lb = app.add_subcommand("lower-bound", "evaluate queue lower bounds");
    lb->add_option("--params", params_path)->required()->check(CLI::ExistingFile);
    lb->add_option("--out", out);

    auto* sw = app.add_subcommand("sweep", "epsilon sweep of the revenue simulator");
    sw->add_option("--instance", instance_path)->required()->check(CLI::ExistingFile);
    sw->add_option("--epsilon-sweep", eps_list)->required();
    sw->add_option("--cycles", cycles);
    sw->add_option("--out", out)->required();

    auto* du = app.add_subcommand("demo-unfairness", "two-client credit takeover demo");
    du->add_option("--epsilon", epsilon);
    du->add_option("--horizon", horizon);
    du->add_option("--out", out)->required();

    // Let --seed/--replicas/--out-dir appear after the subcommand too.
    for (auto* sub : app.get_subcommands(nullptr)) sub->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*sr)
            return run_simulate_revenue(instance_path, epsilon, cycles, seed, replicas,
                                        variant, delta, resolve_out(out_dir, out));
        if (*sct)
            return run_simulate_ctr(instance_path, epsilon, cycles, seed, replicas, policy,
                                    fast_T, qmax, hours, resolve_out(out_dir, out));
        if (*ob)
            return run_offline_baseline(instance_path, step, iters, resolve_out(out_dir, out));
        if (*tp)
            return run_threshold_policy(nu, p1, p2, eps_list, resolve_out(out_dir, out));
        if (*lb)
            return run_lower_bound(params_path,
                                   out.empty() ? out : resolve_out(out_dir, out));
        if (*sw)
            return run_sweep(instance_path, eps_list, cycles, seed, replicas,
                             resolve_out(out_dir, out));
        if (*du)
            return run_demo_unfairness(epsilon, horizon, seed, resolve_out(out_dir, out));
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
