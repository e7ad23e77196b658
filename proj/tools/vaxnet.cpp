// vaxnet command-line tool.
//
// Exit codes: 0 success, 1 usage or input error, 2 infeasible model,
// 3 solver limit hit (partial output is still written).

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "vaxnet/vaxnet.hpp"

namespace {

using namespace vaxnet;

enum Exit { kOk = 0, kUsage = 1, kInfeasible = 2, kLimit = 3 };

struct Common {
    std::string instance;
    std::string out;
    std::uint64_t seed = 1;
    std::optional<double> radius_km;
    std::optional<double> epsilon;
    std::optional<double> gap;
    std::string model = "Q";
    bool verbose = false;
    long node_limit = 100000;
    std::optional<double> time_limit;
    int threads = 0;
};

class UsageError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

void add_common(CLI::App* app, Common& c, bool needs_instance = true) {
    auto* inst = app->add_option("--instance", c.instance, "instance JSON file");
    if (needs_instance) inst->required()->check(CLI::ExistingFile);
    app->add_option("--out", c.out, "output path");
    app->add_option("--seed", c.seed, "random seed");
    app->add_option("--radius-km", c.radius_km, "access radius in km (default: the instance's, normally 5)");
    app->add_option("--epsilon", c.epsilon, "objective weight on doses (default: the instance's, normally 0.001)");
    app->add_option("--gap", c.gap, "relative MIP gap");
    app->add_option("--model", c.model, "P or Q")->check(CLI::IsMember({"P", "Q"}));
    app->add_flag("--verbose", c.verbose, "log progress to stderr");
    app->add_option("--node-limit", c.node_limit, "branch-and-bound node limit")->check(CLI::PositiveNumber);
    app->add_option("--time-limit", c.time_limit, "time limit in seconds")->check(CLI::PositiveNumber);
    app->add_option("--threads", c.threads, "worker threads for experiments (default: VAXNET_THREADS)");
}

void check_common(const Common& c) {
    if (c.radius_km && !(*c.radius_km > 0.0)) throw UsageError("--radius-km must be positive");
    if (c.epsilon && !(*c.epsilon > 0.0 && *c.epsilon < 1.0)) throw UsageError("--epsilon must lie in (0,1)");
    if (c.gap && !(*c.gap >= 0.0)) throw UsageError("--gap must be non-negative");
    if (c.threads < 0) throw UsageError("--threads must be non-negative");
}

Instance load(const Common& c) {
    Instance inst = load_instance(c.instance);
    if (c.radius_km) inst.access_radius_km = *c.radius_km;
    if (c.epsilon) inst.epsilon = *c.epsilon;
    return inst;
}

ModelKind model_kind(const Common& c) { return c.model == "P" ? ModelKind::P : ModelKind::Q; }

milp::SolveOptions solve_options(const Common& c) {
    milp::SolveOptions o;
    if (c.gap) o.relative_gap = *c.gap;
    o.node_limit = c.node_limit;
    o.time_limit_s = c.time_limit;
    o.verbose = c.verbose;
    return o;
}

ExperimentOptions experiment_options(const Common& c) {
    ExperimentOptions o;
    o.solve = solve_options(c);
    o.pre.radius_km = c.radius_km;
    o.model = model_kind(c);
    o.threads = c.threads;
    return o;
}

void log(const Common& c, const std::string& msg) {
    if (c.verbose) std::cerr << "vaxnet: " << msg << '\n';
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw Error("cannot write " + path);
    os << text;
}

// Experiments report through CSV; cells stopped by a limit give exit 3.
int finish_report(const Common& c, const ExperimentReport& report, const std::vector<ScenarioResult>& cells) {
    if (!c.out.empty()) {
        export_results_csv(report, c.out);
        log(c, "wrote " + c.out);
    } else {
        write_results_csv(report, std::cout);
    }
    int code = kOk;
    for (const auto& r : cells) {
        std::fprintf(stderr, "%-40s %-11s sr=%.4f drones=%ld hubs=%zu\n", r.scenario.key.c_str(),
                     std::string(to_string(r.status)).c_str(), r.sr_community, r.drones, r.hubs.size());
        if (r.status == SolveStatus::Feasible || r.status == SolveStatus::NoSolution) code = kLimit;
    }
    return code;
}

std::size_t count_kind(const Instance& inst, NodeKind k) {
    std::size_t n = 0;
    for (const Node& node : inst.nodes) n += node.kind == k;
    return n;
}

// ---------------------------------------------------------------------------

int cmd_validate(const Common& c) {
    const Instance inst = load(c);
    double demand = 0.0;
    for (double v : total_demand_by_slot(inst)) demand += v;
    std::printf("instance     %s\n", inst.name.c_str());
    std::printf("nodes        %zu (central %zu, regional %zu, district %zu, clinic %zu, community %zu)\n",
                inst.nodes.size(), count_kind(inst, NodeKind::CentralStore), count_kind(inst, NodeKind::RegionalCenter),
                count_kind(inst, NodeKind::DistrictStore), count_kind(inst, NodeKind::Clinic),
                count_kind(inst, NodeKind::Community));
    std::printf("arcs         %zu\n", inst.arcs.size());
    std::printf("vaccines     %zu\n", inst.vaccine_count());
    std::printf("horizon      %d\n", inst.horizon);
    std::printf("demand       %.3f doses\n", demand);
    std::printf("valid        yes\n");
    return kOk;
}

int cmd_preprocess(const Common& c, const std::string& cover) {
    const Instance inst = load(c);
    PreprocessOptions po;
    po.radius_km = c.radius_km;
    po.method = cover == "greedy" ? CoverMethod::Greedy : CoverMethod::Exact;
    const auto pre = preprocess(inst, po);
    if (pre.selection.warning) std::cerr << "vaxnet: " << *pre.selection.warning << '\n';
    const Instance& net = model_kind(c) == ModelKind::P ? pre.community_network : pre.reduced;
    std::printf("candidates   %zu\n", pre.indicator.candidates.size());
    std::printf("hosts        %zu (%s)\n", pre.selection.hosts.size(), pre.selection.exact ? "exact" : "greedy");
    std::printf("network      %zu nodes, %zu arcs (model %s)\n", net.nodes.size(), net.arcs.size(), c.model.c_str());
    if (!c.out.empty()) write_instance(net, c.out);
    return kOk;
}

struct SolveFlags {
    std::optional<double> budget;
    std::optional<std::string> drone;
    bool require_hub = false;
};

Instance apply_solve_flags(Instance inst, const SolveFlags& f) {
    if (f.budget) inst.budget = *f.budget;
    if (f.drone) {
        inst.drone = drone_preset(*f.drone);
        rebuild_drone_arcs(inst);
    }
    return inst;
}

ModelBuild build(const Instance& net, const Common& c, const SolveFlags& f) {
    FormulationOptions fo;
    fo.require_hub = f.require_hub;
    return model_kind(c) == ModelKind::P ? build_model_P(net, fo) : build_model_Q(net, fo);
}

Instance prepared_network(const Common& c, const SolveFlags& f) {
    const Instance inst = apply_solve_flags(load(c), f);
    PreprocessOptions po;
    po.radius_km = c.radius_km;
    auto pre = preprocess(inst, po);
    if (pre.selection.warning) std::cerr << "vaxnet: " << *pre.selection.warning << '\n';
    return model_kind(c) == ModelKind::P ? std::move(pre.community_network) : std::move(pre.reduced);
}

int cmd_solve(const Common& c, const SolveFlags& f) {
    const Instance net = prepared_network(c, f);
    const ModelBuild mb = build(net, c, f);
    for (const auto& w : mb.warnings) std::cerr << "vaxnet: " << w << '\n';
    log(c, "model " + c.model + ": " + std::to_string(mb.problem.variables.size()) + " columns, " +
               std::to_string(mb.problem.rows.size()) + " rows");
    milp::SolveResult raw;
    const Solution s = solve_model(net, mb, solve_options(c), &raw);

    nlohmann::json j = solution_to_json(net, s);
    j["model"] = c.model;
    j["instance"] = net.name;
    j["bb_nodes"] = raw.nodes;
    j["limit_reached"] = raw.limit_reached;
    if (mb.infeasible) j["message"] = *mb.infeasible;
    if (s.has_value()) {
        const auto region = compute_supply_ratio(s, net, SrLevel::Region);
        const auto fic = compute_fic(s, net);
        j["supply_ratio"] = region.total.sr;
        j["fic"] = fic.proportion;
        const auto audit = audit_solution(net, s);
        log(c, "audit max residual " + std::to_string(audit.max_residual));
        std::printf("status       %s\n", std::string(to_string(s.status)).c_str());
        std::printf("objective    %.6f\n", s.objective);
        std::printf("bound        %.6f\n", s.bound);
        std::printf("supply ratio %.6f\n", region.total.sr);
        std::printf("fic          %.6f\n", fic.proportion);
        std::printf("drones       %ld\n", s.drones);
        std::printf("hubs         %zu\n", j["hubs"].size());
        std::printf("nodes        %ld\n", raw.nodes);
    } else {
        std::printf("status       %s\n", std::string(to_string(s.status)).c_str());
    }
    if (!c.out.empty()) write_text(c.out, j.dump(1) + "\n");

    if (s.status == SolveStatus::Infeasible) {
        std::cerr << "vaxnet: model is infeasible" << (mb.infeasible ? ": " + *mb.infeasible : std::string()) << '\n';
        return kInfeasible;
    }
    if (raw.limit_reached || s.status != SolveStatus::Optimal) {
        std::cerr << "vaxnet: solver stopped at a limit\n";
        return kLimit;
    }
    return kOk;
}

int cmd_export_lp(const Common& c, const SolveFlags& f) {
    if (c.out.empty()) throw UsageError("export-lp needs --out");
    const Instance net = prepared_network(c, f);
    const ModelBuild mb = build(net, c, f);
    if (mb.infeasible) {
        std::cerr << "vaxnet: " << *mb.infeasible << '\n';
        return kInfeasible;
    }
    milp::write_lp_file(mb.problem, c.out);
    std::printf("wrote %s (%zu columns, %zu rows)\n", c.out.c_str(), mb.problem.variables.size(), mb.problem.rows.size());
    return kOk;
}

int cmd_baseline(const Common& c, const std::string& access) {
    const Instance inst = load(c);
    const auto opt = experiment_options(c);
    std::vector<ScenarioResult> cells;
    if (access != "limited") cells.push_back(run_baseline(inst, AccessMode::Full, opt).result);
    if (access != "full") cells.push_back(run_baseline(inst, AccessMode::Limited, opt).result);
    return finish_report(c, report_of("baseline", cells, opt.include_runtime), cells);
}

int cmd_sweep(const Common& c, const std::vector<double>& tc, const std::vector<double>& sc, bool bottleneck) {
    const Instance inst = load(c);
    const auto r = run_capacity_sweep(inst, tc, sc, bottleneck, experiment_options(c));
    for (const auto& b : r.bottlenecks) log(c, "bottleneck clinic " + b);
    return finish_report(c, r.report, r.cells);
}

int cmd_grid(const Common& c, const std::vector<double>& budgets, const std::vector<std::string>& presets) {
    const Instance inst = load(c);
    const auto r = run_budget_range_grid(inst, budgets, presets, experiment_options(c));
    return finish_report(c, r.report, r.cells);
}

int cmd_doe(const Common& c) {
    const Instance inst = load(c);
    const auto r = run_fractional_factorial(inst, default_doe_factors(), experiment_options(c));
    for (std::size_t f = 0; f < r.factors.size(); ++f)
        std::fprintf(stderr, "effect %-8s %+.6f\n", r.factors[f].name.c_str(), r.effects[f]);
    return finish_report(c, r.report, r.runs);
}

int cmd_expand(const Common& c, const std::vector<double>& schedule, const std::vector<std::string>& presets) {
    const Instance inst = load(c);
    const auto r = run_sequential_expansion(inst, schedule, presets, experiment_options(c));
    std::vector<ScenarioResult> cells;
    for (const auto& st : r.stages) {
        std::fprintf(stderr, "stage %-10s budget %.0f gap %.6f%%\n", st.preset.c_str(), st.budget, st.gap_pct);
        cells.push_back(st.optimal);
        cells.push_back(st.sequential);
    }
    return finish_report(c, r.report, cells);
}

struct GenerateFlags {
    std::optional<std::string> region;
    std::optional<double> area, population, budget;
    std::optional<int> communities, clinics, horizon, regional, districts;
    std::optional<std::size_t> vaccines;
    std::optional<double> clinic_fraction;
    std::optional<std::string> drone;
    std::optional<std::string> name;
};

int cmd_generate(const Common& c, const GenerateFlags& g) {
    if (c.out.empty()) throw UsageError("generate needs --out");
    GeneratorConfig cfg = g.region ? region_config(*g.region, c.seed) : GeneratorConfig{};
    cfg.seed = c.seed;
    if (g.name) cfg.name = *g.name;
    if (g.area) cfg.region_area_km2 = *g.area;
    if (g.population) cfg.population = *g.population;
    if (g.budget) cfg.budget = *g.budget;
    if (g.communities) cfg.n_communities = *g.communities;
    if (g.clinics) cfg.n_clinics = *g.clinics;
    if (g.clinic_fraction) cfg.clinic_fraction_of_communities = *g.clinic_fraction;
    if (g.horizon) cfg.horizon = *g.horizon;
    if (g.regional) cfg.n_regional_centers = *g.regional;
    if (g.districts) cfg.n_districts = *g.districts;
    if (g.vaccines) cfg.vaccine_count = *g.vaccines;
    if (g.drone) cfg.drone_preset = *g.drone;
    Instance inst = generate_synthetic(cfg);
    if (c.radius_km) inst.access_radius_km = *c.radius_km;
    if (c.epsilon) inst.epsilon = *c.epsilon;
    write_instance(inst, c.out);
    std::printf("wrote %s (%zu nodes, %zu arcs)\n", c.out.c_str(), inst.nodes.size(), inst.arcs.size());
    return kOk;
}

std::vector<double> parse_budget_list(const std::vector<double>& v, const char* flag) {
    for (double b : v)
        if (!(b >= 0.0)) throw UsageError(std::string(flag) + " values must be non-negative");
    return v;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"vaxnet: vaccine cold-chain network design with drones"};
    app.require_subcommand(1, 1);
    Common c;
    SolveFlags sf;
    GenerateFlags gf;
    std::string cover = "exact", access = "both";
    std::vector<double> tc{1.0, 1.5, 2.0}, sc{1.0, 1.5, 2.0};
    bool bottleneck = false;
    std::vector<double> budgets{0.0, 2e6, 3e6, 4e6, 5e6};
    std::vector<double> schedule{1e6, 2e6, 3e6};
    std::vector<std::string> presets{"battery-30", "battery-50", "battery-75", "fuel-900"};

    auto* validate = app.add_subcommand("validate", "check an instance file");
    add_common(validate, c);

    auto* pre = app.add_subcommand("preprocess", "select outreach hosts and write the reduced network");
    add_common(pre, c);
    pre->add_option("--cover", cover, "exact or greedy")->check(CLI::IsMember({"exact", "greedy"}));

    auto* solve = app.add_subcommand("solve", "solve model P or Q and write the solution JSON");
    auto* export_lp = app.add_subcommand("export-lp", "write the model in LP format");
    for (auto* sub : {solve, export_lp}) {
        add_common(sub, c);
        sub->add_option("--budget", sf.budget, "budget override")->check(CLI::NonNegativeNumber);
        sub->add_option("--drone", sf.drone, "drone preset (battery-30, battery-50, battery-75, fuel-900)");
        sub->add_flag("--require-hub", sf.require_hub, "at least one hub must open");
    }

    auto* baseline = app.add_subcommand("baseline", "clinics-only network without drones");
    add_common(baseline, c);
    baseline->add_option("--access", access, "full, limited or both")->check(CLI::IsMember({"full", "limited", "both"}));

    auto* sweep = app.add_subcommand("sweep", "transport and storage capacity sweep on the baseline");
    add_common(sweep, c);
    sweep->add_option("--tc", tc, "transport capacity multipliers")->delimiter(',');
    sweep->add_option("--sc", sc, "storage capacity multipliers")->delimiter(',');
    sweep->add_flag("--bottleneck", bottleneck, "give bottleneck clinics unlimited storage");

    auto* grid = app.add_subcommand("grid", "budget by drone range grid");
    add_common(grid, c);
    grid->add_option("--budgets", budgets, "budgets")->delimiter(',');
    grid->add_option("--presets", presets, "drone presets")->delimiter(',');

    auto* doe = app.add_subcommand("doe", "two-level fractional factorial screening");
    add_common(doe, c);

    auto* expand = app.add_subcommand("expand", "sequential hub expansion against the one-shot optimum");
    add_common(expand, c);
    expand->add_option("--schedule", schedule, "strictly increasing budgets")->delimiter(',');
    expand->add_option("--presets", presets, "drone presets")->delimiter(',');

    auto* generate = app.add_subcommand("generate", "write a synthetic instance");
    add_common(generate, c, false);
    generate->add_option("--region", gf.region, "Agadez, Diffa, Maradi or Zinder");
    generate->add_option("--name", gf.name, "instance name");
    generate->add_option("--area", gf.area, "region area in km2")->check(CLI::PositiveNumber);
    generate->add_option("--population", gf.population, "population")->check(CLI::PositiveNumber);
    generate->add_option("--communities", gf.communities, "number of communities")->check(CLI::NonNegativeNumber);
    generate->add_option("--clinics", gf.clinics, "cap on the number of clinics")->check(CLI::NonNegativeNumber);
    generate->add_option("--clinic-fraction", gf.clinic_fraction, "share of communities with a clinic")
        ->check(CLI::Range(0.0, 1.0));
    generate->add_option("--regional", gf.regional, "regional centres")->check(CLI::PositiveNumber);
    generate->add_option("--districts", gf.districts, "district centres")->check(CLI::NonNegativeNumber);
    generate->add_option("--horizon", gf.horizon, "periods")->check(CLI::PositiveNumber);
    generate->add_option("--vaccines", gf.vaccines, "number of vaccines (1-9)")->check(CLI::Range(1, 9));
    generate->add_option("--budget", gf.budget, "budget")->check(CLI::NonNegativeNumber);
    generate->add_option("--drone", gf.drone, "drone preset");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        const auto used = app.get_subcommands();
        std::cerr << "vaxnet: " << e.what() << "\n\n" << (used.empty() ? app.help() : used.front()->help());
        return kUsage;
    }

    try {
        check_common(c);
        if (*validate) return cmd_validate(c);
        if (*pre) return cmd_preprocess(c, cover);
        if (*solve) return cmd_solve(c, sf);
        if (*export_lp) return cmd_export_lp(c, sf);
        if (*baseline) return cmd_baseline(c, access);
        if (*sweep) return cmd_sweep(c, tc, sc, bottleneck);
        if (*grid) return cmd_grid(c, parse_budget_list(budgets, "--budgets"), presets);
        if (*doe) return cmd_doe(c);
        if (*expand) return cmd_expand(c, parse_budget_list(schedule, "--schedule"), presets);
        if (*generate) return cmd_generate(c, gf);
    } catch (const UsageError& e) {
        const auto used = app.get_subcommands();
        std::cerr << "vaxnet: " << e.what() << "\n\n" << (used.empty() ? app.help() : used.front()->help());
        return kUsage;
    } catch (const std::exception& e) {
        std::cerr << "vaxnet: " << e.what() << '\n';
        return kUsage;
    }
    return kUsage;
}
