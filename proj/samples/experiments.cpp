// Baselines and a budget x range grid, as CSV on stdout.
#include <iostream>

#include "vaxnet/vaxnet.hpp"

int main() {
    using namespace vaxnet;

    GeneratorConfig cfg;
    cfg.seed = 3;
    cfg.region_area_km2 = 2500;
    cfg.n_communities = 12;
    cfg.vaccine_count = 2;
    const Instance inst = generate_synthetic(cfg);

    ExperimentOptions opt;
    opt.threads = 2;

    const auto full = run_baseline(inst, AccessMode::Full, opt).result;
    const auto limited = run_baseline(inst, AccessMode::Limited, opt).result;
    std::cerr << "baseline SR: full " << full.sr_community << ", limited " << limited.sr_community << " (clinic "
              << limited.sr_clinic << ")\n";

    const auto grid = run_budget_range_grid(inst, {0, 2e6, 4e6}, {"battery-30", "fuel-900"}, opt);
    write_results_csv(grid.report, std::cout);
}
