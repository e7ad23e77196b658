// Generate a small region, reduce it and solve the hub and drone model.
#include <cstdio>

#include "vaxnet/vaxnet.hpp"

int main() {
    using namespace vaxnet;

    GeneratorConfig cfg;
    cfg.seed = 7;
    cfg.region_area_km2 = 2500;
    cfg.n_communities = 15;
    cfg.vaccine_count = 2;
    Instance inst = generate_synthetic(cfg);
    inst.budget = 2e6;

    const auto pre = preprocess(inst);
    std::printf("%zu communities -> %zu nodes after reduction, %zu outreach posts\n", inst.demand.size(),
                pre.reduced.nodes.size(), pre.selection.hosts.size());

    const auto s = solve_model(pre.reduced, build_model_Q(pre.reduced));
    if (!s.has_value()) {
        std::printf("no solution\n");
        return 1;
    }
    const auto sr = compute_supply_ratio(s, pre.reduced, SrLevel::Region);
    std::printf("objective %.4f  drones %ld  supply ratio %.3f\n", s.objective, static_cast<long>(s.drones), sr.total.sr);
    for (NodeIndex i = 0; i < pre.reduced.nodes.size(); ++i)
        if (i < s.hub_open.size() && s.hub_open[i]) std::printf("hub at %s\n", pre.reduced.nodes[i].id.c_str());
}
