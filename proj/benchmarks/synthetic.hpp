#pragma once

#include <random>
#include <string>
#include <vector>

#include "ccopf/case_model.hpp"
#include "ccopf/config.hpp"

namespace bench {

inline ccopf::GridCase bundled(const std::string& name) {
    const std::string dir = CCOPF_DATA_DIR;
    return ccopf::attach_wind(ccopf::load_matpower(dir + "/cases/" + name + ".m"),
                              ccopf::load_config(dir + "/config/" + name + ".json").wind);
}

/// Ring of n buses with random chords, a generator on every tenth bus and a
/// wind farm on every twentieth. Every line is limited, and enough of them
/// bind that the cutting plane needs many master iterations.
inline ccopf::GridCase synthetic(int n, unsigned seed) {
    using namespace ccopf;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<Bus> buses;
    for (int i = 0; i < n; ++i) buses.push_back({i + 1, i % 10 == 0 ? 0.0 : 5.0 + 10.0 * u(rng), false});
    std::vector<Line> lines;
    auto add = [&](int a, int b) {
        Line l;
        l.from = a;
        l.to = b;
        l.susceptance = 5.0 + 20.0 * u(rng);
        l.flow_limit_mw = 150.0;
        l.epsilon = 0.0227;
        lines.push_back(l);
    };
    for (int i = 0; i < n; ++i) add(i, (i + 1) % n);
    for (int c = 0; c < n / 5; ++c) {
        const int a = static_cast<int>(u(rng) * n), b = static_cast<int>(u(rng) * n);
        if (a != b) add(a, b);
    }
    std::vector<Generator> gens;
    for (int i = 0; i < n - 1; i += 10) {
        Generator g;
        g.bus = i;
        g.p_max_mw = 400.0;
        g.cost_quadratic = 0.01 + 0.05 * u(rng);
        g.cost_linear = 10.0 + 20.0 * u(rng);
        g.epsilon = 0.0227;
        gens.push_back(g);
    }
    std::vector<WindFarm> farms;
    for (int i = 5; i < n - 1; i += 20) farms.push_back({i, 20.0, 6.0});
    return GridCase("synthetic" + std::to_string(n), 100.0, std::move(buses), std::move(lines), std::move(gens),
                    std::move(farms));
}

}  // namespace bench
