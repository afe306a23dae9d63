#include "ccopf/case_model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>
#include <set>
#include <string>

#include "ccopf/error.hpp"
#include "ccopf/normal.hpp"

namespace ccopf {

double default_line_epsilon() { return normal_survival(2.0); }
double default_gen_epsilon() { return normal_survival(3.0); }

namespace {

void check_epsilon(double eps, const std::string& what) {
    if (!(eps > 0.0 && eps < 0.5)) {
        throw InputError(what + ": epsilon must lie in (0, 0.5), got " + std::to_string(eps));
    }
}

bool connected(std::size_t n, const std::vector<Line>& lines) {
    if (n == 0) return false;
    std::vector<std::vector<int>> adj(n);
    for (const auto& l : lines) {
        adj[static_cast<std::size_t>(l.from)].push_back(l.to);
        adj[static_cast<std::size_t>(l.to)].push_back(l.from);
    }
    std::vector<char> seen(n, 0);
    std::queue<int> q;
    q.push(0);
    seen[0] = 1;
    std::size_t count = 1;
    while (!q.empty()) {
        int u = q.front();
        q.pop();
        for (int v : adj[static_cast<std::size_t>(u)]) {
            if (!seen[static_cast<std::size_t>(v)]) {
                seen[static_cast<std::size_t>(v)] = 1;
                ++count;
                q.push(v);
            }
        }
    }
    return count == n;
}

}  // namespace

GridCase::GridCase(std::string name, double base_mva, std::vector<Bus> buses,
                   std::vector<Line> lines, std::vector<Generator> generators,
                   std::vector<WindFarm> wind_farms)
    : name_(std::move(name)),
      base_mva_(base_mva),
      buses_(std::move(buses)),
      lines_(std::move(lines)),
      generators_(std::move(generators)),
      wind_farms_(std::move(wind_farms)) {
    const int n = static_cast<int>(buses_.size());
    if (n < 2) throw InputError("case needs at least two buses");
    if (!(base_mva_ > 0.0)) throw InputError("baseMVA must be positive");

    std::set<int> ids;
    for (const auto& b : buses_) {
        if (!ids.insert(b.external_id).second) {
            throw InputError("duplicate bus id " + std::to_string(b.external_id));
        }
        if (!std::isfinite(b.load_mw)) throw InputError("non-finite load");
    }
    auto in_range = [n](int b) { return b >= 0 && b < n; };
    for (const auto& l : lines_) {
        if (!in_range(l.from) || !in_range(l.to)) throw InputError("line references unknown bus");
        if (l.from == l.to) throw InputError("line connects a bus to itself");
        if (!(l.susceptance > 0.0) || !std::isfinite(l.susceptance)) {
            throw InputError("line susceptance must be finite and positive");
        }
        if (!(l.flow_limit_mw > 0.0)) throw InputError("line flow limit must be positive");
        check_epsilon(l.epsilon, "line " + std::to_string(buses_[l.from].external_id) + "-" +
                                     std::to_string(buses_[l.to].external_id));
    }
    for (const auto& g : generators_) {
        if (!in_range(g.bus)) throw InputError("generator references unknown bus");
        if (g.bus == slack()) throw InputError("generator placed on the reference bus");
        if (!(g.p_min_mw >= 0.0 && g.p_min_mw <= g.p_max_mw)) {
            throw InputError("generator at bus " + std::to_string(buses_[g.bus].external_id) +
                             " needs 0 <= Pmin <= Pmax");
        }
        if (g.cost_quadratic < 0.0) throw InputError("generator cost must be convex");
        check_epsilon(g.epsilon, "generator at bus " + std::to_string(buses_[g.bus].external_id));
    }
    std::set<int> wind_buses;
    for (const auto& w : wind_farms_) {
        if (!in_range(w.bus)) throw InputError("wind farm references unknown bus");
        const int ext = buses_[w.bus].external_id;
        if (w.bus == slack()) throw InputError("wind farm on reference bus " + std::to_string(ext));
        if (has_generator(w.bus)) throw InputError("wind farm on generator bus " + std::to_string(ext));
        if (!wind_buses.insert(w.bus).second) {
            throw InputError("duplicate wind farm on bus " + std::to_string(ext));
        }
        if (!(w.mean_mw >= 0.0) || !(w.std_mw >= 0.0)) {
            throw InputError("wind mean and std must be non-negative");
        }
    }
    if (!connected(buses_.size(), lines_)) throw DisconnectedGridError("network is not connected");
}

std::optional<int> GridCase::bus_index(int external_id) const {
    for (std::size_t i = 0; i < buses_.size(); ++i) {
        if (buses_[i].external_id == external_id) return static_cast<int>(i);
    }
    return std::nullopt;
}

double GridCase::total_load() const {
    return std::accumulate(buses_.begin(), buses_.end(), 0.0,
                           [](double s, const Bus& b) { return s + b.load_mw; });
}

double GridCase::total_wind_mean() const {
    return std::accumulate(wind_farms_.begin(), wind_farms_.end(), 0.0,
                           [](double s, const WindFarm& w) { return s + w.mean_mw; });
}

double GridCase::total_wind_variance() const {
    return std::accumulate(wind_farms_.begin(), wind_farms_.end(), 0.0,
                           [](double s, const WindFarm& w) { return s + w.std_mw * w.std_mw; });
}

bool GridCase::has_generator(int bus) const {
    return std::any_of(generators_.begin(), generators_.end(),
                       [bus](const Generator& g) { return g.bus == bus; });
}

bool GridCase::has_wind(int bus) const {
    return std::any_of(wind_farms_.begin(), wind_farms_.end(),
                       [bus](const WindFarm& w) { return w.bus == bus; });
}

GridCase attach_wind(const GridCase& grid, const WindSpec& spec) {
    check_epsilon(spec.line_epsilon, "line_epsilon");
    check_epsilon(spec.gen_epsilon, "gen_epsilon");

    std::vector<WindFarm> farms = grid.wind_farms();
    for (const auto& entry : spec.farms) {
        auto bus = grid.bus_index(entry.bus);
        if (!bus || grid.buses()[static_cast<std::size_t>(*bus)].dummy) {
            throw InputError("wind farm references unknown bus " + std::to_string(entry.bus));
        }
        farms.push_back({*bus, entry.mean_mw, entry.std_mw});
    }

    std::vector<Line> lines = grid.lines();
    for (auto& l : lines) l.epsilon = spec.line_epsilon;
    for (const auto& o : spec.line_overrides) {
        check_epsilon(o.epsilon, "line override");
        auto a = grid.bus_index(o.from);
        auto b = grid.bus_index(o.to);
        bool found = false;
        for (auto& l : lines) {
            if (a && b && ((l.from == *a && l.to == *b) || (l.from == *b && l.to == *a))) {
                l.epsilon = o.epsilon;
                found = true;
            }
        }
        if (!found) {
            throw InputError("epsilon override for unknown line " + std::to_string(o.from) + "-" +
                             std::to_string(o.to));
        }
    }

    std::vector<Generator> gens = grid.generators();
    for (auto& g : gens) g.epsilon = spec.gen_epsilon;
    for (const auto& o : spec.gen_overrides) {
        check_epsilon(o.epsilon, "generator override");
        auto a = grid.bus_index(o.bus);
        bool found = false;
        for (auto& g : gens) {
            if (a && g.bus == *a) {
                g.epsilon = o.epsilon;
                found = true;
            }
        }
        if (!found) throw InputError("epsilon override for bus without generator " + std::to_string(o.bus));
    }

    return GridCase(grid.name(), grid.base_mva(), grid.buses(), std::move(lines), std::move(gens),
                    std::move(farms));
}

double penetration(const GridCase& grid) {
    const double demand = grid.total_load();
    if (!(demand > 0.0)) throw InputError("penetration undefined for zero total demand");
    return grid.total_wind_mean() / demand;
}

GridCase scale_loads(const GridCase& grid, double factor) {
    if (!(factor > 0.0)) throw InputError("load scale factor must be positive");
    std::vector<Bus> buses = grid.buses();
    for (auto& b : buses) b.load_mw *= factor;
    return GridCase(grid.name(), grid.base_mva(), std::move(buses), grid.lines(), grid.generators(),
                    grid.wind_farms());
}

GridCase scale_wind(const GridCase& grid, double factor) {
    if (!(factor >= 0.0)) throw InputError("wind scale factor must be non-negative");
    std::vector<WindFarm> farms = grid.wind_farms();
    for (auto& w : farms) {
        w.mean_mw *= factor;
        w.std_mw *= factor;
    }
    return GridCase(grid.name(), grid.base_mva(), grid.buses(), grid.lines(), grid.generators(),
                    std::move(farms));
}

}  // namespace ccopf
