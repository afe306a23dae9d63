#include "ccopf/config.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "ccopf/error.hpp"

namespace ccopf {

namespace {

using nlohmann::json;

void check_keys(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
    if (!obj.is_object()) throw InputError(where + " must be an object");
    for (const auto& [key, value] : obj.items()) {
        if (!allowed.count(key)) throw InputError("unknown key '" + key + "' in " + where);
    }
}

double number(const json& v, const std::string& where) {
    if (!v.is_number()) throw InputError(where + " must be a number");
    return v.get<double>();
}

int integer(const json& v, const std::string& where) {
    if (!v.is_number_integer()) throw InputError(where + " must be an integer");
    return v.get<int>();
}

std::uint64_t unsigned_integer(const json& v, const std::string& where) {
    if (!v.is_number_unsigned()) throw InputError(where + " must be a non-negative integer");
    return v.get<std::uint64_t>();
}

std::string string(const json& v, const std::string& where) {
    if (!v.is_string()) throw InputError(where + " must be a string");
    return v.get<std::string>();
}

std::vector<double> numbers(const json& v, const std::string& where) {
    if (!v.is_array()) throw InputError(where + " must be an array of numbers");
    std::vector<double> out;
    for (const auto& x : v) out.push_back(number(x, where));
    return out;
}

SetSpec parse_set(const json& j, const std::string& where) {
    SetSpec s;
    if (!j.contains("kind")) throw InputError(where + " needs a 'kind'");
    s.kind = string(j["kind"], where + ".kind");
    if (s.kind == "budget") {
        check_keys(j, {"kind", "gamma", "Gamma"}, where);
        if (!j.contains("gamma") || !j.contains("Gamma")) throw InputError(where + " needs 'gamma' and 'Gamma'");
        s.gamma = j["gamma"].is_array() ? numbers(j["gamma"], where + ".gamma")
                                        : std::vector<double>{number(j["gamma"], where + ".gamma")};
        s.Gamma = number(j["Gamma"], where + ".Gamma");
    } else if (s.kind == "ellipsoid") {
        check_keys(j, {"kind", "A", "b"}, where);
        if (!j.contains("A") || !j.contains("b")) throw InputError(where + " needs 'A' and 'b'");
        if (!j["A"].is_array()) throw InputError(where + ".A must be an array of rows");
        for (const auto& row : j["A"]) s.A.push_back(numbers(row, where + ".A"));
        s.b = number(j["b"], where + ".b");
    } else {
        throw InputError(where + ".kind must be 'budget' or 'ellipsoid'");
    }
    return s;
}

RobustSpec parse_robust(const json& j) {
    RobustSpec r;
    if (j.contains("kind")) {
        r.mean = r.variance = parse_set(j, "robust");
        return r;
    }
    check_keys(j, {"mean", "variance"}, "robust");
    if (j.contains("mean")) r.mean = parse_set(j["mean"], "robust.mean");
    if (j.contains("variance")) r.variance = parse_set(j["variance"], "robust.variance");
    return r;
}

}  // namespace

ChanceBound Config::chance_bound() const {
    ChanceBound b;
    if (omega) {
        b.kind = ChanceBoundKind::Conservative;
        b.omega = *omega;
    }
    return b;
}

CuttingPlaneOptions Config::cutting_plane_options() const {
    CuttingPlaneOptions o;
    o.viol_tol = solver.viol_tol;
    o.max_iter = solver.max_iter;
    o.cuts_per_iter = solver.cuts_per_iter;
    o.stop_rule = solver.stop_rule;
    o.bound = chance_bound();
    o.gen_rule = gen_rule;
    return o;
}

Config parse_document(const json& j);

Config parse_config(std::string_view json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw InputError(std::string("config is not valid JSON: ") + e.what());
    }
    try {
        return parse_document(j);
    } catch (const json::exception& e) {
        throw InputError(std::string("config: ") + e.what());
    }
}

Config parse_document(const json& j) {
    check_keys(j, {"wind", "line_epsilon", "gen_epsilon", "overrides", "robust", "omega", "gen_rule",
                   "standard_alpha", "merge_parallel", "solver", "validation", "sweep"},
               "config");
    Config c;
    if (j.contains("wind")) {
        if (!j["wind"].is_array()) throw InputError("wind must be an array");
        for (const auto& w : j["wind"]) {
            check_keys(w, {"bus", "mean_mw", "std_mw"}, "wind entry");
            if (!w.contains("bus") || !w.contains("mean_mw") || !w.contains("std_mw")) {
                throw InputError("wind entries need bus, mean_mw and std_mw");
            }
            c.wind.farms.push_back({integer(w["bus"], "wind.bus"), number(w["mean_mw"], "wind.mean_mw"),
                                    number(w["std_mw"], "wind.std_mw")});
        }
    }
    if (j.contains("line_epsilon")) c.wind.line_epsilon = number(j["line_epsilon"], "line_epsilon");
    if (j.contains("gen_epsilon")) c.wind.gen_epsilon = number(j["gen_epsilon"], "gen_epsilon");
    if (j.contains("overrides")) {
        const auto& o = j["overrides"];
        check_keys(o, {"line_epsilon", "gen_epsilon"}, "overrides");
        if (o.contains("line_epsilon")) {
            for (const auto& e : o["line_epsilon"]) {
                check_keys(e, {"from", "to", "epsilon"}, "overrides.line_epsilon entry");
                c.wind.line_overrides.push_back({integer(e.at("from"), "from"), integer(e.at("to"), "to"),
                                                 number(e.at("epsilon"), "epsilon")});
            }
        }
        if (o.contains("gen_epsilon")) {
            for (const auto& e : o["gen_epsilon"]) {
                check_keys(e, {"bus", "epsilon"}, "overrides.gen_epsilon entry");
                c.wind.gen_overrides.push_back({integer(e.at("bus"), "bus"), number(e.at("epsilon"), "epsilon")});
            }
        }
    }
    if (j.contains("robust")) c.robust = parse_robust(j["robust"]);
    if (j.contains("omega")) c.omega = number(j["omega"], "omega");
    if (j.contains("gen_rule")) {
        const auto s = string(j["gen_rule"], "gen_rule");
        if (s == "alpha_scaled") c.gen_rule = GeneratorRule::AlphaScaled;
        else if (s == "unscaled") c.gen_rule = GeneratorRule::Unscaled;
        else throw InputError("gen_rule must be 'alpha_scaled' or 'unscaled'");
    }
    if (j.contains("standard_alpha")) {
        const auto s = string(j["standard_alpha"], "standard_alpha");
        if (s == "headroom") c.standard_alpha = StandardAlphaRule::HeadroomUniform;
        else if (s == "uniform") c.standard_alpha = StandardAlphaRule::Uniform;
        else throw InputError("standard_alpha must be 'headroom' or 'uniform'");
    }
    if (j.contains("merge_parallel")) {
        if (!j["merge_parallel"].is_boolean()) throw InputError("merge_parallel must be true or false");
        c.merge_parallel = j["merge_parallel"].get<bool>();
    }
    if (j.contains("solver")) {
        const auto& s = j["solver"];
        check_keys(s, {"viol_tol", "max_iter", "cuts_per_iter", "stop_rule"}, "solver");
        if (s.contains("viol_tol")) c.solver.viol_tol = number(s["viol_tol"], "solver.viol_tol");
        if (s.contains("max_iter")) c.solver.max_iter = integer(s["max_iter"], "solver.max_iter");
        if (s.contains("cuts_per_iter")) c.solver.cuts_per_iter = integer(s["cuts_per_iter"], "solver.cuts_per_iter");
        if (s.contains("stop_rule")) {
            const auto r = string(s["stop_rule"], "solver.stop_rule");
            if (r == "both") c.solver.stop_rule = StopRule::Both;
            else if (r == "either") c.solver.stop_rule = StopRule::Either;
            else throw InputError("solver.stop_rule must be 'both' or 'either'");
        }
        if (!(c.solver.viol_tol > 0.0)) throw InputError("solver.viol_tol must be positive");
        if (c.solver.max_iter < 1 || c.solver.cuts_per_iter < 1) {
            throw InputError("solver.max_iter and solver.cuts_per_iter must be at least 1");
        }
    }
    if (j.contains("validation")) {
        const auto& v = j["validation"];
        check_keys(v, {"distribution", "samples", "seed"}, "validation");
        if (v.contains("distribution")) c.validation.distribution = string(v["distribution"], "validation.distribution");
        if (v.contains("samples")) c.validation.samples = unsigned_integer(v["samples"], "validation.samples");
        if (v.contains("seed")) c.validation.seed = unsigned_integer(v["seed"], "validation.seed");
    }
    if (j.contains("sweep")) {
        const auto& s = j["sweep"];
        check_keys(s, {"axis", "values"}, "sweep");
        if (s.contains("axis")) c.sweep.axis = string(s["axis"], "sweep.axis");
        if (s.contains("values")) c.sweep.values = numbers(s["values"], "sweep.values");
    }
    return c;
}

Config load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open config file " + path.string());
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_config(buffer.str());
}

UncertaintySet make_set(const SetSpec& spec, std::size_t farms) {
    const auto n = static_cast<Eigen::Index>(farms);
    if (spec.kind == "budget") {
        BudgetSet b;
        if (spec.gamma.size() == 1) {
            b.gamma = Vector::Constant(n, spec.gamma[0]);
        } else if (spec.gamma.size() == farms) {
            b.gamma = Eigen::Map<const Vector>(spec.gamma.data(), n);
        } else {
            throw InputError("budget gamma needs 1 or " + std::to_string(farms) + " entries");
        }
        b.Gamma = spec.Gamma;
        return UncertaintySet(std::move(b));
    }
    EllipsoidSet e;
    if (spec.A.size() != farms) throw InputError("ellipsoid A must be " + std::to_string(farms) + " x " + std::to_string(farms));
    e.A.resize(n, n);
    for (std::size_t i = 0; i < farms; ++i) {
        if (spec.A[i].size() != farms) throw InputError("ellipsoid A must be square");
        for (std::size_t k = 0; k < farms; ++k) e.A(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = spec.A[i][k];
    }
    e.b = spec.b;
    return UncertaintySet(std::move(e));
}

RobustSets make_sets(const RobustSpec& spec, std::size_t farms) {
    return RobustSets{spec.mean ? make_set(*spec.mean, farms) : UncertaintySet(farms),
                      spec.variance ? make_set(*spec.variance, farms) : UncertaintySet(farms)};
}

}  // namespace ccopf
