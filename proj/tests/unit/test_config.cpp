#include <gtest/gtest.h>

#include "ccopf/config.hpp"
#include "ccopf/error.hpp"
#include "support/oracles.hpp"

using namespace ccopf;

TEST(Config, EmptyDocumentGivesDefaults) {
    const Config c = parse_config("{}");
    EXPECT_TRUE(c.wind.farms.empty());
    EXPECT_FALSE(c.robust);
    EXPECT_FALSE(c.omega);
    EXPECT_EQ(c.gen_rule, GeneratorRule::AlphaScaled);
    EXPECT_EQ(c.standard_alpha, StandardAlphaRule::HeadroomUniform);
    EXPECT_TRUE(c.merge_parallel);
    EXPECT_EQ(c.solver.stop_rule, StopRule::Both);
    EXPECT_EQ(c.validation.distribution, "gaussian");
    EXPECT_EQ(c.chance_bound().kind, ChanceBoundKind::TwoSidedSplit);
}

TEST(Config, FullDocument) {
    const Config c = parse_config(R"({
      "wind": [{"bus": 6, "mean_mw": 50, "std_mw": 15}],
      "line_epsilon": 0.05, "gen_epsilon": 0.01,
      "overrides": {"line_epsilon": [{"from": 4, "to": 5, "epsilon": 0.1}],
                    "gen_epsilon": [{"bus": 1, "epsilon": 0.2}]},
      "omega": 2.5, "gen_rule": "unscaled", "standard_alpha": "uniform", "merge_parallel": false,
      "solver": {"viol_tol": 1e-5, "max_iter": 30, "cuts_per_iter": 3, "stop_rule": "either"},
      "validation": {"distribution": "t2.5", "samples": 500, "seed": 9},
      "sweep": {"axis": "Gamma", "values": [0, 1]}
    })");
    ASSERT_EQ(c.wind.farms.size(), 1u);
    EXPECT_EQ(c.wind.farms[0].bus, 6);
    EXPECT_DOUBLE_EQ(c.wind.line_epsilon, 0.05);
    EXPECT_DOUBLE_EQ(c.wind.gen_overrides[0].epsilon, 0.2);
    EXPECT_EQ(c.wind.line_overrides[0].to, 5);
    EXPECT_EQ(c.chance_bound().kind, ChanceBoundKind::Conservative);
    EXPECT_FALSE(c.merge_parallel);
    const CuttingPlaneOptions o = c.cutting_plane_options();
    EXPECT_DOUBLE_EQ(o.viol_tol, 1e-5);
    EXPECT_EQ(o.max_iter, 30);
    EXPECT_EQ(o.cuts_per_iter, 3);
    EXPECT_EQ(o.stop_rule, StopRule::Either);
    EXPECT_EQ(o.gen_rule, GeneratorRule::Unscaled);
    EXPECT_DOUBLE_EQ(o.bound.omega, 2.5);
    EXPECT_EQ(c.validation.samples, 500u);
    EXPECT_EQ(c.validation.seed, 9u);
    EXPECT_EQ(c.sweep.values.size(), 2u);
}

TEST(Config, UnknownKeysRejectedAtEveryLevel) {
    for (const char* doc : {
             R"({"windd": []})",
             R"({"wind": [{"bus": 1, "mean_mw": 1, "std_mw": 1, "x": 0}]})",
             R"({"overrides": {"other": []}})",
             R"({"overrides": {"line_epsilon": [{"from": 1, "to": 2, "epsilon": 0.1, "id": 3}]}})",
             R"({"solver": {"tol": 1}})",
             R"({"validation": {"n": 1}})",
             R"({"sweep": {"axes": "Gamma"}})",
             R"({"robust": {"mean": {"kind": "budget", "gamma": 1, "Gamma": 1, "extra": 0}}})",
             R"({"robust": {"mean": {"kind": "ellipsoid", "A": [[1]], "b": 1, "c": 0}}})",
             R"({"robust": {"means": {}}})",
         }) {
        EXPECT_THROW(parse_config(doc), InputError) << doc;
    }
}

TEST(Config, TypesAndValues) {
    for (const char* doc : {
             "not json",
             "[]",
             R"({"wind": {}})",
             R"({"wind": [{"bus": "6", "mean_mw": 1, "std_mw": 1}]})",
             R"({"wind": [{"bus": 6.5, "mean_mw": 1, "std_mw": 1}]})",
             R"({"wind": [{"bus": 6, "mean_mw": 1}]})",
             R"({"line_epsilon": "0.05"})",
             R"({"gen_rule": "scaled"})",
             R"({"standard_alpha": "headroom-uniform"})",
             R"({"merge_parallel": 1})",
             R"({"solver": {"viol_tol": 0}})",
             R"({"solver": {"max_iter": 0}})",
             R"({"solver": {"cuts_per_iter": 1.5}})",
             R"({"solver": {"stop_rule": "all"}})",
             R"({"validation": {"samples": -5}})",
             R"({"validation": {"seed": 1.5}})",
             R"({"sweep": {"values": [1, "2"]}})",
             R"({"robust": {"mean": {"kind": "box"}}})",
             R"({"robust": {"mean": {"kind": "budget", "gamma": 1}}})",
             R"({"robust": {"mean": {"gamma": 1, "Gamma": 1}}})",
         }) {
        EXPECT_THROW(parse_config(doc), InputError) << doc;
    }
}

TEST(Config, RobustShorthandAppliesToBothSets) {
    const Config c = parse_config(R"({"robust": {"kind": "budget", "gamma": 2, "Gamma": 1}})");
    ASSERT_TRUE(c.robust);
    ASSERT_TRUE(c.robust->mean && c.robust->variance);
    EXPECT_DOUBLE_EQ(c.robust->variance->Gamma, 1.0);
    const RobustSets s = make_sets(*c.robust, 3);
    EXPECT_EQ(s.mean.dimension(), 3u);
    EXPECT_DOUBLE_EQ(s.variance.budget()->gamma[2], 2.0);

    const Config only_mean = parse_config(R"({"robust": {"mean": {"kind": "budget", "gamma": [1, 2], "Gamma": 1}}})");
    const RobustSets m = make_sets(*only_mean.robust, 2);
    EXPECT_DOUBLE_EQ(m.variance.maximize(Vector::Ones(2)), 0.0);
    EXPECT_DOUBLE_EQ(m.mean.maximize(Vector::Ones(2)), 2.0);
}

TEST(Config, MakeSetErrors) {
    SetSpec budget;
    budget.gamma = {1.0, 2.0};
    budget.Gamma = 1.0;
    EXPECT_THROW(make_set(budget, 3), InputError);
    EXPECT_NO_THROW(make_set(budget, 2));
    SetSpec ell;
    ell.kind = "ellipsoid";
    ell.A = {{1.0, 0.0}, {0.0}};
    ell.b = 1.0;
    EXPECT_THROW(make_set(ell, 2), InputError);
    ell.A = {{1.0, 0.0}, {0.0, 1.0}};
    EXPECT_THROW(make_set(ell, 3), InputError);
    EXPECT_TRUE(make_set(ell, 2).ellipsoid());
}

TEST(Config, OmegaBelowEtaIsRejectedWhenUsed) {
    const Config c = parse_config(R"({"omega": 1.0})");
    EXPECT_THROW(c.chance_bound().multiplier(0.0227), InputError);
}

TEST(Config, FilesOnDisk) {
    EXPECT_THROW(load_config(oracle::config_path("no_such_config")), InputError);
    for (const char* name : {"case2", "case3_path", "case3_triangle", "case9w", "case9w_robust"}) {
        EXPECT_NO_THROW(load_config(oracle::config_path(name))) << name;
    }
}
