#include <gtest/gtest.h>

#include <cmath>

#include "leocell/error.hpp"
#include "leocell/regress.hpp"
#include "leocell/rng.hpp"
#include "leocell/simulate.hpp"

using namespace leocell;

namespace {

void expect_rel(double actual, double expected, double tol) {
  EXPECT_LE(std::abs(actual - expected), tol * std::abs(expected))
      << "actual " << actual << " expected " << expected;
}

CyclingDataset canonical() { return generate(SimulationPlan{}, DegradationModelParams{}); }

}  // namespace

TEST(FitOls, RecoversPublishedRcModel) {
  auto m = fit_ols(canonical(), Target::RC);
  expect_rel(m.intercept, 110.29, 1e-6);
  expect_rel(m.coeff_t, -0.7551, 1e-6);
  expect_rel(m.coeff_dod, -0.2977, 1e-6);
  expect_rel(m.coeff_cycle, -0.0014, 1e-6);
  EXPECT_EQ(m.residual_stats.n, 156u);
  EXPECT_LT(m.residual_stats.max_abs_residual, 1e-9);
}

TEST(FitOls, RecoversPublishedEodvModel) {
  auto m = fit_ols(canonical(), Target::EODV);
  expect_rel(m.intercept, 4.3156, 1e-6);
  expect_rel(m.coeff_t, -0.1297, 1e-6);
  expect_rel(m.coeff_dod, -0.0093, 1e-6);
  expect_rel(m.coeff_cycle, -7.1705e-06, 1e-6);
  EXPECT_EQ(m.residual_stats.n, 151u);  // five sub-zero EODV points absent
}

TEST(FitOls, ConstantTarget) {
  std::vector<CyclingRecord> recs;
  for (auto s : reference_settings())
    for (int c = 0; c <= 5000; c += 1000) recs.push_back({s.temperature_c, s.dod_pct, c, 77.5, {}});
  auto m = fit_ols(CyclingDataset(recs), Target::RC);
  EXPECT_NEAR(m.intercept, 77.5, 1e-9);
  EXPECT_NEAR(m.coeff_t, 0, 1e-9);
  EXPECT_NEAR(m.coeff_dod, 0, 1e-9);
  EXPECT_NEAR(m.coeff_cycle, 0, 1e-9);
}

TEST(FitOls, RankErrorsNameTheColumn) {
  SimulationPlan plan;
  plan.settings = {{10, 10}, {10, 20}, {10, 30}};
  try {
    fit_ols(generate(plan, {}), Target::RC);
    FAIL();
  } catch (const RankDeficientError& e) {
    EXPECT_EQ(e.column(), "temperature_c");
  }
  plan.settings = {{10, 10}, {20, 20}, {30, 30}};  // DOD = T
  try {
    fit_ols(generate(plan, {}), Target::RC);
    FAIL();
  } catch (const RankDeficientError& e) {
    EXPECT_EQ(e.column(), "dod_pct");
  }
  plan = {};
  plan.cycle_end = 0;
  try {
    fit_ols(generate(plan, {}), Target::RC);
    FAIL();
  } catch (const RankDeficientError& e) {
    EXPECT_EQ(e.column(), "cycle");
  }
}

TEST(FitOls, TooFewRecords) {
  CyclingDataset d({{10, 10, 0, 90.0, {}}, {20, 10, 0, 80.0, {}}, {10, 20, 0, 85.0, {}}});
  EXPECT_THROW(fit_ols(d, Target::RC), ValidationError);
  EXPECT_THROW(fit_ols(d, Target::EODV), ValidationError);
}

TEST(FitOls, RecoversRandomAffineTruthOnRandomGrids) {
  Xoshiro256 rng(8);
  for (int trial = 0; trial < 25; ++trial) {
    DegradationModelParams p;
    p.rc_intercept = rng.uniform(90, 120);
    p.rc_coeff_t = rng.uniform(0.1, 1);
    p.rc_coeff_dod = rng.uniform(0.1, 1);
    p.rc_coeff_cycle = rng.uniform(1e-4, 2e-3);
    SimulationPlan plan;
    plan.settings.clear();
    for (int i = 0; i < 4; ++i) plan.settings.push_back({rng.uniform(0, 40), rng.uniform(5, 40)});
    plan.cycle_step = 500 + static_cast<std::int64_t>(rng.uniform01() * 2000);
    auto m = fit_ols(generate(plan, p), Target::RC);
    expect_rel(m.intercept, p.rc_intercept, 1e-6);
    expect_rel(m.coeff_t, -p.rc_coeff_t, 1e-6);
    expect_rel(m.coeff_dod, -p.rc_coeff_dod, 1e-6);
    expect_rel(m.coeff_cycle, -p.rc_coeff_cycle, 1e-6);
  }
}

TEST(FitOls, ResidualsOrthogonalToDesignColumns) {
  SimulationPlan plan;
  plan.noise_sd_rc = 0.5;
  plan.seed = 3;
  auto d = generate(plan, {});
  auto m = fit_ols(d, Target::RC);
  double dots[4] = {0, 0, 0, 0}, col_norm2[4] = {0, 0, 0, 0}, res_norm2 = 0;
  for (const auto& r : d.records()) {
    const double res = *r.rc_pct - predict_linear(m, r.temperature_c, r.dod_pct, r.cycle);
    const double cols[4] = {1.0, r.temperature_c, r.dod_pct, double(r.cycle)};
    for (int k = 0; k < 4; ++k) {
      dots[k] += res * cols[k];
      col_norm2[k] += cols[k] * cols[k];
    }
    res_norm2 += res * res;
  }
  for (int k = 0; k < 4; ++k) {
    EXPECT_LE(std::abs(dots[k]), 1e-6 * std::sqrt(col_norm2[k] * res_norm2)) << "column " << k;
  }
}

TEST(FitOls, ConstantShiftMovesOnlyIntercept) {
  SimulationPlan plan;
  plan.noise_sd_rc = 0.7;
  auto d = generate(plan, {});
  std::vector<CyclingRecord> shifted(d.records().begin(), d.records().end());
  for (auto& r : shifted) *r.rc_pct -= 25.0;
  auto a = fit_ols(d, Target::RC);
  auto b = fit_ols(CyclingDataset(shifted), Target::RC);
  EXPECT_NEAR(b.intercept, a.intercept - 25.0, 1e-9);
  EXPECT_NEAR(b.coeff_t, a.coeff_t, 1e-9);
  EXPECT_NEAR(b.coeff_dod, a.coeff_dod, 1e-9);
  EXPECT_NEAR(b.coeff_cycle, a.coeff_cycle, 1e-9);
}

TEST(Predict, Examples) {
  LinearModel m{110.29, -0.7551, -0.2977, -0.0014, Target::RC, {}, {}};
  EXPECT_NEAR(predict_linear(m, 10, 10, 0), 99.762, 1e-12);
  LinearModel flat{5, 0, 0, 0, Target::RC, {}, {}};
  EXPECT_EQ(predict_linear(flat, 3, 4, 5000), 5.0);
  auto d = canonical();
  auto fit = fit_ols(d, Target::RC);
  for (const auto& r : d.records()) {
    EXPECT_NEAR(predict_linear(fit, r.temperature_c, r.dod_pct, r.cycle), *r.rc_pct, 1e-6);
  }
}

TEST(EffectRanking, PublishedRcModel) {
  InputRanges ranges{{10, 30}, {10, 30}, {0, 25000}};
  auto e = effect_ranking(linear_from_params({}, Target::RC), ranges);
  ASSERT_EQ(e.size(), 3u);
  EXPECT_EQ(e[0].variable, Variable::Cycle);
  EXPECT_NEAR(e[0].magnitude, 35.0, 1e-9);
  EXPECT_EQ(e[1].variable, Variable::Temperature);
  EXPECT_NEAR(e[1].magnitude, 15.102, 1e-9);
  EXPECT_EQ(e[2].variable, Variable::Dod);
  EXPECT_NEAR(e[2].magnitude, 5.954, 1e-9);
}

TEST(EffectRanking, PublishedEodvModel) {
  InputRanges ranges{{10, 30}, {10, 30}, {0, 25000}};
  auto e = effect_ranking(linear_from_params({}, Target::EODV), ranges);
  EXPECT_EQ(e[0].variable, Variable::Temperature);
  EXPECT_NEAR(e[0].magnitude, 2.594, 1e-12);
  EXPECT_EQ(e[1].variable, Variable::Dod);
  EXPECT_NEAR(e[1].magnitude, 0.186, 1e-12);
  EXPECT_EQ(e[2].variable, Variable::Cycle);
  EXPECT_NEAR(e[2].magnitude, 0.1792625, 1e-12);
}

TEST(EffectRanking, ZeroSlopesKeepInputOrder) {
  InputRanges ranges{{10, 30}, {10, 30}, {0, 25000}};
  auto e = effect_ranking(LinearModel{}, ranges);
  EXPECT_EQ(e[0].variable, Variable::Temperature);
  EXPECT_EQ(e[1].variable, Variable::Dod);
  EXPECT_EQ(e[2].variable, Variable::Cycle);
  for (const auto& x : e) EXPECT_EQ(x.magnitude, 0.0);
  ranges.cycle = {5, 5};
  EXPECT_THROW(effect_ranking(LinearModel{}, ranges), ValidationError);
}

TEST(Format, EquationLooksLikePublishedForm) {
  EXPECT_EQ(format_equation(linear_from_params({}, Target::RC)),
            "RC = 110.2900 - 0.7551*T - 0.2977*DOD - 0.0014*C");
  EXPECT_EQ(format_equation(linear_from_params({}, Target::EODV)),
            "EODV = 4.3156 - 0.1297*T - 0.0093*DOD - 7.1705E-06*C");
}
