#include <gtest/gtest.h>

#include <cstring>
#include <filesystem>

#include "leocell/error.hpp"
#include "leocell/model_io.hpp"
#include "leocell/rng.hpp"

using namespace leocell;

TEST(LinearFile, RoundTripPredictsBitIdentically) {
  SimulationPlan plan;
  plan.noise_sd_rc = 0.3;
  auto m = fit_ols(generate(plan, {}), Target::RC);
  auto path = std::filesystem::temp_directory_path() / "leocell_linear.model";
  save_linear(m, path);
  auto back = load_linear(path);
  EXPECT_EQ(back, m);
  auto any = load_any_model(path);
  ASSERT_TRUE(std::holds_alternative<LinearModel>(any));
  Xoshiro256 rng(1);
  for (int i = 0; i < 100; ++i) {
    const double t = rng.uniform(10, 30), d = rng.uniform(10, 30), c = rng.uniform(0, 25000);
    const double a = predict_linear(m, t, d, c), b = predict_any(any, t, d, c);
    EXPECT_EQ(std::memcmp(&a, &b, sizeof a), 0);
  }
  std::filesystem::remove(path);
}

TEST(AnyModel, DetectsKindAndExtrapolation) {
  auto path = std::filesystem::temp_directory_path() / "leocell_any.model";
  auto d = generate(SimulationPlan{}, {});
  auto mlp = init_network({}, 3, fit_normalization(d, Target::RC), Target::RC);
  save_model(mlp, path);
  auto any = load_any_model(path);
  ASSERT_TRUE(std::holds_alternative<MlpModel>(any));
  EXPECT_EQ(target_of(any), Target::RC);
  EXPECT_EQ(extrapolated_variable(any, 50, 20, 100), Variable::Temperature);
  EXPECT_FALSE(extrapolated_variable(any, 20, 20, 100));
  EXPECT_EQ(predict_any(any, 20, 20, 100), predict(mlp, 20, 20, 100));

  // A linear model built from parameters has no fitted ranges.
  save_linear(linear_from_params({}, Target::EODV), path);
  auto lin = load_any_model(path);
  EXPECT_FALSE(extrapolated_variable(lin, 500, 20, 1e7));
  EXPECT_EQ(target_of(lin), Target::EODV);

  KeyValueFile kv;
  kv.set("kind", "spline");
  kv.save(path);
  EXPECT_THROW(load_any_model(path), ValidationError);
  std::filesystem::remove(path);
}
