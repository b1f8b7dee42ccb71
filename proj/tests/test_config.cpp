#include <gtest/gtest.h>

#include "mvreg/config.hpp"

namespace mvreg {
namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::InvalidArgument;
}

TEST(Config, ParsesEveryKey) {
  const PipelineConfig c = parse_config(
      "# tuned\nouter_iterations = 3\nsync_rounds=2\ntau_p = 0.5\ntemperature = 0.05\ngamma = 2.5\n"
      "beta = 0.5\nw_thresh = 0.4\ninner_irls = 7\nblend = 1\nsteepness = 4\ninlier_midpoint = 0.2\n"
      "residual_scale = 0.1\nconnectivity = 0-1, 1-2 2-0\nthreads = 2  # inline comment\n");
  EXPECT_EQ(c.outer_iterations, 3);
  EXPECT_EQ(c.sync_rounds, 2);
  EXPECT_EQ(c.tau_p, 0.5);
  EXPECT_EQ(c.temperature, 0.05);
  EXPECT_EQ(c.gamma, 2.5);
  EXPECT_EQ(c.beta, 0.5);
  EXPECT_EQ(c.w_thresh, 0.4);
  EXPECT_EQ(c.inner_irls, 7);
  EXPECT_EQ(c.blend, 1.0);
  EXPECT_EQ(c.confidence.steepness, 4.0);
  EXPECT_EQ(c.confidence.inlier_midpoint, 0.2);
  EXPECT_EQ(c.confidence.residual_scale, 0.1);
  ASSERT_TRUE(c.connectivity.has_value());
  EXPECT_EQ(*c.connectivity, (std::vector<EdgeKey>{{0, 1}, {1, 2}, {2, 0}}));
  EXPECT_EQ(c.threads, 2);
}

TEST(Config, KeepsBaseForMissingKeys) {
  PipelineConfig base;
  base.tau_p = 0.3;
  const PipelineConfig c = parse_config("gamma = 4\n", base);
  EXPECT_EQ(c.tau_p, 0.3);
  EXPECT_EQ(c.gamma, 4.0);
  EXPECT_EQ(parse_config("").outer_iterations, 4);
}

TEST(Config, FormatRoundTrip) {
  PipelineConfig c;
  c.tau_p = 0.1234567890123;
  c.temperature = 1.0 / 3.0;
  c.connectivity = std::vector<EdgeKey>{{0, 2}, {1, 2}};
  c.confidence.steepness = 0.0;
  const PipelineConfig back = parse_config(format_config(c));
  EXPECT_EQ(back.tau_p, c.tau_p);
  EXPECT_EQ(back.temperature, c.temperature);
  EXPECT_EQ(back.connectivity, c.connectivity);
  EXPECT_EQ(back.confidence.steepness, 0.0);
  EXPECT_EQ(format_config(back), format_config(c));
  EXPECT_FALSE(parse_config(format_config(PipelineConfig{})).connectivity.has_value());
}

TEST(Config, Errors) {
  EXPECT_EQ(code_of([] { parse_config("tau = 0.5\n"); }), ErrorCode::InvalidConfig);
  EXPECT_EQ(code_of([] { parse_config("gamma = 1\ngamma = 2\n"); }), ErrorCode::InvalidConfig);
  EXPECT_EQ(code_of([] { parse_config("gamma 1\n"); }), ErrorCode::InvalidConfig);
  EXPECT_EQ(code_of([] { parse_config("gamma = abc\n"); }), ErrorCode::InvalidConfig);
  EXPECT_EQ(code_of([] { parse_config("outer_iterations = 2.5\n"); }), ErrorCode::InvalidConfig);
  EXPECT_EQ(code_of([] { parse_config("tau_p = 2\n"); }), ErrorCode::InvalidConfig);
  EXPECT_EQ(code_of([] { parse_config("connectivity = 0:1\n"); }), ErrorCode::InvalidConfig);
}

}  // namespace
}  // namespace mvreg
