#include <gtest/gtest.h>

#include <cstdio>

#include <driftscan_cli/commands.hpp>

namespace driftscan::cli {
namespace {

TEST(Cli, PowerTableRegionalDetectionAtDeskHorizon) {
  PowerOptions o;
  o.T = 2000.0;
  o.etas = {0.05};
  o.alphas = {0.05};
  o.reps = 50;
  CommonOptions c;
  c.workers = 4;
  const auto rows = cmd_power_table(o, c);
  ASSERT_EQ(rows.size(), 1u);
  std::printf("right-region detection frequency %.2f\n", rows[0].regional[2]);
  EXPECT_GE(rows[0].regional[2], 0.8);
}

}  // namespace
}  // namespace driftscan::cli
