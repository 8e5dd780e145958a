#include <gtest/gtest.h>

#include "isdq/isdq.hpp"

using namespace isdq;

TEST(Constants, PipelineDefaults)
{
  EXPECT_EQ(sim::ParamSpace{}.m, 300);
  EXPECT_EQ(traj::kDefaultAlpha, 0.5);
  EXPECT_EQ(traj::ClusterConfig{}.alpha, 0.5);
  EXPECT_EQ(traj::ClusterConfig{}.method, traj::ClusterMethod::percentile);
  EXPECT_EQ(rank::kDefaultLambda, 0.1);
  EXPECT_EQ(rank::RankConfig{}.lambda, 0.1);
  EXPECT_EQ(score::BlConfig{}.eps_d, 1.6);
  EXPECT_EQ(score::BlConfig{}.eps_t, 1.0);
  EXPECT_EQ(traj::ClusterConfig{}.eps, 10.0);
  EXPECT_EQ(traj::ClusterConfig{}.min_samples, 5);
  EXPECT_EQ(sim::kSoloParamIndex, 50);
  EXPECT_EQ(sim::theta_star(sim::ParamSpace{}), sim::interpolate_params(sim::ParamSpace{}, 50));
  EXPECT_EQ(sim::kDefaultDt, 0.1);
  EXPECT_EQ(nav::kDefaultCellSize, 0.5);
  EXPECT_EQ(diversity::kDefaultCellsPerSide, 10);
  EXPECT_EQ(score::IsConfig{}.space.m, 300);
}

TEST(Constants, ParameterEndpoints)
{
  const sim::SfParams a = sim::theta_first(), b = sim::theta_last();
  for (const auto& p : {a, b})
  {
    EXPECT_EQ(p.max_speed, 2.6);
    EXPECT_EQ(p.acceleration, 0.5);
    EXPECT_EQ(p.agent_body_force_over_mass, 1500.0);
    EXPECT_EQ(p.wall_body_force_over_mass, 1500.0);
    EXPECT_EQ(p.sliding_friction_over_mass, 3000.0);
    EXPECT_EQ(p.repulsion_wall_B, 0.20);
    EXPECT_EQ(p.repulsion_wall_A_over_mass, 63.33);
    EXPECT_EQ(p.mass, 80.0);
  }
  EXPECT_EQ(a.agent_repulsion_importance, 0.0);
  EXPECT_EQ(a.repulsion_agent_B, 0.01);
  EXPECT_EQ(a.repulsion_agent_A_over_mass, 5.0);
  EXPECT_EQ(b.agent_repulsion_importance, 10.0);
  EXPECT_EQ(b.repulsion_agent_B, 0.28);
  EXPECT_EQ(b.repulsion_agent_A_over_mass, 60.0);
}

TEST(Constants, ScenarioDefaults)
{
  EXPECT_EQ(scene::kDefaultRadius, 0.3);
  EXPECT_EQ(scene::kDefaultMaxSteps, 2000);
  EXPECT_EQ(scene::kDefaultStartTime, 0.0);
}
