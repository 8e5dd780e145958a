#pragma once

#include "isdq/diversity.hpp"
#include "isdq/generators.hpp"
#include "isdq/geometry.hpp"
#include "isdq/nav.hpp"
#include "isdq/rank.hpp"
#include "isdq/scene.hpp"
#include "isdq/scene_io.hpp"
#include "isdq/score.hpp"
#include "isdq/sim.hpp"
#include "isdq/traj.hpp"
#include "isdq/svg.hpp"
