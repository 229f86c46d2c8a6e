#pragma once

#include "medirl/ablate.hpp"
#include "medirl/config.hpp"
#include "medirl/error.hpp"
#include "medirl/experiment.hpp"
#include "medirl/grid.hpp"
#include "medirl/maxent.hpp"
#include "medirl/prediction.hpp"
#include "medirl/random.hpp"
#include "medirl/reward_net.hpp"
#include "medirl/train.hpp"
#include "medirl/trajectory.hpp"
