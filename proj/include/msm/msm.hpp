#pragma once

#include "msm/applications.hpp"
#include "msm/baselines.hpp"
#include "msm/bench.hpp"
#include "msm/penalty.hpp"
#include "msm/problem.hpp"
#include "msm/run.hpp"
#include "msm/scalar_prox.hpp"
#include "msm/solver.hpp"
#include "msm/splitting.hpp"
