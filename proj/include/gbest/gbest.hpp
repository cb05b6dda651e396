#pragma once

// Umbrella header for the gbest library.

#include "gbest/bench.hpp"
#include "gbest/beta_stacy.hpp"
#include "gbest/bootstrap.hpp"
#include "gbest/config.hpp"
#include "gbest/cox.hpp"
#include "gbest/csv.hpp"
#include "gbest/data.hpp"
#include "gbest/ensemble.hpp"
#include "gbest/error.hpp"
#include "gbest/estimators.hpp"
#include "gbest/eval.hpp"
#include "gbest/regression.hpp"
#include "gbest/rng.hpp"
#include "gbest/sim.hpp"
#include "gbest/svg.hpp"
#include "gbest/tree.hpp"
#include "gbest/weibull.hpp"
