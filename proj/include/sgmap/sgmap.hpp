#pragma once

#include "sgmap/harness.hpp"
#include "sgmap/io.hpp"
#include "sgmap/lasso.hpp"
#include "sgmap/map_estimator.hpp"
#include "sgmap/model.hpp"
#include "sgmap/oracles.hpp"
#include "sgmap/parallel.hpp"
#include "sgmap/priors.hpp"
#include "sgmap/rng.hpp"
