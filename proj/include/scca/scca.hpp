#pragma once

// Umbrella header for the sparse CCA workbench.

#include "scca/config.hpp"
#include "scca/csv.hpp"
#include "scca/errors.hpp"
#include "scca/estimators.hpp"
#include "scca/harness.hpp"
#include "scca/matrix.hpp"
#include "scca/model.hpp"
#include "scca/perturb.hpp"
#include "scca/rng.hpp"
#include "scca/sampler.hpp"
