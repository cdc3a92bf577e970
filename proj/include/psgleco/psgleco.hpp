#pragma once

// Projected stochastic gradient method for finite-sum minimization under
// deterministic linear equality constraints, with exact and residual-
// controlled inexact projections and three step-length strategies.

#include "psgleco/constraintgen.hpp"
#include "psgleco/errors.hpp"
#include "psgleco/experiment.hpp"
#include "psgleco/ingest.hpp"
#include "psgleco/objectives.hpp"
#include "psgleco/projection.hpp"
#include "psgleco/rng.hpp"
#include "psgleco/sampling.hpp"
#include "psgleco/solver.hpp"
#include "psgleco/steplength.hpp"
