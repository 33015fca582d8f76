#pragma once

#include "kirchhoff/classify.hpp"
#include "kirchhoff/errors.hpp"
#include "kirchhoff/functional.hpp"
#include "kirchhoff/gn_ground_state.hpp"
#include "kirchhoff/models.hpp"
#include "kirchhoff/moser.hpp"
#include "kirchhoff/omega_thresholds.hpp"
#include "kirchhoff/radial_grid.hpp"
#include "kirchhoff/solver.hpp"
#include "kirchhoff/sweep.hpp"
#include "kirchhoff/tridiag.hpp"
