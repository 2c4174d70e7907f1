#pragma once

/// Umbrella header for the rmiga library (the CLI layer lives in rmiga/cli.hpp).

#include "rmiga/errors.hpp"
#include "rmiga/bspline.hpp"
#include "rmiga/tensor_space.hpp"
#include "rmiga/quadrature_mesh.hpp"
#include "rmiga/forms.hpp"
#include "rmiga/assembly_solver.hpp"
#include "rmiga/verification.hpp"
#include "rmiga/experiment.hpp"
