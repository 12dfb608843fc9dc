#pragma once

#include "eitmodes/bpm.hpp"
#include "eitmodes/decomposition.hpp"
#include "eitmodes/dispersion.hpp"
#include "eitmodes/error.hpp"
#include "eitmodes/field.hpp"
#include "eitmodes/io.hpp"
#include "eitmodes/physics.hpp"
#include "eitmodes/radial_solver.hpp"
#include "eitmodes/tridiagonal.hpp"
