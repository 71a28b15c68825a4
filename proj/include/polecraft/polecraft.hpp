#pragma once

#include "polecraft/bench.hpp"
#include "polecraft/errors.hpp"
#include "polecraft/io.hpp"
#include "polecraft/matcore.hpp"
#include "polecraft/model.hpp"
#include "polecraft/rng.hpp"
#include "polecraft/solver.hpp"
#include "polecraft/step_complex.hpp"
#include "polecraft/step_real.hpp"
#include "polecraft/tolerances.hpp"
