#pragma once

#include "apkin/ap_scheme.hpp"
#include "apkin/config.hpp"
#include "apkin/diagnostics.hpp"
#include "apkin/energy.hpp"
#include "apkin/errors.hpp"
#include "apkin/lemmas.hpp"
#include "apkin/output.hpp"
#include "apkin/random.hpp"
#include "apkin/reference_solvers.hpp"
#include "apkin/spatial_grid.hpp"
#include "apkin/velocity.hpp"
