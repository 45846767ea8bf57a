#pragma once

#include "optexec/errors.hpp"
#include "optexec/market_model.hpp"
#include "optexec/legendre.hpp"
#include "optexec/hamiltonian_solver.hpp"
#include "optexec/objective.hpp"
#include "optexec/closed_forms.hpp"
#include "optexec/pricing.hpp"
#include "optexec/value_function.hpp"
#include "optexec/montecarlo.hpp"
#include "optexec/config.hpp"
#include "optexec/io.hpp"
