#pragma once

// Umbrella header.

#include "dincl/interval.hpp"
#include "dincl/expr.hpp"
#include "dincl/system.hpp"
#include "dincl/polymodel.hpp"
#include "dincl/inputs.hpp"
#include "dincl/flow.hpp"
#include "dincl/localerr.hpp"
#include "dincl/reach.hpp"
#include "dincl/scenario.hpp"
#include "dincl/tables.hpp"
