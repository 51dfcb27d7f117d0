#pragma once

#include "biofilm/config.hpp"
#include "biofilm/config_io.hpp"
#include "biofilm/emit.hpp"
#include "biofilm/errors.hpp"
#include "biofilm/grid.hpp"
#include "biofilm/integrator.hpp"
#include "biofilm/model.hpp"
#include "biofilm/observe.hpp"
#include "biofilm/run.hpp"
#include "biofilm/signals.hpp"
#include "biofilm/sweep.hpp"
#include "biofilm/types.hpp"
