#pragma once

#include "gaitid/core.hpp"
#include "gaitid/experiment.hpp"
#include "gaitid/features.hpp"
#include "gaitid/kelm.hpp"
#include "gaitid/projection.hpp"
#include "gaitid/pso.hpp"
#include "gaitid/serialize.hpp"
#include "gaitid/signal_io.hpp"
#include "gaitid/splits.hpp"
#include "gaitid/statistics.hpp"
#include "gaitid/synthetic.hpp"
#include "gaitid/timeseries.hpp"
