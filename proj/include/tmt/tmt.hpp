#pragma once

#include "tmt/analytics.hpp"
#include "tmt/cli.hpp"
#include "tmt/config_io.hpp"
#include "tmt/csv.hpp"
#include "tmt/distribution.hpp"
#include "tmt/error.hpp"
#include "tmt/model.hpp"
#include "tmt/sim/simulator.hpp"
#include "tmt/threshold.hpp"
#include "tmt/topology.hpp"
#include "tmt/traffic.hpp"
#include "tmt/units.hpp"
