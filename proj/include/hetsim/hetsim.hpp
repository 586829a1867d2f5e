#pragma once

#include "hetsim/association.hpp"
#include "hetsim/default_scenario.hpp"
#include "hetsim/eicic.hpp"
#include "hetsim/engine.hpp"
#include "hetsim/environment.hpp"
#include "hetsim/experiment.hpp"
#include "hetsim/geometry.hpp"
#include "hetsim/metrics.hpp"
#include "hetsim/radio.hpp"
#include "hetsim/random.hpp"
#include "hetsim/scenario.hpp"
#include "hetsim/scenario_json.hpp"
