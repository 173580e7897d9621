#pragma once

#include "pwcg/error.hpp"
#include "pwcg/experiment.hpp"
#include "pwcg/metrics.hpp"
#include "pwcg/plan_io.hpp"
#include "pwcg/planner.hpp"
#include "pwcg/simulator.hpp"
#include "pwcg/spectrum.hpp"
#include "pwcg/topology.hpp"
#include "pwcg/topology_io.hpp"
#include "pwcg/traffic.hpp"
