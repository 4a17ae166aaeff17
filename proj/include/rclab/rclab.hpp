#pragma once

#include "rclab/graph.hpp"
#include "rclab/robustness.hpp"
#include "rclab/messaging.hpp"
#include "rclab/agents.hpp"
#include "rclab/adversary.hpp"
#include "rclab/engine.hpp"
#include "rclab/config.hpp"
#include "rclab/trace_io.hpp"
#include "rclab/oracles.hpp"
