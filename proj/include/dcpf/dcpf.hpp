#pragma once

#include "dcpf/baselines.hpp"
#include "dcpf/config.hpp"
#include "dcpf/dynamics.hpp"
#include "dcpf/feasible_set.hpp"
#include "dcpf/graph.hpp"
#include "dcpf/harness.hpp"
#include "dcpf/metrics.hpp"
#include "dcpf/objective.hpp"
#include "dcpf/run_record.hpp"
#include "dcpf/schedule.hpp"
