#pragma once

#include <cdst/types.hpp>
#include <cdst/graph.hpp>
#include <cdst/rng.hpp>
#include <cdst/generator.hpp>
#include <cdst/instance_io.hpp>
#include <cdst/dijkstra.hpp>
#include <cdst/future_cost.hpp>
#include <cdst/tree.hpp>
#include <cdst/search_engine.hpp>
#include <cdst/tree_builder.hpp>
#include <cdst/cd_solver.hpp>
#include <cdst/topology.hpp>
#include <cdst/baselines.hpp>
#include <cdst/embedding.hpp>
#include <cdst/oracle.hpp>
