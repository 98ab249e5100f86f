#pragma once

#include <rcising/currents.hpp>
#include <rcising/error.hpp>
#include <rcising/experiments/avoidance.hpp>
#include <rcising/experiments/diagrams.hpp>
#include <rcising/experiments/iic.hpp>
#include <rcising/experiments/local_events.hpp>
#include <rcising/experiments/mixing.hpp>
#include <rcising/experiments/regular_scales.hpp>
#include <rcising/experiments/susceptibility.hpp>
#include <rcising/experiments/two_point.hpp>
#include <rcising/graphs.hpp>
#include <rcising/io.hpp>
#include <rcising/lattice.hpp>
#include <rcising/oracles/identities.hpp>
#include <rcising/oracles/parity_enum.hpp>
#include <rcising/oracles/spin.hpp>
#include <rcising/oracles/trace_law.hpp>
#include <rcising/parallel.hpp>
#include <rcising/rng.hpp>
#include <rcising/samplers.hpp>
#include <rcising/stats.hpp>
#include <rcising/union_find.hpp>
