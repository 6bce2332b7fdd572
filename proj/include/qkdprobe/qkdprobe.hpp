#pragma once

#include "qkdprobe/analytic_optimum.hpp"
#include "qkdprobe/distillation.hpp"
#include "qkdprobe/error.hpp"
#include "qkdprobe/geometry.hpp"
#include "qkdprobe/numeric_search.hpp"
#include "qkdprobe/polynomial.hpp"
#include "qkdprobe/possibilities.hpp"
#include "qkdprobe/probe_model.hpp"
#include "qkdprobe/rng.hpp"
#include "qkdprobe/simplex.hpp"
#include "qkdprobe/simulator.hpp"
#include "qkdprobe/special.hpp"
#include "qkdprobe/stationarity.hpp"
