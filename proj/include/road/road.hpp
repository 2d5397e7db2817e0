#pragma once

#include "road/bounds.hpp"
#include "road/core.hpp"
#include "road/counterexample.hpp"
#include "road/estimators.hpp"
#include "road/experiments.hpp"
#include "road/io.hpp"
#include "road/parallel.hpp"
#include "road/rng.hpp"
#include "road/solver.hpp"
#include "road/svg.hpp"
