#pragma once

#include "expplan/errors.hpp"
#include "expplan/rng.hpp"
#include "expplan/core.hpp"
#include "expplan/regression.hpp"
#include "expplan/eluder.hpp"
#include "expplan/planning.hpp"
#include "expplan/environment.hpp"
#include "expplan/evaluation.hpp"
#include "expplan/modsel.hpp"
#include "expplan/treebandit.hpp"
#include "expplan/fixtures.hpp"
#include "expplan/io.hpp"
#include "expplan/harness.hpp"
