#pragma once

#include "covering/decision.hpp"
#include "covering/decomposition.hpp"
#include "covering/error.hpp"
#include "covering/family.hpp"
#include "covering/hypothesis_set.hpp"
#include "covering/local_tests.hpp"
#include "covering/simulation.hpp"

#define COVERING_VERSION "0.1.0"
