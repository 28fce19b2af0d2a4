#pragma once

// Umbrella header for the expected sliced transport library.

#include "est/applications.hpp"
#include "est/error.hpp"
#include "est/expected_sliced.hpp"
#include "est/lifting.hpp"
#include "est/measure.hpp"
#include "est/oracles.hpp"
#include "est/slicing.hpp"
