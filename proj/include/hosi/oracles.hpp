#pragma once

// Ground truth for the estimators: closed forms for product, rectangle and
// additive functions, and exhaustive values on grid functions.

#include "hosi/oracles/closed_forms.hpp"
#include "hosi/oracles/factors.hpp"
#include "hosi/oracles/grid.hpp"
