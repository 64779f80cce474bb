#pragma once

#include "collapsim/chain.hpp"
#include "collapsim/distributions.hpp"
#include "collapsim/estimators.hpp"
#include "collapsim/io.hpp"
#include "collapsim/metrics.hpp"
#include "collapsim/rng.hpp"
#include "collapsim/theory.hpp"
#include "collapsim/version.hpp"
