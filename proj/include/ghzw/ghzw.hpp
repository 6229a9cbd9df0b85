// Umbrella header.

#pragma once

#include "ghzw/analysis.hpp"
#include "ghzw/io.hpp"
#include "ghzw/optimize.hpp"
#include "ghzw/povm.hpp"
#include "ghzw/random.hpp"
#include "ghzw/states.hpp"
#include "ghzw/tomography.hpp"
#include "ghzw/unitaries.hpp"
