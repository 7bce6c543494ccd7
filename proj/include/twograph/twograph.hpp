#pragma once

// Umbrella header.

#include "linalg.hpp"
#include "parallel.hpp"
#include "kdtree.hpp"
#include "geometry.hpp"
#include "quasi_random.hpp"
#include "two_valued.hpp"
#include "cones.hpp"
#include "varifold.hpp"
#include "cone_field.hpp"
#include "excess.hpp"
#include "fixtures.hpp"
#include "stationarity.hpp"
#include "decompose.hpp"
#include "linkclass.hpp"
#include "blowup.hpp"
#include "conefit.hpp"
#include "serialization.hpp"
