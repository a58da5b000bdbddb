#pragma once

#include "wot/version.hpp"
#include "wot/rng.hpp"
#include "wot/paths.hpp"
#include "wot/quadrature.hpp"
#include "wot/norms.hpp"
#include "wot/measure.hpp"
#include "wot/cost.hpp"
#include "wot/transport.hpp"
#include "wot/sinkhorn.hpp"
#include "wot/duality.hpp"
#include "wot/rays.hpp"
#include "wot/grid.hpp"
#include "wot/entropy.hpp"
#include "wot/experiments.hpp"
