#pragma once

// Geodesic random walks on the catalog manifolds and their horizontal lifts
// to the orthonormal frame bundle, with the numerical machinery to compare
// the rescaled walk generator against the horizontal Laplacian and the walk
// law against heat-semigroup references.

#include "horizon/catalog.hpp"
#include "horizon/config.hpp"
#include "horizon/convergence.hpp"
#include "horizon/frame_bundle.hpp"
#include "horizon/generator.hpp"
#include "horizon/geodesic.hpp"
#include "horizon/heat.hpp"
#include "horizon/holonomy.hpp"
#include "horizon/increments.hpp"
#include "horizon/io.hpp"
#include "horizon/manifold.hpp"
#include "horizon/quadrature.hpp"
#include "horizon/rng.hpp"
#include "horizon/test_functions.hpp"
#include "horizon/version.hpp"
#include "horizon/walker.hpp"
