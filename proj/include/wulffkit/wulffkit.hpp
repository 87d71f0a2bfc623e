#pragma once

#include "wulffkit/core.hpp"
#include "wulffkit/parallel.hpp"
#include "wulffkit/integrand.hpp"
#include "wulffkit/sphere_grid.hpp"
#include "wulffkit/duality.hpp"
#include "wulffkit/hypersurface.hpp"
#include "wulffkit/curvature.hpp"
#include "wulffkit/distance.hpp"
#include "wulffkit/steiner.hpp"
#include "wulffkit/hk.hpp"
#include "wulffkit/variation.hpp"
#include "wulffkit/scene.hpp"
#include "wulffkit/runner.hpp"
