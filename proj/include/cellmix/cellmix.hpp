#pragma once

// Batched in-place patch-shuffle augmentation with a loss-driven
// curriculum controller, reference mixing baselines, and a bit-exact
// tensor batch file format.
//
//   #include <cellmix/cellmix.hpp>
//
// png_io.hpp is not pulled in here; it needs libpng at link time.

#include "cellmix/baselines.hpp"
#include "cellmix/config.hpp"
#include "cellmix/curriculum.hpp"
#include "cellmix/error.hpp"
#include "cellmix/rng.hpp"
#include "cellmix/shuffle.hpp"
#include "cellmix/sim.hpp"
#include "cellmix/tbf.hpp"
#include "cellmix/tensor.hpp"
