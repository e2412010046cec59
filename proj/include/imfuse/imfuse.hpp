#pragma once
// Umbrella header for the imfuse library.

#include "imfuse/calibration.hpp"
#include "imfuse/contour.hpp"
#include "imfuse/csv.hpp"
#include "imfuse/errors.hpp"
#include "imfuse/fusion.hpp"
#include "imfuse/grid.hpp"
#include "imfuse/harness.hpp"
#include "imfuse/measures.hpp"
#include "imfuse/rng.hpp"
