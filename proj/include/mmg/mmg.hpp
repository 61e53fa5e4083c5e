#pragma once

// Umbrella header for the whole library.

#include "mmg/classifier.hpp"
#include "mmg/config.hpp"
#include "mmg/errors.hpp"
#include "mmg/fusion.hpp"
#include "mmg/heatmaps.hpp"
#include "mmg/io.hpp"
#include "mmg/manifest.hpp"
#include "mmg/probability.hpp"
#include "mmg/rng.hpp"
#include "mmg/skeleton.hpp"
#include "mmg/synthetic.hpp"
#include "mmg/taylor.hpp"
#include "mmg/tensor.hpp"
