#pragma once

// Umbrella header for the iris recognition toolkit.

#include "iris/common.hpp"
#include "iris/dataset.hpp"
#include "iris/features.hpp"
#include "iris/image.hpp"
#include "iris/lbp.hpp"
#include "iris/localization.hpp"
#include "iris/lvq.hpp"
#include "iris/model_io.hpp"
#include "iris/normalization.hpp"
#include "iris/pipeline.hpp"
#include "iris/runconfig.hpp"
#include "iris/synth.hpp"
