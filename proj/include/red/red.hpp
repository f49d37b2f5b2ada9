#pragma once

// Umbrella header for the relational entropic dynamics library.

#include "red/error.hpp"
#include "red/spec.hpp"
#include "red/field.hpp"
#include "red/spectral.hpp"
#include "red/state.hpp"
#include "red/rng.hpp"
#include "red/parallel.hpp"
#include "red/sampler.hpp"
#include "red/fields.hpp"
#include "red/geometry.hpp"
#include "red/quantum.hpp"
#include "red/presets.hpp"
