#pragma once

#include "hawkes/errors.hpp"
#include "hawkes/rng.hpp"
#include "hawkes/quadrature.hpp"
#include "hawkes/kernel.hpp"
#include "hawkes/baseline.hpp"
#include "hawkes/marks.hpp"
#include "hawkes/model.hpp"
#include "hawkes/volterra.hpp"
#include "hawkes/cache.hpp"
#include "hawkes/transform.hpp"
#include "hawkes/partitions.hpp"
#include "hawkes/distribution.hpp"
#include "hawkes/darkpool.hpp"
#include "hawkes/simulate.hpp"
#include "hawkes/estimator.hpp"
#include "hawkes/config.hpp"

namespace hawkes {
inline constexpr const char* kVersion = "0.1.0";
}
