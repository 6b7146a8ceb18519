#pragma once

// Umbrella header.

#include "phrelu/errors.hpp"
#include "phrelu/types.hpp"
#include "phrelu/random.hpp"
#include "phrelu/geometry.hpp"
#include "phrelu/dataset.hpp"
#include "phrelu/model.hpp"
#include "phrelu/parallel.hpp"
#include "phrelu/inference.hpp"
#include "phrelu/data.hpp"
#include "phrelu/evaluation.hpp"
#include "phrelu/decomposition.hpp"
#include "phrelu/snapshot.hpp"
#include "phrelu/cli.hpp"
