#pragma once

#include "xmint/coefficients.hpp"
#include "xmint/csv.hpp"
#include "xmint/dataset.hpp"
#include "xmint/error.hpp"
#include "xmint/path.hpp"
#include "xmint/precision.hpp"
#include "xmint/rng.hpp"
#include "xmint/score.hpp"
#include "xmint/simulate.hpp"
#include "xmint/solver.hpp"
