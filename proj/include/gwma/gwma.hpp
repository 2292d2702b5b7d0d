#pragma once

#include "gwma/version.hpp"
#include "gwma/errors.hpp"
#include "gwma/normal.hpp"
#include "gwma/chart.hpp"
#include "gwma/rng.hpp"
#include "gwma/accum.hpp"
#include "gwma/markov.hpp"
#include "gwma/simulate.hpp"
#include "gwma/calibrate.hpp"
