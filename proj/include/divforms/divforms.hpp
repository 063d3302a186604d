#pragma once

#include "arith.hpp"
#include "bilinear.hpp"
#include "config.hpp"
#include "divisor_sums.hpp"
#include "errors.hpp"
#include "experiments.hpp"
#include "fit.hpp"
#include "forms.hpp"
#include "int128.hpp"
#include "lattice.hpp"
#include "parallel.hpp"
#include "rational.hpp"
#include "region.hpp"
#include "singular_series.hpp"
