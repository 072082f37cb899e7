#pragma once

#include "qframe/error.hpp"
#include "qframe/dyadic.hpp"
#include "qframe/state.hpp"
#include "qframe/superposition.hpp"
#include "qframe/arithmetic.hpp"
#include "qframe/gauge.hpp"
#include "qframe/cauchy.hpp"
#include "qframe/dfs.hpp"
#include "qframe/frame_field.hpp"
