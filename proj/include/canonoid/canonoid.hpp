#pragma once

#include "canonoid/dual.hpp"
#include "canonoid/dynamics.hpp"
#include "canonoid/errors.hpp"
#include "canonoid/expr.hpp"
#include "canonoid/geometry.hpp"
#include "canonoid/matrix.hpp"
#include "canonoid/quadrature.hpp"
#include "canonoid/sampling.hpp"
#include "canonoid/stensor.hpp"
#include "canonoid/transform.hpp"
