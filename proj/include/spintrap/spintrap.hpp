#pragma once

#include "spintrap/bessel.hpp"
#include "spintrap/dynamics.hpp"
#include "spintrap/errors.hpp"
#include "spintrap/io.hpp"
#include "spintrap/modes.hpp"
#include "spintrap/quadrature.hpp"
#include "spintrap/quantum.hpp"
#include "spintrap/trap.hpp"
