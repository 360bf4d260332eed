#pragma once

// Fourier-mode analysis of Vekua-type operators Pu = Lu - q u - p conj(u)
// on products of the circle and the 3-sphere: unitary dual enumeration,
// coefficient fields, diagonal symbols, the constant-coefficient mode
// solver and classifiers, and the time-dependent quadrature engine.

#include "vekua/base.hpp"
#include "vekua/group.hpp"
#include "vekua/parallel.hpp"
#include "vekua/powerlaw.hpp"
#include "vekua/field.hpp"
#include "vekua/symbol.hpp"
#include "vekua/constvekua.hpp"
#include "vekua/odevekua.hpp"
#include "vekua/io.hpp"
