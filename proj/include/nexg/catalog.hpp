#pragma once

#include "nexg/dynamics.hpp"

#include <string>
#include <vector>

namespace nexg::catalog {

/// xdot = (1, 0). Translation-invariant flow.
ClosedLoopSystem constant_field();
/// xdot1 = x2, xdot2 = -x1.
ClosedLoopSystem rotation();
/// Double integrator closed with a linear one-layer controller u = -x1 - 0.4 x2.
ClosedLoopSystem damped_oscillator();
/// Van der Pol plant (mu = 0.5) with a small tanh feedback controller.
ClosedLoopSystem vanderpol();
/// Three-dimensional polynomial system, autonomous.
ClosedLoopSystem poly3d();

std::vector<std::string> names();
/// Throws InputError for unknown names.
ClosedLoopSystem by_name(const std::string& name);

}  // namespace nexg::catalog
