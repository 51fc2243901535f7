#pragma once

#include <functional>

namespace tclevy {

// Adaptive Simpson on [a, b]. Handles integrands that underflow to 0 on part
// of the range; integrand must be finite on [a, b].
double adaptive_quad(const std::function<double(double)>& f, double a, double b,
                     double rel_tol = 1e-9, double abs_tol = 1e-14);

} // namespace tclevy
