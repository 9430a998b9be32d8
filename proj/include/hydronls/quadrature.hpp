#pragma once

#include <span>

#include "hydronls/grid.hpp"

namespace hydronls {

/// Rectangle rule h^n * sum(samples). Spectrally accurate for smooth periodic
/// or rapidly decaying integrands.
double quadrature_integrate(std::span<const double> samples, const Grid& grid);

}  // namespace hydronls

#include <functional>

namespace hydronls {

/// Adaptive Simpson quadrature of f over [a, b] to absolute tolerance `abs_tol`
/// (Richardson-corrected). Throws SolverError when the recursion depth is exhausted.
double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double abs_tol,
                        int max_depth = 50);

}  // namespace hydronls
