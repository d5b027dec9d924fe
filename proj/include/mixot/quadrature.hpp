#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "mixot/common.hpp"

namespace mixot {

using Fn1 = std::function<double(double)>;
using FnN = std::function<double(const Vec&)>;

// Adaptive Gauss–Kronrod integration on [a, b].  `tol` is the relative
// error target against the L1 mass of the integrand.
double integrate(const Fn1& f, double a, double b, double tol = 1e-10);

// Integrate over a union of intervals.  Overlapping or touching intervals
// are merged first so shared mass is not double counted.
double integrate_union(const Fn1& f, std::vector<std::pair<double, double>> intervals,
                       double tol = 1e-10);

// Tensor-product composite Gauss–Legendre rule over a box, dimension <= 3.
// Each axis is split into `panels` equal panels carrying a `points`-node rule.
double integrate_box(const FnN& f, const Box& box, int panels = 8, int points = 16);

// Gauss–Hermite nodes and weights for the weight function exp(-x^2),
// computed from the Jacobi matrix of the Hermite recurrence.
std::pair<Vec, Vec> gauss_hermite(int n);

// Composite Gauss–Legendre nodes/weights on [a, b].
std::pair<Vec, Vec> gauss_legendre_panels(double a, double b, int panels, int points);

}  // namespace mixot
