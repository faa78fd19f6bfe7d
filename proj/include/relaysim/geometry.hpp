#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "relaysim/errors.hpp"

namespace relaysim {

/// Closed disk in the plane.
struct Disk {
    Eigen::Vector2d center;
    double radius = 0.0;
};

/// Minimum enclosing circle of a point set.
struct EnclosingCircle {
    Eigen::Vector2d center;
    double radius = 0.0;
};

/// Intersection area of two disks with radii R and r whose centers are d
/// apart. Handles the disjoint (d >= R + r) and containment (d <= |R - r|)
/// branches explicitly; the lens formula's arccos arguments are clamped to
/// [-1, 1] to absorb floating-point drift at the branch boundaries.
/// Throws std::invalid_argument on negative or non-finite inputs.
double lens_area(double R, double r, double d);

/// Density at x of the distance between a fixed point and a point uniform in
/// a disk of radius r whose center is d away. Zero outside the support
/// [max(0, d - r), d + r]. The degenerate case d = 0 is the radial density
/// 2x/r^2 on [0, r]. Throws std::invalid_argument when r <= 0 or inputs are
/// non-finite.
double disk_distance_pdf(double x, double d, double r);

/// Expected intersection area between a disk of radius Rc centered on a fixed
/// point and a disk of radius r_i centered on a point uniform in a disk of
/// radius r_j whose center is d_ij away: the integral of
/// lens_area(Rc, r_i, x) * disk_distance_pdf(x; d_ij, r_j) over the support.
/// Computed by adaptive Simpson quadrature to relative tolerance quad_tol,
/// splitting the domain at the integrand's derivative kinks. The error
/// target is floored at machine precision of the largest possible lens area
/// (pi * min(r_i, Rc)^2): tighter requests would only chase floating-point
/// noise. Throws NumericalError (carrying the partial estimate) if
/// refinement does not converge within its evaluation budget and depth cap,
/// std::invalid_argument on bad inputs.
double average_lens_area(double Rc, double r_i, double d_ij, double r_j,
                         double quad_tol = 1e-8);

/// Smallest circle containing all points (randomized incremental
/// construction with a fixed internal shuffle seed, so the result is
/// deterministic for a given input sequence). Throws std::invalid_argument
/// on an empty or non-finite input.
EnclosingCircle min_enclosing_circle(const std::vector<Eigen::Vector2d>& points);

namespace detail {

/// Adaptive Simpson integration of f over [a, b] to relative tolerance
/// rel_tol, with max_depth refinement levels. The effective tolerance is
/// floored at machine precision of the integral's coarse-pass scale. On
/// non-convergence throws NumericalError carrying the partial estimate
/// accumulated so far.
double adaptive_simpson(const std::function<double(double)>& f, double a,
                        double b, double rel_tol, int max_depth = 60);

} // namespace detail

} // namespace relaysim
