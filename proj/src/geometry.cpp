#include "relaysim/geometry.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "relaysim/rng.hpp"

namespace relaysim {

namespace {

constexpr double kPi = 3.14159265358979323846;

bool all_finite(std::initializer_list<double> xs) {
    for (double x : xs)
        if (!std::isfinite(x)) return false;
    return true;
}

// 4x the area of the triangle with side lengths a, b, c. Kahan's ordering of
// the Heron factors keeps full relative accuracy for needle-like triangles —
// exactly the shape that arises when two disks barely overlap — where the
// textbook (a+b+c)(...) product loses every significant digit of the thin
// factor. Degenerate side sets (no triangle) yield 0.
double triangle_area_x4(double a, double b, double c) {
    if (a < b) std::swap(a, b);
    if (b < c) std::swap(b, c);
    if (a < b) std::swap(a, b);
    double k = (a + (b + c)) * std::max(0.0, c - (a - b)) * (c + (a - b)) * (a + (b - c));
    return std::sqrt(std::max(0.0, k));
}

// Angle opposite side c in the triangle with sides a, b, c. The atan2 form
// stays accurate where acos((a^2+b^2-c^2)/(2ab)) loses all precision, i.e.
// when the cosine lands within rounding noise of +-1. Degenerate triangles
// collapse to 0 (c <= |a-b|) or pi (c >= a+b).
double triangle_angle(double a, double b, double c) {
    return std::atan2(triangle_area_x4(a, b, c), (a - c) * (a + c) + b * b);
}

// Area of the circular segment cut from a disk of radius rho by a chord at
// half-angle alpha in [0, pi] (the region between chord and arc). The odd
// series takes over for small alpha, where the direct difference
// alpha - sin(alpha)cos(alpha) would cancel to rounding noise.
double segment_area(double rho, double alpha) {
    double core;
    if (alpha < 0.05) {
        double a2 = alpha * alpha;
        core = alpha * a2 * (2.0 / 3.0 - a2 * (2.0 / 15.0 - a2 * (4.0 / 315.0)));
    } else {
        core = alpha - 0.5 * std::sin(2.0 * alpha);
    }
    return rho * rho * core;
}

} // namespace

double lens_area(double R, double r, double d) {
    if (!all_finite({R, r, d}) || R < 0.0 || r < 0.0 || d < 0.0)
        throw std::invalid_argument("lens_area: radii and distance must be finite and non-negative");
    if (d >= R + r) return 0.0;
    double rmin = std::min(R, r);
    if (d <= std::abs(R - r)) return kPi * rmin * rmin;
    // Proper lens: the two circular segments cut off by the common chord.
    // Each term is evaluated in a cancellation-free form so that
    // near-tangent overlaps (d within rounding distance of R + r) keep
    // relative accuracy instead of drowning in noise of magnitude R^2*eps.
    double alpha_R = triangle_angle(d, R, r); // half-angle at the R-disk center
    double alpha_r = triangle_angle(d, r, R); // half-angle at the r-disk center
    return segment_area(R, alpha_R) + segment_area(r, alpha_r);
}

double disk_distance_pdf(double x, double d, double r) {
    if (!all_finite({x, d, r}) || r <= 0.0 || d < 0.0)
        throw std::invalid_argument("disk_distance_pdf: need finite x, d >= 0, r > 0");
    double lo = std::max(0.0, d - r);
    double hi = d + r;
    if (x < lo || x > hi || x <= 0.0) return 0.0;
    if (d == 0.0) return 2.0 * x / (r * r);
    // Angle at the reference point between the disk center direction and the
    // circle of radius x, via the same stable triangle form as lens_area. In
    // the inner region x + d <= r the triangle degenerates and the angle
    // collapses to pi, reproducing the uniform radial density 2x/r^2.
    return (2.0 * x / (kPi * r * r)) * triangle_angle(x, d, r);
}

namespace detail {

namespace {

// Shared refinement state. `budget` caps the total number of integrand
// evaluations so that an unreachable tolerance degrades into a flagged
// partial estimate instead of an exponentially exploding recursion tree.
// `eps_floor` is the smallest meaningful local error target: requests below
// machine precision of the integral's overall scale would only chase
// floating-point noise in the integrand, so refinement stops there.
struct SimpsonState {
    const std::function<double(double)>& f;
    long long budget;
    double eps_floor = 0.0;
    bool failed = false;

    double eval(double x) {
        --budget;
        return f(x);
    }
};

double simpson_recurse(SimpsonState& st, double a, double b, double fa, double fm,
                       double fb, double whole, double eps, int depth) {
    if (depth <= 0) {
        st.failed = true;
        return whole; // best available estimate for this panel
    }
    double m = 0.5 * (a + b);
    if (!(a < m && m < b)) {
        // Sub-ulp panel: no representable interior point, so the estimate
        // cannot be checked. Accept it only while its whole contribution is
        // already negligible against the error target.
        if (std::abs(whole) > 15.0 * eps) st.failed = true;
        return whole;
    }
    double flm = st.eval(0.5 * (a + m));
    double frm = st.eval(0.5 * (m + b));
    double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    double delta = left + right - whole;
    if (std::abs(delta) <= 15.0 * eps || st.budget <= 0) {
        if (st.budget <= 0) st.failed = true;
        // Richardson extrapolation; on budget exhaustion it is the best
        // partial estimate this panel can produce.
        return left + right + delta / 15.0;
    }
    const double child_eps = std::max(0.5 * eps, st.eps_floor);
    return simpson_recurse(st, a, m, fa, flm, fm, left, child_eps, depth - 1) +
           simpson_recurse(st, m, b, fm, frm, fb, right, child_eps, depth - 1);
}

// Core driver with an absolute error target; used both by the public
// relative-tolerance entry point and by average_lens_area, which shares one
// error scale across several kink-split subintervals.
double simpson_panel(SimpsonState& st, double a, double b, double eps_abs, int max_depth) {
    double fa = st.eval(a);
    double fm = st.eval(0.5 * (a + b));
    double fb = st.eval(b);
    double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return simpson_recurse(st, a, b, fa, fm, fb, whole, eps_abs, max_depth);
}

} // namespace

double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double rel_tol, int max_depth) {
    if (!(rel_tol > 0.0) || !std::isfinite(a) || !std::isfinite(b))
        throw std::invalid_argument("adaptive_simpson: bad interval or tolerance");
    if (a == b) return 0.0;
    // Coarse composite pass to set the absolute-error scale for the relative
    // tolerance.
    const int n0 = 32;
    double h = (b - a) / n0;
    double coarse = 0.0;
    for (int i = 0; i < n0; ++i) {
        double x0 = a + i * h;
        coarse += h / 6.0 * (f(x0) + 4.0 * f(x0 + 0.5 * h) + f(x0 + h));
    }
    double scale = std::max(std::abs(coarse), 1e-30);
    SimpsonState st{f, 2'000'000};
    st.eps_floor = std::numeric_limits<double>::epsilon() * scale;
    double result = simpson_panel(st, a, b, std::max(rel_tol * scale, st.eps_floor), max_depth);
    if (st.failed)
        throw NumericalError("adaptive_simpson: refinement budget exhausted", result);
    return result;
}

} // namespace detail

double average_lens_area(double Rc, double r_i, double d_ij, double r_j, double quad_tol) {
    if (!all_finite({Rc, r_i, d_ij, r_j}) || Rc <= 0.0 || r_i <= 0.0 || r_j <= 0.0 ||
        d_ij < 0.0 || !(quad_tol > 0.0))
        throw std::invalid_argument("average_lens_area: need finite Rc, r_i, r_j > 0, d_ij >= 0, quad_tol > 0");
    double lo = std::max(0.0, d_ij - r_j);
    double hi = d_ij + r_j;
    // Exact short-circuits: the lens is constant over the whole support.
    if (lo >= Rc + r_i) return 0.0;                         // never overlapping
    if (Rc >= r_i && hi <= Rc - r_i) return kPi * r_i * r_i; // always contained
    if (r_i > Rc && hi <= r_i - Rc) return kPi * Rc * Rc;    // Rc-disk always inside
    if (d_ij == 0.0) {
        // Degenerate support [ -r_j.. ] collapses to [0, r_j] with the radial
        // density; fall through with the same integrand (pdf handles d = 0).
        lo = 0.0;
    }

    auto integrand = [&](double x) {
        return lens_area(Rc, r_i, x) * disk_distance_pdf(x, d_ij, r_j);
    };

    // Split at the integrand's derivative kinks: lens branch transitions and,
    // when the pdf center lies inside the disk, the pdf's own regime change.
    std::vector<double> cuts = {lo, hi};
    auto add_cut = [&](double c) {
        if (c > lo && c < hi) cuts.push_back(c);
    };
    add_cut(std::abs(Rc - r_i));
    add_cut(Rc + r_i);
    if (d_ij < r_j) add_cut(r_j - d_ij);
    std::sort(cuts.begin(), cuts.end());

    // One coarse pass over every subinterval fixes a common absolute error
    // scale: panels where the integrand nearly vanishes must not chase a
    // relative tolerance of their own.
    std::vector<std::pair<double, double>> panels;
    double coarse_total = 0.0;
    for (std::size_t s = 0; s + 1 < cuts.size(); ++s) {
        double a = cuts[s];
        double b = cuts[s + 1];
        if (a >= Rc + r_i) break; // lens identically zero from here on
        if (b <= a) continue;
        panels.emplace_back(a, b);
        const int n0 = 16;
        double h = (b - a) / n0;
        for (int i = 0; i < n0; ++i) {
            double x0 = a + i * h;
            coarse_total += h / 6.0 *
                            (integrand(x0) + 4.0 * integrand(x0 + 0.5 * h) + integrand(x0 + h));
        }
    }
    if (panels.empty()) return 0.0;
    // The result is an expected lens area, so its natural scale is the
    // largest value the lens can take. Error requests below machine
    // precision of that scale would only chase floating-point noise (or, for
    // ulp-wide grazing supports, a value smaller than the scale's own
    // rounding error), so the refinement target is floored there.
    const double natural_scale = kPi * std::min(r_i, Rc) * std::min(r_i, Rc);
    double eps_abs =
        quad_tol * std::max(coarse_total, 1e-30) / static_cast<double>(panels.size());

    detail::SimpsonState st{integrand, 2'000'000};
    st.eps_floor = std::numeric_limits<double>::epsilon() * natural_scale;
    eps_abs = std::max(eps_abs, st.eps_floor);
    double total = 0.0;
    for (auto [a, b] : panels)
        total += detail::simpson_panel(st, a, b, eps_abs, 60);
    if (st.failed) {
        std::ostringstream msg;
        msg.precision(17);
        msg << "average_lens_area: quadrature did not converge (Rc=" << Rc << ", r_i=" << r_i
            << ", d_ij=" << d_ij << ", r_j=" << r_j << ", quad_tol=" << quad_tol << ")";
        throw NumericalError(msg.str(), total);
    }
    return total;
}

namespace {

const double kContainsSlack = 1e-10;

bool circle_contains(const EnclosingCircle& c, const Eigen::Vector2d& p) {
    if (c.radius < 0.0) return false;
    double eps = kContainsSlack * std::max(1.0, c.radius);
    return (p - c.center).norm() <= c.radius + eps;
}

EnclosingCircle circle_from_2(const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
    EnclosingCircle c;
    c.center = 0.5 * (a + b);
    c.radius = 0.5 * (a - b).norm();
    return c;
}

EnclosingCircle circle_from_3(const Eigen::Vector2d& a, const Eigen::Vector2d& b,
                              const Eigen::Vector2d& c) {
    Eigen::Vector2d B = b - a;
    Eigen::Vector2d C = c - a;
    double d = 2.0 * (B.x() * C.y() - B.y() * C.x());
    double scale = std::max({B.squaredNorm(), C.squaredNorm(), 1e-300});
    if (std::abs(d) > 1e-12 * scale) {
        double bn = B.squaredNorm();
        double cn = C.squaredNorm();
        Eigen::Vector2d u((C.y() * bn - B.y() * cn) / d, (B.x() * cn - C.x() * bn) / d);
        EnclosingCircle out;
        out.center = a + u;
        out.radius = u.norm();
        return out;
    }
    // Collinear (or nearly so): the minimal circle through all three is the
    // diametral circle of the farthest pair.
    EnclosingCircle best;
    best.radius = -1.0;
    for (auto [p, q] : {std::pair{a, b}, std::pair{a, c}, std::pair{b, c}}) {
        EnclosingCircle cand = circle_from_2(p, q);
        if (cand.radius > best.radius) best = cand;
    }
    return best;
}

EnclosingCircle circle_from_boundary(const Eigen::Vector2d* R, int nb) {
    switch (nb) {
        case 1: return {R[0], 0.0};
        case 2: return circle_from_2(R[0], R[1]);
        case 3: return circle_from_3(R[0], R[1], R[2]);
        default: {
            EnclosingCircle none;
            none.center = Eigen::Vector2d::Zero();
            none.radius = -1.0; // sentinel: contains() is false for every point
            return none;
        }
    }
}

EnclosingCircle welzl(const std::vector<Eigen::Vector2d>& pts, std::size_t n,
                      Eigen::Vector2d* R, int nb) {
    if (n == 0 || nb == 3) return circle_from_boundary(R, nb);
    const Eigen::Vector2d& p = pts[n - 1];
    EnclosingCircle c = welzl(pts, n - 1, R, nb);
    if (circle_contains(c, p)) return c;
    R[nb] = p;
    return welzl(pts, n - 1, R, nb + 1);
}

} // namespace

EnclosingCircle min_enclosing_circle(const std::vector<Eigen::Vector2d>& points) {
    if (points.empty())
        throw std::invalid_argument("min_enclosing_circle: empty point set");
    for (const auto& p : points)
        if (!std::isfinite(p.x()) || !std::isfinite(p.y()))
            throw std::invalid_argument("min_enclosing_circle: non-finite point");
    std::vector<Eigen::Vector2d> pts = points;
    // Fixed-seed Fisher-Yates shuffle: expected-linear behavior with a fully
    // deterministic result for a given input sequence.
    Rng rng(0x5EED0C1BC1E5EEDULL);
    for (std::size_t i = pts.size(); i > 1; --i)
        std::swap(pts[i - 1], pts[rng.uniform_index(i)]);
    Eigen::Vector2d boundary[3];
    EnclosingCircle c = welzl(pts, pts.size(), boundary, 0);
    if (c.radius < 0.0) c = {points.front(), 0.0};
    return c;
}

} // namespace relaysim
