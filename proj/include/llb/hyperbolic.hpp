#pragma once

#include <Eigen/Dense>
#include <complex>
#include <string>
#include <vector>

#include "llb/rational.hpp"

namespace llb {

// ---------------------------------------------------------------------------
// Upper half-plane geometry
// ---------------------------------------------------------------------------

// Hyperbolic distance between two points with positive imaginary part.
double hyp_dist(std::complex<double> z, std::complex<double> w);

// Action of an SL(2,R) matrix by Mobius transformation.
std::complex<double> mobius_apply(const Eigen::Matrix2d& g, std::complex<double> z);

// Translation length 2*acosh(|tr|/2) of a hyperbolic isometry.
double translation_length(const Eigen::Matrix2d& g);

// ---------------------------------------------------------------------------
// Radial heat kernel of the hyperbolic plane
// ---------------------------------------------------------------------------

// Heat kernel p_t(rho) at distance rho >= 0 and time t in (0, t_max];
// throws TOutOfWindow outside that window. Evaluated by adaptive quadrature
// of the radial integral representation with relative tolerance rel_tol.
double h2_heat_kernel(double rho, double t, double t_max = 5.0, double rel_tol = 1e-10);

// Fast radial evaluator: Chebyshev interpolant of log p_t on [0, d_max],
// built once and evaluated in O(degree) per call. Beyond the representable
// range (where p_t underflows) eval() returns 0.
struct RadialKernel {
    double t = 0;
    double d_max = 0;
    std::vector<double> coef;  // Chebyshev coefficients of log p_t
    double eval(double d) const;
};
RadialKernel tabulate_heat_kernel(double t, double d_max, int degree = 48, double t_max = 5.0);

// ---------------------------------------------------------------------------
// Gaussian domination bound  p_t(d) <= c * exp(-d^2 / c)
// ---------------------------------------------------------------------------

struct GaussianFit {
    double c1 = 0;        // fitted constant, headroom included
    double t_lo = 0, t_hi = 0;
    int t_steps = 0;
    double d_max = 0;
    int d_steps = 0;
};

// Smallest constant (times `headroom`) dominating the kernel on a log-spaced
// t-grid times a linear d-grid. The constant is floored at 4*t_hi so the
// bound's Gaussian decay rate is never faster than the kernel's, which makes
// it valid beyond the fitted d-range as well. Throws WindowEmpty for an
// empty time window.
GaussianFit fit_gaussian_constant(double t_lo, double t_hi, int t_steps = 26, double d_max = 8.0,
                                  int d_steps = 41, double headroom = 1.05);

struct BoundCheck {
    long violations = 0;
    double max_ratio = 0;  // max over the grid of p_t(d) / (c e^{-d^2/c})
};
BoundCheck verify_gaussian_bound(double c1, double t_lo, double t_hi, int t_steps, double d_max,
                                 int d_steps);

// ---------------------------------------------------------------------------
// Surfaces given by discrete groups of isometries
// ---------------------------------------------------------------------------

struct HyperbolicSurface {
    std::string label;
    std::vector<Eigen::Matrix2d> generators;
    std::vector<int> relator;  // signed 1-based generator indices; empty if free
    std::complex<double> basepoint{0.0, 1.0};
    double area = 0;           // 0 for surfaces of infinite volume
    long genus = 0;            // 0 when not closed
    double domain_radius = 0;  // radius of a ball containing the Dirichlet
                               // domain at the basepoint (0 = noncompact;
                               // sampling then uses a band around the axis)
};

// Genus-2 surface with the regular-octagon symmetry group.
HyperbolicSurface bolza_surface();

// Hyperbolic cylinder with core geodesic of length ell.
HyperbolicSurface cylinder_surface(double ell);

// Checks determinants, hyperbolicity of generators, the relator, and the
// basepoint; throws ValidationError subtypes on failure.
void validate_surface(const HyperbolicSurface& S);

// ---------------------------------------------------------------------------
// Orbit enumeration and injectivity radius
// ---------------------------------------------------------------------------

struct OrbitImage {
    Eigen::Matrix2d mat;
    double dist = 0;  // d(x, mat * y)
};

// All orbit points gamma*y with d(x, gamma*y) <= R, sorted by distance
// (identity included when it qualifies). Enumeration is a breadth-first
// search pruned at R plus the maximal one-letter displacement; when
// check_pruning is set, a second pass with a larger pruning margin must
// find the same ball or PruningUnsound is thrown. Throws
// TruncationUnreachable when more than max_images nodes would be explored.
std::vector<OrbitImage> orbit_enumerate(const HyperbolicSurface& S, std::complex<double> x,
                                        std::complex<double> y, double R,
                                        long max_images = 2'000'000, bool check_pruning = false);

// Half the minimal displacement min_{gamma != 1} d(x, gamma x) / 2.
double injectivity_radius(const HyperbolicSurface& S, std::complex<double> x);

// ---------------------------------------------------------------------------
// Certified evaluation of the quotient heat kernel
// ---------------------------------------------------------------------------

struct KernelContext {
    double t_max = 5.0;        // kernel time window (0, t_max]
    double t_min_cert = 0.05;  // certified tails require t >= this
    double c1_full = 0;        // Gaussian constant for the whole window
    struct Band {
        double t_lo = 0, t_hi = 0, c1 = 0;
    };
    std::vector<Band> c1_bands;  // sharper constants on time sub-windows
    double c2 = 0;               // orbit-growth constant
    long max_images = 2'000'000;
    double quad_rel_tol = 1e-10;
};

// Context with constants fitted on the built-in reference surfaces
// (cylinders of several core lengths and the genus-2 octagon surface).
// Computed once and cached.
const KernelContext& default_kernel_context();

// Orbit-growth constant: smallest c (times headroom) with
// count <= c * exp(c R) / inj^2 across the supplied cases.
struct OrbitCase {
    double R = 0;
    long count = 0;
    double inj = 0;
};
double fit_orbit_constant(const std::vector<OrbitCase>& cases, double headroom = 1.1);

// Upper bound on the mass of all orbit points beyond radius R, by shells:
// sum_j c1 e^{-(R+j)^2/c1} * c2 e^{c2 (R+j+1)} / inj^2. Returns +inf when
// the bound diverges numerically or t has no certified band.
double certified_tail_bound(const KernelContext& ctx, double t, double inj, double R);

struct KernelValue {
    double value = 0;             // sum of p_t over enumerated orbit points
    double truncation_bound = 0;  // certified bound on the omitted tail
    long images_used = 0;
    double radius = 0;  // truncation radius actually used
};

// Heat kernel of the quotient surface on the diagonal, truncated at the
// smallest radius whose certified tail bound is <= eps. Throws TOutOfWindow
// when t is outside [t_min_cert, t_max] and TruncationUnreachable when no
// feasible radius reaches eps within the image budget.
KernelValue surface_heat_diagonal(const HyperbolicSurface& S, std::complex<double> x, double t,
                                  double eps, const KernelContext& ctx = default_kernel_context());

// Same sum at a caller-chosen truncation radius; the reported bound may be
// +inf when no certificate applies. No pruning recheck is performed.
KernelValue heat_diagonal_at_radius(const HyperbolicSurface& S, std::complex<double> x, double t,
                                    double R, const KernelContext& ctx = default_kernel_context());

// ---------------------------------------------------------------------------
// Deviation of the quotient kernel from the plane kernel
// ---------------------------------------------------------------------------

struct DeviationRow {
    std::complex<double> point;
    double inj = 0;
    double t = 0;
    double deviation = 0;  // sum over gamma != 1 of p_t(d(x, gamma x))
    double product = 0;    // deviation * inj^2
};

// Deviation table for several points and times, enumerating each point's
// orbit once up to radius R_eval (tails beyond R_eval are not certified
// here; choose R_eval so they are negligible for the times requested).
std::vector<DeviationRow> deviation_vs_injrad(const HyperbolicSurface& S,
                                              const std::vector<std::complex<double>>& points,
                                              const std::vector<double>& ts, double R_eval,
                                              const KernelContext& ctx = default_kernel_context());

// ---------------------------------------------------------------------------
// Sampling and thin parts
// ---------------------------------------------------------------------------

// Uniform samples from the surface: rejection sampling of the Dirichlet
// domain at the basepoint for closed surfaces; for a cylinder, uniform
// samples of the band at axis-distance <= band around the core geodesic.
std::vector<std::complex<double>> sample_surface(const HyperbolicSurface& S, int count,
                                                 std::uint64_t seed, double band = 3.0);

struct ThinPartPoint {
    double r = 0;
    double fraction = 0;
    double error_bar = 0;  // 1.96 * binomial standard error
};

// Monte-Carlo fraction of sampled points with injectivity radius < r.
std::vector<ThinPartPoint> thin_part_fraction_surface(const HyperbolicSurface& S,
                                                      const std::vector<double>& r_grid,
                                                      int samples, std::uint64_t seed,
                                                      double band = 3.0);

// ---------------------------------------------------------------------------
// Closed-form limits
// ---------------------------------------------------------------------------

// L2 Betti number of the compact dual, per unit volume: for "H2" this is
// 1/(2 pi) in degree 1 and 0 otherwise; for "H3" it vanishes in all degrees.
// Throws UnsupportedSpace for other space names.
double compact_dual_l2_betti(const std::string& space, int k);

struct GenusLimitRow {
    long genus = 0;
    Rational normalized;  // b_1 / vol in units of 1/pi
    Rational deviation;   // normalized - 1/2, also in units of 1/pi
};

// Exact normalized first Betti number 2g / (4 pi (g-1)) of closed genus-g
// surfaces and its deviation from the limit 1/(2 pi); all rational
// arithmetic, valid for large genus. Throws DegreeOutOfRange for g < 2.
std::vector<GenusLimitRow> genus_limit_check(const std::vector<long>& genera);

}  // namespace llb
