#include "llb/hyperbolic.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <unordered_set>

#include "llb/errors.hpp"
#include "llb/parallel.hpp"
#include "llb/quadrature.hpp"

namespace llb {

namespace {

constexpr double kPi = std::numbers::pi;

void require_upper_half_plane(std::complex<double> z, const char* what) {
    if (!(z.imag() > 0) || !std::isfinite(z.real()) || !std::isfinite(z.imag()))
        throw ValidationError(std::string(what) + " must lie in the upper half-plane");
}

}  // namespace

// ---------------------------------------------------------------------------
// Plane geometry
// ---------------------------------------------------------------------------

double hyp_dist(std::complex<double> z, std::complex<double> w) {
    const double q = std::norm(z - w) / (2.0 * z.imag() * w.imag());
    // acosh(1+q) written to stay accurate for small q
    return std::log1p(q + std::sqrt(q * (2.0 + q)));
}

std::complex<double> mobius_apply(const Eigen::Matrix2d& g, std::complex<double> z) {
    return (g(0, 0) * z + g(0, 1)) / (g(1, 0) * z + g(1, 1));
}

double translation_length(const Eigen::Matrix2d& g) {
    const double half_tr = std::abs(g(0, 0) + g(1, 1)) / 2.0;
    if (half_tr <= 1.0) return 0.0;
    return 2.0 * std::acosh(half_tr);
}

// ---------------------------------------------------------------------------
// Radial heat kernel
// ---------------------------------------------------------------------------

double h2_heat_kernel(double rho, double t, double t_max, double rel_tol) {
    if (!(t > 0) || !(t <= t_max))
        throw TOutOfWindow("heat kernel time t=" + std::to_string(t) + " outside (0, " +
                           std::to_string(t_max) + "]");
    if (!(rho >= 0)) throw ValidationError("heat kernel distance must be nonnegative");

    // Radial integral over s in [rho, inf), substituted s = rho + u^2 to
    // remove the inverse-square-root endpoint singularity. The difference of
    // cosh values is rewritten with the product-of-sinh identity so nothing
    // cancels; sinh((s - rho)/2) is evaluated as sinh(u^2/2) directly.
    const double s_cut = std::sqrt(rho * rho + 180.0 * t);  // relative tail < e^-45
    const double u_max = std::sqrt(std::max(s_cut - rho, 1e-30));
    auto f = [rho, t](double u) {
        const double s = rho + u * u;
        const double a = std::sinh(0.5 * (s + rho));
        const double b = std::sinh(0.5 * u * u);
        return 2.0 * u * s * std::exp(-s * s / (4.0 * t)) / std::sqrt(2.0 * a * b);
    };
    double head, head_err;
    detail::gk15_panel(f, 0.0, u_max, head, head_err);
    const double abs_tol = 1e-13 * (std::abs(head) + head_err) + 1e-300;
    const double integral = integrate(f, 0.0, u_max, abs_tol, rel_tol);
    const double pref =
        std::sqrt(2.0) * std::exp(-0.25 * t) / std::pow(4.0 * kPi * t, 1.5);
    return pref * integral;
}

double RadialKernel::eval(double d) const {
    if (d > d_max) return 0.0;
    if (d < 0) d = 0;
    const double u = 2.0 * d / d_max - 1.0;
    double b1 = 0, b2 = 0;
    for (std::size_t k = coef.size() - 1; k >= 1; --k) {
        const double next = 2.0 * u * b1 - b2 + coef[k];
        b2 = b1;
        b1 = next;
    }
    return std::exp(coef[0] + u * b1 - b2);
}

RadialKernel tabulate_heat_kernel(double t, double d_max, int degree, double t_max) {
    if (!(d_max > 0)) throw ValidationError("interpolation range must be positive");
    if (degree < 2) throw ValidationError("interpolation degree too small");
    RadialKernel ker;
    ker.t = t;
    // keep log p_t well away from underflow on the tabulated range
    ker.d_max = std::min(d_max, std::sqrt(2200.0 * t));
    const int n = degree + 1;
    std::vector<double> vals(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) {
        const double x = std::cos(kPi * (j + 0.5) / n);
        const double d = 0.5 * (x + 1.0) * ker.d_max;
        vals[static_cast<std::size_t>(j)] = std::log(h2_heat_kernel(d, t, t_max, 1e-11));
    }
    ker.coef.assign(static_cast<std::size_t>(n), 0.0);
    for (int k = 0; k < n; ++k) {
        double s = 0;
        for (int j = 0; j < n; ++j) s += vals[static_cast<std::size_t>(j)] * std::cos(kPi * k * (j + 0.5) / n);
        ker.coef[static_cast<std::size_t>(k)] = (k == 0 ? 1.0 : 2.0) * s / n;
    }
    return ker;
}

// ---------------------------------------------------------------------------
// Gaussian domination bound
// ---------------------------------------------------------------------------

namespace {

// Kernel values on a log-spaced time grid times a linear distance grid.
struct KernelGrid {
    std::vector<double> ts, ds;
    std::vector<double> p;  // row-major [t][d]
};

KernelGrid kernel_grid(double t_lo, double t_hi, int t_steps, double d_max, int d_steps) {
    if (!(t_lo > 0) || !(t_hi > t_lo)) throw WindowEmpty("time window must satisfy 0 < t_lo < t_hi");
    if (t_steps < 2 || d_steps < 2) throw ValidationError("grid needs at least 2 steps per axis");
    KernelGrid g;
    for (int i = 0; i < t_steps; ++i)
        g.ts.push_back(t_lo * std::pow(t_hi / t_lo, double(i) / (t_steps - 1)));
    for (int j = 0; j < d_steps; ++j) g.ds.push_back(d_max * double(j) / (d_steps - 1));
    g.p.assign(static_cast<std::size_t>(t_steps) * d_steps, 0.0);
    parallel_try_for(static_cast<std::size_t>(t_steps), [&](std::size_t i) {
        for (int j = 0; j < d_steps; ++j)
            g.p[i * static_cast<std::size_t>(d_steps) + static_cast<std::size_t>(j)] =
                h2_heat_kernel(g.ds[static_cast<std::size_t>(j)], g.ts[i], t_hi);
    });
    return g;
}

bool dominates(const KernelGrid& g, double c) {
    if (!(c > 0)) return false;
    for (std::size_t i = 0; i < g.ts.size(); ++i)
        for (std::size_t j = 0; j < g.ds.size(); ++j) {
            const double bound = c * std::exp(-g.ds[j] * g.ds[j] / c);
            if (g.p[i * g.ds.size() + j] > bound * (1.0 + 1e-9)) return false;
        }
    return true;
}

}  // namespace

GaussianFit fit_gaussian_constant(double t_lo, double t_hi, int t_steps, double d_max, int d_steps,
                                  double headroom) {
    const KernelGrid g = kernel_grid(t_lo, t_hi, t_steps, d_max, d_steps);
    double hi = std::max(4.0 * t_hi, 1.0);
    while (!dominates(g, hi)) {
        hi *= 2.0;
        if (hi > 1e9) throw InternalError("Gaussian domination constant search diverged");
    }
    double lo = 0.0;
    for (int iter = 0; iter < 80; ++iter) {
        const double mid = 0.5 * (lo + hi);
        (dominates(g, mid) ? hi : lo) = mid;
    }
    GaussianFit fit;
    // The floor at 4*t_hi keeps the bound's Gaussian rate at least as slow as
    // the kernel's true e^{-d^2/(4t)} rate, so domination cannot fail beyond
    // the fitted distance range (the ratio is decreasing in d out there).
    fit.c1 = std::max(hi, 4.0 * t_hi) * headroom;
    fit.t_lo = t_lo;
    fit.t_hi = t_hi;
    fit.t_steps = t_steps;
    fit.d_max = d_max;
    fit.d_steps = d_steps;
    return fit;
}

BoundCheck verify_gaussian_bound(double c1, double t_lo, double t_hi, int t_steps, double d_max,
                                 int d_steps) {
    const KernelGrid g = kernel_grid(t_lo, t_hi, t_steps, d_max, d_steps);
    BoundCheck out;
    for (std::size_t i = 0; i < g.ts.size(); ++i)
        for (std::size_t j = 0; j < g.ds.size(); ++j) {
            const double bound = c1 * std::exp(-g.ds[j] * g.ds[j] / c1);
            const double ratio = g.p[i * g.ds.size() + j] / bound;
            out.max_ratio = std::max(out.max_ratio, ratio);
            if (ratio > 1.0) ++out.violations;
        }
    return out;
}

// ---------------------------------------------------------------------------
// Surfaces
// ---------------------------------------------------------------------------

HyperbolicSurface bolza_surface() {
    HyperbolicSurface S;
    S.label = "bolza";
    const double ch = 1.0 + std::sqrt(2.0);
    const double sh = std::sqrt(2.0 + 2.0 * std::sqrt(2.0));
    for (int k = 0; k < 4; ++k) {
        const double th = k * kPi / 4.0;
        Eigen::Matrix2d g;
        g << ch + sh * std::cos(th), -sh * std::sin(th), -sh * std::sin(th), ch - sh * std::cos(th);
        S.generators.push_back(g);
    }
    S.relator = {1, -2, 3, -4, -1, 2, -3, 4};
    S.basepoint = {0.0, 1.0};
    S.genus = 2;
    S.area = 4.0 * kPi;
    S.domain_radius = 2.3;
    return S;
}

HyperbolicSurface cylinder_surface(double ell) {
    if (!(ell > 0)) throw ValidationError("cylinder core length must be positive");
    HyperbolicSurface S;
    S.label = "cylinder-" + std::to_string(ell);
    Eigen::Matrix2d g;
    g << std::exp(ell / 2.0), 0.0, 0.0, std::exp(-ell / 2.0);
    S.generators.push_back(g);
    S.basepoint = {0.0, 1.0};
    return S;
}

void validate_surface(const HyperbolicSurface& S) {
    if (S.generators.empty()) throw ValidationError("surface needs at least one generator");
    require_upper_half_plane(S.basepoint, "basepoint");
    for (std::size_t i = 0; i < S.generators.size(); ++i) {
        const Eigen::Matrix2d& g = S.generators[i];
        if (!g.allFinite()) throw ValidationError("generator " + std::to_string(i + 1) + " has non-finite entries");
        if (std::abs(g.determinant() - 1.0) > 1e-10)
            throw ValidationError("generator " + std::to_string(i + 1) + " is not in SL(2,R)");
        if (std::abs(g(0, 0) + g(1, 1)) <= 2.0 + 1e-12)
            throw ValidationError("generator " + std::to_string(i + 1) +
                                  " is not hyperbolic (|trace| <= 2)");
    }
    if (!S.relator.empty()) {
        Eigen::Matrix2d w = Eigen::Matrix2d::Identity();
        for (int letter : S.relator) {
            const int idx = std::abs(letter) - 1;
            if (letter == 0 || idx >= static_cast<int>(S.generators.size()))
                throw RelatorViolated("relator letter " + std::to_string(letter) + " out of range");
            w = w * (letter > 0 ? S.generators[static_cast<std::size_t>(idx)]
                                : S.generators[static_cast<std::size_t>(idx)].inverse().eval());
        }
        const Eigen::Matrix2d id = Eigen::Matrix2d::Identity();
        if ((w - id).norm() > 1e-8 && (w + id).norm() > 1e-8)
            throw RelatorViolated("relator word does not evaluate to +-identity (residual " +
                                  std::to_string(std::min((w - id).norm(), (w + id).norm())) + ")");
    }
}

// ---------------------------------------------------------------------------
// Orbit enumeration
// ---------------------------------------------------------------------------

namespace {

struct MatKey {
    std::array<long long, 4> k;
    bool operator==(const MatKey& o) const { return k == o.k; }
};

struct MatKeyHash {
    std::size_t operator()(const MatKey& m) const {
        std::uint64_t h = 0x9e3779b97f4a7c15ULL;
        for (long long v : m.k) h = splitmix64(h ^ static_cast<std::uint64_t>(v));
        return static_cast<std::size_t>(h);
    }
};

constexpr double kQuantum = 1e6;  // matrices are distinct well above 1e-4

// Canonical sign: flip so the first entry within 1e-3 of the maximal
// magnitude is positive (stable under small numerical drift).
double canonical_sign(const Eigen::Matrix2d& m) {
    const double mx = m.cwiseAbs().maxCoeff();
    for (int i = 0; i < 4; ++i) {
        const double v = m(i / 2, i % 2);
        if (std::abs(v) >= mx - 1e-3) return v >= 0 ? 1.0 : -1.0;
    }
    return 1.0;
}

MatKey quantize(const Eigen::Matrix2d& m) {
    const double s = canonical_sign(m);
    MatKey key;
    for (int i = 0; i < 4; ++i) key.k[static_cast<std::size_t>(i)] = llround(s * m(i / 2, i % 2) * kQuantum);
    return key;
}

// Membership up to quantization: check the 16 floor/ceil neighbor keys so a
// rounding boundary cannot split one element into two.
bool contains_near(const std::unordered_set<MatKey, MatKeyHash>& seen, const Eigen::Matrix2d& m) {
    const double s = canonical_sign(m);
    std::array<long long, 4> fl;
    for (int i = 0; i < 4; ++i) fl[static_cast<std::size_t>(i)] = static_cast<long long>(std::floor(s * m(i / 2, i % 2) * kQuantum));
    for (int mask = 0; mask < 16; ++mask) {
        MatKey key;
        for (int i = 0; i < 4; ++i) key.k[static_cast<std::size_t>(i)] = fl[static_cast<std::size_t>(i)] + ((mask >> i) & 1);
        if (seen.count(key)) return true;
    }
    return false;
}

std::vector<Eigen::Matrix2d> generators_with_inverses(const HyperbolicSurface& S) {
    std::vector<Eigen::Matrix2d> gens;
    for (const auto& g : S.generators) {
        gens.push_back(g);
        Eigen::Matrix2d inv;
        inv << g(1, 1), -g(0, 1), -g(1, 0), g(0, 0);  // adjugate = inverse in SL2
        gens.push_back(inv);
    }
    return gens;
}

std::vector<OrbitImage> orbit_ball(const HyperbolicSurface& S, std::complex<double> x,
                                   std::complex<double> y, double R, double margin,
                                   long max_images) {
    const std::vector<Eigen::Matrix2d> gens = generators_with_inverses(S);
    double disp = 0;
    for (const auto& g : gens) disp = std::max(disp, hyp_dist(y, mobius_apply(g, y)));
    const double threshold = R + disp + margin;

    std::unordered_set<MatKey, MatKeyHash> seen;
    std::vector<Eigen::Matrix2d> nodes{Eigen::Matrix2d::Identity()};
    std::vector<double> dist{hyp_dist(x, y)};
    seen.insert(quantize(nodes[0]));
    for (std::size_t head = 0; head < nodes.size(); ++head) {
        const Eigen::Matrix2d m = nodes[head];  // copy: push_back may reallocate
        for (const auto& g : gens) {
            const Eigen::Matrix2d c = m * g;
            const double d = hyp_dist(x, mobius_apply(c, y));
            if (d > threshold) continue;
            if (contains_near(seen, c)) continue;
            if (static_cast<long>(nodes.size()) + 1 > max_images)
                throw TruncationUnreachable(
                    "orbit enumeration exceeded the image budget (" + std::to_string(max_images) +
                    ") at radius " + std::to_string(R));
            seen.insert(quantize(c));
            nodes.push_back(c);
            dist.push_back(d);
        }
    }
    std::vector<OrbitImage> ball;
    for (std::size_t i = 0; i < nodes.size(); ++i)
        if (dist[i] <= R + 1e-12) ball.push_back({nodes[i], dist[i]});
    std::sort(ball.begin(), ball.end(),
              [](const OrbitImage& a, const OrbitImage& b) { return a.dist < b.dist; });
    return ball;
}

}  // namespace

std::vector<OrbitImage> orbit_enumerate(const HyperbolicSurface& S, std::complex<double> x,
                                        std::complex<double> y, double R, long max_images,
                                        bool check_pruning) {
    validate_surface(S);
    require_upper_half_plane(x, "orbit source point");
    require_upper_half_plane(y, "orbit target point");
    if (!(R >= 0)) throw ValidationError("orbit radius must be nonnegative");
    if (max_images < 1) throw ValidationError("image budget must be positive");

    std::vector<OrbitImage> ball = orbit_ball(S, x, y, R, 0.25, max_images);
    if (check_pruning) {
        const std::vector<OrbitImage> wide = orbit_ball(S, x, y, R, 1.25, max_images);
        bool same = wide.size() == ball.size();
        for (std::size_t i = 0; same && i < ball.size(); ++i)
            same = std::abs(ball[i].dist - wide[i].dist) <= 1e-9;
        if (!same)
            throw PruningUnsound("orbit enumeration at radius " + std::to_string(R) +
                                 " missed elements (found " + std::to_string(ball.size()) +
                                 ", recheck found " + std::to_string(wide.size()) + ")");
    }
    return ball;
}

double injectivity_radius(const HyperbolicSurface& S, std::complex<double> x) {
    validate_surface(S);
    require_upper_half_plane(x, "point");
    for (double R = 5.0; R <= 42.0; R *= 1.6) {
        const std::vector<OrbitImage> ball = orbit_enumerate(S, x, x, R, 4'000'000);
        double best = std::numeric_limits<double>::infinity();
        for (const auto& im : ball)
            if (im.dist > 1e-9) best = std::min(best, im.dist);
        if (std::isfinite(best)) return best / 2.0;
    }
    throw TruncationUnreachable("no nontrivial orbit point within radius 42");
}

// ---------------------------------------------------------------------------
// Certified truncation
// ---------------------------------------------------------------------------

double fit_orbit_constant(const std::vector<OrbitCase>& cases, double headroom) {
    if (cases.empty()) throw ValidationError("orbit-constant fit needs at least one case");
    for (const auto& c : cases)
        if (!(c.inj > 0) || !(c.R >= 0) || c.count < 1)
            throw ValidationError("orbit-constant case with nonpositive radius, count, or injectivity radius");
    auto ok = [&](double c2) {
        for (const auto& c : cases)
            if (std::log(static_cast<double>(c.count)) >
                std::log(c2) + c2 * c.R - 2.0 * std::log(c.inj) + 1e-12)
                return false;
        return true;
    };
    double hi = 1.0;
    while (!ok(hi)) {
        hi *= 2.0;
        if (hi > 1e6) throw InternalError("orbit-growth constant search diverged");
    }
    double lo = 0.0;
    for (int iter = 0; iter < 80; ++iter) {
        const double mid = 0.5 * (lo + hi);
        (ok(mid) ? hi : lo) = mid;
    }
    return hi * headroom;
}

double certified_tail_bound(const KernelContext& ctx, double t, double inj, double R) {
    if (!(inj > 0)) throw ValidationError("injectivity radius must be positive");
    if (!(R >= 0)) throw ValidationError("truncation radius must be nonnegative");
    const double inf = std::numeric_limits<double>::infinity();
    if (!(ctx.c2 > 0)) return inf;
    double c1 = 0;
    for (const auto& band : ctx.c1_bands)
        if (t > band.t_lo - 1e-15 && t <= band.t_hi + 1e-15) {
            c1 = band.c1;
            break;
        }
    if (!(c1 > 0)) c1 = (t >= ctx.t_min_cert && t <= ctx.t_max) ? ctx.c1_full : 0.0;
    if (!(c1 > 0)) return inf;

    // Shell j holds orbit points with distance in (R+j, R+j+1]; their count
    // is at most the whole-ball bound at R+j+1 and each kernel value is at
    // most the Gaussian bound at R+j.
    const double log_base = std::log(c1) + std::log(ctx.c2) - 2.0 * std::log(inj);
    const double peak_r = std::max(R, c1 * ctx.c2 / 2.0);
    if (log_base + ctx.c2 * (peak_r + 1.0) - peak_r * peak_r / c1 > 600.0) return inf;
    double acc = 0;
    for (long j = 0; j < 200000; ++j) {
        const double r = R + j;
        const double lt = log_base + ctx.c2 * (r + 1.0) - r * r / c1;
        const double term = std::exp(lt);
        acc += term;
        if (r > peak_r && term <= acc * 1e-18 + 1e-300) break;
    }
    return acc;
}

namespace {

KernelContext build_default_context() {
    KernelContext ctx;
    ctx.c1_full = fit_gaussian_constant(ctx.t_max / 100.0, ctx.t_max).c1;
    const double edges[] = {0.05, 0.25, 0.5, 1.0, 2.0, 5.0};
    for (int b = 0; b < 5; ++b) {
        const GaussianFit fit = fit_gaussian_constant(edges[b], edges[b + 1], 10);
        ctx.c1_bands.push_back({edges[b], edges[b + 1], fit.c1});
    }

    // Orbit-growth cases from the built-in reference surfaces: cylinders of
    // several core lengths at several distances from the core, plus the
    // genus-2 octagon surface at a few interior points.
    std::vector<OrbitCase> cases;
    auto add_case = [&cases](const HyperbolicSurface& S, std::complex<double> x, double R) {
        const auto ball = orbit_enumerate(S, x, x, R, 400000);
        cases.push_back({R, static_cast<long>(ball.size()), injectivity_radius(S, x)});
    };
    for (double ell : {0.5, 1.0, 2.0}) {
        const HyperbolicSurface cyl = cylinder_surface(ell);
        for (double rho : {0.0, 1.5, 3.0}) {
            const double theta = kPi / 2.0 - std::atan(std::sinh(rho));
            const std::complex<double> x = std::exp(0.3) * std::polar(1.0, theta);
            for (double R : {4.0, 8.0}) add_case(cyl, x, R);
        }
    }
    const HyperbolicSurface bolza = bolza_surface();
    for (std::complex<double> x : {std::complex<double>{0.0, 1.0},
                                   std::complex<double>{0.2, 1.1},
                                   std::complex<double>{-0.35, 0.8}})
        for (double R : {4.0, 6.0}) add_case(bolza, x, R);
    ctx.c2 = fit_orbit_constant(cases);
    return ctx;
}

}  // namespace

const KernelContext& default_kernel_context() {
    static const KernelContext ctx = build_default_context();
    return ctx;
}

namespace {

double kernel_sum_over_ball(const std::vector<OrbitImage>& ball, double t, double R,
                            double t_max, bool skip_identity) {
    const RadialKernel ker = tabulate_heat_kernel(t, std::max(R, 1e-3), 48, t_max);
    double sum = 0;
    for (const auto& im : ball) {
        if (skip_identity && im.dist <= 1e-9) continue;
        sum += ker.eval(im.dist);
    }
    return sum;
}

}  // namespace

KernelValue surface_heat_diagonal(const HyperbolicSurface& S, std::complex<double> x, double t,
                                  double eps, const KernelContext& ctx) {
    validate_surface(S);
    require_upper_half_plane(x, "point");
    if (!(eps > 0)) throw ValidationError("tail tolerance must be positive");
    if (!(t >= ctx.t_min_cert) || !(t <= ctx.t_max))
        throw TOutOfWindow("certified evaluation needs t in [" + std::to_string(ctx.t_min_cert) +
                           ", " + std::to_string(ctx.t_max) + "], got " + std::to_string(t));
    const double inj = injectivity_radius(S, x);
    double R = -1;
    for (double r = 1.0; r <= 60.0; r += 0.5)
        if (certified_tail_bound(ctx, t, inj, r) <= eps) {
            R = r;
            break;
        }
    if (R < 0)
        throw TruncationUnreachable("certified tail bound cannot reach eps=" + std::to_string(eps) +
                                    " at t=" + std::to_string(t) + " for any radius <= 60");
    const std::vector<OrbitImage> ball = orbit_enumerate(S, x, x, R, ctx.max_images, true);
    KernelValue out;
    out.value = kernel_sum_over_ball(ball, t, R, ctx.t_max, false);
    out.truncation_bound = certified_tail_bound(ctx, t, inj, R);
    out.images_used = static_cast<long>(ball.size());
    out.radius = R;
    return out;
}

KernelValue heat_diagonal_at_radius(const HyperbolicSurface& S, std::complex<double> x, double t,
                                    double R, const KernelContext& ctx) {
    validate_surface(S);
    require_upper_half_plane(x, "point");
    if (!(t > 0) || !(t <= ctx.t_max))
        throw TOutOfWindow("t=" + std::to_string(t) + " outside (0, " + std::to_string(ctx.t_max) + "]");
    if (!(R > 0)) throw ValidationError("truncation radius must be positive");
    const std::vector<OrbitImage> ball = orbit_enumerate(S, x, x, R, ctx.max_images);
    KernelValue out;
    out.value = kernel_sum_over_ball(ball, t, R, ctx.t_max, false);
    out.truncation_bound = certified_tail_bound(ctx, t, injectivity_radius(S, x), R);
    out.images_used = static_cast<long>(ball.size());
    out.radius = R;
    return out;
}

std::vector<DeviationRow> deviation_vs_injrad(const HyperbolicSurface& S,
                                              const std::vector<std::complex<double>>& points,
                                              const std::vector<double>& ts, double R_eval,
                                              const KernelContext& ctx) {
    validate_surface(S);
    if (!(R_eval > 0)) throw ValidationError("evaluation radius must be positive");
    for (double t : ts)
        if (!(t > 0) || !(t <= ctx.t_max))
            throw TOutOfWindow("t=" + std::to_string(t) + " outside (0, " + std::to_string(ctx.t_max) + "]");
    for (auto x : points) require_upper_half_plane(x, "sample point");

    std::vector<RadialKernel> kernels;
    for (double t : ts) kernels.push_back(tabulate_heat_kernel(t, R_eval, 48, ctx.t_max));

    std::vector<std::vector<DeviationRow>> per_point(points.size());
    parallel_try_for(points.size(), [&](std::size_t pi) {
        const std::complex<double> x = points[pi];
        const double inj = injectivity_radius(S, x);
        const std::vector<OrbitImage> ball = orbit_enumerate(S, x, x, R_eval, ctx.max_images);
        for (std::size_t ti = 0; ti < ts.size(); ++ti) {
            double dev = 0;
            for (const auto& im : ball)
                if (im.dist > 1e-9) dev += kernels[ti].eval(im.dist);
            per_point[pi].push_back({x, inj, ts[ti], dev, dev * inj * inj});
        }
    });
    std::vector<DeviationRow> rows;
    for (auto& part : per_point)
        for (auto& row : part) rows.push_back(row);
    return rows;
}

// ---------------------------------------------------------------------------
// Sampling and thin parts
// ---------------------------------------------------------------------------

namespace {

struct SplitMixStream {
    std::uint64_t state;
    explicit SplitMixStream(std::uint64_t seed) : state(seed) {}
    std::uint64_t next_u64() {
        state += 0x9e3779b97f4a7c15ULL;
        std::uint64_t x = state;
        x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
        x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
        return x ^ (x >> 31);
    }
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1p-53; }
};

// Point at signed arc length u along the cylinder core (the imaginary axis)
// and distance rho from it, on the side given by the sign of rho.
std::complex<double> cylinder_point(double u, double rho) {
    const double theta = kPi / 2.0 - std::atan(std::sinh(rho));
    return std::exp(u) * std::polar(1.0, theta);
}

}  // namespace

std::vector<std::complex<double>> sample_surface(const HyperbolicSurface& S, int count,
                                                 std::uint64_t seed, double band) {
    validate_surface(S);
    if (count < 0) throw ValidationError("sample count must be nonnegative");
    SplitMixStream rng(seed);
    std::vector<std::complex<double>> out;
    out.reserve(static_cast<std::size_t>(count));

    if (S.relator.empty()) {
        // Cylinder-like: uniform on the band around the core geodesic, with
        // the hyperbolic area element cosh(rho) d rho d u.
        if (!(band > 0)) throw ValidationError("band width must be positive");
        const double ell = translation_length(S.generators[0]);
        const double sb = std::sinh(band);
        for (int i = 0; i < count; ++i) {
            const double u = (rng.uniform() - 0.5) * ell;
            const double rho = std::asinh(rng.uniform() * sb);
            const double side = rng.uniform() < 0.5 ? -1.0 : 1.0;
            out.push_back(cylinder_point(u, side * rho));
        }
        return out;
    }

    if (!(S.domain_radius > 0))
        throw ValidationError("closed surface must declare a Dirichlet domain radius");
    const std::complex<double> b = S.basepoint;
    const double Rd = S.domain_radius;
    std::vector<std::complex<double>> neighbors;
    for (const auto& im : orbit_enumerate(S, b, b, 2.0 * Rd + 0.5, 400000))
        if (im.dist > 1e-9) neighbors.push_back(mobius_apply(im.mat, b));

    const double cosh_span = std::cosh(Rd) - 1.0;
    long attempts = 0;
    const long max_attempts = 20000L * (count + 10L);
    while (static_cast<int>(out.size()) < count) {
        if (++attempts > max_attempts)
            throw InternalError("Dirichlet-domain rejection sampling stalled; domain radius too small?");
        const double r = std::acosh(1.0 + rng.uniform() * cosh_span);
        const double phi = 2.0 * kPi * rng.uniform();
        const std::complex<double> w = std::polar(std::tanh(r / 2.0), phi);
        const std::complex<double> z = (b - w * std::conj(b)) / (1.0 - w);
        bool inside = true;
        for (const auto& q : neighbors)
            if (hyp_dist(z, q) <= r) {
                inside = false;
                break;
            }
        if (inside) out.push_back(z);
    }
    return out;
}

std::vector<ThinPartPoint> thin_part_fraction_surface(const HyperbolicSurface& S,
                                                      const std::vector<double>& r_grid,
                                                      int samples, std::uint64_t seed,
                                                      double band) {
    if (samples < 1) throw ValidationError("thin-part estimate needs at least one sample");
    const std::vector<std::complex<double>> pts = sample_surface(S, samples, seed, band);
    std::vector<double> inj(pts.size());
    parallel_try_for(pts.size(), [&](std::size_t i) { inj[i] = injectivity_radius(S, pts[i]); });
    std::vector<ThinPartPoint> out;
    for (double r : r_grid) {
        if (!(r > 0)) throw ValidationError("thin-part radius must be positive");
        long thin = 0;
        for (double v : inj)
            if (v < r) ++thin;
        const double p = static_cast<double>(thin) / samples;
        out.push_back({r, p, 1.96 * std::sqrt(p * (1.0 - p) / samples)});
    }
    return out;
}

// ---------------------------------------------------------------------------
// Closed-form limits
// ---------------------------------------------------------------------------

double compact_dual_l2_betti(const std::string& space, int k) {
    if (k < 0) throw DegreeOutOfRange("degree must be nonnegative");
    if (space == "H2") return k == 1 ? 1.0 / (2.0 * kPi) : 0.0;
    if (space == "H3") return 0.0;
    throw UnsupportedSpace("unsupported symmetric space '" + space + "' (expected H2 or H3)");
}

std::vector<GenusLimitRow> genus_limit_check(const std::vector<long>& genera) {
    std::vector<GenusLimitRow> rows;
    for (long g : genera) {
        if (g < 2) throw DegreeOutOfRange("genus limit needs genus >= 2, got " + std::to_string(g));
        GenusLimitRow row;
        row.genus = g;
        row.normalized = Rational(g, 2 * (g - 1));  // b_1 / vol in units of 1/pi
        row.deviation = row.normalized - Rational(1, 2);
        rows.push_back(row);
    }
    return rows;
}

}  // namespace llb
