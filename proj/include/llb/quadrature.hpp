#pragma once

#include <cmath>
#include <cstddef>

namespace llb {

namespace detail {

// 15-point Kronrod / 7-point Gauss pair on [-1, 1] (QUADPACK dqk15 constants).
inline constexpr double gk15_x[8] = {
    0.9914553711208126, 0.9491079123427585, 0.8648644233597691, 0.7415311855993944,
    0.5860872354676911, 0.4058451513773972, 0.2077849550078985, 0.0};
inline constexpr double gk15_wk[8] = {
    0.0229353220105292, 0.0630920926299786, 0.1047900103222502, 0.1406532597155259,
    0.1690047266392679, 0.1903505780647854, 0.2044329400752989, 0.2094821410847278};
inline constexpr double gk15_wg[4] = {
    0.1294849661688697, 0.2797053914892767, 0.3818300505051189, 0.4179591836734694};

template <class F>
void gk15_panel(const F& f, double a, double b, double& kronrod, double& err) {
    const double c = 0.5 * (a + b), h = 0.5 * (b - a);
    const double fc = f(c);
    double resk = gk15_wk[7] * fc;
    double resg = gk15_wg[3] * fc;
    for (int i = 0; i < 7; ++i) {
        const double dx = h * gk15_x[i];
        const double fsum = f(c - dx) + f(c + dx);
        resk += gk15_wk[i] * fsum;
        if (i % 2 == 1) resg += gk15_wg[i / 2] * fsum;
    }
    kronrod = resk * h;
    err = std::abs((resk - resg) * h);
}

template <class F>
double gk15_adaptive(const F& f, double a, double b, double abs_tol, double rel_tol, int depth) {
    double v, err;
    gk15_panel(f, a, b, v, err);
    if (depth <= 0 || err <= abs_tol || err <= rel_tol * std::abs(v)) return v;
    const double c = 0.5 * (a + b);
    return gk15_adaptive(f, a, c, 0.5 * abs_tol, rel_tol, depth - 1) +
           gk15_adaptive(f, c, b, 0.5 * abs_tol, rel_tol, depth - 1);
}

}  // namespace detail

// Adaptive Gauss-Kronrod integral of f over [a, b]. The panel rule is exact
// for polynomials up to degree 22; bisection splits until the embedded error
// estimate meets the tolerances (depth-capped at 2^40 panels).
template <class F>
double integrate(const F& f, double a, double b, double abs_tol = 0.0, double rel_tol = 1e-10) {
    if (a == b) return 0.0;
    return detail::gk15_adaptive(f, a, b, abs_tol, rel_tol, 40);
}

}  // namespace llb
