#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <vector>

#include "llb/errors.hpp"
#include "llb/hyperbolic.hpp"
#include "llb/quadrature.hpp"

namespace {

constexpr double kSystole = 3.0571418389619964;  // 2 acosh(1 + sqrt 2)

std::complex<double> point_at_axis_distance(double rho) {
    // Distance from r e^{i theta} to the imaginary axis is asinh(|cot theta|).
    const double theta = std::atan2(1.0, std::sinh(rho));
    return std::polar(1.0, theta);
}

// Independent lattice oracle for the cylinder: distances to the k-th power of
// the core translation satisfy sinh(d_k / 2) = cosh(rho) sinh(|k| ell / 2).
double cylinder_diagonal_oracle(double ell, double rho, double t) {
    double sum = llb::h2_heat_kernel(0.0, t);
    for (int k = 1;; ++k) {
        const double d = 2.0 * std::asinh(std::cosh(rho) * std::sinh(0.5 * k * ell));
        const double term = 2.0 * llb::h2_heat_kernel(d, t);
        sum += term;
        if (term < 1e-20 * sum) break;
    }
    return sum;
}

// Brute-force orbit oracle: all reduced words up to the given length, matrices
// deduplicated up to sign with a quadratic near-match scan (independent of the
// production hashing scheme), filtered by displacement <= R.
std::vector<double> word_orbit_distances(const llb::HyperbolicSurface& S, std::complex<double> x,
                                         double R, int max_len) {
    const int g = static_cast<int>(S.generators.size());
    std::vector<Eigen::Matrix2d> letters;
    for (const auto& m : S.generators) letters.push_back(m);
    for (const auto& m : S.generators) letters.push_back(m.inverse());
    auto inverse_of = [g](int i) { return i < g ? i + g : i - g; };

    std::vector<Eigen::Matrix2d> seen;
    std::vector<double> dists;
    auto record = [&](const Eigen::Matrix2d& m) {
        const double d = llb::hyp_dist(x, llb::mobius_apply(m, x));
        if (d > R + 1e-12) return;
        for (const auto& s : seen)
            if ((s - m).cwiseAbs().maxCoeff() < 1e-6 || (s + m).cwiseAbs().maxCoeff() < 1e-6)
                return;
        seen.push_back(m);
        dists.push_back(d);
    };

    record(Eigen::Matrix2d::Identity());
    std::function<void(const Eigen::Matrix2d&, int, int)> dfs = [&](const Eigen::Matrix2d& w,
                                                                    int last, int len) {
        if (len == max_len) return;
        for (int i = 0; i < 2 * g; ++i) {
            if (last >= 0 && i == inverse_of(last)) continue;  // keep words reduced
            Eigen::Matrix2d next = w * letters[i];
            record(next);
            dfs(next, i, len + 1);
        }
    };
    dfs(Eigen::Matrix2d::Identity(), -1, 0);
    std::sort(dists.begin(), dists.end());
    return dists;
}

}  // namespace

TEST_CASE("adaptive quadrature reproduces closed-form integrals") {
    // the 15-point panel is exact for polynomials of degree <= 22
    double v = llb::integrate([](double x) { return std::pow(x, 13.0); }, 0.0, 1.0);
    CHECK(v == doctest::Approx(1.0 / 14.0).epsilon(1e-13));
    double e = llb::integrate([](double x) { return std::exp(-x); }, 0.0, 60.0);
    CHECK(e == doctest::Approx(1.0).epsilon(1e-12));
    double s = llb::integrate([](double x) { return std::sin(x); }, 0.0, 3.14159265358979323846);
    CHECK(s == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(llb::integrate([](double x) { return x; }, 2.0, 2.0) == 0.0);
}

TEST_CASE("hyperbolic distance on the upper half plane") {
    const std::complex<double> i(0.0, 1.0);
    CHECK(llb::hyp_dist(i, i) == doctest::Approx(0.0));
    for (double s : {0.5, 2.0, 7.0})
        CHECK(llb::hyp_dist(i, std::complex<double>(0.0, std::exp(s))) == doctest::Approx(s).epsilon(1e-12));
    // symmetric
    std::complex<double> a(0.3, 0.8), b(-1.2, 2.5);
    CHECK(llb::hyp_dist(a, b) == doctest::Approx(llb::hyp_dist(b, a)).epsilon(1e-13));
    // invariant under the isometries that define the genus-2 surface
    auto S = llb::bolza_surface();
    for (const auto& g : S.generators) {
        CHECK(llb::hyp_dist(llb::mobius_apply(g, a), llb::mobius_apply(g, b)) ==
              doctest::Approx(llb::hyp_dist(a, b)).epsilon(1e-11));
    }
    // triangle inequality spot check
    CHECK(llb::hyp_dist(a, b) <= llb::hyp_dist(a, i) + llb::hyp_dist(i, b) + 1e-13);
}

TEST_CASE("heat kernel point values match an independent high-precision oracle") {
    // multi-precision quadrature of the radial representation, 30 digits
    CHECK(llb::h2_heat_kernel(0.0, 0.1) == doctest::Approx(0.769769546876900).epsilon(1e-8));
    CHECK(llb::h2_heat_kernel(0.0, 1.0) == doctest::Approx(0.057535755205722).epsilon(1e-8));
    CHECK(llb::h2_heat_kernel(0.0, 5.0) == doctest::Approx(0.003452472508044).epsilon(1e-8));
    CHECK(llb::h2_heat_kernel(2.0, 1.0) == doctest::Approx(0.015914115768910).epsilon(1e-8));
    CHECK(llb::h2_heat_kernel(1.0, 0.25) == doctest::Approx(0.099563124996703).epsilon(1e-8));
    CHECK(llb::h2_heat_kernel(3.0, 5.0) == doctest::Approx(0.001281014830792).epsilon(1e-8));
    CHECK(llb::h2_heat_kernel(kSystole, 0.25) == doctest::Approx(1.38235147028792e-5).epsilon(1e-8));
}

TEST_CASE("heat kernel has unit mass") {
    for (double t : {0.1, 1.0, 5.0}) {
        const double smax = 10.0 * std::sqrt(t) + 30.0;
        const double mass = llb::integrate(
            [t](double s) {
                return 2.0 * 3.14159265358979323846 * llb::h2_heat_kernel(s, t) * std::sinh(s);
            },
            0.0, smax, 3e-8, 0.0);
        CHECK(mass == doctest::Approx(1.0).epsilon(1e-6));
    }
}

TEST_CASE("heat kernel satisfies the semigroup identity on the diagonal") {
    auto convolve_diag = [](double t, double s) {
        return llb::integrate(
            [&](double r) {
                return 2.0 * 3.14159265358979323846 * llb::h2_heat_kernel(r, t) *
                       llb::h2_heat_kernel(r, s) * std::sinh(r);
            },
            0.0, 40.0, 3e-8, 0.0);
    };
    CHECK(convolve_diag(0.5, 0.5) == doctest::Approx(llb::h2_heat_kernel(0.0, 1.0)).epsilon(1e-6));
    CHECK(convolve_diag(1.0, 4.0) == doctest::Approx(llb::h2_heat_kernel(0.0, 5.0)).epsilon(1e-6));
    CHECK(convolve_diag(0.05, 0.05) == doctest::Approx(llb::h2_heat_kernel(0.0, 0.1)).epsilon(1e-6));
}

TEST_CASE("heat kernel time window is enforced") {
    CHECK_THROWS_AS(llb::h2_heat_kernel(1.0, 0.0), llb::TOutOfWindow);
    CHECK_THROWS_AS(llb::h2_heat_kernel(1.0, -1.0), llb::TOutOfWindow);
    CHECK_THROWS_AS(llb::h2_heat_kernel(1.0, 5.5), llb::TOutOfWindow);
    CHECK_NOTHROW(llb::h2_heat_kernel(1.0, 5.5, 6.0));
}

TEST_CASE("tabulated radial kernel matches direct evaluation") {
    for (double t : {0.1, 1.0, 4.0}) {
        auto K = llb::tabulate_heat_kernel(t, 10.0);
        for (double d : {0.0, 0.37, 1.0, 2.5, 5.0, 9.9}) {
            CHECK(K.eval(d) == doctest::Approx(llb::h2_heat_kernel(d, t)).epsilon(1e-9));
        }
        CHECK(K.eval(10.5) == 0.0);
    }
}

TEST_CASE("fitted Gaussian constant dominates the kernel") {
    auto fit = llb::fit_gaussian_constant(0.05, 5.0);
    CHECK(fit.c1 >= 4.0 * 5.0);  // floor keeps the bound valid beyond the fitted range
    auto check = llb::verify_gaussian_bound(fit.c1, 0.05, 5.0, 3 * fit.t_steps, fit.d_max,
                                            3 * fit.d_steps);
    CHECK(check.violations == 0);
    CHECK(check.max_ratio <= 1.0);
    CHECK(check.max_ratio > 0.0);  // the floor dominates the data fit, so the
                                   // bound is valid but not tight on this window

    // spot check far outside the fitted d-range
    const double c = fit.c1;
    for (double d : {10.0, 14.0})
        CHECK(llb::h2_heat_kernel(d, 5.0) <= c * std::exp(-d * d / c));

    CHECK_THROWS_AS(llb::fit_gaussian_constant(1.0, 0.5), llb::WindowEmpty);
}

TEST_CASE("cylinder surfaces: translation length, counts, distances") {
    for (double ell : {0.5, 1.0, 2.0}) {
        auto S = llb::cylinder_surface(ell);
        llb::validate_surface(S);
        CHECK(llb::translation_length(S.generators[0]) == doctest::Approx(ell).epsilon(1e-12));

        const std::complex<double> i(0.0, 1.0);
        for (double R : {0.75 * ell, 3.2 * ell, 6.1 * ell}) {
            auto orbit = llb::orbit_enumerate(S, i, i, R);
            const long expect = 2 * static_cast<long>(std::floor(R / ell)) + 1;
            CHECK(static_cast<long>(orbit.size()) == expect);
            for (size_t j = 0; j < orbit.size(); ++j) {
                const long k = static_cast<long>((j + 1) / 2);  // 0,1,1,2,2,...
                CHECK(orbit[j].dist == doctest::Approx(k * ell).epsilon(1e-10));
            }
        }

        // off the axis the distances follow the half-displacement identity
        const double rho = 1.5;
        const auto z = point_at_axis_distance(rho);
        auto orbit = llb::orbit_enumerate(S, z, z, 5.0);
        REQUIRE(orbit.size() >= 3);
        for (size_t j = 1; j < std::min<size_t>(orbit.size(), 5); ++j) {
            const long k = static_cast<long>((j + 1) / 2);
            const double expect = 2.0 * std::asinh(std::cosh(rho) * std::sinh(0.5 * k * ell));
            CHECK(orbit[j].dist == doctest::Approx(expect).epsilon(1e-9));
        }

        CHECK(llb::injectivity_radius(S, i) == doctest::Approx(0.5 * ell).epsilon(1e-10));
        CHECK(llb::injectivity_radius(S, z) ==
              doctest::Approx(std::asinh(std::cosh(rho) * std::sinh(0.5 * ell))).epsilon(1e-10));
    }
}

TEST_CASE("the genus-2 octagon surface is consistent") {
    auto S = llb::bolza_surface();
    llb::validate_surface(S);
    CHECK(S.genus == 2);
    CHECK(S.area == doctest::Approx(4.0 * 3.14159265358979323846).epsilon(1e-12));
    REQUIRE(S.generators.size() == 4);
    for (const auto& g : S.generators) {
        CHECK(g.determinant() == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(llb::translation_length(g) == doctest::Approx(kSystole).epsilon(1e-12));
    }
    // relator evaluates to the identity in PSL(2, R)
    Eigen::Matrix2d w = Eigen::Matrix2d::Identity();
    for (int s : S.relator) {
        const Eigen::Matrix2d& g = S.generators[std::abs(s) - 1];
        w = w * (s > 0 ? g : Eigen::Matrix2d(g.inverse()));
    }
    const double to_id = std::min((w - Eigen::Matrix2d::Identity()).cwiseAbs().maxCoeff(),
                                  (w + Eigen::Matrix2d::Identity()).cwiseAbs().maxCoeff());
    CHECK(to_id < 1e-9);

    const std::complex<double> i(0.0, 1.0);
    // below the minimal displacement only the identity shows up
    auto small = llb::orbit_enumerate(S, i, i, 3.0);
    REQUIRE(small.size() == 1);
    CHECK(small[0].dist == doctest::Approx(0.0));
    CHECK(llb::injectivity_radius(S, i) == doctest::Approx(0.5 * kSystole).epsilon(1e-10));
}

TEST_CASE("orbit enumeration agrees with brute-force word enumeration") {
    const std::complex<double> i(0.0, 1.0);

    auto cyl = llb::cylinder_surface(1.0);
    auto adist = word_orbit_distances(cyl, i, 3.1, 8);
    auto orbit = llb::orbit_enumerate(cyl, i, i, 3.1, 2'000'000, true);
    REQUIRE(adist.size() == orbit.size());
    for (size_t j = 0; j < orbit.size(); ++j)
        CHECK(orbit[j].dist == doctest::Approx(adist[j]).epsilon(1e-9));

    auto bolza = llb::bolza_surface();
    auto wdist = word_orbit_distances(bolza, i, 4.8, 8);
    auto borbit = llb::orbit_enumerate(bolza, i, i, 4.8, 2'000'000, true);
    REQUIRE(wdist.size() == borbit.size());
    for (size_t j = 0; j < borbit.size(); ++j)
        CHECK(borbit[j].dist == doctest::Approx(wdist[j]).epsilon(1e-9));
    CHECK(borbit.size() > 1);  // the corpus actually exercises nontrivial words
}

TEST_CASE("surface validation rejects malformed groups") {
    auto S = llb::bolza_surface();
    S.generators[0](0, 0) *= 2.0;  // determinant no longer 1
    CHECK_THROWS_AS(llb::validate_surface(S), llb::ValidationError);

    auto S2 = llb::bolza_surface();
    S2.relator[0] = -S2.relator[0];  // breaks the defining relation
    CHECK_THROWS_AS(llb::validate_surface(S2), llb::RelatorViolated);

    auto S3 = llb::cylinder_surface(1.0);
    S3.generators[0] << 0.0, -1.0, 1.0, 0.0;  // elliptic rotation, not hyperbolic
    CHECK_THROWS_AS(llb::validate_surface(S3), llb::ValidationError);

    auto S4 = llb::cylinder_surface(1.0);
    S4.basepoint = {0.0, -1.0};
    CHECK_THROWS_AS(llb::validate_surface(S4), llb::ValidationError);
}

TEST_CASE("default kernel context carries certified constants") {
    const auto& ctx = llb::default_kernel_context();
    CHECK(ctx.c1_full >= 4.0 * ctx.t_max);
    CHECK(ctx.c2 > 0.0);
    CHECK(ctx.c2 < 6.0);
    REQUIRE(!ctx.c1_bands.empty());
    CHECK(ctx.c1_bands.front().t_lo == doctest::Approx(ctx.t_min_cert));
    CHECK(ctx.c1_bands.back().t_hi == doctest::Approx(ctx.t_max));
    for (size_t b = 0; b < ctx.c1_bands.size(); ++b) {
        CHECK(ctx.c1_bands[b].c1 >= 4.0 * ctx.c1_bands[b].t_hi);
        if (b > 0) CHECK(ctx.c1_bands[b].t_lo == doctest::Approx(ctx.c1_bands[b - 1].t_hi));
    }
}

TEST_CASE("certified tail bounds decrease in the radius and respect the window") {
    const auto& ctx = llb::default_kernel_context();
    double prev = llb::certified_tail_bound(ctx, 1.0, 0.5, 6.0);
    for (double R : {8.0, 10.0, 12.0, 16.0}) {
        const double cur = llb::certified_tail_bound(ctx, 1.0, 0.5, R);
        CHECK(cur <= prev);
        prev = cur;
    }
    CHECK(prev < 1e-8);
    CHECK(std::isinf(llb::certified_tail_bound(ctx, 0.01, 0.5, 10.0)));
    // smaller injectivity radius weakens the bound
    CHECK(llb::certified_tail_bound(ctx, 1.0, 0.1, 10.0) >=
          llb::certified_tail_bound(ctx, 1.0, 1.0, 10.0));
}

TEST_CASE("certified diagonal values match the cylinder lattice oracle") {
    const std::complex<double> i(0.0, 1.0);
    for (double ell : {0.5, 1.0, 2.0}) {
        auto S = llb::cylinder_surface(ell);
        for (double t : {0.25, 1.0}) {
            auto kv = llb::surface_heat_diagonal(S, i, t, 1e-8);
            CHECK(kv.truncation_bound <= 1e-8);
            const double oracle = cylinder_diagonal_oracle(ell, 0.0, t);
            CHECK(std::abs(kv.value - oracle) <= kv.truncation_bound + 1e-10 * oracle);

            // enlarging the radius moves the value by less than the reported
            // bound (the retabulated kernel may wiggle at quadrature noise)
            auto larger = llb::heat_diagonal_at_radius(S, i, t, kv.radius + 3.0);
            CHECK(larger.value >= kv.value - 1e-9 * oracle);
            CHECK(std::abs(larger.value - kv.value) <= kv.truncation_bound);
        }
    }
}

TEST_CASE("certified diagonal on the genus-2 surface at moderate accuracy") {
    auto S = llb::bolza_surface();
    const std::complex<double> i(0.0, 1.0);
    auto kv = llb::surface_heat_diagonal(S, i, 1.0, 1e-3);
    CHECK(kv.truncation_bound <= 1e-3);
    CHECK(kv.images_used >= 17);  // identity plus at least the 16 closest neighbors
    const double plane = llb::h2_heat_kernel(0.0, 1.0);
    CHECK(kv.value >= plane);
    CHECK(kv.value <= plane + 0.05);
}

TEST_CASE("unreachable truncation targets are reported, not silently approximated") {
    auto S = llb::bolza_surface();
    const std::complex<double> i(0.0, 1.0);
    CHECK_THROWS_AS(llb::surface_heat_diagonal(S, i, 5.0, 1e-9), llb::TruncationUnreachable);
    CHECK_THROWS_AS(llb::surface_heat_diagonal(S, i, 0.01, 1e-3), llb::TOutOfWindow);
    CHECK_THROWS_AS(llb::surface_heat_diagonal(S, i, 6.0, 1e-3), llb::TOutOfWindow);
}

TEST_CASE("deviation table matches the lattice oracle on cylinders") {
    auto S = llb::cylinder_surface(1.0);
    std::vector<std::complex<double>> pts = {point_at_axis_distance(0.0),
                                             point_at_axis_distance(1.0),
                                             point_at_axis_distance(2.0)};
    std::vector<double> ts = {0.25, 1.0};
    auto rows = llb::deviation_vs_injrad(S, pts, ts, 24.0);
    REQUIRE(rows.size() == pts.size() * ts.size());
    for (const auto& row : rows) {
        const double rho = std::asinh(std::abs(row.point.real()) / row.point.imag());
        const double inj = std::asinh(std::cosh(rho) * std::sinh(0.5));
        CHECK(row.inj == doctest::Approx(inj).epsilon(1e-9));
        const double dev_oracle =
            cylinder_diagonal_oracle(1.0, rho, row.t) - llb::h2_heat_kernel(0.0, row.t);
        CHECK(row.deviation == doctest::Approx(dev_oracle).epsilon(1e-6));
        CHECK(row.product == doctest::Approx(dev_oracle * inj * inj).epsilon(1e-6));
        CHECK(row.deviation > 0.0);
    }
    // deviation decreases as the point moves away from the core geodesic
    for (size_t k = 0; k < ts.size(); ++k) {
        std::vector<double> devs;
        for (const auto& row : rows)
            if (row.t == ts[k]) devs.push_back(row.deviation);
        REQUIRE(devs.size() == 3);
        CHECK(devs[0] > devs[1]);
        CHECK(devs[1] > devs[2]);
    }
}

TEST_CASE("surface sampling is deterministic and lands in the fundamental domain") {
    auto bolza = llb::bolza_surface();
    auto pts = llb::sample_surface(bolza, 60, 42);
    auto pts2 = llb::sample_surface(bolza, 60, 42);
    REQUIRE(pts.size() == 60);
    CHECK(pts == pts2);
    const std::complex<double> base(0.0, 1.0);
    auto neighbors = llb::orbit_enumerate(bolza, base, base, 2.0 * bolza.domain_radius + 0.5);
    for (const auto& z : pts) {
        CHECK(z.imag() > 0.0);
        const double db = llb::hyp_dist(z, base);
        CHECK(db <= bolza.domain_radius + 1e-9);
        for (const auto& im : neighbors) {
            if (im.dist < 1e-9) continue;  // identity
            CHECK(db <= llb::hyp_dist(z, llb::mobius_apply(im.mat, base)) + 1e-9);
        }
    }

    auto cyl = llb::cylinder_surface(0.5);
    auto cpts = llb::sample_surface(cyl, 200, 7, 3.0);
    for (const auto& z : cpts) {
        CHECK(z.imag() > 0.0);
        CHECK(std::asinh(std::abs(z.real()) / z.imag()) <= 3.0 + 1e-9);
    }
}

TEST_CASE("thin part of a cylinder band matches the closed-form area fraction") {
    const double ell = 0.5, band = 3.0;
    auto S = llb::cylinder_surface(ell);
    std::vector<double> r_grid = {0.2, 0.3, 0.7, 1.5, 4.0};
    auto pts = llb::thin_part_fraction_surface(S, r_grid, 4000, 11, band);
    REQUIRE(pts.size() == r_grid.size());
    for (size_t j = 0; j < r_grid.size(); ++j) {
        const double r = r_grid[j];
        const double ratio = std::sinh(r) / std::sinh(0.5 * ell);
        double expect;
        if (ratio <= 1.0)
            expect = 0.0;
        else if (ratio >= std::cosh(band))
            expect = 1.0;
        else
            expect = std::sinh(std::acosh(ratio)) / std::sinh(band);
        CAPTURE(r);
        CHECK(std::abs(pts[j].fraction - expect) <= 2.0 * pts[j].error_bar + 1e-12);
        CHECK(pts[j].error_bar >= 0.0);
    }
    CHECK(pts.front().fraction == 0.0);  // r below the minimal injectivity radius
    CHECK(pts.back().fraction == 1.0);   // r above the band's maximal injectivity radius
}

TEST_CASE("closed-form limits in degree one") {
    const double inv_2pi = 1.0 / (2.0 * 3.14159265358979323846);
    CHECK(llb::compact_dual_l2_betti("H2", 1) == doctest::Approx(inv_2pi).epsilon(1e-15));
    CHECK(llb::compact_dual_l2_betti("H2", 0) == 0.0);
    CHECK(llb::compact_dual_l2_betti("H2", 2) == 0.0);
    for (int k = 0; k <= 3; ++k) CHECK(llb::compact_dual_l2_betti("H3", k) == 0.0);
    CHECK_THROWS_AS(llb::compact_dual_l2_betti("H4", 1), llb::UnsupportedSpace);
    CHECK_THROWS_AS(llb::compact_dual_l2_betti("H2", -1), llb::DegreeOutOfRange);
}

TEST_CASE("genus limit deviations are exactly 1/(2(g-1)) in units of 1/pi") {
    auto rows = llb::genus_limit_check({2, 3, 10, 1000000});
    REQUIRE(rows.size() == 4);
    for (const auto& row : rows) {
        CHECK(row.normalized == llb::Rational(row.genus, 2 * (row.genus - 1)));
        CHECK(row.deviation == llb::Rational(1, 2 * (row.genus - 1)));
    }
    CHECK_THROWS_AS(llb::genus_limit_check({1}), llb::DegreeOutOfRange);
}
