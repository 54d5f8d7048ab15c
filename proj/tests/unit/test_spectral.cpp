#include <doctest.h>

#include <cmath>
#include <random>

#include "edgelab/radial.hpp"
#include "edgelab/spectral.hpp"

using namespace edgelab;
using namespace edgelab::spectral;

namespace {

FourierSeries random_series(std::mt19937_64& rng, int N, double decay = 0.0) {
    std::normal_distribution<double> g;
    FourierSeries u(N);
    for (int l = -N; l <= N; ++l) u[l] = Complex(g(rng), g(rng)) * std::pow(1.0 + l * l, -decay / 2);
    return u;
}

}  // namespace

TEST_CASE("hilbert transform signs") {
    CHECK(hilbert_transform(FourierSeries::mode(1, 1.0, 4))[1] == Complex(1.0));
    CHECK(hilbert_transform(FourierSeries::mode(-1, 1.0, 4))[-1] == Complex(-1.0));
    CHECK(hilbert_transform(FourierSeries::constant(1.0, 4))[0] == Complex(1.0));
}

TEST_CASE("H squared is the identity on every truncation") {
    std::mt19937_64 rng(7);
    for (int N : {0, 1, 5, 64}) {
        const auto u = random_series(rng, N);
        const auto hh = hilbert_transform(hilbert_transform(u));
        for (int l = -N; l <= N; ++l) CHECK(hh[l] == u[l]);
    }
}

TEST_CASE("fractional resolvent values") {
    CHECK(fractional_resolvent(FourierSeries::constant(1.0, 2), 0.75)[0] == Complex(1.0));
    CHECK(std::abs(fractional_resolvent(FourierSeries::mode(1, 1.0, 2), 0.75)[1] - 0.5946035575013605) < 1e-15);
    CHECK(std::abs(fractional_resolvent(FourierSeries::mode(2, 1.0, 2), 1.0)[2] - 0.2) < 1e-15);
}

TEST_CASE("second derivative") {
    CHECK(second_derivative(FourierSeries::constant(1.0, 3))[0] == Complex(0.0));
    CHECK(std::abs(second_derivative(FourierSeries::mode(1, 1.0, 3))[1] + 1.0) < 1e-15);
    // sin 3t = (e^{3it} - e^{-3it}) / 2i
    FourierSeries s(3);
    s[3] = 1.0 / (2.0 * kI);
    s[-3] = -1.0 / (2.0 * kI);
    const auto d2 = second_derivative(s);
    CHECK(std::abs(d2.evaluate(0.4) + 9.0 * std::sin(1.2)) < 1e-12);
    // circumference scaling
    const auto v = second_derivative(FourierSeries::mode(1, 1.0, 1, 1.0));
    CHECK(std::abs(v[1] + 4.0 * kPi * kPi) < 1e-12);
}

TEST_CASE("multipliers commute exactly") {
    std::mt19937_64 rng(3);
    const auto u = random_series(rng, 32);
    const auto a = second_derivative(fractional_resolvent(u, 0.75));
    const auto b = fractional_resolvent(second_derivative(u), 0.75);
    for (int l = -32; l <= 32; ++l) CHECK(std::abs(a[l] - b[l]) <= 4e-16 * std::abs(a[l]));
}

TEST_CASE("evaluation and Parseval") {
    std::mt19937_64 rng(11);
    for (double L : {kTwoPi, 1.0, 7.5}) {
        FourierSeries u(20, L);
        std::normal_distribution<double> g;
        for (int l = -20; l <= 20; ++l) u[l] = Complex(g(rng), g(rng));
        const double coeff = std::pow(u.coefficient_norm(), 2);
        CHECK(std::abs(quadrature_mean_square(u) - coeff) < 1e-10 * coeff);
        const auto samples = u.sample(64);
        for (int j = 0; j < 64; j += 7) CHECK(std::abs(samples[j] - u.evaluate(L * j / 64)) < 1e-10);
        const auto back = FourierSeries::from_samples(samples, 20, L);
        for (int l = -20; l <= 20; ++l) CHECK(std::abs(back[l] - u[l]) < 1e-12);
    }
}

TEST_CASE("multiply matches pointwise product") {
    std::mt19937_64 rng(5);
    const auto a = random_series(rng, 70);
    const auto b = random_series(rng, 90);
    const auto p = multiply(a, b);
    CHECK(p.order() == 160);
    for (double t : {0.1, 1.7, 4.0}) CHECK(std::abs(p.evaluate(t) - a.evaluate(t) * b.evaluate(t)) < 1e-9);
    const auto c = random_series(rng, 3);
    const auto q = multiply(c, c);
    CHECK(std::abs(q[6] - c[3] * c[3]) < 1e-15);
}

TEST_CASE("conj flips modes") {
    FourierSeries u(2);
    u[1] = Complex(1, 2);
    const auto v = u.conj();
    CHECK(v[-1] == Complex(1, -2));
    CHECK(v[1] == Complex(0, 0));
}

TEST_CASE("graded norms are monotone and interpolate with constant one") {
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> U(0.0, 6.0);
    for (int trial = 0; trial < 200; ++trial) {
        const auto u = random_series(rng, 24, 1.0);
        double m1 = U(rng), m2 = U(rng);
        if (m1 > m2) std::swap(m1, m2);
        if (m2 - m1 < 1e-3) continue;
        const double m = m1 + (m2 - m1) * 0.37;
        CHECK(u.coefficient_norm() <= graded_norm(u, m1) * (1 + 1e-15));
        CHECK(graded_norm(u, m1) <= graded_norm(u, m2) * (1 + 1e-15));
        CHECK(interpolation_ratio(u, m1, m, m2) <= 1.0 + 1e-12);
    }
}

TEST_CASE("smoothing examples") {
    const GradedVector c{FourierSeries::constant(2.0, 4)};
    CHECK(smooth(c, 0.3).series[0] == Complex(2.0));
    const GradedVector u{FourierSeries::mode(100, 1.0, 100)};
    CHECK(smooth(u, 0.001).series[100] == Complex(1.0));
    CHECK(smooth(u, 0.05).series[100] == Complex(0.0));
    CHECK_THROWS_AS(smooth(u, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(smooth(u, 1.5), std::invalid_argument);
}

TEST_CASE("smoothing is a self-adjoint contraction") {
    std::mt19937_64 rng(17);
    const SmoothingFamily S;
    for (int trial = 0; trial < 20; ++trial) {
        const auto u = random_series(rng, 40);
        const auto v = random_series(rng, 40);
        const double eps = 0.02 + 0.04 * trial;
        const auto su = S.apply(u, eps);
        const auto sv = S.apply(v, eps);
        Complex a{}, b{};
        for (int l = -40; l <= 40; ++l) {
            a += su[l] * std::conj(v[l]);
            b += u[l] * std::conj(sv[l]);
        }
        CHECK(std::abs(a - b) < 1e-12);
        for (double m : {0.0, 1.0, 3.0}) CHECK(graded_norm(su, m) <= graded_norm(u, m) * (1 + 1e-15));
    }
}

TEST_CASE("cutoff profile is C2 with the prescribed plateaus") {
    CHECK(cutoff_profile(0.5) == 1.0);
    CHECK(cutoff_profile(2.5) == 0.0);
    CHECK(std::abs(cutoff_profile(1.5) - 0.5) < 1e-15);
    const double h = 1e-6;
    for (double x : {1.0, 2.0}) {
        CHECK(std::abs(cutoff_profile_derivative(x - h)) < 1e-9);
        CHECK(std::abs(cutoff_profile_derivative(x + h)) < 1e-9);
    }
    for (double x = 1.05; x < 2.0; x += 0.1) {
        const double fd = (cutoff_profile(x + h) - cutoff_profile(x - h)) / (2 * h);
        CHECK(std::abs(fd - cutoff_profile_derivative(x)) < 1e-8);
        CHECK(cutoff_profile_derivative(x) <= 0.0);
    }
}

TEST_CASE("smoothing axioms have finite constants") {
    std::vector<double> grid;
    for (int k = 1; k <= 8; ++k) grid.push_back(std::ldexp(1.0, -k));
    const auto rep = verify_smoothing_axioms(SmoothingFamily{}, 3, grid);
    CHECK(rep.pass());
    for (const auto& r : rep.rows) CHECK(std::isfinite(r.max_ratio));
    CHECK(rep.to_csv().rfind("axiom,m,n,max_ratio,pass", 0) == 0);

    // Constant vector: S fixes constants, so the (ii) ratio on it vanishes.
    const SmoothingFamily S;
    const auto c = FourierSeries::constant(1.0, 8);
    for (double e : grid) CHECK(graded_norm(S.apply(c, e) - c, 0.0) == 0.0);

    // e^{iNt}: axiom (i) ratio is bounded by sup rho(x) (x^2+eps^2)^{(n-m)/2} over x <= 2.
    const int N = 64;
    for (double e : grid) {
        const auto u = FourierSeries::mode(N, 1.0, N);
        const double ratio = graded_norm(S.apply(u, e), 3) / (std::pow(e, -2.0) * graded_norm(u, 1));
        CHECK(ratio <= std::pow(4.0 + e * e, 1.0) + 1e-12);
    }
}

TEST_CASE("dyadic pointwise bound") {
    const auto grid = radial::RadialGrid::geometric(1.0, 800, 1e-8);
    std::vector<Complex> lin(grid.size()), half(grid.size()), one(grid.size());
    for (int j = 0; j < grid.size(); ++j) {
        lin[j] = grid[j];
        half[j] = std::sqrt(grid[j]);
        one[j] = 1.0;
    }
    const auto a = dyadic_pointwise_bound(grid.r(), lin, 1.5);
    CHECK(a.integrable);
    CHECK(a.pass);
    // phi = r: b-norm^2 = int (1 + 1) r dr = 1.
    CHECK(std::abs(a.b_norm - 1.0) < 1e-6);
    const auto b = dyadic_pointwise_bound(grid.r(), half, 1.5);
    CHECK(b.integrable);
    // phi = r^{1/2}: b-norm^2 = int (1 + 1/4) dr = 5/4.
    CHECK(std::abs(b.b_norm - std::sqrt(1.25)) < 1e-6);
    const auto c = dyadic_pointwise_bound(grid.r(), one, 1.5);
    CHECK_FALSE(c.integrable);
    CHECK_FALSE(c.pass);
    CHECK_THROWS_AS(dyadic_pointwise_bound(grid.r(), lin, 1.0), std::invalid_argument);
}

TEST_CASE("radial quadrature") {
    const auto grid = radial::RadialGrid::geometric(40.0, 900, 1e-10);
    for (int l : {1, 3, 16}) {
        // int_0^inf 2|l| e^{-2|l|r} r^{-1} r dr = 1
        std::vector<Complex> F(grid.size());
        for (int j = 0; j < grid.size(); ++j) F[j] = 2.0 * l * std::exp(-2.0 * l * grid[j]) / grid[j];
        const auto I = radial::integrate(grid, F);
        CHECK(I.integrable);
        CHECK(std::abs(I.value - 1.0) < 1e-9);
    }
    std::vector<Complex> f(grid.size());
    for (int j = 0; j < grid.size(); ++j) f[j] = std::pow(grid[j], 3);
    const auto d = grid.d_dr(f);
    for (int j = 0; j < grid.size(); j += 37) CHECK(std::abs(d[j] - 3.0 * grid[j] * grid[j]) < 1e-8 * (1 + 3 * grid[j] * grid[j]));
}
