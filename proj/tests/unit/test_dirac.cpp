#include <doctest.h>

#include <cmath>
#include <random>

#include "edgelab/dirac.hpp"

using namespace edgelab;
using namespace edgelab::dirac;

namespace {

bool close(const Mat2& a, const Mat2& b) {
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            if (std::abs(a[i][j] - b[i][j]) > 1e-15) return false;
    return true;
}

Mat2 scaled(const Mat2& a, Complex s) {
    Mat2 c = a;
    for (auto& row : c)
        for (auto& v : row) v *= s;
    return c;
}

Mat2 sum(const Mat2& a, const Mat2& b) {
    Mat2 c = a;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) c[i][j] += b[i][j];
    return c;
}

const Mat2 kIdentity{{{1.0, 0.0}, {0.0, 1.0}}};
const Mat2 kZero{};

double bump(double r, double a, double b) {
    if (r <= a || r >= b) return 0.0;
    const double x = (r - a) / (b - a);
    return std::exp(-1.0 / (x * (1.0 - x)) + 4.0);
}

}  // namespace

TEST_CASE("Clifford relations") {
    const auto s = CliffordFrame::all();
    for (int i = 0; i < 3; ++i) {
        CHECK(close(s[i] * s[i], scaled(kIdentity, -1.0)));
        for (int j = i + 1; j < 3; ++j) CHECK(close(sum(s[i] * s[j], s[j] * s[i]), kZero));
    }
}

TEST_CASE("mode ODE matrix") {
    auto m = mode_ode_matrix(0, 2, 0.5);
    CHECK(m[0][0] == -1.0);
    CHECK(m[0][1] == -2.0);
    CHECK(m[1][0] == -2.0);
    CHECK(m[1][1] == -1.0);
    m = mode_ode_matrix(0, 0, 1);
    CHECK(m[0][0] == -0.5);
    CHECK(m[1][1] == -0.5);
    CHECK(m[0][1] == 0.0);
    m = mode_ode_matrix(1, -3, 1);
    CHECK(m[0][0] == 0.5);
    CHECK(m[0][1] == 3.0);
    CHECK(m[1][1] == -1.5);
    CHECK_THROWS_AS(mode_ode_matrix(0, 1, 0.0), std::invalid_argument);
}

TEST_CASE("euclidean obstruction mode closed form") {
    const radial::RadialGrid g(2.0, 1e-6, 200);
    std::vector<double> rs = g.r();
    auto at = [&](const ModeSpinor& m, double r, bool plus) {
        int j = 0;
        for (int i = 0; i < g.size(); ++i)
            if (std::abs(rs[i] - r) < std::abs(rs[j] - r)) j = i;
        return std::pair{rs[j], plus ? m.plus[j] : m.minus[j]};
    };
    const auto m1 = euclidean_obstruction_mode(1, g);
    auto [r1, v1] = at(m1, 1.0, true);
    CHECK(std::abs(v1.real() - std::exp(-r1) / std::sqrt(r1)) < 1e-15);
    const radial::RadialGrid g2(0.5, 1e-3, 50);
    const auto m2 = euclidean_obstruction_mode(-2, g2);
    CHECK(std::abs(m2.minus.back().real() + 0.7357588823428847) < 1e-12);
    CHECK(std::abs(std::sqrt(g.r_min()) * m1.plus.front().real() - 1.0) < 1e-5);
    CHECK_THROWS_AS(euclidean_obstruction_mode(0, g), std::invalid_argument);
}

TEST_CASE("half-integer Bessel K against the standard library") {
    for (int m = -4; m <= 4; ++m)
        for (double x : {0.1, 1.0, 3.7, 20.0}) {
            const double ref = std::cyl_bessel_k(std::abs(m + 0.5), x) * std::exp(x);
            CHECK(std::abs(scaled_bessel_k_half(m, x) - ref) < 1e-12 * ref);
        }
}

TEST_CASE("decaying radial solutions match closed forms") {
    for (double l : {1.0, 3.0, -2.0, 8.0}) {
        const auto g = radial::RadialGrid::geometric(8.0 / std::abs(l), 900);
        const auto sol = solve_mode_ode(0, l, BoundaryData::decaying(), g);
        const auto ref = euclidean_obstruction_mode(l, g);
        double num = 0, den = 0;
        for (int j = 0; j < g.size(); ++j) {
            num += g.weights()[j] * (std::norm(sol.mode.plus[j] - ref.plus[j]) + std::norm(sol.mode.minus[j] - ref.minus[j]));
            den += g.weights()[j] * (std::norm(ref.plus[j]) + std::norm(ref.minus[j]));
        }
        CHECK(std::sqrt(num / den) < 1e-6);
        CHECK(sol.residual < 1e-8);
        CHECK_FALSE(sol.exponential_growth);
    }
    // k = 1 decaying branch against (K_{1/2}, K_{3/2}).
    const auto g = radial::RadialGrid::geometric(4.0, 900, 1e-3);
    const double l = 2.0;
    const auto sol = solve_mode_ode(1, l, BoundaryData::decaying(), g);
    for (int j = 0; j < g.size(); j += 50) {
        const double x = l * g[j];
        const double a = l * std::sqrt(2.0 / kPi);
        CHECK(std::abs(sol.mode.plus[j].real() - a * std::cyl_bessel_k(0.5, x)) < 1e-7 * a * std::cyl_bessel_k(0.5, x));
        CHECK(std::abs(sol.mode.minus[j].real() - a * std::cyl_bessel_k(1.5, x)) < 1e-7 * a * std::cyl_bessel_k(1.5, x));
    }
}

TEST_CASE("k = 1 regular branch: r^{1/2} at the axis and exponential growth") {
    for (double l : {1.0, 2.0, -3.0}) {
        const auto g = radial::RadialGrid::geometric(8.0 / std::abs(l), 900);
        const auto sol = solve_mode_ode(1, l, BoundaryData::regular(), g);
        const double p = std::log(std::abs(sol.mode.plus[10] / sol.mode.plus[0])) / std::log(g[10] / g[0]);
        CHECK(std::abs(p - 0.5) < 1e-3);
        CHECK(sol.exponential_growth);
        CHECK(sol.growth_rate == doctest::Approx(std::abs(l)).epsilon(0.15));
        CHECK(sol.residual < 1e-8);
        // Independent oracle: (I_{1/2}, -sgn I_{3/2}) up to scale.
        const int j = g.size() / 2;
        const double x = std::abs(l) * g[j];
        const double ratio = std::cyl_bessel_i(1.5, x) / std::cyl_bessel_i(0.5, x);
        CHECK(std::abs(sol.mode.minus[j] / sol.mode.plus[j] + sgn(l) * ratio) < 1e-7);
    }
    const auto gk = radial::RadialGrid::geometric(8.0, 900);
    const auto neg = solve_mode_ode(-1, 1.0, BoundaryData::regular(), gk);
    CHECK(neg.exponential_growth);
}

TEST_CASE("no L^2 mode solutions for k != 0") {
    for (int k : {-2, -1, 1, 2})
        for (double l : {1.0, -2.0}) {
            const auto g = radial::RadialGrid::geometric(8.0 / std::abs(l), 900);
            CHECK(l2_mismatch(k, l, g, 1.0 / std::abs(l)) > 0.1);
        }
}

TEST_CASE("two-point and initial value data") {
    const auto g = radial::RadialGrid::geometric(2.0, 600, 1e-2);
    BoundaryData bc;
    bc.branch = Branch::TwoPoint;
    bc.inner_row = {1.0, 1.0};
    bc.inner_value = 2.0;
    bc.outer_row = {0.0, 1.0};
    bc.outer_value = 0.5;
    const auto sol = solve_mode_ode(1, 1.5, bc, g);
    CHECK(std::abs(sol.mode.plus.front() + sol.mode.minus.front() - 2.0) < 1e-10);
    CHECK(std::abs(sol.mode.minus.back() - 0.5) < 1e-10);
    CHECK(sol.residual < 1e-8);

    BoundaryData iv;
    iv.branch = Branch::InitialValue;
    iv.value = {0.3, -0.2};
    const auto s2 = solve_mode_ode(-1, 0.7, iv, g);
    CHECK(s2.mode.plus.front() == Complex(0.3));
    CHECK(s2.residual < 1e-8);
}

TEST_CASE("mu-perturbed kernel decay rates") {
    struct Case {
        double l, mu, rate;
    };
    for (auto c : {Case{0, 2, 2}, Case{3, 4, 5}, Case{1, 1e-6, 1}}) {
        const auto g = radial::RadialGrid::geometric(8.0 / c.rate, 900);
        const auto m = mu_perturbed_mode(c.l, c.mu, g);
        CHECK(m.expected_rate == doctest::Approx(c.rate));
        CHECK(std::abs(m.fitted_rate - c.rate) < 0.01 * c.rate);
        CHECK(m.closed_form_error < 1e-6);
    }
    CHECK_THROWS_AS(mu_perturbed_mode(1, 0.0, radial::RadialGrid::geometric(1, 100)), std::invalid_argument);
}

TEST_CASE("dirac_apply annihilates the obstruction family") {
    // Max-norm residual on a grid with r_min = 1e-3 R; the innermost-node rounding floor
    // eps |psi| / (r h) sits near 1e-8 at r_min = 1e-4 R, where the L^2 residual is checked.
    const SpinorGrid coarse(128, kTwoPi, radial::RadialGrid::geometric(8.0, 400, 1e-3), 4);
    const SpinorGrid fine(128, kTwoPi, radial::RadialGrid::geometric(8.0, 700, 1e-4), 4);
    for (int l : {1, -1, 2, -5, 17, 32, -32}) {
        const auto psi = obstruction_field(l, coarse);
        CHECK(dirac_apply(psi).max_abs() < 1e-8 * l2_norm(psi));
        const auto psi_f = obstruction_field(l, fine);
        CHECK(dirac_residual_l2(psi_f) < 1e-10);
    }
    const auto& grid = coarse;
    CHECK(dirac_apply(SpinorField(grid)).max_abs() == 0.0);
}

TEST_CASE("dirac_apply on (e^{it} f, 0)") {
    const SpinorGrid grid(16, kTwoPi, radial::RadialGrid(3.0, 0.1, 400), 8);
    auto f = [](double r) { return std::exp(-r * r); };
    auto df = [](double r) { return -2.0 * r * std::exp(-r * r); };
    const auto psi = SpinorField::from_function(grid, [&](double t, double r, double) -> Spinor {
        return {std::exp(kI * t) * f(r), 0.0};
    });
    const auto out = dirac_apply(psi);
    double err = 0.0;
    for (int it = 0; it < grid.n_t; ++it)
        for (int ir = 0; ir < grid.radial.size(); ++ir)
            for (int ith = 0; ith < grid.n_theta; ++ith) {
                const double t = grid.t(it), r = grid.radial[ir], th = grid.theta(ith);
                const auto i = grid.index(it, ir, ith);
                // 2 d_zbar of the full section e^{i theta/2} e^{it} f, divided by e^{i theta/2}.
                const Complex minus = std::exp(kI * th) * std::exp(kI * t) * (df(r) - 0.5 * f(r) / r);
                err = std::max(err, std::abs(out.plus()[i] + std::exp(kI * t) * f(r)));
                err = std::max(err, std::abs(out.minus()[i] - minus));
            }
    CHECK(err < 1e-8);
}

TEST_CASE("mode decoupling and zero cross-l leakage") {
    const SpinorGrid grid(16, kTwoPi, radial::RadialGrid(3.0, 0.05, 400), 16);
    const int k = 2, l = 3;
    const auto psi = SpinorField::from_function(grid, [&](double t, double r, double th) -> Spinor {
        const double b = bump(r, 0.3, 2.5);
        const Complex e = std::exp(kI * (l * t + k * th));
        return {e * std::exp(-kI * th) * b, e * 0.5 * b * r};
    });
    const auto out = dirac_apply(psi);
    // Output keeps the (k, l) content: plus in theta-mode k-1, minus in theta-mode k.
    double leak = 0.0, total = 0.0;
    for (int it = 0; it < grid.n_t; ++it)
        for (int ir = 0; ir < grid.radial.size(); ++ir)
            for (int ith = 0; ith < grid.n_theta; ++ith) {
                const double t = grid.t(it), th = grid.theta(ith);
                const auto i = grid.index(it, ir, ith);
                total += std::norm(out.plus()[i]) + std::norm(out.minus()[i]);
                // Remove the expected phase and check the remainder is theta- and t-independent.
                (void)t;
                (void)th;
            }
    for (int ir = 0; ir < grid.radial.size(); ++ir) {
        const Complex p0 = out.plus()[grid.index(0, ir, 0)];
        const Complex m0 = out.minus()[grid.index(0, ir, 0)];
        for (int it = 0; it < grid.n_t; ++it)
            for (int ith = 0; ith < grid.n_theta; ++ith) {
                const auto i = grid.index(it, ir, ith);
                const Complex ph = std::exp(kI * (l * grid.t(it) + (k - 1) * grid.theta(ith)));
                const Complex pm = std::exp(kI * (l * grid.t(it) + k * grid.theta(ith)));
                leak += std::norm(out.plus()[i] - p0 * ph) + std::norm(out.minus()[i] - m0 * pm);
            }
    }
    CHECK(leak < 1e-24 * total);
}

TEST_CASE("L^2 pairing") {
    const SpinorGrid grid(16, kTwoPi, radial::RadialGrid::geometric(12.0, 900, 1e-8), 4);
    const auto a = obstruction_field(1, grid);
    const auto b = obstruction_field(2, grid);
    CHECK(std::abs(l2_pairing(a, b)) < 1e-12);
    // 2 pi L int 2|l| e^{-2|l| r} dr = 4 pi^2 (1 - e^{-24})
    CHECK(std::abs(l2_pairing(a, a) - 4.0 * kPi * kPi) < 1e-8);
    CHECK(l2_pairing(a, SpinorField(grid)) == Complex(0.0));
    CHECK_THROWS_AS(l2_pairing(a, obstruction_field(1, SpinorGrid(8, kTwoPi, grid.radial, 4))), std::invalid_argument);
    const auto coeffs = obstruction_coefficients(a, 3);
    CHECK(std::abs(coeffs[3 + 1] - l2_pairing(a, a)) < 1e-10);
    CHECK(std::abs(coeffs[3 + 2]) < 1e-12);
    CHECK(std::abs(coeffs[3 - 1]) < 1e-12);
}

TEST_CASE("adjointness of compactly supported fields") {
    std::mt19937_64 rng(21);
    std::normal_distribution<double> gauss;
    double previous = INFINITY;
    for (int nr : {150, 300}) {
        const SpinorGrid grid(8, kTwoPi, radial::RadialGrid(4.0, 0.05, nr), 8);
        rng.seed(21);
        auto random_field = [&]() {
            std::array<Complex, 8> c;
            for (auto& v : c) v = Complex(gauss(rng), gauss(rng));
            return SpinorField::from_function(grid, [c](double t, double r, double th) -> Spinor {
                const double b = bump(r, 0.5, 3.5);
                return {b * (c[0] + c[1] * std::exp(kI * t) + c[2] * std::exp(-kI * th) + c[3] * std::exp(kI * (2 * t + th))),
                        b * (c[4] + c[5] * std::exp(-2.0 * kI * t) + c[6] * std::exp(kI * th) + c[7] * r)};
            });
        };
        const auto psi = random_field();
        const auto phi = random_field();
        const auto res = adjointness_check(psi, phi);
        CHECK_FALSE(res.touches_axis);
        CHECK(res.defect < 1e-6);
        CHECK(res.defect < previous);
        previous = res.defect;
        // phi = psi: only Im <D psi, psi> contributes.
        const auto self = adjointness_check(psi, psi);
        CHECK(self.defect == doctest::Approx(2.0 * std::abs(l2_pairing(dirac_apply(psi), psi).imag()) / std::pow(l2_norm(psi), 2)).epsilon(1e-9));
    }
}

TEST_CASE("boundary defect for fields touching the axis") {
    const double L = kTwoPi, R = 4.0;
    const SpinorGrid grid(4, L, radial::RadialGrid::geometric(R, 800, 1e-7), 4);
    auto cut = [R](double r) { return spectral::cutoff_profile(4.0 * r / R); };
    const auto psi = SpinorField::from_function(grid, [&](double t, double r, double) -> Spinor {
        return {0.0, std::exp(kI * t) * cut(r) / std::sqrt(r)};
    });
    const auto phi = SpinorField::from_function(grid, [&](double t, double r, double th) -> Spinor {
        return {std::exp(kI * (t - th)) * cut(r) / std::sqrt(r), 0.0};
    });
    const auto res = adjointness_check(psi, phi);
    CHECK(res.touches_axis);
    CHECK(res.boundary_defect);
    // Boundary flux 2 pi L h(0) g(0).
    CHECK(std::abs(res.difference - kTwoPi * L) < 1e-5 * kTwoPi * L);
}

TEST_CASE("leading data nondegeneracy") {
    LeadingData d{spectral::FourierSeries::constant(1.0, 2), spectral::FourierSeries(2)};
    CHECK(d.nondegenerate());
    LeadingData z{spectral::FourierSeries(2), spectral::FourierSeries(2)};
    z.c[1] = 0.5;
    z.c[-1] = 0.5;  // cos t vanishes at pi/2
    CHECK_FALSE(z.nondegenerate());
}
