#include <doctest.h>

#include <cmath>
#include <random>

#include "edgelab/obstruction.hpp"

using namespace edgelab;
using namespace edgelab::obstruction;
using spectral::FourierSeries;

namespace {

dirac::SpinorGrid small_grid(int nt = 64, double R = 12.0, int nr = 360, double min_ratio = 1e-5) {
    return dirac::SpinorGrid(nt, kTwoPi, radial::RadialGrid::geometric(R, nr, min_ratio), 4);
}

double bump(double x) {
    const double y = (x - 1.0) / 0.5;
    return std::abs(y) < 1.0 ? std::exp(-1.0 / (1.0 - y * y)) : 0.0;
}

}  // namespace

TEST_CASE("projection of a single obstruction element") {
    const auto grid = small_grid();
    const auto psi = dirac::obstruction_field(3, grid);
    const auto proj = project_to_obstruction(psi, 8);
    const Complex norm2 = dirac::l2_pairing(psi, psi);
    CHECK(std::abs(proj[3] - norm2) < 1e-9 * std::abs(norm2));
    for (int l = -8; l <= 8; ++l)
        if (l != 3) CHECK(std::abs(proj[l]) < 1e-10 * std::abs(norm2));

    const dirac::SpinorField zero(grid);
    CHECK(project_to_obstruction(zero, 8).max_abs_coeff() == 0.0);
}

TEST_CASE("fields supported away from the axis project with exponentially small coefficients") {
    const auto grid = small_grid(64, 12.0, 400);
    const double R = 8.0;
    const auto psi = dirac::SpinorField::from_function(grid, [&](double t, double r, double th) -> dirac::Spinor {
        const double rad = bump((r - R / 2 - 1.0) / 2.0 + 1.0) * (1.0 + 0.5 * std::cos(3 * t));
        return {rad * Complex(std::cos(th), -std::sin(th)) * Complex(std::cos(2 * t), std::sin(2 * t)), 0.5 * rad};
    });
    const auto proj = project_to_obstruction(psi, 20);
    // Cauchy-Schwarz against Psi_l restricted to r >= R/2, whose norm is 2 pi e^{-|l| R/2}.
    const double scale = dirac::l2_norm(psi) * kTwoPi;
    for (int l = 1; l <= 20; ++l) {
        const double bound = scale * std::exp(-std::abs(l) * R / 2);
        CHECK(std::abs(proj[l]) <= bound);
        CHECK(std::abs(proj[-l]) <= bound);
    }
}

TEST_CASE("projection of a combination is the Gram action") {
    const auto grid = small_grid();
    const std::vector<int> modes{-5, -2, -1, 1, 2, 4, 7};
    std::vector<Complex> c{{0.3, -0.1}, {1.0, 0.0}, {-0.4, 0.2}, {0.2, 0.9}, {0.0, -1.1}, {0.5, 0.5}, {-0.7, 0.1}};
    dirac::SpinorField psi(grid);
    for (std::size_t i = 0; i < modes.size(); ++i) psi += c[i] * dirac::obstruction_field(modes[i], grid);
    const auto proj = project_to_obstruction(psi, 8);
    const auto g = gram_matrix(modes, grid, {}, [](double, double) { return 1.0; });
    const auto b = basis_change_U(g);
    Eigen::VectorXcd cv(modes.size());
    for (std::size_t i = 0; i < modes.size(); ++i) cv(i) = c[i];
    const Eigen::VectorXcd uc = b.U * cv * (kTwoPi * kTwoPi);
    for (std::size_t i = 0; i < modes.size(); ++i) CHECK(std::abs(proj[modes[i]] - uc(i)) < 1e-9);
}

TEST_CASE("conormal coefficients match the Gamma integral") {
    // <psi, Psi_l> = 2 pi L f_l Gamma(p + 3/2) l^{-(p+1)} up to the cutoff's e^{-l R/4}.
    FourierSeries f(64);
    for (int l = -64; l <= 64; ++l) f[l] = 1.0;
    ConormalOptions opt;
    opt.R = 16.0;
    for (double p : {0.5, 1.5, 2.5}) {
        const auto fit = conormal_rate(f, p, 8, 64, opt);
        for (std::size_t i = 0; i < fit.modes.size(); ++i) {
            const double l = fit.modes[i];
            const double oracle = kTwoPi * kTwoPi * std::tgamma(p + 1.5) * std::pow(l, -(p + 1.0));
            CHECK(std::abs(fit.coefficients[i] - oracle) < 1e-7 * oracle);
        }
        CHECK(std::abs(fit.slope + p + 1.0) < 0.05);
        CHECK_FALSE(fit.super_polynomial);
    }
}

TEST_CASE("conormal fit on a non-flat spectrum divides out f") {
    FourierSeries f(24);
    for (int l = -24; l <= 24; ++l) f[l] = Complex(std::pow(0.8, std::abs(l)), 0.1 * l);
    ConormalOptions opt;
    opt.R = 16.0;
    const auto fit = conormal_rate(f, 0.5, 8, 24, opt);
    CHECK(std::abs(fit.slope + 1.5) < 1e-6);
}

TEST_CASE("conormal fit flags a vanishing spectrum") {
    auto f = FourierSeries::mode(10, 1.0, 32);
    CHECK_THROWS_AS(conormal_rate(f, 0.5, 8, 16), DegenerateError);
}

TEST_CASE("support away from the axis decays faster than any tested power") {
    FourierSeries f(40);
    for (int l = -40; l <= 40; ++l) f[l] = 1.0;
    ConormalOptions opt;
    opt.profile = [](double r) { return bump(r - 1.5); };
    const auto fit = conormal_rate(f, 0.5, 4, 40, opt);
    CHECK(fit.super_polynomial);
    CHECK(fit.local_slopes[2] < -10.0);
}

TEST_CASE("unweighted Gram matrix on the plane is the identity") {
    const auto grid = small_grid(128, 30.0, 640, 1e-8);
    std::vector<int> modes;
    for (int l = -32; l <= 32; ++l)
        if (l != 0) modes.push_back(l);
    const auto g = gram_matrix(modes, grid, {}, [](double, double) { return 1.0; });
    double off = 0.0, diag = 0.0;
    for (int i = 0; i < g.A.rows(); ++i)
        for (int j = 0; j < g.A.cols(); ++j) (i == j ? diag : off) = std::max(i == j ? diag : off, std::abs(g.A(i, j)));
    CHECK(off < 1e-10);
    CHECK(diag < 1e-8);
}

TEST_CASE("weighted Gram deviation matches the radial oracle") {
    // w = 1 + 0.1 r cos t: A_{k,k+-1} = 0.1 sqrt(k l) / (k + l)^2 for same-sign k, l.
    const auto grid = small_grid(128, 30.0, 640, 1e-8);
    std::vector<int> modes;
    for (int l = -20; l <= 20; ++l)
        if (l != 0) modes.push_back(l);
    const auto g = gram_matrix(modes, grid, {}, [](double t, double r) { return 1.0 + 0.1 * r * std::cos(t); });
    for (std::size_t i = 0; i < modes.size(); ++i)
        for (std::size_t j = 0; j < modes.size(); ++j) {
            const int k = modes[i], l = modes[j];
            double oracle = 0.0;
            if (std::abs(k - l) == 1 && sgn(k) == sgn(l)) {
                const double a = std::abs(k), b = std::abs(l);
                oracle = 0.1 * std::sqrt(a * b) / ((a + b) * (a + b));
            }
            CHECK(std::abs(g.A(i, j) - oracle) < 1e-9);
        }
}

TEST_CASE("Gram envelopes are stable under enlarging the mode set") {
    const auto grid = small_grid(256, 30.0, 640, 1e-8);
    auto weight = [](double t, double r) { return 1.0 + 0.1 * r * std::cos(t); };
    auto block = [&](int n) {
        std::vector<int> modes;
        for (int l = -n; l <= n; ++l)
            if (l != 0) modes.push_back(l);
        return gram_envelope(gram_matrix(modes, grid, {}, weight));
    };
    const auto e32 = block(32), e64 = block(64);
    CHECK(e32.c_half > 0.0);
    CHECK(e64.c_half <= 1.5 * e32.c_half);
    // Only |k - l| = 1 couples, so every far pair sits at quadrature noise.
    CHECK(e64.c_far < 1e-6);
    CHECK(e64.far_pairs > e32.far_pairs);
}

TEST_CASE("far Gram envelope with a weight carrying every t-mode") {
    // w = 1 + 0.1 r e^{cos t}: the e^{imt} content is I_m(1), faster than any power of m.
    const auto grid = small_grid(256, 30.0, 640, 1e-8);
    auto weight = [](double t, double r) { return 1.0 + 0.1 * r * std::exp(std::cos(t)); };
    auto block = [&](int n) {
        std::vector<int> modes;
        for (int l = -n; l <= n; ++l)
            if (l != 0) modes.push_back(l);
        return gram_envelope(gram_matrix(modes, grid, {}, weight));
    };
    const auto e32 = block(32), e64 = block(64);
    CHECK(e32.c_far > 1e-6);
    CHECK(e64.c_far <= 1.5 * e32.c_far);
    CHECK(e64.c_half <= 1.5 * e32.c_half);
}

TEST_CASE("basis change of the identity") {
    GramMatrix g;
    g.modes = {-2, -1, 1, 2};
    g.G = Eigen::MatrixXcd::Identity(4, 4);
    g.A = Eigen::MatrixXcd::Zero(4, 4);
    const auto b = basis_change_U(g);
    CHECK(b.K.norm() == 0.0);
    CHECK(b.k_norm == 0.0);
    CHECK(b.contraction);
    CHECK(b.sigma_min == doctest::Approx(1.0));
}

TEST_CASE("Neumann series: small Hermitian perturbations stay invertible") {
    std::mt19937_64 rng(7);
    std::normal_distribution<double> nd;
    for (int trial = 0; trial < 50; ++trial) {
        const int n = 12;
        Eigen::MatrixXcd K(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) K(i, j) = Complex(nd(rng), nd(rng));
        K = (K + K.adjoint()).eval();
        K *= (0.2 + 0.7 * (trial % 10) / 10.0) / Eigen::BDCSVD<Eigen::MatrixXcd>(K).singularValues()(0);
        GramMatrix g;
        for (int l = 1; l <= n; ++l) g.modes.push_back(l);
        g.G = Eigen::MatrixXcd::Identity(n, n) + K;
        g.A = K;
        const auto b = basis_change_U(g);
        CHECK(b.contraction);
        CHECK(b.sigma_min >= 1.0 - b.k_norm - 1e-12);
    }
    GramMatrix s;
    s.modes = {1, 2};
    s.G = Eigen::MatrixXcd::Ones(2, 2);
    s.A = s.G - Eigen::MatrixXcd::Identity(2, 2);
    CHECK_THROWS_AS(basis_change_U(s), DegenerateError);
}

TEST_CASE("K shrinks as the low-mode cutoff grows") {
    const auto grid = small_grid(256, 30.0, 640, 1e-8);
    std::vector<int> modes;
    for (int l = -64; l <= 64; ++l)
        if (l != 0) modes.push_back(l);
    const auto g = gram_matrix(modes, grid, {}, [](double t, double r) { return 1.0 + 0.1 * r * std::cos(t); });
    double prev = INFINITY;
    const double k1 = basis_change_U(g, 1).k_norm;
    for (int L0 : {1, 2, 4, 8, 16, 32}) {
        const auto b = basis_change_U(g, L0);
        CHECK(b.k_norm < prev);
        CHECK(b.k_norm <= 2.0 * k1 * std::pow(double(L0), -0.125));
        CHECK(std::isfinite(b.k_smoothing_norm));
        prev = b.k_norm;
    }
}

TEST_CASE("annuli tile the disk") {
    const AnnuliPartition part(8.0, 1.0, 40);
    CHECK(part.inner(0) == 0.0);
    for (int n = 0; n < 40; ++n) CHECK(part.outer(n) == doctest::Approx(part.inner(n + 1)).epsilon(1e-15));
    CHECK(part.outer(40) == doctest::Approx(41.0 / 8.0));
    CHECK_THROWS(AnnuliPartition(0.0));
}

TEST_CASE("annuli decay of the flat obstruction element") {
    // Per annulus, with x = l r: 2 int e^{-2x}(2x^2 + x + 3/2) dx = 2 [e^{-2x}(x^2 + 3x/2 + 3/2)] evaluated
    // between the endpoints; independent of l.
    auto P = [](double x) { return std::exp(-2 * x) * (x * x + 1.5 * x + 1.5); };
    for (double l : {2.0, 8.0, -8.0, 32.0}) {
        const auto grid = radial::RadialGrid::geometric(41.0 / std::abs(l), 1600, 1e-6);
        const auto u = dirac::euclidean_obstruction_mode(l, grid);
        const AnnuliPartition part(l, 1.0, 40);
        const auto rep = annuli_decay(u, part, grid);
        REQUIRE(rep.a.size() == 41);
        for (int n = 0; n <= 12; ++n) {
            const double oracle = 2.0 * (P(n) - P(n + 1));
            CHECK(std::abs(rep.a[n] - oracle) < 1e-6 * oracle);
        }
        CHECK(rep.decaying);
        CHECK(rep.rate > 1.6);
        CHECK(rep.rate < 2.0);
    }
}

TEST_CASE("annuli decay flags a profile that does not decay") {
    const auto grid = radial::RadialGrid::geometric(10.0, 600, 1e-5);
    dirac::ModeSpinor u;
    u.k = 0;
    u.l = 1.0;
    u.r = grid.r();
    u.plus.assign(grid.size(), 1.0);
    u.minus.assign(grid.size(), 0.0);
    const auto rep = annuli_decay(u, AnnuliPartition(1.0, 1.0, 8), grid);
    CHECK_FALSE(rep.decaying);
    CHECK(rep.rate < 0.1);
}

TEST_CASE("scaled modified Bessel I of half-integer order") {
    for (int n : {0, 1, 2, 5}) {
        for (double x : {1e-3, 0.1, 1.0, 7.5, 29.0, 45.0, 120.0}) {
            const double ref = std::exp(-x) * std::cyl_bessel_i(n + 0.5, x);
            CHECK(scaled_bessel_i_half(n, x) == doctest::Approx(ref).epsilon(1e-12));
        }
    }
}

TEST_CASE("second-order solve: zero forcing") {
    const auto grid = radial::RadialGrid::geometric(8.0, 400, 1e-5);
    dirac::ModeSpinor f;
    f.k = 0;
    f.l = 3.0;
    f.r = grid.r();
    f.plus.assign(grid.size(), 0.0);
    f.minus.assign(grid.size(), 0.0);
    const auto sol = solve_second_order(f, grid);
    for (int j = 0; j < grid.size(); ++j) CHECK(std::abs(sol.u.plus[j]) + std::abs(sol.u.minus[j]) == 0.0);
}

TEST_CASE("second-order solve recovers a manufactured solution") {
    // u0 = r^{nu+2} e^{-r^2} per component: -u'' - u'/r + (nu^2/r^2 + l^2) u
    //    = (4a + 4 + l^2 - 4 r^2 + (nu^2 - a^2)/r^2) u0, a = nu + 2.
    const auto grid = radial::RadialGrid::geometric(8.0, 900, 1e-5);
    for (int k : {0, 1, -2}) {
        for (double l : {1.0, 4.0, -7.0}) {
            dirac::ModeSpinor f, u0;
            f.k = u0.k = k;
            f.l = u0.l = l;
            f.r = u0.r = grid.r();
            for (int j = 0; j < grid.size(); ++j) {
                const double r = grid[j];
                auto make = [&](double nu, Complex amp) {
                    const double a = nu + 2.0;
                    const double base = std::pow(r, a) * std::exp(-r * r);
                    return std::pair{amp * base, amp * base * (4 * a + 4 + l * l - 4 * r * r + (nu * nu - a * a) / (r * r))};
                };
                const auto [up, fp] = make(std::abs(k - 0.5), Complex(1.0, 0.5));
                const auto [um, fm] = make(std::abs(k + 0.5), Complex(-0.3, 2.0));
                u0.plus.push_back(up);
                u0.minus.push_back(um);
                f.plus.push_back(fp);
                f.minus.push_back(fm);
            }
            const auto sol = solve_second_order(f, grid);
            double err = 0.0, ref = 0.0;
            for (int j = 0; j < grid.size(); ++j) {
                err = std::max({err, std::abs(sol.u.plus[j] - u0.plus[j]), std::abs(sol.u.minus[j] - u0.minus[j])});
                ref = std::max({ref, std::abs(u0.plus[j]), std::abs(u0.minus[j])});
            }
            CHECK(err < 1e-6 * ref);
            CHECK(sol.residual < 1e-6);
        }
    }
}

TEST_CASE("decay of second-order solutions is uniform in l") {
    const auto grid = radial::RadialGrid::geometric(8.0, 2800, 1e-5);
    std::vector<double> rates;
    for (double l : {4.0, 8.0, 16.0, 32.0, 64.0}) {
        dirac::ModeSpinor f;
        f.k = 0;
        f.l = l;
        f.r = grid.r();
        for (int j = 0; j < grid.size(); ++j) {
            const double b = bump(l * grid[j]);
            f.plus.push_back(b);
            f.minus.push_back(0.5 * b);
        }
        const auto sol = solve_second_order(f, grid);
        const auto rep = annuli_decay(sol.u, AnnuliPartition(l, 1.0, 40), grid);
        CHECK(rep.decaying);
        rates.push_back(rep.rate);
    }
    const double lo = *std::min_element(rates.begin(), rates.end());
    const double hi = *std::max_element(rates.begin(), rates.end());
    CHECK((hi - lo) / lo < 0.2);
}

TEST_CASE("discrete maximum principle: basic certificates") {
    std::vector<double> a(20, 0.0), s(20);
    for (int n = 0; n < 20; ++n) s[n] = std::exp(-n);
    auto c = discrete_max_principle(a, s);
    CHECK(c.hypotheses_hold);
    CHECK(c.certified);
    CHECK(c.first_violation == -1);

    auto bumped = s;
    bumped[7] += 0.5;
    c = discrete_max_principle(bumped, s);
    CHECK_FALSE(c.hypotheses_hold);
    CHECK(c.first_hypothesis_failure == 7);
    CHECK_FALSE(c.certified);
    CHECK(c.first_violation == 7);
}

TEST_CASE("discrete maximum principle on sampled instances") {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> ud(0.0, 1.0);
    int accepted = 0, certified = 0;
    while (accepted < 1000) {
        const int n = 6 + static_cast<int>(ud(rng) * 20);
        const double c = 0.5 + 4.0 * ud(rng);
        std::vector<double> a(n), s(n);
        for (int i = 0; i < n; ++i) {
            s[i] = 2.0 * std::exp(-2.0 * i / c);
            // Mostly below s, sometimes above, so rejection has work to do.
            a[i] = s[i] * (ud(rng) * 1.02) + (ud(rng) < 0.3 ? 0.02 * ud(rng) * s[0] : 0.0);
        }
        const auto cert = discrete_max_principle(a, s);
        if (!cert.hypotheses_hold) continue;
        ++accepted;
        // Exhaustive scan oracle.
        bool below = true;
        for (int i = 0; i < n; ++i) below = below && a[i] <= s[i];
        CHECK(cert.certified == below);
        if (cert.certified) ++certified;
    }
    CHECK(certified == 1000);

    for (int trial = 0; trial < 100; ++trial) {
        const int n = 10 + trial % 15;
        std::vector<double> s(n), a(n);
        for (int i = 0; i < n; ++i) s[i] = std::exp(-0.3 * i), a[i] = 0.5 * s[i];
        const int j = 1 + trial % (n - 2);
        a[j] = s[j] * (1.5 + ud(rng));
        const auto cert = discrete_max_principle(a, s);
        CHECK_FALSE(cert.certified);
        CHECK(cert.first_violation == j);
    }
}
