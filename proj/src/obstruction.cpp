#include "edgelab/obstruction.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "edgelab/fft.hpp"
#include "edgelab/fit.hpp"
#include "edgelab/parallel.hpp"

namespace edgelab::obstruction {

using spectral::FourierSeries;

FourierSeries project_to_obstruction(const dirac::SpinorField& psi, int l_max) {
    const auto coeffs = dirac::obstruction_coefficients(psi, l_max);
    FourierSeries out(l_max, psi.grid().circumference);
    for (int l = -l_max; l <= l_max; ++l) out[l] = coeffs[l + l_max];
    return out;
}

namespace {

int pow2_at_least(int n) {
    int p = 1;
    while (p < n) p *= 2;
    return p;
}

double local_slope(const std::vector<double>& x, const std::vector<double>& y, std::size_t lo, std::size_t hi) {
    std::vector<double> xs, ys;
    for (std::size_t i = lo; i < hi; ++i) {
        if (y[i] > 0.0) {
            xs.push_back(std::log(x[i]));
            ys.push_back(std::log(y[i]));
        }
    }
    if (xs.size() < 2) return -INFINITY;
    return fit_line(xs, ys).slope;
}

}  // namespace

ConormalFit conormal_rate(const FourierSeries& f, double p, int l_lo, int l_hi, const ConormalOptions& opt) {
    if (l_lo < 1 || l_hi <= l_lo) throw std::invalid_argument("conormal_rate: need 1 <= l_lo < l_hi");
    const int n_t = pow2_at_least(2 * std::max(l_hi, f.order()) + 2);
    const dirac::SpinorGrid grid(n_t, f.circumference(),
                                 radial::RadialGrid::geometric(opt.R, opt.radial_points, opt.min_ratio), opt.n_theta);
    const double R = opt.R;
    const auto profile = opt.profile ? opt.profile : std::function<double(double)>([R, p](double r) {
        return spectral::cutoff_profile(4.0 * r / R) * std::pow(r, p);
    });
    const auto fs = f.sample(n_t);
    const int nr = grid.radial.size();
    std::vector<double> rho(nr);
    for (int ir = 0; ir < nr; ++ir) rho[ir] = profile(grid.radial[ir]);
    dirac::SpinorField psi(grid);
    for (int it = 0; it < n_t; ++it)
        for (int ir = 0; ir < nr; ++ir)
            for (int ith = 0; ith < grid.n_theta; ++ith) {
                const double th = grid.theta(ith);
                psi.plus()[grid.index(it, ir, ith)] = fs[it] * rho[ir] * Complex(std::cos(th), -std::sin(th));
            }
    const auto coeffs = dirac::obstruction_coefficients(psi, l_hi);

    ConormalFit fit;
    fit.p = p;
    fit.expected_slope = -(p + 1.0);
    const double fmax = f.max_abs_coeff();
    std::vector<double> x;
    for (int l = l_lo; l <= l_hi; ++l) {
        const Complex fl = f.coeff(l);
        if (std::abs(fl) <= 1e-14 * fmax) throw DegenerateError("conormal_rate: f_l vanishes on the range", l);
        fit.modes.push_back(l);
        fit.coefficients.push_back(coeffs[l + l_hi]);
        fit.normalized.push_back(std::abs(coeffs[l + l_hi]) / std::abs(fl));
        x.push_back(l);
    }
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (fit.normalized[i] > 0.0) {
            lx.push_back(std::log(x[i]));
            ly.push_back(std::log(fit.normalized[i]));
        }
    }
    if (lx.size() >= 2) {
        const auto lf = fit_line(lx, ly);
        fit.slope = lf.slope;
        fit.intercept = lf.intercept;
        fit.residual = lf.residual;
    } else {
        fit.slope = -INFINITY;
    }
    const std::size_t n = x.size(), third = std::max<std::size_t>(2, n / 3);
    fit.local_slopes = {local_slope(x, fit.normalized, 0, third),
                        local_slope(x, fit.normalized, n / 2 - third / 2, n / 2 - third / 2 + third),
                        local_slope(x, fit.normalized, n - third, n)};
    fit.super_polynomial = fit.local_slopes[1] < fit.local_slopes[0] && fit.local_slopes[2] < fit.local_slopes[1] &&
                           fit.local_slopes[2] < fit.expected_slope - 2.0;
    return fit;
}

GramMatrix gram_matrix(const std::vector<int>& modes, const dirac::SpinorGrid& grid,
                       const std::function<double(double)>& chi, const PairingWeight& weight) {
    int max_mode = 0;
    for (int l : modes) {
        if (l == 0) throw std::invalid_argument("gram_matrix: l = 0 is excluded");
        max_mode = std::max(max_mode, std::abs(l));
    }
    if (weight && grid.n_t <= 2 * max_mode) throw std::invalid_argument("gram_matrix: n_t must exceed 2 max|l|");
    const int nr = grid.radial.size(), n = static_cast<int>(modes.size());
    const double L = grid.circumference;

    // W[ir][j] = int_0^L w(t, r) e^{2 pi i j t / L} dt for j mod n_t.
    std::vector<std::vector<Complex>> W;
    if (weight) {
        W.assign(nr, std::vector<Complex>(grid.n_t));
        parallel_for(nr, [&](int ir) {
            auto& line = W[ir];
            for (int it = 0; it < grid.n_t; ++it) line[it] = weight(grid.t(it), grid.radial[ir]);
            detail::dft(line, +1);
            for (auto& v : line) v *= L / grid.n_t;
        });
    }
    std::vector<double> chi2(nr, 1.0);
    if (chi)
        for (int ir = 0; ir < nr; ++ir) chi2[ir] = chi(grid.radial[ir]) * chi(grid.radial[ir]);

    GramMatrix g;
    g.modes = modes;
    g.G = Eigen::MatrixXcd::Zero(n, n);
    parallel_for(n, [&](int i) {
        const int k = modes[i];
        const double ak = std::abs(grid.frequency(k));
        std::vector<Complex> F(nr);
        for (int j = 0; j < n; ++j) {
            const int l = modes[j];
            if (sgn(k) != sgn(l)) continue;
            if (!weight && k != l) continue;
            const double al = std::abs(grid.frequency(l));
            const int m = (((k - l) % grid.n_t) + grid.n_t) % grid.n_t;
            for (int ir = 0; ir < nr; ++ir) {
                const double r = grid.radial[ir];
                const Complex wt = weight ? W[ir][m] : Complex(L);
                F[ir] = chi2[ir] * std::sqrt(ak * al) * std::exp(-(ak + al) * r) / r * wt;
            }
            const auto I = radial::integrate(grid.radial, F);
            g.G(i, j) = 2.0 * kTwoPi * I.value / (kTwoPi * L);
        }
    });
    g.A = g.G - Eigen::MatrixXcd::Identity(n, n);
    return g;
}

GramEnvelope gram_envelope(const GramMatrix& g) {
    GramEnvelope e;
    const int n = static_cast<int>(g.modes.size());
    for (int i = 0; i < n; ++i) {
        e.max_diagonal = std::max(e.max_diagonal, std::abs(g.A(i, i)));
        for (int j = 0; j < n; ++j) {
            if (i == j) continue;
            const double k = std::abs(g.modes[i]), l = std::abs(g.modes[j]);
            const double a = std::abs(g.A(i, j));
            e.c_half = std::max(e.c_half, a * std::sqrt(k * l));
            if (std::abs(g.modes[i] - g.modes[j]) >= std::pow(k * l, 0.25)) {
                ++e.far_pairs;
                e.c_far = std::max(e.c_far, a * k * k * l * l);
            }
        }
    }
    return e;
}

BasisChange basis_change_U(const GramMatrix& g, int L0, double m) {
    const int n = static_cast<int>(g.modes.size());
    BasisChange b;
    b.L0 = L0;
    // (U c)_l = sum_k c_k <Psi_k, Psi_l>.
    b.U = g.G.transpose();
    b.K = b.U - Eigen::MatrixXcd::Identity(n, n);
    Eigen::BDCSVD<Eigen::MatrixXcd> svd(b.U);
    b.sigma_min = n > 0 ? svd.singularValues()(n - 1) : 1.0;
    if (n > 0 && b.sigma_min < 1e-12 * svd.singularValues()(0))
        throw DegenerateError("basis_change_U: U is singular", b.sigma_min);
    std::vector<int> high;
    for (int i = 0; i < n; ++i)
        if (std::abs(g.modes[i]) > L0) high.push_back(i);
    const int h = static_cast<int>(high.size());
    if (h > 0) {
        Eigen::MatrixXcd Kh(h, h), Ks(h, h);
        for (int a = 0; a < h; ++a)
            for (int c = 0; c < h; ++c) {
                const double la = g.modes[high[a]], lc = g.modes[high[c]];
                Kh(a, c) = b.K(high[a], high[c]);
                Ks(a, c) = Kh(a, c) * std::pow(1.0 + la * la, (m + 0.125) / 2.0) / std::pow(1.0 + lc * lc, m / 2.0);
            }
        b.k_norm = Eigen::BDCSVD<Eigen::MatrixXcd>(Kh).singularValues()(0);
        b.k_smoothing_norm = Eigen::BDCSVD<Eigen::MatrixXcd>(Ks).singularValues()(0);
    }
    b.contraction = b.k_norm < 1.0;
    return b;
}

AnnuliPartition::AnnuliPartition(double l, double R0, int n_max) : l_(l), R0_(R0), n_max_(n_max) {
    if (l == 0.0) throw std::invalid_argument("AnnuliPartition: l = 0");
    if (!(R0 > 0.0) || n_max < 0) throw std::invalid_argument("AnnuliPartition: need R0 > 0, n_max >= 0");
}

double AnnuliPartition::inner(int n) const { return n * R0_ / std::abs(l_); }
double AnnuliPartition::outer(int n) const { return (n + 1) * R0_ / std::abs(l_); }

namespace {

// Gauss-Legendre nodes and weights on [0, 1].
constexpr std::array<double, 4> kGaussX{0.0694318442029737, 0.3300094782075719, 0.6699905217924281,
                                        0.9305681557970263};
constexpr std::array<double, 4> kGaussW{0.1739274225687269, 0.3260725774312731, 0.3260725774312731,
                                        0.1739274225687269};

constexpr int kStencil = 8;

// Lagrange weights at local coordinate x for nodes 0..kStencil-1.
std::array<double, kStencil> lagrange_weights(double x) {
    std::array<double, kStencil> w{};
    for (int j = 0; j < kStencil; ++j) {
        double num = 1.0, den = 1.0;
        for (int m = 0; m < kStencil; ++m) {
            if (m == j) continue;
            num *= x - m;
            den *= j - m;
        }
        w[j] = num / den;
    }
    return w;
}

int stencil_start(int i, int n) { return std::clamp(i - kStencil / 2 + 1, 0, n - kStencil); }

// Degree-7 interpolant of g on interval i at fraction tau.
template <class T>
T interpolate(const std::vector<T>& g, int i, double tau) {
    const int j0 = stencil_start(i, static_cast<int>(g.size()));
    const auto w = lagrange_weights(i - j0 + tau);
    T acc{};
    for (int j = 0; j < kStencil; ++j) acc += w[j] * g[j0 + j];
    return acc;
}

// int_{s_i}^{s_i + tau h} g ds for the interpolant of interval i (Gauss-Legendre is exact at degree 7).
double partial_integral(const std::vector<double>& g, int i, double tau, double h) {
    double acc = 0.0;
    for (int q = 0; q < 4; ++q) acc += kGaussW[q] * interpolate(g, i, tau * kGaussX[q]);
    return acc * tau * h;
}

}  // namespace

DecayReport annuli_decay(const dirac::ModeSpinor& u, const AnnuliPartition& part, const radial::RadialGrid& grid) {
    const int nr = grid.size();
    if (static_cast<int>(u.plus.size()) != nr || static_cast<int>(u.minus.size()) != nr)
        throw std::invalid_argument("annuli_decay: mode and grid sizes differ");
    const double h = grid.step();
    const auto dp = grid.d_ds(u.plus), dm = grid.d_ds(u.minus);
    const double np = u.k - 0.5, nm = u.k + 0.5;
    const double w = part.l();
    std::vector<double> G(nr);
    for (int j = 0; j < nr; ++j) {
        const double r = grid[j];
        const double dens = std::norm(u.plus[j]) * (1.0 + np * np + w * w * r * r) + std::norm(dp[j]) +
                            std::norm(u.minus[j]) * (1.0 + nm * nm + w * w * r * r) + std::norm(dm[j]);
        G[j] = dens * r * r;
    }
    // Integral in s over [s_a, s_b], accumulated locally so small annuli keep their relative accuracy.
    std::vector<double> full(nr - 1);
    for (int i = 0; i + 1 < nr; ++i) full[i] = partial_integral(G, i, 1.0, h);
    double tail = 0.0, kappa = 0.0;
    if (G[0] > 0.0 && G[1] > 0.0) {
        kappa = std::log(G[1] / G[0]) / h;
        if (kappa > 0.05) tail = G[0] / kappa;
    }
    const double s0 = std::log(grid.r_min());
    auto locate = [&](double r, int& i, double& tau) {
        const double x = (std::log(r) - s0) / h;
        i = std::clamp(static_cast<int>(x), 0, nr - 2);
        tau = x - i;
    };
    auto from_axis = [&](double r) {
        // Only the innermost annulus reaches the axis; beyond r_min it is a short sum.
        if (r <= grid.r_min()) return tail > 0.0 ? tail * std::pow(r / grid.r_min(), kappa) : 0.0;
        int i;
        double tau;
        locate(r, i, tau);
        double acc = tail;
        for (int j = 0; j < i; ++j) acc += full[j];
        return acc + partial_integral(G, i, tau, h);
    };
    auto between = [&](double ra, double rb) {
        if (ra <= grid.r_min()) return from_axis(rb) - from_axis(ra);
        int ia, ib;
        double ta, tb;
        locate(ra, ia, ta);
        locate(rb, ib, tb);
        if (ia == ib) return partial_integral(G, ib, tb, h) - partial_integral(G, ia, ta, h);
        double acc = full[ia] - partial_integral(G, ia, ta, h);
        for (int j = ia + 1; j < ib; ++j) acc += full[j];
        return acc + partial_integral(G, ib, tb, h);
    };
    DecayReport rep;
    for (int n = 0; n <= part.n_max(); ++n) {
        if (part.outer(n) > grid.R() * (1.0 + 1e-12)) break;
        rep.a.push_back(std::max(0.0, between(part.inner(n), part.outer(n))));
    }
    const double amax = rep.a.empty() ? 0.0 : *std::max_element(rep.a.begin(), rep.a.end());
    std::vector<double> xs, ys;
    for (std::size_t n = 0; n < rep.a.size(); ++n) {
        if (rep.a[n] > 1e-14 * amax) {
            xs.push_back(double(n));
            ys.push_back(std::log(rep.a[n]));
        }
    }
    rep.fitted = static_cast<int>(xs.size());
    if (xs.size() >= 2) {
        const auto lf = fit_line(xs, ys);
        rep.rate = -lf.slope;
        rep.fit_residual = lf.residual;
    }
    rep.decaying = rep.rate > 0.1;
    return rep;
}

double scaled_bessel_i_half(int n, double x) {
    if (n < 0) throw std::invalid_argument("scaled_bessel_i_half: n must be >= 0");
    if (!(x > 0.0)) throw std::invalid_argument("scaled_bessel_i_half: x must be positive");
    const double nu = n + 0.5;
    if (x < std::min(500.0, 30.0 + double(n) * n)) {
        // Positive power series, normalized by its leading term.
        const double q = x * x / 4.0;
        double term = 1.0, sum = 1.0;
        for (int j = 1; j < 10000; ++j) {
            term *= q / (j * (nu + j));
            sum += term;
            if (term < 1e-17 * sum) break;
        }
        return std::exp(nu * std::log(x / 2.0) - std::lgamma(nu + 1.0) - x) * sum;
    }
    double term = 1.0, alt = 1.0, pos = 1.0;
    for (int j = 1; j <= n; ++j) {
        term *= double(n + j) * double(n - j + 1) / (double(j) * 2.0 * x);
        alt += (j % 2 ? -term : term);
        pos += term;
    }
    const double sign = (n % 2 == 0) ? -1.0 : 1.0;
    return (alt + sign * std::exp(-2.0 * x) * pos) / std::sqrt(kTwoPi * x);
}

SecondOrderSolution solve_second_order(const dirac::ModeSpinor& f, const radial::RadialGrid& grid, double tol) {
    const int nr = grid.size();
    if (static_cast<int>(f.plus.size()) != nr || static_cast<int>(f.minus.size()) != nr)
        throw std::invalid_argument("solve_second_order: forcing and grid sizes differ");
    const double w = std::abs(f.l);
    if (w == 0.0) throw std::invalid_argument("solve_second_order: l = 0 has no decaying Green's function");
    const double h = grid.step();

    SecondOrderSolution sol;
    sol.u.k = f.k;
    sol.u.l = f.l;
    sol.u.r = grid.r();
    double res2 = 0.0, ref2 = 0.0;

    auto solve_component = [&](const std::vector<Complex>& fc, double nu) {
        const int n = static_cast<int>(nu - 0.5 + 0.25);
        std::vector<Complex> g(nr);
        std::vector<double> Ii(nr), Ki(nr);
        for (int i = 0; i < nr; ++i) {
            g[i] = fc[i] * grid[i] * grid[i];
            Ii[i] = scaled_bessel_i_half(n, w * grid[i]);
            Ki[i] = dirac::scaled_bessel_k_half(n, w * grid[i]);
        }
        std::vector<Complex> A(nr), B(nr), u(nr);
        if (std::abs(g[0]) > 0.0 && std::abs(g[1]) > 0.0) {
            const double kappa = nu + std::log(std::abs(g[1]) / std::abs(g[0])) / h;
            if (!(kappa > 0.05)) throw std::invalid_argument("solve_second_order: forcing not integrable at the axis");
            A[0] = Ii[0] * g[0] / kappa;
        }
        // Interval contributions, Gauss-Legendre in s on the interpolant of g.
        std::vector<Complex> inc_a(nr - 1), inc_b(nr - 1);
        parallel_for(nr - 1, [&](int i) {
            Complex ia{}, ib{};
            for (int q = 0; q < 4; ++q) {
                const double s = std::log(grid[i]) + kGaussX[q] * h;
                const double rho = std::exp(s);
                const Complex gq = interpolate(g, i, kGaussX[q]);
                ia += kGaussW[q] * scaled_bessel_i_half(n, w * rho) * std::exp(-w * (grid[i + 1] - rho)) * gq;
                ib += kGaussW[q] * dirac::scaled_bessel_k_half(n, w * rho) * std::exp(-w * (rho - grid[i])) * gq;
            }
            inc_a[i] = ia * h;
            inc_b[i] = ib * h;
        });
        for (int i = 1; i < nr; ++i) A[i] = std::exp(-w * (grid[i] - grid[i - 1])) * A[i - 1] + inc_a[i - 1];
        for (int i = nr - 2; i >= 0; --i) B[i] = std::exp(-w * (grid[i + 1] - grid[i])) * B[i + 1] + inc_b[i];
        for (int i = 0; i < nr; ++i) u[i] = Ki[i] * A[i] + Ii[i] * B[i];

        const auto uss = grid.d_ds(grid.d_ds(u));
        for (int i = 0; i < nr; ++i) {
            const double r = grid[i];
            res2 += std::norm(-uss[i] + (nu * nu + w * w * r * r) * u[i] - g[i]);
            ref2 += std::norm(g[i]);
        }
        return u;
    };
    sol.u.plus = solve_component(f.plus, std::abs(f.k - 0.5));
    sol.u.minus = solve_component(f.minus, std::abs(f.k + 0.5));
    sol.residual = ref2 > 0.0 ? std::sqrt(res2 / ref2) : 0.0;
    if (sol.residual > tol) throw NumericalError("solve_second_order: residual above tolerance");
    return sol;
}

MaxPrincipleCertificate discrete_max_principle(const std::vector<double>& a, const std::vector<double>& s,
                                               double lambda) {
    if (a.size() != s.size() || a.size() < 2) throw std::invalid_argument("discrete_max_principle: sizes");
    const int n = static_cast<int>(a.size());
    MaxPrincipleCertificate c;
    auto fail = [&](int i) {
        if (c.first_hypothesis_failure < 0) c.first_hypothesis_failure = i;
    };
    if (a[0] > s[0]) fail(0);
    for (int i = 1; i + 1 < n; ++i)
        if (a[i] - lambda * (a[i - 1] + a[i + 1]) > s[i] - lambda * (s[i - 1] + s[i + 1])) fail(i);
    if (a[n - 1] > s[n - 1]) fail(n - 1);
    c.hypotheses_hold = c.first_hypothesis_failure < 0;
    for (int i = 0; i < n; ++i)
        if (a[i] > s[i]) {
            c.first_violation = i;
            break;
        }
    c.certified = c.first_violation < 0;
    return c;
}

}  // namespace edgelab::obstruction
