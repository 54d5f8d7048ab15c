#include "edgelab/dirac.hpp"

#include <algorithm>
#include <cmath>

#include "edgelab/fft.hpp"
#include "edgelab/parallel.hpp"

namespace edgelab::dirac {

Mat2 CliffordFrame::sigma_t() { return {{{kI, 0.0}, {0.0, -kI}}}; }
Mat2 CliffordFrame::sigma_x() { return {{{0.0, -1.0}, {1.0, 0.0}}}; }
Mat2 CliffordFrame::sigma_y() { return {{{0.0, kI}, {kI, 0.0}}}; }
std::array<Mat2, 3> CliffordFrame::all() { return {sigma_t(), sigma_x(), sigma_y()}; }

Spinor apply(const Mat2& m, const Spinor& v) {
    return {m[0][0] * v[0] + m[0][1] * v[1], m[1][0] * v[0] + m[1][1] * v[1]};
}

Mat2 operator*(const Mat2& a, const Mat2& b) {
    Mat2 c{};
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) c[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
    return c;
}

double ModeSpinor::l2_norm(const radial::RadialGrid& grid) const {
    double acc = 0.0;
    const auto& w = grid.weights();
    for (std::size_t j = 0; j < r.size(); ++j) acc += w[j] * (std::norm(plus[j]) + std::norm(minus[j]));
    return std::sqrt(acc);
}

std::array<std::array<double, 2>, 2> mode_ode_matrix(int k, double l, double r) {
    if (!(r > 0.0)) throw std::invalid_argument("mode_ode_matrix: r must be positive");
    return {{{(k - 0.5) / r, -l}, {-l, -(k + 0.5) / r}}};
}

ModeSpinor euclidean_obstruction_mode(double l, const radial::RadialGrid& grid) {
    if (l == 0.0) throw std::invalid_argument("euclidean_obstruction_mode: l = 0 is not L^2 on the plane");
    ModeSpinor m;
    m.k = 0;
    m.l = l;
    m.r = grid.r();
    m.plus.resize(grid.size());
    m.minus.resize(grid.size());
    const double a = std::abs(l);
    for (int j = 0; j < grid.size(); ++j) {
        const double v = std::sqrt(a) * std::exp(-a * grid[j]) / std::sqrt(grid[j]);
        m.plus[j] = v;
        m.minus[j] = sgn(l) * v;
    }
    return m;
}

double scaled_bessel_k_half(int m, double x) {
    if (!(x > 0.0)) throw std::invalid_argument("scaled_bessel_k_half: x must be positive");
    const int n = m >= 0 ? m : -m - 1;
    double term = 1.0, sum = 1.0;
    for (int j = 1; j <= n; ++j) {
        // (n+j)!/(j!(n-j)!) (2x)^{-j} from the previous term
        term *= double(n + j) * double(n - j + 1) / (double(j) * 2.0 * x);
        sum += term;
    }
    return std::sqrt(kPi / (2.0 * x)) * sum;
}

namespace {

using State = std::array<Complex, 2>;

State rhs(int k, double l, double s, const State& y) {
    const double r = std::exp(s);
    return {(k - 0.5) * y[0] - l * r * y[1], -l * r * y[0] - (k + 0.5) * y[1]};
}

State axpy(const State& y, double a, const State& d) { return {y[0] + a * d[0], y[1] + a * d[1]}; }

// Integrate across the grid from node `start` toward `stop` (either direction).
std::vector<State> integrate_grid(int k, double l, const radial::RadialGrid& grid, int start, State y0,
                                  double step_tol, int& steps) {
    const int n = grid.size();
    std::vector<State> out(n);
    out[start] = y0;
    const int dir = start == 0 ? 1 : -1;
    State y = y0;
    for (int j = start; j + dir >= 0 && j + dir < n; j += dir) {
        const double s0 = std::log(grid[j]);
        const double s1 = std::log(grid[j + dir]);
        const double rmax = std::max(grid[j], grid[j + dir]);
        const double stiff = std::abs(l) * rmax + std::abs(k) + 1.0;
        const int sub = std::max(1, int(std::ceil(std::abs(s1 - s0) * stiff / step_tol)));
        const double h = (s1 - s0) / sub;
        double s = s0;
        for (int i = 0; i < sub; ++i) {
            const State k1 = rhs(k, l, s, y);
            const State k2 = rhs(k, l, s + 0.5 * h, axpy(y, 0.5 * h, k1));
            const State k3 = rhs(k, l, s + 0.5 * h, axpy(y, 0.5 * h, k2));
            const State k4 = rhs(k, l, s + h, axpy(y, h, k3));
            for (int c = 0; c < 2; ++c) y[c] += h / 6.0 * (k1[c] + 2.0 * k2[c] + 2.0 * k3[c] + k4[c]);
            s += h;
            ++steps;
        }
        if (!std::isfinite(std::abs(y[0])) || !std::isfinite(std::abs(y[1])))
            throw NumericalError("solve_mode_ode: integrator overflow");
        out[j + dir] = y;
    }
    return out;
}

State frobenius_start(int k, double l, double r, bool second) {
    if (k >= 1) return {std::pow(r, k - 0.5), -l / (2.0 * k + 1.0) * std::pow(r, k + 0.5)};
    if (k <= -1) return {-l / (2.0 * -k + 1.0) * std::pow(r, -k + 0.5), std::pow(r, -k - 0.5)};
    const double a = second ? 0.0 : 1.0, b = second ? 1.0 : 0.0;
    const double q = 1.0 / std::sqrt(r);
    return {q * (a - l * b * r), q * (b - l * a * r)};
}

State decaying_at(int k, double l, double R) {
    if (l == 0.0) {
        if (k >= 1) return {0.0, std::pow(R, -k - 0.5)};
        return {std::pow(R, k - 0.5), 0.0};
    }
    const double a = std::abs(l), x = a * R;
    const double pref = a * std::sqrt(2.0 / kPi) * std::exp(-x);
    return {pref * scaled_bessel_k_half(k - 1, x), sgn(l) * pref * scaled_bessel_k_half(k, x)};
}

double fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = double(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

ModeSpinor to_mode(int k, double l, const radial::RadialGrid& grid, const std::vector<State>& ys) {
    ModeSpinor m;
    m.k = k;
    m.l = l;
    m.r = grid.r();
    m.plus.resize(ys.size());
    m.minus.resize(ys.size());
    for (std::size_t j = 0; j < ys.size(); ++j) {
        m.plus[j] = ys[j][0];
        m.minus[j] = ys[j][1];
    }
    return m;
}

}  // namespace

ModeSolution solve_mode_ode(int k, double l, const BoundaryData& bc, const radial::RadialGrid& grid,
                            double step_tol) {
    const int n = grid.size();
    ModeSolution sol;
    std::vector<State> ys;
    switch (bc.branch) {
        case Branch::Decaying:
            ys = integrate_grid(k, l, grid, n - 1, decaying_at(k, l, grid.R()), step_tol, sol.steps);
            break;
        case Branch::Growing:
        case Branch::Regular:
            ys = integrate_grid(k, l, grid, 0, frobenius_start(k, l, grid.r_min(), false), step_tol, sol.steps);
            break;
        case Branch::InitialValue:
            ys = integrate_grid(k, l, grid, bc.from_outer ? n - 1 : 0, bc.value, step_tol, sol.steps);
            break;
        case Branch::TwoPoint: {
            const auto y1 = integrate_grid(k, l, grid, 0, {1.0, 0.0}, step_tol, sol.steps);
            const auto y2 = integrate_grid(k, l, grid, 0, {0.0, 1.0}, step_tol, sol.steps);
            // rows: inner . (x1 e1 + x2 e2), outer . (x1 y1(R) + x2 y2(R))
            const Complex a11 = bc.inner_row[0], a12 = bc.inner_row[1];
            const Complex a21 = bc.outer_row[0] * y1[n - 1][0] + bc.outer_row[1] * y1[n - 1][1];
            const Complex a22 = bc.outer_row[0] * y2[n - 1][0] + bc.outer_row[1] * y2[n - 1][1];
            const Complex det = a11 * a22 - a12 * a21;
            const double scale = std::abs(a11 * a22) + std::abs(a12 * a21);
            if (std::abs(det) <= 1e-13 * scale) throw NumericalError("solve_mode_ode: two-point data is singular");
            const Complex x1 = (bc.inner_value * a22 - a12 * bc.outer_value) / det;
            const Complex x2 = (a11 * bc.outer_value - a21 * bc.inner_value) / det;
            ys.resize(n);
            for (int j = 0; j < n; ++j)
                for (int c = 0; c < 2; ++c) ys[j][c] = x1 * y1[j][c] + x2 * y2[j][c];
            break;
        }
    }
    sol.mode = to_mode(k, l, grid, ys);

    const auto dp = grid.d_ds(sol.mode.plus);
    const auto dm = grid.d_ds(sol.mode.minus);
    const auto& w = grid.weights();
    double res = 0.0, nrm = 0.0;
    for (int j = 0; j < n; ++j) {
        const State f = rhs(k, l, std::log(grid[j]), ys[j]);
        res += w[j] * (std::norm(dp[j] - f[0]) + std::norm(dm[j] - f[1]));
        nrm += w[j] * (std::norm(ys[j][0]) + std::norm(ys[j][1]));
    }
    sol.residual = nrm > 0.0 ? std::sqrt(res / nrm) : 0.0;

    std::vector<double> xs, lys;
    for (int j = 0; j < n; ++j) {
        if (grid[j] < 0.5 * grid.R()) continue;
        const double mag = std::hypot(std::abs(ys[j][0]), std::abs(ys[j][1]));
        if (mag <= 0.0) continue;
        xs.push_back(grid[j]);
        lys.push_back(std::log(mag));
    }
    sol.growth_rate = xs.size() >= 2 ? fit_slope(xs, lys) : 0.0;
    sol.exponential_growth = l != 0.0 && sol.growth_rate > 0.5 * std::abs(l);
    return sol;
}

double l2_mismatch(int k, double l, const radial::RadialGrid& grid, double r_match) {
    const auto a = solve_mode_ode(k, l, BoundaryData::regular(), grid).mode;
    const auto b = solve_mode_ode(k, l, BoundaryData::decaying(), grid).mode;
    int j = 0;
    for (int i = 0; i < grid.size(); ++i)
        if (std::abs(grid[i] - r_match) < std::abs(grid[j] - r_match)) j = i;
    const Complex det = a.plus[j] * b.minus[j] - a.minus[j] * b.plus[j];
    const double na = std::hypot(std::abs(a.plus[j]), std::abs(a.minus[j]));
    const double nb = std::hypot(std::abs(b.plus[j]), std::abs(b.minus[j]));
    return std::abs(det) / (na * nb);
}

double fit_decay_rate(const ModeSpinor& m, double r_lo, double r_hi) {
    std::vector<double> xs, ys;
    for (std::size_t j = 0; j < m.r.size(); ++j) {
        if (m.r[j] < r_lo || m.r[j] > r_hi) continue;
        const double v = std::abs(m.plus[j]) * std::sqrt(m.r[j]);
        if (v <= 0.0) continue;
        xs.push_back(m.r[j]);
        ys.push_back(std::log(v));
    }
    if (xs.size() < 2) throw std::invalid_argument("fit_decay_rate: empty fit window");
    return -fit_slope(xs, ys);
}

MuMode mu_perturbed_mode(double l, double mu, const radial::RadialGrid& grid) {
    if (!(mu > 0.0)) throw std::invalid_argument("mu_perturbed_mode: mu must be positive");
    MuMode out;
    const double kappa = std::sqrt(l * l + mu * mu);
    out.expected_rate = kappa;
    auto& cf = out.closed_form;
    cf.k = 0;
    cf.l = l;
    cf.r = grid.r();
    for (int j = 0; j < grid.size(); ++j) {
        const double v = std::exp(-kappa * grid[j]) / std::sqrt(grid[j]);
        cf.plus.push_back(v);
        cf.minus.push_back(v);
    }
    // The mu-perturbed kernel solves the flat radial system with |l| replaced by kappa.
    out.integrated = solve_mode_ode(0, kappa, BoundaryData::decaying(), grid).mode;
    out.fitted_rate = fit_decay_rate(out.integrated, 0.25 * grid.R(), grid.R());
    double num = 0.0, den = 0.0;
    const auto& w = grid.weights();
    const double norm = 1.0 / std::sqrt(kappa);
    for (int j = 0; j < grid.size(); ++j) {
        num += w[j] * std::norm(out.integrated.plus[j] * norm - cf.plus[j]);
        den += w[j] * std::norm(cf.plus[j]);
    }
    out.closed_form_error = std::sqrt(num / den);
    return out;
}

// ---------------------------------------------------------------------------

SpinorGrid::SpinorGrid(int nt, double L, radial::RadialGrid rg, int ntheta)
    : n_t(nt), circumference(L), radial(std::move(rg)), n_theta(ntheta) {
    if (nt < 1 || ntheta < 1) throw std::invalid_argument("SpinorGrid: empty angular grid");
    if (!(L > 0.0)) throw std::invalid_argument("SpinorGrid: circumference must be positive");
    if (radial.size() == 0 || !(radial.r_min() > 0.0))
        throw std::invalid_argument("SpinorGrid: radial grid must not touch r = 0");
}

bool SpinorGrid::operator==(const SpinorGrid& o) const {
    return n_t == o.n_t && n_theta == o.n_theta && circumference == o.circumference && radial == o.radial;
}

SpinorField::SpinorField(const SpinorGrid& grid)
    : grid_(grid), plus_(grid.size(), Complex{}), minus_(grid.size(), Complex{}) {}

SpinorField SpinorField::from_function(const SpinorGrid& grid,
                                       const std::function<Spinor(double, double, double)>& f) {
    SpinorField out(grid);
    const int nr = grid.radial.size();
    parallel_for(grid.n_t, [&](int it) {
        for (int ir = 0; ir < nr; ++ir)
            for (int ith = 0; ith < grid.n_theta; ++ith) {
                const auto v = f(grid.t(it), grid.radial[ir], grid.theta(ith));
                const auto idx = grid.index(it, ir, ith);
                out.plus_[idx] = v[0];
                out.minus_[idx] = v[1];
            }
    });
    return out;
}

static void check_same_grid(const SpinorField& a, const SpinorField& b) {
    if (!(a.grid() == b.grid())) throw std::invalid_argument("SpinorField: grid mismatch");
}

SpinorField& SpinorField::operator+=(const SpinorField& o) {
    check_same_grid(*this, o);
    for (std::size_t i = 0; i < plus_.size(); ++i) {
        plus_[i] += o.plus_[i];
        minus_[i] += o.minus_[i];
    }
    return *this;
}

SpinorField& SpinorField::operator-=(const SpinorField& o) {
    check_same_grid(*this, o);
    for (std::size_t i = 0; i < plus_.size(); ++i) {
        plus_[i] -= o.plus_[i];
        minus_[i] -= o.minus_[i];
    }
    return *this;
}

SpinorField& SpinorField::operator*=(Complex s) {
    for (std::size_t i = 0; i < plus_.size(); ++i) {
        plus_[i] *= s;
        minus_[i] *= s;
    }
    return *this;
}

double SpinorField::max_abs() const {
    double m = 0.0;
    for (std::size_t i = 0; i < plus_.size(); ++i) m = std::max({m, std::abs(plus_[i]), std::abs(minus_[i])});
    return m;
}

SpinorField operator+(SpinorField a, const SpinorField& b) { return a += b; }
SpinorField operator-(SpinorField a, const SpinorField& b) { return a -= b; }
SpinorField operator*(Complex s, SpinorField a) { return a *= s; }

namespace {

// Spectral derivative of a periodic line of n samples over period P.
void spectral_line_derivative(std::vector<Complex>& line, double period) {
    const int n = static_cast<int>(line.size());
    detail::dft(line, -1);
    for (int j = 0; j < n; ++j) {
        const int m = j <= n / 2 ? j : j - n;
        const double w = (2 * m == n) ? 0.0 : kTwoPi * m / period;
        line[j] *= kI * w / double(n);
    }
    detail::dft(line, +1);
}

}  // namespace

std::vector<Complex> d_t(const SpinorGrid& g, const std::vector<Complex>& f) {
    std::vector<Complex> out(f.size());
    const int nr = g.radial.size();
    parallel_for(nr, [&](int ir) {
        std::vector<Complex> line(g.n_t);
        for (int ith = 0; ith < g.n_theta; ++ith) {
            for (int it = 0; it < g.n_t; ++it) line[it] = f[g.index(it, ir, ith)];
            spectral_line_derivative(line, g.circumference);
            for (int it = 0; it < g.n_t; ++it) out[g.index(it, ir, ith)] = line[it];
        }
    });
    return out;
}

std::vector<Complex> d_theta(const SpinorGrid& g, const std::vector<Complex>& f) {
    std::vector<Complex> out(f.size());
    const int nr = g.radial.size();
    parallel_for(g.n_t, [&](int it) {
        std::vector<Complex> line(g.n_theta);
        for (int ir = 0; ir < nr; ++ir) {
            const auto base = g.index(it, ir, 0);
            std::copy(f.begin() + base, f.begin() + base + g.n_theta, line.begin());
            spectral_line_derivative(line, kTwoPi);
            std::copy(line.begin(), line.end(), out.begin() + base);
        }
    });
    return out;
}

std::vector<Complex> d_r(const SpinorGrid& g, const std::vector<Complex>& f) {
    std::vector<Complex> out(f.size());
    const int nr = g.radial.size();
    parallel_for(g.n_t, [&](int it) {
        std::vector<Complex> line(nr);
        for (int ith = 0; ith < g.n_theta; ++ith) {
            for (int ir = 0; ir < nr; ++ir) line[ir] = f[g.index(it, ir, ith)];
            const auto d = g.radial.d_dr(line);
            for (int ir = 0; ir < nr; ++ir) out[g.index(it, ir, ith)] = d[ir];
        }
    });
    return out;
}

namespace {

// Per theta-mode m of the twisted samples (full angular exponent a = m + 1/2) the radial
// parts of D are r^{-a} d_r(r^a .) and r^{a} d_r(r^{-a} .); the factored form avoids the
// cancellation between d_r and a/r on axis-singular profiles.
std::vector<Complex> weighted_radial(const SpinorGrid& g, const std::vector<Complex>& f, int sign) {
    const int nr = g.radial.size(), nth = g.n_theta;
    std::vector<double> up(std::size_t(nth) * nr), down(std::size_t(nth) * nr);
    for (int j = 0; j < nth; ++j) {
        const int m = j <= nth / 2 ? j : j - nth;
        const double a = sign * (m + 0.5);
        for (int ir = 0; ir < nr; ++ir) {
            up[std::size_t(j) * nr + ir] = std::pow(g.radial[ir], a);
            down[std::size_t(j) * nr + ir] = std::pow(g.radial[ir], -a - 1.0);
        }
    }
    std::vector<Complex> out(f.size());
    parallel_for(g.n_t, [&](int it) {
        std::vector<std::vector<Complex>> modes(nth, std::vector<Complex>(nr));
        std::vector<Complex> row(nth);
        for (int ir = 0; ir < nr; ++ir) {
            const auto base = g.index(it, ir, 0);
            std::copy(f.begin() + base, f.begin() + base + nth, row.begin());
            detail::dft(row, -1);
            // Rounding-level theta content would be amplified by the 1/r weights.
            double peak = 0.0;
            for (const auto& v : row) peak = std::max(peak, std::abs(v));
            for (int j = 0; j < nth; ++j)
                modes[j][ir] = std::abs(row[j]) > 1e-13 * peak ? row[j] / double(nth) : Complex{};
        }
        for (int j = 0; j < nth; ++j) {
            auto& line = modes[j];
            bool zero = true;
            for (int ir = 0; ir < nr; ++ir) {
                line[ir] *= up[std::size_t(j) * nr + ir];
                zero = zero && line[ir] == Complex{};
            }
            if (zero) continue;
            line = g.radial.d_ds(line);
            for (int ir = 0; ir < nr; ++ir) line[ir] *= down[std::size_t(j) * nr + ir];
        }
        for (int ir = 0; ir < nr; ++ir) {
            for (int j = 0; j < nth; ++j) row[j] = modes[j][ir];
            detail::dft(row, +1);
            std::copy(row.begin(), row.end(), out.begin() + g.index(it, ir, 0));
        }
    });
    return out;
}

}  // namespace

SpinorField dirac_apply(const SpinorField& psi) {
    const auto& g = psi.grid();
    const auto& p = psi.plus();
    const auto& m = psi.minus();
    const auto pt = d_t(g, p), mt = d_t(g, m);
    // (d_r + a/r) on minus, (d_r - a/r) on plus.
    const auto mr = weighted_radial(g, m, +1);
    const auto pr = weighted_radial(g, p, -1);
    SpinorField out(g);
    const int nr = g.radial.size();
    for (int it = 0; it < g.n_t; ++it)
        for (int ir = 0; ir < nr; ++ir)
            for (int ith = 0; ith < g.n_theta; ++ith) {
                const auto i = g.index(it, ir, ith);
                const double th = g.theta(ith);
                const Complex e(std::cos(th), std::sin(th));
                out.plus()[i] = kI * pt[i] - std::conj(e) * mr[i];
                out.minus()[i] = e * pr[i] - kI * mt[i];
            }
    return out;
}

double dirac_residual_l2(const SpinorField& psi) {
    const auto out = dirac_apply(psi);
    const auto& g = psi.grid();
    const auto& w = g.radial.weights();
    double acc = 0.0;
    for (int it = 0; it < g.n_t; ++it)
        for (int ir = 0; ir < g.radial.size(); ++ir)
            for (int ith = 0; ith < g.n_theta; ++ith) {
                const auto i = g.index(it, ir, ith);
                acc += w[ir] * (std::norm(out.plus()[i]) + std::norm(out.minus()[i]));
            }
    acc *= g.circumference / g.n_t * kTwoPi / g.n_theta;
    const double n = l2_norm(psi);
    return n > 0.0 ? std::sqrt(acc) / n : 0.0;
}

SpinorField obstruction_field(int l, const SpinorGrid& grid) {
    if (l == 0) throw std::invalid_argument("obstruction_field: l = 0 is excluded on the plane");
    const double w = grid.frequency(l);
    const double a = std::abs(w);
    return SpinorField::from_function(grid, [&](double t, double r, double th) -> Spinor {
        const double rad = std::sqrt(a) * std::exp(-a * r) / std::sqrt(r);
        const Complex et(std::cos(w * t), std::sin(w * t));
        return {rad * et * Complex(std::cos(th), -std::sin(th)), sgn(l) * rad * et};
    });
}

Complex l2_pairing(const SpinorField& psi, const SpinorField& phi) {
    check_same_grid(psi, phi);
    const auto& g = psi.grid();
    const int nr = g.radial.size();
    const double wa = g.circumference / g.n_t * kTwoPi / g.n_theta;
    std::vector<Complex> F(nr);
    for (int ir = 0; ir < nr; ++ir) {
        Complex acc{};
        for (int it = 0; it < g.n_t; ++it)
            for (int ith = 0; ith < g.n_theta; ++ith) {
                const auto i = g.index(it, ir, ith);
                acc += psi.plus()[i] * std::conj(phi.plus()[i]) + psi.minus()[i] * std::conj(phi.minus()[i]);
            }
        F[ir] = wa * acc;
    }
    const auto I = radial::integrate(g.radial, F);
    if (!I.integrable) throw NumericalError("l2_pairing: integrand is not integrable at the axis");
    return I.value;
}

double l2_norm(const SpinorField& psi) { return std::sqrt(std::max(0.0, l2_pairing(psi, psi).real())); }

std::vector<Complex> obstruction_coefficients(const SpinorField& psi, int l_max) {
    const auto& g = psi.grid();
    if (g.n_t <= 2 * l_max) throw std::invalid_argument("obstruction_coefficients: n_t must exceed 2 l_max");
    const int nr = g.radial.size();
    const double L = g.circumference;
    const double wth = kTwoPi / g.n_theta;
    // G[ir][l + l_max] = (plus part, minus part) after t and theta integration.
    std::vector<std::vector<Complex>> Gp(nr, std::vector<Complex>(2 * l_max + 1));
    std::vector<std::vector<Complex>> Gm(nr, std::vector<Complex>(2 * l_max + 1));
    parallel_for(nr, [&](int ir) {
        std::vector<Complex> lp(g.n_t), lm(g.n_t);
        for (int ith = 0; ith < g.n_theta; ++ith) {
            for (int it = 0; it < g.n_t; ++it) {
                lp[it] = psi.plus()[g.index(it, ir, ith)];
                lm[it] = psi.minus()[g.index(it, ir, ith)];
            }
            detail::dft(lp, -1);
            detail::dft(lm, -1);
            const double th = g.theta(ith);
            const Complex e(std::cos(th), std::sin(th));
            for (int l = -l_max; l <= l_max; ++l) {
                const int j = ((l % g.n_t) + g.n_t) % g.n_t;
                Gp[ir][l + l_max] += wth * e * L * lp[j] / double(g.n_t);
                Gm[ir][l + l_max] += wth * L * lm[j] / double(g.n_t);
            }
        }
    });
    std::vector<Complex> out(2 * l_max + 1);
    parallel_for(2 * l_max + 1, [&](int idx) {
        const int l = idx - l_max;
        if (l == 0) return;
        const double a = std::abs(g.frequency(l));
        std::vector<Complex> F(nr);
        for (int ir = 0; ir < nr; ++ir) {
            const double r = g.radial[ir];
            const double f = std::sqrt(a) * std::exp(-a * r) / std::sqrt(r);
            F[ir] = f * (Gp[ir][idx] + double(sgn(l)) * Gm[ir][idx]);
        }
        out[idx] = radial::integrate(g.radial, F).value;
    });
    return out;
}

AdjointnessResult adjointness_check(const SpinorField& psi, const SpinorField& phi, double tol) {
    check_same_grid(psi, phi);
    AdjointnessResult res;
    const auto Dpsi = dirac_apply(psi);
    const auto Dphi = dirac_apply(phi);
    res.difference = l2_pairing(Dpsi, phi) - l2_pairing(psi, Dphi);
    const double n = l2_norm(psi) * l2_norm(phi);
    res.defect = n > 0.0 ? std::abs(res.difference) / n : 0.0;
    const auto& g = psi.grid();
    auto inner = [&](const SpinorField& f) {
        double m = 0.0;
        for (int it = 0; it < g.n_t; ++it)
            for (int ith = 0; ith < g.n_theta; ++ith) {
                const auto i = g.index(it, 0, ith);
                m = std::max({m, std::abs(f.plus()[i]), std::abs(f.minus()[i])});
            }
        return m;
    };
    res.touches_axis = inner(psi) > 1e-8 * psi.max_abs() || inner(phi) > 1e-8 * phi.max_abs();
    res.boundary_defect = res.touches_axis && res.defect > tol;
    return res;
}

double LeadingData::min_modulus_sq(int n_points) const {
    if (n_points <= 0) n_points = std::max(64, 8 * (std::max(c.order(), d.order()) + 1));
    const auto cs = c.sample(n_points);
    const auto ds = d.sample(n_points);
    double m = INFINITY;
    for (int j = 0; j < n_points; ++j) m = std::min(m, std::norm(cs[j]) + std::norm(ds[j]));
    return m;
}

SpinorField leading_spinor(const LeadingData& data, const SpinorGrid& grid) {
    SpinorField out(grid);
    std::vector<Complex> cs(grid.n_t), ds(grid.n_t);
    for (int it = 0; it < grid.n_t; ++it) {
        cs[it] = data.c.evaluate(grid.t(it));
        ds[it] = data.d.evaluate(grid.t(it));
    }
    const int nr = grid.radial.size();
    for (int it = 0; it < grid.n_t; ++it)
        for (int ir = 0; ir < nr; ++ir) {
            const double q = std::sqrt(grid.radial[ir]);
            for (int ith = 0; ith < grid.n_theta; ++ith) {
                const double th = grid.theta(ith);
                const auto i = grid.index(it, ir, ith);
                out.plus()[i] = cs[it] * q;
                out.minus()[i] = ds[it] * q * Complex(std::cos(th), -std::sin(th));
            }
        }
    return out;
}

}  // namespace edgelab::dirac
