#include "edgelab/radial.hpp"

#include <algorithm>
#include <cmath>

#include "edgelab/spectral.hpp"

namespace edgelab::radial {

namespace {

constexpr int kStencil = 9;
constexpr int kCorrection = 7;

// Gregory end corrections to the trapezoid rule; exact for polynomials of degree <= 7.
const std::vector<double>& end_corrections() {
    static const std::vector<double> a = {3383.0 / 17280.0,   -6961.0 / 15120.0, 66109.0 / 120960.0,
                                          -33.0 / 70.0,       31523.0 / 120960.0, -1247.0 / 15120.0,
                                          275.0 / 24192.0};
    return a;
}

}  // namespace

std::vector<double> fd_weights(double x0, const std::vector<double>& x, int deriv) {
    const int n = static_cast<int>(x.size());
    std::vector<std::vector<double>> c(n, std::vector<double>(deriv + 1, 0.0));
    double c1 = 1.0, c4 = x[0] - x0;
    c[0][0] = 1.0;
    for (int i = 1; i < n; ++i) {
        const int mn = std::min(i, deriv);
        double c2 = 1.0;
        const double c5 = c4;
        c4 = x[i] - x0;
        for (int j = 0; j < i; ++j) {
            const double c3 = x[i] - x[j];
            c2 *= c3;
            if (j == i - 1) {
                for (int k = mn; k >= 1; --k) c[i][k] = c1 * (k * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for (int k = mn; k >= 1; --k) c[j][k] = (c4 * c[j][k] - k * c[j][k - 1]) / c3;
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    std::vector<double> w(n);
    for (int i = 0; i < n; ++i) w[i] = c[i][deriv];
    return w;
}

RadialGrid::RadialGrid(double R, double r_min, int points) {
    if (!(r_min > 0.0)) throw std::invalid_argument("RadialGrid: grid must not touch r = 0");
    if (!(R > r_min)) throw std::invalid_argument("RadialGrid: need R > r_min");
    if (points < 2 * kCorrection + 1) throw std::invalid_argument("RadialGrid: too few points");
    h_ = std::log(R / r_min) / (points - 1);
    r_.resize(points);
    for (int j = 0; j < points; ++j) r_[j] = r_min * std::exp(j * h_);
    r_.back() = R;
    const auto& a = end_corrections();
    w_.assign(points, h_);
    w_.front() = w_.back() = 0.5 * h_;
    for (int j = 0; j < kCorrection; ++j) {
        w_[j] -= h_ * a[j];
        w_[points - 1 - j] -= h_ * a[j];
    }
    for (int j = 0; j < points; ++j) w_[j] *= r_[j] * r_[j];
}

RadialGrid RadialGrid::geometric(double R, int points, double min_ratio) {
    return RadialGrid(R, R * min_ratio, points);
}

namespace {

template <class T>
std::vector<T> apply_d_ds(const std::vector<T>& f, double h) {
    const int n = static_cast<int>(f.size());
    if (n < kStencil) throw std::invalid_argument("d_ds: grid too small");
    static const auto table = [] {
        std::vector<std::vector<double>> rows(kStencil);
        std::vector<double> x(kStencil);
        for (int i = 0; i < kStencil; ++i) x[i] = i;
        for (int p = 0; p < kStencil; ++p) rows[p] = fd_weights(double(p), x, 1);
        return rows;
    }();
    constexpr int half = kStencil / 2;
    std::vector<T> out(n);
    for (int j = 0; j < n; ++j) {
        int start = std::clamp(j - half, 0, n - kStencil);
        const auto& w = table[j - start];
        // Differencing against f[j] keeps the rounding error proportional to the local
        // variation rather than to |f|.
        T acc{};
        for (int i = 0; i < kStencil; ++i) acc += w[i] * (f[start + i] - f[j]);
        out[j] = acc / h;
    }
    return out;
}

}  // namespace

std::vector<Complex> RadialGrid::d_ds(const std::vector<Complex>& f) const { return apply_d_ds(f, h_); }
std::vector<double> RadialGrid::d_ds(const std::vector<double>& f) const { return apply_d_ds(f, h_); }

std::vector<Complex> RadialGrid::d_dr(const std::vector<Complex>& f) const {
    auto g = d_ds(f);
    for (int j = 0; j < size(); ++j) g[j] /= r_[j];
    return g;
}

RadialIntegral integrate(const RadialGrid& grid, const std::vector<Complex>& F, double min_rate) {
    if (static_cast<int>(F.size()) != grid.size()) throw std::invalid_argument("integrate: size mismatch");
    RadialIntegral res;
    const auto& w = grid.weights();
    Complex acc{};
    double scale = 0.0;
    for (int j = 0; j < grid.size(); ++j) {
        acc += w[j] * F[j];
        scale += std::abs(w[j] * F[j]);
    }
    const double g0 = std::abs(F[0]) * grid[0] * grid[0];
    const double g1 = std::abs(F[1]) * grid[1] * grid[1];
    if (g0 == 0.0) {
        res.inner_rate = INFINITY;
    } else if (g1 == 0.0) {
        res.inner_rate = -INFINITY;
    } else {
        res.inner_rate = std::log(g1 / g0) / grid.step();
    }
    // A rounding-level innermost sample carries no tail information.
    if (g0 != 0.0 && g0 > 1e-13 * scale) {
        if (res.inner_rate > min_rate) {
            res.tail = F[0] * grid[0] * grid[0] / res.inner_rate;
        } else {
            res.integrable = false;
        }
    }
    res.value = acc + res.tail;
    return res;
}

double integrate_real(const RadialGrid& grid, const std::vector<double>& F) {
    std::vector<Complex> c(F.begin(), F.end());
    return integrate(grid, c).value.real();
}

}  // namespace edgelab::radial

namespace edgelab::spectral {

DyadicBound dyadic_pointwise_bound(const std::vector<double>& r, const std::vector<Complex>& phi,
                                   double alpha, double ceiling) {
    if (!(alpha > 1.0)) throw std::invalid_argument("dyadic_pointwise_bound: alpha must exceed 1");
    if (r.size() != phi.size() || r.size() < 16) throw std::invalid_argument("dyadic_pointwise_bound: bad samples");
    const radial::RadialGrid grid(r.back(), r.front(), static_cast<int>(r.size()));
    for (std::size_t j = 0; j < r.size(); ++j)
        if (std::abs(grid[j] - r[j]) > 1e-9 * r[j])
            throw std::invalid_argument("dyadic_pointwise_bound: grid must be geometric");

    DyadicBound out;
    for (const auto& v : phi) out.sup_abs = std::max(out.sup_abs, std::abs(v));
    // In s = log r: (|phi|^2/r^2 + |phi_r|^2) r dr = (|phi|^2 + |phi_s|^2) ds.
    const auto ds = grid.d_ds(phi);
    std::vector<Complex> density(r.size());
    for (std::size_t j = 0; j < r.size(); ++j)
        density[j] = (std::norm(phi[j]) + std::norm(ds[j])) / (r[j] * r[j]);
    const auto I = radial::integrate(grid, density);
    out.inner_decay_rate = I.inner_rate;
    out.integrable = I.integrable;
    out.b_norm = std::sqrt(std::max(0.0, I.value.real()));
    out.ratio = out.b_norm > 0.0 ? out.sup_abs / out.b_norm : 0.0;
    out.pass = out.integrable && out.ratio <= ceiling;
    return out;
}

}  // namespace edgelab::spectral
