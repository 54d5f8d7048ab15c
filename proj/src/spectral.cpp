#include "edgelab/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "edgelab/fft.hpp"

namespace edgelab::detail {

void dft(std::vector<Complex>& data, int sign) {
    const std::size_t n = data.size();
    if (n <= 1) return;
    if ((n & (n - 1)) != 0) {
        std::vector<Complex> out(n);
        for (std::size_t k = 0; k < n; ++k) {
            Complex acc{};
            for (std::size_t j = 0; j < n; ++j) {
                const double phase = sign * kTwoPi * static_cast<double>((j * k) % n) / n;
                acc += data[j] * Complex(std::cos(phase), std::sin(phase));
            }
            out[k] = acc;
        }
        data.swap(out);
        return;
    }
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(data[i], data[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double ang = sign * kTwoPi / static_cast<double>(len);
        for (std::size_t i = 0; i < n; i += len) {
            for (std::size_t k = 0; k < len / 2; ++k) {
                const Complex w(std::cos(ang * k), std::sin(ang * k));
                const Complex u = data[i + k];
                const Complex v = data[i + k + len / 2] * w;
                data[i + k] = u + v;
                data[i + k + len / 2] = u - v;
            }
        }
    }
}

}  // namespace edgelab::detail

namespace edgelab::spectral {

FourierSeries::FourierSeries(int order, double circumference)
    : order_(order), circumference_(circumference) {
    if (order < 0) throw std::invalid_argument("FourierSeries: negative order");
    if (!(circumference > 0.0)) throw std::invalid_argument("FourierSeries: circumference must be positive");
    coeffs_.assign(2 * order + 1, Complex{});
}

FourierSeries FourierSeries::mode(int l, Complex value, int order, double circumference) {
    FourierSeries u(std::max(order, std::abs(l)), circumference);
    u[l] = value;
    return u;
}

FourierSeries FourierSeries::constant(Complex value, int order, double circumference) {
    return mode(0, value, order, circumference);
}

FourierSeries FourierSeries::from_samples(const std::vector<Complex>& samples, int order,
                                          double circumference) {
    const int n = static_cast<int>(samples.size());
    if (n < 2 * order + 1) throw std::invalid_argument("from_samples: need at least 2N+1 samples");
    std::vector<Complex> work(samples);
    detail::dft(work, -1);
    FourierSeries u(order, circumference);
    for (int l = -order; l <= order; ++l) u[l] = work[((l % n) + n) % n] / static_cast<double>(n);
    return u;
}

FourierSeries FourierSeries::from_function(const std::function<Complex(double)>& f, int order,
                                           double circumference) {
    int n = 1;
    while (n < 4 * order + 4) n <<= 1;
    std::vector<Complex> s(n);
    for (int j = 0; j < n; ++j) s[j] = f(circumference * j / n);
    return from_samples(s, order, circumference);
}

Complex FourierSeries::evaluate(double t) const {
    Complex acc{};
    for (int l = -order_; l <= order_; ++l) {
        const double ph = frequency(l) * t;
        acc += (*this)[l] * Complex(std::cos(ph), std::sin(ph));
    }
    return acc;
}

std::vector<Complex> FourierSeries::sample(int n_points) const {
    if (n_points < 2 * order_ + 1) {
        std::vector<Complex> out(n_points);
        for (int j = 0; j < n_points; ++j) out[j] = evaluate(circumference_ * j / n_points);
        return out;
    }
    std::vector<Complex> work(n_points, Complex{});
    for (int l = -order_; l <= order_; ++l) work[((l % n_points) + n_points) % n_points] += (*this)[l];
    detail::dft(work, +1);
    return work;
}

FourierSeries FourierSeries::truncated(int order) const {
    FourierSeries out(order, circumference_);
    const int m = std::min(order, order_);
    for (int l = -m; l <= m; ++l) out[l] = (*this)[l];
    return out;
}

FourierSeries FourierSeries::conj() const {
    FourierSeries out(order_, circumference_);
    for (int l = -order_; l <= order_; ++l) out[l] = std::conj((*this)[-l]);
    return out;
}

bool FourierSeries::is_real(double tol) const {
    for (int l = 0; l <= order_; ++l)
        if (std::abs((*this)[l] - std::conj((*this)[-l])) > tol) return false;
    return true;
}

static void check_compatible(const FourierSeries& a, const FourierSeries& b) {
    if (std::abs(a.circumference() - b.circumference()) > 1e-12 * a.circumference())
        throw std::invalid_argument("FourierSeries: circumference mismatch");
}

FourierSeries& FourierSeries::operator+=(const FourierSeries& o) {
    check_compatible(*this, o);
    if (o.order_ > order_) *this = truncated(o.order_);
    for (int l = -o.order_; l <= o.order_; ++l) (*this)[l] += o[l];
    return *this;
}

FourierSeries& FourierSeries::operator-=(const FourierSeries& o) {
    check_compatible(*this, o);
    if (o.order_ > order_) *this = truncated(o.order_);
    for (int l = -o.order_; l <= o.order_; ++l) (*this)[l] -= o[l];
    return *this;
}

FourierSeries& FourierSeries::operator*=(Complex s) {
    for (auto& c : coeffs_) c *= s;
    return *this;
}

double FourierSeries::max_abs_coeff() const {
    double m = 0.0;
    for (const auto& c : coeffs_) m = std::max(m, std::abs(c));
    return m;
}

double FourierSeries::coefficient_norm() const { return graded_norm(*this, 0.0); }

FourierSeries operator+(FourierSeries a, const FourierSeries& b) { return a += b; }
FourierSeries operator-(FourierSeries a, const FourierSeries& b) { return a -= b; }
FourierSeries operator*(Complex s, FourierSeries a) { return a *= s; }
FourierSeries operator-(FourierSeries a) { return a *= -1.0; }

FourierSeries multiply(const FourierSeries& a, const FourierSeries& b) {
    check_compatible(a, b);
    const int na = a.order(), nb = b.order();
    FourierSeries out(na + nb, a.circumference());
    if (static_cast<long>(na) * nb < 4096) {
        for (int i = -na; i <= na; ++i) {
            const Complex ai = a[i];
            if (ai == Complex{}) continue;
            for (int j = -nb; j <= nb; ++j) out[i + j] += ai * b[j];
        }
        return out;
    }
    int n = 1;
    while (n < 2 * (na + nb) + 2) n <<= 1;
    const auto sa = a.sample(n);
    const auto sb = b.sample(n);
    std::vector<Complex> prod(n);
    for (int j = 0; j < n; ++j) prod[j] = sa[j] * sb[j];
    return FourierSeries::from_samples(prod, na + nb, a.circumference());
}

FourierSeries multiply(const FourierSeries& a, const FourierSeries& b, int order) {
    return multiply(a, b).truncated(order);
}

FourierSeries apply_multiplier(const FourierSeries& u, const std::function<Complex(int)>& m) {
    FourierSeries out(u.order(), u.circumference());
    for (int l = -u.order(); l <= u.order(); ++l) out[l] = m(l) * u[l];
    return out;
}

FourierSeries hilbert_transform(const FourierSeries& u) {
    FourierSeries out(u);
    for (int l = -u.order(); l < 0; ++l) out[l] = -u[l];
    return out;
}

FourierSeries fractional_resolvent(const FourierSeries& u, double s) {
    return apply_multiplier(u, [s](int l) { return Complex(std::pow(1.0 + double(l) * l, -s)); });
}

FourierSeries derivative(const FourierSeries& u) {
    return apply_multiplier(u, [&u](int l) { return kI * u.frequency(l); });
}

FourierSeries second_derivative(const FourierSeries& u) {
    return apply_multiplier(u, [&u](int l) {
        const double w = u.frequency(l);
        return Complex(-w * w);
    });
}

double quadrature_mean_square(const FourierSeries& u) {
    const int n = 4 * u.order() + 1;
    const auto s = u.sample(n);
    double acc = 0.0;
    for (const auto& v : s) acc += std::norm(v);
    return acc / n;
}

double graded_norm(const FourierSeries& u, double m) {
    double acc = 0.0;
    for (int l = -u.order(); l <= u.order(); ++l) {
        const double a2 = std::norm(u[l]);
        if (a2 == 0.0) continue;
        acc += std::pow(1.0 + double(l) * l, m) * a2;
    }
    return std::sqrt(acc);
}

double cutoff_profile(double x) {
    if (x <= 1.0) return 1.0;
    if (x >= 2.0) return 0.0;
    const double s = x - 1.0;
    return 1.0 - s * s * s * (10.0 - 15.0 * s + 6.0 * s * s);
}

double cutoff_profile_derivative(double x) {
    if (x <= 1.0 || x >= 2.0) return 0.0;
    const double s = x - 1.0;
    return -30.0 * s * s * (1.0 - s) * (1.0 - s);
}

static void check_eps(double eps) {
    if (!(eps > 0.0 && eps <= 1.0)) throw std::invalid_argument("smoothing: eps must lie in (0,1]");
}

double SmoothingFamily::multiplier(int l, double eps) const { return rho_(eps * std::abs(l)); }

double SmoothingFamily::multiplier_derivative(int l, double eps) const {
    return std::abs(l) * drho_(eps * std::abs(l));
}

FourierSeries SmoothingFamily::apply(const FourierSeries& u, double eps) const {
    check_eps(eps);
    return apply_multiplier(u, [&](int l) { return Complex(multiplier(l, eps)); });
}

FourierSeries SmoothingFamily::apply_derivative(const FourierSeries& u, double eps) const {
    check_eps(eps);
    return apply_multiplier(u, [&](int l) { return Complex(multiplier_derivative(l, eps)); });
}

GradedVector smooth(const GradedVector& u, double eps) { return SmoothingFamily{}.smooth(u, eps); }

bool SmoothingAxiomReport::pass() const {
    return std::all_of(rows.begin(), rows.end(), [](const AxiomRow& r) { return r.pass; });
}

std::string SmoothingAxiomReport::to_csv() const {
    std::ostringstream os;
    os.precision(17);
    os << "axiom,m,n,max_ratio,pass\n";
    for (const auto& r : rows)
        os << r.axiom << ',' << r.m << ',' << r.n << ',' << r.max_ratio << ',' << (r.pass ? 1 : 0) << '\n';
    return os.str();
}

SmoothingAxiomReport verify_smoothing_axioms(const SmoothingFamily& family, int m_max,
                                             const std::vector<double>& eps_grid, double ceiling,
                                             int n_modes) {
    if (eps_grid.empty()) throw std::invalid_argument("verify_smoothing_axioms: empty eps grid");
    double eps_min = 1.0;
    for (double e : eps_grid) {
        check_eps(e);
        eps_min = std::min(eps_min, e);
    }
    if (n_modes <= 0) n_modes = static_cast<int>(std::ceil(4.0 / eps_min));

    SmoothingAxiomReport report;
    report.eps_grid = eps_grid;
    report.ceiling = ceiling;
    auto w = [](int l, double m) { return std::pow(1.0 + double(l) * l, 0.5 * m); };

    for (int m = 0; m <= m_max; ++m) {
        for (int n = 0; n <= m_max; ++n) {
            double r1 = 0.0, r2 = 0.0, r3 = 0.0;
            for (double eps : eps_grid) {
                for (int l = 0; l <= n_modes; ++l) {
                    const double s = family.multiplier(l, eps);
                    const double ds = family.multiplier_derivative(l, eps);
                    if (n >= m) {
                        r1 = std::max(r1, s * w(l, n) / (std::pow(eps, m - n) * w(l, m)));
                        r2 = std::max(r2, std::abs(s - 1.0) * w(l, m) / (std::pow(eps, n - m) * w(l, n)));
                    } else {
                        r1 = std::max(r1, s * w(l, n) / w(l, m));
                    }
                    r3 = std::max(r3, std::abs(ds) * w(l, n) / (std::pow(eps, m - n - 1) * w(l, m)));
                }
            }
            if (n >= m) {
                report.rows.push_back({"i", m, n, r1, std::isfinite(r1) && r1 <= ceiling});
                report.rows.push_back({"ii", m, n, r2, std::isfinite(r2) && r2 <= ceiling});
            } else {
                report.rows.push_back({"i-low", m, n, r1, std::isfinite(r1) && r1 <= ceiling});
            }
            report.rows.push_back({"iii", m, n, r3, std::isfinite(r3) && r3 <= ceiling});
        }
    }
    return report;
}

double interpolation_ratio(const FourierSeries& u, double m1, double m, double m2) {
    const double a = (m2 - m) / (m2 - m1);
    const double lhs = graded_norm(u, m);
    if (lhs == 0.0) return 0.0;
    return lhs / (std::pow(graded_norm(u, m1), a) * std::pow(graded_norm(u, m2), 1.0 - a));
}

}  // namespace edgelab::spectral
