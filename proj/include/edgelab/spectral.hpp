#pragma once

#include <functional>
#include <string>
#include <vector>

#include "edgelab/common.hpp"

namespace edgelab::spectral {

/// Truncated Fourier series on a circle of length `circumference`,
/// u(t) = sum_{|l|<=N} u_l exp(2 pi i l t / circumference).
class FourierSeries {
public:
    explicit FourierSeries(int order = 0, double circumference = kTwoPi);

    static FourierSeries mode(int l, Complex value, int order, double circumference = kTwoPi);
    static FourierSeries constant(Complex value, int order, double circumference = kTwoPi);
    /// Coefficients from samples at t_j = j L / n (exact for band-limited data with n > 2N).
    static FourierSeries from_samples(const std::vector<Complex>& samples, int order,
                                      double circumference = kTwoPi);
    static FourierSeries from_function(const std::function<Complex(double)>& f, int order,
                                       double circumference = kTwoPi);

    int order() const { return order_; }
    double circumference() const { return circumference_; }
    double frequency(int l) const { return kTwoPi * l / circumference_; }

    Complex operator[](int l) const { return coeffs_[l + order_]; }
    Complex& operator[](int l) { return coeffs_[l + order_]; }
    /// Coefficient with zero extension outside [-N, N].
    Complex coeff(int l) const { return (l < -order_ || l > order_) ? Complex{} : (*this)[l]; }
    const std::vector<Complex>& data() const { return coeffs_; }

    Complex evaluate(double t) const;
    std::vector<Complex> sample(int n_points) const;

    FourierSeries truncated(int order) const;
    FourierSeries conj() const;
    bool is_real(double tol = 1e-12) const;

    FourierSeries& operator+=(const FourierSeries& o);
    FourierSeries& operator-=(const FourierSeries& o);
    FourierSeries& operator*=(Complex s);

    double max_abs_coeff() const;
    double coefficient_norm() const;

private:
    int order_;
    double circumference_;
    std::vector<Complex> coeffs_;
};

FourierSeries operator+(FourierSeries a, const FourierSeries& b);
FourierSeries operator-(FourierSeries a, const FourierSeries& b);
FourierSeries operator*(Complex s, FourierSeries a);
FourierSeries operator-(FourierSeries a);

/// Exact product; the result carries order a.order() + b.order().
FourierSeries multiply(const FourierSeries& a, const FourierSeries& b);
/// Product projected to `order`.
FourierSeries multiply(const FourierSeries& a, const FourierSeries& b, int order);

FourierSeries apply_multiplier(const FourierSeries& u, const std::function<Complex(int)>& m);

FourierSeries hilbert_transform(const FourierSeries& u);
FourierSeries fractional_resolvent(const FourierSeries& u, double s);
FourierSeries derivative(const FourierSeries& u);
FourierSeries second_derivative(const FourierSeries& u);

/// (1/L) * integral |u|^2 dt by the trapezoid rule on at least 4N+1 nodes.
double quadrature_mean_square(const FourierSeries& u);

/// (sum (1+l^2)^m |u_l|^2)^{1/2}; any real m.
double graded_norm(const FourierSeries& u, double m);

/// A series seen inside the scale of multiplier norms.
struct GradedVector {
    FourierSeries series;
    double norm(double m) const { return graded_norm(series, m); }
};

/// Cutoff profile: 1 on [0,1], 0 on [2,inf), quintic smoothstep in between (C^2).
double cutoff_profile(double x);
double cutoff_profile_derivative(double x);

class SmoothingFamily {
public:
    SmoothingFamily() = default;
    SmoothingFamily(std::function<double(double)> rho, std::function<double(double)> drho)
        : rho_(std::move(rho)), drho_(std::move(drho)) {}

    double multiplier(int l, double eps) const;
    /// d/d eps of the multiplier.
    double multiplier_derivative(int l, double eps) const;

    FourierSeries apply(const FourierSeries& u, double eps) const;
    FourierSeries apply_derivative(const FourierSeries& u, double eps) const;
    GradedVector smooth(const GradedVector& u, double eps) const { return {apply(u.series, eps)}; }

private:
    std::function<double(double)> rho_ = cutoff_profile;
    std::function<double(double)> drho_ = cutoff_profile_derivative;
};

GradedVector smooth(const GradedVector& u, double eps);

struct AxiomRow {
    std::string axiom;  // "i", "i-low", "ii", "iii"
    int m = 0;
    int n = 0;
    double max_ratio = 0.0;
    bool pass = false;
};

struct SmoothingAxiomReport {
    std::vector<double> eps_grid;
    std::vector<AxiomRow> rows;
    double ceiling = 0.0;
    bool pass() const;
    std::string to_csv() const;
};

/// Measured constants for the smoothing axioms over single-mode vectors
/// l in [0, n_modes] (these attain the operator norm of a diagonal multiplier).
///   (i)    |S x|_n <= C eps^{m-n} |x|_m,        n >= m
///   (i-low)|S x|_n <= C |x|_m,                  n <= m
///   (ii)   |S x - x|_m <= C eps^{n-m} |x|_n,    n >= m
///   (iii)  |dS/deps x|_n <= C eps^{m-n-1} |x|_m
SmoothingAxiomReport verify_smoothing_axioms(const SmoothingFamily& family, int m_max,
                                             const std::vector<double>& eps_grid,
                                             double ceiling = 1e3, int n_modes = 0);

/// Largest ratio norm(m)/(norm(m1)^a norm(m2)^(1-a)).
double interpolation_ratio(const FourierSeries& u, double m1, double m, double m2);

struct DyadicBound {
    double sup_abs = 0.0;
    double b_norm = 0.0;
    double ratio = 0.0;
    double inner_decay_rate = 0.0;  // log-slope of the b-norm density at the axis
    bool integrable = false;
    bool pass = false;
};

/// Pointwise bound sup|phi| <= C (int (|phi|^2/r^2 + |phi'|^2) r dr)^{1/2} on a
/// geometric radial grid (r values increasing).
DyadicBound dyadic_pointwise_bound(const std::vector<double>& r, const std::vector<Complex>& phi,
                                   double alpha, double ceiling = 10.0);

}  // namespace edgelab::spectral
