#pragma once

#include <vector>

#include "edgelab/common.hpp"

namespace edgelab::radial {

/// Geometric grid r_j = r_min * exp(j h), j = 0..M-1, r_{M-1} = R. Uniform in s = log r.
class RadialGrid {
public:
    RadialGrid() = default;
    RadialGrid(double R, double r_min, int points);
    /// Ratio r_min/R defaults to 1e-4 per the grading used throughout.
    static RadialGrid geometric(double R, int points, double min_ratio = 1e-4);

    int size() const { return static_cast<int>(r_.size()); }
    double R() const { return r_.back(); }
    double r_min() const { return r_.front(); }
    double step() const { return h_; }
    double operator[](int j) const { return r_[j]; }
    const std::vector<double>& r() const { return r_; }

    /// Weights for int F(r) r dr over [r_min, R] (end-corrected trapezoid in s).
    const std::vector<double>& weights() const { return w_; }

    /// d/ds by 8th-order finite differences (one-sided stencils at the ends).
    std::vector<Complex> d_ds(const std::vector<Complex>& f) const;
    std::vector<double> d_ds(const std::vector<double>& f) const;
    /// d/dr = r^{-1} d/ds.
    std::vector<Complex> d_dr(const std::vector<Complex>& f) const;

    bool operator==(const RadialGrid& o) const { return r_ == o.r_; }

private:
    std::vector<double> r_;
    std::vector<double> w_;
    double h_ = 0.0;
};

/// Result of int F(r) r dr including an exponential-in-s tail on (0, r_min].
struct RadialIntegral {
    Complex value;
    Complex tail;
    double inner_rate = 0.0;  // fitted exponent of |F| r^2 in s near the axis
    bool integrable = true;
};

/// Integrates samples F_j against r dr. The tail on (0, r_min] assumes |F r^2| ~ e^{kappa s}
/// fitted from the first two nodes; kappa <= min_rate marks the integral as divergent.
RadialIntegral integrate(const RadialGrid& grid, const std::vector<Complex>& F, double min_rate = 0.05);
double integrate_real(const RadialGrid& grid, const std::vector<double>& F);

/// Finite-difference weights of order `deriv` at x0 from nodes x (Fornberg).
std::vector<double> fd_weights(double x0, const std::vector<double>& x, int deriv);

}  // namespace edgelab::radial
