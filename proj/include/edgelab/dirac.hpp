#pragma once

#include <array>
#include <functional>
#include <utility>
#include <vector>

#include "edgelab/common.hpp"
#include "edgelab/radial.hpp"
#include "edgelab/spectral.hpp"

namespace edgelab::dirac {

using Mat2 = std::array<std::array<Complex, 2>, 2>;
using Spinor = std::array<Complex, 2>;

struct CliffordFrame {
    static Mat2 sigma_t();
    static Mat2 sigma_x();
    static Mat2 sigma_y();
    /// sigma_t, sigma_x, sigma_y in that order.
    static std::array<Mat2, 3> all();
};

Spinor apply(const Mat2& m, const Spinor& v);
Mat2 operator*(const Mat2& a, const Mat2& b);

/// Radial profiles of a single (k, l) mode. The full section is
/// exp(i w t) (exp(i(k-1/2)theta) psi_plus(r), exp(i(k+1/2)theta) psi_minus(r)),
/// w the angular frequency of the t-mode (l + delta on a circle of length 2 pi).
struct ModeSpinor {
    int k = 0;
    double l = 0.0;
    std::vector<double> r;
    std::vector<Complex> plus;
    std::vector<Complex> minus;

    /// (int (|psi+|^2 + |psi-|^2) r dr)^{1/2} over the sampled range.
    double l2_norm(const radial::RadialGrid& grid) const;
};

/// [[(k-1/2)/r, -l], [-l, -(k+1/2)/r]].
std::array<std::array<double, 2>, 2> mode_ode_matrix(int k, double l, double r);

/// Radial part of the flat obstruction element: psi+ = sqrt|l| e^{-|l| r} r^{-1/2},
/// psi- = sgn(l) psi+, with the e^{-i theta} on psi+ carried by the (k = 0) convention.
ModeSpinor euclidean_obstruction_mode(double l, const radial::RadialGrid& grid);

/// K_{m+1/2}(x) e^{x} for integer m (terminating series).
double scaled_bessel_k_half(int m, double x);

enum class Branch { Decaying, Growing, Regular, InitialValue, TwoPoint };

struct BoundaryData {
    Branch branch = Branch::Decaying;
    /// InitialValue: value at r_min (or at R when `from_outer`).
    Spinor value{Complex(1.0), Complex(0.0)};
    bool from_outer = false;
    /// TwoPoint: inner_row . psi(r_min) = inner_value, outer_row . psi(R) = outer_value.
    Spinor inner_row{Complex(1.0), Complex(0.0)};
    Complex inner_value{1.0};
    Spinor outer_row{Complex(0.0), Complex(1.0)};
    Complex outer_value{0.0};

    static BoundaryData decaying() { return {}; }
    static BoundaryData growing() {
        BoundaryData b;
        b.branch = Branch::Growing;
        return b;
    }
    static BoundaryData regular() {
        BoundaryData b;
        b.branch = Branch::Regular;
        return b;
    }
};

struct ModeSolution {
    ModeSpinor mode;
    double residual = 0.0;           // |psi_s - r M psi| / |psi| in L^2(r dr)
    double growth_rate = 0.0;        // fitted d log|psi| / dr over the outer half
    bool exponential_growth = false; // growth_rate > |l| / 2
    int steps = 0;
};

/// Integrates the mode system in s = log r with RK4; substeps keep (|l| r + |k| + 1) ds <= step_tol.
ModeSolution solve_mode_ode(int k, double l, const BoundaryData& bc, const radial::RadialGrid& grid,
                            double step_tol = 0.01);

/// Normalized Wronskian |det(u_axis, u_inf)| / (|u_axis||u_inf|) at r_match between the
/// regular-at-axis and decaying-at-R solutions. Zero iff an L^2 solution exists.
double l2_mismatch(int k, double l, const radial::RadialGrid& grid, double r_match);

struct MuMode {
    ModeSpinor closed_form;
    ModeSpinor integrated;
    double expected_rate = 0.0;
    double fitted_rate = 0.0;
    double closed_form_error = 0.0;
};

/// Decaying kernel profile e^{-kappa r} r^{-1/2}, kappa = sqrt(l^2 + mu^2); the rate is
/// re-measured from an independent integration of the radial system.
MuMode mu_perturbed_mode(double l, double mu, const radial::RadialGrid& grid);

/// Least-squares slope of -log(r^{1/2}|psi+|) in r over [r_lo, r_hi].
double fit_decay_rate(const ModeSpinor& m, double r_lo, double r_hi);

// ---------------------------------------------------------------------------
// Fields on S^1 x D_R.

enum class Trivialization { HalfAngleTwist };

struct SpinorGrid {
    int n_t = 16;
    double circumference = kTwoPi;
    radial::RadialGrid radial;
    int n_theta = 8;

    SpinorGrid() = default;
    SpinorGrid(int nt, double L, radial::RadialGrid rg, int ntheta);

    std::size_t size() const { return std::size_t(n_t) * radial.size() * n_theta; }
    std::size_t index(int it, int ir, int ith) const {
        return (std::size_t(it) * radial.size() + ir) * n_theta + ith;
    }
    double t(int it) const { return circumference * it / n_t; }
    double theta(int ith) const { return kTwoPi * ith / n_theta; }
    double frequency(double l) const { return kTwoPi * l / circumference; }
    bool operator==(const SpinorGrid& o) const;
};

/// Two-component samples of the twisted representative psi_tw, full section
/// e^{i theta/2} psi_tw.
class SpinorField {
public:
    SpinorField() = default;
    explicit SpinorField(const SpinorGrid& grid);
    static SpinorField from_function(const SpinorGrid& grid,
                                     const std::function<Spinor(double t, double r, double theta)>& f);

    const SpinorGrid& grid() const { return grid_; }
    Trivialization trivialization() const { return Trivialization::HalfAngleTwist; }
    std::vector<Complex>& plus() { return plus_; }
    std::vector<Complex>& minus() { return minus_; }
    const std::vector<Complex>& plus() const { return plus_; }
    const std::vector<Complex>& minus() const { return minus_; }

    SpinorField& operator+=(const SpinorField& o);
    SpinorField& operator-=(const SpinorField& o);
    SpinorField& operator*=(Complex s);
    double max_abs() const;

private:
    SpinorGrid grid_;
    std::vector<Complex> plus_;
    std::vector<Complex> minus_;
};

SpinorField operator+(SpinorField a, const SpinorField& b);
SpinorField operator-(SpinorField a, const SpinorField& b);
SpinorField operator*(Complex s, SpinorField a);

/// Spectral d/dt and d/dtheta, finite-difference d/dr of one component.
std::vector<Complex> d_t(const SpinorGrid& g, const std::vector<Complex>& f);
std::vector<Complex> d_theta(const SpinorGrid& g, const std::vector<Complex>& f);
std::vector<Complex> d_r(const SpinorGrid& g, const std::vector<Complex>& f);

/// Model operator [[i d_t, -2 d_z], [2 d_zbar, -i d_t]] acting on the full section,
/// returned in the same twisted representation.
SpinorField dirac_apply(const SpinorField& psi);

/// |D psi|_{L^2} / |psi|_{L^2} over the sampled disk.
double dirac_residual_l2(const SpinorField& psi);

/// Flat obstruction element sqrt|w| e^{i w t} e^{-|w| r} (z^{-1/2}, sgn z^{-1/2}bar).
SpinorField obstruction_field(int l, const SpinorGrid& grid);

/// <psi, phi> = int (psi+ conj phi+ + psi- conj phi-) r dr dtheta dt.
Complex l2_pairing(const SpinorField& psi, const SpinorField& phi);
double l2_norm(const SpinorField& psi);

/// <psi, Psi_l> for 0 < |l| <= l_max from one t-transform; index l + l_max.
std::vector<Complex> obstruction_coefficients(const SpinorField& psi, int l_max);

struct AdjointnessResult {
    double defect = 0.0;
    Complex difference;
    bool touches_axis = false;
    bool boundary_defect = false;
};

/// |<D psi, phi> - <psi, D phi>| / (|psi||phi|). A field is said to touch the axis when
/// its innermost samples are not negligible relative to its maximum.
AdjointnessResult adjointness_check(const SpinorField& psi, const SpinorField& phi, double tol = 1e-6);

struct LeadingData {
    spectral::FourierSeries c;
    spectral::FourierSeries d;

    /// min over a fine t-grid of |c|^2 + |d|^2.
    double min_modulus_sq(int n_points = 0) const;
    bool nondegenerate(double tol = 1e-10) const { return min_modulus_sq() > tol; }
};

/// Phi_0 = (c sqrt z, d sqrt zbar) in the twisted representation.
SpinorField leading_spinor(const LeadingData& data, const SpinorGrid& grid);

}  // namespace edgelab::dirac
