#pragma once

#include <array>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "edgelab/dirac.hpp"
#include "edgelab/radial.hpp"
#include "edgelab/spectral.hpp"

namespace edgelab::obstruction {

/// sum_{0<|l|<=l_max} <psi, Psi_l> e^{i l t}; the l = 0 slot stays zero.
spectral::FourierSeries project_to_obstruction(const dirac::SpinorField& psi, int l_max);

struct ConormalOptions {
    double R = 8.0;
    int radial_points = 480;
    double min_ratio = 1e-6;
    int n_theta = 4;
    /// Radial profile rho(r) replacing chi(r) r^p when set.
    std::function<double(double)> profile;
};

struct ConormalFit {
    double p = 0.0;
    std::vector<int> modes;
    std::vector<Complex> coefficients;
    /// |<psi, Psi_l>| / |f_l|.
    std::vector<double> normalized;
    double slope = 0.0;
    double intercept = 0.0;
    double residual = 0.0;
    double expected_slope = 0.0;
    /// Local slopes over the lower, middle and upper thirds of the range.
    std::array<double, 3> local_slopes{};
    /// Local slopes steepen and the last one undercuts every tested power.
    bool super_polynomial = false;
};

/// Pairs psi = chi(r) r^p (f(t) e^{-i theta}, 0) (twisted) with Psi_l for l in [l_lo, l_hi] and fits
/// log|coefficient / f_l| against log l. chi = 1 on r <= R/4, 0 on r >= R/2.
ConormalFit conormal_rate(const spectral::FourierSeries& f, double p, int l_lo, int l_hi,
                          const ConormalOptions& opt = {});

/// Weight in the pairing, w(t, r); theta independent.
using PairingWeight = std::function<double(double t, double r)>;

struct GramMatrix {
    std::vector<int> modes;
    /// <chi Psi_k, chi Psi_l>_w / (2 pi L), row k, column l.
    Eigen::MatrixXcd G;
    /// G - I.
    Eigen::MatrixXcd A;
};

/// Gram matrix of the cut-off flat elements, normalized by their plane norm 2 pi L. The t-integral is
/// the trapezoid rule on the grid's n_t nodes, the radial one the grid quadrature with its axis tail.
GramMatrix gram_matrix(const std::vector<int>& modes, const dirac::SpinorGrid& grid,
                       const std::function<double(double)>& chi = {}, const PairingWeight& weight = {});

/// Measured constants C1 = max |A_kl| |k|^{1/2}|l|^{1/2} (k != l) and
/// C2 = max |A_kl| |k|^2 |l|^2 over |k - l| >= |k l|^{1/4}.
struct GramEnvelope {
    double c_half = 0.0;
    double c_far = 0.0;
    int far_pairs = 0;
    double max_diagonal = 0.0;
};
GramEnvelope gram_envelope(const GramMatrix& g);

struct BasisChange {
    Eigen::MatrixXcd U;
    Eigen::MatrixXcd K;
    int L0 = 0;
    /// |K| on the modes |l| > L0.
    double k_norm = 0.0;
    /// |K| from norm(m) to norm(m + 1/8) on the modes |l| > L0.
    double k_smoothing_norm = 0.0;
    double sigma_min = 0.0;
    bool contraction = false;
};

/// U = G on truncations. Throws DegenerateError (measure = smallest singular value) when U is singular.
BasisChange basis_change_U(const GramMatrix& g, int L0 = 0, double m = 0.0);

class AnnuliPartition {
public:
    /// A_n = [n R0 / |l|, (n+1) R0 / |l|], n = 0..n_max; l is the angular frequency.
    AnnuliPartition(double l, double R0 = 1.0, int n_max = 40);
    double l() const { return l_; }
    double R0() const { return R0_; }
    int n_max() const { return n_max_; }
    double inner(int n) const;
    double outer(int n) const;

private:
    double l_;
    double R0_;
    int n_max_;
};

struct DecayReport {
    /// a_n = int_{A_n} (|u|^2 + |r d_r u|^2 + nu^2 |u|^2 + r^2 l^2 |u|^2) r dr, edge-weighted L^{1,2}.
    std::vector<double> a;
    /// Fitted e^{-rate n}; fit over n with a_n > 1e-14 max a.
    double rate = 0.0;
    double fit_residual = 0.0;
    int fitted = 0;
    bool decaying = false;
};

/// Annuli beyond the grid's outer radius are dropped.
DecayReport annuli_decay(const dirac::ModeSpinor& u, const AnnuliPartition& part, const radial::RadialGrid& grid);

/// e^{-x} I_{n+1/2}(x), x > 0.
double scaled_bessel_i_half(int n, double x);

struct SecondOrderSolution {
    dirac::ModeSpinor u;
    /// r^2-weighted residual of -u'' - u'/r + (nu^2/r^2 + l^2) u = f, relative to |r^2 f|.
    double residual = 0.0;
};

/// Decaying solution of D0 D0 u = f for one (k, l) mode: each component solves the modified Bessel
/// equation of order |k -+ 1/2| and frequency |l| through its Green's function I(l r<) K(l r>).
/// f is taken to vanish beyond the grid. Throws NumericalError when the residual exceeds `tol`.
SecondOrderSolution solve_second_order(const dirac::ModeSpinor& f, const radial::RadialGrid& grid,
                                       double tol = 1e-5);

struct MaxPrincipleCertificate {
    bool hypotheses_hold = false;
    /// First index where a_n - lambda(a_{n-1}+a_{n+1}) <= s_n - lambda(s_{n-1}+s_{n+1}) (or a_0 <= s_0,
    /// or the final a_N <= s_N) fails; -1 if none.
    int first_hypothesis_failure = -1;
    bool certified = false;
    /// First n with a_n > s_n; -1 if none.
    int first_violation = -1;
};

MaxPrincipleCertificate discrete_max_principle(const std::vector<double>& a, const std::vector<double>& s,
                                               double lambda = 0.01);

}  // namespace edgelab::obstruction
