#pragma once

#include <array>
#include <string>
#include <vector>

#include "edgelab/dirac.hpp"
#include "edgelab/spectral.hpp"

namespace edgelab::bg {

using dirac::LeadingData;
using dirac::SpinorField;
using dirac::SpinorGrid;
using spectral::FourierSeries;

/// chi(r) = 1 on r <= r0/2, 0 on r >= r0, and its first two radial derivatives.
double cutoff(double r, double r0);
double cutoff_d1(double r, double r0);
double cutoff_d2(double r, double r0);

/// Index order t, x, y.
enum Component { TT, TX, TY, XX, XY, YY };

/// Pullback metric derivative on the grid, with its flat divergence (div k)_j = -d_i k_ij and
/// the gradient of its trace, both in closed form.
struct MetricVariation {
    SpinorGrid grid;
    double r0 = 4.0;
    std::array<std::vector<double>, 6> g;
    std::array<std::vector<double>, 3> divergence;
    std::array<std::vector<double>, 3> trace_gradient;

    double at(int i, int j, std::size_t idx) const;
};

/// Matrix [[0, eta_x' chi, eta_y' chi], [., 2 eta_x chi_x, eta_x chi_y + eta_y chi_x], [., ., 2 eta_y chi_y]]
/// with eta = eta_x + i eta_y.
MetricVariation pullback_variation(const FourierSeries& eta, double r0, const SpinorGrid& grid);

struct BGTerms {
    SpinorField symbol;
    SpinorField trace;
    SpinorField divergence;
    SpinorField total() const;
};

/// -1/2 sum g_ij sigma_i d_j Phi, 1/2 d Tr(g) . Phi and 1/2 div(g) . Phi in the flat frame, with d_j
/// acting on the full section through the twisted representation.
BGTerms bg_terms(const MetricVariation& g, const SpinorField& phi);
SpinorField bg_apply(const MetricVariation& g, const SpinorField& phi);

struct BGOptions {
    /// 0: smallest power of two above 2 (max(l_hi, order of eta) + bandwidth of c, d).
    int n_t = 0;
    int radial_points = 400;
    int n_theta = 8;
    double R = 8.0;
    double r0 = 4.0;
    double min_ratio = 1e-7;
};

struct BGRow {
    int l = 0;
    Complex quadrature;
    /// 2 pi a^{-3/2} (L eta'')_l, a = |frequency of l|.
    Complex prediction;
    Complex ratio;
    Complex symbol_ratio;
    Complex trace_ratio;
    Complex divergence_ratio;
};

struct TermFit {
    /// ratio ~ kappa + A / l + B / l^2.
    Complex kappa;
    Complex A;
    Complex B;
    /// Log-log slope of |ratio - kappa| against l.
    double deviation_exponent = 0.0;
};

struct BGComparison {
    std::vector<BGRow> rows;
    std::vector<int> flagged;
    double circumference = kTwoPi;
    TermFit total;
    TermFit symbol;
    TermFit trace;
    TermFit divergence;
    /// Re kappa / |Z0|, to be read against the two candidates below.
    double measured_constant = 0.0;
    static constexpr double printed_constant = -1.5;
    static constexpr double step_constant = -0.75;

    std::string to_csv() const;
};

/// Pairs B(eta) at Phi0 = (c sqrt z, d sqrt zbar) with Psi_l for l in [l_lo, l_hi] and compares each
/// coefficient with the multiplier prediction. Modes where the prediction vanishes are flagged and skipped.
BGComparison bg_vs_multiplier(const FourierSeries& eta, const LeadingData& data, int l_lo, int l_hi,
                              const BGOptions& opt = {});

TermFit fit_ratio(const std::vector<int>& ls, const std::vector<Complex>& ratios);

}  // namespace edgelab::bg
