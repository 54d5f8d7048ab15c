#pragma once

#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "edgelab/dirac.hpp"
#include "edgelab/spectral.hpp"

namespace edgelab::deform {

using dirac::LeadingData;
using spectral::FourierSeries;
using SeriesMap = std::function<FourierSeries(const FourierSeries&)>;

/// H(c xi) - conj(xi) d, exact (order grows by the bandwidth of c, d).
FourierSeries L_op(const FourierSeries& xi, const LeadingData& data);
/// conj(c) H(xi) - d conj(xi). Throws DegenerateError (measure = min |c|^2+|d|^2) on degenerate data.
FourierSeries L_pseudo_inverse(const FourierSeries& xi, const LeadingData& data);
/// Series of 1/(|c|^2+|d|^2) truncated at `order`; throws DegenerateError on degenerate data.
FourierSeries inverse_modulus(const LeadingData& data, int order);

/// -(3 |Z0| / 2) (Delta + 1)^{-3/4} L(eta'') + K(eta); K defaults to zero.
FourierSeries T_op(const FourierSeries& eta, const LeadingData& data, double z0_length,
                   const SeriesMap& lower_order = {});

/// Dense real matrix on (Re u_l, Im u_l), l = -N..N, interleaved; optional trailing scalar slots.
struct RealizedOperator {
    int n_in = 0;
    int n_out = 0;
    int extra_in = 0;
    int extra_out = 0;
    Eigen::MatrixXd M;

    /// Columns are op(e_l) and op(i e_l), projected to order n_out.
    static RealizedOperator assemble(const SeriesMap& op, int n_in, int n_out, double circumference = kTwoPi);

    /// Rows scaled by (1+l^2)^{m_out/2}, columns by (1+l^2)^{-m_in/2}; scalar slots unscaled.
    Eigen::MatrixXd graded(double m_in, double m_out) const;
    std::string to_csv() const;
};

Eigen::VectorXd to_real(const FourierSeries& u, int order);
FourierSeries from_real(const Eigen::VectorXd& v, int order, double circumference = kTwoPi);

/// Largest singular value.
double operator_norm(const Eigen::MatrixXd& M);

struct CommutatorNorm {
    int N = 0;
    double norm = 0.0;
};

/// |[H, a]| from norm(m) to norm(m+1) on the truncation of order N.
CommutatorNorm commutator_smoothing(const FourierSeries& a, double m, int N);

struct RegularityRow {
    int N = 0;
    double norm_2_2 = 0.0;
    double norm_2_32 = 0.0;
};

struct RegularityProfile {
    std::vector<RegularityRow> rows;
    double exponent_2_2 = 0.0;
    double exponent_2_32 = 0.0;
};

/// Graded norms of `op` at each truncation with fitted growth exponents in N.
RegularityProfile loss_of_regularity_profile(const SeriesMap& op, const std::vector<int>& Ns);
RegularityProfile loss_of_regularity_profile(const LeadingData& data, const std::vector<int>& Ns,
                                             double z0_length = kTwoPi);

struct FredholmRow {
    int N = 0;
    int kernel_dim = 0;
    int cokernel_dim = 0;
    double sigma_max = 0.0;
    double sigma_min = 0.0;
    /// Smallest singular value above the threshold.
    double sigma_min_complement = 0.0;
};

struct FredholmReport {
    std::vector<FredholmRow> rows;
    bool stable = false;
    int kernel_dim = 0;
    int cokernel_dim = 0;
    int index() const { return kernel_dim - cokernel_dim; }
    std::string to_json() const;
};

/// Singular values of the graded truncations; a value counts as zero below threshold * sigma_max.
/// Kernel = columns - rank, cokernel = rows - rank. Counts must agree across all truncations.
FredholmReport fredholm_diagnostics(const std::function<RealizedOperator(int)>& realize, double m_in,
                                    double m_out, const std::vector<int>& Ns, double threshold = 1e-8);

/// [[T, -v], [w^T, 0]] acting on (eta, lambda): (T eta - lambda v, Re<eta, w>).
struct ExtendedSystem {
    LeadingData data;
    double z0_length = kTwoPi;
    SeriesMap lower_order;
    /// Phi_0 direction; the real constant mode when empty.
    FourierSeries column;
    /// Pairing row; the real constant mode when empty (picks Re eta_0).
    FourierSeries row;
    bool with_column = true;
    bool with_row = true;

    FourierSeries column_or_default() const;
    FourierSeries row_or_default() const;
    /// Returns (T eta - lambda v, Re<eta, w>), unprojected.
    std::pair<FourierSeries, double> apply(const FourierSeries& eta, double lambda) const;
    RealizedOperator realize(int N) const;
};

struct ExtendedSolution {
    FourierSeries eta;
    double lambda = 0.0;
    double residual = 0.0;
    double sigma_min = 0.0;
    double condition = 0.0;
};

/// Solves the truncated bordered system at order N. Throws DegenerateError (measure = sigma_min) when
/// the truncation is numerically singular, NumericalError when the residual exceeds 1e-9 |g|.
ExtendedSolution extended_solve(const FourierSeries& g, double rhs_scalar, const ExtendedSystem& sys, int N);

}  // namespace edgelab::deform
