#include "edgelab/deformation.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "edgelab/fit.hpp"
#include "edgelab/parallel.hpp"

namespace edgelab::deform {

using spectral::multiply;

FourierSeries L_op(const FourierSeries& xi, const LeadingData& data) {
    auto out = spectral::hilbert_transform(multiply(data.c, xi));
    out -= multiply(xi.conj(), data.d);
    return out;
}

namespace {

void require_nondegenerate(const LeadingData& data, const char* who) {
    const double m = data.min_modulus_sq();
    if (!(m > 1e-12)) throw DegenerateError(std::string(who) + ": |c|^2 + |d|^2 vanishes", m);
}

}  // namespace

FourierSeries L_pseudo_inverse(const FourierSeries& xi, const LeadingData& data) {
    require_nondegenerate(data, "L_pseudo_inverse");
    auto out = multiply(data.c.conj(), spectral::hilbert_transform(xi));
    out -= multiply(data.d, xi.conj());
    return out;
}

FourierSeries inverse_modulus(const LeadingData& data, int order) {
    require_nondegenerate(data, "inverse_modulus");
    const int n = 8 * std::max({order, data.c.order(), data.d.order(), 8});
    const auto cs = data.c.sample(n), ds = data.d.sample(n);
    std::vector<Complex> v(n);
    for (int j = 0; j < n; ++j) v[j] = 1.0 / (std::norm(cs[j]) + std::norm(ds[j]));
    return FourierSeries::from_samples(v, order, data.c.circumference());
}

FourierSeries T_op(const FourierSeries& eta, const LeadingData& data, double z0_length, const SeriesMap& lower_order) {
    auto out = spectral::fractional_resolvent(L_op(spectral::second_derivative(eta), data), 0.75);
    out *= -1.5 * z0_length;
    if (lower_order) out += lower_order(eta);
    return out;
}

Eigen::VectorXd to_real(const FourierSeries& u, int order) {
    Eigen::VectorXd v(2 * (2 * order + 1));
    for (int l = -order; l <= order; ++l) {
        const Complex c = u.coeff(l);
        v(2 * (l + order)) = c.real();
        v(2 * (l + order) + 1) = c.imag();
    }
    return v;
}

FourierSeries from_real(const Eigen::VectorXd& v, int order, double circumference) {
    FourierSeries u(order, circumference);
    for (int l = -order; l <= order; ++l) u[l] = Complex(v(2 * (l + order)), v(2 * (l + order) + 1));
    return u;
}

RealizedOperator RealizedOperator::assemble(const SeriesMap& op, int n_in, int n_out, double circumference) {
    RealizedOperator R;
    R.n_in = n_in;
    R.n_out = n_out;
    const int cols = 2 * (2 * n_in + 1);
    R.M = Eigen::MatrixXd::Zero(2 * (2 * n_out + 1), cols);
    parallel_for(cols, [&](int j) {
        const int l = j / 2 - n_in;
        const auto e = FourierSeries::mode(l, j % 2 == 0 ? Complex(1.0) : kI, n_in, circumference);
        R.M.col(j) = to_real(op(e), n_out);
    });
    return R;
}

namespace {

double grade(int idx, int n, int slots_real) {
    if (idx >= slots_real) return 0.0;
    const double l = idx / 2 - n;
    return 1.0 + l * l;
}

}  // namespace

Eigen::MatrixXd RealizedOperator::graded(double m_in, double m_out) const {
    Eigen::MatrixXd G = M;
    const int rows_real = 2 * (2 * n_out + 1), cols_real = 2 * (2 * n_in + 1);
    for (int i = 0; i < G.rows(); ++i) {
        const double g = grade(i, n_out, rows_real);
        if (g > 0.0) G.row(i) *= std::pow(g, m_out / 2.0);
    }
    for (int j = 0; j < G.cols(); ++j) {
        const double g = grade(j, n_in, cols_real);
        if (g > 0.0) G.col(j) *= std::pow(g, -m_in / 2.0);
    }
    return G;
}

std::string RealizedOperator::to_csv() const {
    std::ostringstream os;
    os.precision(17);
    for (int i = 0; i < M.rows(); ++i) {
        for (int j = 0; j < M.cols(); ++j) os << (j ? "," : "") << M(i, j);
        os << "\n";
    }
    return os.str();
}

double operator_norm(const Eigen::MatrixXd& M) {
    if (M.size() == 0) return 0.0;
    return Eigen::BDCSVD<Eigen::MatrixXd>(M).singularValues()(0);
}

CommutatorNorm commutator_smoothing(const FourierSeries& a, double m, int N) {
    const auto op = [&](const FourierSeries& xi) {
        auto out = spectral::hilbert_transform(multiply(a, xi));
        out -= multiply(a, spectral::hilbert_transform(xi));
        return out;
    };
    const auto R = RealizedOperator::assemble(op, N, N, a.circumference());
    return {N, operator_norm(R.graded(m, m + 1.0))};
}

RegularityProfile loss_of_regularity_profile(const SeriesMap& op, const std::vector<int>& Ns) {
    RegularityProfile p;
    std::vector<double> x, y22, y232;
    for (int N : Ns) {
        const auto R = RealizedOperator::assemble(op, N, N);
        RegularityRow row;
        row.N = N;
        row.norm_2_2 = operator_norm(R.graded(2.0, 2.0));
        row.norm_2_32 = operator_norm(R.graded(2.0, 1.5));
        p.rows.push_back(row);
        x.push_back(N);
        y22.push_back(row.norm_2_2);
        y232.push_back(row.norm_2_32);
    }
    if (Ns.size() >= 2) {
        p.exponent_2_2 = fit_power_law(x, y22).slope;
        p.exponent_2_32 = fit_power_law(x, y232).slope;
    }
    return p;
}

RegularityProfile loss_of_regularity_profile(const LeadingData& data, const std::vector<int>& Ns, double z0_length) {
    return loss_of_regularity_profile([&](const FourierSeries& eta) { return T_op(eta, data, z0_length); }, Ns);
}

std::string FredholmReport::to_json() const {
    std::ostringstream os;
    os.precision(17);
    os << "[";
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& r = rows[i];
        os << (i ? "," : "") << "{\"N\":" << r.N << ",\"kernel_dim\":" << r.kernel_dim
           << ",\"cokernel_dim\":" << r.cokernel_dim << ",\"sigma_min\":" << r.sigma_min << "}";
    }
    os << "]";
    return os.str();
}

FredholmReport fredholm_diagnostics(const std::function<RealizedOperator(int)>& realize, double m_in, double m_out,
                                    const std::vector<int>& Ns, double threshold) {
    if (Ns.size() < 3) throw std::invalid_argument("fredholm_diagnostics: three truncations are required");
    FredholmReport rep;
    for (int N : Ns) {
        const auto R = realize(N);
        const Eigen::MatrixXd G = R.graded(m_in, m_out);
        const auto sv = Eigen::BDCSVD<Eigen::MatrixXd>(G).singularValues();
        FredholmRow row;
        row.N = N;
        row.sigma_max = sv.size() ? sv(0) : 0.0;
        row.sigma_min = sv.size() ? sv(sv.size() - 1) : 0.0;
        int rank = 0;
        row.sigma_min_complement = INFINITY;
        for (int i = 0; i < sv.size(); ++i) {
            if (sv(i) > threshold * row.sigma_max) {
                ++rank;
                row.sigma_min_complement = sv(i);
            }
        }
        row.kernel_dim = static_cast<int>(G.cols()) - rank;
        row.cokernel_dim = static_cast<int>(G.rows()) - rank;
        rep.rows.push_back(row);
    }
    rep.stable = true;
    for (const auto& r : rep.rows)
        rep.stable = rep.stable && r.kernel_dim == rep.rows[0].kernel_dim && r.cokernel_dim == rep.rows[0].cokernel_dim;
    rep.kernel_dim = rep.rows[0].kernel_dim;
    rep.cokernel_dim = rep.rows[0].cokernel_dim;
    return rep;
}

FourierSeries ExtendedSystem::column_or_default() const {
    return column.order() > 0 || column.max_abs_coeff() > 0.0
               ? column
               : FourierSeries::constant(1.0, 0, data.c.circumference());
}

FourierSeries ExtendedSystem::row_or_default() const {
    return row.order() > 0 || row.max_abs_coeff() > 0.0 ? row
                                                        : FourierSeries::constant(1.0, 0, data.c.circumference());
}

std::pair<FourierSeries, double> ExtendedSystem::apply(const FourierSeries& eta, double lambda) const {
    auto out = T_op(eta, data, z0_length, lower_order);
    if (with_column) {
        auto v = column_or_default();
        v *= lambda;
        out -= v;
    }
    double s = 0.0;
    if (with_row) {
        const auto w = row_or_default();
        for (int l = -w.order(); l <= w.order(); ++l) s += (eta.coeff(l) * std::conj(w[l])).real();
    }
    return {out, s};
}

RealizedOperator ExtendedSystem::realize(int N) const {
    const double L = data.c.circumference();
    auto R = RealizedOperator::assemble([&](const FourierSeries& eta) { return T_op(eta, data, z0_length, lower_order); },
                                        N, N, L);
    const int n = static_cast<int>(R.M.rows());
    R.extra_in = with_column ? 1 : 0;
    R.extra_out = with_row ? 1 : 0;
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n + R.extra_out, n + R.extra_in);
    M.topLeftCorner(n, n) = R.M;
    if (with_column) M.block(0, n, n, 1) = -to_real(column_or_default(), N);
    if (with_row) M.block(n, 0, 1, n) = to_real(row_or_default(), N).transpose();
    R.M = M;
    return R;
}

ExtendedSolution extended_solve(const FourierSeries& g, double rhs_scalar, const ExtendedSystem& sys, int N) {
    const auto R = sys.realize(N);
    if (R.M.rows() != R.M.cols()) throw std::invalid_argument("extended_solve: system is not square");
    const int n = 2 * (2 * N + 1);
    Eigen::VectorXd b(R.M.rows());
    b.head(n) = to_real(g, N);
    if (R.extra_out) b(n) = rhs_scalar;

    Eigen::BDCSVD<Eigen::MatrixXd> svd(R.M, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    ExtendedSolution sol;
    sol.sigma_min = sv(sv.size() - 1);
    sol.condition = sv(0) / sol.sigma_min;
    if (!(sol.sigma_min > 1e-12 * sv(0))) throw DegenerateError("extended_solve: truncated system is singular", sol.sigma_min);
    const Eigen::VectorXd x = R.M.partialPivLu().solve(b);
    sol.eta = from_real(x.head(n), N, g.circumference());
    sol.lambda = R.extra_in ? x(n) : 0.0;
    const double bn = b.norm();
    sol.residual = (R.M * x - b).norm();
    if (sol.residual > 1e-9 * std::max(bn, 1e-300) && bn > 0.0)
        throw NumericalError("extended_solve: residual above 1e-9 |g|");
    return sol;
}

}  // namespace edgelab::deform
