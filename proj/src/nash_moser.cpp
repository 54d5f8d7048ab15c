#include "edgelab/nash_moser.hpp"

#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>

namespace edgelab::nm {

Element& Element::operator+=(const Element& o) {
    series += o.series;
    scalar += o.scalar;
    return *this;
}

Element& Element::operator-=(const Element& o) {
    series -= o.series;
    scalar -= o.scalar;
    return *this;
}

Element& Element::operator*=(double s) {
    series *= s;
    scalar *= s;
    return *this;
}

bool Element::finite() const {
    if (!std::isfinite(scalar)) return false;
    for (int l = -series.order(); l <= series.order(); ++l)
        if (!std::isfinite(series[l].real()) || !std::isfinite(series[l].imag())) return false;
    return true;
}

Element operator+(Element a, const Element& b) { return a += b; }
Element operator-(Element a, const Element& b) { return a -= b; }
Element operator*(double s, Element a) { return a *= s; }

Element TameProblem::smooth_domain(const Element& x, double eps) const {
    return {smoothing_.apply(x.series, eps), x.scalar};
}

Element TameProblem::smooth_codomain(const Element& g, double eps) const {
    return {smoothing_.apply(g.series, eps), g.scalar};
}

double TameProblem::norm_domain(const Element& x, double m) const {
    return spectral::graded_norm(x.series, m) + std::abs(x.scalar);
}

double TameProblem::norm_codomain(const Element& y, double m) const {
    return spectral::graded_norm(y.series, m) + std::abs(y.scalar);
}

std::string IterationTrace::to_csv() const {
    std::ostringstream os;
    os.precision(12);
    os << "k,eps,res_m0,res_m1,corr_norm,truncation\n";
    for (const auto& r : rows)
        os << r.k << "," << r.eps << "," << r.res_m0 << "," << r.res_m1 << "," << r.corr_norm << "," << r.truncation
           << "\n";
    return os.str();
}

double IterationTrace::correction_sum() const {
    double s = 0.0;
    for (const auto& r : rows) s += r.corr_norm;
    return s;
}

std::string to_string(Status s) {
    switch (s) {
        case Status::Converged: return "converged";
        case Status::Diverged: return "diverged";
        case Status::SolverFailure: return "solver_failure";
        case Status::BudgetExhausted: return "budget_exhausted";
        case Status::PreconditionFailed: return "precondition_failed";
    }
    return "unknown";
}

std::string SolveResult::to_json() const {
    std::ostringstream os;
    os.precision(12);
    os << "{\"converged\":" << (converged() ? "true" : "false") << ",\"status\":\"" << to_string(status)
       << "\",\"iterations\":" << iterations() << ",\"final_residual\":" << final_residual() << "}";
    return os.str();
}

namespace {

SolveResult iterate(const TameProblem& p, const Element& f, const Settings& s, bool smoothed) {
    SolveResult out;
    out.x = p.zero_domain();
    if (p.norm_codomain(f, s.m1) > s.delta1) {
        out.status = Status::PreconditionFailed;
        out.message = "f exceeds delta1 at m1";
        return out;
    }
    Element r = f - p.apply_F(out.x);
    const double res0 = p.norm_codomain(r, s.m0);
    out.trace.rows.push_back({0, 1.0, res0, p.norm_codomain(r, s.m1), 0.0, 1});
    if (res0 < s.tol) {
        out.status = Status::Converged;
        return out;
    }
    int growth = 0;
    for (int k = 0; k < s.max_iter; ++k) {
        const double eps = smoothed ? std::min(1.0, s.eps0 * std::pow(s.theta, -k)) : 0.0;
        Element v;
        try {
            v = smoothed ? p.solve_dF(p.smooth_domain(out.x, eps), p.smooth_codomain(r, eps)) : p.solve_dF(out.x, r);
        } catch (const std::exception& e) {
            out.status = Status::SolverFailure;
            out.message = e.what();
            return out;
        }
        out.x += v;
        r = f - p.apply_F(out.x);
        TraceRow row;
        row.k = k + 1;
        row.eps = eps;
        row.res_m0 = p.norm_codomain(r, s.m0);
        row.res_m1 = p.norm_codomain(r, s.m1);
        row.corr_norm = p.norm_domain(v, s.m0);
        row.truncation = smoothed ? static_cast<int>(std::floor(1.0 / eps)) : -1;
        out.trace.rows.push_back(row);
        if (!std::isfinite(row.res_m0) || !out.x.finite()) {
            out.status = Status::Diverged;
            out.message = "non-finite iterate";
            return out;
        }
        if (row.res_m0 < s.tol) {
            out.status = Status::Converged;
            return out;
        }
        growth = row.res_m0 > s.divergence_factor * res0 ? growth + 1 : 0;
        if (growth >= s.divergence_steps) {
            out.status = Status::Diverged;
            out.message = "residual above divergence_factor x initial for divergence_steps steps";
            return out;
        }
    }
    out.status = Status::BudgetExhausted;
    return out;
}

}  // namespace

SolveResult nash_moser_solve(const TameProblem& p, const Element& f, const Settings& s) {
    return iterate(p, f, s, true);
}

SolveResult plain_newton_solve(const TameProblem& p, const Element& f, const Settings& s) {
    return iterate(p, f, s, false);
}

// ---------------------------------------------------------------------------

ToyProblem::ToyProblem(double eps0, int order) : eps0_(eps0), order_(order) {
    if (order < 1) throw std::invalid_argument("ToyProblem: order must be positive");
}

std::unique_ptr<ToyProblem> toy_problem(double eps0, int order) { return std::make_unique<ToyProblem>(eps0, order); }

Element ToyProblem::zero_domain() const { return {FourierSeries(order_), 0.0}; }

Element ToyProblem::apply_F(const Element& x) const {
    const auto u = x.series.truncated(order_);
    auto q = spectral::derivative(spectral::multiply(u, u)).truncated(order_);
    q *= eps0_;
    q += u;
    return {q, 0.0};
}

Element ToyProblem::apply_dF(const Element& x, const Element& v) const {
    const auto u = x.series.truncated(order_), w = v.series.truncated(order_);
    auto q = spectral::derivative(spectral::multiply(u, w)).truncated(order_);
    q *= 2.0 * eps0_;
    q += w;
    return {q, 0.0};
}

Element ToyProblem::solve_dF(const Element& x, const Element& g) const {
    const int N = order_, n = 2 * N + 1;
    const auto u = x.series.truncated(N);
    Eigen::MatrixXcd M = Eigen::MatrixXcd::Identity(n, n);
    for (int l = -N; l <= N; ++l) {
        const Complex dl = 2.0 * eps0_ * kI * u.frequency(l);
        for (int m = -N; m <= N; ++m) M(l + N, m + N) += dl * u.coeff(l - m);
    }
    Eigen::VectorXcd b(n);
    for (int l = -N; l <= N; ++l) b(l + N) = g.series.coeff(l);
    const Eigen::VectorXcd v = M.partialPivLu().solve(b);
    const double res = (M * v - b).norm();
    if (!std::isfinite(res) || res > 1e-8 * std::max(b.norm(), 1e-300))
        throw NumericalError("ToyProblem::solve_dF: linear solve failed");
    Element out{FourierSeries(N, x.series.circumference()), 0.0};
    for (int l = -N; l <= N; ++l) out.series[l] = v(l + N);
    return out;
}

std::vector<TameConstant> measure_tame_constants(const ToyProblem& p, const std::vector<int>& ms, int samples,
                                                 unsigned long long seed, double u_scale, double m0) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss;
    const int N = p.order();
    const auto draw = [&](double decay) {
        FourierSeries s(N);
        for (int l = 0; l <= N; ++l) {
            const double a = std::pow(1.0 + l, -decay);
            const Complex c(gauss(rng) * a, l == 0 ? 0.0 : gauss(rng) * a);
            s[l] = c;
            s[-l] = std::conj(c);
        }
        return s;
    };
    std::vector<TameConstant> out;
    for (int m : ms) out.push_back({m, 0.0});
    for (int i = 0; i < samples; ++i) {
        auto u = draw(4.0);
        u *= u_scale / std::max(1e-300, spectral::graded_norm(u, m0 + 1.0));
        const auto g = draw(2.0);
        const Element x{u, 0.0};
        const auto v = p.solve_dF(x, {g, 0.0});
        for (auto& c : out) {
            const double denom = spectral::graded_norm(g, c.m + 1.0) +
                                 spectral::graded_norm(u, c.m + 2.0) * spectral::graded_norm(g, m0);
            c.constant = std::max(c.constant, spectral::graded_norm(v.series, c.m) / denom);
        }
    }
    return out;
}

FourierSeries rough_data(int order, double decay, double amplitude, unsigned long long seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> phase(0.0, kTwoPi);
    FourierSeries f(order);
    for (int l = 1; l <= order; ++l) {
        const Complex c = amplitude * std::pow(1.0 + l, -decay) * std::exp(kI * phase(rng));
        f[l] = c;
        f[-l] = std::conj(c);
    }
    return f;
}

// ---------------------------------------------------------------------------

LinearizedSpinorProblem::LinearizedSpinorProblem(deform::ExtendedSystem sys, int order)
    : sys_(std::move(sys)), order_(order) {
    const auto R = sys_.realize(order_);
    if (R.M.rows() != R.M.cols()) throw std::invalid_argument("LinearizedSpinorProblem: system is not square");
    const auto sv = Eigen::BDCSVD<Eigen::MatrixXd>(R.M).singularValues();
    sigma_min_ = sv(sv.size() - 1);
    if (!(sigma_min_ > 1e-12 * sv(0)))
        throw DegenerateError("LinearizedSpinorProblem: truncated system is singular", sigma_min_);
    lu_ = R.M.partialPivLu();
}

std::unique_ptr<LinearizedSpinorProblem> linearized_spinor_problem(const deform::LeadingData& data, int order,
                                                                   const deform::SeriesMap& lower_order,
                                                                   double z0_length) {
    deform::ExtendedSystem sys;
    sys.data = data;
    sys.z0_length = z0_length;
    sys.lower_order = lower_order;
    return std::make_unique<LinearizedSpinorProblem>(std::move(sys), order);
}

Element LinearizedSpinorProblem::zero_domain() const {
    return {FourierSeries(order_, sys_.data.c.circumference()), 0.0};
}

Element LinearizedSpinorProblem::apply_F(const Element& x) const {
    auto [g, s] = sys_.apply(x.series.truncated(order_), sys_.with_column ? x.scalar : 0.0);
    return {g.truncated(order_), s};
}

Element LinearizedSpinorProblem::apply_dF(const Element&, const Element& v) const { return apply_F(v); }

Element LinearizedSpinorProblem::solve_dF(const Element&, const Element& g) const {
    const int n = 2 * (2 * order_ + 1);
    Eigen::VectorXd b(lu_.rows());
    b.head(n) = deform::to_real(g.series, order_);
    if (b.size() > n) b(n) = g.scalar;
    const Eigen::VectorXd x = lu_.solve(b);
    if (!x.allFinite()) throw NumericalError("LinearizedSpinorProblem::solve_dF: non-finite solution");
    return {deform::from_real(x.head(n), order_, sys_.data.c.circumference()), x.size() > n ? x(n) : 0.0};
}

double LinearizedSpinorProblem::norm_domain(const Element& x, double m) const {
    return spectral::graded_norm(x.series, m + 2.0) + std::abs(x.scalar);
}

double LinearizedSpinorProblem::norm_codomain(const Element& y, double m) const {
    return spectral::graded_norm(y.series, m + 1.5) + std::abs(y.scalar);
}

// ---------------------------------------------------------------------------

std::string EigenvalueContinuation::to_csv() const {
    std::ostringstream os;
    os.precision(12);
    os << "s,lambda,sigma_min\n";
    for (const auto& c : samples) os << c.s << "," << c.lambda << "," << c.sigma_min << "\n";
    return os.str();
}

EigenvalueContinuation eigenvalue_continuation(const std::function<deform::ExtendedSystem(double)>& family,
                                               const std::function<FourierSeries(double)>& rhs,
                                               const std::vector<double>& path, int order, double degeneracy_tol) {
    EigenvalueContinuation out;
    double last = path.empty() ? 0.0 : path.front();
    for (double s : path) {
        const auto sys = family(s);
        const double m = sys.data.min_modulus_sq();
        if (!(m >= degeneracy_tol)) {
            out.failed = true;
            out.failure_bracket = {last, s};
            out.message = "leading data degenerate";
            break;
        }
        try {
            const auto sol = deform::extended_solve(rhs(s), 0.0, sys, order);
            out.samples.push_back({s, sol.lambda, sol.eta, sol.sigma_min});
        } catch (const std::exception& e) {
            out.failed = true;
            out.failure_bracket = {last, s};
            out.message = e.what();
            break;
        }
        last = s;
    }
    for (std::size_t i = 0; i < out.samples.size(); ++i) {
        const double a = out.samples[i].lambda;
        if (a == 0.0) {
            out.crossings.push_back({out.samples[i].s, out.samples[i].s});
        } else if (i + 1 < out.samples.size() && a * out.samples[i + 1].lambda < 0.0) {
            out.crossings.push_back({out.samples[i].s, out.samples[i + 1].s});
        }
    }
    return out;
}

}  // namespace edgelab::nm
