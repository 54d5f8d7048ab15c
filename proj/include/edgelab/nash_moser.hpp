#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "edgelab/deformation.hpp"
#include "edgelab/spectral.hpp"

namespace edgelab::nm {

using spectral::FourierSeries;

/// A series with an optional real scalar slot (the eigenvalue or pairing component).
struct Element {
    FourierSeries series;
    double scalar = 0.0;

    Element& operator+=(const Element& o);
    Element& operator-=(const Element& o);
    Element& operator*=(double s);
    bool finite() const;
};
Element operator+(Element a, const Element& b);
Element operator-(Element a, const Element& b);
Element operator*(double s, Element a);

class TameProblem {
public:
    virtual ~TameProblem() = default;
    virtual Element zero_domain() const = 0;
    virtual Element apply_F(const Element& x) const = 0;
    virtual Element apply_dF(const Element& x, const Element& v) const = 0;
    /// Right inverse of apply_dF(x, .); throws NumericalError when the linear solve fails.
    virtual Element solve_dF(const Element& x, const Element& g) const = 0;
    virtual Element smooth_domain(const Element& x, double eps) const;
    virtual Element smooth_codomain(const Element& g, double eps) const;
    virtual double norm_domain(const Element& x, double m) const;
    virtual double norm_codomain(const Element& y, double m) const;

protected:
    spectral::SmoothingFamily smoothing_;
};

struct TraceRow {
    int k = 0;
    double eps = 1.0;
    double res_m0 = 0.0;
    double res_m1 = 0.0;
    double corr_norm = 0.0;
    /// Highest mode the smoothing keeps at full weight (floor(1/eps)).
    int truncation = 0;
};

struct IterationTrace {
    std::vector<TraceRow> rows;
    std::string to_csv() const;
    /// Sum of the correction norms at m0.
    double correction_sum() const;
};

enum class Status { Converged, Diverged, SolverFailure, BudgetExhausted, PreconditionFailed };
std::string to_string(Status s);

struct Settings {
    double m0 = 2.0;
    double m1 = 4.0;
    double tol = 1e-8;
    int max_iter = 30;
    /// eps_k = min(1, eps0 theta^{-k}).
    double eps0 = 1.0;
    double theta = 1.2;
    /// Smallness of f at m1; unlimited by default.
    double delta1 = INFINITY;
    double divergence_factor = 1e3;
    int divergence_steps = 5;
};

struct SolveResult {
    Element x;
    IterationTrace trace;
    Status status = Status::BudgetExhausted;
    std::string message;
    bool converged() const { return status == Status::Converged; }
    int iterations() const { return trace.rows.empty() ? 0 : trace.rows.back().k; }
    double final_residual() const { return trace.rows.empty() ? 0.0 : trace.rows.back().res_m0; }
    std::string to_json() const;
};

/// x_{k+1} = x_k + (dF at S_eps_k x_k)^{-1} S_eps_k (f - F(x_k)), starting from zero.
SolveResult nash_moser_solve(const TameProblem& p, const Element& f, const Settings& s = {});
/// x_{k+1} = x_k + (dF at x_k)^{-1} (f - F(x_k)).
SolveResult plain_newton_solve(const TameProblem& p, const Element& f, const Settings& s = {});

/// F(u) = u + eps0 (u^2)' on the order-N truncation. Products are formed exactly and projected back.
class ToyProblem : public TameProblem {
public:
    ToyProblem(double eps0, int order);
    double eps0() const { return eps0_; }
    int order() const { return order_; }
    Element zero_domain() const override;
    Element apply_F(const Element& x) const override;
    Element apply_dF(const Element& x, const Element& v) const override;
    Element solve_dF(const Element& x, const Element& g) const override;

private:
    double eps0_;
    int order_;
};

std::unique_ptr<ToyProblem> toy_problem(double eps0 = 0.1, int order = 64);

struct TameConstant {
    int m = 0;
    double constant = 0.0;
};

/// max |solve_dF(u, g)|_m / (|g|_{m+1} + |u|_{m+2} |g|_{m0}) over random u, g.
std::vector<TameConstant> measure_tame_constants(const ToyProblem& p, const std::vector<int>& ms, int samples,
                                                 unsigned long long seed, double u_scale = 0.5, double m0 = 2.0);

/// Real random series with |f_l| = amplitude (1+|l|)^{-decay}, random phases, f_0 = 0.
FourierSeries rough_data(int order, double decay, double amplitude, unsigned long long seed);

/// F(eta, lambda) = (T eta - lambda v, Re<eta, w>) on the order-N truncation; domain norm m + 2,
/// codomain norm m + 3/2.
class LinearizedSpinorProblem : public TameProblem {
public:
    LinearizedSpinorProblem(deform::ExtendedSystem sys, int order);
    const deform::ExtendedSystem& system() const { return sys_; }
    int order() const { return order_; }
    Element zero_domain() const override;
    Element apply_F(const Element& x) const override;
    Element apply_dF(const Element& x, const Element& v) const override;
    Element solve_dF(const Element& x, const Element& g) const override;
    double norm_domain(const Element& x, double m) const override;
    double norm_codomain(const Element& y, double m) const override;

private:
    deform::ExtendedSystem sys_;
    int order_;
    Eigen::PartialPivLU<Eigen::MatrixXd> lu_;
    double sigma_min_ = 0.0;
};

std::unique_ptr<LinearizedSpinorProblem> linearized_spinor_problem(const deform::LeadingData& data, int order,
                                                                   const deform::SeriesMap& lower_order = {},
                                                                   double z0_length = kTwoPi);

struct ContinuationSample {
    double s = 0.0;
    double lambda = 0.0;
    FourierSeries eta;
    double sigma_min = 0.0;
};

struct EigenvalueContinuation {
    std::vector<ContinuationSample> samples;
    /// Consecutive path values where lambda changes sign (or hits zero).
    std::vector<std::pair<double, double>> crossings;
    bool failed = false;
    /// Last good s and first failing s.
    std::pair<double, double> failure_bracket{0.0, 0.0};
    std::string message;
    std::string to_csv() const;
};

/// Solves the extended system at each path value and brackets the sign changes of lambda. A sample
/// where the data degenerate (min |c|^2+|d|^2 < degeneracy_tol) or the solve fails ends the path.
EigenvalueContinuation eigenvalue_continuation(const std::function<deform::ExtendedSystem(double)>& family,
                                               const std::function<FourierSeries(double)>& rhs,
                                               const std::vector<double>& path, int order,
                                               double degeneracy_tol = 1e-8);

}  // namespace edgelab::nm
