#include "edgelab/bg.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include <Eigen/Dense>

#include "edgelab/deformation.hpp"
#include "edgelab/fit.hpp"
#include "edgelab/parallel.hpp"

namespace edgelab::bg {

double cutoff(double r, double r0) { return spectral::cutoff_profile(2.0 * r / r0); }

double cutoff_d1(double r, double r0) { return 2.0 / r0 * spectral::cutoff_profile_derivative(2.0 * r / r0); }

double cutoff_d2(double r, double r0) {
    const double x = 2.0 * r / r0;
    if (x <= 1.0 || x >= 2.0) return 0.0;
    const double s = x - 1.0;
    return 4.0 / (r0 * r0) * (-60.0 * s * (1.0 - s) * (1.0 - 2.0 * s));
}

double MetricVariation::at(int i, int j, std::size_t idx) const {
    static constexpr int slot[3][3] = {{TT, TX, TY}, {TX, XX, XY}, {TY, XY, YY}};
    return g[slot[i][j]][idx];
}

MetricVariation pullback_variation(const FourierSeries& eta, double r0, const SpinorGrid& grid) {
    if (!(r0 > 0.0)) throw std::invalid_argument("pullback_variation: r0 must be positive");
    MetricVariation mv;
    mv.grid = grid;
    mv.r0 = r0;
    const std::size_t n = grid.size();
    for (auto& c : mv.g) c.assign(n, 0.0);
    for (auto& c : mv.divergence) c.assign(n, 0.0);
    for (auto& c : mv.trace_gradient) c.assign(n, 0.0);

    const auto e0 = eta.sample(grid.n_t);
    const auto e1 = spectral::derivative(eta).sample(grid.n_t);
    const auto e2 = spectral::second_derivative(eta).sample(grid.n_t);
    const int nr = grid.radial.size();

    parallel_for(grid.n_t, [&](int it) {
        const double ex = e0[it].real(), ey = e0[it].imag();
        const double ex1 = e1[it].real(), ey1 = e1[it].imag();
        const double ex2 = e2[it].real(), ey2 = e2[it].imag();
        for (int ir = 0; ir < nr; ++ir) {
            const double r = grid.radial[ir];
            const double chi = cutoff(r, r0), c1 = cutoff_d1(r, r0), c2 = cutoff_d2(r, r0);
            for (int ith = 0; ith < grid.n_theta; ++ith) {
                const double th = grid.theta(ith), X = std::cos(th), Y = std::sin(th);
                const double cx = c1 * X, cy = c1 * Y;
                const double cxx = c2 * X * X + c1 * Y * Y / r;
                const double cyy = c2 * Y * Y + c1 * X * X / r;
                const double cxy = (c2 - c1 / r) * X * Y;
                const auto i = grid.index(it, ir, ith);
                mv.g[TX][i] = ex1 * chi;
                mv.g[TY][i] = ey1 * chi;
                mv.g[XX][i] = 2.0 * ex * cx;
                mv.g[XY][i] = ex * cy + ey * cx;
                mv.g[YY][i] = 2.0 * ey * cy;

                mv.trace_gradient[0][i] = 2.0 * (ex1 * cx + ey1 * cy);
                mv.trace_gradient[1][i] = 2.0 * (ex * cxx + ey * cxy);
                mv.trace_gradient[2][i] = 2.0 * (ex * cxy + ey * cyy);

                mv.divergence[0][i] = -(ex1 * cx + ey1 * cy);
                mv.divergence[1][i] = -(ex2 * chi + 2.0 * ex * cxx + ex * cyy + ey * cxy);
                mv.divergence[2][i] = -(ey2 * chi + ex * cxy + ey * cxx + 2.0 * ey * cyy);
            }
        }
    });
    return mv;
}

SpinorField BGTerms::total() const { return symbol + trace + divergence; }

namespace {

// d_t, d_x, d_y of the full section e^{i theta/2} f, returned in the twisted representation.
std::array<std::vector<Complex>, 3> twisted_gradient(const SpinorGrid& g, const std::vector<Complex>& f) {
    std::array<std::vector<Complex>, 3> out;
    out[0] = dirac::d_t(g, f);
    auto dr = dirac::d_r(g, f);
    auto dth = dirac::d_theta(g, f);
    const int nr = g.radial.size();
    out[1].resize(f.size());
    out[2].resize(f.size());
    parallel_for(g.n_t, [&](int it) {
        for (int ir = 0; ir < nr; ++ir) {
            const double r = g.radial[ir];
            for (int ith = 0; ith < g.n_theta; ++ith) {
                const double th = g.theta(ith), X = std::cos(th), Y = std::sin(th);
                const auto i = g.index(it, ir, ith);
                const Complex a = (dth[i] + 0.5 * kI * f[i]) / r;
                out[1][i] = X * dr[i] - Y * a;
                out[2][i] = Y * dr[i] + X * a;
            }
        }
    });
    return out;
}

}  // namespace

BGTerms bg_terms(const MetricVariation& mv, const SpinorField& phi) {
    const auto& grid = phi.grid();
    if (!(grid == mv.grid)) throw std::invalid_argument("bg_terms: grid mismatch");
    const auto sigma = dirac::CliffordFrame::all();
    const auto gp = twisted_gradient(grid, phi.plus());
    const auto gm = twisted_gradient(grid, phi.minus());

    BGTerms out{SpinorField(grid), SpinorField(grid), SpinorField(grid)};
    const std::size_t n = grid.size();
    parallel_for(grid.n_t, [&](int it) {
        const std::size_t begin = grid.index(it, 0, 0), end = begin + n / grid.n_t;
        for (std::size_t idx = begin; idx < end; ++idx) {
            const dirac::Spinor p{phi.plus()[idx], phi.minus()[idx]};
            dirac::Spinor sym{}, tr{}, dv{};
            for (int i = 0; i < 3; ++i) {
                dirac::Spinor v{};
                for (int j = 0; j < 3; ++j) {
                    const double gij = mv.at(i, j, idx);
                    if (gij == 0.0) continue;
                    v[0] += gij * gp[j][idx];
                    v[1] += gij * gm[j][idx];
                }
                const auto sv = dirac::apply(sigma[i], v);
                const auto sp = dirac::apply(sigma[i], p);
                for (int c = 0; c < 2; ++c) {
                    sym[c] += -0.5 * sv[c];
                    tr[c] += 0.5 * mv.trace_gradient[i][idx] * sp[c];
                    dv[c] += 0.5 * mv.divergence[i][idx] * sp[c];
                }
            }
            out.symbol.plus()[idx] = sym[0];
            out.symbol.minus()[idx] = sym[1];
            out.trace.plus()[idx] = tr[0];
            out.trace.minus()[idx] = tr[1];
            out.divergence.plus()[idx] = dv[0];
            out.divergence.minus()[idx] = dv[1];
        }
    });
    return out;
}

SpinorField bg_apply(const MetricVariation& g, const SpinorField& phi) { return bg_terms(g, phi).total(); }

TermFit fit_ratio(const std::vector<int>& ls, const std::vector<Complex>& ratios) {
    if (ls.size() != ratios.size() || ls.size() < 4) throw std::invalid_argument("fit_ratio: need at least four modes");
    const int n = static_cast<int>(ls.size());
    Eigen::MatrixXd A(n, 3);
    Eigen::MatrixXd b(n, 2);
    for (int i = 0; i < n; ++i) {
        const double l = std::abs(ls[i]);
        A(i, 0) = 1.0;
        A(i, 1) = 1.0 / l;
        A(i, 2) = 1.0 / (l * l);
        b(i, 0) = ratios[i].real();
        b(i, 1) = ratios[i].imag();
    }
    const Eigen::MatrixXd x = A.colPivHouseholderQr().solve(b);
    TermFit f;
    f.kappa = Complex(x(0, 0), x(0, 1));
    f.A = Complex(x(1, 0), x(1, 1));
    f.B = Complex(x(2, 0), x(2, 1));
    std::vector<double> lx, dev;
    for (int i = 0; i < n; ++i) {
        const double d = std::abs(ratios[i] - f.kappa);
        if (d > 0.0) {
            lx.push_back(std::abs(ls[i]));
            dev.push_back(d);
        }
    }
    if (lx.size() >= 2) f.deviation_exponent = fit_power_law(lx, dev).slope;
    return f;
}

BGComparison bg_vs_multiplier(const FourierSeries& eta, const LeadingData& data, int l_lo, int l_hi,
                              const BGOptions& opt) {
    if (l_lo < 1 || l_hi < l_lo) throw std::invalid_argument("bg_vs_multiplier: need 1 <= l_lo <= l_hi");
    const double L = eta.circumference();
    int n_t = opt.n_t;
    if (n_t == 0) {
        const int band = std::max(l_hi, eta.order()) + std::max(data.c.order(), data.d.order());
        n_t = 8;
        while (n_t <= 2 * band) n_t *= 2;
    }
    const SpinorGrid grid(n_t, L, radial::RadialGrid::geometric(opt.R, opt.radial_points, opt.min_ratio), opt.n_theta);
    const auto phi0 = dirac::leading_spinor(data, grid);
    const auto terms = bg_terms(pullback_variation(eta, opt.r0, grid), phi0);

    const auto qs = dirac::obstruction_coefficients(terms.symbol, l_hi);
    const auto qt = dirac::obstruction_coefficients(terms.trace, l_hi);
    const auto qd = dirac::obstruction_coefficients(terms.divergence, l_hi);
    const auto Leta = deform::L_op(spectral::second_derivative(eta), data);

    BGComparison cmp;
    cmp.circumference = L;
    double pmax = 0.0;
    std::vector<Complex> pred(l_hi - l_lo + 1);
    for (int l = l_lo; l <= l_hi; ++l) {
        const double a = std::abs(grid.frequency(l));
        pred[l - l_lo] = kTwoPi * std::pow(a, -1.5) * Leta.coeff(l);
        pmax = std::max(pmax, std::abs(pred[l - l_lo]));
    }
    std::vector<int> ls;
    std::vector<Complex> rt, rs, rtr, rd;
    for (int l = l_lo; l <= l_hi; ++l) {
        const Complex p = pred[l - l_lo];
        if (!(std::abs(p) > 1e-12 * pmax)) {
            cmp.flagged.push_back(l);
            continue;
        }
        const int idx = l + l_hi;
        BGRow row;
        row.l = l;
        row.quadrature = qs[idx] + qt[idx] + qd[idx];
        row.prediction = p;
        row.ratio = row.quadrature / p;
        row.symbol_ratio = qs[idx] / p;
        row.trace_ratio = qt[idx] / p;
        row.divergence_ratio = qd[idx] / p;
        cmp.rows.push_back(row);
        ls.push_back(l);
        rt.push_back(row.ratio);
        rs.push_back(row.symbol_ratio);
        rtr.push_back(row.trace_ratio);
        rd.push_back(row.divergence_ratio);
    }
    if (ls.size() >= 4) {
        cmp.total = fit_ratio(ls, rt);
        cmp.symbol = fit_ratio(ls, rs);
        cmp.trace = fit_ratio(ls, rtr);
        cmp.divergence = fit_ratio(ls, rd);
        cmp.measured_constant = cmp.total.kappa.real() / L;
    }
    return cmp;
}

std::string BGComparison::to_csv() const {
    std::ostringstream os;
    os.precision(12);
    os << "l,quadrature_re,quadrature_im,prediction_re,prediction_im,ratio,ratio_im\n";
    for (const auto& r : rows)
        os << r.l << "," << r.quadrature.real() << "," << r.quadrature.imag() << "," << r.prediction.real() << ","
           << r.prediction.imag() << "," << r.ratio.real() << "," << r.ratio.imag() << "\n";
    return os.str();
}

}  // namespace edgelab::bg
