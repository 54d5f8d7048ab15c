#include <algorithm>
#include <cmath>
#include <random>

#include "edgelab/bg.hpp"
#include "edgelab/cli.hpp"
#include "edgelab/deformation.hpp"
#include "edgelab/dirac.hpp"
#include "edgelab/fit.hpp"
#include "edgelab/io.hpp"
#include "edgelab/nash_moser.hpp"
#include "edgelab/obstruction.hpp"
#include "edgelab/parallel.hpp"

namespace edgelab::cli {

namespace {

using spectral::FourierSeries;

dirac::LeadingData smooth_leading() {
    FourierSeries c = FourierSeries::constant(1.0, 2);
    c[1] = Complex(0.2, 0.1);
    c[-1] = Complex(0.1, -0.05);
    c[2] = 0.05;
    FourierSeries d(2);
    d[0] = 0.4;
    d[1] = Complex(0.0, 0.15);
    d[-2] = 0.1;
    return {c, d};
}

/// Random smooth data with |c|^2 + |d|^2 >= 0.1 everywhere.
dirac::LeadingData random_leading(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-1.0, 1.0), mod(0.2, 1.5);
    for (;;) {
        FourierSeries c(3), d(3);
        c[0] = std::polar(mod(rng), kPi * u(rng));
        d[0] = std::polar(mod(rng), kPi * u(rng));
        for (int l = -3; l <= 3; ++l) {
            if (l == 0) continue;
            const double s = 0.3 / (1.0 + l * l);
            c[l] = s * Complex(u(rng), u(rng));
            d[l] = s * Complex(u(rng), u(rng));
        }
        dirac::LeadingData data{c, d};
        if (data.min_modulus_sq() >= 0.1) return data;
    }
}

double rel_l2(const dirac::ModeSpinor& a, const dirac::ModeSpinor& b, const radial::RadialGrid& g) {
    double num = 0, den = 0;
    for (int j = 0; j < g.size(); ++j) {
        num += g.weights()[j] * (std::norm(a.plus[j] - b.plus[j]) + std::norm(a.minus[j] - b.minus[j]));
        den += g.weights()[j] * (std::norm(b.plus[j]) + std::norm(b.minus[j]));
    }
    return std::sqrt(num / den);
}

double max_of(const std::vector<double>& v) { return v.empty() ? 0.0 : *std::max_element(v.begin(), v.end()); }
double min_of(const std::vector<double>& v) { return v.empty() ? 0.0 : *std::min_element(v.begin(), v.end()); }

std::vector<int> signed_modes(int lo, int hi) {
    std::vector<int> out;
    for (int l = -hi; l <= hi; ++l)
        if (std::abs(l) >= lo) out.push_back(l);
    return out;
}

ExperimentResult modes(const ExperimentConfig& cfg) {
    ExperimentResult res;
    res.anchor = "flat model: kernel of the Dirac operator on S^1 x R^2 and the radial mode system";
    const auto ls = signed_modes(cfg.l_min, cfg.l_max);
    const dirac::SpinorGrid grid(cfg.N, kTwoPi, radial::RadialGrid::geometric(cfg.R, 700, 1e-4), 4);
    const std::size_t n = ls.size();
    std::vector<double> kernel(n), ode_err(n), ode_res(n), growth(n);
    std::vector<int> grows_p(n), grows_m(n), decaying_flagged(n);
    parallel_for(int(n), [&](int i) {
        const int l = ls[i];
        kernel[i] = dirac::dirac_residual_l2(dirac::obstruction_field(l, grid));
        const auto g = radial::RadialGrid::geometric(cfg.R / std::abs(l), 900);
        const auto sol = dirac::solve_mode_ode(0, l, dirac::BoundaryData::decaying(), g);
        ode_err[i] = rel_l2(sol.mode, dirac::euclidean_obstruction_mode(l, g), g);
        ode_res[i] = sol.residual;
        decaying_flagged[i] = sol.exponential_growth;
        const auto up = dirac::solve_mode_ode(1, l, dirac::BoundaryData::regular(), g);
        const auto dn = dirac::solve_mode_ode(-1, l, dirac::BoundaryData::regular(), g);
        growth[i] = up.growth_rate / std::abs(l);
        grows_p[i] = up.exponential_growth;
        grows_m[i] = dn.exponential_growth;
    });
    io::CsvTable csv({"l", "kernel_residual", "closed_form_error", "ode_residual", "growth_rate_over_l_k1",
                      "growing_k1", "growing_km1"});
    svg::Series sk{"D Psi_l relative residual", {}, {}}, se{"radial ODE closed-form error", {}, {}};
    for (std::size_t i = 0; i < n; ++i) {
        csv.add_row({double(ls[i]), kernel[i], ode_err[i], ode_res[i], growth[i], double(grows_p[i]), double(grows_m[i])});
        if (ls[i] > 0) {
            sk.x.push_back(ls[i]), sk.y.push_back(kernel[i]);
            se.x.push_back(ls[i]), se.y.push_back(ode_err[i]);
        }
    }
    res.csv = csv.str();
    const int flagged = int(std::count(grows_p.begin(), grows_p.end(), 1) + std::count(grows_m.begin(), grows_m.end(), 1));
    const int false_flags = int(std::count(decaying_flagged.begin(), decaying_flagged.end(), 1));
    res.metrics["modes"] = n;
    res.metrics["max_kernel_residual"] = max_of(kernel);
    res.metrics["max_closed_form_error"] = max_of(ode_err);
    res.metrics["max_ode_residual"] = max_of(ode_res);
    res.metrics["regular_branches_flagged"] = flagged;
    res.metrics["regular_branches"] = 2 * n;
    res.metrics["decaying_branches_flagged"] = false_flags;
    res.metrics["min_growth_rate_over_l"] = min_of(growth);
    res.check("kernel residual", max_of(kernel) < cfg.tol, max_of(kernel), cfg.tol);
    res.check("closed-form radial error", max_of(ode_err) < 1e-6, max_of(ode_err), 1e-6);
    res.check("k = +-1 regular branches grow", flagged == int(2 * n), flagged, 2.0 * n);
    res.check("decaying branches not flagged", false_flags == 0, false_flags, 0.0);
    res.plot = svg::Plot{"Kernel residuals of the flat obstruction family", "l", "relative error", true, true, {sk, se}};
    return res;
}

ExperimentResult obstruction_exp(const ExperimentConfig& cfg) {
    ExperimentResult res;
    res.anchor = "obstruction projection by inner products and the mass-perturbed kernel";

    // A random combination of the flat elements projects to the Gram action on its coefficients.
    const dirac::SpinorGrid grid(cfg.N, kTwoPi, radial::RadialGrid::geometric(cfg.R, 360, 1e-5), 4);
    const auto modes = signed_modes(std::max(cfg.l_min, 1), cfg.l_max);
    std::mt19937_64 rng(cfg.seed);
    std::normal_distribution<double> nd;
    Eigen::VectorXcd coeff(modes.size());
    dirac::SpinorField psi(grid);
    for (std::size_t i = 0; i < modes.size(); ++i) {
        coeff(i) = Complex(nd(rng), nd(rng));
        psi += coeff(i) * dirac::obstruction_field(modes[i], grid);
    }
    const auto proj = obstruction::project_to_obstruction(psi, cfg.l_max);
    const auto g = obstruction::gram_matrix(modes, grid, {}, [](double, double) { return 1.0; });
    const Eigen::VectorXcd expect = obstruction::basis_change_U(g).U * coeff * (kTwoPi * kTwoPi);
    double proj_err = 0.0;
    for (std::size_t i = 0; i < modes.size(); ++i)
        proj_err = std::max(proj_err, std::abs(proj[modes[i]] - expect(i)) / expect.cwiseAbs().maxCoeff());
    const double gram_dev = g.A.cwiseAbs().maxCoeff();

    struct MuCase {
        double l, mu;
    };
    std::vector<MuCase> cases;
    for (int l = 0; l <= cfg.l_max; ++l)
        for (double mu : {1.0, 2.0, 4.0}) cases.push_back({double(l), mu});
    std::vector<dirac::MuMode> mm(cases.size());
    parallel_for(int(cases.size()), [&](int i) {
        const double rate = std::hypot(cases[i].l, cases[i].mu);
        mm[i] = dirac::mu_perturbed_mode(cases[i].l, cases[i].mu, radial::RadialGrid::geometric(8.0 / rate, 900));
    });
    io::CsvTable csv({"l", "mu", "expected_rate", "fitted_rate", "relative_error", "closed_form_error"});
    double worst = 0.0, worst_cf = 0.0;
    svg::Series fitted{"fitted rate", {}, {}}, ref{"sqrt(l^2 + mu^2)", {}, {}, true};
    for (std::size_t i = 0; i < cases.size(); ++i) {
        const double rel = std::abs(mm[i].fitted_rate - mm[i].expected_rate) / mm[i].expected_rate;
        worst = std::max(worst, rel);
        worst_cf = std::max(worst_cf, mm[i].closed_form_error);
        csv.add_row({cases[i].l, cases[i].mu, mm[i].expected_rate, mm[i].fitted_rate, rel, mm[i].closed_form_error});
        fitted.x.push_back(mm[i].expected_rate), fitted.y.push_back(mm[i].fitted_rate);
    }
    ref.x = fitted.x, ref.y = fitted.x;
    std::sort(ref.x.begin(), ref.x.end());
    ref.y = ref.x;
    res.csv = csv.str();
    res.metrics["projection_relative_error"] = proj_err;
    res.metrics["unit_weight_gram_deviation"] = gram_dev;
    res.metrics["mu_cases"] = cases.size();
    res.metrics["max_rate_relative_error"] = worst;
    res.metrics["max_closed_form_error"] = worst_cf;
    res.check("projection equals Gram action", proj_err < 1e-9, proj_err, 1e-9);
    res.check("mu-perturbed decay rate", worst < cfg.tol, worst, cfg.tol);
    res.check("mu-perturbed closed form", worst_cf < 1e-6, worst_cf, 1e-6);
    res.plot = svg::Plot{"Decay rates of the mass-perturbed kernel", "sqrt(l^2 + mu^2)", "fitted rate", true, true,
                         {fitted, ref}};
    return res;
}

ExperimentResult conormal(const ExperimentConfig& cfg) {
    ExperimentResult res;
    res.anchor = "conormal regularity: obstruction coefficients of r^p profiles decay like l^-(p+1)";
    FourierSeries f(cfg.l_max);
    for (int l = -cfg.l_max; l <= cfg.l_max; ++l) f[l] = 1.0;
    obstruction::ConormalOptions opt;
    opt.R = cfg.R;
    const auto fit = obstruction::conormal_rate(f, cfg.p, cfg.l_min, cfg.l_max, opt);
    io::CsvTable csv({"l", "coefficient_re", "coefficient_im", "normalized", "gamma_oracle"});
    svg::Series meas{"|<psi_p, Psi_l>|", {}, {}}, orc{"(2 pi)^2 Gamma(p + 3/2) l^-(p+1)", {}, {}, true};
    double worst = 0.0;
    for (std::size_t i = 0; i < fit.modes.size(); ++i) {
        const double l = fit.modes[i];
        const double oracle = kTwoPi * kTwoPi * std::tgamma(cfg.p + 1.5) * std::pow(l, -(cfg.p + 1.0));
        worst = std::max(worst, std::abs(fit.coefficients[i] - oracle) / oracle);
        csv.add_row({l, fit.coefficients[i].real(), fit.coefficients[i].imag(), fit.normalized[i], oracle});
        meas.x.push_back(l), meas.y.push_back(fit.normalized[i]);
        orc.x.push_back(l), orc.y.push_back(oracle);
    }
    res.csv = csv.str();
    res.metrics["p"] = cfg.p;
    res.metrics["slope"] = fit.slope;
    res.metrics["expected_slope"] = fit.expected_slope;
    res.metrics["fit_residual"] = fit.residual;
    res.metrics["local_slopes"] = fit.local_slopes;
    res.metrics["super_polynomial"] = fit.super_polynomial;
    res.metrics["max_gamma_relative_error"] = worst;
    const double dev = std::abs(fit.slope - fit.expected_slope);
    res.check("fitted slope", dev < cfg.tol, fit.slope, fit.expected_slope);
    res.plot = svg::Plot{"Conormal decay of obstruction coefficients", "l", "|coefficient|", true, true, {meas, orc}};
    return res;
}

ExperimentResult gram(const ExperimentConfig& cfg) {
    ExperimentResult res;
    res.anchor = "near-orthonormality of the cut-off obstruction basis under a perturbed pairing";
    const int N = cfg.N;
    int nt = 16;
    while (nt < 4 * N) nt *= 2;
    const dirac::SpinorGrid grid(nt, kTwoPi, radial::RadialGrid::geometric(cfg.R, 640, 1e-8), 4);
    const auto weight = [](double t, double r) { return 1.0 + 0.1 * r * std::cos(t); };
    const auto full = obstruction::gram_matrix(signed_modes(1, N), grid, {}, weight);
    const auto half = obstruction::gram_matrix(signed_modes(1, N / 2), grid, {}, weight);
    const auto e = obstruction::gram_envelope(full), eh = obstruction::gram_envelope(half);

    std::vector<int> L0s;
    for (int L0 = 1; L0 <= N / 2; L0 *= 2) L0s.push_back(L0);
    io::CsvTable csv({"L0", "k_norm", "k_smoothing_norm", "sigma_min", "envelope"});
    svg::Series kn{"|K| on |l| > L0", {}, {}}, env{"|K(1)| L0^-1/8", {}, {}, true};
    std::vector<double> xs, ys;
    const double k1 = obstruction::basis_change_U(full, 1).k_norm;
    bool monotone = true, enveloped = true;
    double prev = INFINITY, worst_factor = 0.0;
    for (int L0 : L0s) {
        const auto b = obstruction::basis_change_U(full, L0);
        const double envelope = k1 * std::pow(double(L0), -0.125);
        csv.add_row({double(L0), b.k_norm, b.k_smoothing_norm, b.sigma_min, envelope});
        monotone = monotone && b.k_norm < prev;
        enveloped = enveloped && b.k_norm <= cfg.tol * envelope;
        worst_factor = std::max(worst_factor, b.k_norm / envelope);
        prev = b.k_norm;
        kn.x.push_back(L0), kn.y.push_back(b.k_norm);
        env.x.push_back(L0), env.y.push_back(envelope);
        xs.push_back(L0), ys.push_back(b.k_norm);
    }
    const auto trend = fit_power_law(xs, ys);
    res.csv = csv.str();
    res.metrics["modes"] = 2 * N;
    res.metrics["c_half"] = e.c_half;
    res.metrics["c_half_half_set"] = eh.c_half;
    res.metrics["c_far"] = e.c_far;
    res.metrics["c_far_half_set"] = eh.c_far;
    res.metrics["far_pairs"] = e.far_pairs;
    res.metrics["max_diagonal"] = e.max_diagonal;
    res.metrics["k_norm_L0_1"] = k1;
    res.metrics["k_norm_trend_exponent"] = trend.slope;
    res.metrics["max_factor_over_envelope"] = worst_factor;
    res.check("|k|^-1/2 |l|^-1/2 envelope stable", std::isfinite(e.c_half) && e.c_half <= 1.5 * eh.c_half, e.c_half,
              1.5 * eh.c_half);
    res.check("|k|^-2 |l|^-2 envelope on far pairs", std::isfinite(e.c_far) && e.c_far <= 1.5 * eh.c_far + 1e-6, e.c_far,
              1.5 * eh.c_far + 1e-6);
    res.check("|U - I| decreases with L0", monotone, double(monotone), 1.0);
    res.check("|U - I| within factor of L0^-1/8 trend", enveloped, worst_factor, cfg.tol);
    res.plot = svg::Plot{"Basis change off the low modes", "L0", "|U - I|", true, true, {kn, env}};
    return res;
}

ExperimentResult deform_op(const ExperimentConfig& cfg) {
    ExperimentResult res;
    res.anchor = "Hilbert-transform operator L: Fredholm counts and L L* symbol; half-order loss of T";
    using deform::RealizedOperator;
    const auto of = [](const deform::LeadingData& data) {
        return [data](int n) {
            return RealizedOperator::assemble([&](const FourierSeries& x) { return deform::L_op(x, data); }, n, n);
        };
    };
    const std::vector<int> fns{cfg.N / 8, cfg.N / 4, cfg.N / 2};

    std::mt19937_64 rng(cfg.seed);
    std::vector<deform::LeadingData> randoms;
    for (int i = 0; i < cfg.samples; ++i) randoms.push_back(random_leading(rng));
    std::vector<deform::FredholmReport> reps(randoms.size());
    parallel_for(int(randoms.size()), [&](int i) { reps[i] = deform::fredholm_diagnostics(of(randoms[i]), 0, 0, fns); });
    int index_zero = 0;
    for (const auto& r : reps) index_zero += (r.stable && r.index() == 0);

    const deform::LeadingData flat{FourierSeries::constant(1.0, 0), FourierSeries::constant(1.0, 0)};
    const auto fr = deform::fredholm_diagnostics(of(flat), 0, 0, fns);
    double sig = INFINITY;
    for (const auto& r : fr.rows) sig = std::min(sig, r.sigma_min_complement);

    const auto data = smooth_leading();
    const auto m = spectral::multiply(data.c, data.c.conj()) + spectral::multiply(data.d, data.d.conj());
    const auto llstar = [&](const FourierSeries& xi) {
        auto out = deform::L_op(deform::L_pseudo_inverse(xi, data), data);
        out -= spectral::multiply(m, xi);
        return out;
    };
    std::vector<double> ll;
    for (int n : fns) ll.push_back(deform::operator_norm(RealizedOperator::assemble(llstar, n, n).graded(0.0, 1.0)));

    std::vector<int> Ns;
    for (int n = 32; n <= cfg.N; n *= 2) Ns.push_back(n);
    const auto prof = deform::loss_of_regularity_profile(data, Ns);

    io::CsvTable csv({"N", "norm_T_2_2", "norm_T_2_1.5"});
    svg::Series a{"|T| norm(2) -> norm(2)", {}, {}}, b{"|T| norm(2) -> norm(3/2)", {}, {}};
    for (const auto& r : prof.rows) {
        csv.add_row({double(r.N), r.norm_2_2, r.norm_2_32});
        a.x.push_back(r.N), a.y.push_back(r.norm_2_2);
        b.x.push_back(r.N), b.y.push_back(r.norm_2_32);
    }
    res.csv = csv.str();
    res.metrics["fredholm_truncations"] = fns;
    res.metrics["random_data"] = cfg.samples;
    res.metrics["random_index_zero"] = index_zero;
    auto idx = nlohmann::ordered_json::array();
    for (const auto& r : reps) idx.push_back({{"kernel", r.kernel_dim}, {"cokernel", r.cokernel_dim}, {"stable", r.stable}});
    res.metrics["random_counts"] = idx;
    res.metrics["flat_kernel_dim"] = fr.kernel_dim;
    res.metrics["flat_cokernel_dim"] = fr.cokernel_dim;
    res.metrics["flat_sigma_min_complement"] = sig;
    res.metrics["llstar_minus_symbol_norms"] = ll;
    res.metrics["exponent_2_2"] = prof.exponent_2_2;
    res.metrics["exponent_2_1.5"] = prof.exponent_2_32;
    res.check("stabilized index 0 for random data", index_zero == cfg.samples, index_zero, cfg.samples);
    res.check("c = d = 1 kernel dimension 1", fr.stable && fr.kernel_dim == 1, fr.kernel_dim, 1.0);
    res.check("c = d = 1 complement sigma_min bounded below", sig > 1.0, sig, 1.0);
    const double ll_growth = max_of(ll) / ll.front();
    res.check("L L* - |c|^2 - |d|^2 bounded norm(0) -> norm(1) uniformly", ll_growth < 1.05, ll_growth, 1.05);
    res.check("T exponent norm(2) -> norm(2)", std::abs(prof.exponent_2_2 - 0.5) < cfg.tol, prof.exponent_2_2, 0.5);
    res.check("T exponent norm(2) -> norm(3/2)", std::abs(prof.exponent_2_32) < cfg.tol, prof.exponent_2_32, 0.0);
    res.plot = svg::Plot{"Loss of regularity of T", "N", "operator norm", true, true, {a, b}};
    return res;
}

ExperimentResult bg_check(const ExperimentConfig& cfg) {
    ExperimentResult res;
    res.anchor = "first variation of the Dirac operator under pullback metrics against the multiplier of T";
    const int order = cfg.l_max + 8;
    FourierSeries eta(order);
    for (int l = -order; l <= order; ++l) eta[l] = Complex(1.0, 0.5) / (1.0 + double(l) * l);
    bg::BGOptions opt;
    opt.R = cfg.R;
    opt.r0 = cfg.R0;
    const auto cmp = bg::bg_vs_multiplier(eta, smooth_leading(), cfg.l_min, cfg.l_max, opt);
    res.csv = cmp.to_csv();
    svg::Series dev{"|ratio - kappa|", {}, {}}, ref{"l^-1", {}, {}, true};
    for (const auto& r : cmp.rows) {
        dev.x.push_back(r.l), dev.y.push_back(std::abs(r.ratio - cmp.total.kappa));
    }
    if (!dev.x.empty()) {
        const double a = dev.y.front() * dev.x.front();
        for (double l : dev.x) ref.x.push_back(l), ref.y.push_back(a / l);
    }
    const double mc = cmp.measured_constant;
    res.metrics["rows"] = cmp.rows.size();
    res.metrics["flagged"] = cmp.flagged;
    res.metrics["kappa_re"] = cmp.total.kappa.real();
    res.metrics["kappa_im"] = cmp.total.kappa.imag();
    res.metrics["measured_constant"] = mc;
    res.metrics["printed_constant"] = bg::BGComparison::printed_constant;
    res.metrics["step_constant"] = bg::BGComparison::step_constant;
    res.metrics["distance_to_printed"] = std::abs(mc - bg::BGComparison::printed_constant);
    res.metrics["distance_to_step"] = std::abs(mc - bg::BGComparison::step_constant);
    res.metrics["closest_candidate"] = std::abs(mc - bg::BGComparison::step_constant) <
                                               std::abs(mc - bg::BGComparison::printed_constant)
                                           ? "step"
                                           : "printed";
    res.metrics["deviation_exponent"] = cmp.total.deviation_exponent;
    res.metrics["symbol_share"] = cmp.symbol.kappa.real() / cmp.total.kappa.real();
    res.metrics["divergence_share"] = cmp.divergence.kappa.real() / cmp.total.kappa.real();
    res.metrics["trace_kappa_abs"] = std::abs(cmp.trace.kappa);
    const int expected_rows = cfg.l_max - cfg.l_min + 1;
    res.check("no flagged modes", int(cmp.rows.size()) == expected_rows, cmp.rows.size(), expected_rows);
    res.check("deviation exponent", std::abs(cmp.total.deviation_exponent + 1.0) < cfg.tol,
              cmp.total.deviation_exponent, -1.0);
    res.plot = svg::Plot{"BG quadrature against the multiplier prediction", "l", "|ratio - kappa|", true, true, {dev, ref}};
    return res;
}

double bump(double x) {
    const double y = (x - 1.0) / 0.5;
    return std::abs(y) < 1.0 ? std::exp(-1.0 / (1.0 - y * y)) : 0.0;
}

ExperimentResult decay(const ExperimentConfig& cfg) {
    ExperimentResult res;
    res.anchor = "discrete maximum principle and annular decay of second-order solutions";
    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> ud(0.0, 1.0);
    int accepted = 0, certified = 0, agree = 0, drawn = 0;
    while (accepted < cfg.samples) {
        ++drawn;
        const int n = 6 + int(ud(rng) * 20);
        const double c = 0.5 + 4.0 * ud(rng);
        std::vector<double> a(n), s(n);
        for (int i = 0; i < n; ++i) {
            s[i] = 2.0 * std::exp(-2.0 * i / c);
            a[i] = s[i] * (ud(rng) * 1.02) + (ud(rng) < 0.3 ? 0.02 * ud(rng) * s[0] : 0.0);
        }
        const auto cert = obstruction::discrete_max_principle(a, s);
        if (!cert.hypotheses_hold) continue;
        ++accepted;
        bool below = true;
        for (int i = 0; i < n; ++i) below = below && a[i] <= s[i];
        agree += cert.certified == below;
        certified += cert.certified;
    }
    const int invalid = 100;
    int pinpointed = 0;
    for (int trial = 0; trial < invalid; ++trial) {
        const int n = 10 + trial % 15;
        std::vector<double> s(n), a(n);
        for (int i = 0; i < n; ++i) s[i] = std::exp(-0.3 * i), a[i] = 0.5 * s[i];
        const int j = 1 + trial % (n - 2);
        a[j] = s[j] * (1.5 + ud(rng));
        const auto cert = obstruction::discrete_max_principle(a, s);
        pinpointed += !cert.certified && cert.first_violation == j;
    }

    std::vector<double> ls;
    for (int l = cfg.l_min; l <= cfg.l_max; l *= 2) ls.push_back(l);
    const auto grid = radial::RadialGrid::geometric(cfg.R, 2800, 1e-5);
    std::vector<obstruction::DecayReport> reps(ls.size());
    parallel_for(int(ls.size()), [&](int i) {
        const double l = ls[i];
        dirac::ModeSpinor f;
        f.k = 0;
        f.l = l;
        f.r = grid.r();
        for (int j = 0; j < grid.size(); ++j) {
            const double b = bump(l * grid[j]);
            f.plus.push_back(b);
            f.minus.push_back(0.5 * b);
        }
        const auto sol = obstruction::solve_second_order(f, grid);
        reps[i] = obstruction::annuli_decay(sol.u, obstruction::AnnuliPartition(l, 1.0, 40), grid);
    });
    io::CsvTable csv({"l", "rate", "fit_residual", "fitted_annuli", "decaying"});
    std::vector<double> rates;
    svg::Plot plot{"Annular energies of second-order solutions", "annulus n", "a_n", false, true, {}};
    for (std::size_t i = 0; i < ls.size(); ++i) {
        csv.add_row({ls[i], reps[i].rate, reps[i].fit_residual, double(reps[i].fitted), double(reps[i].decaying)});
        rates.push_back(reps[i].rate);
        svg::Series s{"l = " + std::to_string(int(ls[i])), {}, {}};
        for (std::size_t nn = 0; nn < reps[i].a.size(); ++nn) s.x.push_back(nn), s.y.push_back(reps[i].a[nn]);
        plot.series.push_back(s);
    }
    const double spread = rates.empty() ? 0.0 : (max_of(rates) - min_of(rates)) / min_of(rates);
    const bool all_decay = std::all_of(reps.begin(), reps.end(), [](const auto& r) { return r.decaying; });
    res.csv = csv.str();
    res.metrics["valid_instances"] = accepted;
    res.metrics["drawn_instances"] = drawn;
    res.metrics["certified"] = certified;
    res.metrics["agree_with_scan"] = agree;
    res.metrics["invalid_instances"] = invalid;
    res.metrics["violations_pinpointed"] = pinpointed;
    res.metrics["rates"] = rates;
    res.metrics["relative_spread"] = spread;
    res.check("valid instances certified", certified == cfg.samples && agree == cfg.samples, certified, cfg.samples);
    res.check("violations pinpointed", pinpointed == invalid, pinpointed, invalid);
    res.check("annuli decay", all_decay, double(all_decay), 1.0);
    res.check("decay rate spread over l", spread < cfg.tol, spread, cfg.tol);
    res.plot = plot;
    return res;
}

ExperimentResult nash_moser(const ExperimentConfig& cfg) {
    ExperimentResult res;
    res.anchor = "tame smoothing operators and the smoothed Newton iteration under loss of regularity";

    // Smoothing axioms and interpolation of the graded scale.
    std::vector<double> eps_grid;
    for (int k = 1; k <= 8; ++k) eps_grid.push_back(std::ldexp(1.0, -k));
    const auto axioms = spectral::verify_smoothing_axioms(spectral::SmoothingFamily{}, 4, eps_grid);
    double worst_axiom = 0.0;
    for (const auto& r : axioms.rows) worst_axiom = std::max(worst_axiom, r.max_ratio);
    std::mt19937_64 rng(cfg.seed);
    std::normal_distribution<double> g;
    std::uniform_real_distribution<double> um(0.0, 6.0);
    double worst_interp = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
        FourierSeries u(24);
        for (int l = -24; l <= 24; ++l) u[l] = Complex(g(rng), g(rng)) / std::sqrt(1.0 + l * l);
        double m1 = um(rng), m2 = um(rng);
        if (m1 > m2) std::swap(m1, m2);
        m2 += 1e-3;
        const double m = m1 + (m2 - m1) * 0.37;
        worst_interp = std::max(worst_interp, spectral::interpolation_ratio(u, m1, m, m2));
    }

    const auto p = nm::toy_problem(cfg.eps0, cfg.N);
    nm::Settings s;
    s.theta = cfg.theta;
    s.tol = cfg.tol;
    const nm::Element f{nm::rough_data(cfg.N, 1.1, 1.0, cfg.seed), 0.0};
    const auto plain = nm::plain_newton_solve(*p, f, s);
    const auto smooth = nm::nash_moser_solve(*p, f, s);

    const auto ps = nm::toy_problem(cfg.eps0, 32);
    const nm::Element fs{nm::rough_data(32, 3.0, 0.05, cfg.seed), 0.0};
    nm::Settings ss = s;
    const auto a = nm::plain_newton_solve(*ps, fs, ss);
    const auto b = nm::nash_moser_solve(*ps, fs, ss);
    const double agree = ps->norm_domain(a.x - b.x, ss.m0);

    io::CsvTable csv({"smoothed", "k", "eps", "res_m0", "res_m1", "corr_norm", "truncation"});
    svg::Series sp{"plain Newton", {}, {}}, sn{"smoothed", {}, {}};
    for (const auto& [flag, tr, ser] : {std::tuple{0.0, &plain.trace, &sp}, std::tuple{1.0, &smooth.trace, &sn}})
        for (const auto& r : tr->rows) {
            csv.add_row({flag, double(r.k), r.eps, r.res_m0, r.res_m1, r.corr_norm, double(r.truncation)});
            ser->x.push_back(r.k), ser->y.push_back(r.res_m0);
        }
    res.csv = csv.str();
    res.metrics["smoothing_axiom_max_ratio"] = worst_axiom;
    res.metrics["smoothing_axioms_pass"] = axioms.pass();
    res.metrics["interpolation_max_ratio"] = worst_interp;
    res.metrics["plain_status"] = nm::to_string(plain.status);
    res.metrics["plain_iterations"] = plain.iterations();
    res.metrics["plain_diverged"] = plain.status == nm::Status::Diverged;
    res.metrics["nm_status"] = nm::to_string(smooth.status);
    res.metrics["nm_converged"] = smooth.converged();
    res.metrics["nm_iterations"] = smooth.iterations();
    res.metrics["nm_final_residual"] = smooth.final_residual();
    res.metrics["nm_correction_sum"] = smooth.trace.correction_sum();
    res.metrics["smooth_plain_converged"] = a.converged();
    res.metrics["smooth_nm_converged"] = b.converged();
    res.metrics["smooth_plain_iterations"] = a.iterations();
    res.metrics["smooth_nm_iterations"] = b.iterations();
    res.metrics["smooth_solution_distance"] = agree;
    res.check("smoothing axioms finite", axioms.pass(), worst_axiom, axioms.ceiling);
    res.check("interpolation constant", worst_interp <= 1.0 + 1e-12, worst_interp, 1.0 + 1e-12);
    res.check("plain Newton divergence certificate", plain.status == nm::Status::Diverged, plain.iterations(), 0.0);
    res.check("smoothed iteration converges", smooth.converged() && smooth.iterations() <= s.max_iter,
              smooth.final_residual(), cfg.tol);
    res.check("smooth data: both converge", a.converged() && b.converged(), double(a.converged() && b.converged()), 1.0);
    res.check("smooth data: same solution", agree < 1e-8, agree, 1e-8);
    res.plot = svg::Plot{"Residual at m0 on rough data", "iteration", "residual", false, true, {sp, sn}};
    return res;
}

ExperimentResult continuation(const ExperimentConfig& cfg) {
    ExperimentResult res;
    res.anchor = "extended system (T, Phi_0 direction, pairing row) and eigenvalue continuation";
    const int N = cfg.N;
    FourierSeries kappa = FourierSeries::constant(1.0, 1);
    kappa[1] = kappa[-1] = 0.2;
    const deform::SeriesMap lower = [kappa](const FourierSeries& eta) { return spectral::multiply(kappa, eta); };
    deform::ExtendedSystem base;
    base.data = smooth_leading();
    base.lower_order = lower;
    std::mt19937_64 rng(cfg.seed);
    std::normal_distribution<double> nd;
    FourierSeries eta0(6);
    for (int l = 0; l <= 6; ++l) {
        const double a = 1.0 / (1.0 + l * l);
        eta0[l] = Complex(l == 0 ? 0.0 : nd(rng) * a, nd(rng) * a);
        eta0[-l] = l == 0 ? eta0[0] : Complex(nd(rng) * a, nd(rng) * a);
    }
    const auto g0 = base.apply(eta0, 0.0).first.truncated(N);
    const auto v = base.column_or_default().truncated(N);
    std::vector<double> path;
    for (int i = 0; i <= 20; ++i) path.push_back(0.05 * i);
    const double s_star = cfg.s_star;
    const auto cont = nm::eigenvalue_continuation(
        [&](double) { return base; }, [&](double s) { return g0 + Complex(s - s_star) * v; }, path, N);
    double lin = 0.0;
    for (const auto& smp : cont.samples) lin = std::max(lin, std::abs(smp.lambda + (smp.s - s_star)));
    const bool bracketed = cont.crossings.size() == 1 && cont.crossings[0].first <= s_star &&
                           cont.crossings[0].second >= s_star;

    const auto leaving = nm::eigenvalue_continuation(
        [&](double s) {
            deform::ExtendedSystem e = base;
            e.data = {FourierSeries::constant(1.0 - s, 0), FourierSeries(0)};
            return e;
        },
        [&](double) { return g0; }, path, N);

    res.csv = cont.to_csv();
    svg::Series lam{"lambda(s)", {}, {}};
    for (const auto& smp : cont.samples) lam.x.push_back(smp.s), lam.y.push_back(smp.lambda);
    res.metrics["samples"] = cont.samples.size();
    auto cr = nlohmann::ordered_json::array();
    for (const auto& [lo, hi] : cont.crossings) cr.push_back({lo, hi});
    res.metrics["crossings"] = cr;
    res.metrics["s_star"] = s_star;
    res.metrics["lambda_linearity_error"] = lin;
    res.metrics["degenerate_path_failed"] = leaving.failed;
    res.metrics["degenerate_bracket"] = {leaving.failure_bracket.first, leaving.failure_bracket.second};
    res.check("single crossing bracketing s_star", bracketed, double(cont.crossings.size()), 1.0);
    res.check("lambda(s) = s_star - s", lin < cfg.tol, lin, cfg.tol);
    res.check("degenerate data end the path", leaving.failed && leaving.failure_bracket.second == 1.0,
              leaving.failure_bracket.second, 1.0);
    res.plot = svg::Plot{"Eigenvalue along the path", "s", "lambda", false, false, {lam}};
    return res;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
    validate(cfg);
    ExperimentResult res;
    const auto& e = cfg.experiment;
    if (e == "modes") res = modes(cfg);
    else if (e == "obstruction") res = obstruction_exp(cfg);
    else if (e == "conormal") res = conormal(cfg);
    else if (e == "gram") res = gram(cfg);
    else if (e == "deform-op") res = deform_op(cfg);
    else if (e == "bg-check") res = bg_check(cfg);
    else if (e == "decay") res = decay(cfg);
    else if (e == "nash-moser") res = nash_moser(cfg);
    else if (e == "continuation") res = continuation(cfg);
    else throw ConfigError("unknown experiment '" + e + "'", 0, "experiment");
    res.experiment = e;
    return res;
}

}  // namespace edgelab::cli
