#include "skegtd/em.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "skegtd/distribution.hpp"
#include "skegtd/errors.hpp"
#include "skegtd/kernels.hpp"
#include "skegtd/optim.hpp"
#include "skegtd/specfun.hpp"

namespace skegtd {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kRMax = 0.999;
constexpr double kEtaLo = 0.04;
constexpr double kEtaHi = 5.0;
// Beyond this alpha the law is numerically its SGN limit; Q is concave in
// alpha, so clamping the root keeps the M-step an exact constrained maximum.
constexpr double kAlphaMax = 1e4;

// Data split by sign, stored as log|y|, with the original positions kept so
// per-observation outputs come back in input order.
struct Prepared {
    std::vector<double> Lp, Ln;
    std::vector<std::size_t> ip, in_, iz;
    std::size_t n = 0;
};

Prepared prepare(std::span<const double> data) {
    Prepared p;
    p.n = data.size();
    for (std::size_t i = 0; i < data.size(); ++i) {
        const double y = data[i];
        if (y > 0.0) {
            p.Lp.push_back(std::log(y));
            p.ip.push_back(i);
        } else if (y < 0.0) {
            p.Ln.push_back(std::log(-y));
            p.in_.push_back(i);
        } else {
            p.iz.push_back(i);
        }
    }
    return p;
}

void check_omega(const OmegaParams& w) {
    if (!(std::fabs(w.r) <= 1.0) || !(w.alpha > 0.0) || !(w.eta > 0.0) || !std::isfinite(w.alpha) ||
        !std::isfinite(w.eta))
        throw DomainError("invalid omega parameters");
}

// c_s = 1 / (2 alpha (1 + r s)^beta), so t_i = c_s |y_i|^beta.
double side_coef(const OmegaParams& w, int s) {
    const double side = 1.0 + w.r * s;
    if (side <= 0.0) return std::numeric_limits<double>::infinity();
    return std::exp(-std::log(2.0 * w.alpha) - w.beta() * std::log(side));
}

double loglik_prepared(const OmegaParams& w, const Prepared& p) {
    const double beta = w.beta();
    const double lnc = skegtd_log_norm_const(w.alpha, beta);
    const double cp = side_coef(w, 1), cn = side_coef(w, -1);
    if ((!p.Lp.empty() && std::isinf(cp)) || (!p.Ln.empty() && std::isinf(cn))) return kNegInf;
    double s = 0.0;
    if (!p.Lp.empty()) s += kernels::sum_log1p_cexp(p.Lp, cp, beta);
    if (!p.Ln.empty()) s += kernels::sum_log1p_cexp(p.Ln, cn, beta);
    return static_cast<double>(p.n) * lnc - (w.alpha + w.eta) * s;
}

// Sufficient statistics of one E-step.
struct EStats {
    double a = 0.0;
    double sum_elogz = 0.0;
    double sum_ez = 0.0;
    std::vector<double> wp, wn;  // E(z) per positive / negative observation
};

EStats estep_stats(const OmegaParams& w, const Prepared& p) {
    EStats st;
    const double beta = w.beta();
    st.a = w.alpha + w.eta;
    st.wp.resize(p.Lp.size());
    st.wn.resize(p.Ln.size());
    double sum_log_b = static_cast<double>(p.iz.size()) * std::log(w.alpha);
    if (!p.Lp.empty()) sum_log_b += kernels::estep_weights(p.Lp, side_coef(w, 1), w.alpha, beta, st.a, st.wp);
    if (!p.Ln.empty()) sum_log_b += kernels::estep_weights(p.Ln, side_coef(w, -1), w.alpha, beta, st.a, st.wn);
    double sez = static_cast<double>(p.iz.size()) * st.a / w.alpha;
    for (double v : st.wp) sez += v;
    for (double v : st.wn) sez += v;
    st.sum_ez = sez;
    st.sum_elogz = static_cast<double>(p.n) * specfun::digamma(st.a) - sum_log_b;
    return st;
}

struct REta {
    double r;
    double eta;
    double q;  // (r, eta) part of Q at the optimum
};

// log of P_+^{k} + P_-^{k}, k = 1/(beta+1), and the matching r.
REta profile_r_eta(const EStats& st, const Prepared& p, double eta) {
    const double beta = 1.0 / eta;
    const double n = static_cast<double>(p.n);
    const double Pp = p.Lp.empty() ? 0.0 : kernels::weighted_power_sums(p.Lp, st.wp, beta).s0;
    const double Pn = p.Ln.empty() ? 0.0 : kernels::weighted_power_sums(p.Ln, st.wn, beta).s0;
    const double k = 1.0 / (beta + 1.0);
    double r;
    if (Pp == 0.0 && Pn == 0.0) r = 0.0;
    else if (Pn == 0.0) r = 1.0;
    else if (Pp == 0.0) r = -1.0;
    else {
        const double rho = std::exp(k * (std::log(Pn) - std::log(Pp)));
        r = (1.0 - rho) / (1.0 + rho);
    }
    r = std::clamp(r, -kRMax, kRMax);
    // sum_i E(z_i)|y_i|^beta / (2 (1 + r s_i)^beta) at this r
    const double g = 0.5 * (Pp * std::exp(-beta * std::log1p(r)) + Pn * std::exp(-beta * std::log1p(-r)));
    const double q = eta * st.sum_elogz - n * std::log(eta) - n * (1.0 + eta) * std::numbers::ln2 -
                     n * specfun::log_gamma(eta) - g;
    return {r, eta, std::isfinite(q) ? q : kNegInf};
}

double alpha_equation(double alpha, const EStats& st, double n) {
    return n * (std::log(alpha) + 1.0 - specfun::digamma(alpha)) + st.sum_elogz - st.sum_ez;
}

OmegaParams mstep_prepared(const OmegaParams& w, const Prepared& p, const EStats& st) {
    const double n = static_cast<double>(p.n);
    auto h = [&](double a) { return alpha_equation(a, st, n); };
    double alpha = kAlphaMax;
    if (h(kAlphaMax) < 0.0) {
        double lo = 1e-3, hi = 1e3;
        if (h(hi) > 0.0) hi = kAlphaMax;
        if (!(h(lo) > 0.0)) {
            lo = 1e-6;  // one expansion, then give up
            if (!(h(lo) > 0.0))
                throw NonConvergence("m_step: alpha equation has no root in [1e-6, 1e4] (h(1e-6) = " +
                                     std::to_string(h(lo)) + ")");
        }
        alpha = optim::brent_root(h, lo, hi, 1e-10 * std::max(1.0, w.alpha));
    }

    // Maximize the profiled (r, eta) part over log eta.
    auto negq = [&](double s) { return -profile_r_eta(st, p, std::exp(s)).q; };
    const auto m = optim::brent_minimize(negq, std::log(kEtaLo), std::log(kEtaHi), 1e-10);
    REta best = profile_r_eta(st, p, std::exp(m.x));
    // Never accept a step that lowers Q relative to the current (r, eta).
    const REta cur = profile_r_eta(st, p, std::clamp(w.eta, kEtaLo, kEtaHi));
    if (cur.q > best.q) best = cur;
    return {best.r, alpha, best.eta};
}

std::array<double, 3> score_t(const OmegaParams& w, double y, double dpsi_a_alpha, double dpsi_a_eta) {
    const double a = w.alpha + w.eta;
    if (y == 0.0) return {0.0, dpsi_a_alpha - w.eta / w.alpha, dpsi_a_eta - 1.0 / w.eta - std::log(2.0 * w.alpha)};
    const int s = y > 0.0 ? 1 : -1;
    const double side = 1.0 + w.r * s;
    const double lead = (std::log(std::fabs(y)) - std::log(side)) / w.eta;  // log t + log 2 alpha
    const double lt = lead - std::log(2.0 * w.alpha);
    const double l1p = lt > 35.0 ? lt + std::log1p(std::exp(-lt)) : std::log1p(std::exp(lt));
    const double v = std::exp(lt - l1p);  // t / (1 + t)
    return {a / w.eta * v * s / side, dpsi_a_alpha - w.eta / w.alpha - l1p + a / w.alpha * v,
            dpsi_a_eta - 1.0 / w.eta - std::log(2.0 * w.alpha) - l1p + a * v * lead / w.eta};
}

}  // namespace

double observed_loglik(const OmegaParams& omega, std::span<const double> data) {
    check_omega(omega);
    return loglik_prepared(omega, prepare(data));
}

EMState make_state(const OmegaParams& omega, std::span<const double> data) {
    check_omega(omega);
    EMState st;
    st.omega = omega;
    st.a_t = omega.alpha + omega.eta;
    st.b_t.resize(data.size());
    const double beta = omega.beta();
    for (std::size_t i = 0; i < data.size(); ++i) {
        const double y = data[i];
        if (y == 0.0) {
            st.b_t[i] = omega.alpha;
            continue;
        }
        const double side = 1.0 + omega.r * (y > 0.0 ? 1.0 : -1.0);
        st.b_t[i] = omega.alpha + 0.5 * std::exp(beta * (std::log(std::fabs(y)) - std::log(side)));
    }
    st.loglik = observed_loglik(omega, data);
    return st;
}

EStepResult e_step(const EMState& state, std::span<const double> data) {
    if (state.b_t.size() != data.size()) throw DomainError("e_step: state does not match data");
    EStepResult r;
    r.ez.resize(data.size());
    r.elogz.resize(data.size());
    const double pa = specfun::digamma(state.a_t);
    for (std::size_t i = 0; i < data.size(); ++i) {
        r.ez[i] = state.a_t / state.b_t[i];
        r.elogz[i] = pa - std::log(state.b_t[i]);
    }
    return r;
}

double q_function(const OmegaParams& w, const EMState& state, std::span<const double> data) {
    check_omega(w);
    const auto e = e_step(state, data);
    const double beta = w.beta();
    const double n = static_cast<double>(data.size());
    double sum_el = 0.0, sum_ez = 0.0, sum_fit = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        sum_el += e.elogz[i];
        sum_ez += e.ez[i];
        const double y = data[i];
        if (y == 0.0) continue;
        const double side = 1.0 + w.r * (y > 0.0 ? 1.0 : -1.0);
        if (side <= 0.0) return kNegInf;
        sum_fit += e.ez[i] * 0.5 * std::exp(beta * (std::log(std::fabs(y)) - std::log(side)));
    }
    return w.eta * sum_el - n * std::log(w.eta) - n * (1.0 + w.eta) * std::numbers::ln2 -
           n * specfun::log_gamma(w.eta) - sum_fit + n * w.alpha * std::log(w.alpha) + (w.alpha - 1.0) * sum_el -
           n * specfun::log_gamma(w.alpha) - w.alpha * sum_ez;
}

OmegaParams m_step(const EMState& state, std::span<const double> data) {
    const Prepared p = prepare(data);
    return mstep_prepared(state.omega, p, estep_stats(state.omega, p));
}

std::array<double, 3> score(const OmegaParams& w, double y) {
    check_omega(w);
    const double pa = specfun::digamma(w.alpha + w.eta);
    return score_t(w, y, pa - specfun::digamma(w.alpha), pa - specfun::digamma(w.eta));
}

std::array<double, 3> mean_score(const OmegaParams& w, std::span<const double> data) {
    check_omega(w);
    const double pa = specfun::digamma(w.alpha + w.eta);
    const double da = pa - specfun::digamma(w.alpha), de = pa - specfun::digamma(w.eta);
    std::array<double, 3> acc{};
    for (double y : data) {
        const auto s = score_t(w, y, da, de);
        for (int k = 0; k < 3; ++k) acc[k] += s[k];
    }
    for (auto& v : acc) v /= static_cast<double>(data.size());
    return acc;
}

std::vector<OmegaParams> default_starts(std::span<const double> data) {
    std::size_t below = 0;
    for (double y : data) below += (y <= 0.0);
    const double r0 = std::clamp(1.0 - 2.0 * static_cast<double>(below) / static_cast<double>(data.size()), -0.9, 0.9);
    static constexpr double ab[6][2] = {{1.0, 2.0}, {3.0, 2.5}, {5.0, 1.0}, {2.0, 4.0}, {10.0, 2.0}, {0.8, 1.5}};
    std::vector<OmegaParams> out;
    for (const auto& s : ab) out.push_back(OmegaParams::from_beta(r0, s[0], s[1]));
    return out;
}

namespace {

struct EmRun {
    OmegaParams omega;
    double loglik = kNegInf;
    int iterations = 0;
    bool converged = false;
    std::vector<double> trace;
};

// Unconstrained coordinates for extrapolation.
std::array<double, 3> to_free(const OmegaParams& w) { return {std::atanh(w.r), std::log(w.alpha), std::log(w.eta)}; }

OmegaParams from_free(const std::array<double, 3>& v) {
    return {std::clamp(std::tanh(v[0]), -kRMax, kRMax), std::clamp(std::exp(v[1]), 1e-3, kAlphaMax),
            std::clamp(std::exp(v[2]), kEtaLo, kEtaHi)};
}

double sup_change(const OmegaParams& a, const OmegaParams& b) {
    return std::max({std::fabs(a.r - b.r), std::fabs(a.alpha - b.alpha), std::fabs(a.eta - b.eta)});
}

// EM with SQUAREM extrapolation. Each cycle takes two plain EM steps,
// extrapolates along them and applies one more EM step at the extrapolated
// point; the result is kept only if its log-likelihood is at least that of
// the plain two-step iterate, so the accepted sequence stays monotone.
EmRun run_em(const Prepared& p, OmegaParams w, const MleOptions& opt) {
    EmRun run;
    w.r = std::clamp(w.r, -kRMax, kRMax);
    w.eta = std::clamp(w.eta, kEtaLo, kEtaHi);
    double ll = loglik_prepared(w, p);
    run.trace.push_back(ll);
    int steps = 0;
    auto em = [&](const OmegaParams& x) {
        ++steps;
        return mstep_prepared(x, p, estep_stats(x, p));
    };
    while (steps < opt.max_iter) {
        const OmegaParams w1 = em(w);
        if (sup_change(w1, w) <= opt.tol) {
            const double ll1 = loglik_prepared(w1, p);
            if (ll1 >= ll) {
                w = w1;
                ll = ll1;
                run.trace.push_back(ll);
            }
            run.converged = true;
            break;
        }
        const OmegaParams w2 = em(w1);
        const double ll2 = loglik_prepared(w2, p);
        OmegaParams next = w2;
        double ll_next = ll2;
        double last_delta = sup_change(w2, w1);

        const auto f0 = to_free(w), f1 = to_free(w1), f2 = to_free(w2);
        double rr = 0.0, vv = 0.0;
        std::array<double, 3> rv{}, vd{};
        for (int k = 0; k < 3; ++k) {
            rv[k] = f1[k] - f0[k];
            vd[k] = f2[k] - 2.0 * f1[k] + f0[k];
            rr += rv[k] * rv[k];
            vv += vd[k] * vd[k];
        }
        if (vv > 0.0 && steps < opt.max_iter) {
            const double step = std::min(-1.0, -std::sqrt(rr / vv));
            std::array<double, 3> fx{};
            for (int k = 0; k < 3; ++k) fx[k] = f0[k] - 2.0 * step * rv[k] + step * step * vd[k];
            const OmegaParams ext = from_free(fx);
            try {
                const OmegaParams w3 = em(ext);
                const double ll3 = loglik_prepared(w3, p);
                if (std::isfinite(ll3) && ll3 >= ll2) {
                    next = w3;
                    ll_next = ll3;
                    last_delta = sup_change(w3, ext);
                }
            } catch (const NonConvergence&) {
                // extrapolated point too far out; keep the plain iterate
            }
        }
        // An inexact M-step can lose a rounding-level amount of likelihood near a
        // flat optimum; stop there instead of accepting a decrease.
        if (!(ll_next >= ll)) {
            run.converged = ll - ll_next <= 1e-9 * std::max(1.0, std::fabs(ll));
            break;
        }
        w = next;
        ll = ll_next;
        run.trace.push_back(ll);
        if (last_delta <= opt.tol) {
            run.converged = true;
            break;
        }
    }
    run.iterations = steps;
    run.omega = w;
    run.loglik = ll;
    return run;
}

}  // namespace

FitReport fit_mle(std::span<const double> data, std::optional<OmegaParams> init, const MleOptions& opt) {
    if (data.size() < 10) throw InsufficientData("fit_mle: needs at least 10 observations");
    for (double y : data)
        if (!std::isfinite(y)) throw DomainError("fit_mle: non-finite observation");
    const Prepared p = prepare(data);
    const std::vector<OmegaParams> starts = init ? std::vector<OmegaParams>{*init} : default_starts(data);

    EmRun best;
    int best_index = -1;
    int failures = 0;
    for (std::size_t i = 0; i < starts.size(); ++i) {
        try {
            EmRun run = run_em(p, starts[i], opt);
            if (std::isfinite(run.loglik) && (best_index < 0 || run.loglik > best.loglik)) {
                best = std::move(run);
                best_index = static_cast<int>(i);
            }
        } catch (const NonConvergence&) {
            ++failures;
        }
    }
    if (best_index < 0) throw FitFailure("fit_mle: every start failed");

    FitReport rep;
    rep.method = "mle";
    rep.names = {"r", "alpha", "beta"};
    rep.estimates = {best.omega.r, best.omega.alpha, best.omega.beta()};
    rep.loglik = best.loglik;
    rep.n = data.size();
    rep.converged = best.converged;
    rep.iterations = best.iterations;
    rep.loglik_trace = std::move(best.trace);
    rep.diagnostics["start_index"] = best_index;
    rep.diagnostics["failed_starts"] = failures;
    const auto sc = mean_score(best.omega, data);
    rep.diagnostics["score_r"] = sc[0];
    rep.diagnostics["score_alpha"] = sc[1];
    rep.diagnostics["score_eta"] = sc[2];
    if (!best.converged) rep.flags.push_back("max_iter");
    const bool boundary = std::fabs(best.omega.r) >= kRMax - 1e-12;
    if (boundary) rep.flags.push_back("boundary_r");
    if (best.omega.alpha >= kAlphaMax * (1.0 - 1e-9)) rep.flags.push_back("boundary_alpha");
    if (best.omega.eta <= kEtaLo * (1.0 + 1e-9) || best.omega.eta >= kEtaHi * (1.0 - 1e-9))
        rep.flags.push_back("boundary_beta");
    if (!boundary) {
        try {
            const auto info = fisher_info(best.omega, data.size());
            rep.standard_errors = {info.standard_errors[0], info.standard_errors[1], info.standard_errors[2]};
        } catch (const NotPositiveDefinite&) {
            rep.flags.push_back("information_not_pd");
        }
    }
    return rep;
}

InfoMatrices fisher_info(const OmegaParams& w, std::size_t n) {
    check_omega(w);
    if (!(std::fabs(w.r) < 1.0)) throw DomainError("fisher_info: |r| must be < 1");
    if (n == 0) throw DomainError("fisher_info: n must be positive");
    using namespace specfun;
    const double a = w.alpha, e = w.eta, r = w.r;
    const double ae = a + e;
    const double l2a = std::log(2.0 * a);

    Eigen::Matrix3d J = Eigen::Matrix3d::Zero();
    J(0, 0) = ae * (e + 1.0) / (e * (1.0 - r * r) * (ae + 1.0));
    J(1, 1) = trigamma(a) - trigamma(ae) - e * (ae + 2.0) / (a * ae * (ae + 1.0));
    const double g = digamma(e + 1.0) - digamma(a + 1.0) + l2a;
    J(2, 2) = trigamma(e) - trigamma(ae) - 1.0 / (e * e) +
              2.0 * a / (e * ae) * (digamma(e + 1.0) - digamma(a) + l2a) +
              a / (e * (ae + 1.0)) * (g * g + trigamma(e + 1.0) + trigamma(a + 1.0));
    J(1, 2) = J(2, 1) = -(trigamma(ae) - 1.0 / ae + (digamma(e + 1.0) + l2a) / (ae * (ae + 1.0)) -
                         digamma(a) / ae + digamma(a + 1.0) / (ae + 1.0));

    // theta = (r, alpha, beta), eta = 1/beta: d eta / d beta = -eta^2.
    const Eigen::Vector3d d(1.0, 1.0, -e * e);
    const Eigen::Matrix3d I = d.asDiagonal() * J * d.asDiagonal();

    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(I);
    const auto ev = es.eigenvalues();
    if (!(ev.minCoeff() > 0.0))
        throw NotPositiveDefinite("fisher_info: I(theta) is not positive definite", {ev[0], ev[1], ev[2]});

    InfoMatrices out;
    out.J_omega = J;
    out.I_theta = I;
    const Eigen::Matrix3d inv = I.inverse();
    for (int k = 0; k < 3; ++k) out.standard_errors[k] = std::sqrt(inv(k, k) / static_cast<double>(n));
    return out;
}

}  // namespace skegtd
