#include "skegtd/optim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "skegtd/errors.hpp"

namespace skegtd::optim {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double finite_or_inf(double v) { return std::isfinite(v) ? v : kInf; }

}  // namespace

double brent_root(const ScalarFn& f, double lo, double hi, double tol, int max_iter) {
    double a = lo, b = hi;
    double fa = f(a), fb = f(b);
    if (fa == 0.0) return a;
    if (fb == 0.0) return b;
    if (!(fa * fb < 0.0)) throw NonConvergence("brent_root: endpoints do not bracket a root");
    double c = a, fc = fa, d = b - a, e = d;
    for (int it = 0; it < max_iter; ++it) {
        if (fb * fc > 0.0) {
            c = a;
            fc = fa;
            d = e = b - a;
        }
        if (std::fabs(fc) < std::fabs(fb)) {
            a = b; b = c; c = a;
            fa = fb; fb = fc; fc = fa;
        }
        const double tol1 = 2.0 * std::numeric_limits<double>::epsilon() * std::fabs(b) + 0.5 * tol;
        const double xm = 0.5 * (c - b);
        if (std::fabs(xm) <= tol1 || fb == 0.0) return b;
        if (std::fabs(e) >= tol1 && std::fabs(fa) > std::fabs(fb)) {
            double p, q, r;
            const double s = fb / fa;
            if (a == c) {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                q = fa / fc;
                r = fb / fc;
                p = s * (2.0 * xm * q * (q - r) - (b - a) * (r - 1.0));
                q = (q - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if (p > 0.0) q = -q;
            p = std::fabs(p);
            if (2.0 * p < std::min(3.0 * xm * q - std::fabs(tol1 * q), std::fabs(e * q))) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        b += (std::fabs(d) > tol1) ? d : std::copysign(tol1, xm);
        fb = f(b);
    }
    throw NonConvergence("brent_root: iteration limit", b, max_iter);
}

Min1D brent_minimize(const ScalarFn& f, double lo, double hi, double tol, int max_iter) {
    const double cgold = 0.3819660112501051;
    double a = lo, b = hi;
    double x = a + cgold * (b - a), w = x, v = x;
    double fx = finite_or_inf(f(x)), fw = fx, fv = fx;
    double d = 0.0, e = 0.0;
    for (int it = 0; it < max_iter; ++it) {
        const double xm = 0.5 * (a + b);
        const double tol1 = tol * std::fabs(x) + 1e-12;
        const double tol2 = 2.0 * tol1;
        if (std::fabs(x - xm) <= tol2 - 0.5 * (b - a)) break;
        bool golden = true;
        if (std::fabs(e) > tol1) {
            double r = (x - w) * (fx - fv);
            double q = (x - v) * (fx - fw);
            double p = (x - v) * q - (x - w) * r;
            q = 2.0 * (q - r);
            if (q > 0.0) p = -p;
            q = std::fabs(q);
            const double etemp = e;
            e = d;
            if (std::isfinite(p) && std::isfinite(q) && std::fabs(p) < std::fabs(0.5 * q * etemp) &&
                p > q * (a - x) && p < q * (b - x)) {
                d = p / q;
                const double u = x + d;
                if (u - a < tol2 || b - u < tol2) d = std::copysign(tol1, xm - x);
                golden = false;
            }
        }
        if (golden) {
            e = (x >= xm) ? a - x : b - x;
            d = cgold * e;
        }
        const double u = (std::fabs(d) >= tol1) ? x + d : x + std::copysign(tol1, d);
        const double fu = finite_or_inf(f(u));
        if (fu <= fx) {
            if (u >= x) a = x; else b = x;
            v = w; fv = fw;
            w = x; fw = fx;
            x = u; fx = fu;
        } else {
            if (u < x) a = u; else b = u;
            if (fu <= fw || w == x) {
                v = w; fv = fw;
                w = u; fw = fu;
            } else if (fu <= fv || v == x || v == w) {
                v = u; fv = fu;
            }
        }
    }
    return {x, fx};
}

Result nelder_mead(const ObjectiveFn& f, const Vec& x0, const NelderMeadOptions& opt) {
    const int n = static_cast<int>(x0.size());
    std::vector<Vec> pts(n + 1, x0);
    std::vector<double> fv(n + 1);
    for (int i = 0; i < n; ++i) {
        const double h = opt.initial_step * std::max(1.0, std::fabs(x0[i]));
        pts[i + 1][i] += h;
    }
    for (int i = 0; i <= n; ++i) fv[i] = finite_or_inf(f(pts[i]));

    std::vector<int> idx(n + 1);
    Result res;
    int it = 0;
    for (; it < opt.max_iter; ++it) {
        std::iota(idx.begin(), idx.end(), 0);
        std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) { return fv[a] < fv[b]; });
        const int best = idx[0], worst = idx[n], second = idx[n - 1];
        double xspread = 0.0;
        for (int i = 1; i <= n; ++i) xspread = std::max(xspread, (pts[idx[i]] - pts[best]).cwiseAbs().maxCoeff());
        if (std::isfinite(fv[worst]) && std::fabs(fv[worst] - fv[best]) <= opt.ftol * (std::fabs(fv[best]) + 1e-300) + opt.ftol &&
            xspread <= opt.xtol * (1.0 + pts[best].cwiseAbs().maxCoeff())) {
            res.converged = true;
            break;
        }
        if (xspread <= 1e-15 * (1.0 + pts[best].cwiseAbs().maxCoeff())) {
            res.converged = true;
            break;
        }
        Vec centroid = Vec::Zero(n);
        for (int i = 0; i < n; ++i) centroid += pts[idx[i]];
        centroid /= n;
        const Vec xr = centroid + (centroid - pts[worst]);
        const double fr = finite_or_inf(f(xr));
        if (fr < fv[best]) {
            const Vec xe = centroid + 2.0 * (centroid - pts[worst]);
            const double fe = finite_or_inf(f(xe));
            if (fe < fr) { pts[worst] = xe; fv[worst] = fe; }
            else { pts[worst] = xr; fv[worst] = fr; }
        } else if (fr < fv[second]) {
            pts[worst] = xr;
            fv[worst] = fr;
        } else {
            const bool outside = fr < fv[worst];
            const Vec xc = outside ? Vec(centroid + 0.5 * (xr - centroid)) : Vec(centroid + 0.5 * (pts[worst] - centroid));
            const double fc = finite_or_inf(f(xc));
            if (fc < (outside ? fr : fv[worst])) {
                pts[worst] = xc;
                fv[worst] = fc;
            } else {
                for (int i = 1; i <= n; ++i) {
                    const int k = idx[i];
                    pts[k] = pts[best] + 0.5 * (pts[k] - pts[best]);
                    fv[k] = finite_or_inf(f(pts[k]));
                }
            }
        }
    }
    const int best = static_cast<int>(std::min_element(fv.begin(), fv.end()) - fv.begin());
    res.x = pts[best];
    res.fx = fv[best];
    res.iterations = it;
    return res;
}

Vec numeric_gradient(const ObjectiveFn& f, const Vec& x, double h) {
    Vec g(x.size());
    Vec xp = x;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        const double hi = h * std::max(1.0, std::fabs(x[i]));
        xp[i] = x[i] + hi;
        const double fp = f(xp);
        xp[i] = x[i] - hi;
        const double fm = f(xp);
        xp[i] = x[i];
        g[i] = (fp - fm) / (2.0 * hi);
    }
    return g;
}

Mat numeric_hessian(const ObjectiveFn& f, const Vec& x, double h) {
    const Eigen::Index n = x.size();
    Mat H(n, n);
    Vec xp = x;
    const double f0 = f(x);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double hi = h * std::max(1.0, std::fabs(x[i]));
        xp[i] = x[i] + hi;
        const double fp = f(xp);
        xp[i] = x[i] - hi;
        const double fm = f(xp);
        xp[i] = x[i];
        H(i, i) = (fp - 2.0 * f0 + fm) / (hi * hi);
        for (Eigen::Index j = 0; j < i; ++j) {
            const double hj = h * std::max(1.0, std::fabs(x[j]));
            auto at = [&](double si, double sj) {
                xp[i] = x[i] + si * hi;
                xp[j] = x[j] + sj * hj;
                const double v = f(xp);
                xp[i] = x[i];
                xp[j] = x[j];
                return v;
            };
            H(i, j) = H(j, i) = (at(1, 1) - at(1, -1) - at(-1, 1) + at(-1, -1)) / (4.0 * hi * hj);
        }
    }
    return H;
}

Result bfgs(const ObjectiveFn& f, const Vec& x0, const BfgsOptions& opt) {
    const Eigen::Index n = x0.size();
    auto fs = [&](const Vec& v) { return finite_or_inf(f(v)); };
    Result res;
    Vec x = x0;
    double fx = fs(x);
    if (!std::isfinite(fx)) {
        res.x = x;
        res.fx = fx;
        return res;
    }
    Vec g = numeric_gradient(fs, x, opt.fd_step);
    Mat Hinv = Mat::Identity(n, n);
    int it = 0;
    for (; it < opt.max_iter; ++it) {
        if (!g.allFinite()) break;
        if (g.cwiseAbs().maxCoeff() <= opt.gtol * std::max(1.0, std::fabs(fx))) {
            res.converged = true;
            break;
        }
        Vec p = -Hinv * g;
        double slope = g.dot(p);
        if (!(slope < 0.0)) {
            Hinv.setIdentity();
            p = -g;
            slope = -g.squaredNorm();
        }
        // keep the first trial step moderate
        const double pmax = p.cwiseAbs().maxCoeff();
        double t = pmax > 1.0 ? 1.0 / pmax : 1.0;
        double fnew = kInf;
        Vec xnew;
        bool accepted = false;
        for (int ls = 0; ls < 60; ++ls) {
            xnew = x + t * p;
            fnew = fs(xnew);
            if (fnew <= fx + 1e-4 * t * slope) {
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if (!accepted) {
            if (Hinv.isIdentity()) {
                res.converged = true;  // no descent possible at this resolution
                break;
            }
            Hinv.setIdentity();
            continue;
        }
        const Vec gnew = numeric_gradient(fs, xnew, opt.fd_step);
        const Vec s = xnew - x;
        const Vec y = gnew - g;
        const double sy = s.dot(y);
        const double df = fx - fnew;
        x = xnew;
        g = gnew;
        fx = fnew;
        if (sy > 1e-12 * s.norm() * y.norm()) {
            const double rho = 1.0 / sy;
            const Mat I = Mat::Identity(n, n);
            Hinv = (I - rho * s * y.transpose()) * Hinv * (I - rho * y * s.transpose()) + rho * s * s.transpose();
        }
        if (df <= opt.ftol * std::max(1.0, std::fabs(fx)) && s.cwiseAbs().maxCoeff() < 1e-10 * (1.0 + x.cwiseAbs().maxCoeff())) {
            res.converged = true;
            ++it;
            break;
        }
    }
    res.x = x;
    res.fx = fx;
    res.iterations = it;
    return res;
}

Result levenberg_marquardt(const ResidualFn& rf, const Vec& x0, const Vec& lo, const Vec& hi, const LmOptions& opt) {
    const Eigen::Index n = x0.size();
    auto project = [&](Vec v) {
        for (Eigen::Index i = 0; i < n; ++i) v[i] = std::clamp(v[i], lo[i], hi[i]);
        return v;
    };
    auto cost = [&](const Vec& r) { return r.allFinite() ? r.squaredNorm() : kInf; };

    Result res;
    Vec x = project(x0);
    Vec r = rf(x);
    double c = cost(r);
    double lambda = 1e-3;
    int it = 0;
    for (; it < opt.max_iter && std::isfinite(c); ++it) {
        const Eigen::Index m = r.size();
        Mat J(m, n);
        for (Eigen::Index j = 0; j < n; ++j) {
            const double h = opt.fd_step * std::max(1.0, std::fabs(x[j]));
            Vec xp = x, xm = x;
            xp[j] = std::min(x[j] + h, hi[j]);
            xm[j] = std::max(x[j] - h, lo[j]);
            const double dx = xp[j] - xm[j];
            if (dx <= 0.0) {
                J.col(j).setZero();
                continue;
            }
            J.col(j) = (rf(xp) - rf(xm)) / dx;
        }
        if (!J.allFinite()) break;
        const Mat A = J.transpose() * J;
        const Vec g = J.transpose() * r;
        bool improved = false;
        for (int k = 0; k < 30; ++k) {
            Mat Ad = A;
            for (Eigen::Index i = 0; i < n; ++i) Ad(i, i) += lambda * std::max(A(i, i), 1e-12);
            const Vec step = Ad.ldlt().solve(-g);
            const Vec xn = project(x + step);
            const Vec rn = rf(xn);
            const double cn = cost(rn);
            if (cn < c) {
                const double dc = c - cn;
                const double dx = (xn - x).cwiseAbs().maxCoeff();
                x = xn;
                r = rn;
                c = cn;
                lambda = std::max(lambda * 0.3, 1e-12);
                improved = true;
                if (dc <= opt.ftol * std::max(c, 1e-300) + 1e-300 || dx <= opt.xtol * (1.0 + x.cwiseAbs().maxCoeff()))
                    res.converged = true;
                break;
            }
            lambda *= 10.0;
        }
        if (!improved || res.converged) {
            res.converged = true;
            break;
        }
    }
    res.x = x;
    res.fx = c;
    res.iterations = it;
    return res;
}

}  // namespace skegtd::optim
