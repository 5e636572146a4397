#pragma once

// Adaptive Simpson quadrature (plain and log-domain) and a golden-section
// maximizer. The log-domain variant integrates f given as log f, for
// integrands whose values leave double range.

#include <cmath>
#include <functional>
#include <limits>

namespace kmv {

namespace detail {

template <class F>
double simpson_rec(const F& f, double a, double b, double fa, double fm, double fb, double whole,
                   double tol, int depth) {
    double m = 0.5 * (a + b);
    double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    double flm = f(lm), frm = f(rm);
    double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * tol)
        return left + right + delta / 15.0;
    return simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

inline double logadd(double a, double b) {
    if (a == -std::numeric_limits<double>::infinity()) return b;
    if (b == -std::numeric_limits<double>::infinity()) return a;
    double hi = a > b ? a : b, lo = a > b ? b : a;
    return hi + std::log1p(std::exp(lo - hi));
}

// log of Simpson rule value over [a,b] given log-integrand values
inline double log_simpson(double h, double lfa, double lfm, double lfb) {
    double s = logadd(logadd(lfa, std::log(4.0) + lfm), lfb);
    return std::log(h / 6.0) + s;
}

template <class F>
double log_simpson_rec(const F& lf, double a, double b, double lfa, double lfm, double lfb,
                       double lwhole, double rel_tol, int depth) {
    double m = 0.5 * (a + b);
    double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    double fl = lf(lm), fr = lf(rm);
    double lleft = log_simpson(m - a, lfa, fl, lfm);
    double lright = log_simpson(b - m, lfm, fr, lfb);
    double lsum = logadd(lleft, lright);
    bool ok = std::abs(std::exp(lsum - lwhole) - 1.0) <= 15.0 * rel_tol;
    if (depth <= 0 || ok) return lsum;
    return logadd(log_simpson_rec(lf, a, m, lfa, fl, lfm, lleft, rel_tol, depth - 1),
                  log_simpson_rec(lf, m, b, lfm, fr, lfb, lright, rel_tol, depth - 1));
}

} // namespace detail

// Absolute tolerance.
template <class F>
double integrate(const F& f, double a, double b, double tol = 1e-12, int max_depth = 48) {
    if (a == b) return 0.0;
    double m = 0.5 * (a + b);
    double fa = f(a), fm = f(m), fb = f(b);
    double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return detail::simpson_rec(f, a, b, fa, fm, fb, whole, tol, max_depth);
}

// Returns log of integral of exp(lf(x)) over [a,b]; relative tolerance.
template <class F>
double integrate_log(const F& lf, double a, double b, double rel_tol = 1e-12, int max_depth = 48) {
    if (a == b) return -std::numeric_limits<double>::infinity();
    double m = 0.5 * (a + b);
    double lfa = lf(a), lfm = lf(m), lfb = lf(b);
    double lwhole = detail::log_simpson(b - a, lfa, lfm, lfb);
    return detail::log_simpson_rec(lf, a, b, lfa, lfm, lfb, lwhole, rel_tol, max_depth);
}

// Maximizes a unimodal function on [a,b]; returns argmax. Tolerance is
// relative to the bracket width.
template <class F>
double golden_section_max(const F& f, double a, double b, double rel_tol = 1e-10) {
    const double invphi = 0.6180339887498948482;
    double x1 = b - invphi * (b - a);
    double x2 = a + invphi * (b - a);
    double f1 = f(x1), f2 = f(x2);
    double width0 = b - a;
    while (b - a > rel_tol * width0 + 1e-300) {
        if (f1 < f2) {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + invphi * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - invphi * (b - a);
            f1 = f(x1);
        }
    }
    return 0.5 * (a + b);
}

} // namespace kmv
