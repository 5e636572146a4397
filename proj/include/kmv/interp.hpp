#pragma once

// 1-d interpolants: natural cubic spline (radial potential tables) and
// Fritsch-Carlson monotone cubic (tabulated distance profile).

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace kmv {

class CubicSpline {
public:
    CubicSpline() = default;

    // Natural spline through (x[i], y[i]); x strictly increasing.
    CubicSpline(std::vector<double> x, std::vector<double> y)
        : x_(std::move(x)), y_(std::move(y)) {
        const std::size_t n = x_.size();
        if (n < 2 || y_.size() != n) throw std::invalid_argument("CubicSpline: bad table");
        for (std::size_t i = 1; i < n; ++i)
            if (!(x_[i] > x_[i - 1])) throw std::invalid_argument("CubicSpline: x not increasing");
        // second derivatives by the standard tridiagonal solve
        std::vector<double> u(n, 0.0);
        m_.assign(n, 0.0);
        for (std::size_t i = 1; i + 1 < n; ++i) {
            double sig = (x_[i] - x_[i - 1]) / (x_[i + 1] - x_[i - 1]);
            double p = sig * m_[i - 1] + 2.0;
            m_[i] = (sig - 1.0) / p;
            double d = (y_[i + 1] - y_[i]) / (x_[i + 1] - x_[i]) -
                       (y_[i] - y_[i - 1]) / (x_[i] - x_[i - 1]);
            u[i] = (6.0 * d / (x_[i + 1] - x_[i - 1]) - sig * u[i - 1]) / p;
        }
        for (std::size_t k = n - 1; k-- > 1;) m_[k] = m_[k] * m_[k + 1] + u[k];
        m_[0] = m_[n - 1] = 0.0;
    }

    double eval(double x) const { return eval_impl(x, nullptr); }
    double eval(double x, double& deriv) const { return eval_impl(x, &deriv); }

    double x_min() const { return x_.front(); }
    double x_max() const { return x_.back(); }

private:
    double eval_impl(double x, double* deriv) const {
        const std::size_t n = x_.size();
        // clamp with linear extension outside the table
        if (x <= x_[0]) {
            double d = slope_at(0);
            if (deriv) *deriv = d;
            return y_[0] + d * (x - x_[0]);
        }
        if (x >= x_[n - 1]) {
            double d = slope_at(n - 2, true);
            if (deriv) *deriv = d;
            return y_[n - 1] + d * (x - x_[n - 1]);
        }
        std::size_t i = std::upper_bound(x_.begin(), x_.end(), x) - x_.begin() - 1;
        double h = x_[i + 1] - x_[i];
        double a = (x_[i + 1] - x) / h, b = (x - x_[i]) / h;
        double val = a * y_[i] + b * y_[i + 1] +
                     ((a * a * a - a) * m_[i] + (b * b * b - b) * m_[i + 1]) * h * h / 6.0;
        if (deriv) {
            *deriv = (y_[i + 1] - y_[i]) / h -
                     (3.0 * a * a - 1.0) / 6.0 * h * m_[i] + (3.0 * b * b - 1.0) / 6.0 * h * m_[i + 1];
        }
        return val;
    }

    double slope_at(std::size_t i, bool right = false) const {
        double h = x_[i + 1] - x_[i];
        if (!right)
            return (y_[i + 1] - y_[i]) / h - h / 6.0 * (2.0 * m_[i] + m_[i + 1]);
        return (y_[i + 1] - y_[i]) / h + h / 6.0 * (m_[i] + 2.0 * m_[i + 1]);
    }

    std::vector<double> x_, y_;
    std::vector<double> m_; // second derivatives
};

// Monotone cubic Hermite (Fritsch-Carlson). Preserves monotonicity of the data.
class MonotoneCubic {
public:
    MonotoneCubic() = default;

    MonotoneCubic(std::vector<double> x, std::vector<double> y)
        : x_(std::move(x)), y_(std::move(y)) {
        const std::size_t n = x_.size();
        if (n < 2 || y_.size() != n) throw std::invalid_argument("MonotoneCubic: bad table");
        std::vector<double> d(n - 1);
        for (std::size_t i = 0; i + 1 < n; ++i) {
            double h = x_[i + 1] - x_[i];
            if (!(h > 0)) throw std::invalid_argument("MonotoneCubic: x not increasing");
            d[i] = (y_[i + 1] - y_[i]) / h;
        }
        s_.assign(n, 0.0);
        s_[0] = d[0];
        s_[n - 1] = d[n - 2];
        for (std::size_t i = 1; i + 1 < n; ++i)
            s_[i] = (d[i - 1] * d[i] > 0) ? 0.5 * (d[i - 1] + d[i]) : 0.0;
        for (std::size_t i = 0; i + 1 < n; ++i) {
            if (d[i] == 0.0) {
                s_[i] = s_[i + 1] = 0.0;
                continue;
            }
            double a = s_[i] / d[i], b = s_[i + 1] / d[i];
            double t = a * a + b * b;
            if (t > 9.0) {
                double tau = 3.0 / std::sqrt(t);
                s_[i] = tau * a * d[i];
                s_[i + 1] = tau * b * d[i];
            }
        }
    }

    double eval(double x) const {
        const std::size_t n = x_.size();
        if (x <= x_[0]) return y_[0] + s_[0] * (x - x_[0]);
        if (x >= x_[n - 1]) return y_[n - 1] + s_[n - 1] * (x - x_[n - 1]);
        std::size_t i = std::upper_bound(x_.begin(), x_.end(), x) - x_.begin() - 1;
        double h = x_[i + 1] - x_[i];
        double t = (x - x_[i]) / h;
        double t2 = t * t, t3 = t2 * t;
        double h00 = 2 * t3 - 3 * t2 + 1, h10 = t3 - 2 * t2 + t;
        double h01 = -2 * t3 + 3 * t2, h11 = t3 - t2;
        return h00 * y_[i] + h * h10 * s_[i] + h01 * y_[i + 1] + h * h11 * s_[i + 1];
    }

private:
    std::vector<double> x_, y_;
    std::vector<double> s_; // node slopes
};

} // namespace kmv
