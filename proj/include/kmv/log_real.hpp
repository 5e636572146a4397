#pragma once

// Signed log-domain scalar. The derived constants of the contraction
// machinery contain factors like exp(-k*R1^2) with k*R1^2 ~ 1e5..1e9,
// far outside IEEE double range; every formula touching them is
// evaluated on (sign, log|x|) pairs instead.

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>

namespace kmv {

class LogReal {
public:
    constexpr LogReal() : lg_(-std::numeric_limits<double>::infinity()), sign_(0) {}

    static LogReal from_double(double x) {
        LogReal r;
        if (x == 0.0) return r;
        if (std::isnan(x)) throw std::domain_error("LogReal: NaN");
        r.sign_ = x > 0 ? 1 : -1;
        r.lg_ = std::log(std::abs(x));
        return r;
    }

    // sign * exp(lg)
    static LogReal from_log(double lg, int sign = 1) {
        LogReal r;
        if (sign == 0 || lg == -std::numeric_limits<double>::infinity()) return r;
        r.sign_ = sign > 0 ? 1 : -1;
        r.lg_ = lg;
        return r;
    }

    static LogReal zero() { return LogReal(); }
    static LogReal one() { return from_log(0.0, 1); }

    int sign() const { return sign_; }
    bool is_zero() const { return sign_ == 0; }
    double log() const {
        if (sign_ <= 0) throw std::domain_error("LogReal::log of non-positive value");
        return lg_;
    }
    double log_abs() const { return lg_; }
    double log10() const { return log() / std::log(10.0); }

    // Saturates: underflow -> (+/-)0, overflow -> (+/-)inf.
    double to_double() const {
        if (sign_ == 0) return 0.0;
        double v = std::exp(lg_);
        return sign_ > 0 ? v : -v;
    }

    LogReal operator-() const { return from_log(lg_, -sign_); }

    friend LogReal operator*(const LogReal& a, const LogReal& b) {
        if (a.sign_ == 0 || b.sign_ == 0) return zero();
        return from_log(a.lg_ + b.lg_, a.sign_ * b.sign_);
    }
    friend LogReal operator/(const LogReal& a, const LogReal& b) {
        if (b.sign_ == 0) throw std::domain_error("LogReal: division by zero");
        if (a.sign_ == 0) return zero();
        return from_log(a.lg_ - b.lg_, a.sign_ * b.sign_);
    }

    friend LogReal operator+(const LogReal& a, const LogReal& b) {
        if (a.sign_ == 0) return b;
        if (b.sign_ == 0) return a;
        if (a.sign_ == b.sign_) {
            double hi = std::max(a.lg_, b.lg_), lo = std::min(a.lg_, b.lg_);
            return from_log(hi + std::log1p(std::exp(lo - hi)), a.sign_);
        }
        // opposite signs: |result| = ||a|-|b||
        if (a.lg_ == b.lg_) return zero();
        const LogReal& big = a.lg_ > b.lg_ ? a : b;
        const LogReal& small = a.lg_ > b.lg_ ? b : a;
        double lg = big.lg_ + std::log1p(-std::exp(small.lg_ - big.lg_));
        return from_log(lg, big.sign_);
    }
    friend LogReal operator-(const LogReal& a, const LogReal& b) { return a + (-b); }

    LogReal pow(double e) const {
        if (sign_ == 0) {
            if (e <= 0) throw std::domain_error("LogReal: 0^nonpositive");
            return zero();
        }
        if (sign_ < 0) throw std::domain_error("LogReal: pow of negative value");
        return from_log(lg_ * e, 1);
    }
    LogReal sqrt() const { return pow(0.5); }

    friend bool operator<(const LogReal& a, const LogReal& b) {
        if (a.sign_ != b.sign_) return a.sign_ < b.sign_;
        if (a.sign_ == 0) return false;
        return a.sign_ > 0 ? a.lg_ < b.lg_ : a.lg_ > b.lg_;
    }
    friend bool operator>(const LogReal& a, const LogReal& b) { return b < a; }
    friend bool operator<=(const LogReal& a, const LogReal& b) { return !(b < a); }
    friend bool operator>=(const LogReal& a, const LogReal& b) { return !(a < b); }
    friend bool operator==(const LogReal& a, const LogReal& b) {
        return a.sign_ == b.sign_ && (a.sign_ == 0 || a.lg_ == b.lg_);
    }

    friend LogReal min(const LogReal& a, const LogReal& b) { return a < b ? a : b; }
    friend LogReal max(const LogReal& a, const LogReal& b) { return a < b ? b : a; }

private:
    double lg_;
    int sign_;
};

inline LogReal lr(double x) { return LogReal::from_double(x); }

} // namespace kmv
