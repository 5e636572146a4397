#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace kmv {

using Vec = std::vector<double>;

inline double dot(const Vec& a, const Vec& b) {
    if (a.size() != b.size()) throw std::invalid_argument("dot: dimension mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double norm(const Vec& a) { return std::sqrt(dot(a, a)); }

inline Vec operator+(Vec a, const Vec& b) {
    if (a.size() != b.size()) throw std::invalid_argument("vec+: dimension mismatch");
    for (std::size_t i = 0; i < a.size(); ++i) a[i] += b[i];
    return a;
}

inline Vec operator-(Vec a, const Vec& b) {
    if (a.size() != b.size()) throw std::invalid_argument("vec-: dimension mismatch");
    for (std::size_t i = 0; i < a.size(); ++i) a[i] -= b[i];
    return a;
}

inline Vec operator*(double c, Vec a) {
    for (auto& x : a) x *= c;
    return a;
}

inline bool all_finite(const Vec& a) {
    for (double x : a)
        if (!std::isfinite(x)) return false;
    return true;
}

} // namespace kmv
