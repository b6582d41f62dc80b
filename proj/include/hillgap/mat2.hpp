#pragma once

#include <array>
#include <cmath>
#include <complex>

namespace hillgap {

using Vec2 = std::array<double, 2>;
using Cplx = std::complex<double>;
using Vec2c = std::array<Cplx, 2>;

/// 2x2 real matrix, row-major. The only linear algebra this project needs.
struct Mat2 {
    double m00 = 0, m01 = 0, m10 = 0, m11 = 0;

    static Mat2 identity() { return {1, 0, 0, 1}; }

    double det() const { return m00 * m11 - m01 * m10; }
    double trace() const { return m00 + m11; }

    /// Frobenius norm; used wherever a matrix norm bound is needed.
    double norm() const {
        return std::sqrt(m00 * m00 + m01 * m01 + m10 * m10 + m11 * m11);
    }

    Mat2 inverse() const {
        const double d = det();
        return {m11 / d, -m01 / d, -m10 / d, m00 / d};
    }

    Vec2 operator*(const Vec2& v) const {
        return {m00 * v[0] + m01 * v[1], m10 * v[0] + m11 * v[1]};
    }
    Vec2c operator*(const Vec2c& v) const {
        return {m00 * v[0] + m01 * v[1], m10 * v[0] + m11 * v[1]};
    }
    Mat2 operator*(const Mat2& o) const {
        return {m00 * o.m00 + m01 * o.m10, m00 * o.m01 + m01 * o.m11,
                m10 * o.m00 + m11 * o.m10, m10 * o.m01 + m11 * o.m11};
    }
    Mat2 operator-(const Mat2& o) const {
        return {m00 - o.m00, m01 - o.m01, m10 - o.m10, m11 - o.m11};
    }
    Mat2 operator+(const Mat2& o) const {
        return {m00 + o.m00, m01 + o.m01, m10 + o.m10, m11 + o.m11};
    }
    Mat2 operator*(double s) const { return {m00 * s, m01 * s, m10 * s, m11 * s}; }
};

inline double norm2(const Vec2& v) { return std::hypot(v[0], v[1]); }
inline double norm2(const Vec2c& v) { return std::sqrt(std::norm(v[0]) + std::norm(v[1])); }

inline Vec2c operator+(const Vec2c& a, const Vec2c& b) { return {a[0] + b[0], a[1] + b[1]}; }
inline Vec2c operator-(const Vec2c& a, const Vec2c& b) { return {a[0] - b[0], a[1] - b[1]}; }
inline Vec2c operator-(const Vec2c& v) { return {-v[0], -v[1]}; }
inline Vec2c operator*(const Cplx& s, const Vec2c& v) { return {s * v[0], s * v[1]}; }
inline Vec2c operator*(double s, const Vec2c& v) { return {s * v[0], s * v[1]}; }

/// Larger / smaller singular value of a 2x2 real matrix (closed form).
inline std::array<double, 2> singular_values(const Mat2& A) {
    const double f = A.norm();
    const double d = std::abs(A.det());
    // sigma1^2 + sigma2^2 = |A|_F^2, sigma1*sigma2 = |det|
    const double s = f * f;
    const double disc = std::max(0.0, s * s - 4 * d * d);
    const double r = std::sqrt(disc);
    const double s1 = std::sqrt(0.5 * (s + r));
    const double s2 = s1 > 0 ? d / s1 : 0.0;
    return {s1, s2};
}

}  // namespace hillgap
