#pragma once

#include <array>

namespace lnsev {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;
};

// Row-major 2x2 matrix.
struct Matrix2 {
    double a11 = 0.0, a12 = 0.0, a21 = 0.0, a22 = 0.0;

    static Matrix2 symmetric(double s11, double s12, double s22) { return {s11, s12, s12, s22}; }

    double det() const { return a11 * a22 - a12 * a21; }
    Matrix2 transpose() const { return {a11, a21, a12, a22}; }
    Matrix2 inverse() const;

    Matrix2 operator*(const Matrix2& o) const {
        return {a11 * o.a11 + a12 * o.a21, a11 * o.a12 + a12 * o.a22,
                a21 * o.a11 + a22 * o.a21, a21 * o.a12 + a22 * o.a22};
    }
    Matrix2 operator*(double s) const { return {a11 * s, a12 * s, a21 * s, a22 * s}; }
    Vec2 operator*(const Vec2& v) const { return {a11 * v.x + a12 * v.y, a21 * v.x + a22 * v.y}; }

    // A * this * A^T
    Matrix2 sandwich(const Matrix2& A) const { return A * (*this) * A.transpose(); }
};

}  // namespace lnsev
