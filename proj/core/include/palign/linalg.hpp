#pragma once

#include <array>
#include <cmath>
#include <cstddef>

namespace palign {

struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    double operator[](int i) const { return i == 0 ? x : (i == 1 ? y : z); }
    double& operator[](int i) { return i == 0 ? x : (i == 1 ? y : z); }

    Vec3& operator+=(const Vec3& o) { x += o.x; y += o.y; z += o.z; return *this; }
    Vec3& operator-=(const Vec3& o) { x -= o.x; y -= o.y; z -= o.z; return *this; }
    Vec3& operator*=(double s) { x *= s; y *= s; z *= s; return *this; }
};

inline Vec3 operator+(Vec3 a, const Vec3& b) { return a += b; }
inline Vec3 operator-(Vec3 a, const Vec3& b) { return a -= b; }
inline Vec3 operator-(const Vec3& a) { return {-a.x, -a.y, -a.z}; }
inline Vec3 operator*(double s, Vec3 a) { return a *= s; }
inline Vec3 operator*(Vec3 a, double s) { return a *= s; }

inline double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline Vec3 hadamard(const Vec3& a, const Vec3& b) { return {a.x * b.x, a.y * b.y, a.z * b.z}; }
inline double normSquared(const Vec3& a) { return dot(a, a); }
inline double norm(const Vec3& a) { return std::sqrt(normSquared(a)); }
inline double maxAbs(const Vec3& a) {
    return std::max(std::abs(a.x), std::max(std::abs(a.y), std::abs(a.z)));
}

// Row-major 3x3 matrix.
struct Mat3 {
    std::array<double, 9> m{};

    static Mat3 identity() {
        Mat3 r;
        r.m = {1, 0, 0, 0, 1, 0, 0, 0, 1};
        return r;
    }
    static Mat3 diagonal(const Vec3& d) {
        Mat3 r;
        r.m = {d.x, 0, 0, 0, d.y, 0, 0, 0, d.z};
        return r;
    }
    static Mat3 scaledIdentity(double s) { return diagonal({s, s, s}); }

    double operator()(int r, int c) const { return m[static_cast<std::size_t>(r) * 3 + c]; }
    double& operator()(int r, int c) { return m[static_cast<std::size_t>(r) * 3 + c]; }

    Vec3 row(int r) const { return {(*this)(r, 0), (*this)(r, 1), (*this)(r, 2)}; }
    Vec3 col(int c) const { return {(*this)(0, c), (*this)(1, c), (*this)(2, c)}; }

    Mat3 transposed() const {
        Mat3 r;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) r(i, j) = (*this)(j, i);
        return r;
    }

    Mat3& operator+=(const Mat3& o) {
        for (std::size_t i = 0; i < 9; ++i) m[i] += o.m[i];
        return *this;
    }
    Mat3& operator-=(const Mat3& o) {
        for (std::size_t i = 0; i < 9; ++i) m[i] -= o.m[i];
        return *this;
    }
    Mat3& operator*=(double s) {
        for (double& v : m) v *= s;
        return *this;
    }
};

inline Mat3 operator+(Mat3 a, const Mat3& b) { return a += b; }
inline Mat3 operator-(Mat3 a, const Mat3& b) { return a -= b; }
inline Mat3 operator*(double s, Mat3 a) { return a *= s; }
inline Mat3 operator*(Mat3 a, double s) { return a *= s; }

inline Vec3 operator*(const Mat3& a, const Vec3& v) {
    return {dot(a.row(0), v), dot(a.row(1), v), dot(a.row(2), v)};
}

inline Mat3 operator*(const Mat3& a, const Mat3& b) {
    Mat3 r;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            double s = 0.0;
            for (int k = 0; k < 3; ++k) s += a(i, k) * b(k, j);
            r(i, j) = s;
        }
    return r;
}

inline Mat3 outer(const Vec3& a, const Vec3& b) {
    Mat3 r;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) r(i, j) = a[i] * b[j];
    return r;
}

inline double trace(const Mat3& a) { return a(0, 0) + a(1, 1) + a(2, 2); }

inline double frobenius(const Mat3& a) {
    double s = 0.0;
    for (double v : a.m) s += v * v;
    return std::sqrt(s);
}

inline double maxAbs(const Mat3& a) {
    double s = 0.0;
    for (double v : a.m) s = std::max(s, std::abs(v));
    return s;
}

struct Vec4 {
    std::array<double, 4> v{};

    double operator[](int i) const { return v[static_cast<std::size_t>(i)]; }
    double& operator[](int i) { return v[static_cast<std::size_t>(i)]; }
};

// Row-major 4x4 matrix.
struct Mat4 {
    std::array<double, 16> m{};

    static Mat4 identity() {
        Mat4 r;
        for (int i = 0; i < 4; ++i) r(i, i) = 1.0;
        return r;
    }

    double operator()(int r, int c) const { return m[static_cast<std::size_t>(r) * 4 + c]; }
    double& operator()(int r, int c) { return m[static_cast<std::size_t>(r) * 4 + c]; }

    Mat4& operator+=(const Mat4& o) {
        for (std::size_t i = 0; i < 16; ++i) m[i] += o.m[i];
        return *this;
    }
};

inline double maxAbs(const Mat4& a) {
    double s = 0.0;
    for (double v : a.m) s = std::max(s, std::abs(v));
    return s;
}

inline Vec4 operator*(const Mat4& a, const Vec4& x) {
    Vec4 r;
    for (int i = 0; i < 4; ++i) {
        double s = 0.0;
        for (int j = 0; j < 4; ++j) s += a(i, j) * x[j];
        r[i] = s;
    }
    return r;
}

// Cholesky solver for a symmetric positive-definite 3x3 system.
// Throws Error("NonFinite") on non-finite entries, Error("AsymmetricSystem")
// when the input is not symmetric within 1e-12 relative, and
// Error("SingularSystem") when a pivot collapses (rank-deficient input).
class SymSolve3 {
public:
    explicit SymSolve3(const Mat3& a);
    Vec3 solve(const Vec3& rhs) const;
    Mat3 solveColumns(const Mat3& rhs) const;  // per-column solve

private:
    std::array<double, 9> lower_{};
};

// Same contract for 4x4 systems.
class SymSolve4 {
public:
    explicit SymSolve4(const Mat4& a);
    Vec4 solve(const Vec4& rhs) const;

private:
    std::array<double, 16> lower_{};
};

// Convenience wrappers: factor once, solve k right-hand sides.
Vec4 solveSym(const Mat4& a, const Vec4& rhs);
std::array<Vec4, 3> solveSym(const Mat4& a, const std::array<Vec4, 3>& rhs);
Vec3 solveSym(const Mat3& a, const Vec3& rhs);
Mat3 solveSymColumns(const Mat3& a, const Mat3& rhs);

}  // namespace palign
