#include "palign/linalg.hpp"

#include <cmath>

#include "palign/errors.hpp"

namespace palign {
namespace {

constexpr double kPivotTol = 1e-13;

template <int N, typename M>
void checkSystem(const M& a) {
    double scale = 0.0;
    for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j) {
            if (!std::isfinite(a(i, j))) throw Error("NonFinite", "system matrix has a non-finite entry");
            scale = std::max(scale, std::abs(a(i, j)));
        }
    const double symTol = 1e-12 * (1.0 + scale);
    for (int i = 0; i < N; ++i)
        for (int j = i + 1; j < N; ++j)
            if (std::abs(a(i, j) - a(j, i)) > symTol)
                throw Error("AsymmetricSystem", "system matrix is not symmetric");
}

// Lower-triangular Cholesky factor of a symmetric positive-definite matrix.
template <int N, typename M>
void cholesky(const M& a, std::array<double, static_cast<std::size_t>(N) * N>& lower) {
    checkSystem<N>(a);
    double diagScale = 0.0;
    for (int i = 0; i < N; ++i) diagScale = std::max(diagScale, std::abs(a(i, i)));
    if (diagScale == 0.0) throw Error("SingularSystem", "system matrix is zero");

    auto l = [&lower](int r, int c) -> double& { return lower[static_cast<std::size_t>(r) * N + c]; };
    for (int j = 0; j < N; ++j) {
        double d = a(j, j);
        for (int k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
        if (!(d > kPivotTol * diagScale))
            throw Error("SingularSystem", "system matrix is rank-deficient or indefinite");
        l(j, j) = std::sqrt(d);
        for (int i = j + 1; i < N; ++i) {
            double s = a(i, j);
            for (int k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
            l(i, j) = s / l(j, j);
        }
    }
}

template <int N>
void substitute(const std::array<double, static_cast<std::size_t>(N) * N>& lower, const double* rhs, double* out) {
    auto l = [&lower](int r, int c) { return lower[static_cast<std::size_t>(r) * N + c]; };
    double y[N];
    for (int i = 0; i < N; ++i) {
        double s = rhs[i];
        for (int k = 0; k < i; ++k) s -= l(i, k) * y[k];
        y[i] = s / l(i, i);
    }
    for (int i = N - 1; i >= 0; --i) {
        double s = y[i];
        for (int k = i + 1; k < N; ++k) s -= l(k, i) * out[k];
        out[i] = s / l(i, i);
    }
}

}  // namespace

SymSolve3::SymSolve3(const Mat3& a) { cholesky<3>(a, lower_); }

Vec3 SymSolve3::solve(const Vec3& rhs) const {
    double in[3] = {rhs.x, rhs.y, rhs.z};
    double out[3];
    substitute<3>(lower_, in, out);
    return {out[0], out[1], out[2]};
}

Mat3 SymSolve3::solveColumns(const Mat3& rhs) const {
    Mat3 result;
    for (int c = 0; c < 3; ++c) {
        Vec3 x = solve(rhs.col(c));
        for (int r = 0; r < 3; ++r) result(r, c) = x[r];
    }
    return result;
}

SymSolve4::SymSolve4(const Mat4& a) { cholesky<4>(a, lower_); }

Vec4 SymSolve4::solve(const Vec4& rhs) const {
    Vec4 out;
    substitute<4>(lower_, rhs.v.data(), out.v.data());
    return out;
}

Vec4 solveSym(const Mat4& a, const Vec4& rhs) { return SymSolve4(a).solve(rhs); }

std::array<Vec4, 3> solveSym(const Mat4& a, const std::array<Vec4, 3>& rhs) {
    SymSolve4 solver(a);
    return {solver.solve(rhs[0]), solver.solve(rhs[1]), solver.solve(rhs[2])};
}

Vec3 solveSym(const Mat3& a, const Vec3& rhs) { return SymSolve3(a).solve(rhs); }

Mat3 solveSymColumns(const Mat3& a, const Mat3& rhs) { return SymSolve3(a).solveColumns(rhs); }

}  // namespace palign
