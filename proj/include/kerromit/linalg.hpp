#ifndef KERROMIT_LINALG_HPP
#define KERROMIT_LINALG_HPP

#include <cmath>
#include <complex>
#include <string>

#include <Eigen/Dense>

#include "kerromit/error.hpp"

namespace kerromit
{
using Matrix3c = Eigen::Matrix<std::complex<double>, 3, 3>;
using Vector3c = Eigen::Matrix<std::complex<double>, 3, 1>;

struct LinearSolution
{
    Vector3c x;
    double condition = 0.0; // 1-norm condition number after equilibration
};

inline constexpr double kMaxCondition = 1e12;

// Solves A x = b for the sideband systems. Rows and columns mix optical and
// mechanical units (sqrt(photons) vs metres), so A is row- then
// column-equilibrated before factoring; the condition number is measured on
// the equilibrated matrix.
inline LinearSolution solve_equilibrated(const Matrix3c &a, const Vector3c &b,
                                         double max_condition = kMaxCondition)
{
    Eigen::Vector3d row_scale, col_scale;
    for (int i = 0; i < 3; ++i) {
        double m = a.row(i).cwiseAbs().maxCoeff();
        if (!(m > 0.0) || !std::isfinite(m))
            throw SingularityError("sideband system has a zero or non-finite row " + std::to_string(i));
        row_scale(i) = 1.0 / m;
    }
    Matrix3c scaled = row_scale.asDiagonal() * a;
    for (int j = 0; j < 3; ++j) {
        double m = scaled.col(j).cwiseAbs().maxCoeff();
        if (!(m > 0.0))
            throw SingularityError("sideband system has a zero column " + std::to_string(j));
        col_scale(j) = 1.0 / m;
    }
    scaled = scaled * col_scale.asDiagonal();

    Eigen::PartialPivLU<Matrix3c> lu(scaled);
    Matrix3c inverse = lu.inverse();
    double norm = scaled.cwiseAbs().colwise().sum().maxCoeff();
    double inv_norm = inverse.cwiseAbs().colwise().sum().maxCoeff();
    double cond = norm * inv_norm;
    if (!std::isfinite(cond) || cond > max_condition)
        throw SingularityError("sideband system is singular (condition number " + std::to_string(cond) + ")");

    Vector3c rhs = row_scale.cast<std::complex<double>>().asDiagonal() * b;
    Vector3c y = lu.solve(rhs);
    return {col_scale.cast<std::complex<double>>().asDiagonal() * y, cond};
}
} // namespace kerromit

#endif
