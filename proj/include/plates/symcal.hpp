#pragma once

// Symmetric 2x2 / 3x3 matrices in fixed orthonormal coordinates.
//
// Sym2 stores coefficients w.r.t. G1 = e1(x)e1, G2 = e2(x)e2,
// G3 = (e1(x)e2 + e2(x)e1)/sqrt(2); the Frobenius inner product of two
// Sym2 is the Euclidean dot product of their coefficients.
// Sym3 carries the Mandel vector (11, 22, 33, r2*23, r2*13, r2*12).

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <numbers>

namespace plates {

using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat6 = Eigen::Matrix<double, 6, 6>;

inline constexpr double kSqrt2 = std::numbers::sqrt2;
inline constexpr double kPi = std::numbers::pi;

struct Sym2 {
    double c1 = 0, c2 = 0, c3 = 0;

    static Sym2 from_matrix(const Eigen::Matrix2d &a) {
        return {a(0, 0), a(1, 1), kSqrt2 * 0.5 * (a(0, 1) + a(1, 0))};
    }
    static Sym2 from_vector(const Eigen::Vector3d &v) { return {v[0], v[1], v[2]}; }
    static Sym2 basis(int i) {
        Sym2 g;
        g[i] = 1.0;
        return g;
    }

    Eigen::Matrix2d matrix() const {
        Eigen::Matrix2d a;
        a << c1, c3 / kSqrt2, c3 / kSqrt2, c2;
        return a;
    }
    Eigen::Vector3d vector() const { return {c1, c2, c3}; }

    double &operator[](int i) { return i == 0 ? c1 : (i == 1 ? c2 : c3); }
    double operator[](int i) const { return i == 0 ? c1 : (i == 1 ? c2 : c3); }

    double trace() const { return c1 + c2; }
    double det() const { return c1 * c2 - 0.5 * c3 * c3; }
    double dot(const Sym2 &o) const { return c1 * o.c1 + c2 * o.c2 + c3 * o.c3; }
    double norm() const { return std::sqrt(dot(*this)); }

    Sym2 operator+(const Sym2 &o) const { return {c1 + o.c1, c2 + o.c2, c3 + o.c3}; }
    Sym2 operator-(const Sym2 &o) const { return {c1 - o.c1, c2 - o.c2, c3 - o.c3}; }
    Sym2 operator-() const { return {-c1, -c2, -c3}; }
    Sym2 operator*(double s) const { return {s * c1, s * c2, s * c3}; }
    friend Sym2 operator*(double s, const Sym2 &g) { return g * s; }
    bool operator==(const Sym2 &) const = default;
};

struct Sym3 {
    Vec6 mandel = Vec6::Zero();

    static Sym3 from_matrix(const Eigen::Matrix3d &a);
    static Sym3 identity();
    Eigen::Matrix3d matrix() const;
    double norm() const { return mandel.norm(); }
};

struct CylForm {
    double kappa = 0;
    double angle = 0;

    Eigen::Vector2d direction() const { return {std::cos(angle), std::sin(angle)}; }
    Sym2 to_sym2() const;
};

struct PlanarRotation {
    double theta = 0;

    Eigen::Matrix2d matrix() const;
    // diag(R, 1)
    Eigen::Matrix3d matrix3() const;
};

// Relative determinant tolerance for rank-deficient inputs.
inline constexpr double kDetTol = 1e-9;

// Upper-left embedding into 3x3; third row and column zero.
Sym3 iota(const Sym2 &g);

// Angle of the kernel-orthogonal direction of a rank-one g, in (-pi/2, pi/2].
double angle(const Sym2 &g, double det_tol = kDetTol);

// g = kappa e(x)e. Zero maps to (0, 0) by convention.
CylForm cyl_decompose(const Sym2 &g, double det_tol = kDetTol);

// Off-diagonal sign flip.
Sym2 reflect_T(const Sym2 &g);

// a1 G1 + a2 G2 + sqrt(2 a1 a2) G3 for a1 a2 >= 0 (up to tol).
Sym2 phi_map(double a1, double a2, double tol = 1e-12);

// R g R^T
Sym2 rotate_form(const Sym2 &g, const PlanarRotation &r);
Sym2 congruence(const Sym2 &g, const Eigen::Matrix2d &t);

// Wrap an angle into (-pi/2, pi/2].
double wrap_half_turn(double a);

// Mandel matrix P of the linear map X -> A^T X A on symmetric 3x3 matrices,
// i.e. mandel(A^T X A) = P * mandel(X).
Mat6 congruence_operator(const Eigen::Matrix3d &a);

} // namespace plates
