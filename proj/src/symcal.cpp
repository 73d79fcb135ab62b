#include <plates/errors.hpp>
#include <plates/symcal.hpp>

#include <sstream>

namespace plates {

Sym3 Sym3::from_matrix(const Eigen::Matrix3d &a) {
    Sym3 s;
    s.mandel << a(0, 0), a(1, 1), a(2, 2),
                kSqrt2 * 0.5 * (a(1, 2) + a(2, 1)),
                kSqrt2 * 0.5 * (a(0, 2) + a(2, 0)),
                kSqrt2 * 0.5 * (a(0, 1) + a(1, 0));
    return s;
}

Sym3 Sym3::identity() {
    Sym3 s;
    s.mandel << 1, 1, 1, 0, 0, 0;
    return s;
}

Eigen::Matrix3d Sym3::matrix() const {
    const double r = 1.0 / kSqrt2;
    Eigen::Matrix3d a;
    a << mandel[0], r * mandel[5], r * mandel[4],
         r * mandel[5], mandel[1], r * mandel[3],
         r * mandel[4], r * mandel[3], mandel[2];
    return a;
}

Sym2 CylForm::to_sym2() const {
    const double c = std::cos(angle), s = std::sin(angle);
    return {kappa * c * c, kappa * s * s, kappa * kSqrt2 * c * s};
}

Eigen::Matrix2d PlanarRotation::matrix() const {
    const double c = std::cos(theta), s = std::sin(theta);
    Eigen::Matrix2d r;
    r << c, -s, s, c;
    return r;
}

Eigen::Matrix3d PlanarRotation::matrix3() const {
    Eigen::Matrix3d r = Eigen::Matrix3d::Identity();
    r.topLeftCorner<2, 2>() = matrix();
    return r;
}

Sym3 iota(const Sym2 &g) {
    Sym3 s;
    s.mandel << g.c1, g.c2, 0, 0, 0, g.c3;
    return s;
}

double wrap_half_turn(double a) {
    a = std::remainder(a, kPi); // [-pi/2, pi/2]
    if (a <= -0.5 * kPi) a += kPi;
    return a;
}

namespace {

void check_rank_one(const Sym2 &g, double det_tol, const char *what) {
    const double n2 = g.dot(g);
    if (std::abs(g.det()) > det_tol * n2) {
        std::ostringstream msg;
        msg << what << ": |det| = " << std::abs(g.det()) << " exceeds " << det_tol << "*|g|^2";
        throw Error(ErrorKind::DegenerateInput, msg.str());
    }
}

// Unit direction e (up to sign) with g ~ kappa e(x)e, taken from the
// larger diagonal entry for stability.
Eigen::Vector2d rank_one_direction(const Sym2 &g) {
    const Eigen::Matrix2d a = g.matrix();
    Eigen::Vector2d e = std::abs(a(0, 0)) >= std::abs(a(1, 1)) ? Eigen::Vector2d(a.col(0))
                                                               : Eigen::Vector2d(a.col(1));
    return e.normalized();
}

} // namespace

double angle(const Sym2 &g, double det_tol) {
    if (g.norm() == 0.0) throw Error(ErrorKind::DegenerateInput, "angle of the zero matrix");
    check_rank_one(g, det_tol, "angle");
    const Eigen::Vector2d e = rank_one_direction(g);
    if (e[0] == 0.0) return 0.5 * kPi;
    return std::atan(e[1] / e[0]);
}

CylForm cyl_decompose(const Sym2 &g, double det_tol) {
    if (g.norm() == 0.0) return {0.0, 0.0};
    const double a = angle(g, det_tol);
    const CylForm unit{1.0, a};
    return {g.dot(unit.to_sym2()), a};
}

Sym2 reflect_T(const Sym2 &g) { return {g.c1, g.c2, -g.c3}; }

Sym2 phi_map(double a1, double a2, double tol) {
    const double p = a1 * a2;
    if (p < -tol * std::max(1.0, a1 * a1 + a2 * a2)) {
        std::ostringstream msg;
        msg << "phi_map needs a1*a2 >= 0, got (" << a1 << ", " << a2 << ")";
        throw Error(ErrorKind::DomainError, msg.str());
    }
    return {a1, a2, std::sqrt(2.0 * std::max(p, 0.0))};
}

Sym2 congruence(const Sym2 &g, const Eigen::Matrix2d &t) {
    return Sym2::from_matrix(t * g.matrix() * t.transpose());
}

Sym2 rotate_form(const Sym2 &g, const PlanarRotation &r) { return congruence(g, r.matrix()); }

Mat6 congruence_operator(const Eigen::Matrix3d &a) {
    Mat6 p;
    for (int j = 0; j < 6; ++j) {
        Sym3 e;
        e.mandel[j] = 1.0;
        p.col(j) = Sym3::from_matrix(a.transpose() * e.matrix() * a).mandel;
    }
    return p;
}

} // namespace plates
