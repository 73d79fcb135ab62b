#include <plates/errors.hpp>
#include <plates/symcal.hpp>

#include <doctest.h>

#include <random>

using namespace plates;

namespace {

bool close(const Sym2 &a, const Sym2 &b, double tol = 1e-14) { return (a - b).norm() <= tol; }

Sym2 rank_one(double kappa, double alpha) { return CylForm{kappa, alpha}.to_sym2(); }

} // namespace

TEST_SUITE("symcal") {

TEST_CASE("iota embeds the upper-left block") {
    CHECK(iota(Sym2{1, 1, 0}).matrix().isApprox(Eigen::Vector3d(1, 1, 0).asDiagonal().toDenseMatrix()));
    const Eigen::Matrix3d g3 = iota(Sym2::basis(2)).matrix();
    CHECK(g3(0, 1) == doctest::Approx(1 / kSqrt2));
    CHECK(g3(1, 0) == doctest::Approx(1 / kSqrt2));
    CHECK(g3(0, 0) == 0.0);
    CHECK(g3(2, 2) == 0.0);
    CHECK(iota(Sym2{}).norm() == 0.0);
}

TEST_CASE("angle of axial and diagonal rank-one forms") {
    CHECK(angle(2.5 * Sym2::basis(0)) == 0.0);
    CHECK(angle(-1.0 * Sym2::basis(1)) == doctest::Approx(kPi / 2));
    CHECK(angle(Sym2::from_matrix((Eigen::Matrix2d() << 1, 1, 1, 1).finished())) == doctest::Approx(kPi / 4));
    CHECK_THROWS_AS(angle(Sym2{}), Error);
    CHECK_THROWS_AS(angle(Sym2{1, 1, 0}), Error);
}

TEST_CASE("cyl_decompose examples") {
    const CylForm a = cyl_decompose(Sym2{2, 0, 0});
    CHECK(a.kappa == doctest::Approx(2));
    CHECK(a.angle == 0.0);
    const CylForm b = cyl_decompose(Sym2::from_matrix((Eigen::Matrix2d() << 1, 1, 1, 1).finished()));
    CHECK(b.kappa == doctest::Approx(2));
    CHECK(b.angle == doctest::Approx(kPi / 4));
    const CylForm c = cyl_decompose(-3.0 * Sym2::basis(1));
    CHECK(c.kappa == doctest::Approx(-3));
    CHECK(c.angle == doctest::Approx(kPi / 2));
    const CylForm z = cyl_decompose(Sym2{});
    CHECK(z.kappa == 0.0);
    CHECK(z.angle == 0.0);
    CHECK_THROWS_AS(cyl_decompose(Sym2{1, -1, 0}), Error);
}

TEST_CASE("reflect_T flips the off-diagonal entry") {
    const Sym2 g = Sym2::from_matrix((Eigen::Matrix2d() << 1, 1, 1, 1).finished());
    CHECK(close(reflect_T(g), Sym2::from_matrix((Eigen::Matrix2d() << 1, -1, -1, 1).finished())));
    CHECK(reflect_T(Sym2{3, -2, 0}) == Sym2{3, -2, 0});
    CHECK(reflect_T(Sym2::basis(2)) == -Sym2::basis(2));
    CHECK(reflect_T(reflect_T(Sym2{1, 2, 3})) == Sym2{1, 2, 3});
}

TEST_CASE("phi_map examples") {
    CHECK(close(phi_map(1, 1), Sym2::from_matrix((Eigen::Matrix2d() << 1, 1, 1, 1).finished())));
    CHECK(phi_map(2.5, 0) == 2.5 * Sym2::basis(0));
    CHECK(phi_map(0, 0) == Sym2{});
    CHECK_THROWS_AS(phi_map(1, -1), Error);
}

TEST_CASE("rotate_form examples") {
    const Sym2 g{1.5, -0.5, 0.25};
    CHECK(close(rotate_form(g, {0.0}), g));
    CHECK(close(rotate_form(Sym2::basis(0), {kPi / 2}), Sym2::basis(1)));
    CHECK(close(rotate_form(Sym2::basis(0), {kPi / 4}), Sym2{0.5, 0.5, 1 / kSqrt2}));
}

TEST_CASE("rotation matrices are orthogonal") {
    for (double t : {0.0, 0.3, -1.2, 2.9}) {
        const Eigen::Matrix2d r = PlanarRotation{t}.matrix();
        CHECK((r.transpose() * r - Eigen::Matrix2d::Identity()).norm() < 1e-15);
    }
}

TEST_CASE("property: decomposition round trip and angle equivariance") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> k(-5, 5), a(-kPi, kPi);
    for (int n = 0; n < 500; ++n) {
        const double kappa = k(rng), alpha = a(rng);
        if (std::abs(kappa) < 1e-3) continue;
        const Sym2 g = rank_one(kappa, alpha);
        const CylForm f = cyl_decompose(g);
        CHECK((f.to_sym2() - g).norm() <= 1e-12 * g.norm());
        CHECK(f.angle > -kPi / 2);
        CHECK(f.angle <= kPi / 2);
        CHECK(angle(-g) == doctest::Approx(angle(g)).epsilon(1e-12));

        const double beta = a(rng);
        const double moved = angle(rotate_form(g, {beta}));
        const double diff = moved - (angle(g) + beta);
        const double turns = diff / kPi;
        CHECK(std::abs(turns - std::round(turns)) < 1e-9);
    }
}

TEST_CASE("property: iota is an isometry and phi_map lands on the cone") {
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> u(-3, 3);
    for (int n = 0; n < 500; ++n) {
        const Sym2 g{u(rng), u(rng), u(rng)};
        CHECK(iota(g).norm() == doctest::Approx(g.norm()).epsilon(1e-14));
        const double a1 = std::abs(u(rng)), a2 = std::abs(u(rng));
        const double s = u(rng) < 0 ? -1.0 : 1.0;
        const Sym2 p = phi_map(s * a1, s * a2);
        CHECK(std::abs(p.det()) <= 1e-14 * std::max(1.0, p.dot(p)));
        CHECK(p.c3 >= 0.0);
    }
}

TEST_CASE("congruence_operator matches the matrix product") {
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> u(-1, 1);
    Eigen::Matrix3d a, x;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) a(i, j) = u(rng);
    x = Eigen::Matrix3d::Random();
    x = 0.5 * (x + x.transpose()).eval();
    const Vec6 lhs = Sym3::from_matrix(a.transpose() * x * a).mandel;
    const Vec6 rhs = congruence_operator(a) * Sym3::from_matrix(x).mandel;
    CHECK((lhs - rhs).norm() < 1e-13);
}

TEST_CASE("wrap_half_turn lands in the half-open interval") {
    CHECK(wrap_half_turn(kPi / 2) == doctest::Approx(kPi / 2));
    CHECK(wrap_half_turn(-kPi / 2) == doctest::Approx(kPi / 2));
    CHECK(wrap_half_turn(kPi) == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(wrap_half_turn(3.0) == doctest::Approx(3.0 - kPi));
}

} // TEST_SUITE
