#include <plates/errors.hpp>
#include <plates/rve.hpp>

#include <doctest.h>

#include <random>

using namespace plates;

namespace {

double mu_at(const RveSpec &r, double x3, Vec2 y) { return sample(r.material, r.lattice, x3, y).mu; }
Mat6 c_at(const RveSpec &r, double x3, Vec2 y) { return sample(r.material, r.lattice, x3, y).c; }
double rho_at(const RveSpec &r, double x3, Vec2 y) { return sample(r.prestrain, r.lattice, x3, y).mandel[0]; }

RveSpec skew_rve() {
    // Smooth y-dependent fields on a sheared lattice.
    RveSpec r;
    r.lattice.lambda << 1.0, 0.4, 0.0, 1.3;
    r.material = MaterialField::lame([](double, const Vec2 &y) { return 0.3 + 0.1 * std::sin(y[0] + 2 * y[1]); },
                                     [](double x3, const Vec2 &y) { return 1.0 + 0.5 * std::cos(3 * y[0]) + x3; });
    r.prestrain.kind = FieldKind::Custom;
    r.prestrain.eval = [](double x3, const Vec2 &y) {
        Sym3 b;
        b.mandel << x3 + y[0], y[1], 0.2, 0.1 * y[0], 0.0, y[0] * y[1];
        return b;
    };
    return r;
}

} // namespace

TEST_SUITE("rve") {

TEST_CASE("laminate limits and spot values") {
    LaminateSpec s;
    s.theta = 0.0;
    RveSpec r = make_laminate(s);
    CHECK(mu_at(r, 0.2, {0.1, 0.0}) == 1.0);
    CHECK(rho_at(r, 0.2, {0.1, 0.0}) == 1.0);
    CHECK(rho_at(r, -0.2, {0.1, 0.0}) == 0.0);

    s.theta = 1.0;
    s.theta_rho = 3.0;
    r = make_laminate(s);
    CHECK(mu_at(r, 0.2, {0.3, 0.0}) == 2.0);
    CHECK(rho_at(r, -0.2, {0.3, 0.0}) == 3.0);
    CHECK(rho_at(r, 0.2, {0.3, 0.0}) == 0.0);

    r = make_laminate(LaminateSpec{});
    CHECK(mu_at(r, 0.1, {0.0, 0.0}) == 2.0);
    CHECK(mu_at(r, 0.1, {0.4, 0.0}) == 1.0);
    CHECK(r.lattice.is_identity());
    CHECK(sample(r.material, r.lattice, 0.1, {0.4, 0.0}).lambda == 0.0);
}

TEST_CASE("sampling wraps periodically") {
    const RveSpec r = make_laminate(LaminateSpec{});
    CHECK(mu_at(r, 0.1, {0.6, 0.0}) == mu_at(r, 0.1, {-0.4, 0.0}));
    CHECK(rho_at(r, 0.0, {0.4, 0.0}) == 0.0);

    const RveSpec skew = skew_rve();
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-2, 2), x(-0.5, 0.5);
    std::uniform_int_distribution<int> z(-3, 3);
    for (int n = 0; n < 200; ++n) {
        const double x3 = x(rng);
        const Vec2 y(u(rng), u(rng));
        const Vec2 shift = skew.lattice.lambda * Vec2(z(rng), z(rng));
        CHECK(std::abs(mu_at(skew, x3, y) - mu_at(skew, x3, y + shift)) <= 1e-14);
        const Vec6 b0 = sample(skew.prestrain, skew.lattice, x3, y).mandel;
        const Vec6 b1 = sample(skew.prestrain, skew.lattice, x3, y + shift).mandel;
        CHECK((b0 - b1).norm() <= 1e-14);
    }
}

TEST_CASE("laminate symmetry in y1 and x3") {
    const RveSpec r = make_laminate(LaminateSpec{0.3, 4.0, 1.0, 2.0, 1.0});
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(-0.5, 0.5);
    for (int n = 0; n < 100; ++n) {
        const double x3 = u(rng), y1 = u(rng);
        CHECK(mu_at(r, x3, {y1, 0}) == mu_at(r, x3, {-y1, 0}));
        CHECK(mu_at(r, x3, {y1, 0}) == mu_at(r, -x3, {y1, 0}));
    }
}

TEST_CASE("transform_rve examples") {
    const RveSpec r = skew_rve();
    const RveSpec same = transform_rve(r, Eigen::Matrix2d::Identity());
    CHECK(mu_at(same, 0.1, {0.2, 0.3}) == mu_at(r, 0.1, {0.2, 0.3}));

    const Eigen::Matrix2d rot = PlanarRotation{0.7}.matrix();
    const RveSpec t = transform_rve(r, rot);
    const Vec2 y(0.25, -0.1);
    const double nb = sample(t.prestrain, t.lattice, 0.2, y).norm();
    const double na = sample(r.prestrain, r.lattice, 0.2, rot.inverse() * y).norm();
    CHECK(nb == doctest::Approx(na).epsilon(1e-13));

    RveSpec iso;
    iso.material = MaterialField::constant(Stiffness::lame(0, 1));
    iso.prestrain = PrestrainField::constant(Sym3::identity());
    const RveSpec ti = transform_rve(iso, rot);
    CHECK((sample(ti.prestrain, ti.lattice, 0.0, y).mandel - Sym3::identity().mandel).norm() < 1e-14);

    CHECK_THROWS_AS(transform_rve(r, Eigen::Matrix2d::Zero()), Error);
}

TEST_CASE("property: transform round trip reproduces samples") {
    const RveSpec r = skew_rve();
    const Eigen::Matrix2d t = (Eigen::Matrix2d() << 1.2, 0.3, -0.4, 0.9).finished();
    const RveSpec back = transform_rve(transform_rve(r, t), t.inverse());
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-1, 1), x(-0.5, 0.5);
    for (int n = 0; n < 100; ++n) {
        const double x3 = x(rng);
        const Vec2 y(u(rng), u(rng));
        const Mat6 c0 = sample(r.material, r.lattice, x3, y).c, c1 = sample(back.material, back.lattice, x3, y).c;
        CHECK((c0 - c1).norm() <= 1e-12 * c0.norm());
        const Vec6 b0 = sample(r.prestrain, r.lattice, x3, y).mandel;
        const Vec6 b1 = sample(back.prestrain, back.lattice, x3, y).mandel;
        CHECK((b0 - b1).norm() <= 1e-12 * std::max(1.0, b0.norm()));
    }
}

TEST_CASE("normalize_to_unit_cell examples") {
    RveSpec r = skew_rve();
    r.lattice.lambda = Eigen::Matrix2d::Identity();
    const RveSpec n0 = normalize_to_unit_cell(r);
    CHECK(mu_at(n0, 0.1, {0.3, 0.2}) == doctest::Approx(mu_at(r, 0.1, {0.3, 0.2})));

    r.lattice.lambda = 2.0 * Eigen::Matrix2d::Identity();
    const RveSpec n2 = normalize_to_unit_cell(r);
    CHECK(n2.lattice.is_identity());
    const RveSpec back = transform_rve(n2, r.lattice.lambda);
    for (Vec2 y : {Vec2(0.3, 0.2), Vec2(-0.9, 0.7)})
        CHECK((c_at(back, 0.1, y) - c_at(r, 0.1, y)).norm() <= 1e-12 * c_at(r, 0.1, y).norm());

    const Eigen::Matrix2d rot = PlanarRotation{0.5}.matrix();
    r.lattice.lambda = rot;
    const RveSpec nr = normalize_to_unit_cell(r);
    const RveSpec tr = transform_rve(r, rot.transpose());
    const Vec2 y(0.1, 0.35);
    CHECK((c_at(nr, 0.2, y) - c_at(tr, 0.2, y)).norm() <= 1e-12 * c_at(tr, 0.2, y).norm());
}

TEST_CASE("lattice validation") {
    Lattice l;
    l.lambda << 1.0, 0.0, 0.0, 0.0;
    CHECK_THROWS_AS(l.validate(), Error);
    l.lambda << 200.0, 0.0, 0.0, 1.0;
    CHECK_THROWS_AS(l.validate(), Error);
    l.lambda << 1.0, 1.0, 0.0, 1.0;
    CHECK_NOTHROW(l.validate());
    CHECK(l.is_unimodular());
}

TEST_CASE("stiffness coercivity constants") {
    const auto [lo, hi] = Stiffness::lame(0.0, 1.5).bounds();
    CHECK(lo == doctest::Approx(3.0));
    CHECK(hi == doctest::Approx(3.0));
    const auto [lo2, hi2] = Stiffness::lame(1.0, 1.0).bounds();
    CHECK(lo2 == doctest::Approx(2.0));
    CHECK(hi2 == doctest::Approx(5.0));
}

TEST_CASE("laminate alignment and snapping") {
    LaminateSpec s;
    s.theta = 0.5;
    CHECK(laminate_aligned(s, 32));
    s.theta = 0.3;
    CHECK_FALSE(laminate_aligned(s, 32));
    const LaminateSpec snapped = snap_laminate(s, 32);
    CHECK(laminate_aligned(snapped, 32));
    CHECK(std::abs(snapped.theta - 0.3) <= 1.0 / 32);
}

TEST_CASE("layered and inclusion builders") {
    const Stiffness soft = Stiffness::lame(0, 1), hard = Stiffness::lame(0, 3);
    Sym3 b;
    b.mandel << 1, 1, 1, 0, 0, 0;
    const RveSpec l = make_layered({{0.0, soft, b}, {0.5, hard, Sym3{}}});
    CHECK(mu_at(l, -0.2, {0.1, 0.1}) == 1.0);
    CHECK(mu_at(l, 0.2, {0.1, 0.1}) == 3.0);
    CHECK(rho_at(l, -0.2, {0.0, 0.0}) == 1.0);
    CHECK_THROWS_AS(make_layered({{0.3, soft, b}}), Error);

    InclusionSpec in;
    in.matrix = soft;
    in.inclusion = hard;
    in.inclusion_top = b;
    const RveSpec r = make_inclusion(in);
    CHECK(mu_at(r, 0.1, {0.0, 0.0}) == 3.0);
    CHECK(mu_at(r, 0.1, {0.4, 0.0}) == 1.0);
    CHECK(rho_at(r, 0.1, {0.1, 0.1}) == 1.0);
    CHECK(rho_at(r, -0.1, {0.1, 0.1}) == 0.0);
}

} // TEST_SUITE
