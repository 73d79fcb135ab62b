#include <plates/corrector.hpp>
#include <plates/errors.hpp>

#include <doctest.h>

#include <cmath>

using namespace plates;

namespace {

SolverConfig config(int n) {
    SolverConfig c;
    c.grid = CellGrid::cube(n);
    return c;
}

RveSpec homogeneous(double mu) {
    RveSpec r;
    r.material = MaterialField::constant(Stiffness::lame(0, mu));
    return r;
}

double max_abs(const std::vector<double> &v) {
    double m = 0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

double rel_diff(const std::vector<double> &a, const std::vector<double> &b) {
    double num = 0, den = 0;
    for (size_t i = 0; i < a.size(); ++i) {
        num += (a[i] - b[i]) * (a[i] - b[i]);
        den += b[i] * b[i];
    }
    return std::sqrt(num / std::max(den, 1e-300));
}

} // namespace

TEST_SUITE("corrector") {

TEST_CASE("homogeneous material has a vanishing corrector") {
    const Sym2 g{0.4, -1.0, 0.8};
    const CorrectorSolution s = solve_corrector(homogeneous(1.0), g, config(8));
    CHECK(s.m.norm() < 1e-8);
    CHECK(max_abs(s.phi) < 1e-8);
    CHECK(s.energy == doctest::Approx(g.dot(g) / 6.0).epsilon(1e-10));
}

TEST_CASE("laminate: G2 needs no corrector, G1 reaches the harmonic mean") {
    const RveSpec lam = make_laminate(LaminateSpec{});
    const CorrectorSolution s2 = solve_corrector(lam, Sym2::basis(1), config(8));
    CHECK(s2.m.norm() < 1e-8);
    CHECK(max_abs(s2.phi) < 1e-8);
    CHECK(s2.energy == doctest::Approx(0.25).epsilon(1e-10));

    const CorrectorSolution s1 = solve_corrector(lam, Sym2::basis(0), config(8));
    CHECK(s1.energy == doctest::Approx(2.0 / 9.0).epsilon(1e-3));
    CHECK(s1.m.norm() < 1e-6);
}

TEST_CASE("Galerkin monotonicity under nested refinement") {
    const RveSpec lam = make_laminate(LaminateSpec{0.5, 3.0, 0.0, 1.0, 1.0}, 0.8);
    for (int i = 0; i < 3; ++i) {
        const double e4 = solve_corrector(lam, Sym2::basis(i), config(4)).energy;
        const double e8 = solve_corrector(lam, Sym2::basis(i), config(8)).energy;
        CHECK(e8 <= e4 + 1e-12);
    }
    const auto mu = [](double x3, double y1) { return std::abs(y1) < 0.25 ? 2.0 + x3 : 1.0; };
    SolverConfig c;
    c.mu_gamma_n = 16;
    const double m16 = solve_mu_gamma(mu, 1.0, c).value;
    c.mu_gamma_n = 32;
    CHECK(solve_mu_gamma(mu, 1.0, c).value <= m16 + 1e-12);
}

TEST_CASE("corrector is linear in the bending mode") {
    InclusionSpec in;
    in.matrix = Stiffness::lame(0.3, 1.0);
    in.inclusion = Stiffness::lame(0.1, 2.5);
    const RveSpec r = make_inclusion(in, 1.3);
    const SolverConfig c = config(8);
    const Sym2 g{1.0, 0.2, -0.3}, h{-0.4, 0.9, 0.5};
    const double a = 1.7, b = -0.6;
    const CorrectorSolution sg = solve_corrector(r, g, c), sh = solve_corrector(r, h, c);
    const CorrectorSolution sc = solve_corrector(r, a * g + b * h, c);
    std::vector<double> combo(sg.phi.size());
    for (size_t i = 0; i < combo.size(); ++i) combo[i] = a * sg.phi[i] + b * sh.phi[i];
    CHECK(rel_diff(sc.phi, combo) < 1e-7);
    CHECK((sc.m - (a * sg.m + b * sh.m)).norm() < 1e-8);
}

TEST_CASE("corrector does not depend on the starting vector") {
    InclusionSpec in;
    in.matrix = Stiffness::lame(0.0, 1.0);
    in.inclusion = Stiffness::lame(0.0, 4.0);
    const RveSpec r = make_inclusion(in);
    SolverConfig c = config(8);
    c.cg_rel_tol = 1e-12;
    const Sym2 g{0.5, 1.0, 0.25};
    const CorrectorSolution s0 = solve_corrector(r, g, c);
    c.initial_seed = 99;
    const CorrectorSolution s1 = solve_corrector(r, g, c);
    CHECK(rel_diff(s1.phi, s0.phi) < 1e-8);
    CHECK((s1.m - s0.m).norm() <= 1e-8 * std::max(s0.m.norm(), 1e-3));
    CHECK(std::abs(nodal_mean(c.grid, s1.phi, 0)) < 1e-12);
}

TEST_CASE("a-priori bound on the corrector") {
    // Energy minimality and coercivity give, with M orthogonal to sym grad phi,
    //   |M|^2 + |sym grad phi|^2 <= (sqrt(beta / alpha) + 1)^2 |G|^2 / 12.
    // The full gradient adds a Korn constant, calibrated below.
    const double korn = 4.0;
    for (double gamma : {0.25, 1.0, 4.0}) {
        const RveSpec lam = make_laminate(LaminateSpec{0.5, 5.0, 0.0, 1.0, 1.0}, gamma);
        const auto data = CellData::build(lam, CellGrid::cube(8));
        const double bound = std::pow(std::sqrt(data->beta / data->alpha) + 1.0, 2) / 12.0;
        for (int i = 0; i < 3; ++i) {
            const CorrectorSolution s = solve_corrector(lam, Sym2::basis(i), config(8));
            CHECK(s.apriori_sym <= bound);
            CHECK(s.apriori_full <= korn * bound);
            MESSAGE("gamma " << gamma << " mode " << i << ": sym " << s.apriori_sym << ", full "
                             << s.apriori_full << ", bound " << bound);
        }
    }
}

TEST_CASE("3D corrector for G3 reproduces the scalar mu_gamma problem") {
    for (double gamma : {0.5, 2.0}) {
        const RveSpec lam = make_laminate(LaminateSpec{}, gamma);
        const double q3 = solve_corrector(lam, Sym2::basis(2), config(16)).energy;
        SolverConfig c;
        c.mu_gamma_n = 16;
        const double mg = solve_mu_gamma(lam.material, gamma, c).value;
        CHECK(q3 == doctest::Approx(mg / 6.0).epsilon(2e-3));
    }
}

TEST_CASE("mu_gamma examples") {
    SolverConfig c;
    c.mu_gamma_n = 32;
    CHECK(solve_mu_gamma([](double, double) { return 2.5; }, 0.7, c).value ==
          doctest::Approx(2.5).epsilon(1e-10));
    const RveSpec lam = make_laminate(LaminateSpec{});
    for (double gamma : {0.1, 1.0, 10.0}) {
        const double v = solve_mu_gamma(lam.material, gamma, c).value;
        CHECK(v >= 4.0 / 3.0 - 1e-9);
        CHECK(v <= 1.5 + 1e-9);
    }
    CHECK_THROWS_AS(solve_mu_gamma([](double, double) { return -1.0; }, 1.0, c), Error);
    CHECK_THROWS_AS(solve_mu_gamma([](double, double) { return 1.0; }, 0.0, c), Error);
}

TEST_CASE("projection examples") {
    RveSpec r = homogeneous(1.0);
    const ProjectionSolution zero = solve_projection(r, config(4));
    CHECK(zero.g_b.norm() < 1e-12);
    CHECK(zero.residual_density < 1e-20);

    const Sym2 g0{0.7, -0.2, 0.4};
    r.material = MaterialField::constant(Stiffness::lame(0.5, 1.5));
    r.prestrain.kind = FieldKind::InPlaneUniform;
    r.prestrain.eval = [g0](double x3, const Vec2 &) {
        Sym3 b = iota(x3 * g0);
        return b;
    };
    const ProjectionSolution p = solve_projection(r, config(4));
    CHECK((p.g_b - g0).norm() < 1e-8);
    CHECK(p.m_b.norm() < 1e-8);
    CHECK(p.residual_density < 1e-14);
}

TEST_CASE("non-unit lattice is rejected by the raw solvers") {
    RveSpec r = homogeneous(1.0);
    r.lattice.lambda << 2, 0, 0, 1;
    CHECK_THROWS_AS(solve_corrector(r, Sym2::basis(0), config(4)), Error);
}

} // TEST_SUITE
