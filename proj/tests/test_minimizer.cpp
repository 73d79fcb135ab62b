#include <plates/errors.hpp>
#include <plates/minimizer.hpp>

#include <doctest.h>

#include <random>

using namespace plates;

namespace {

const OrthotropicCoeffs kTable{1.0, 2.0, 0.0, 1.0};

// Row (c): q3 chosen so det H = 0, b = A^-1 q* so that A b is parallel to q*.
ClassifierInput family_row() {
    const double q3 = (std::sqrt(8.0) - 0.5) / 2.0;
    const OrthotropicCoeffs c{1.0, 2.0, 0.5, q3};
    const Eigen::Vector2d q = Eigen::Vector2d(0.5 + 2.0 * q3, 4.0).normalized();
    const Eigen::Matrix2d a = (Eigen::Matrix2d() << 1.0, 0.25, 0.25, 2.0).finished();
    const Eigen::Vector2d b = a.inverse() * q;
    return {c, b[0], b[1]};
}

// Independent scan: at each angle the energy is quadratic in kappa,
// E = k^2 Q(ee) - 2 k Q(ee, B) + Q(B).
double scan_minimum(const OrthotropicCoeffs &c, const Sym2 &b, int n = 20001) {
    const Eigen::Matrix3d q = c.matrix();
    const Eigen::Vector3d bv = b.vector();
    double best = bv.dot(q * bv);
    for (int i = 0; i < n; ++i) {
        const double a = -kPi / 2 + (i + 1) * kPi / n;
        const Eigen::Vector3d e(std::cos(a) * std::cos(a), std::sin(a) * std::sin(a),
                                kSqrt2 * std::sin(a) * std::cos(a));
        const double qq = e.dot(q * e), qb = e.dot(q * bv);
        best = std::min(best, bv.dot(q * bv) - qb * qb / qq);
    }
    return best;
}

bool close(const Sym2 &a, const Sym2 &b, double tol = 1e-12) { return (a - b).norm() <= tol; }

} // namespace

TEST_SUITE("minimizer") {

TEST_CASE("energy examples") {
    const Sym2 b{2.0, 1.5, 0.0};
    CHECK(energy(kTable, b, b) == 0.0);
    CHECK(energy(kTable, Sym2{}, Sym2::basis(0)) == 1.0);
    const Sym2 g = Sym2::from_matrix((Eigen::Matrix2d() << 1, 1, 1, 1).finished());
    CHECK(energy(kTable, b, g) == doctest::Approx(3.5).epsilon(1e-15));
    CHECK(energy(kTable.matrix(), b, g) == doctest::Approx(3.5).epsilon(1e-15));
}

TEST_CASE("axial candidate examples") {
    auto c = axial_candidates({{1.0, 3.0, 0.0, 1.0}, 1.0, 0.5});
    CHECK(close(c[0].g, Sym2::basis(0)));
    CHECK(close(c[1].g, 0.5 * Sym2::basis(1)));

    c = axial_candidates({kTable, 0.0, 0.5});
    CHECK(close(c[0].g, Sym2{}));
    CHECK(close(c[1].g, 0.5 * Sym2::basis(1)));
    CHECK(c[0].energy == doctest::Approx(0.5));
    CHECK(c[1].energy == doctest::Approx(0.0));

    // Coupled case: minimizer of E on each axis line.
    const ClassifierInput in{{1.5, 0.7, 0.4, 1.0}, 0.9, -0.6};
    c = axial_candidates(in);
    CHECK(c[0].g.c1 == doctest::Approx((2 * 1.5 * 0.9 + 0.4 * -0.6) / (2 * 1.5)));
    CHECK(c[1].g.c2 == doctest::Approx((0.4 * 0.9 + 2 * 0.7 * -0.6) / (2 * 0.7)));
    for (int axis = 0; axis < 2; ++axis)
        for (double d : {-1e-3, 1e-3}) {
            Sym2 g = c[axis].g;
            g[axis] += d;
            CHECK(energy(in.coeffs, in.b_full(), g) > c[axis].energy);
        }
}

TEST_CASE("equal axial energies give two axial minimizers") {
    // B2^2 / q1 = B1^2 / q2 and det H < 0.
    const ClassifierInput in{{1.0, 4.0, 0.0, 3.0}, 2.0, 1.0};
    const auto c = axial_candidates(in);
    CHECK(c[0].energy == doctest::Approx(c[1].energy));
    const MinimizerSet s = classify(in);
    CHECK(s.branch == Branch::TwoAxial);
    REQUIRE(s.members.size() == 2);
    CHECK(close(s.members[0], 2.0 * Sym2::basis(0)));
    CHECK(close(s.members[1], 1.0 * Sym2::basis(1)));
}

TEST_CASE("table row (a): axial and degenerate") {
    const ClassifierInput in{kTable, 0.0, 0.5};
    const MinimizerSet s = classify(in);
    CHECK(s.branch == Branch::UniqueAxial);
    CHECK(s.degenerate);
    REQUIRE(s.members.size() == 1);
    CHECK(close(s.members[0], 0.5 * Sym2::basis(1)));
    CHECK(s.energy == doctest::Approx(0.0));
}

TEST_CASE("table row (b): non-axial pair with g* = (1, 1)") {
    const ClassifierInput in{kTable, 2.0, 1.5};
    const MinimizerSet s = classify(in);
    CHECK(s.branch == Branch::NonAxialPair);
    CHECK_FALSE(s.degenerate);
    CHECK(s.im.det_h == doctest::Approx(4.0));
    CHECK(s.im.gstar[0] == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(s.im.gstar[1] == doctest::Approx(1.0).epsilon(1e-15));
    REQUIRE(s.members.size() == 1);
    CHECK(close(s.members[0], Sym2::from_matrix((Eigen::Matrix2d() << 1, 1, 1, 1).finished())));
    CHECK(s.energy == doctest::Approx(3.5));
    CHECK(s.energy <= scan_minimum(in.coeffs, in.b_full()) + 1e-12);
    CHECK(s.energy >= scan_minimum(in.coeffs, in.b_full()) - 1e-6);

    const auto report = minimizer_report(s, in);
    REQUIRE(report.size() == 2);
    CHECK(report[0].form.kappa == doctest::Approx(2.0));
    CHECK(report[0].form.angle == doctest::Approx(kPi / 4));
    CHECK(report[1].form.kappa == doctest::Approx(2.0));
    CHECK(report[1].form.angle == doctest::Approx(-kPi / 4));
}

TEST_CASE("table row (c): one-parameter family") {
    const ClassifierInput in = family_row();
    CHECK(in.b1 == doctest::Approx(0.491).epsilon(1e-3));
    CHECK(in.b2 == doctest::Approx(0.347).epsilon(1e-3));
    const MinimizerSet s = classify(in);
    CHECK(s.branch == Branch::OneParamFamily);
    CHECK(std::abs(s.im.det_h_rel) < 1e-12);

    const auto [t0, t1] = family_segment(s.qstar, s.sstar);
    for (double t : {t0, t1}) {
        const Eigen::Vector2d a = family_point(s.qstar, s.sstar, t);
        CHECK(std::abs(a[0] * a[1]) < 1e-12);
        CHECK(a.dot(s.qstar) == doctest::Approx(s.sstar));
    }
    const auto report = minimizer_report(s, in, 33);
    double lo = kPi, hi = -kPi;
    bool has_zero = false;
    for (const ReportEntry &e : report) {
        CHECK(e.energy == doctest::Approx(s.energy).epsilon(1e-9));
        lo = std::min(lo, e.form.angle);
        hi = std::max(hi, e.form.angle);
        has_zero = has_zero || std::abs(e.form.angle) < 1e-12;
    }
    CHECK(hi == doctest::Approx(kPi / 2));
    CHECK(lo < -kPi / 2 + 0.2);
    CHECK(has_zero);
    CHECK(s.energy <= scan_minimum(in.coeffs, in.b_full()) + 1e-12);
}

TEST_CASE("isotropic data: every minimizer has curvature sqrt(det B)") {
    const double rho = 0.8;
    const ClassifierInput in{{1.0, 1.0, 0.0, 1.0}, rho, rho};
    const MinimizerSet s = classify(in);
    CHECK(s.branch == Branch::OneParamFamily);
    for (const ReportEntry &e : minimizer_report(s, in, 17))
        CHECK(e.form.kappa == doctest::Approx(std::sqrt(in.b1 * in.b2)).epsilon(1e-12));
    const OracleResult o = brute_force_minimize(in.coeffs, in.b_full());
    CHECK(o.best.kappa == doctest::Approx(rho).epsilon(1e-9));
}

TEST_CASE("unique axial report") {
    const ClassifierInput in{{1.0, 1.0, 0.0, 0.2}, 0.1, 0.5};
    const MinimizerSet s = classify(in);
    CHECK(s.branch == Branch::UniqueAxial);
    const auto report = minimizer_report(s, in);
    REQUIRE(report.size() == 1);
    CHECK(report[0].form.kappa == doctest::Approx(0.5));
    CHECK(report[0].form.angle == doctest::Approx(kPi / 2));
}

TEST_CASE("classifier refuses invalid input") {
    CHECK_THROWS_AS(classify({{1.0, 1.0, 3.0, 1.0}, 1.0, 1.0}), Error);
    Eigen::Matrix3d q = Eigen::Matrix3d::Identity();
    CHECK_THROWS_AS(classifier_input(q, Sym2{1.0, 1.0, 0.3}), Error);
    q(0, 2) = q(2, 0) = 0.2;
    CHECK_THROWS_AS(classifier_input(q, Sym2{1.0, 1.0, 0.0}), Error);
    const ClassifierInput ok = classifier_input(Eigen::Matrix3d::Identity(), Sym2{1.0, 2.0, 0.0});
    CHECK(ok.b2 == 2.0);
}

TEST_CASE("oracle budget") {
    OracleGrid g;
    g.kappa_max = 1e-3;
    g.max_expansions = 0;
    CHECK_THROWS_AS(brute_force_minimize(kTable, Sym2{2.0, 1.5, 0.0}, g), Error);
}

TEST_CASE("oracle agrees with row (b) and is deterministic") {
    const ClassifierInput in{kTable, 2.0, 1.5};
    const MinimizerSet s = classify(in);
    const OracleComparison c = compare_with_oracle(in, s);
    CHECK(c.energy_ok);
    CHECK(c.location_ok);
    const OracleResult again = brute_force_minimize(in.coeffs, in.b_full());
    CHECK(again.energy == c.oracle.energy);
    CHECK(again.best.angle == c.oracle.best.angle);
}

TEST_CASE("property: classification over random inputs") {
    const auto inputs = random_classifier_inputs(2024, 300);
    CHECK(inputs.size() == 300);
    for (const ClassifierInput &in : inputs) {
        CHECK(in.coeffs.positive_definite());
        CHECK(std::abs(in.b1 * in.b2) >= 0.01);
        const MinimizerSet s = classify(in);
        const ClassifierIntermediates &im = s.im;

        // Sufficient and necessary conditions on det H.
        if (im.det_h_rel < -1e-9) CHECK((s.branch == Branch::UniqueAxial || s.branch == Branch::TwoAxial));
        if (s.branch == Branch::NonAxialPair) {
            CHECK(im.det_h > 0.0);
            CHECK((im.h * im.gstar - 2.0 * im.ab).norm() <= 1e-12 * std::max(1.0, im.ab.norm()));
            REQUIRE(s.members.size() == 1);
            CHECK(s.members[0].c3 > 0.0);
        }
        for (const Sym2 &m : s.members) {
            CHECK(std::abs(m.det()) <= 1e-12 * std::max(1.0, m.dot(m)));
            CHECK(energy(in.coeffs, in.b_full(), m) == doctest::Approx(s.energy).epsilon(1e-12));
        }
        if (s.branch == Branch::UniqueAxial || s.branch == Branch::TwoAxial)
            for (const Sym2 &m : s.members) CHECK(m.c3 == 0.0);

        // Exact minimum is never above the independent scan and close to it.
        const double scan = scan_minimum(in.coeffs, in.b_full(), 4001);
        CHECK(s.energy <= scan + 1e-10 * std::max(1.0, scan));
        CHECK(s.energy >= scan - 1e-4 * std::max(1.0, std::abs(scan)));
    }
}

TEST_CASE("property: reflection symmetry of the energy") {
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> u(-2, 2);
    for (const ClassifierInput &in : random_classifier_inputs(5, 50)) {
        const Sym2 g{u(rng), u(rng), u(rng)};
        CHECK(energy(in.coeffs, in.b_full(), g) ==
              doctest::Approx(energy(in.coeffs, in.b_full(), reflect_T(g))).epsilon(1e-14));
    }
}

TEST_CASE("property: oracle energy never beats the classifier") {
    OracleGrid g;
    g.n_alpha = 501;
    for (const ClassifierInput &in : random_classifier_inputs(77, 100)) {
        const MinimizerSet s = classify(in);
        const OracleComparison c = compare_with_oracle(in, s, g);
        CHECK(c.oracle_energy >= c.classifier_energy - 1e-12 * std::max(1.0, std::abs(c.classifier_energy)));
        CHECK(c.energy_ok);
        CHECK(c.location_ok);
    }
}

TEST_CASE("branch names") {
    CHECK(std::string(to_string(Branch::NonAxialPair)) == "non_axial_pair");
    CHECK(std::string(to_string(Branch::OneParamFamily)) == "one_param_family");
    CHECK(std::string(to_string(Branch::UniqueAxial)) == "unique_axial");
    CHECK(std::string(to_string(Branch::TwoAxial)) == "two_axial");
}

} // TEST_SUITE
