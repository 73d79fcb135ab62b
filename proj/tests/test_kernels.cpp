#include <plates/corrector.hpp>

#include <doctest.h>
#include <omp.h>

#include <random>

using namespace plates;

namespace {

std::vector<double> random_vector(size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1, 1);
    std::vector<double> v(n);
    for (double &x : v) x = u(rng);
    return v;
}

RveSpec varied_rve() {
    InclusionSpec in;
    in.size = 0.5;
    in.matrix = Stiffness::lame(0.5, 1.0);
    in.inclusion = Stiffness::lame(0.2, 3.0);
    in.matrix_top.mandel << 1, 0.5, 0, 0, 0, 0.2;
    in.inclusion_bottom.mandel << -0.3, 1, 0.4, 0, 0.1, 0;
    return make_inclusion(in, 0.7);
}

double max_abs_diff(const std::vector<double> &a, const std::vector<double> &b) {
    double m = 0;
    for (size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

} // namespace

TEST_SUITE("kernels") {

TEST_CASE("threaded apply matches the serial reference") {
    for (const CellGrid grid : {CellGrid{4, 4, 4}, CellGrid{6, 4, 5}}) {
        const CellOperator op(CellData::build(varied_rve(), grid), projection_modes());
        const auto x = random_vector(op.num_dofs(), 1);
        const auto src = random_vector(grid.elements() * kQp * 6, 2);
        std::vector<double> y(x.size()), yr(x.size());
        op.apply(x.data(), y.data());
        op.apply_reference(x.data(), yr.data());
        CHECK(max_abs_diff(y, yr) < 1e-12);
        op.apply(x.data(), y.data(), src.data());
        op.apply_reference(x.data(), yr.data(), src.data());
        CHECK(max_abs_diff(y, yr) < 1e-12);
    }
}

TEST_CASE("apply is bitwise independent of the thread count") {
    const CellOperator op(CellData::build(varied_rve(), CellGrid::cube(8)), corrector_modes());
    const auto x = random_vector(op.num_dofs(), 3);
    std::vector<double> y1(x.size()), y4(x.size());
    const int saved = omp_get_max_threads();
    omp_set_num_threads(1);
    op.apply(x.data(), y1.data());
    const double d1 = vec::dot(x, y1);
    omp_set_num_threads(4);
    op.apply(x.data(), y4.data());
    const double d4 = vec::dot(x, y4);
    omp_set_num_threads(saved);
    CHECK(y1 == y4);
    CHECK(d1 == d4);
}

TEST_CASE("operator is symmetric and consistent with the energy") {
    const CellOperator op(CellData::build(varied_rve(), CellGrid::cube(4)), corrector_modes());
    const auto x = random_vector(op.num_dofs(), 4), z = random_vector(op.num_dofs(), 5);
    std::vector<double> ax(x.size()), az(x.size());
    op.apply(x.data(), ax.data());
    op.apply(z.data(), az.data());
    CHECK(vec::dot(z, ax) == doctest::Approx(vec::dot(x, az)).epsilon(1e-12));
    CHECK(op.energy(x.data()) == doctest::Approx(vec::dot(x, ax)).epsilon(1e-12));

    const auto diag = op.diagonal();
    for (long i : {0L, 7L, op.num_dofs() - 1}) {
        std::vector<double> e(x.size(), 0.0), ae(x.size());
        e[i] = 1.0;
        op.apply(e.data(), ae.data());
        CHECK(diag[i] == doctest::Approx(ae[i]).epsilon(1e-12));
    }
}

TEST_CASE("rigid translations carry no strain") {
    const CellOperator op(CellData::build(varied_rve(), CellGrid::cube(4)), corrector_modes());
    std::vector<double> x(op.num_dofs(), 0.0), y(x.size());
    for (long k = 0; k < op.grid().nodes(); ++k) {
        x[3 * k] = 1.0;
        x[3 * k + 2] = -2.0;
    }
    op.apply(x.data(), y.data());
    double m = 0;
    for (double v : y) m = std::max(m, std::abs(v));
    CHECK(m < 1e-12);
    const auto [full, sym] = op.gradient_norms(x.data());
    CHECK(full < 1e-24);
    CHECK(sym < 1e-24);
}

TEST_CASE("bending source integrates to the plate energy") {
    // Homogeneous mu = 1, lambda = 0: int |x3 g|^2 * 2 = |g|^2 / 6, exact with 2-point Gauss.
    RveSpec r;
    r.material = MaterialField::constant(Stiffness::lame(0, 1));
    const CellOperator op(CellData::build(r, CellGrid::cube(3)), corrector_modes());
    const Sym2 g{0.3, -1.2, 0.7};
    const auto src = op.bending_source(g);
    std::vector<double> zero(op.num_dofs(), 0.0);
    CHECK(op.energy(zero.data(), src.data()) == doctest::Approx(g.dot(g) / 6.0).epsilon(1e-13));
}

TEST_CASE("vector kernels") {
    const auto a = random_vector(100003, 6), b = random_vector(100003, 7);
    double ref = 0;
    for (size_t i = 0; i < a.size(); ++i) ref += a[i] * b[i];
    CHECK(vec::dot(a, b) == doctest::Approx(ref).epsilon(1e-12));

    std::vector<double> y = b;
    vec::axpy(2.0, a, y);
    CHECK(y[17] == doctest::Approx(b[17] + 2.0 * a[17]));
    y = b;
    vec::xpby(a, -0.5, y);
    CHECK(y[99] == doctest::Approx(a[99] - 0.5 * b[99]));
}

TEST_CASE("conjugate gradient solves a small SPD system") {
    const int n = 50;
    auto apply = [&](const std::vector<double> &x, std::vector<double> &y) {
        for (int i = 0; i < n; ++i)
            y[i] = 4 * x[i] - (i > 0 ? x[i - 1] : 0) - (i + 1 < n ? x[i + 1] : 0);
    };
    const auto b = random_vector(n, 8);
    std::vector<double> x(n, 0.0), inv(n, 0.25);
    const CgResult r = conjugate_gradient(apply, b, x, inv, [](std::vector<double> &) {}, 1e-12, 500);
    CHECK(r.converged);
    std::vector<double> ax(n);
    apply(x, ax);
    CHECK(max_abs_diff(ax, b) < 1e-10);
}

TEST_CASE("grid validation") {
    CHECK_THROWS(CellGrid({1, 4, 4}).validate());
    CHECK_NOTHROW(CellGrid::cube(2).validate());
}

} // TEST_SUITE
