#include <plates/corrector.hpp>
#include <plates/errors.hpp>
#include <plates/log.hpp>

#include <chrono>
#include <cmath>
#include <random>
#include <sstream>

namespace plates {

void SolverConfig::validate() const {
    grid.validate();
    if (!(cg_rel_tol > 0.0)) throw Error(ErrorKind::Config, "cg_rel_tol must be positive");
    if (cg_max_iter < 1) throw Error(ErrorKind::Config, "cg_max_iter must be positive");
    if (quadrature_order != 2)
        throw Error(ErrorKind::Config, "only the 2-point Gauss rule per axis is implemented");
    if (mu_gamma_n < 2) throw Error(ErrorKind::Config, "mu_gamma_n must be at least 2");
}

std::vector<Mode> corrector_modes() { return {{0, false}, {1, false}, {5, false}}; }

std::vector<Mode> projection_modes() {
    return {{0, false}, {1, false}, {5, false}, {0, true}, {1, true}, {5, true}};
}

Sym2 mode_coefficients(const std::vector<double> &x, long offset) {
    return {x[offset], x[offset + 1], x[offset + 2]};
}

double nodal_mean(const CellGrid &grid, const std::vector<double> &u, int component) {
    const long layer = long(grid.n1) * grid.n2;
    double acc = 0;
    for (int k = 0; k <= grid.n3; ++k) {
        const double w = (k == 0 || k == grid.n3) ? 0.5 : 1.0;
        double s = 0;
        for (long n = k * layer; n < (k + 1) * layer; ++n) s += u[3 * n + component];
        acc += w * s;
    }
    return acc / (double(layer) * grid.n3);
}

namespace {

void remove_nodal_constants(std::vector<double> &v, long nodes) {
    for (int c = 0; c < 3; ++c) {
        double s = 0;
        for (long n = 0; n < nodes; ++n) s += v[3 * n + c];
        s /= double(nodes);
        for (long n = 0; n < nodes; ++n) v[3 * n + c] -= s;
    }
}

struct LinearSolve {
    std::vector<double> x;
    CgResult cg;
};

LinearSolve solve_cell_system(const CellOperator &op, const std::vector<double> &source,
                              const SolverConfig &config, const char *what) {
    const long n = op.num_dofs();
    const long nodes = op.grid().nodes();
    auto apply = [&](const std::vector<double> &in, std::vector<double> &out) {
        if (config.reference_kernel) op.apply_reference(in.data(), out.data());
        else op.apply(in.data(), out.data());
    };

    std::vector<double> zero(n, 0.0), b(n);
    if (config.reference_kernel) op.apply_reference(zero.data(), b.data(), source.data());
    else op.apply(zero.data(), b.data(), source.data());
    for (double &v : b) v = -v;

    LinearSolve out;
    out.x.assign(n, 0.0);
    if (config.initial_seed != 0) {
        std::mt19937_64 rng(config.initial_seed);
        std::uniform_real_distribution<double> dist(-1.0, 1.0);
        for (double &v : out.x) v = dist(rng);
    }

    std::vector<double> inv_diag = op.diagonal();
    for (double &d : inv_diag) d = d > 0.0 ? 1.0 / d : 0.0;
    auto project = [nodes](std::vector<double> &v) { remove_nodal_constants(v, nodes); };

    const auto t0 = std::chrono::steady_clock::now();
    out.cg = conjugate_gradient(apply, b, out.x, inv_diag, project, config.cg_rel_tol, config.cg_max_iter);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const CellGrid &g = op.grid();
    log().info("{} solve {}x{}x{}: {} iterations, residual {:.3e}, {:.2f} s", what, g.n1, g.n2, g.n3,
               out.cg.iterations, out.cg.residual, secs);
    if (!out.cg.converged) {
        std::ostringstream msg;
        msg << what << " solve did not reach relative residual " << config.cg_rel_tol << " in "
            << out.cg.iterations << " iterations (residual " << out.cg.residual << ")";
        throw Error(ErrorKind::NonConvergence, msg.str());
    }

    // Zero integral mean of each displacement component.
    for (int c = 0; c < 3; ++c) {
        const double m = nodal_mean(g, out.x, c);
        for (long k = 0; k < nodes; ++k) out.x[3 * k + c] -= m;
    }
    return out;
}

CellOperator make_operator(const RveSpec &rve, const SolverConfig &config, std::vector<Mode> modes) {
    config.validate();
    rve.validate();
    if (!rve.lattice.is_identity())
        throw Error(ErrorKind::Config, "cell solves need an RVE on the unit lattice (normalize it first)");
    return CellOperator(CellData::build(rve, config.grid), std::move(modes));
}

} // namespace

CorrectorSolution solve_corrector(const RveSpec &rve, const Sym2 &g, const SolverConfig &config) {
    return solve_corrector(make_operator(rve, config, corrector_modes()), g, config);
}

CorrectorSolution solve_corrector(const CellOperator &op, const Sym2 &g, const SolverConfig &config) {
    const std::vector<double> source = op.bending_source(g);
    LinearSolve ls = solve_cell_system(op, source, config, "corrector");

    const long offset = 3 * op.grid().nodes();
    CorrectorSolution sol;
    sol.g = g;
    sol.m = mode_coefficients(ls.x, offset);
    sol.energy = op.energy(ls.x.data(), source.data());
    sol.residual = ls.cg.residual;
    sol.iterations = ls.cg.iterations;
    sol.grid = op.grid();
    const auto [full, sym] = op.gradient_norms(ls.x.data());
    const double m2 = sol.m.dot(sol.m);
    sol.apriori_full = m2 + full;
    sol.apriori_sym = m2 + sym;
    ls.x.resize(offset);
    sol.phi = std::move(ls.x);
    if (const double gn = g.dot(g); gn > 0.0)
        log().debug("corrector a-priori ratio |M|^2 + |grad phi|^2 over |G|^2: {:.4g}", sol.apriori_full / gn);
    return sol;
}

ProjectionSolution solve_projection(const RveSpec &rve, const SolverConfig &config) {
    return solve_projection(make_operator(rve, config, projection_modes()), config);
}

ProjectionSolution solve_projection(const CellOperator &op, const SolverConfig &config) {
    if (op.num_modes() != 6) throw Error(ErrorKind::Config, "projection needs the six-mode operator");
    ProjectionSolution sol;
    sol.grid = op.grid();
    const long offset = 3 * op.grid().nodes();
    const std::vector<double> &b = op.data().prestrain;
    if (b.empty()) {
        sol.phi.assign(offset, 0.0);
        return sol;
    }
    std::vector<double> source(b.size());
    for (size_t i = 0; i < b.size(); ++i) source[i] = -b[i];

    LinearSolve ls = solve_cell_system(op, source, config, "projection");
    sol.m_b = mode_coefficients(ls.x, offset);
    sol.g_b = mode_coefficients(ls.x, offset + 3);
    sol.residual_density = op.energy(ls.x.data(), source.data());
    sol.residual = ls.cg.residual;
    sol.iterations = ls.cg.iterations;
    ls.x.resize(offset);
    sol.phi = std::move(ls.x);
    return sol;
}

// Scalar problem on (y1, x3) in (-1/2,1/2)^2 with bilinear elements, periodic in y1.
MuGammaResult solve_mu_gamma(const std::function<double(double, double)> &mu, double gamma,
                             const SolverConfig &config) {
    if (!(gamma > 0.0) || !std::isfinite(gamma)) throw Error(ErrorKind::Config, "gamma must lie in (0, inf)");
    const int n = config.mu_gamma_n;
    if (n < 2) throw Error(ErrorKind::Config, "mu_gamma_n must be at least 2");
    const double h = 1.0 / n;
    const double t[2] = {0.5 * (1.0 - 1.0 / std::numbers::sqrt3), 0.5 * (1.0 + 1.0 / std::numbers::sqrt3)};
    const double v[2][2] = {{1.0 - t[0], 1.0 - t[1]}, {t[0], t[1]}};
    const double w = h * h / 4.0;
    const double s12 = std::sqrt(12.0);
    const long nodes = long(n) * (n + 1);
    const long ne = long(n) * n;

    // mu at quadrature points, element-major, q = q1 + 2 q3
    std::vector<double> mq(ne * 4);
    for (int k = 0; k < n; ++k)
        for (int i = 0; i < n; ++i)
            for (int q = 0; q < 4; ++q) {
                const double y1 = -0.5 + (i + t[q & 1]) * h, x3 = -0.5 + (k + t[q >> 1]) * h;
                const double m = mu(x3, y1);
                if (!(m > 0.0)) throw Error(ErrorKind::IllConditioned, "mu must be positive");
                mq[(long(k) * n + i) * 4 + q] = m;
            }

    auto node = [n](int i, int k) { return long(k) * n + (i % n); };
    // Local derivatives: d/dy1 and gamma^-1 d/dx3 of shape (a1, a3) at q.
    auto d1 = [&](int a1, int a3, int q) { return (a1 ? 1.0 : -1.0) / h * v[a3][q >> 1]; };
    auto d3 = [&](int a1, int a3, int q) { return v[a1][q & 1] * (a3 ? 1.0 : -1.0) / (gamma * h); };

    // Element loop: out = K u + (forcing ? f : 0) with f from the sqrt(12) x3 term.
    auto assemble = [&](const std::vector<double> &u, std::vector<double> &out, bool forcing) {
        std::fill(out.begin(), out.end(), 0.0);
        for (int k = 0; k < n; ++k)
            for (int i = 0; i < n; ++i) {
                const long e = long(k) * n + i;
                const long nd[4] = {node(i, k), node(i + 1, k), node(i, k + 1), node(i + 1, k + 1)};
                for (int q = 0; q < 4; ++q) {
                    const double x3 = -0.5 + (k + t[q >> 1]) * h;
                    double g1 = forcing ? s12 * x3 : 0.0, g3 = 0.0;
                    for (int a = 0; a < 4; ++a) {
                        g1 += d1(a & 1, a >> 1, q) * u[nd[a]];
                        g3 += d3(a & 1, a >> 1, q) * u[nd[a]];
                    }
                    const double c = w * mq[e * 4 + q];
                    for (int a = 0; a < 4; ++a)
                        out[nd[a]] += c * (g1 * d1(a & 1, a >> 1, q) + g3 * d3(a & 1, a >> 1, q));
                }
            }
    };

    std::vector<double> zero(nodes, 0.0), b(nodes), diag(nodes, 0.0);
    assemble(zero, b, true);
    for (double &x : b) x = -x;
    for (int k = 0; k < n; ++k)
        for (int i = 0; i < n; ++i) {
            const long e = long(k) * n + i;
            const long nd[4] = {node(i, k), node(i + 1, k), node(i, k + 1), node(i + 1, k + 1)};
            for (int q = 0; q < 4; ++q)
                for (int a = 0; a < 4; ++a) {
                    const double a1 = d1(a & 1, a >> 1, q), a3 = d3(a & 1, a >> 1, q);
                    diag[nd[a]] += w * mq[e * 4 + q] * (a1 * a1 + a3 * a3);
                }
        }
    for (double &d : diag) d = 1.0 / d;

    auto project = [](std::vector<double> &x) {
        double s = 0;
        for (double v : x) s += v;
        s /= double(x.size());
        for (double &v : x) v -= s;
    };
    std::vector<double> u(nodes, 0.0);
    const CgResult cg = conjugate_gradient([&](const std::vector<double> &in,
                                               std::vector<double> &out) { assemble(in, out, false); },
                                           b, u, diag, project, config.cg_rel_tol, config.cg_max_iter);
    if (!cg.converged) {
        std::ostringstream msg;
        msg << "mu_gamma solve (gamma = " << gamma << ", n = " << n << ") stopped at residual " << cg.residual
            << " after " << cg.iterations << " iterations";
        throw Error(ErrorKind::NonConvergence, msg.str());
    }

    double value = 0;
    for (int k = 0; k < n; ++k)
        for (int i = 0; i < n; ++i) {
            const long e = long(k) * n + i;
            const long nd[4] = {node(i, k), node(i + 1, k), node(i, k + 1), node(i + 1, k + 1)};
            for (int q = 0; q < 4; ++q) {
                const double x3 = -0.5 + (k + t[q >> 1]) * h;
                double g1 = s12 * x3, g3 = 0.0;
                for (int a = 0; a < 4; ++a) {
                    g1 += d1(a & 1, a >> 1, q) * u[nd[a]];
                    g3 += d3(a & 1, a >> 1, q) * u[nd[a]];
                }
                value += w * mq[e * 4 + q] * (g1 * g1 + g3 * g3);
            }
        }
    log().info("mu_gamma(gamma = {}) = {:.10f} on {}^2, {} iterations", gamma, value, n, cg.iterations);
    return {value, cg.residual, cg.iterations, n};
}

MuGammaResult solve_mu_gamma(const MaterialField &material, double gamma, const SolverConfig &config) {
    if (!(material.kind == FieldKind::Laminate || material.kind == FieldKind::Constant ||
          material.kind == FieldKind::InPlaneUniform))
        log().warn("mu_gamma assumes a field independent of y2; sampling along y2 = 0");
    const Lattice unit;
    auto mu = [&](double x3, double y1) {
        const Stiffness s = sample(material, unit, x3, Vec2(y1, 0.0));
        if (!s.isotropic) throw Error(ErrorKind::Config, "mu_gamma needs an isotropic material field");
        return s.mu;
    };
    return solve_mu_gamma(mu, gamma, config);
}

} // namespace plates
