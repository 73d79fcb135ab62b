#include <plates/effective.hpp>
#include <plates/errors.hpp>
#include <plates/log.hpp>

#include <chrono>
#include <cmath>
#include <sstream>

namespace plates {

bool OrthotropicCoeffs::positive_definite() const {
    return q1 > 0.0 && q2 > 0.0 && q3 > 0.0 && std::abs(q12) < 2.0 * std::sqrt(q1 * q2);
}

void OrthotropicCoeffs::validate() const {
    if (!positive_definite()) {
        std::ostringstream msg;
        msg << "coefficients (q1, q2, q12, q3) = (" << q1 << ", " << q2 << ", " << q12 << ", " << q3
            << ") are not positive definite";
        throw Error(ErrorKind::NotPositiveDefinite, msg.str());
    }
}

Eigen::Matrix3d OrthotropicCoeffs::matrix() const {
    Eigen::Matrix3d q;
    q << q1, 0.5 * q12, 0, 0.5 * q12, q2, 0, 0, 0, q3;
    return q;
}

double OrthotropicCoeffs::quadratic(const Sym2 &g) const {
    return q1 * g.c1 * g.c1 + q12 * g.c1 * g.c2 + q2 * g.c2 * g.c2 + q3 * g.c3 * g.c3;
}

GammaRegime GammaRegime::finite(double g) {
    if (!(g > 0.0) || !std::isfinite(g)) throw Error(ErrorKind::Config, "finite gamma must lie in (0, inf)");
    return {Kind::Finite, g};
}

GammaRegime GammaRegime::parse(const std::string &s) {
    if (s == "small") return small();
    if (s == "large") return large();
    if (s.rfind("gamma=", 0) == 0) {
        try {
            size_t used = 0;
            const double g = std::stod(s.substr(6), &used);
            if (used == s.size() - 6) return finite(g);
        } catch (const std::logic_error &) {
        }
    }
    throw Error(ErrorKind::Config, "regime must be small, large or gamma=<value>, got '" + s + "'");
}

std::string GammaRegime::label() const {
    switch (kind) {
        case Kind::Small: return "small";
        case Kind::Large: return "large";
        case Kind::Finite: break;
    }
    std::ostringstream os;
    os.precision(17);
    os << "gamma=" << gamma;
    return os.str();
}

Eigen::Matrix3d congruence_matrix(const Eigen::Matrix2d &t) {
    Eigen::Matrix3d l;
    for (int j = 0; j < 3; ++j)
        l.col(j) = Sym2::from_matrix(t.transpose() * Sym2::basis(j).matrix() * t).vector();
    return l;
}

namespace {

// Unit-lattice RVE plus the lattice matrix to map results back (if normalized).
struct UnitCell {
    RveSpec rve;
    std::optional<Eigen::Matrix2d> lattice;
};

UnitCell unit_cell(const RveSpec &rve, const CellGrid &grid) {
    UnitCell uc;
    if (rve.lattice.is_identity()) {
        uc.rve = rve;
    } else if (auto relabeled = relabel_lattice(rve)) {
        uc.rve = *relabeled;
    } else {
        uc.rve = normalize_to_unit_cell(rve);
        uc.lattice = rve.lattice.lambda;
    }
    if (uc.rve.laminate && !laminate_aligned(*uc.rve.laminate, grid.n1)) {
        uc.rve = make_laminate(snap_laminate(*uc.rve.laminate, grid.n1), uc.rve.gamma);
    }
    return uc;
}

std::vector<double> full_vector(const CorrectorSolution &s) {
    std::vector<double> x = s.phi;
    x.push_back(s.m.c1);
    x.push_back(s.m.c2);
    x.push_back(s.m.c3);
    return x;
}

} // namespace

EffectiveQuantities compute_effective(const RveSpec &rve_in, const SolverConfig &config,
                                      const EffectiveOptions &options) {
    config.validate();
    rve_in.validate();
    const UnitCell uc = unit_cell(rve_in, config.grid);
    auto data = CellData::build(uc.rve, config.grid);
    const CellOperator op(data, corrector_modes());

    EffectiveQuantities eq;
    eq.alpha = data->alpha;
    eq.beta = data->beta;

    static const int kIndex[3] = {0, 1, 5};
    const std::vector<double> &bq = data->prestrain;
    for (int i = 0; i < 3; ++i) {
        const auto t0 = std::chrono::steady_clock::now();
        const Sym2 gi = Sym2::basis(i);
        const CorrectorSolution sol = solve_corrector(op, gi, config);
        const std::vector<double> src = op.bending_source(gi);
        const std::vector<double> x = full_vector(sol);
        Eigen::Vector3d row = Eigen::Vector3d::Zero();
        double b = 0;
        op.visit(x.data(), src.data(), [&](long e, int q, double x3, double w, const Vec6 &eps, const Stiffness &s) {
            const Vec6 sig = s.c * eps;
            for (int k = 0; k < 3; ++k) row[k] += w * x3 * sig[kIndex[k]];
            if (!bq.empty()) b += w * sig.dot(Eigen::Map<const Vec6>(&bq[(e * kQp + q) * 6]));
        });
        eq.qhat.row(i) = row.transpose();
        eq.bhat[i] = b;
        eq.m[i] = sol.m;
        SolveReport rep = sol.report();
        rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        eq.diagnostics.push_back(rep);
    }

    const double asym = (eq.qhat - eq.qhat.transpose()).norm();
    if (asym > options.symmetry_tol * eq.qhat.norm()) {
        std::ostringstream msg;
        msg << "assembled qhat is not symmetric: |Q - Q^T| = " << asym << ", |Q| = " << eq.qhat.norm();
        throw Error(ErrorKind::NotPositiveDefinite, msg.str());
    }
    eq.qhat = 0.5 * (eq.qhat + eq.qhat.transpose());

    const Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(eq.qhat);
    const double lo = eq.alpha / 12.0, hi = eq.beta / 12.0, tol = options.bounds_rel_tol * hi;
    if (es.eigenvalues()[0] < lo - tol || es.eigenvalues()[2] > hi + tol) {
        std::ostringstream msg;
        msg << "qhat eigenvalues [" << es.eigenvalues().transpose() << "] outside [alpha/12, beta/12] = [" << lo
            << ", " << hi << "]";
        throw Error(ErrorKind::NotPositiveDefinite, msg.str());
    }
    eq.beff = Sym2::from_vector(eq.qhat.ldlt().solve(eq.bhat));

    if (options.with_projection) {
        const auto t0 = std::chrono::steady_clock::now();
        const CellOperator op6(data, projection_modes());
        const ProjectionSolution ps = solve_projection(op6, config);
        eq.beff_projection = ps.g_b;
        eq.ires = ps.residual_density;
        SolveReport rep = ps.report();
        rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        eq.diagnostics.push_back(rep);
    }

    if (uc.lattice) {
        // Q(G) = Q~(L^T G L), B_eff = L^-T B~ L^-1 for the lattice matrix L.
        const Eigen::Matrix2d &lam = *uc.lattice;
        const Eigen::Matrix3d c = congruence_matrix(lam);
        const Eigen::Matrix3d ci = congruence_matrix(lam.inverse());
        eq.qhat = c.transpose() * eq.qhat * c;
        eq.qhat = 0.5 * (eq.qhat + eq.qhat.transpose());
        eq.beff = Sym2::from_vector(ci * eq.beff.vector());
        if (eq.beff_projection) eq.beff_projection = Sym2::from_vector(ci * eq.beff_projection->vector());
        eq.bhat = eq.qhat * eq.beff.vector();
    }
    return eq;
}

LaminateClosedForm laminate_closed_form(const LaminateSpec &spec, const GammaRegime &regime,
                                        const SolverConfig &config) {
    spec.validate();
    const double th = spec.theta, tm = spec.theta_mu, tr = spec.theta_rho;
    const double mu1 = spec.mu1, rho1 = spec.rho1;

    LaminateClosedForm out;
    // Harmonic and arithmetic means of mu over y1.
    out.mu_harmonic = mu1 * tm / (th + (1.0 - th) * tm);
    out.mu_mean = mu1 * ((1.0 - th) + th * tm);
    auto &c = out.coeffs;
    c.q1 = out.mu_harmonic / 6.0;
    c.q2 = out.mu_mean / 6.0;
    c.q12 = 0.0;
    switch (regime.kind) {
        case GammaRegime::Kind::Small: c.q3 = c.q2; break;
        case GammaRegime::Kind::Large: c.q3 = c.q1; break;
        case GammaRegime::Kind::Finite: {
            const RveSpec rve = make_laminate(spec, regime.gamma);
            out.mu_gamma = solve_mu_gamma(rve.material, regime.gamma, config);
            c.q3 = out.mu_gamma->value / 6.0;
            break;
        }
    }

    const double s = spec.reflected ? -1.0 : 1.0;
    out.beff.c1 = s * 1.5 * rho1 * (1.0 - th * (1.0 + tr));
    out.beff.c2 = s * 1.5 * rho1 * (1.0 - th * (1.0 + tm * tr)) / (1.0 - th + th * tm);
    out.beff.c3 = 0.0;
    return out;
}

OrthotropicCoeffs check_orthotropic(const Eigen::Matrix3d &qhat, double tol) {
    const double n = qhat.norm();
    if (std::abs(qhat(0, 2)) > tol * n || std::abs(qhat(1, 2)) > tol * n) {
        std::ostringstream msg;
        msg << "qhat_13 = " << qhat(0, 2) << ", qhat_23 = " << qhat(1, 2) << " exceed " << tol << " * |qhat| = "
            << tol * n;
        throw Error(ErrorKind::NotOrthotropic, msg.str());
    }
    return {qhat(0, 0), qhat(1, 1), 2.0 * qhat(0, 1), qhat(2, 2)};
}

double residual_energy(const RveSpec &rve, const SolverConfig &config) {
    config.validate();
    rve.validate();
    const UnitCell uc = unit_cell(rve, config.grid);
    const ProjectionSolution ps = solve_projection(uc.rve, config);
    return ps.residual_density;
}

} // namespace plates
