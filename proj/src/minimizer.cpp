#include <plates/errors.hpp>
#include <plates/log.hpp>
#include <plates/minimizer.hpp>

#include <cmath>
#include <limits>
#include <random>
#include <sstream>

namespace plates {

const char *to_string(Branch b) {
    switch (b) {
        case Branch::UniqueAxial:    return "unique_axial";
        case Branch::TwoAxial:       return "two_axial";
        case Branch::NonAxialPair:   return "non_axial_pair";
        case Branch::OneParamFamily: return "one_param_family";
    }
    return "unknown";
}

double energy(const OrthotropicCoeffs &coeffs, const Sym2 &b_full, const Sym2 &g) {
    return coeffs.quadratic(g - b_full);
}

double energy(const Eigen::Matrix3d &qhat, const Sym2 &b_full, const Sym2 &g) {
    const Eigen::Vector3d d = (g - b_full).vector();
    return d.dot(qhat * d);
}

ClassifierInput classifier_input(const Eigen::Matrix3d &qhat, const Sym2 &beff, double tol) {
    if (std::abs(beff.c3) > tol * std::max(beff.norm(), std::numeric_limits<double>::min())) {
        std::ostringstream msg;
        msg << "prestrain is not diagonal: off-diagonal coefficient " << beff.c3;
        throw Error(ErrorKind::NotOrthotropic, msg.str());
    }
    return {check_orthotropic(qhat, tol), beff.c1, beff.c2};
}

ClassifierIntermediates intermediates(const ClassifierInput &in) {
    const auto &c = in.coeffs;
    ClassifierIntermediates im;
    const double off = c.q12 + 2.0 * c.q3;
    im.h << 2.0 * c.q1, off, off, 2.0 * c.q2;
    im.a << c.q1, 0.5 * c.q12, 0.5 * c.q12, c.q2;
    im.ab = im.a * Eigen::Vector2d(in.b1, in.b2);
    im.det_h = 4.0 * c.q1 * c.q2 - off * off;
    im.det_h_rel = im.det_h / ((c.q1 + c.q2) * (c.q1 + c.q2));
    if (im.det_h != 0.0) {
        // Cramer's rule for H g = 2 A b.
        const Eigen::Vector2d r = 2.0 * im.ab;
        im.gstar = Eigen::Vector2d(r[0] * im.h(1, 1) - im.h(0, 1) * r[1],
                                   im.h(0, 0) * r[1] - im.h(1, 0) * r[0]) / im.det_h;
    }
    im.qstar = Eigen::Vector2d(off, 2.0 * c.q2).normalized();
    im.sstar = im.qstar.dot(im.ab) / (c.q1 + c.q2);
    return im;
}

std::array<AxialCandidate, 2> axial_candidates(const ClassifierInput &in) {
    const auto &c = in.coeffs;
    const Sym2 b = in.b_full();
    const Sym2 g1{(2.0 * c.q1 * in.b1 + c.q12 * in.b2) / (2.0 * c.q1), 0.0, 0.0};
    const Sym2 g2{0.0, (c.q12 * in.b1 + 2.0 * c.q2 * in.b2) / (2.0 * c.q2), 0.0};
    return {AxialCandidate{g1, energy(c, b, g1)}, AxialCandidate{g2, energy(c, b, g2)}};
}

MinimizerSet classify(const ClassifierInput &in, const ClassifierTolerances &tol) {
    in.coeffs.validate();
    const auto &c = in.coeffs;
    const Sym2 b = in.b_full();

    MinimizerSet out;
    out.im = intermediates(in);
    const auto &im = out.im;
    const double bn2 = in.b1 * in.b1 + in.b2 * in.b2;
    out.degenerate = std::abs(in.b1 * in.b2) <= tol.degenerate * bn2 || bn2 == 0.0;
    if (out.degenerate) out.note = "det B = 0: outside the hypotheses of the exact classification";

    if (im.det_h_rel > tol.det_h) {
        const Eigen::Vector2d g = im.gstar;
        if (g[0] * g[1] > tol.interior * g.squaredNorm() && g.squaredNorm() > 0.0) {
            out.branch = Branch::NonAxialPair;
            out.members = {phi_map(g[0], g[1])};
            out.energy = energy(c, b, out.members[0]);
            return out;
        }
    } else if (std::abs(im.det_h_rel) <= tol.det_h && !out.degenerate) {
        const Eigen::Vector2d proj = im.ab.dot(im.qstar) * im.qstar;
        if ((proj - im.ab).norm() <= tol.family * im.ab.norm()) {
            out.branch = Branch::OneParamFamily;
            out.qstar = im.qstar;
            out.sstar = im.sstar;
            const Eigen::Vector2d a = family_point(im.qstar, im.sstar, 0.0);
            out.energy = energy(c, b, phi_map(a[0], a[1], 1e-9));
            return out;
        }
    }

    const auto cand = axial_candidates(in);
    double best = std::min(cand[0].energy, cand[1].energy);
    if (cand[0].g == cand[1].g) {
        out.branch = Branch::UniqueAxial;
        out.members = {cand[0].g};
    } else if (std::abs(cand[0].energy - cand[1].energy) <=
               tol.energy * std::max({std::abs(cand[0].energy), std::abs(cand[1].energy),
                                      std::numeric_limits<double>::min()})) {
        out.branch = Branch::TwoAxial;
        out.members = {cand[0].g, cand[1].g};
    } else {
        out.branch = Branch::UniqueAxial;
        out.members = {cand[0].energy < cand[1].energy ? cand[0].g : cand[1].g};
    }
    if (out.degenerate) {
        const double e0 = energy(c, b, Sym2{});
        if (e0 < best * (1.0 - tol.energy)) {
            out.branch = Branch::UniqueAxial;
            out.members = {Sym2{}};
            best = e0;
        }
    }
    out.energy = best;
    return out;
}

Eigen::Vector2d family_point(const Eigen::Vector2d &q, double s, double t) {
    return s * q + t * Eigen::Vector2d(-q[1], q[0]);
}

std::pair<double, double> family_segment(const Eigen::Vector2d &q, double s) {
    // a1 a2 = (s q1 - t q2)(s q2 + t q1) is concave in t; its roots bound the segment.
    double t0 = s * q[0] / q[1], t1 = -s * q[1] / q[0];
    if (t0 > t1) std::swap(t0, t1);
    return {t0, t1};
}

std::vector<ReportEntry> minimizer_report(const MinimizerSet &set, const ClassifierInput &in, int family_samples) {
    const Sym2 b = in.b_full();
    std::vector<ReportEntry> out;
    auto push = [&](const Sym2 &g) {
        out.push_back({cyl_decompose(g, 1e-7), g, energy(in.coeffs, b, g)});
    };
    switch (set.branch) {
        case Branch::UniqueAxial:
        case Branch::TwoAxial:
            for (const Sym2 &g : set.members) push(g);
            break;
        case Branch::NonAxialPair:
            push(set.members[0]);
            push(reflect_T(set.members[0]));
            break;
        case Branch::OneParamFamily: {
            const auto [t0, t1] = family_segment(set.qstar, set.sstar);
            const int n = std::max(family_samples, 2);
            for (int i = 0; i < n; ++i) {
                const double t = t0 + (t1 - t0) * i / (n - 1);
                const Eigen::Vector2d a = family_point(set.qstar, set.sstar, t);
                const Sym2 g = phi_map(a[0], a[1], 1e-9);
                push(g);
                if (g.c3 != 0.0) push(reflect_T(g));
            }
            break;
        }
    }
    return out;
}

OracleResult brute_force_minimize(const Eigen::Matrix3d &qhat, const Sym2 &b_full, const OracleGrid &grid) {
    if (grid.n_alpha < 3) throw Error(ErrorKind::Config, "oracle needs at least 3 angles");
    const int n = grid.n_alpha;
    const double da = kPi / n;
    const Eigen::Vector3d bv = b_full.vector();
    const Eigen::Vector3d qb = qhat * bv;
    const double c0 = bv.dot(qb);

    double kmax = grid.kappa_max;
    if (kmax <= 0.0) {
        const Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(qhat);
        kmax = 2.0 * (es.eigenvalues()[2] / es.eigenvalues()[0]) * bv.norm() + 1.0;
    }

    std::vector<double> f(n), kap(n);
    for (int expansion = 0;; ++expansion) {
        #pragma omp parallel for schedule(static)
        for (int i = 0; i < n; ++i) {
            const double a = -0.5 * kPi + (i + 1) * da;
            const Eigen::Vector3d u = CylForm{1.0, a}.to_sym2().vector();
            const double quu = u.dot(qhat * u), qub = u.dot(qb);
            const double k = std::clamp(qub / quu, -kmax, kmax);
            kap[i] = k;
            f[i] = k * k * quu - 2.0 * k * qub + c0;
        }
        int best = 0;
        for (int i = 1; i < n; ++i) {
            if (f[i] < f[best]) best = i; // ties keep the lower angle
        }
        if (std::abs(kap[best]) < kmax) {
            OracleResult r;
            r.best = {kap[best], -0.5 * kPi + (best + 1) * da};
            r.energy = f[best];
            r.alpha_step = da;
            r.kappa_max = kmax;
            const double fl = f[(best + n - 1) % n], fr = f[(best + 1) % n];
            const double curv = std::abs(fl - 2.0 * f[best] + fr) / (da * da);
            r.resolution = curv * da * da / 4.0;
            r.profile = f;
            return r;
        }
        if (expansion >= grid.max_expansions) {
            std::ostringstream msg;
            msg << "oracle kappa range exhausted at kappa_max = " << kmax;
            throw Error(ErrorKind::BudgetExceeded, msg.str());
        }
        kmax *= 2.0;
    }
}

std::vector<ClassifierInput> random_classifier_inputs(std::uint64_t seed, int count, double min_det_b) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> diag(0.1, 2.0), shear(0.05, 2.0), unit(-0.95, 0.95), b(-2.0, 2.0);
    std::vector<ClassifierInput> out;
    out.reserve(count);
    while (static_cast<int>(out.size()) < count) {
        ClassifierInput in;
        in.coeffs.q1 = diag(rng);
        in.coeffs.q2 = diag(rng);
        in.coeffs.q3 = shear(rng);
        in.coeffs.q12 = unit(rng) * 2.0 * std::sqrt(in.coeffs.q1 * in.coeffs.q2);
        in.b1 = b(rng);
        in.b2 = b(rng);
        if (std::abs(in.b1 * in.b2) >= min_det_b) out.push_back(in);
    }
    return out;
}

OracleComparison compare_with_oracle(const ClassifierInput &in, const MinimizerSet &set, const OracleGrid &grid) {
    OracleComparison c;
    const Sym2 b = in.b_full();
    c.oracle = brute_force_minimize(in.coeffs, b, grid);
    c.classifier_energy = set.energy;
    c.oracle_energy = c.oracle.energy;
    const double scale = std::max(energy(in.coeffs, b, Sym2{}), std::numeric_limits<double>::min());
    const double roundoff = 1e-12 * scale;
    c.tolerance = c.oracle.resolution + roundoff;
    const double gap = c.oracle_energy - c.classifier_energy;
    c.energy_ok = gap >= -roundoff && gap <= c.tolerance;

    const double step = c.oracle.alpha_step;
    for (const ReportEntry &e : minimizer_report(set, in, 2001)) {
        double d = std::abs(wrap_half_turn(c.oracle.best.angle - e.form.angle));
        d = std::min(d, kPi - d);
        if (d <= 2.0 * step * (1.0 + 1e-9) || e.form.kappa == 0.0) c.location_ok = true;
    }
    return c;
}

} // namespace plates
