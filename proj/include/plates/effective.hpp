#pragma once

// Homogenized bending stiffness and prestrain from corrector solves, and the
// closed forms for the two-phase laminate.

#include <plates/corrector.hpp>

#include <optional>
#include <string>

namespace plates {

// Q(G) = q1 G1^2 + q12 G1 G2 + q2 G2^2 + q3 G3^2 in basis coefficients.
struct OrthotropicCoeffs {
    double q1 = 0, q2 = 0, q12 = 0, q3 = 0;

    bool positive_definite() const;
    void validate() const; // NotPositiveDefinite
    Eigen::Matrix3d matrix() const;
    double quadratic(const Sym2 &g) const;
};

struct GammaRegime {
    enum class Kind { Small, Finite, Large };
    Kind kind = Kind::Finite;
    double gamma = 1.0;

    static GammaRegime small() { return {Kind::Small, 0.0}; }
    static GammaRegime large() { return {Kind::Large, 0.0}; }
    static GammaRegime finite(double g);
    // "small", "large" or "gamma=<v>"
    static GammaRegime parse(const std::string &s);
    std::string label() const;
};

struct EffectiveQuantities {
    Eigen::Matrix3d qhat = Eigen::Matrix3d::Zero();
    Eigen::Vector3d bhat = Eigen::Vector3d::Zero();
    Sym2 beff;
    // B_eff from the projection problem (cross-check of beff).
    std::optional<Sym2> beff_projection;
    double ires = 0;
    double alpha = 0, beta = 0; // pointwise coercivity constants of Q
    Sym2 m[3];                  // corrector matrices M_{G_i}
    std::vector<SolveReport> diagnostics;

    double qhom(const Sym2 &g) const { return g.vector().dot(qhat * g.vector()); }
};

struct EffectiveOptions {
    bool with_projection = true;
    // Allowed violation of alpha/12 <= qhat <= beta/12, relative to beta/12.
    double bounds_rel_tol = 0.02;
    // Allowed asymmetry of the assembled qhat, relative to its norm.
    double symmetry_tol = 1e-8;
};

EffectiveQuantities compute_effective(const RveSpec &rve, const SolverConfig &config,
                                      const EffectiveOptions &options = {});

struct LaminateClosedForm {
    OrthotropicCoeffs coeffs;
    Sym2 beff;
    double mu_harmonic = 0, mu_mean = 0;
    std::optional<MuGammaResult> mu_gamma; // set in the finite regime
};

LaminateClosedForm laminate_closed_form(const LaminateSpec &spec, const GammaRegime &regime,
                                        const SolverConfig &config = {});

// Accepts iff |qhat_13|, |qhat_23| <= tol * ||qhat||.
OrthotropicCoeffs check_orthotropic(const Eigen::Matrix3d &qhat, double tol = 1e-6);
inline OrthotropicCoeffs check_orthotropic(const EffectiveQuantities &eq, double tol = 1e-6) {
    return check_orthotropic(eq.qhat, tol);
}

double residual_energy(const RveSpec &rve, const SolverConfig &config);

// Matrix of G -> T^T G T acting on Sym2 coefficient vectors.
Eigen::Matrix3d congruence_matrix(const Eigen::Matrix2d &t);

} // namespace plates
