#pragma once

// Global minimizers of G -> Q(G - B) over rank-deficient symmetric G.
//
// For orthotropic Q and diagonal B the set of minimizers is classified
// exactly (unique axial / two axial / non-axial pair {G, TG} / one-parameter
// family). Points a = (a1, a2) with a1 a2 >= 0 parametrize the cone through
// phi_map, where the energy reads E(a) = 1/2 a.Ha - 2 a.Ab + const.

#include <plates/effective.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace plates {

struct ClassifierInput {
    OrthotropicCoeffs coeffs;
    double b1 = 0, b2 = 0;

    Sym2 b_full() const { return {b1, b2, 0.0}; }
};

struct ClassifierIntermediates {
    Eigen::Matrix2d h = Eigen::Matrix2d::Zero();
    Eigen::Matrix2d a = Eigen::Matrix2d::Zero();
    Eigen::Vector2d ab = Eigen::Vector2d::Zero();
    Eigen::Vector2d gstar = Eigen::Vector2d::Zero(); // valid when det_h != 0
    Eigen::Vector2d qstar = Eigen::Vector2d::Zero(); // unit
    double sstar = 0;
    double det_h = 0;
    double det_h_rel = 0; // det_h / (q1 + q2)^2
};

struct ClassifierTolerances {
    double det_h = 1e-9;      // relative zero test for det H
    double interior = 1e-12;  // g1 g2 > interior * |g|^2
    double family = 1e-9;     // |(Ab.q)q - Ab| <= family * |Ab|
    double energy = 1e-9;     // relative tie test for axial energies
    double degenerate = 1e-12; // |b1 b2| <= degenerate * |b|^2
};

enum class Branch { UniqueAxial, TwoAxial, NonAxialPair, OneParamFamily };
const char *to_string(Branch b);

struct MinimizerSet {
    Branch branch = Branch::UniqueAxial;
    // UniqueAxial: {g}; TwoAxial: {g1, g2}; NonAxialPair: {g} with g.c3 > 0,
    // partner reflect_T(g); OneParamFamily: empty (see qstar, sstar).
    std::vector<Sym2> members;
    Eigen::Vector2d qstar = Eigen::Vector2d::Zero();
    double sstar = 0;
    double energy = 0; // minimal energy
    bool degenerate = false;
    std::string note;
    ClassifierIntermediates im;
};

struct AxialCandidate {
    Sym2 g;
    double energy = 0;
};

double energy(const OrthotropicCoeffs &coeffs, const Sym2 &b_full, const Sym2 &g);
double energy(const Eigen::Matrix3d &qhat, const Sym2 &b_full, const Sym2 &g);

// NotOrthotropic unless qhat is orthotropic and beff diagonal (relative tol).
ClassifierInput classifier_input(const Eigen::Matrix3d &qhat, const Sym2 &beff, double tol = 1e-6);

ClassifierIntermediates intermediates(const ClassifierInput &in);
std::array<AxialCandidate, 2> axial_candidates(const ClassifierInput &in);
MinimizerSet classify(const ClassifierInput &in, const ClassifierTolerances &tol = {});

// Parameter range [t0, t1] of the family segment a(t) = s* q* + t q*^perp
// inside a1 a2 >= 0.
std::pair<double, double> family_segment(const Eigen::Vector2d &qstar, double sstar);
Eigen::Vector2d family_point(const Eigen::Vector2d &qstar, double sstar, double t);

struct ReportEntry {
    CylForm form;
    Sym2 g;
    double energy = 0;
};

// kappa and angle of each minimizer (reflections included); families are
// sampled at `family_samples` points uniformly in t, endpoints included.
std::vector<ReportEntry> minimizer_report(const MinimizerSet &set, const ClassifierInput &in,
                                          int family_samples = 33);

struct OracleGrid {
    int n_alpha = 2001;
    double kappa_max = 0; // <= 0: chosen from |B| and the spectrum of Q
    int max_expansions = 40;
};

struct OracleResult {
    CylForm best;
    double energy = 0;
    double alpha_step = 0;
    // Bound on the energy gap caused by the angle grid, from the discrete
    // second difference around the best angle.
    double resolution = 0;
    double kappa_max = 0;
    std::vector<double> profile; // min over kappa, per grid angle
};

OracleResult brute_force_minimize(const Eigen::Matrix3d &qhat, const Sym2 &b_full, const OracleGrid &grid = {});
inline OracleResult brute_force_minimize(const OrthotropicCoeffs &c, const Sym2 &b_full,
                                         const OracleGrid &grid = {}) {
    return brute_force_minimize(c.matrix(), b_full, grid);
}

// Seeded orthotropic positive definite coefficients with diagonal B,
// |B1 B2| >= min_det_b.
std::vector<ClassifierInput> random_classifier_inputs(std::uint64_t seed, int count, double min_det_b = 0.01);

struct OracleComparison {
    double classifier_energy = 0, oracle_energy = 0;
    double tolerance = 0; // grid resolution plus a round-off allowance
    bool energy_ok = false;
    // The oracle angle lies within two grid steps of some minimizer angle.
    bool location_ok = false;
    OracleResult oracle;
};

OracleComparison compare_with_oracle(const ClassifierInput &in, const MinimizerSet &set,
                                     const OracleGrid &grid = {});

} // namespace plates
