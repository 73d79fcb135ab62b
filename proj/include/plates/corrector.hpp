#pragma once

// Finite element solution of the cell problems:
//  - corrector: for bending mode g find (M, phi) minimizing
//        int Q(iota(x3 g + M) + sym grad_gamma phi),  phi periodic, int phi = 0;
//  - projection: best approximation of sym B by iota(x3 g + m) + sym grad_gamma phi;
//  - mu_gamma: the scalar problem on (x3, y1)
//        min_w int mu ((sqrt(12) x3 + dw/dy1)^2 + (gamma^-1 dw/dx3)^2).

#include <plates/kernels.hpp>

#include <vector>

namespace plates {

struct SolverConfig {
    CellGrid grid;
    double cg_rel_tol = 1e-10;
    int cg_max_iter = 50000;
    int quadrature_order = 2; // Gauss points per axis; only 2 is implemented
    bool reference_kernel = false;
    // Nonzero: start CG from a seeded random vector instead of zero.
    unsigned initial_seed = 0;
    int mu_gamma_n = 128;

    void validate() const;
};

struct SolveReport {
    CellGrid grid;
    double energy = 0;
    double residual = 0;
    int iterations = 0;
    double seconds = 0;
};

struct CorrectorSolution {
    Sym2 g;
    Sym2 m;
    std::vector<double> phi; // 3 per node, zero integral mean
    double energy = 0;       // int Q(E_g)
    double residual = 0;
    int iterations = 0;
    CellGrid grid;
    // |M|^2 + int |grad_gamma phi|^2 and the same with the symmetric gradient.
    double apriori_full = 0;
    double apriori_sym = 0;

    SolveReport report() const { return {grid, energy, residual, iterations, 0.0}; }
};

struct ProjectionSolution {
    Sym2 g_b;
    Sym2 m_b;
    std::vector<double> phi;
    double residual_density = 0; // int Q(sym B - projection)
    double residual = 0;
    int iterations = 0;
    CellGrid grid;

    SolveReport report() const { return {grid, residual_density, residual, iterations, 0.0}; }
};

struct MuGammaResult {
    double value = 0;
    double residual = 0;
    int iterations = 0;
    int n = 0;
};

std::vector<Mode> corrector_modes();
std::vector<Mode> projection_modes();

// Sym2 carried by the first three mode coefficients of a solution vector.
Sym2 mode_coefficients(const std::vector<double> &x, long offset);

CorrectorSolution solve_corrector(const RveSpec &rve, const Sym2 &g, const SolverConfig &config);
CorrectorSolution solve_corrector(const CellOperator &op, const Sym2 &g, const SolverConfig &config);

ProjectionSolution solve_projection(const RveSpec &rve, const SolverConfig &config);
ProjectionSolution solve_projection(const CellOperator &op, const SolverConfig &config);

MuGammaResult solve_mu_gamma(const std::function<double(double x3, double y1)> &mu, double gamma,
                             const SolverConfig &config);
// mu taken from an isotropic material field at y = (y1, 0).
MuGammaResult solve_mu_gamma(const MaterialField &material, double gamma, const SolverConfig &config);

// Integral mean of the trilinear interpolant of one displacement component.
double nodal_mean(const CellGrid &grid, const std::vector<double> &u, int component);

} // namespace plates
