#pragma once

// Matrix-free trilinear hexahedral operator for the periodic cell problems on
// (-1/2, 1/2)^3 and the vector kernels used by the conjugate gradient solver.
//
// Unknowns are laid out as [u (3 per node) | s (one per global mode)], where
// the strain at a quadrature point is
//     E = sym(grad_gamma u) + sum_m s_m * mode_m(x3) + E_src
// and grad_gamma = (d/dy1, d/dy2, gamma^-1 d/dx3). Strains and stresses are
// Mandel vectors. Nodes are periodic in y1, y2 and free on the x3 faces.

#include <plates/rve.hpp>

#include <functional>
#include <memory>
#include <vector>

namespace plates {

struct CellGrid {
    int n1 = 32, n2 = 32, n3 = 32;

    static CellGrid cube(int n) { return {n, n, n}; }
    void validate() const;

    long nodes() const { return long(n1) * n2 * (n3 + 1); }
    long elements() const { return long(n1) * n2 * n3; }
    long node(int i, int j, int k) const { return (long(k) * n2 + j) * n1 + i; }
    long element(int i, int j, int k) const { return (long(k) * n2 + j) * n1 + i; }
    double h1() const { return 1.0 / n1; }
    double h2() const { return 1.0 / n2; }
    double h3() const { return 1.0 / n3; }
    bool operator==(const CellGrid &) const = default;
};

// Global strain mode: unit Mandel component `index`, optionally scaled by x3.
struct Mode {
    int index = 0;
    bool times_x3 = false;
};

inline constexpr int kQp = 8;
inline constexpr int kNodesPerElement = 8;

// Quadrature-point data shared by every operator on one discretized cell.
struct CellData {
    CellGrid grid;
    double gamma = 1.0;
    std::vector<Stiffness> materials; // deduplicated
    std::vector<int> qp_material;     // elements * kQp entries
    std::vector<double> prestrain;    // elements * kQp * 6 Mandel entries, empty if B = 0
    double alpha = 0, beta = 0;       // min/max eigenvalue of C over quadrature points

    // x3 coordinate of local Gauss point q3 in layer k.
    double qp_x3(int k, int q3) const;
    // Sample material and prestrain of a unit-lattice RVE at the Gauss points.
    static std::shared_ptr<const CellData> build(const RveSpec &rve, const CellGrid &grid);
};

class CellOperator {
public:
    CellOperator(std::shared_ptr<const CellData> data, std::vector<Mode> modes);

    const CellData &data() const { return *m_data; }
    const CellGrid &grid() const { return m_data->grid; }
    const std::vector<Mode> &modes() const { return m_modes; }
    int num_modes() const { return int(m_modes.size()); }
    long num_dofs() const { return 3 * grid().nodes() + num_modes(); }

    // y = d/dx of (1/2) int E.C E, with E built from x and the optional
    // per-quadrature-point source strain (elements * kQp * 6 entries).
    // apply: OpenMP element pass into a per-element buffer, then a per-node
    // gather in fixed order (deterministic for any thread count).
    void apply(const double *x, double *y, const double *source = nullptr) const;
    // Plain serial element loop with explicit B matrices and scatter-add.
    void apply_reference(const double *x, double *y, const double *source = nullptr) const;

    // Diagonal of the operator (Jacobi preconditioner).
    std::vector<double> diagonal() const;

    // Visit each quadrature point with (element, qp, x3, weight, strain, stiffness).
    using QpVisitor = std::function<void(long, int, double, double, const Vec6 &, const Stiffness &)>;
    void visit(const double *x, const double *source, const QpVisitor &f) const;

    // int E.C E
    double energy(const double *x, const double *source = nullptr) const;

    // (int |grad_gamma u|^2, int |sym grad_gamma u|^2) of the nodal part of x.
    std::pair<double, double> gradient_norms(const double *x) const;

    // Per-quadrature-point source x3 * iota(g).
    std::vector<double> bending_source(const Sym2 &g) const;

private:
    void element_strains(long e, const double *x, const double *source, Vec6 *strain) const;

    std::shared_ptr<const CellData> m_data;
    std::vector<Mode> m_modes;
    mutable std::vector<double> m_buffer; // per-element forces + mode partials
};

// Deterministic vector kernels: fixed-size chunks, partial sums reduced in order.
namespace vec {
double dot(const std::vector<double> &a, const std::vector<double> &b);
void axpy(double a, const std::vector<double> &x, std::vector<double> &y);  // y += a x
void xpby(const std::vector<double> &x, double b, std::vector<double> &y);  // y = x + b y
} // namespace vec

struct CgResult {
    int iterations = 0;
    double residual = 0; // ||b - A x|| / ||b||, recomputed at exit
    bool converged = false;
};

// Preconditioned CG for a symmetric positive semidefinite system whose null
// space is removed by `project` (applied to residuals and preconditioned
// residuals). `x` holds the initial guess on entry.
CgResult conjugate_gradient(const std::function<void(const std::vector<double> &, std::vector<double> &)> &apply,
                            const std::vector<double> &b, std::vector<double> &x,
                            const std::vector<double> &inv_diag,
                            const std::function<void(std::vector<double> &)> &project, double rel_tol,
                            int max_iter);

} // namespace plates
