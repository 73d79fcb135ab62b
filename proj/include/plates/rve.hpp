#pragma once

// Representative volume element (-1/2, 1/2) x Y_Lambda carrying a stiffness
// field and a prestrain field, both periodic in the in-plane variable y.

#include <plates/symcal.hpp>

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace plates {

using Vec2 = Eigen::Vector2d;

// Linear elastic stiffness acting on Mandel vectors: Q(F) = F . C F.
struct Stiffness {
    Mat6 c = Mat6::Zero();
    bool isotropic = false;
    double lambda = 0, mu = 0; // valid when isotropic

    static Stiffness lame(double lambda, double mu);
    static Stiffness general(const Mat6 &c);

    double quadratic(const Vec6 &f) const { return f.dot(c * f); }
    // Smallest and largest eigenvalue of C (coercivity constants of Q).
    std::pair<double, double> bounds() const;
    bool operator==(const Stiffness &o) const;
};

struct Lattice {
    Eigen::Matrix2d lambda = Eigen::Matrix2d::Identity();
    double conditioning_bound = 1e4;

    void validate() const;
    bool is_identity() const { return lambda == Eigen::Matrix2d::Identity(); }
    // Same point set as Z^2 (integer entries, |det| = 1).
    bool is_unimodular() const;
    // Representative of y in the centered fundamental cell Lambda (-1/2,1/2]^2.
    Vec2 wrap(const Vec2 &y) const;
};

enum class FieldKind { Constant, Laminate, InPlaneUniform, Custom };
const char *to_string(FieldKind k);

// Planes across which a field may jump. y1/y2 positions are in cell
// coordinates of the unit lattice; x3 positions in (-1/2, 1/2).
struct Interfaces {
    std::vector<double> y1, y2, x3;
};

// Evaluation callbacks receive y already wrapped into the fundamental cell.
struct MaterialField {
    FieldKind kind = FieldKind::Constant;
    std::function<Stiffness(double x3, const Vec2 &y)> eval;
    Interfaces interfaces;

    static MaterialField constant(const Stiffness &s);
    static MaterialField lame(std::function<double(double, const Vec2 &)> lambda,
                              std::function<double(double, const Vec2 &)> mu,
                              FieldKind kind = FieldKind::Custom);
};

struct PrestrainField {
    FieldKind kind = FieldKind::Constant;
    std::function<Sym3(double x3, const Vec2 &y)> eval;
    Interfaces interfaces;

    static PrestrainField zero();
    static PrestrainField constant(const Sym3 &b);
};

struct LaminateSpec {
    double theta = 0.5;
    double theta_mu = 2.0;
    double theta_rho = 0.0;
    double mu1 = 1.0;
    double rho1 = 1.0;
    // Prestrain mirrored through the mid-plane, B(-x3, y).
    bool reflected = false;

    void validate() const;
    double mu2() const { return theta_mu * mu1; }
    double rho2() const { return theta_rho * rho1; }
};

struct RveSpec {
    Lattice lattice;
    MaterialField material;
    PrestrainField prestrain = PrestrainField::zero();
    double gamma = 1.0;
    // Analytic descriptor kept while the fields are an untransformed laminate.
    std::optional<LaminateSpec> laminate;

    void validate() const;
    bool in_plane_uniform() const;
};

RveSpec make_laminate(const LaminateSpec &spec, double gamma = 1.0);

// Stack of in-plane uniform layers; layer k occupies (top_{k-1}, top_k] with
// top_{-1} = -1/2 and the last top = 1/2.
struct Layer {
    double top = 0.5;
    Stiffness stiffness;
    Sym3 prestrain;
};
RveSpec make_layered(const std::vector<Layer> &layers, double gamma = 1.0);

// Square inclusion |y1|, |y2| < size/2 in a matrix. Each phase carries one
// prestrain above and one below the mid-plane.
struct InclusionSpec {
    double size = 0.5;
    Stiffness matrix, inclusion;
    Sym3 matrix_top, matrix_bottom, inclusion_top, inclusion_bottom;
};
RveSpec make_inclusion(const InclusionSpec &spec, double gamma = 1.0);

// New lattice T Lambda with, for Th = diag(T, 1),
//   Q~(x3, y, G) = Q(x3, T^-1 y, Th^T G Th)
//   B~(x3, y)    = Th^-T B(x3, T^-1 y) Th^-1
RveSpec transform_rve(const RveSpec &rve, const Eigen::Matrix2d &t);

// transform_rve with T = Lambda^-1.
RveSpec normalize_to_unit_cell(const RveSpec &rve);

// Reinterpret the fields on the unit lattice without changing them. Valid when
// the lattice generates Z^2 or both fields are independent of y.
std::optional<RveSpec> relabel_lattice(const RveSpec &rve);

Stiffness sample(const MaterialField &f, const Lattice &l, double x3, const Vec2 &y);
Sym3 sample(const PrestrainField &f, const Lattice &l, double x3, const Vec2 &y);

// Laminate spec whose interfaces y1 = +-theta/2 fall on the faces of an
// n-element grid, i.e. n (1 - theta) / 2 is an integer.
LaminateSpec snap_laminate(const LaminateSpec &spec, int n);
bool laminate_aligned(const LaminateSpec &spec, int n, double tol = 1e-12);

} // namespace plates
