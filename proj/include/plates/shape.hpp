#pragma once

// Shape programming with composite templates, cylindrical surface meshes and
// laminate parameter sweeps.

#include <plates/minimizer.hpp>

#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace plates {

struct Rect {
    double x0 = 0, y0 = 0, x1 = 1, y1 = 1;

    double width() const { return x1 - x0; }
    double height() const { return y1 - y0; }
    double area() const { return width() * height(); }
    void validate() const;
};

// ---------------------------------------------------------------- templates

struct TemplateSample {
    double kappa = 0;
    OrthotropicCoeffs coeffs;
    Sym2 beff;
    MinimizerSet minimizer;
};

struct CompositeTemplate {
    double k_lo = 0, k_hi = 0; // open interval K
    double prestrain_bound = 0;
    GammaRegime regime;
    std::function<RveSpec(double kappa)> rve_factory;
    std::function<LaminateClosedForm(double kappa)> effective;
    std::vector<TemplateSample> samples; // registration grid

    bool contains(double kappa) const { return kappa > k_lo && kappa < k_hi; }
    // Unique minimizer of the grain with parameter kappa rotated by r.
    Sym2 predicted(double kappa, const PlanarRotation &r) const;
};

// Parameter of the laminate instance realizing curvature kappa: theta_mu = 2,
// theta_rho = 0, theta = 1 - 2|kappa| / (3 rho1), prestrain reflected for
// kappa < 0. OutOfRange outside (-3 rho1 / 2, 3 rho1 / 2).
LaminateSpec laminate_template_instance(double rho1, double kappa);

// Registration checks the unique axial minimizer kappa G1 on `n_check`
// interior kappa values; TemplateCheckFailed otherwise.
CompositeTemplate register_laminate_template(double rho1, const GammaRegime &regime, int n_check = 21,
                                             const SolverConfig &config = {});

// ------------------------------------------------------------------ targets

struct TargetForm {
    Rect rect;
    int nx = 0, ny = 0;        // samples at cell centres of an nx x ny grid
    std::vector<Sym2> samples; // index j * nx + i

    static TargetForm from_function(const Rect &rect, int nx, int ny,
                                    const std::function<Sym2(const Eigen::Vector2d &)> &f);

    double hx() const { return rect.width() / nx; }
    double hy() const { return rect.height() / ny; }
    Eigen::Vector2d point(int i, int j) const {
        return {rect.x0 + (i + 0.5) * hx(), rect.y0 + (j + 0.5) * hy()};
    }
    const Sym2 &at(int i, int j) const { return samples[static_cast<size_t>(j) * nx + i]; }
    double l2_norm() const;
    void validate() const; // Config on shape mismatch
};

// kappa0 e(x)e everywhere.
TargetForm constant_target(const Rect &rect, int nx, int ny, const CylForm &form);
// Left and right halves (split at the mid x) with different constant forms.
TargetForm halves_target(const Rect &rect, int nx, int ny, const CylForm &left, const CylForm &right);
// Cone-like strip: kappa = scale / |x| across the radial direction.
TargetForm cone_strip_target(const Rect &rect, int nx, int ny, double scale = 1.0);

// Per-sample curvature and angle. Samples with |II| <= zero_tol take the
// direction of the nearest sample with a defined direction. Throws
// DomainError for samples with |det| > det_tol |II|^2 and OutOfRange for
// curvatures outside K (template optional).
std::vector<CylForm> decompose_target(const TargetForm &target, const CompositeTemplate *tmpl = nullptr,
                                      double det_tol = 1e-8, double zero_tol = 1e-12);

// --------------------------------------------------------------------- plans

struct Grain {
    Rect box; // clipped to the target rectangle
    PlanarRotation rotation;
    double kappa = 0;
};

struct GrainPlan {
    // Grains of a uniform square grid with cell size `grain_size` anchored at
    // the lower left corner of the target rectangle, row-major (ncols x nrows).
    std::vector<Grain> grains;
    int level = 0;
    int ncols = 0, nrows = 0;
    double grain_size = 0;
    Rect rect;
    double error = 0;    // L2 error reported by verify_plan
    double coverage = 1; // covered area fraction of the target rectangle

    int grain_index(const Eigen::Vector2d &x) const;
};

struct PlanOptions {
    // Finest level: grain size = max(width, height) / 2^max_level. Negative
    // selects the level at which grains reach the sample spacing.
    int max_level = -1;
};

// Plan at the first dyadic level whose error is <= delta.
// ResolutionCapExceeded if the finest level is not enough.
GrainPlan plan_shape(const CompositeTemplate &tmpl, const TargetForm &target, double delta,
                     const PlanOptions &options = {});
// Plan at a fixed level, built by refinement from level 0.
GrainPlan plan_at_level(const CompositeTemplate &tmpl, const TargetForm &target, int level);
// All levels 0..max_level.
std::vector<GrainPlan> plan_hierarchy(const CompositeTemplate &tmpl, const TargetForm &target, int max_level);

double verify_plan(const CompositeTemplate &tmpl, const GrainPlan &plan, const TargetForm &target);

// ------------------------------------------------------------------ surfaces

struct SurfaceMesh {
    int nx = 0, ny = 0; // vertices per axis
    Rect rect;
    std::vector<Eigen::Vector3d> vertices; // index j * nx + i
    std::vector<Eigen::Vector3d> normals;
    std::vector<std::array<int, 4>> quads;

    double hx() const { return rect.width() / (nx - 1); }
    double hy() const { return rect.height() / (ny - 1); }
    const Eigen::Vector3d &vertex(int i, int j) const { return vertices[static_cast<size_t>(j) * nx + i]; }
};

// Isometric bending u(x) = (sin(k t) / k, x.e_perp, (cos(k t) - 1) / k) with
// t = x.e. For k < 0 the sheet bends towards its normal.
Eigen::Vector3d cylinder_point(const CylForm &form, const Eigen::Vector2d &x);
SurfaceMesh cylindrical_surface(const CylForm &form, const Rect &rect, int nx, int ny);

// max over interior vertices of max_ij |(F^T F - I)_ij|, F by central differences.
double metric_defect(const SurfaceMesh &mesh);

struct CurvatureCheck {
    Eigen::Matrix2d mean = Eigen::Matrix2d::Zero(); // average discrete II
    double max_rel_error = 0; // max |II_h - k e(x)e| / |k| over interior vertices
};
CurvatureCheck discrete_curvature(const SurfaceMesh &mesh, const CylForm &form);

void write_obj(const SurfaceMesh &mesh, std::ostream &os);
void write_csv(const SurfaceMesh &mesh, std::ostream &os);

// --------------------------------------------------------------------- sweep

struct SweepPoint {
    double theta = 0.5, theta_mu = 2.0, theta_rho = 0.0;
    GammaRegime regime = GammaRegime::small();
};

struct SweepRow {
    SweepPoint point;
    std::optional<Branch> branch; // empty on error
    bool homogeneous = false;
    double kappa = 0;
    double alpha = 0; // in [0, pi/2]; NaN when every angle is a minimizer
    double energy = 0;
    std::optional<double> gamma_star;
    std::string error;
};

struct SweepOptions {
    double mu1 = 1.0, rho1 = 1.0;
    int jobs = 0; // <= 0: OpenMP default
    bool gamma_star = false;
    SolverConfig config;
};

std::vector<SweepPoint> theta_rho_grid(double theta, double theta_mu, const GammaRegime &regime, double lo,
                                       double hi, int n);
std::vector<SweepRow> sweep(const std::vector<SweepPoint> &points, const SweepOptions &options = {});

// Critical gamma with q3(gamma) = sqrt(q1 q2), by bisection in log gamma.
std::optional<double> critical_gamma(const LaminateSpec &spec, const SolverConfig &config,
                                     double lo = 1.0 / 1024.0, double hi = 1024.0, int iterations = 24);

// Indices i with |k[i+1] - k[i]| > factor * max of the neighbouring steps
// (and above abs_floor).
std::vector<size_t> detect_jumps(const std::vector<double> &kappa, double factor = 3.0, double abs_floor = 1e-9);

} // namespace plates
