#include <plates/errors.hpp>
#include <plates/log.hpp>
#include <plates/shape.hpp>

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>

namespace plates {

void Rect::validate() const {
    if (!(x1 > x0) || !(y1 > y0) || !std::isfinite(x0 + x1 + y0 + y1))
        throw Error(ErrorKind::Config, "rectangle must have positive finite extent");
}

// ---------------------------------------------------------------- templates

Sym2 CompositeTemplate::predicted(double kappa, const PlanarRotation &r) const {
    return rotate_form(kappa * Sym2::basis(0), r);
}

LaminateSpec laminate_template_instance(double rho1, double kappa) {
    if (!(rho1 > 0.0) || !std::isfinite(rho1)) throw Error(ErrorKind::Config, "template needs rho1 > 0");
    const double k_max = 1.5 * rho1;
    if (!(std::abs(kappa) < k_max)) {
        std::ostringstream msg;
        msg << "kappa = " << kappa << " outside the open interval (" << -k_max << ", " << k_max << ")";
        throw Error(ErrorKind::OutOfRange, msg.str());
    }
    LaminateSpec spec;
    spec.theta = 1.0 - std::abs(kappa) / k_max;
    spec.theta_mu = 2.0;
    spec.theta_rho = 0.0;
    spec.mu1 = 1.0;
    spec.rho1 = rho1;
    spec.reflected = kappa < 0.0;
    return spec;
}

CompositeTemplate register_laminate_template(double rho1, const GammaRegime &regime, int n_check,
                                             const SolverConfig &config) {
    if (n_check < 1) throw Error(ErrorKind::Config, "template check needs at least one sample");
    CompositeTemplate t;
    t.k_lo = -1.5 * rho1;
    t.k_hi = 1.5 * rho1;
    laminate_template_instance(rho1, 0.0); // validates rho1
    t.prestrain_bound = std::sqrt(3.0) * rho1;
    t.regime = regime;
    const double gamma = regime.kind == GammaRegime::Kind::Finite ? regime.gamma : 1.0;
    t.rve_factory = [rho1, gamma](double k) { return make_laminate(laminate_template_instance(rho1, k), gamma); };
    t.effective = [rho1, regime, config](double k) {
        return laminate_closed_form(laminate_template_instance(rho1, k), regime, config);
    };

    for (int i = 0; i < n_check; ++i) {
        TemplateSample s;
        s.kappa = t.k_lo + (i + 0.5) * (t.k_hi - t.k_lo) / n_check;
        const LaminateClosedForm lc = t.effective(s.kappa);
        s.coeffs = lc.coeffs;
        s.beff = lc.beff;
        s.minimizer = classify({lc.coeffs, lc.beff.c1, lc.beff.c2});
        const Sym2 expected = s.kappa * Sym2::basis(0);
        const bool ok = s.minimizer.branch == Branch::UniqueAxial &&
                        (s.minimizer.members[0] - expected).norm() <= 1e-9 * std::max(1.0, std::abs(s.kappa));
        if (!ok) {
            std::ostringstream msg;
            msg << "template check failed at kappa = " << s.kappa << ": branch " << to_string(s.minimizer.branch);
            throw Error(ErrorKind::TemplateCheckFailed, msg.str());
        }
        t.samples.push_back(std::move(s));
    }
    log().debug("laminate template registered: K = ({}, {}), {} samples, regime {}", t.k_lo, t.k_hi, n_check,
                regime.label());
    return t;
}

// ------------------------------------------------------------------ targets

TargetForm TargetForm::from_function(const Rect &rect, int nx, int ny,
                                     const std::function<Sym2(const Eigen::Vector2d &)> &f) {
    TargetForm t;
    t.rect = rect;
    t.nx = nx;
    t.ny = ny;
    if (nx < 1 || ny < 1) throw Error(ErrorKind::Config, "target grid needs at least one sample per axis");
    rect.validate();
    t.samples.resize(static_cast<size_t>(nx) * ny);
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) t.samples[static_cast<size_t>(j) * nx + i] = f(t.point(i, j));
    return t;
}

double TargetForm::l2_norm() const {
    double s = 0;
    for (const Sym2 &g : samples) s += g.dot(g);
    return std::sqrt(s * hx() * hy());
}

void TargetForm::validate() const {
    rect.validate();
    if (nx < 1 || ny < 1 || samples.size() != static_cast<size_t>(nx) * ny)
        throw Error(ErrorKind::Config, "target samples do not match the grid shape");
}

TargetForm constant_target(const Rect &rect, int nx, int ny, const CylForm &form) {
    const Sym2 g = form.to_sym2();
    return TargetForm::from_function(rect, nx, ny, [&](const Eigen::Vector2d &) { return g; });
}

TargetForm halves_target(const Rect &rect, int nx, int ny, const CylForm &left, const CylForm &right) {
    const Sym2 gl = left.to_sym2(), gr = right.to_sym2();
    const double mid = 0.5 * (rect.x0 + rect.x1);
    return TargetForm::from_function(rect, nx, ny, [&](const Eigen::Vector2d &x) { return x[0] < mid ? gl : gr; });
}

TargetForm cone_strip_target(const Rect &rect, int nx, int ny, double scale) {
    return TargetForm::from_function(rect, nx, ny, [&](const Eigen::Vector2d &x) {
        const double r = x.norm();
        if (r == 0.0) throw Error(ErrorKind::DomainError, "cone strip target is singular at the origin");
        return CylForm{scale / r, std::atan2(x[1], x[0]) + 0.5 * kPi}.to_sym2();
    });
}

std::vector<CylForm> decompose_target(const TargetForm &target, const CompositeTemplate *tmpl, double det_tol,
                                      double zero_tol) {
    target.validate();
    const size_t n = target.samples.size();
    double scale = 0;
    for (const Sym2 &g : target.samples) scale = std::max(scale, g.norm());

    std::vector<CylForm> forms(n);
    std::vector<char> defined(n, 0);
    std::vector<size_t> outside;
    for (size_t k = 0; k < n; ++k) {
        const Sym2 &g = target.samples[k];
        const double g2 = g.dot(g);
        if (std::abs(g.det()) > det_tol * g2) {
            std::ostringstream msg;
            msg << "target sample " << k << " is not rank-deficient: det = " << g.det();
            throw Error(ErrorKind::DomainError, msg.str());
        }
        if (std::sqrt(g2) > zero_tol * std::max(scale, 1.0)) {
            forms[k] = cyl_decompose(g, det_tol);
            defined[k] = 1;
        }
        if (tmpl && !tmpl->contains(forms[k].kappa)) outside.push_back(k);
    }
    if (!outside.empty()) {
        std::ostringstream msg;
        msg << outside.size() << " target samples have curvature outside (" << tmpl->k_lo << ", " << tmpl->k_hi
            << "):";
        for (size_t m = 0; m < std::min<size_t>(outside.size(), 5); ++m) {
            const size_t k = outside[m];
            msg << " (" << k % target.nx << ", " << k / target.nx << ") kappa = " << forms[k].kappa << ";";
        }
        throw Error(ErrorKind::OutOfRange, msg.str());
    }

    // Undefined directions are filled breadth-first from defined neighbours.
    std::deque<size_t> queue;
    for (size_t k = 0; k < n; ++k)
        if (defined[k]) queue.push_back(k);
    while (!queue.empty()) {
        const size_t k = queue.front();
        queue.pop_front();
        const int i = static_cast<int>(k % target.nx), j = static_cast<int>(k / target.nx);
        const int di[4] = {1, -1, 0, 0}, dj[4] = {0, 0, 1, -1};
        for (int d = 0; d < 4; ++d) {
            const int a = i + di[d], b = j + dj[d];
            if (a < 0 || b < 0 || a >= target.nx || b >= target.ny) continue;
            const size_t m = static_cast<size_t>(b) * target.nx + a;
            if (defined[m]) continue;
            forms[m].angle = forms[k].angle;
            defined[m] = 1;
            queue.push_back(m);
        }
    }
    return forms;
}

// --------------------------------------------------------------------- plans

int GrainPlan::grain_index(const Eigen::Vector2d &x) const {
    const int c = std::clamp(static_cast<int>(std::floor((x[0] - rect.x0) / grain_size)), 0, ncols - 1);
    const int r = std::clamp(static_cast<int>(std::floor((x[1] - rect.y0) / grain_size)), 0, nrows - 1);
    return r * ncols + c;
}

namespace {

GrainPlan layout(const Rect &rect, int level) {
    GrainPlan p;
    p.level = level;
    p.rect = rect;
    p.grain_size = std::ldexp(std::max(rect.width(), rect.height()), -level);
    p.ncols = std::max(1, static_cast<int>(std::ceil(rect.width() / p.grain_size - 1e-12)));
    p.nrows = std::max(1, static_cast<int>(std::ceil(rect.height() / p.grain_size - 1e-12)));
    p.grains.resize(static_cast<size_t>(p.ncols) * p.nrows);
    for (int r = 0; r < p.nrows; ++r) {
        for (int c = 0; c < p.ncols; ++c) {
            Rect &b = p.grains[static_cast<size_t>(r) * p.ncols + c].box;
            b.x0 = rect.x0 + c * p.grain_size;
            b.y0 = rect.y0 + r * p.grain_size;
            b.x1 = std::min(rect.x1, b.x0 + p.grain_size);
            b.y1 = std::min(rect.y1, b.y0 + p.grain_size);
        }
    }
    double covered = 0;
    for (const Grain &g : p.grains) covered += g.box.area();
    p.coverage = covered / rect.area();
    return p;
}

size_t nearest_sample(const TargetForm &t, const Eigen::Vector2d &x) {
    const int i = std::clamp(static_cast<int>(std::floor((x[0] - t.rect.x0) / t.hx())), 0, t.nx - 1);
    const int j = std::clamp(static_cast<int>(std::floor((x[1] - t.rect.y0) / t.hy())), 0, t.ny - 1);
    return static_cast<size_t>(j) * t.nx + i;
}

Eigen::Vector2d centre(const Rect &b) { return {0.5 * (b.x0 + b.x1), 0.5 * (b.y0 + b.y1)}; }

int default_max_level(const TargetForm &t) {
    const double extent = std::max(t.rect.width(), t.rect.height());
    const double spacing = std::min(t.hx(), t.hy());
    return std::clamp(static_cast<int>(std::ceil(std::log2(extent / spacing) - 1e-9)), 0, 20);
}

// Next level of a hierarchy: each grain takes the value at its centre unless
// keeping the parent value gives a smaller error on its own samples.
GrainPlan refine(const CompositeTemplate &tmpl, const TargetForm &target, const std::vector<CylForm> &forms,
                 const GrainPlan *parent, int level) {
    GrainPlan p = layout(target.rect, level);
    for (Grain &g : p.grains) {
        const CylForm &f = forms[nearest_sample(target, centre(g.box))];
        g.kappa = f.kappa;
        g.rotation = PlanarRotation{f.angle};
    }
    const double w = target.hx() * target.hy();
    std::vector<double> own(p.grains.size(), 0.0), inherited(p.grains.size(), 0.0);
    std::vector<Sym2> pred_own(p.grains.size()), pred_parent(p.grains.size());
    std::vector<int> parent_of(p.grains.size(), -1);
    for (size_t k = 0; k < p.grains.size(); ++k) {
        pred_own[k] = tmpl.predicted(p.grains[k].kappa, p.grains[k].rotation);
        if (parent) {
            parent_of[k] = parent->grain_index(centre(p.grains[k].box));
            const Grain &pg = parent->grains[parent_of[k]];
            pred_parent[k] = tmpl.predicted(pg.kappa, pg.rotation);
        }
    }
    double total = 0;
    for (int j = 0; j < target.ny; ++j) {
        for (int i = 0; i < target.nx; ++i) {
            const Sym2 &s = target.at(i, j);
            const int k = p.grain_index(target.point(i, j));
            const Sym2 d1 = pred_own[k] - s;
            own[k] += w * d1.dot(d1);
            if (parent) {
                const Sym2 d2 = pred_parent[k] - s;
                inherited[k] += w * d2.dot(d2);
            }
        }
    }
    for (size_t k = 0; k < p.grains.size(); ++k) {
        if (parent && inherited[k] < own[k]) {
            p.grains[k].kappa = parent->grains[parent_of[k]].kappa;
            p.grains[k].rotation = parent->grains[parent_of[k]].rotation;
            total += inherited[k];
        } else {
            total += own[k];
        }
    }
    p.error = std::sqrt(total);
    return p;
}

} // namespace

std::vector<GrainPlan> plan_hierarchy(const CompositeTemplate &tmpl, const TargetForm &target, int max_level) {
    const std::vector<CylForm> forms = decompose_target(target, &tmpl);
    std::vector<GrainPlan> out;
    for (int level = 0; level <= max_level; ++level)
        out.push_back(refine(tmpl, target, forms, out.empty() ? nullptr : &out.back(), level));
    return out;
}

GrainPlan plan_at_level(const CompositeTemplate &tmpl, const TargetForm &target, int level) {
    if (level < 0) throw Error(ErrorKind::Config, "plan level must be non-negative");
    return plan_hierarchy(tmpl, target, level).back();
}

GrainPlan plan_shape(const CompositeTemplate &tmpl, const TargetForm &target, double delta,
                     const PlanOptions &options) {
    if (!(delta > 0.0)) throw Error(ErrorKind::Config, "plan tolerance delta must be positive");
    const std::vector<CylForm> forms = decompose_target(target, &tmpl);
    const int max_level = options.max_level >= 0 ? options.max_level : default_max_level(target);
    GrainPlan p = refine(tmpl, target, forms, nullptr, 0);
    while (p.error > delta && p.level < max_level) p = refine(tmpl, target, forms, &p, p.level + 1);
    log().debug("plan_shape: level {}, {} grains, error {}", p.level, p.grains.size(), p.error);
    if (p.error > delta) {
        std::ostringstream msg;
        msg.precision(17);
        msg << "requested delta = " << delta << " not reached by level " << max_level << "; best error " << p.error;
        throw Error(ErrorKind::ResolutionCapExceeded, msg.str());
    }
    return p;
}

double verify_plan(const CompositeTemplate &tmpl, const GrainPlan &plan, const TargetForm &target) {
    target.validate();
    std::vector<Sym2> pred(plan.grains.size());
    for (size_t k = 0; k < pred.size(); ++k) pred[k] = tmpl.predicted(plan.grains[k].kappa, plan.grains[k].rotation);
    double total = 0;
    for (int j = 0; j < target.ny; ++j) {
        for (int i = 0; i < target.nx; ++i) {
            const Sym2 d = pred[plan.grain_index(target.point(i, j))] - target.at(i, j);
            total += d.dot(d);
        }
    }
    return std::sqrt(total * target.hx() * target.hy());
}

// ------------------------------------------------------------------ surfaces

Eigen::Vector3d cylinder_point(const CylForm &form, const Eigen::Vector2d &x) {
    const Eigen::Vector2d e = form.direction();
    const Eigen::Vector2d ep(-e[1], e[0]);
    const double t = x.dot(e), k = form.kappa, kt = k * t;
    double s, z;
    if (std::abs(kt) < 1e-4) {
        s = t * (1.0 - kt * kt / 6.0);
        z = -0.5 * k * t * t * (1.0 - kt * kt / 12.0);
    } else {
        s = std::sin(kt) / k;
        z = (std::cos(kt) - 1.0) / k;
    }
    return {s, x.dot(ep), z};
}

namespace {

Eigen::Vector3d cylinder_normal(const CylForm &form, const Eigen::Vector2d &x) {
    const Eigen::Vector2d e = form.direction();
    const Eigen::Vector2d ep(-e[1], e[0]);
    const double kt = form.kappa * x.dot(e), c = std::cos(kt), s = std::sin(kt);
    const Eigen::Vector3d d1(c * e[0], ep[0], -s * e[0]);
    const Eigen::Vector3d d2(c * e[1], ep[1], -s * e[1]);
    return d1.cross(d2).normalized();
}

} // namespace

SurfaceMesh cylindrical_surface(const CylForm &form, const Rect &rect, int nx, int ny) {
    rect.validate();
    if (nx < 2 || ny < 2) throw Error(ErrorKind::Config, "surface resolution must be at least 2 per axis");
    SurfaceMesh m;
    m.nx = nx;
    m.ny = ny;
    m.rect = rect;
    m.vertices.resize(static_cast<size_t>(nx) * ny);
    m.normals.resize(m.vertices.size());
    #pragma omp parallel for schedule(static)
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            const Eigen::Vector2d x(rect.x0 + i * m.hx(), rect.y0 + j * m.hy());
            m.vertices[static_cast<size_t>(j) * nx + i] = cylinder_point(form, x);
            m.normals[static_cast<size_t>(j) * nx + i] = cylinder_normal(form, x);
        }
    }
    m.quads.reserve(static_cast<size_t>(nx - 1) * (ny - 1));
    for (int j = 0; j + 1 < ny; ++j)
        for (int i = 0; i + 1 < nx; ++i)
            m.quads.push_back({j * nx + i, j * nx + i + 1, (j + 1) * nx + i + 1, (j + 1) * nx + i});
    return m;
}

double metric_defect(const SurfaceMesh &m) {
    double worst = 0;
    #pragma omp parallel for reduction(max : worst) schedule(static)
    for (int j = 1; j < m.ny - 1; ++j) {
        for (int i = 1; i < m.nx - 1; ++i) {
            Eigen::Matrix<double, 3, 2> f;
            f.col(0) = (m.vertex(i + 1, j) - m.vertex(i - 1, j)) / (2.0 * m.hx());
            f.col(1) = (m.vertex(i, j + 1) - m.vertex(i, j - 1)) / (2.0 * m.hy());
            const Eigen::Matrix2d g = f.transpose() * f - Eigen::Matrix2d::Identity();
            worst = std::max(worst, g.cwiseAbs().maxCoeff());
        }
    }
    return worst;
}

CurvatureCheck discrete_curvature(const SurfaceMesh &m, const CylForm &form) {
    CurvatureCheck out;
    const Eigen::Matrix2d exact = form.to_sym2().matrix();
    const double scale = form.kappa != 0.0 ? std::abs(form.kappa) : 1.0;
    const double hx = m.hx(), hy = m.hy();
    long count = 0;
    for (int j = 1; j < m.ny - 1; ++j) {
        for (int i = 1; i < m.nx - 1; ++i) {
            const Eigen::Vector3d u11 = (m.vertex(i + 1, j) - 2.0 * m.vertex(i, j) + m.vertex(i - 1, j)) / (hx * hx);
            const Eigen::Vector3d u22 = (m.vertex(i, j + 1) - 2.0 * m.vertex(i, j) + m.vertex(i, j - 1)) / (hy * hy);
            const Eigen::Vector3d u12 = (m.vertex(i + 1, j + 1) - m.vertex(i + 1, j - 1) - m.vertex(i - 1, j + 1) +
                                         m.vertex(i - 1, j - 1)) / (4.0 * hx * hy);
            const Eigen::Vector3d &n = m.normals[static_cast<size_t>(j) * m.nx + i];
            Eigen::Matrix2d ii;
            ii << -u11.dot(n), -u12.dot(n), -u12.dot(n), -u22.dot(n);
            out.mean += ii;
            out.max_rel_error = std::max(out.max_rel_error, (ii - exact).norm() / scale);
            ++count;
        }
    }
    if (count > 0) out.mean /= static_cast<double>(count);
    return out;
}

void write_obj(const SurfaceMesh &m, std::ostream &os) {
    const auto old = os.precision(17);
    os << "# cylindrical surface " << m.nx << " x " << m.ny << "\n";
    for (const auto &v : m.vertices) os << "v " << v[0] << ' ' << v[1] << ' ' << v[2] << '\n';
    for (const auto &n : m.normals) os << "vn " << n[0] << ' ' << n[1] << ' ' << n[2] << '\n';
    for (const auto &q : m.quads) {
        os << 'f';
        for (int k : q) os << ' ' << k + 1 << "//" << k + 1;
        os << '\n';
    }
    os.precision(old);
}

void write_csv(const SurfaceMesh &m, std::ostream &os) {
    const auto old = os.precision(17);
    os << "x1,x2,u1,u2,u3,n1,n2,n3\n";
    for (int j = 0; j < m.ny; ++j) {
        for (int i = 0; i < m.nx; ++i) {
            const auto &v = m.vertex(i, j);
            const auto &n = m.normals[static_cast<size_t>(j) * m.nx + i];
            os << m.rect.x0 + i * m.hx() << ',' << m.rect.y0 + j * m.hy() << ',' << v[0] << ',' << v[1] << ','
               << v[2] << ',' << n[0] << ',' << n[1] << ',' << n[2] << '\n';
        }
    }
    os.precision(old);
}

// --------------------------------------------------------------------- sweep

std::vector<SweepPoint> theta_rho_grid(double theta, double theta_mu, const GammaRegime &regime, double lo,
                                       double hi, int n) {
    if (n < 1) throw Error(ErrorKind::Config, "sweep needs at least one point");
    std::vector<SweepPoint> pts(n);
    for (int i = 0; i < n; ++i) {
        pts[i].theta = theta;
        pts[i].theta_mu = theta_mu;
        pts[i].theta_rho = n == 1 ? lo : lo + (hi - lo) * i / (n - 1);
        pts[i].regime = regime;
    }
    return pts;
}

std::optional<double> critical_gamma(const LaminateSpec &spec, const SolverConfig &config, double lo, double hi,
                                     int iterations) {
    const LaminateClosedForm lim = laminate_closed_form(spec, GammaRegime::small(), config);
    const double target = std::sqrt(lim.coeffs.q1 * lim.coeffs.q2);
    auto f = [&](double g) { return laminate_closed_form(spec, GammaRegime::finite(g), config).coeffs.q3 - target; };
    double a = std::log(lo), b = std::log(hi);
    double fa = f(lo), fb = f(hi);
    if (fa * fb > 0.0) return std::nullopt;
    for (int it = 0; it < iterations; ++it) {
        const double m = 0.5 * (a + b), fm = f(std::exp(m));
        if ((fm > 0.0) == (fa > 0.0)) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    (void)fb;
    return std::exp(0.5 * (a + b));
}

std::vector<SweepRow> sweep(const std::vector<SweepPoint> &points, const SweepOptions &options) {
    std::vector<SweepRow> rows(points.size());
    auto spec_of = [&](const SweepPoint &p) {
        LaminateSpec s;
        s.theta = p.theta;
        s.theta_mu = p.theta_mu;
        s.theta_rho = p.theta_rho;
        s.mu1 = options.mu1;
        s.rho1 = options.rho1;
        return s;
    };

    // gamma* depends on (theta, theta_mu) only.
    std::map<std::pair<double, double>, std::optional<double>> gamma_star;
    if (options.gamma_star) {
        for (const SweepPoint &p : points) {
            const auto key = std::make_pair(p.theta, p.theta_mu);
            if (gamma_star.count(key) || p.theta <= 0.0 || p.theta >= 1.0 || p.theta_mu == 1.0) continue;
            try {
                gamma_star[key] = critical_gamma(spec_of(p), options.config);
            } catch (const Error &e) {
                log().warn("gamma* failed at theta = {}, theta_mu = {}: {}", p.theta, p.theta_mu, e.what());
                gamma_star[key] = std::nullopt;
            }
        }
    }

    const int threads = options.jobs > 0 ? options.jobs : omp_get_max_threads();
    #pragma omp parallel for num_threads(threads) schedule(dynamic)
    for (size_t k = 0; k < points.size(); ++k) {
        const SweepPoint &p = points[k];
        SweepRow &row = rows[k];
        row.point = p;
        try {
            const LaminateSpec spec = spec_of(p);
            const LaminateClosedForm lc = laminate_closed_form(spec, p.regime, options.config);
            const ClassifierInput in{lc.coeffs, lc.beff.c1, lc.beff.c2};
            row.homogeneous = p.theta <= 0.0 || p.theta >= 1.0 || p.theta_mu == 1.0;
            if (row.homogeneous) {
                // Isotropic Q: every direction is optimal with kappa = B1.
                row.branch = Branch::OneParamFamily;
                row.kappa = lc.beff.c1;
                row.alpha = std::numeric_limits<double>::quiet_NaN();
                row.energy = energy(lc.coeffs, in.b_full(), row.kappa * Sym2::basis(0));
            } else {
                const MinimizerSet set = classify(in);
                const auto rep = minimizer_report(set, in, 3);
                const ReportEntry &e = set.branch == Branch::OneParamFamily ? rep[rep.size() / 2] : rep.front();
                row.branch = set.branch;
                row.kappa = e.form.kappa;
                row.alpha = std::abs(e.form.angle);
                row.energy = set.energy;
            }
            const auto it = gamma_star.find({p.theta, p.theta_mu});
            if (it != gamma_star.end()) row.gamma_star = it->second;
        } catch (const Error &e) {
            row.error = e.what();
        }
    }
    return rows;
}

std::vector<size_t> detect_jumps(const std::vector<double> &kappa, double factor, double abs_floor) {
    std::vector<size_t> out;
    if (kappa.size() < 3) return out;
    std::vector<double> d(kappa.size() - 1);
    for (size_t i = 0; i + 1 < kappa.size(); ++i) d[i] = std::abs(kappa[i + 1] - kappa[i]);
    for (size_t i = 0; i < d.size(); ++i) {
        double nb = 0;
        if (i > 0) nb = std::max(nb, d[i - 1]);
        if (i + 1 < d.size()) nb = std::max(nb, d[i + 1]);
        if (d[i] > abs_floor && d[i] > factor * nb) out.push_back(i);
    }
    return out;
}

} // namespace plates
