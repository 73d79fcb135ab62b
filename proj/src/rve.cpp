#include <plates/errors.hpp>
#include <plates/log.hpp>
#include <plates/rve.hpp>

#include <cmath>
#include <sstream>

namespace plates {

Stiffness Stiffness::lame(double lambda, double mu) {
    Stiffness s;
    s.isotropic = true;
    s.lambda = lambda;
    s.mu = mu;
    s.c.setZero();
    s.c.topLeftCorner<3, 3>().setConstant(lambda);
    s.c.diagonal().setConstant(2.0 * mu);
    s.c.diagonal().head<3>().array() += lambda;
    return s;
}

Stiffness Stiffness::general(const Mat6 &c) {
    Stiffness s;
    s.c = 0.5 * (c + c.transpose());
    return s;
}

std::pair<double, double> Stiffness::bounds() const {
    if (isotropic) {
        const double a = 2.0 * mu, b = 2.0 * mu + 3.0 * lambda;
        return {std::min(a, b), std::max(a, b)};
    }
    Eigen::SelfAdjointEigenSolver<Mat6> es(c, Eigen::EigenvaluesOnly);
    return {es.eigenvalues()[0], es.eigenvalues()[5]};
}

bool Stiffness::operator==(const Stiffness &o) const {
    return isotropic == o.isotropic && lambda == o.lambda && mu == o.mu && c == o.c;
}

void Lattice::validate() const {
    const double d = lambda.determinant();
    if (!(std::abs(d) > 1e-12 * lambda.squaredNorm()))
        throw Error(ErrorKind::SingularTransform, "lattice matrix is singular");
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(lambda.transpose() * lambda);
    const double lo = es.eigenvalues()[0], hi = es.eigenvalues()[1];
    if (lo < 1.0 / conditioning_bound || hi > conditioning_bound) {
        std::ostringstream msg;
        msg << "lattice eigenvalues of L^T L (" << lo << ", " << hi
            << ") outside [1/C, C] with C = " << conditioning_bound;
        throw Error(ErrorKind::Config, msg.str());
    }
}

bool Lattice::is_unimodular() const {
    for (int i = 0; i < 4; ++i)
        if (std::abs(lambda(i) - std::round(lambda(i))) > 1e-12) return false;
    return std::abs(std::abs(std::round(lambda(0)) * std::round(lambda(3)) -
                             std::round(lambda(1)) * std::round(lambda(2))) - 1.0) < 0.5;
}

Vec2 Lattice::wrap(const Vec2 &y) const {
    if (is_identity()) return {y[0] - std::floor(y[0] + 0.5), y[1] - std::floor(y[1] + 0.5)};
    Vec2 z = lambda.partialPivLu().solve(y);
    z[0] -= std::floor(z[0] + 0.5);
    z[1] -= std::floor(z[1] + 0.5);
    return lambda * z;
}

const char *to_string(FieldKind k) {
    switch (k) {
        case FieldKind::Constant:       return "constant";
        case FieldKind::Laminate:       return "laminate";
        case FieldKind::InPlaneUniform: return "in_plane_uniform";
        case FieldKind::Custom:         return "custom";
    }
    return "custom";
}

MaterialField MaterialField::constant(const Stiffness &s) {
    MaterialField f;
    f.kind = FieldKind::Constant;
    f.eval = [s](double, const Vec2 &) { return s; };
    return f;
}

MaterialField MaterialField::lame(std::function<double(double, const Vec2 &)> lambda,
                                  std::function<double(double, const Vec2 &)> mu,
                                  FieldKind kind) {
    MaterialField f;
    f.kind = kind;
    f.eval = [lambda, mu](double x3, const Vec2 &y) {
        return Stiffness::lame(lambda(x3, y), mu(x3, y));
    };
    return f;
}

PrestrainField PrestrainField::zero() { return constant(Sym3{}); }

PrestrainField PrestrainField::constant(const Sym3 &b) {
    PrestrainField f;
    f.kind = FieldKind::Constant;
    f.eval = [b](double, const Vec2 &) { return b; };
    return f;
}

void LaminateSpec::validate() const {
    std::ostringstream msg;
    if (!(theta >= 0.0 && theta <= 1.0)) msg << "theta must lie in [0,1]; ";
    if (!(theta_mu > 0.0)) msg << "theta_mu must be positive; ";
    if (!(mu1 > 0.0)) msg << "mu1 must be positive; ";
    if (!std::isfinite(theta_rho) || !std::isfinite(rho1)) msg << "prestrain parameters must be finite; ";
    if (!msg.str().empty()) throw Error(ErrorKind::Config, msg.str());
}

void RveSpec::validate() const {
    lattice.validate();
    if (!(gamma > 0.0) || !std::isfinite(gamma))
        throw Error(ErrorKind::Config, "gamma must lie in (0, inf)");
    if (!material.eval || !prestrain.eval)
        throw Error(ErrorKind::Config, "material and prestrain fields must be set");
    if (laminate) laminate->validate();
}

bool RveSpec::in_plane_uniform() const {
    auto uniform = [](FieldKind k) { return k == FieldKind::Constant || k == FieldKind::InPlaneUniform; };
    return uniform(material.kind) && uniform(prestrain.kind);
}

RveSpec make_laminate(const LaminateSpec &spec, double gamma) {
    spec.validate();
    const double half = 0.5 * spec.theta;
    const double mu1 = spec.mu1, mu2 = spec.mu2();
    const double rho1 = spec.rho1, rho2 = spec.rho2();
    const double sign = spec.reflected ? -1.0 : 1.0;

    RveSpec rve;
    rve.gamma = gamma;
    rve.laminate = spec;

    rve.material.kind = FieldKind::Laminate;
    rve.material.eval = [=](double, const Vec2 &y) {
        return Stiffness::lame(0.0, std::abs(y[0]) > half ? mu1 : mu2);
    };

    rve.prestrain.kind = FieldKind::Laminate;
    rve.prestrain.eval = [=](double x3, const Vec2 &y) {
        const double z = sign * x3;
        const double a = std::abs(y[0]);
        double rho = 0.0;
        if (a > half && z > 0.0) rho = rho1;
        else if (a < half && z < 0.0) rho = rho2;
        Sym3 b;
        b.mandel << rho, rho, rho, 0, 0, 0;
        return b;
    };

    Interfaces in;
    if (spec.theta > 0.0 && spec.theta < 1.0) in.y1 = {-half, half};
    rve.material.interfaces = in;
    in.x3 = {0.0};
    rve.prestrain.interfaces = in;
    return rve;
}

RveSpec make_layered(const std::vector<Layer> &layers, double gamma) {
    if (layers.empty()) throw Error(ErrorKind::Config, "layered RVE needs at least one layer");
    double prev = -0.5;
    for (const Layer &l : layers) {
        if (!(l.top > prev)) throw Error(ErrorKind::Config, "layer tops must increase within (-1/2, 1/2]");
        prev = l.top;
    }
    if (std::abs(prev - 0.5) > 1e-12) throw Error(ErrorKind::Config, "the last layer must end at x3 = 1/2");

    auto find = [layers](double x3) -> const Layer & {
        for (const Layer &l : layers)
            if (x3 <= l.top) return l;
        return layers.back();
    };
    Interfaces in;
    for (size_t k = 0; k + 1 < layers.size(); ++k) in.x3.push_back(layers[k].top);

    RveSpec rve;
    rve.gamma = gamma;
    rve.material.kind = FieldKind::InPlaneUniform;
    rve.material.eval = [find](double x3, const Vec2 &) { return find(x3).stiffness; };
    rve.material.interfaces = in;
    rve.prestrain.kind = FieldKind::InPlaneUniform;
    rve.prestrain.eval = [find](double x3, const Vec2 &) { return find(x3).prestrain; };
    rve.prestrain.interfaces = in;
    return rve;
}

RveSpec make_inclusion(const InclusionSpec &spec, double gamma) {
    if (!(spec.size > 0.0 && spec.size < 1.0)) throw Error(ErrorKind::Config, "inclusion size must lie in (0, 1)");
    const double half = 0.5 * spec.size;
    auto inside = [half](const Vec2 &y) { return std::abs(y[0]) < half && std::abs(y[1]) < half; };

    RveSpec rve;
    rve.gamma = gamma;
    rve.material.kind = FieldKind::Custom;
    rve.material.eval = [spec, inside](double, const Vec2 &y) { return inside(y) ? spec.inclusion : spec.matrix; };
    rve.material.interfaces.y1 = {-half, half};
    rve.material.interfaces.y2 = {-half, half};
    rve.prestrain.kind = FieldKind::Custom;
    rve.prestrain.eval = [spec, inside](double x3, const Vec2 &y) {
        if (inside(y)) return x3 > 0.0 ? spec.inclusion_top : spec.inclusion_bottom;
        return x3 > 0.0 ? spec.matrix_top : spec.matrix_bottom;
    };
    rve.prestrain.interfaces = rve.material.interfaces;
    rve.prestrain.interfaces.x3 = {0.0};
    return rve;
}

Stiffness sample(const MaterialField &f, const Lattice &l, double x3, const Vec2 &y) {
    return f.eval(x3, l.wrap(y));
}

Sym3 sample(const PrestrainField &f, const Lattice &l, double x3, const Vec2 &y) {
    return f.eval(x3, l.wrap(y));
}

namespace {

// Interfaces survive a transform only when T maps coordinate axes to axes.
Interfaces map_interfaces(const Interfaces &in, const Eigen::Matrix2d &t) {
    Interfaces out;
    out.x3 = in.x3;
    if (t(0, 1) == 0.0 && t(1, 0) == 0.0) {
        for (double c : in.y1) out.y1.push_back(t(0, 0) * c);
        for (double c : in.y2) out.y2.push_back(t(1, 1) * c);
    } else if (t(0, 0) == 0.0 && t(1, 1) == 0.0) {
        for (double c : in.y1) out.y2.push_back(t(1, 0) * c);
        for (double c : in.y2) out.y1.push_back(t(0, 1) * c);
    } else if (!in.y1.empty() || !in.y2.empty()) {
        log().debug("transform does not preserve axis-aligned interfaces; dropping them");
    }
    return out;
}

FieldKind transformed_kind(FieldKind k) {
    return (k == FieldKind::Laminate) ? FieldKind::Custom : k;
}

} // namespace

RveSpec transform_rve(const RveSpec &rve, const Eigen::Matrix2d &t) {
    const double d = t.determinant();
    if (!(std::abs(d) > 1e-12 * t.squaredNorm()))
        throw Error(ErrorKind::SingularTransform, "transform matrix is singular");
    if (t == Eigen::Matrix2d::Identity()) return rve;

    const Eigen::Matrix2d tinv = t.inverse();
    Eigen::Matrix3d that = Eigen::Matrix3d::Identity();
    that.topLeftCorner<2, 2>() = t;
    const Mat6 p = congruence_operator(that);
    const Mat6 pb = congruence_operator(that.inverse());
    const bool orthogonal = (t.transpose() * t - Eigen::Matrix2d::Identity()).norm() < 1e-14;

    RveSpec out;
    out.gamma = rve.gamma;
    out.lattice = rve.lattice;
    out.lattice.lambda = t * rve.lattice.lambda;

    const Lattice old = rve.lattice;
    const auto meval = rve.material.eval;
    out.material.kind = transformed_kind(rve.material.kind);
    out.material.interfaces = map_interfaces(rve.material.interfaces, t);
    out.material.eval = [=](double x3, const Vec2 &y) {
        Stiffness s = meval(x3, old.wrap(tinv * y));
        if (s.isotropic && orthogonal) return s;
        return Stiffness::general(p.transpose() * s.c * p);
    };

    const auto beval = rve.prestrain.eval;
    out.prestrain.kind = transformed_kind(rve.prestrain.kind);
    out.prestrain.interfaces = map_interfaces(rve.prestrain.interfaces, t);
    out.prestrain.eval = [=](double x3, const Vec2 &y) {
        Sym3 b;
        b.mandel = pb * beval(x3, old.wrap(tinv * y)).mandel;
        return b;
    };
    return out;
}

RveSpec normalize_to_unit_cell(const RveSpec &rve) {
    if (rve.lattice.is_identity()) return rve;
    RveSpec out = transform_rve(rve, rve.lattice.lambda.inverse());
    out.lattice.lambda = Eigen::Matrix2d::Identity(); // exact, not T * Lambda
    return out;
}

std::optional<RveSpec> relabel_lattice(const RveSpec &rve) {
    if (rve.lattice.is_identity()) return rve;
    if (!rve.lattice.is_unimodular() && !rve.in_plane_uniform()) return std::nullopt;
    RveSpec out = rve;
    const Lattice old = rve.lattice;
    const auto meval = rve.material.eval;
    const auto beval = rve.prestrain.eval;
    out.material.eval = [=](double x3, const Vec2 &y) { return meval(x3, old.wrap(y)); };
    out.prestrain.eval = [=](double x3, const Vec2 &y) { return beval(x3, old.wrap(y)); };
    out.lattice.lambda = Eigen::Matrix2d::Identity();
    if (!rve.lattice.is_unimodular()) {
        out.material.interfaces.y1.clear();
        out.material.interfaces.y2.clear();
        out.prestrain.interfaces.y1.clear();
        out.prestrain.interfaces.y2.clear();
    }
    out.laminate.reset();
    return out;
}

bool laminate_aligned(const LaminateSpec &spec, int n, double tol) {
    if (spec.theta == 0.0 || spec.theta == 1.0) return true;
    const double k = n * (1.0 - spec.theta) / 2.0;
    return std::abs(k - std::round(k)) <= tol * n;
}

LaminateSpec snap_laminate(const LaminateSpec &spec, int n) {
    if (laminate_aligned(spec, n)) return spec;
    LaminateSpec out = spec;
    const double k = std::round(n * (1.0 - spec.theta) / 2.0);
    out.theta = 1.0 - 2.0 * k / n;
    log().warn("laminate theta = {} is not representable on {} elements; snapped to {}", spec.theta, n,
               out.theta);
    return out;
}

} // namespace plates
