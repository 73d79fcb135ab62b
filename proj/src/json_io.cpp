#include <plates/errors.hpp>
#include <plates/json_io.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

namespace plates {

namespace {

json matrix_json(const Eigen::MatrixXd &m) {
    json out = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        out.push_back(row);
    }
    return out;
}

Eigen::MatrixXd parse_matrix(const json &j, int rows, int cols, const char *what) {
    if (!j.is_array() || static_cast<int>(j.size()) != rows)
        throw Error(ErrorKind::Config, std::string(what) + ": expected " + std::to_string(rows) + " rows");
    Eigen::MatrixXd m(rows, cols);
    for (int r = 0; r < rows; ++r) {
        if (!j[r].is_array() || static_cast<int>(j[r].size()) != cols)
            throw Error(ErrorKind::Config, std::string(what) + ": expected " + std::to_string(cols) + " columns");
        for (int c = 0; c < cols; ++c) m(r, c) = j[r][c].get<double>();
    }
    return m;
}

// Number: rho * I; 6 numbers: Mandel vector; 3x3 array: matrix.
Sym3 parse_sym3(const json &j) {
    Sym3 b;
    if (j.is_number()) {
        const double r = j.get<double>();
        b.mandel << r, r, r, 0, 0, 0;
    } else if (j.is_array() && j.size() == 6 && j[0].is_number()) {
        for (int k = 0; k < 6; ++k) b.mandel[k] = j[k].get<double>();
    } else {
        const Eigen::Matrix3d m = parse_matrix(j, 3, 3, "prestrain");
        if ((m - m.transpose()).norm() > 1e-12 * (1.0 + m.norm()))
            throw Error(ErrorKind::Config, "prestrain matrix must be symmetric");
        b = Sym3::from_matrix(m);
    }
    return b;
}

Stiffness parse_stiffness(const json &j) {
    if (j.contains("mandel")) return Stiffness::general(parse_matrix(j.at("mandel"), 6, 6, "stiffness"));
    return Stiffness::lame(j.value("lambda", 0.0), j.value("mu", 1.0));
}

template <class F>
auto guarded(const char *what, F &&f) {
    try {
        return f();
    } catch (const json::exception &e) {
        throw Error(ErrorKind::Config, std::string(what) + ": " + e.what());
    }
}

} // namespace

void to_json(json &j, const Sym2 &g) { j = {{"c1", g.c1}, {"c2", g.c2}, {"c3", g.c3}}; }

// {"c1", "c2", "c3"}, [c1, c2, c3] or a symmetric 2x2 array.
void from_json(const json &j, Sym2 &g) {
    if (j.is_object()) {
        g = {j.at("c1").get<double>(), j.at("c2").get<double>(), j.at("c3").get<double>()};
        return;
    }
    if (j.is_array() && j.size() == 3 && j[0].is_number()) {
        g = {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
        return;
    }
    const Eigen::Matrix2d m = parse_matrix(j, 2, 2, "symmetric 2x2 matrix");
    if (std::abs(m(0, 1) - m(1, 0)) > 1e-12 * (1.0 + m.norm()))
        throw Error(ErrorKind::Config, "2x2 matrix must be symmetric");
    g = Sym2::from_matrix(m);
}

void to_json(json &j, const Sym3 &b) { j = matrix_json(b.matrix()); }

void to_json(json &j, const CylForm &f) { j = {{"kappa", f.kappa}, {"alpha", f.angle}}; }

void from_json(const json &j, CylForm &f) {
    f.kappa = j.at("kappa").get<double>();
    f.angle = j.contains("alpha") ? j.at("alpha").get<double>() : j.value("angle", 0.0);
}

void to_json(json &j, const Rect &r) { j = json::array({r.x0, r.y0, r.x1, r.y1}); }

void from_json(const json &j, Rect &r) {
    if (!j.is_array() || j.size() != 4) throw Error(ErrorKind::Config, "rect must be [x0, y0, x1, y1]");
    r = {j[0].get<double>(), j[1].get<double>(), j[2].get<double>(), j[3].get<double>()};
    r.validate();
}

void to_json(json &j, const CellGrid &g) { j = json::array({g.n1, g.n2, g.n3}); }

void to_json(json &j, const OrthotropicCoeffs &c) {
    j = {{"q1", c.q1}, {"q2", c.q2}, {"q12", c.q12}, {"q3", c.q3}};
}

void from_json(const json &j, OrthotropicCoeffs &c) {
    c.q1 = j.at("q1").get<double>();
    c.q2 = j.at("q2").get<double>();
    c.q12 = j.value("q12", 0.0);
    c.q3 = j.at("q3").get<double>();
}

// Wall-clock time is logged, not emitted, so output stays reproducible.
void to_json(json &j, const SolveReport &r) {
    j = {{"grid", r.grid}, {"energy", r.energy}, {"residual", r.residual}, {"iterations", r.iterations}};
}

void to_json(json &j, const EffectiveQuantities &eq) {
    j = {{"qhat", matrix_json(eq.qhat)},
         {"bhat", json::array({eq.bhat[0], eq.bhat[1], eq.bhat[2]})},
         {"beff", eq.beff},
         {"beff_coeffs", json::array({eq.beff.c1, eq.beff.c2, eq.beff.c3})},
         {"ires", eq.ires},
         {"alpha", eq.alpha},
         {"beta", eq.beta},
         {"m", json::array({eq.m[0], eq.m[1], eq.m[2]})},
         {"diagnostics", eq.diagnostics}};
    if (eq.beff_projection) j["beff_projection"] = *eq.beff_projection;
}

void to_json(json &j, const LaminateSpec &s) {
    j = {{"theta", s.theta},   {"theta_mu", s.theta_mu}, {"theta_rho", s.theta_rho},
         {"mu1", s.mu1},       {"rho1", s.rho1},         {"reflected", s.reflected}};
}

void to_json(json &j, const LaminateClosedForm &lc) {
    j = {{"coeffs", lc.coeffs},
         {"beff", lc.beff},
         {"beff_coeffs", json::array({lc.beff.c1, lc.beff.c2, lc.beff.c3})},
         {"mu_harmonic", lc.mu_harmonic},
         {"mu_mean", lc.mu_mean}};
    if (lc.mu_gamma) {
        j["mu_gamma"] = {{"value", lc.mu_gamma->value},
                         {"residual", lc.mu_gamma->residual},
                         {"iterations", lc.mu_gamma->iterations},
                         {"n", lc.mu_gamma->n}};
    }
}

void to_json(json &j, const MinimizerSet &s) {
    j = {{"branch", to_string(s.branch)},
         {"detH", s.im.det_h},
         {"gstar", json::array({s.im.gstar[0], s.im.gstar[1]})},
         {"energy", s.energy},
         {"degenerate", s.degenerate},
         {"members", s.members},
         {"intermediates",
          {{"H", matrix_json(s.im.h)},
           {"A", matrix_json(s.im.a)},
           {"Ab", json::array({s.im.ab[0], s.im.ab[1]})},
           {"det_H", s.im.det_h},
           {"det_H_rel", s.im.det_h_rel},
           {"g_star", json::array({s.im.gstar[0], s.im.gstar[1]})}}}};
    if (s.branch == Branch::OneParamFamily) {
        j["q_star"] = json::array({s.qstar[0], s.qstar[1]});
        j["s_star"] = s.sstar;
    }
    if (!s.note.empty()) j["note"] = s.note;
}

void to_json(json &j, const ReportEntry &e) {
    j = {{"kappa", e.form.kappa}, {"alpha", e.form.angle}, {"G", e.g}, {"energy", e.energy}};
}

void to_json(json &j, const Grain &g) {
    j = {{"box", g.box}, {"angle", g.rotation.theta}, {"kappa", g.kappa}};
}

void to_json(json &j, const GrainPlan &p) {
    j = {{"level", p.level},   {"grain_size", p.grain_size}, {"ncols", p.ncols},       {"nrows", p.nrows},
         {"rect", p.rect},     {"error", p.error},           {"coverage", p.coverage}, {"grains", p.grains}};
}

void from_json(const json &j, GrainPlan &p) {
    p.level = j.at("level").get<int>();
    p.grain_size = j.at("grain_size").get<double>();
    p.ncols = j.at("ncols").get<int>();
    p.nrows = j.at("nrows").get<int>();
    p.rect = j.at("rect").get<Rect>();
    p.error = j.value("error", 0.0);
    p.coverage = j.value("coverage", 1.0);
    p.grains.clear();
    for (const json &g : j.at("grains")) {
        Grain grain;
        grain.box = g.at("box").get<Rect>();
        grain.rotation = PlanarRotation{g.at("angle").get<double>()};
        grain.kappa = g.at("kappa").get<double>();
        p.grains.push_back(grain);
    }
    if (p.grains.size() != static_cast<size_t>(p.ncols) * p.nrows || !(p.grain_size > 0.0))
        throw Error(ErrorKind::Config, "grain plan layout does not match its grain list");
}

void to_json(json &j, const OracleResult &r) {
    j = {{"best", r.best},
         {"energy", r.energy},
         {"alpha_step", r.alpha_step},
         {"resolution", r.resolution},
         {"kappa_max", r.kappa_max}};
}

LaminateSpec parse_laminate(const json &j) {
    return guarded("laminate", [&] {
        LaminateSpec s;
        s.theta = j.value("theta", s.theta);
        s.theta_mu = j.value("theta_mu", s.theta_mu);
        s.theta_rho = j.value("theta_rho", s.theta_rho);
        s.mu1 = j.value("mu1", s.mu1);
        s.rho1 = j.value("rho1", s.rho1);
        s.reflected = j.value("reflected", false);
        s.validate();
        return s;
    });
}

RveSpec parse_rve(const json &j) {
    return guarded("rve", [&] {
        if (!j.is_object()) throw Error(ErrorKind::Config, "rve descriptor must be an object");
        const std::string kind = j.value("kind", std::string("homogeneous"));
        const double gamma = j.value("gamma", 1.0);
        RveSpec rve;
        if (kind == "laminate") {
            rve = make_laminate(parse_laminate(j), gamma);
        } else if (kind == "homogeneous") {
            Layer lower, upper;
            lower.top = 0.0;
            lower.stiffness = upper.stiffness = parse_stiffness(j);
            const json none = 0.0;
            const json &pre = j.contains("prestrain") ? j.at("prestrain") : none;
            if (pre.is_object()) {
                upper.prestrain = parse_sym3(pre.at("top"));
                lower.prestrain = parse_sym3(pre.at("bottom"));
            } else {
                upper.prestrain = lower.prestrain = parse_sym3(pre);
            }
            rve = make_layered({lower, upper}, gamma);
            rve.material = MaterialField::constant(upper.stiffness);
        } else if (kind == "layered") {
            std::vector<Layer> layers;
            for (const json &l : j.at("layers")) {
                Layer layer;
                layer.top = l.at("top").get<double>();
                layer.stiffness = parse_stiffness(l);
                layer.prestrain = parse_sym3(l.contains("prestrain") ? l.at("prestrain") : json(0.0));
                layers.push_back(layer);
            }
            rve = make_layered(layers, gamma);
        } else if (kind == "inclusion") {
            InclusionSpec s;
            s.size = j.value("size", s.size);
            const json &m = j.at("matrix"), &i = j.at("inclusion");
            s.matrix = parse_stiffness(m);
            s.inclusion = parse_stiffness(i);
            const json zero = 0.0;
            s.matrix_top = parse_sym3(m.contains("top") ? m.at("top") : zero);
            s.matrix_bottom = parse_sym3(m.contains("bottom") ? m.at("bottom") : zero);
            s.inclusion_top = parse_sym3(i.contains("top") ? i.at("top") : zero);
            s.inclusion_bottom = parse_sym3(i.contains("bottom") ? i.at("bottom") : zero);
            rve = make_inclusion(s, gamma);
        } else {
            throw Error(ErrorKind::Config, "unknown rve kind '" + kind + "'");
        }
        if (j.contains("lattice")) {
            rve.lattice.lambda = parse_matrix(j.at("lattice"), 2, 2, "lattice");
            if (!rve.lattice.is_identity()) rve.laminate.reset();
        }
        rve.validate();
        return rve;
    });
}

ClassifierInput parse_classifier_input(const json &j) {
    return guarded("classifier input", [&] {
        ClassifierInput in;
        in.coeffs = j.get<OrthotropicCoeffs>();
        in.b1 = j.at("b1").get<double>();
        in.b2 = j.at("b2").get<double>();
        return in;
    });
}

SolverConfig parse_solver(const json &j, SolverConfig base) {
    return guarded("solver", [&] {
        if (j.is_null()) return base;
        if (j.contains("grid")) {
            const json &g = j.at("grid");
            if (g.is_number_integer()) {
                base.grid = CellGrid::cube(g.get<int>());
            } else {
                if (!g.is_array() || g.size() != 3) throw Error(ErrorKind::Config, "grid must be N or [n1, n2, n3]");
                base.grid = CellGrid{g[0].get<int>(), g[1].get<int>(), g[2].get<int>()};
            }
        }
        base.cg_rel_tol = j.value("cg_rel_tol", base.cg_rel_tol);
        base.cg_max_iter = j.value("cg_max_iter", base.cg_max_iter);
        base.quadrature_order = j.value("quadrature_order", base.quadrature_order);
        base.reference_kernel = j.value("reference_kernel", base.reference_kernel);
        base.initial_seed = j.value("initial_seed", base.initial_seed);
        base.mu_gamma_n = j.value("mu_gamma_n", base.mu_gamma_n);
        base.validate();
        return base;
    });
}

TargetForm parse_target(const json &j) {
    return guarded("target", [&] {
        const std::string kind = j.value("kind", std::string("constant"));
        const Rect rect = j.contains("rect") ? j.at("rect").get<Rect>() : Rect{};
        const int nx = j.value("nx", 64), ny = j.value("ny", 64);
        if (kind == "constant") return constant_target(rect, nx, ny, j.get<CylForm>());
        if (kind == "halves")
            return halves_target(rect, nx, ny, j.at("left").get<CylForm>(), j.at("right").get<CylForm>());
        if (kind == "cone_strip") return cone_strip_target(rect, nx, ny, j.value("scale", 1.0));
        if (kind == "samples") {
            TargetForm t;
            t.rect = rect;
            t.nx = nx;
            t.ny = ny;
            t.samples = j.at("samples").get<std::vector<Sym2>>();
            t.validate();
            return t;
        }
        throw Error(ErrorKind::Config, "unknown target kind '" + kind + "'");
    });
}

json read_json_file(const std::string &path) {
    std::ifstream file;
    std::istream *in = &std::cin;
    if (path != "-") {
        file.open(path);
        if (!file) throw Error(ErrorKind::Config, "cannot open config file '" + path + "'");
        in = &file;
    }
    try {
        return json::parse(*in);
    } catch (const json::exception &e) {
        throw Error(ErrorKind::Config, "malformed JSON in '" + path + "': " + e.what());
    }
}

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_sweep_csv(const std::vector<SweepRow> &rows, std::ostream &os, const json &header) {
    if (!header.is_null()) os << "# " << header.dump() << '\n';
    os << "theta,theta_mu,theta_rho,regime,branch,kappa,alpha,energy,gamma_star,error\n";
    for (const SweepRow &r : rows) {
        const bool ok = r.branch.has_value();
        os << format_double(r.point.theta) << ',' << format_double(r.point.theta_mu) << ','
           << format_double(r.point.theta_rho) << ',' << r.point.regime.label() << ','
           << (ok ? to_string(*r.branch) : "error") << ',' << (ok ? format_double(r.kappa) : "") << ','
           << (ok ? format_double(r.alpha) : "") << ',' << (ok ? format_double(r.energy) : "") << ','
           << (r.gamma_star ? format_double(*r.gamma_star) : "") << ',';
        // Errors are quoted with inner quotes doubled.
        if (!r.error.empty()) {
            os << '"';
            for (char c : r.error) os << (c == '"' ? "\"\"" : std::string(1, c));
            os << '"';
        }
        os << '\n';
    }
}

} // namespace plates
