#include "commands.hpp"

#include <plates/errors.hpp>
#include <plates/log.hpp>

#include <CLI11.hpp>
#include <omp.h>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#ifndef PLATES_VERSION
#define PLATES_VERSION "unknown"
#endif

namespace plates::cli {

namespace {

template <class T>
T value_or(const json &cfg, const char *key, T fallback) {
    try {
        return cfg.is_object() ? cfg.value(key, fallback) : fallback;
    } catch (const json::exception &e) {
        throw Error(ErrorKind::Config, std::string(key) + ": " + e.what());
    }
}

const json &section(const json &cfg, const char *key) {
    static const json empty = json::object();
    return cfg.is_object() && cfg.contains(key) ? cfg.at(key) : (cfg.is_object() ? cfg : empty);
}

// Number, list of numbers, or {"range": [lo, hi], "points": n}.
std::vector<double> axis(const json &cfg, const char *key, const json &fallback) {
    const json &j = cfg.is_object() && cfg.contains(key) ? cfg.at(key) : fallback;
    try {
        if (j.is_number()) return {j.get<double>()};
        if (j.is_array()) return j.get<std::vector<double>>();
        const auto r = j.at("range").get<std::vector<double>>();
        const int n = j.value("points", 2);
        if (r.size() != 2 || n < 1) throw Error(ErrorKind::Config, std::string(key) + ": bad range");
        std::vector<double> out(n);
        for (int i = 0; i < n; ++i) out[i] = n == 1 ? r[0] : r[0] + (r[1] - r[0]) * i / (n - 1);
        return out;
    } catch (const json::exception &e) {
        throw Error(ErrorKind::Config, std::string(key) + ": " + e.what());
    }
}

std::string dump(const json &j) { return j.dump(2) + "\n"; }

} // namespace

json provenance(const std::string &command, const SolverConfig &config, const GlobalFlags &flags,
                const std::optional<GammaRegime> &regime) {
    json p = {{"command", command},
              {"code_version", PLATES_VERSION},
              {"grid", config.grid},
              {"cg_rel_tol", config.cg_rel_tol},
              {"cg_max_iter", config.cg_max_iter},
              {"mu_gamma_n", config.mu_gamma_n},
              {"seed", flags.seed}};
    if (regime) p["regime"] = regime->label();
    return p;
}

SolverConfig solver_config(const json &cfg, const GlobalFlags &flags, SolverConfig base) {
    SolverConfig c = parse_solver(cfg.is_object() && cfg.contains("solver") ? cfg.at("solver") : json(), base);
    if (flags.grid) c.grid = CellGrid::cube(*flags.grid);
    if (flags.tol) c.cg_rel_tol = *flags.tol;
    c.validate();
    return c;
}

GammaRegime regime(const json &cfg, const GlobalFlags &flags, const std::string &fallback) {
    if (flags.regime) return GammaRegime::parse(*flags.regime);
    return GammaRegime::parse(value_or(cfg, "regime", fallback));
}

CommandResult cmd_effective(const json &cfg, const GlobalFlags &flags) {
    const SolverConfig config = solver_config(cfg, flags);
    const json rve_json = cfg.is_object() && cfg.contains("rve") ? cfg.at("rve") : json{{"kind", "homogeneous"}};
    const RveSpec rve = parse_rve(rve_json);
    EffectiveOptions opts;
    opts.with_projection = value_or(cfg, "projection", true);
    const EffectiveQuantities eq = compute_effective(rve, config, opts);
    for (const SolveReport &r : eq.diagnostics)
        log().info("solve: {} iterations, residual {:.3e}, {:.3f} s", r.iterations, r.residual, r.seconds);

    CommandResult out;
    out.document = {{"provenance", provenance("effective", config, flags)}, {"rve", rve_json}, {"effective", eq}};
    try {
        out.document["orthotropic"] = check_orthotropic(eq, value_or(cfg, "orthotropic_tol", 1e-6));
    } catch (const Error &e) {
        out.document["orthotropic"] = nullptr;
        out.document["orthotropic_error"] = e.what();
    }
    return out;
}

CommandResult cmd_laminate(const json &cfg, const GlobalFlags &flags) {
    const SolverConfig config = solver_config(cfg, flags);
    const GammaRegime reg = regime(cfg, flags);
    const LaminateSpec spec = parse_laminate(section(cfg, "laminate"));
    const LaminateClosedForm lc = laminate_closed_form(spec, reg, config);

    CommandResult out;
    out.document = {{"provenance", provenance("laminate", config, flags, reg)},
                    {"laminate", spec},
                    {"closed_form", lc}};

    std::ostringstream csv;
    csv << "theta,theta_mu,theta_rho,mu1,rho1,regime,q1,q2,q12,q3,beff1,beff2\n";
    csv << format_double(spec.theta) << ',' << format_double(spec.theta_mu) << ',' << format_double(spec.theta_rho)
        << ',' << format_double(spec.mu1) << ',' << format_double(spec.rho1) << ',' << reg.label() << ','
        << format_double(lc.coeffs.q1) << ',' << format_double(lc.coeffs.q2) << ',' << format_double(lc.coeffs.q12)
        << ',' << format_double(lc.coeffs.q3) << ',' << format_double(lc.beff.c1) << ','
        << format_double(lc.beff.c2) << '\n';
    out.files.push_back({"laminate.csv", csv.str()});

    if (value_or(cfg, "fem", false)) {
        const double gamma = reg.kind == GammaRegime::Kind::Finite ? reg.gamma : value_or(cfg, "gamma", 1.0);
        const EffectiveQuantities eq = compute_effective(make_laminate(spec, gamma), config);
        const OrthotropicCoeffs fem = check_orthotropic(eq);
        auto rel = [](double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); };
        out.document["fem"] = {{"effective", eq},
                               {"coeffs", fem},
                               {"rel_error_q1", rel(fem.q1, lc.coeffs.q1)},
                               {"rel_error_q2", rel(fem.q2, lc.coeffs.q2)},
                               {"abs_error_beff", (eq.beff - lc.beff).norm()}};
    }
    return out;
}

CommandResult cmd_classify(const json &cfg, const GlobalFlags &flags) {
    CommandResult out;
    const SolverConfig config = solver_config(cfg, flags);
    OracleGrid grid;
    grid.n_alpha = value_or(cfg, "oracle_points", grid.n_alpha);

    const int random = value_or(cfg, "random", 0);
    if (random > 0) {
        const std::uint64_t seed = flags.seed != 0 ? flags.seed : value_or<std::uint64_t>(cfg, "seed", 1);
        const auto inputs = random_classifier_inputs(seed, random);
        std::vector<OracleComparison> cmp(inputs.size());
        std::vector<Branch> branch(inputs.size());
        std::vector<std::string> failure(inputs.size());
        #pragma omp parallel for schedule(dynamic)
        for (size_t k = 0; k < inputs.size(); ++k) {
            try {
                const MinimizerSet set = classify(inputs[k]);
                branch[k] = set.branch;
                cmp[k] = compare_with_oracle(inputs[k], set, grid);
            } catch (const Error &e) {
                failure[k] = e.what();
            }
        }
        std::map<std::string, int> counts;
        int energy_fail = 0, location_fail = 0, errors = 0;
        json disagreements = json::array();
        for (size_t k = 0; k < inputs.size(); ++k) {
            if (!failure[k].empty()) {
                ++errors;
                continue;
            }
            ++counts[to_string(branch[k])];
            if (!cmp[k].energy_ok) ++energy_fail;
            if (!cmp[k].location_ok) ++location_fail;
            if (!cmp[k].energy_ok || !cmp[k].location_ok) {
                disagreements.push_back({{"index", k},
                                         {"branch", to_string(branch[k])},
                                         {"classifier_energy", cmp[k].classifier_energy},
                                         {"oracle_energy", cmp[k].oracle_energy},
                                         {"tolerance", cmp[k].tolerance}});
            }
        }
        out.document = {{"provenance", provenance("classify", config, flags)},
                        {"seed", seed},
                        {"count", random},
                        {"branches", counts},
                        {"energy_disagreements", energy_fail},
                        {"location_disagreements", location_fail},
                        {"errors", errors},
                        {"disagreements", disagreements}};
        out.ok = energy_fail == 0 && errors == 0;
        return out;
    }

    const ClassifierInput in = parse_classifier_input(section(cfg, "input"));
    const MinimizerSet set = classify(in);
    out.document = {{"provenance", provenance("classify", config, flags)},
                    {"input", {{"coeffs", in.coeffs}, {"b1", in.b1}, {"b2", in.b2}}},
                    {"classification", set},
                    {"minimizers", minimizer_report(set, in, value_or(cfg, "family_samples", 33))}};
    if (value_or(cfg, "oracle", false)) {
        const OracleComparison c = compare_with_oracle(in, set, grid);
        out.document["oracle"] = {{"result", c.oracle},
                                  {"energy_ok", c.energy_ok},
                                  {"location_ok", c.location_ok},
                                  {"tolerance", c.tolerance}};
        out.ok = c.energy_ok;
    }
    return out;
}

CommandResult cmd_sweep(const json &cfg, const GlobalFlags &flags) {
    SweepOptions opts;
    opts.config = solver_config(cfg, flags);
    opts.mu1 = value_or(cfg, "mu1", 1.0);
    opts.rho1 = value_or(cfg, "rho1", 1.0);
    opts.gamma_star = value_or(cfg, "gamma_star", false);
    opts.jobs = flags.jobs;
    const GammaRegime reg = regime(cfg, flags);

    const auto thetas = axis(cfg, "theta", 0.5);
    const auto mus = axis(cfg, "theta_mu", 2.0);
    const auto rhos = axis(cfg, "theta_rho", json{{"range", {-2.0, 2.0}}, {"points", 300}});
    std::vector<SweepPoint> points;
    for (double t : thetas)
        for (double m : mus)
            for (double r : rhos) points.push_back({t, m, r, reg});
    const std::vector<SweepRow> rows = sweep(points, opts);

    // Jumps of kappa along theta_rho, per (theta, theta_mu) slice.
    json jumps = json::array();
    int errors = 0;
    for (size_t s = 0; s < rows.size(); s += rhos.size()) {
        std::vector<double> kappa;
        for (size_t k = s; k < s + rhos.size(); ++k) {
            kappa.push_back(rows[k].kappa);
            if (!rows[k].branch) ++errors;
        }
        for (size_t i : detect_jumps(kappa))
            jumps.push_back({{"theta", rows[s].point.theta},
                             {"theta_mu", rows[s].point.theta_mu},
                             {"theta_rho_before", rows[s + i].point.theta_rho},
                             {"theta_rho_after", rows[s + i + 1].point.theta_rho},
                             {"kappa_before", rows[s + i].kappa},
                             {"kappa_after", rows[s + i + 1].kappa}});
    }

    CommandResult out;
    const json prov = provenance("sweep", opts.config, flags, reg);
    out.document = {{"provenance", prov}, {"rows", rows.size()}, {"errors", errors}, {"kappa_jumps", jumps}};
    std::ostringstream csv;
    write_sweep_csv(rows, csv, prov);
    out.text = csv.str();
    out.files.push_back({"sweep.csv", csv.str()});
    return out;
}

namespace {

// One cylinder patch per grain, centred on the grain and lifted into place.
std::string grains_obj(const GrainPlan &plan, int resolution) {
    std::ostringstream os;
    os.precision(17);
    os << "# grain plan, " << plan.grains.size() << " grains\n";
    long offset = 0;
    for (size_t k = 0; k < plan.grains.size(); ++k) {
        const Grain &g = plan.grains[k];
        const Eigen::Vector2d c(0.5 * (g.box.x0 + g.box.x1), 0.5 * (g.box.y0 + g.box.y1));
        const Rect local{g.box.x0 - c[0], g.box.y0 - c[1], g.box.x1 - c[0], g.box.y1 - c[1]};
        const SurfaceMesh m = cylindrical_surface({g.kappa, g.rotation.theta}, local, resolution, resolution);
        os << "o grain_" << k << '\n';
        for (const auto &v : m.vertices) os << "v " << v[0] + c[0] << ' ' << v[1] + c[1] << ' ' << v[2] << '\n';
        for (const auto &n : m.normals) os << "vn " << n[0] << ' ' << n[1] << ' ' << n[2] << '\n';
        for (const auto &q : m.quads) {
            os << 'f';
            for (int idx : q) os << ' ' << offset + idx + 1 << "//" << offset + idx + 1;
            os << '\n';
        }
        offset += static_cast<long>(m.vertices.size());
    }
    return os.str();
}

} // namespace

CommandResult cmd_shape(const json &cfg, const GlobalFlags &flags) {
    const SolverConfig config = solver_config(cfg, flags);
    const GammaRegime reg = regime(cfg, flags);
    const double rho1 = value_or(cfg, "rho1", 1.0);
    const CompositeTemplate tmpl = register_laminate_template(rho1, reg, value_or(cfg, "n_check", 21), config);
    const json target_json = cfg.is_object() && cfg.contains("target")
                                 ? cfg.at("target")
                                 : json{{"kind", "constant"}, {"kappa", 0.75}, {"angle", 0.0}};
    const TargetForm target = parse_target(target_json);
    PlanOptions popts;
    popts.max_level = value_or(cfg, "max_level", -1);
    const double delta = value_or(cfg, "delta", 0.05 * std::max(target.l2_norm(), 1e-12));
    const GrainPlan plan = plan_shape(tmpl, target, delta, popts);
    const double err = verify_plan(tmpl, plan, target);

    CommandResult out;
    out.document = {{"provenance", provenance("shape", config, flags, reg)},
                    {"template", {{"K", {tmpl.k_lo, tmpl.k_hi}}, {"rho1", rho1}, {"checked", tmpl.samples.size()}}},
                    {"target", {{"spec", target_json}, {"l2_norm", target.l2_norm()}}},
                    {"delta", delta},
                    {"verify_error", err},
                    {"plan", plan}};
    out.files.push_back({"shape_plan.json", dump(plan)});
    const int res = value_or(cfg, "mesh_resolution", 8);
    if (plan.grains.size() <= static_cast<size_t>(value_or(cfg, "max_mesh_grains", 4096)))
        out.files.push_back({"shape_grains.obj", grains_obj(plan, res)});
    else
        log().warn("plan has {} grains; OBJ export skipped", plan.grains.size());
    return out;
}

CommandResult cmd_surface(const json &cfg, const GlobalFlags &flags) {
    const CylForm form{value_or(cfg, "kappa", 1.0), value_or(cfg, "angle", 0.0)};
    const Rect rect = cfg.is_object() && cfg.contains("rect") ? cfg.at("rect").get<Rect>() : Rect{};
    const int nx = value_or(cfg, "nx", 64), ny = value_or(cfg, "ny", 64);
    const SurfaceMesh mesh = cylindrical_surface(form, rect, nx, ny);
    const CurvatureCheck curv = discrete_curvature(mesh, form);

    CommandResult out;
    out.document = {{"provenance", provenance("surface", SolverConfig{}, flags)},
                    {"form", form},
                    {"rect", rect},
                    {"resolution", {nx, ny}},
                    {"metric_defect", metric_defect(mesh)},
                    {"curvature_mean", {{curv.mean(0, 0), curv.mean(0, 1)}, {curv.mean(1, 0), curv.mean(1, 1)}}},
                    {"curvature_max_rel_error", curv.max_rel_error}};
    std::ostringstream obj, csv;
    write_obj(mesh, obj);
    write_csv(mesh, csv);
    out.files.push_back({"surface.obj", obj.str()});
    out.files.push_back({"surface.csv", csv.str()});
    return out;
}

CommandResult cmd_selftest(const json &cfg, const GlobalFlags &flags) {
    json checks = json::array();
    bool all = true;
    auto check = [&](const std::string &name, bool pass, const json &detail) {
        checks.push_back({{"name", name}, {"pass", pass}, {"detail", detail}});
        all = all && pass;
    };

    {
        LaminateSpec s;
        s.theta_rho = 2.0;
        const LaminateClosedForm lc = laminate_closed_form(s, GammaRegime::small());
        const bool pass = std::abs(lc.coeffs.q1 - 2.0 / 9.0) < 1e-12 && std::abs(lc.coeffs.q2 - 0.25) < 1e-12 &&
                          std::abs(lc.beff.c1 + 0.75) < 1e-12 && std::abs(lc.beff.c2 + 1.5) < 1e-12;
        check("laminate_spot_values", pass, lc);
    }
    {
        const ClassifierInput in{{1.0, 2.0, 0.0, 1.0}, 2.0, 1.5};
        const MinimizerSet set = classify(in);
        const bool pass = set.branch == Branch::NonAxialPair && std::abs(set.im.gstar[0] - 1.0) < 1e-12 &&
                          std::abs(set.im.gstar[1] - 1.0) < 1e-12;
        check("non_axial_pair", pass, set);
    }
    {
        SolverConfig c = solver_config(cfg, flags);
        if (!flags.grid) c.grid = CellGrid::cube(8);
        const EffectiveQuantities eq = compute_effective(parse_rve({{"kind", "homogeneous"}}), c);
        const double err = (eq.qhat - Eigen::Matrix3d::Identity() / 6.0).norm();
        check("homogeneous_qhat", err < 1e-7, {{"error", err}});
    }
    {
        const SurfaceMesh m = cylindrical_surface({0.3, kPi / 6.0}, Rect{}, 65, 65);
        const double d = metric_defect(m);
        check("surface_metric", d < 1e-5, {{"defect", d}});
    }
    {
        int bad = 0;
        for (const auto &in : random_classifier_inputs(flags.seed != 0 ? flags.seed : 7, 50)) {
            OracleGrid g;
            g.n_alpha = 501;
            if (!compare_with_oracle(in, classify(in), g).energy_ok) ++bad;
        }
        check("oracle_agreement", bad == 0, {{"disagreements", bad}});
    }
    CommandResult out;
    out.document = {{"provenance", provenance("selftest", SolverConfig{}, flags)}, {"checks", checks}};
    out.ok = all;
    return out;
}

int run(int argc, char **argv) {
    CLI::App app{"Homogenized bending of prestrained plates: effective quantities, minimizers, shape plans"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_path, out_dir, regime_flag;
    int grid = 0, jobs = 0;
    double tol = 0;
    std::uint64_t seed = 0;
    app.add_option("--config", config_path, "JSON config file ('-' for stdin)");
    app.add_option("--out", out_dir, "directory for output files");
    app.add_option("--grid", grid, "cell grid elements per axis")->check(CLI::PositiveNumber);
    app.add_option("--tol", tol, "relative CG tolerance")->check(CLI::PositiveNumber);
    app.add_option("--regime", regime_flag, "small | large | gamma=<value>");
    app.add_option("--seed", seed, "seed for randomized runs");
    app.add_option("--jobs", jobs, "worker threads")->check(CLI::NonNegativeNumber);

    using Command = CommandResult (*)(const json &, const GlobalFlags &);
    const std::vector<std::tuple<const char *, const char *, Command>> commands = {
        {"effective", "effective stiffness and prestrain of an RVE", cmd_effective},
        {"laminate", "closed forms for the two-phase laminate", cmd_laminate},
        {"classify", "minimizers of an orthotropic problem", cmd_classify},
        {"sweep", "phase-diagram table over laminate parameters", cmd_sweep},
        {"shape", "grain plan for a target curvature field", cmd_shape},
        {"surface", "cylindrical surface mesh", cmd_surface},
        {"selftest", "quick internal consistency checks", cmd_selftest},
    };
    for (const auto &[name, help, fn] : commands) app.add_subcommand(name, help);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : exit_code(ErrorKind::Config);
    }

    GlobalFlags flags;
    if (app.count("--grid")) flags.grid = grid;
    if (app.count("--tol")) flags.tol = tol;
    if (app.count("--regime")) flags.regime = regime_flag;
    flags.seed = seed;
    flags.jobs = jobs;
    if (jobs > 0) omp_set_num_threads(jobs);

    try {
        const json cfg = config_path.empty() ? json::object() : read_json_file(config_path);
        for (const auto &[name, help, fn] : commands) {
            if (!app.got_subcommand(name)) continue;
            const CommandResult r = fn(cfg, flags);
            if (!out_dir.empty()) {
                std::filesystem::create_directories(out_dir);
                auto write = [&](const std::string &file, const std::string &contents) {
                    std::ofstream f(std::filesystem::path(out_dir) / file, std::ios::binary);
                    if (!f) throw Error(ErrorKind::Config, "cannot write " + file + " in " + out_dir);
                    f << contents;
                };
                for (const OutputFile &f : r.files) write(f.name, f.contents);
                write(std::string(name) + ".json", dump(r.document));
                std::cout << dump(r.document);
            } else {
                std::cout << (r.text ? *r.text : dump(r.document));
            }
            if (!r.ok) {
                log().error("{}: checks failed", name);
                return exit_code(ErrorKind::DomainError);
            }
        }
        return 0;
    } catch (const Error &e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_code(e.kind());
    } catch (const std::exception &e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return 1;
    }
}

} // namespace plates::cli
