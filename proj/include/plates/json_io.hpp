#pragma once

// JSON encoding of inputs and results. Parse errors surface as
// Error(ErrorKind::Config).

#include <plates/shape.hpp>

#include <json.hpp>

#include <iosfwd>
#include <string>

namespace plates {

using nlohmann::json;

void to_json(json &j, const Sym2 &g);
void from_json(const json &j, Sym2 &g);
void to_json(json &j, const Sym3 &b);
void to_json(json &j, const CylForm &f);
void from_json(const json &j, CylForm &f);
void to_json(json &j, const Rect &r);
void from_json(const json &j, Rect &r);
void to_json(json &j, const CellGrid &g);
void to_json(json &j, const OrthotropicCoeffs &c);
void from_json(const json &j, OrthotropicCoeffs &c);
void to_json(json &j, const SolveReport &r);
void to_json(json &j, const EffectiveQuantities &eq);
void to_json(json &j, const LaminateSpec &s);
void to_json(json &j, const LaminateClosedForm &lc);
void to_json(json &j, const MinimizerSet &s);
void to_json(json &j, const ReportEntry &e);
void to_json(json &j, const Grain &g);
void to_json(json &j, const GrainPlan &p);
void from_json(const json &j, GrainPlan &p);
void to_json(json &j, const OracleResult &r);

// {"kind": "homogeneous" | "laminate" | "layered" | "inclusion", ...,
//  "gamma": g, "lattice": [[a, b], [c, d]]}
RveSpec parse_rve(const json &j);
LaminateSpec parse_laminate(const json &j);
// {"q1", "q2", "q12", "q3", "b1", "b2"}
ClassifierInput parse_classifier_input(const json &j);
// Overrides of `base` from {"grid", "cg_rel_tol", "cg_max_iter", ...}.
SolverConfig parse_solver(const json &j, SolverConfig base = {});
// {"kind": "constant" | "halves" | "cone_strip" | "samples", "rect", "nx", "ny", ...}
TargetForm parse_target(const json &j);

// Reads a file (or "-" for stdin); Config on I/O or syntax errors.
json read_json_file(const std::string &path);

// Compact string with 17 significant digits, "nan" / "inf" for non-finite.
std::string format_double(double v);

// Sweep table: theta, theta_mu, theta_rho, regime, branch, kappa, alpha,
// energy, gamma_star, error. Lines starting with '#' carry `header`.
void write_sweep_csv(const std::vector<SweepRow> &rows, std::ostream &os, const json &header = {});

} // namespace plates
