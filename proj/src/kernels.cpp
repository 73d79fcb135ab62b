#include <plates/errors.hpp>
#include <plates/kernels.hpp>
#include <plates/log.hpp>

#include <cmath>
#include <cstring>
#include <map>
#include <sstream>

namespace plates {

namespace {

constexpr double kInvSqrt2 = 1.0 / kSqrt2;

// Two-point Gauss rule on [0, 1] and the 1D linear shape values there.
const double kGaussT[2] = {0.5 * (1.0 - 1.0 / std::numbers::sqrt3), 0.5 * (1.0 + 1.0 / std::numbers::sqrt3)};
const double kV[2][2] = {{1.0 - kGaussT[0], 1.0 - kGaussT[1]}, {kGaussT[0], kGaussT[1]}};

// Mandel slot of the symmetric pair (c, d), and its weight in the strain.
constexpr int kPairIndex[3][3] = {{0, 5, 4}, {5, 1, 3}, {4, 3, 2}};

inline int local_node(int a1, int a2, int a3) { return a1 + 2 * a2 + 4 * a3; }
inline int local_qp(int q1, int q2, int q3) { return q1 + 2 * q2 + 4 * q3; }

struct ElementIndex {
    int i, j, k;
};

inline ElementIndex split(const CellGrid &g, long e) {
    ElementIndex r;
    r.i = int(e % g.n1);
    r.j = int((e / g.n1) % g.n2);
    r.k = int(e / (long(g.n1) * g.n2));
    return r;
}

inline void element_nodes(const CellGrid &g, long e, long *nodes) {
    const ElementIndex ei = split(g, e);
    for (int a3 = 0; a3 < 2; ++a3)
        for (int a2 = 0; a2 < 2; ++a2)
            for (int a1 = 0; a1 < 2; ++a1)
                nodes[local_node(a1, a2, a3)] =
                    g.node((ei.i + a1) % g.n1, (ei.j + a2) % g.n2, ei.k + a3);
}

inline void stress(const Stiffness &s, const double *e, double *sig) {
    if (s.isotropic) {
        const double tr = s.lambda * (e[0] + e[1] + e[2]);
        const double m2 = 2.0 * s.mu;
        sig[0] = m2 * e[0] + tr;
        sig[1] = m2 * e[1] + tr;
        sig[2] = m2 * e[2] + tr;
        sig[3] = m2 * e[3];
        sig[4] = m2 * e[4];
        sig[5] = m2 * e[5];
        return;
    }
    for (int r = 0; r < 6; ++r) {
        double acc = 0;
        for (int c = 0; c < 6; ++c) acc += s.c(r, c) * e[c];
        sig[r] = acc;
    }
}

// Derivative of local shape function a along axis d at Gauss point q,
// with the x3 derivative already weighted by 1/gamma.
inline double shape_grad(const double inv_h[3], int a, int q, int d) {
    const int a1 = a & 1, a2 = (a >> 1) & 1, a3 = (a >> 2) & 1;
    const int q1 = q & 1, q2 = (q >> 1) & 1, q3 = (q >> 2) & 1;
    const double s1 = a1 ? 1.0 : -1.0, s2 = a2 ? 1.0 : -1.0, s3 = a3 ? 1.0 : -1.0;
    switch (d) {
        case 0: return s1 * inv_h[0] * kV[a2][q2] * kV[a3][q3];
        case 1: return kV[a1][q1] * s2 * inv_h[1] * kV[a3][q3];
        default: return kV[a1][q1] * kV[a2][q2] * s3 * inv_h[2];
    }
}

// Mandel strain column of the shape function (a, component c) at q.
inline void strain_column(const double inv_h[3], int a, int c, int q, double *b) {
    for (int r = 0; r < 6; ++r) b[r] = 0.0;
    for (int d = 0; d < 3; ++d) {
        const double g = shape_grad(inv_h, a, q, d);
        if (d == c) b[c] += g;
        else b[kPairIndex[c][d]] += kInvSqrt2 * g;
    }
}

} // namespace

void CellGrid::validate() const {
    if (n1 < 2 || n2 < 2 || n3 < 2) {
        std::ostringstream msg;
        msg << "grid needs at least 2 elements per axis, got " << n1 << "x" << n2 << "x" << n3;
        throw Error(ErrorKind::Config, msg.str());
    }
}

double CellData::qp_x3(int k, int q3) const { return -0.5 + (k + kGaussT[q3]) * grid.h3(); }

namespace {

void warn_misaligned(const char *what, const std::vector<double> &pos, int n) {
    for (double c : pos) {
        double w = c - std::floor(c + 0.5); // wrap into [-1/2, 1/2)
        const double f = (w + 0.5) * n;
        if (std::abs(f - std::round(f)) > 1e-9)
            log().warn("{} interface at {} does not fall on a grid plane ({} elements)", what, c, n);
    }
}

struct StiffnessKey {
    bool iso;
    std::array<double, 21> v;
    bool operator<(const StiffnessKey &o) const {
        if (iso != o.iso) return iso < o.iso;
        return v < o.v;
    }
};

StiffnessKey key_of(const Stiffness &s) {
    StiffnessKey k{s.isotropic, {}};
    int n = 0;
    if (s.isotropic) {
        k.v[0] = s.lambda;
        k.v[1] = s.mu;
        return k;
    }
    for (int r = 0; r < 6; ++r)
        for (int c = r; c < 6; ++c) k.v[n++] = s.c(r, c);
    return k;
}

} // namespace

std::shared_ptr<const CellData> CellData::build(const RveSpec &rve, const CellGrid &grid) {
    grid.validate();
    rve.validate();
    if (!rve.lattice.is_identity())
        throw Error(ErrorKind::Config, "cell discretization needs a unit-lattice RVE");

    auto data = std::make_shared<CellData>();
    data->grid = grid;
    data->gamma = rve.gamma;

    const auto &in_m = rve.material.interfaces;
    const auto &in_b = rve.prestrain.interfaces;
    warn_misaligned("y1", in_m.y1, grid.n1);
    warn_misaligned("y2", in_m.y2, grid.n2);
    warn_misaligned("x3", in_m.x3, grid.n3);
    warn_misaligned("prestrain y1", in_b.y1, grid.n1);
    warn_misaligned("prestrain y2", in_b.y2, grid.n2);
    warn_misaligned("prestrain x3", in_b.x3, grid.n3);

    const long ne = grid.elements();
    data->qp_material.resize(ne * kQp);
    data->prestrain.assign(ne * kQp * 6, 0.0);

    std::map<StiffnessKey, int> index;
    bool any_prestrain = false;
    double alpha = std::numeric_limits<double>::infinity(), beta = -alpha;
    for (long e = 0; e < ne; ++e) {
        const ElementIndex ei = split(grid, e);
        for (int q = 0; q < kQp; ++q) {
            const int q1 = q & 1, q2 = (q >> 1) & 1, q3 = (q >> 2) & 1;
            const Vec2 y(-0.5 + (ei.i + kGaussT[q1]) * grid.h1(), -0.5 + (ei.j + kGaussT[q2]) * grid.h2());
            const double x3 = data->qp_x3(ei.k, q3);

            const Stiffness s = sample(rve.material, rve.lattice, x3, y);
            auto [it, inserted] = index.emplace(key_of(s), int(data->materials.size()));
            if (inserted) {
                const auto [lo, hi] = s.bounds();
                if (!(lo > 0.0) || (s.isotropic && !(s.mu > 0.0))) {
                    std::ostringstream msg;
                    msg << "stiffness not positive definite at x3 = " << x3 << ", y = (" << y[0] << ", "
                        << y[1] << "), smallest eigenvalue " << lo;
                    throw Error(ErrorKind::IllConditioned, msg.str());
                }
                alpha = std::min(alpha, lo);
                beta = std::max(beta, hi);
                data->materials.push_back(s);
            }
            data->qp_material[e * kQp + q] = it->second;

            const Sym3 b = sample(rve.prestrain, rve.lattice, x3, y);
            for (int r = 0; r < 6; ++r) {
                data->prestrain[(e * kQp + q) * 6 + r] = b.mandel[r];
                any_prestrain = any_prestrain || b.mandel[r] != 0.0;
            }
        }
    }
    if (!any_prestrain) data->prestrain.clear();
    data->alpha = alpha;
    data->beta = beta;
    log().debug("cell data: {} elements, {} distinct materials, alpha {}, beta {}", ne,
                data->materials.size(), alpha, beta);
    return data;
}

CellOperator::CellOperator(std::shared_ptr<const CellData> data, std::vector<Mode> modes)
    : m_data(std::move(data)), m_modes(std::move(modes)) {}

void CellOperator::apply(const double *x, double *y, const double *source) const {
    const CellGrid &g = grid();
    const long ne = g.elements();
    const int nm = num_modes();
    const int stride = 24 + nm;
    m_buffer.resize(ne * stride);
    double *buf = m_buffer.data();

    const double inv_h[3] = {1.0 / g.h1(), 1.0 / g.h2(), 1.0 / (m_data->gamma * g.h3())};
    const double w = g.h1() * g.h2() * g.h3() / kQp;
    const double *sm = x + 3 * g.nodes();
    const CellData &cd = *m_data;

    #pragma omp parallel for schedule(static)
    for (long e = 0; e < ne; ++e) {
        long nodes[8];
        element_nodes(g, e, nodes);
        const ElementIndex ei = split(g, e);

        double ue[3][2][2][2]; // [c][a3][a2][a1]
        for (int a = 0; a < 8; ++a)
            for (int c = 0; c < 3; ++c) ue[c][a >> 2][(a >> 1) & 1][a & 1] = x[3 * nodes[a] + c];

        // Gradient components; d/dy1 does not depend on q1, etc.
        double g1[3][2][2], g2[3][2][2], g3[3][2][2]; // [c][..][..]
        for (int c = 0; c < 3; ++c) {
            double d1[2][2], d2[2][2], d3[2][2];
            for (int s = 0; s < 2; ++s)
                for (int t = 0; t < 2; ++t) {
                    d1[s][t] = (ue[c][t][s][1] - ue[c][t][s][0]) * inv_h[0]; // [a2][a3]
                    d2[s][t] = (ue[c][t][1][s] - ue[c][t][0][s]) * inv_h[1]; // [a1][a3]
                    d3[s][t] = (ue[c][1][t][s] - ue[c][0][t][s]) * inv_h[2]; // [a1][a2]
                }
            for (int p = 0; p < 2; ++p)
                for (int r = 0; r < 2; ++r) {
                    double s1 = 0, s2 = 0, s3 = 0;
                    for (int a = 0; a < 2; ++a)
                        for (int b = 0; b < 2; ++b) {
                            const double vv = kV[a][p] * kV[b][r];
                            s1 += d1[a][b] * vv;
                            s2 += d2[a][b] * vv;
                            s3 += d3[a][b] * vv;
                        }
                    g1[c][p][r] = s1; // [q2][q3]
                    g2[c][p][r] = s2; // [q1][q3]
                    g3[c][p][r] = s3; // [q1][q2]
                }
        }

        double t1[3][2][2] = {}, t2[3][2][2] = {}, t3[3][2][2] = {};
        double *pm = buf + e * stride + 24;
        for (int m = 0; m < nm; ++m) pm[m] = 0.0;

        for (int q3 = 0; q3 < 2; ++q3) {
            const double x3 = cd.qp_x3(ei.k, q3);
            for (int q2 = 0; q2 < 2; ++q2)
                for (int q1 = 0; q1 < 2; ++q1) {
                    const int q = local_qp(q1, q2, q3);
                    double h[3][3];
                    for (int c = 0; c < 3; ++c) {
                        h[c][0] = g1[c][q2][q3];
                        h[c][1] = g2[c][q1][q3];
                        h[c][2] = g3[c][q1][q2];
                    }
                    double eps[6] = {h[0][0], h[1][1], h[2][2], kInvSqrt2 * (h[1][2] + h[2][1]),
                                     kInvSqrt2 * (h[0][2] + h[2][0]), kInvSqrt2 * (h[0][1] + h[1][0])};
                    for (int m = 0; m < nm; ++m)
                        eps[m_modes[m].index] += m_modes[m].times_x3 ? sm[m] * x3 : sm[m];
                    if (source) {
                        const double *src = source + (e * kQp + q) * 6;
                        for (int r = 0; r < 6; ++r) eps[r] += src[r];
                    }
                    double sig[6];
                    stress(cd.materials[cd.qp_material[e * kQp + q]], eps, sig);
                    for (int r = 0; r < 6; ++r) sig[r] *= w;
                    for (int m = 0; m < nm; ++m)
                        pm[m] += m_modes[m].times_x3 ? sig[m_modes[m].index] * x3 : sig[m_modes[m].index];

                    const double s01 = kInvSqrt2 * sig[5], s02 = kInvSqrt2 * sig[4], s12 = kInvSqrt2 * sig[3];
                    const double st[3][3] = {{sig[0], s01, s02}, {s01, sig[1], s12}, {s02, s12, sig[2]}};
                    for (int c = 0; c < 3; ++c) {
                        t1[c][q2][q3] += st[c][0];
                        t2[c][q1][q3] += st[c][1];
                        t3[c][q1][q2] += st[c][2];
                    }
                }
        }

        double *fe = buf + e * stride; // [a][c]
        for (int i = 0; i < 24; ++i) fe[i] = 0.0;
        for (int c = 0; c < 3; ++c)
            for (int a = 0; a < 2; ++a)
                for (int b = 0; b < 2; ++b) {
                    double r1 = 0, r2 = 0, r3 = 0;
                    for (int p = 0; p < 2; ++p)
                        for (int r = 0; r < 2; ++r) {
                            const double vv = kV[a][p] * kV[b][r];
                            r1 += t1[c][p][r] * vv;
                            r2 += t2[c][p][r] * vv;
                            r3 += t3[c][p][r] * vv;
                        }
                    r1 *= inv_h[0];
                    r2 *= inv_h[1];
                    r3 *= inv_h[2];
                    // r1 is indexed [a2=a][a3=b], r2 [a1=a][a3=b], r3 [a1=a][a2=b]
                    fe[3 * local_node(1, a, b) + c] += r1;
                    fe[3 * local_node(0, a, b) + c] -= r1;
                    fe[3 * local_node(a, 1, b) + c] += r2;
                    fe[3 * local_node(a, 0, b) + c] -= r2;
                    fe[3 * local_node(a, b, 1) + c] += r3;
                    fe[3 * local_node(a, b, 0) + c] -= r3;
                }
    }

    // Gather: every node sums its incident elements in a fixed order.
    const long nn = g.nodes();
    #pragma omp parallel for schedule(static)
    for (long n = 0; n < nn; ++n) {
        const int i = int(n % g.n1), j = int((n / g.n1) % g.n2), k = int(n / (long(g.n1) * g.n2));
        double f[3] = {0, 0, 0};
        for (int a3 = 0; a3 < 2; ++a3) {
            const int ke = k - a3;
            if (ke < 0 || ke >= g.n3) continue;
            for (int a2 = 0; a2 < 2; ++a2) {
                const int je = (j - a2 + g.n2) % g.n2;
                for (int a1 = 0; a1 < 2; ++a1) {
                    const int ie = (i - a1 + g.n1) % g.n1;
                    const double *fe = buf + g.element(ie, je, ke) * stride + 3 * local_node(a1, a2, a3);
                    f[0] += fe[0];
                    f[1] += fe[1];
                    f[2] += fe[2];
                }
            }
        }
        y[3 * n] = f[0];
        y[3 * n + 1] = f[1];
        y[3 * n + 2] = f[2];
    }
    for (int m = 0; m < nm; ++m) {
        double acc = 0;
        for (long e = 0; e < ne; ++e) acc += buf[e * stride + 24 + m];
        y[3 * nn + m] = acc;
    }
}

void CellOperator::apply_reference(const double *x, double *y, const double *source) const {
    const CellGrid &g = grid();
    const long ne = g.elements(), nn = g.nodes();
    const int nm = num_modes();
    const double inv_h[3] = {1.0 / g.h1(), 1.0 / g.h2(), 1.0 / (m_data->gamma * g.h3())};
    const double w = g.h1() * g.h2() * g.h3() / kQp;
    const CellData &cd = *m_data;
    std::fill(y, y + num_dofs(), 0.0);

    for (long e = 0; e < ne; ++e) {
        long nodes[8];
        element_nodes(g, e, nodes);
        const ElementIndex ei = split(g, e);
        for (int q = 0; q < kQp; ++q) {
            const double x3 = cd.qp_x3(ei.k, q >> 2);
            double bmat[24][6];
            for (int a = 0; a < 8; ++a)
                for (int c = 0; c < 3; ++c) strain_column(inv_h, a, c, q, bmat[3 * a + c]);

            Vec6 eps = Vec6::Zero();
            for (int a = 0; a < 8; ++a)
                for (int c = 0; c < 3; ++c)
                    for (int r = 0; r < 6; ++r) eps[r] += bmat[3 * a + c][r] * x[3 * nodes[a] + c];
            for (int m = 0; m < nm; ++m)
                eps[m_modes[m].index] += x[3 * nn + m] * (m_modes[m].times_x3 ? x3 : 1.0);
            if (source)
                for (int r = 0; r < 6; ++r) eps[r] += source[(e * kQp + q) * 6 + r];

            const Vec6 sig = w * (cd.materials[cd.qp_material[e * kQp + q]].c * eps);
            for (int a = 0; a < 8; ++a)
                for (int c = 0; c < 3; ++c) {
                    double acc = 0;
                    for (int r = 0; r < 6; ++r) acc += bmat[3 * a + c][r] * sig[r];
                    y[3 * nodes[a] + c] += acc;
                }
            for (int m = 0; m < nm; ++m)
                y[3 * nn + m] += sig[m_modes[m].index] * (m_modes[m].times_x3 ? x3 : 1.0);
        }
    }
}

std::vector<double> CellOperator::diagonal() const {
    const CellGrid &g = grid();
    const long ne = g.elements(), nn = g.nodes();
    const int nm = num_modes();
    const double inv_h[3] = {1.0 / g.h1(), 1.0 / g.h2(), 1.0 / (m_data->gamma * g.h3())};
    const double w = g.h1() * g.h2() * g.h3() / kQp;
    const CellData &cd = *m_data;
    std::vector<double> d(num_dofs(), 0.0);

    for (long e = 0; e < ne; ++e) {
        long nodes[8];
        element_nodes(g, e, nodes);
        const ElementIndex ei = split(g, e);
        for (int q = 0; q < kQp; ++q) {
            const Mat6 &c6 = cd.materials[cd.qp_material[e * kQp + q]].c;
            for (int a = 0; a < 8; ++a)
                for (int c = 0; c < 3; ++c) {
                    double b[6];
                    strain_column(inv_h, a, c, q, b);
                    const Eigen::Map<const Vec6> bv(b);
                    d[3 * nodes[a] + c] += w * bv.dot(c6 * bv);
                }
            const double x3 = cd.qp_x3(ei.k, q >> 2);
            for (int m = 0; m < nm; ++m) {
                const double s = m_modes[m].times_x3 ? x3 * x3 : 1.0;
                d[3 * nn + m] += w * s * c6(m_modes[m].index, m_modes[m].index);
            }
        }
    }
    return d;
}

void CellOperator::element_strains(long e, const double *x, const double *source, Vec6 *strain) const {
    const CellGrid &g = grid();
    const long nn = g.nodes();
    const double inv_h[3] = {1.0 / g.h1(), 1.0 / g.h2(), 1.0 / (m_data->gamma * g.h3())};
    long nodes[8];
    element_nodes(g, e, nodes);
    const ElementIndex ei = split(g, e);
    for (int q = 0; q < kQp; ++q) {
        Vec6 eps = Vec6::Zero();
        if (x) {
            for (int a = 0; a < 8; ++a)
                for (int c = 0; c < 3; ++c) {
                    double b[6];
                    strain_column(inv_h, a, c, q, b);
                    for (int r = 0; r < 6; ++r) eps[r] += b[r] * x[3 * nodes[a] + c];
                }
            const double x3 = m_data->qp_x3(ei.k, q >> 2);
            for (int m = 0; m < num_modes(); ++m)
                eps[m_modes[m].index] += x[3 * nn + m] * (m_modes[m].times_x3 ? x3 : 1.0);
        }
        if (source)
            for (int r = 0; r < 6; ++r) eps[r] += source[(e * kQp + q) * 6 + r];
        strain[q] = eps;
    }
}

void CellOperator::visit(const double *x, const double *source, const QpVisitor &f) const {
    const CellGrid &g = grid();
    const double w = g.h1() * g.h2() * g.h3() / kQp;
    const CellData &cd = *m_data;
    Vec6 strain[kQp];
    for (long e = 0; e < g.elements(); ++e) {
        element_strains(e, x, source, strain);
        const ElementIndex ei = split(g, e);
        for (int q = 0; q < kQp; ++q)
            f(e, q, cd.qp_x3(ei.k, q >> 2), w, strain[q], cd.materials[cd.qp_material[e * kQp + q]]);
    }
}

double CellOperator::energy(const double *x, const double *source) const {
    double acc = 0;
    visit(x, source, [&](long, int, double, double w, const Vec6 &eps, const Stiffness &s) {
        acc += w * s.quadratic(eps);
    });
    return acc;
}

std::pair<double, double> CellOperator::gradient_norms(const double *x) const {
    const CellGrid &g = grid();
    const double inv_h[3] = {1.0 / g.h1(), 1.0 / g.h2(), 1.0 / (m_data->gamma * g.h3())};
    const double w = g.h1() * g.h2() * g.h3() / kQp;
    double full = 0, sym = 0;
    for (long e = 0; e < g.elements(); ++e) {
        long nodes[8];
        element_nodes(g, e, nodes);
        for (int q = 0; q < kQp; ++q) {
            double h[3][3] = {};
            for (int a = 0; a < 8; ++a)
                for (int d = 0; d < 3; ++d) {
                    const double gd = shape_grad(inv_h, a, q, d);
                    for (int c = 0; c < 3; ++c) h[c][d] += gd * x[3 * nodes[a] + c];
                }
            for (int c = 0; c < 3; ++c)
                for (int d = 0; d < 3; ++d) {
                    const double s = 0.5 * (h[c][d] + h[d][c]);
                    full += w * h[c][d] * h[c][d];
                    sym += w * s * s;
                }
        }
    }
    return {full, sym};
}

std::vector<double> CellOperator::bending_source(const Sym2 &g) const {
    const CellGrid &gr = grid();
    const long ne = gr.elements();
    const Vec6 dir = iota(g).mandel;
    std::vector<double> src(ne * kQp * 6);
    for (long e = 0; e < ne; ++e) {
        const ElementIndex ei = split(gr, e);
        for (int q = 0; q < kQp; ++q) {
            const double x3 = m_data->qp_x3(ei.k, q >> 2);
            for (int r = 0; r < 6; ++r) src[(e * kQp + q) * 6 + r] = x3 * dir[r];
        }
    }
    return src;
}

namespace vec {

namespace {
constexpr long kChunk = 4096;
}

double dot(const std::vector<double> &a, const std::vector<double> &b) {
    const long n = long(a.size());
    const long nc = (n + kChunk - 1) / kChunk;
    std::vector<double> part(nc, 0.0);
    #pragma omp parallel for schedule(static)
    for (long c = 0; c < nc; ++c) {
        double s = 0;
        const long hi = std::min(n, (c + 1) * kChunk);
        for (long i = c * kChunk; i < hi; ++i) s += a[i] * b[i];
        part[c] = s;
    }
    double s = 0;
    for (double p : part) s += p;
    return s;
}

void axpy(double a, const std::vector<double> &x, std::vector<double> &y) {
    const long n = long(x.size());
    #pragma omp parallel for schedule(static)
    for (long i = 0; i < n; ++i) y[i] += a * x[i];
}

void xpby(const std::vector<double> &x, double b, std::vector<double> &y) {
    const long n = long(x.size());
    #pragma omp parallel for schedule(static)
    for (long i = 0; i < n; ++i) y[i] = x[i] + b * y[i];
}

} // namespace vec

CgResult conjugate_gradient(const std::function<void(const std::vector<double> &, std::vector<double> &)> &apply,
                            const std::vector<double> &b_in, std::vector<double> &x,
                            const std::vector<double> &inv_diag,
                            const std::function<void(std::vector<double> &)> &project, double rel_tol,
                            int max_iter) {
    const long n = long(b_in.size());
    std::vector<double> b = b_in;
    project(b);
    CgResult res;
    const double bnorm = std::sqrt(vec::dot(b, b));
    if (bnorm == 0.0) {
        std::fill(x.begin(), x.end(), 0.0);
        res.converged = true;
        return res;
    }
    std::vector<double> r(n), z(n), p(n), ap(n);
    apply(x, ap);
    for (long i = 0; i < n; ++i) r[i] = b[i] - ap[i];
    project(r);

    auto precondition = [&] {
        #pragma omp parallel for schedule(static)
        for (long i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
        project(z);
    };
    precondition();
    p = z;
    double rz = vec::dot(r, z);
    double rnorm = std::sqrt(vec::dot(r, r));

    int it = 0;
    while (rnorm > rel_tol * bnorm && it < max_iter) {
        apply(p, ap);
        const double pap = vec::dot(p, ap);
        if (!(pap > 0.0)) break; // breakdown: p in the null space
        const double alpha = rz / pap;
        vec::axpy(alpha, p, x);
        vec::axpy(-alpha, ap, r);
        ++it;
        if (it % 50 == 0) project(r);
        rnorm = std::sqrt(vec::dot(r, r));
        precondition();
        const double rz_new = vec::dot(r, z);
        vec::xpby(z, rz_new / rz, p);
        rz = rz_new;
    }

    // True residual.
    apply(x, ap);
    for (long i = 0; i < n; ++i) r[i] = b[i] - ap[i];
    project(r);
    res.iterations = it;
    res.residual = std::sqrt(vec::dot(r, r)) / bnorm;
    res.converged = res.residual <= 10.0 * rel_tol;
    return res;
}

} // namespace plates
