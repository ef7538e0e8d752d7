#include "mfto/meanfield.hpp"

#include <cmath>

#include "mfto/spectral.hpp"

namespace mfto {

namespace {

// Central differences of a node array along one grid axis; wraps on periodic
// axes, one-sided stencils at the ends otherwise.
Eigen::VectorXd grid_derivative(const TensorGrid& g, const Eigen::VectorXd& vals, int axis) {
    const int n = g.axis(axis).cells;
    const double dx = g.axis(axis).dx();
    const bool periodic = g.axis(axis).boundary == Boundary::periodic;
    Eigen::VectorXd out(vals.size());
    std::vector<int> idx;
    for (std::int64_t f = 0; f < g.size(); ++f) {
        g.unflatten(f, idx);
        const int i = idx[static_cast<std::size_t>(axis)];
        auto at = [&](int ii) {
            std::vector<int> jdx = idx;
            jdx[static_cast<std::size_t>(axis)] = ii;
            return vals[g.flatten(jdx)];
        };
        if (periodic) {
            out[f] = (at((i + 1) % n) - at((i - 1 + n) % n)) / (2.0 * dx);
        } else if (i == 0) {
            out[f] = n > 1 ? (at(1) - at(0)) / dx : 0.0;
        } else if (i == n - 1) {
            out[f] = (at(n - 1) - at(n - 2)) / dx;
        } else {
            out[f] = (at(i + 1) - at(i - 1)) / (2.0 * dx);
        }
    }
    return out;
}

// Odometer over the flattened q-cells of a set of subsystems.
class JointCells {
public:
    explicit JointCells(std::vector<std::int64_t> sizes) : sizes_(std::move(sizes)), idx_(sizes_.size(), 0) {
        done_ = sizes_.empty();
        for (auto s : sizes_)
            if (s == 0) done_ = true;
    }
    bool done() const { return done_; }
    const std::vector<std::int64_t>& idx() const { return idx_; }
    void advance() {
        for (std::size_t k = 0; k < sizes_.size(); ++k) {
            if (++idx_[k] < sizes_[k]) return;
            idx_[k] = 0;
        }
        done_ = true;
    }

private:
    std::vector<std::int64_t> sizes_;
    std::vector<std::int64_t> idx_;
    bool done_ = false;
};

Eigen::VectorXd domain_midpoint(const HamiltonianModel& model) {
    Eigen::VectorXd q(model.dim());
    for (int k = 0; k < model.dim(); ++k) {
        const auto& c = model.domain()[static_cast<std::size_t>(k)];
        q[k] = 0.5 * (c.lo + c.hi);
    }
    return q;
}

}  // namespace

// ---------------------------------------------------------------------------
// moments

SubsystemMoments moments_from_density(const SubsystemDensity& u) {
    const int di = u.qdim;
    std::vector<GridAxis> qaxes(u.grid.axes().begin(), u.grid.axes().begin() + di);
    TensorGrid qgrid(qaxes);
    const std::int64_t nq = qgrid.size();
    SubsystemMoments m;
    m.subsystem = u.subsystem;
    m.qgrid = qgrid;
    m.w = Eigen::VectorXd::Zero(nq);
    m.p1.assign(static_cast<std::size_t>(nq), Eigen::VectorXd::Zero(di));
    m.p2.assign(static_cast<std::size_t>(nq), Eigen::MatrixXd::Zero(di, di));
    const double vol = u.grid.cell_volume();
    std::vector<int> idx;
    std::vector<int> qidx(static_cast<std::size_t>(di));
    for (std::int64_t f = 0; f < u.grid.size(); ++f) {
        const double mass = u.values[f] * vol;
        if (mass == 0.0) continue;
        u.grid.unflatten(f, idx);
        for (int k = 0; k < di; ++k) qidx[static_cast<std::size_t>(k)] = idx[static_cast<std::size_t>(k)];
        const std::int64_t a = qgrid.flatten(qidx);
        Eigen::VectorXd p(di);
        for (int k = 0; k < di; ++k)
            p[k] = u.grid.axis(di + k).center(idx[static_cast<std::size_t>(di + k)]);
        m.w[a] += mass;
        m.p1[static_cast<std::size_t>(a)] += mass * p;
        m.p2[static_cast<std::size_t>(a)] += mass * p * p.transpose();
    }
    return m;
}

SubsystemMoments moments_from_factor(const SpatialFactor& w,
                                     const std::vector<Eigen::MatrixXd>& covariance_per_cell) {
    const std::int64_t nq = w.qgrid.size();
    if (static_cast<std::int64_t>(covariance_per_cell.size()) != nq)
        throw LayoutError("moments_from_factor: covariance table size mismatch");
    const int di = w.qgrid.ndim();
    SubsystemMoments m;
    m.subsystem = w.subsystem;
    m.qgrid = w.qgrid;
    m.w = w.values * w.qgrid.cell_volume();
    m.p1.assign(static_cast<std::size_t>(nq), Eigen::VectorXd::Zero(di));
    m.p2.resize(static_cast<std::size_t>(nq));
    for (std::int64_t a = 0; a < nq; ++a)
        m.p2[static_cast<std::size_t>(a)] = m.w[a] * covariance_per_cell[static_cast<std::size_t>(a)];
    return m;
}

std::vector<Eigen::MatrixXd> averaged_mass_block(const HamiltonianModel& model,
                                                 const SubsystemLayout& layout,
                                                 const std::vector<SpatialFactor>& factors, int j,
                                                 const TensorGrid& eval_grid) {
    const auto& bj = layout.block(j);
    const std::int64_t n = eval_grid.size();
    std::vector<Eigen::MatrixXd> out(static_cast<std::size_t>(n));
    if (model.constant_mass()) {
        Eigen::MatrixXd M = model.mass_matrix(domain_midpoint(model));
        for (std::int64_t t = 0; t < n; ++t) out[static_cast<std::size_t>(t)] = M.block(bj.offset, bj.offset, bj.size, bj.size);
        return out;
    }
    // masses of the other subsystems' cells
    std::vector<int> others;
    std::vector<std::int64_t> sizes;
    for (int s = 0; s < layout.count(); ++s)
        if (s != j) {
            others.push_back(s);
            sizes.push_back(factors[static_cast<std::size_t>(s)].qgrid.size());
        }
    Eigen::VectorXd q = domain_midpoint(model);
    for (std::int64_t t = 0; t < n; ++t) {
        Eigen::VectorXd cj = eval_grid.center(t);
        q.segment(bj.offset, bj.size) = cj;
        Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(bj.size, bj.size);
        double wtot = 0.0;
        for (JointCells jc(sizes); !jc.done(); jc.advance()) {
            double wgt = 1.0;
            for (std::size_t s = 0; s < others.size(); ++s) {
                const auto& f = factors[static_cast<std::size_t>(others[s])];
                wgt *= f.values[jc.idx()[s]] * f.qgrid.cell_volume();
            }
            if (wgt == 0.0) continue;
            for (std::size_t s = 0; s < others.size(); ++s) {
                const auto& bs = layout.block(others[s]);
                q.segment(bs.offset, bs.size) =
                    factors[static_cast<std::size_t>(others[s])].qgrid.center(jc.idx()[s]);
            }
            acc += wgt * model.mass_matrix(q).block(bj.offset, bj.offset, bj.size, bj.size);
            wtot += wgt;
        }
        if (wtot <= 0.0) throw EvaluationError("averaged_mass_block: other factors carry no mass");
        out[static_cast<std::size_t>(t)] = acc / wtot;
    }
    return out;
}

// ---------------------------------------------------------------------------
// EffectiveHamiltonianTable

EffectiveHamiltonianTable::EffectiveHamiltonianTable(int subsystem, TensorGrid qgrid, int di)
    : subsystem_(subsystem), di_(di), qgrid_(std::move(qgrid)) {
    const std::int64_t n = qgrid_.size();
    A_.assign(static_cast<std::size_t>(di_ * di_), Eigen::VectorXd::Zero(n));
    b_.assign(static_cast<std::size_t>(di_), Eigen::VectorXd::Zero(n));
    c_ = Eigen::VectorXd::Zero(n);
}

void EffectiveHamiltonianTable::set_node(std::int64_t node, const Eigen::MatrixXd& A,
                                         const Eigen::VectorXd& b, double c) {
    for (int r = 0; r < di_; ++r)
        for (int s = 0; s < di_; ++s) A_[static_cast<std::size_t>(r * di_ + s)][node] = A(r, s);
    for (int r = 0; r < di_; ++r) b_[static_cast<std::size_t>(r)][node] = b[r];
    c_[node] = c;
}

void EffectiveHamiltonianTable::finalize() {
    for (std::int64_t t = 0; t < qgrid_.size(); ++t) {
        Eigen::MatrixXd A(di_, di_);
        for (int r = 0; r < di_; ++r)
            for (int s = 0; s < di_; ++s) A(r, s) = A_[static_cast<std::size_t>(r * di_ + s)][t];
        Eigen::LLT<Eigen::MatrixXd> llt(A);
        if (llt.info() != Eigen::Success)
            throw ModelConsistencyError("effective Hamiltonian: non-SPD inverse inertia at node " +
                                        std::to_string(t));
    }
    dA_.resize(static_cast<std::size_t>(qgrid_.ndim()));
    db_.resize(static_cast<std::size_t>(qgrid_.ndim()));
    dc_.resize(static_cast<std::size_t>(qgrid_.ndim()));
    for (int k = 0; k < qgrid_.ndim(); ++k) {
        auto& dAk = dA_[static_cast<std::size_t>(k)];
        auto& dbk = db_[static_cast<std::size_t>(k)];
        dAk.resize(A_.size());
        dbk.resize(b_.size());
        for (std::size_t e = 0; e < A_.size(); ++e) dAk[e] = grid_derivative(qgrid_, A_[e], k);
        for (std::size_t e = 0; e < b_.size(); ++e) dbk[e] = grid_derivative(qgrid_, b_[e], k);
        dc_[static_cast<std::size_t>(k)] = grid_derivative(qgrid_, c_, k);
    }
    finalized_ = true;
}

Eigen::MatrixXd EffectiveHamiltonianTable::interpolate_A(const Eigen::VectorXd& qi,
                                                         OutOfRange policy) const {
    Eigen::MatrixXd A(di_, di_);
    for (int r = 0; r < di_; ++r)
        for (int s = 0; s < di_; ++s)
            A(r, s) = qgrid_.interpolate(A_[static_cast<std::size_t>(r * di_ + s)], qi, policy);
    return A;
}

Eigen::VectorXd EffectiveHamiltonianTable::interpolate_b(const Eigen::VectorXd& qi,
                                                         OutOfRange policy) const {
    Eigen::VectorXd b(di_);
    for (int r = 0; r < di_; ++r) b[r] = qgrid_.interpolate(b_[static_cast<std::size_t>(r)], qi, policy);
    return b;
}

double EffectiveHamiltonianTable::interpolate_c(const Eigen::VectorXd& qi, OutOfRange policy) const {
    return qgrid_.interpolate(c_, qi, policy);
}

double EffectiveHamiltonianTable::hamiltonian(const Eigen::VectorXd& z, OutOfRange policy) const {
    Eigen::VectorXd q = z.head(di_), p = z.tail(di_);
    return 0.5 * p.dot(interpolate_A(q, policy) * p) + interpolate_b(q, policy).dot(p) +
           interpolate_c(q, policy);
}

Eigen::VectorXd EffectiveHamiltonianTable::field(const Eigen::VectorXd& z, OutOfRange policy) const {
    if (!finalized_) throw EvaluationError("effective Hamiltonian table not finalized");
    Eigen::VectorXd q = z.head(di_), p = z.tail(di_);
    Eigen::VectorXd f(2 * di_);
    f.head(di_) = interpolate_A(q, policy) * p + interpolate_b(q, policy);
    for (int k = 0; k < di_; ++k) {
        double acc = qgrid_.interpolate(dc_[static_cast<std::size_t>(k)], q, policy);
        for (int r = 0; r < di_; ++r) {
            acc += qgrid_.interpolate(db_[static_cast<std::size_t>(k)][static_cast<std::size_t>(r)], q, policy) * p[r];
            for (int s = 0; s < di_; ++s)
                acc += 0.5 * p[r] * p[s] *
                       qgrid_.interpolate(dA_[static_cast<std::size_t>(k)][static_cast<std::size_t>(r * di_ + s)], q, policy);
        }
        f[di_ + k] = -acc;
    }
    return f;
}

Eigen::VectorXd mean_field_vector_field(const EffectiveHamiltonianTable& table, const Eigen::VectorXd& z) {
    return table.field(z, OutOfRange::error);
}

// ---------------------------------------------------------------------------
// effective Hamiltonian assembly

EffectiveHamiltonianTable effective_hamiltonian(const HamiltonianModel& model,
                                                const SubsystemLayout& layout,
                                                const std::vector<SubsystemMoments>& moments, int i,
                                                const TensorGrid& qgrid_i) {
    const int N = layout.count();
    const auto& bi = layout.block(i);
    const int di = bi.size;
    EffectiveHamiltonianTable table(i, qgrid_i, di);

    for (int j = 0; j < N; ++j) {
        if (j == i) continue;
        const double mass = moments[static_cast<std::size_t>(j)].w.sum();
        if (std::abs(mass - 1.0) > 1e-6)
            throw EvaluationError("effective_hamiltonian: subsystem " + std::to_string(j) +
                                  " density not normalized (mass " + std::to_string(mass) + ")");
    }

    std::vector<int> others;
    std::vector<std::int64_t> sizes;
    for (int s = 0; s < N; ++s)
        if (s != i) {
            others.push_back(s);
            sizes.push_back(moments[static_cast<std::size_t>(s)].qgrid.size());
        }

    const ProductInteraction* inter = model.interaction_decomposition();
    // Scalar potential moments <g_{t,j}> for the decomposed path.
    std::vector<std::vector<double>> term_moments;
    if (inter) {
        for (const auto& term : inter->terms) {
            std::vector<double> mom(static_cast<std::size_t>(N), 1.0);
            for (int j = 0; j < N; ++j) {
                if (j == i) continue;
                const auto& g = term.factors.size() > static_cast<std::size_t>(j)
                                    ? term.factors[static_cast<std::size_t>(j)]
                                    : std::function<double(const Eigen::VectorXd&)>();
                if (!g) continue;
                const auto& mj = moments[static_cast<std::size_t>(j)];
                double acc = 0.0;
                for (std::int64_t a = 0; a < mj.qgrid.size(); ++a)
                    acc += mj.w[a] * g(mj.qgrid.center(a));
                mom[static_cast<std::size_t>(j)] = acc;
            }
            term_moments.push_back(std::move(mom));
        }
    }

    const bool const_mass = model.constant_mass();
    Eigen::MatrixXd Minv_const;
    if (const_mass) Minv_const = model.mass_matrix(domain_midpoint(model)).inverse();

    // Totals over the other subsystems, used on the constant-mass fast path.
    std::vector<Eigen::VectorXd> p1tot(static_cast<std::size_t>(N));
    std::vector<Eigen::MatrixXd> p2tot(static_cast<std::size_t>(N));
    for (int s : others) {
        const auto& ms = moments[static_cast<std::size_t>(s)];
        Eigen::VectorXd p1 = Eigen::VectorXd::Zero(layout.block(s).size);
        Eigen::MatrixXd p2 = Eigen::MatrixXd::Zero(layout.block(s).size, layout.block(s).size);
        for (std::int64_t a = 0; a < ms.qgrid.size(); ++a) {
            p1 += ms.p1[static_cast<std::size_t>(a)];
            p2 += ms.p2[static_cast<std::size_t>(a)];
        }
        p1tot[static_cast<std::size_t>(s)] = p1;
        p2tot[static_cast<std::size_t>(s)] = p2;
    }

    Eigen::VectorXd q = domain_midpoint(model);
    for (std::int64_t t = 0; t < qgrid_i.size(); ++t) {
        const Eigen::VectorXd ci = qgrid_i.center(t);
        q.segment(bi.offset, di) = ci;

        Eigen::MatrixXd A = Eigen::MatrixXd::Zero(di, di);
        Eigen::VectorXd b = Eigen::VectorXd::Zero(di);
        double ckin = 0.0, cpot = 0.0;

        if (const_mass) {
            A = Minv_const.block(bi.offset, bi.offset, di, di);
            for (int j : others) {
                const auto& bj = layout.block(j);
                b += Minv_const.block(bi.offset, bj.offset, di, bj.size) * p1tot[static_cast<std::size_t>(j)];
                ckin += 0.5 * (Minv_const.block(bj.offset, bj.offset, bj.size, bj.size) *
                               p2tot[static_cast<std::size_t>(j)])
                                  .trace();
                for (int l : others) {
                    if (l == j) continue;
                    const auto& bl = layout.block(l);
                    ckin += 0.5 * p1tot[static_cast<std::size_t>(j)].dot(
                                      Minv_const.block(bj.offset, bl.offset, bj.size, bl.size) *
                                      p1tot[static_cast<std::size_t>(l)]);
                }
            }
        }

        const bool need_joint = !const_mass || !inter;
        if (need_joint) {
            for (JointCells jc(sizes); !jc.done(); jc.advance()) {
                double wgt = 1.0;
                for (std::size_t s = 0; s < others.size(); ++s)
                    wgt *= moments[static_cast<std::size_t>(others[s])].w[jc.idx()[s]];
                if (wgt == 0.0) continue;
                for (std::size_t s = 0; s < others.size(); ++s) {
                    const auto& bs = layout.block(others[s]);
                    q.segment(bs.offset, bs.size) =
                        moments[static_cast<std::size_t>(others[s])].qgrid.center(jc.idx()[s]);
                }
                if (!inter) cpot += wgt * model.potential(q);
                if (!const_mass) {
                    Eigen::MatrixXd Minv = model.mass_matrix(q).inverse();
                    A += wgt * Minv.block(bi.offset, bi.offset, di, di);
                    for (std::size_t s = 0; s < others.size(); ++s) {
                        const int j = others[s];
                        const auto& bj = layout.block(j);
                        const auto& mj = moments[static_cast<std::size_t>(j)];
                        const double wj = mj.w[jc.idx()[s]];
                        const Eigen::VectorXd pj = mj.p1[static_cast<std::size_t>(jc.idx()[s])] / wj;
                        const Eigen::MatrixXd pj2 = mj.p2[static_cast<std::size_t>(jc.idx()[s])] / wj;
                        b += wgt * Minv.block(bi.offset, bj.offset, di, bj.size) * pj;
                        ckin += 0.5 * wgt *
                                (Minv.block(bj.offset, bj.offset, bj.size, bj.size) * pj2).trace();
                        for (std::size_t s2 = 0; s2 < others.size(); ++s2) {
                            if (s2 == s) continue;
                            const int l = others[s2];
                            const auto& bl = layout.block(l);
                            const auto& ml = moments[static_cast<std::size_t>(l)];
                            const Eigen::VectorXd pl =
                                ml.p1[static_cast<std::size_t>(jc.idx()[s2])] / ml.w[jc.idx()[s2]];
                            ckin += 0.5 * wgt *
                                    pj.dot(Minv.block(bj.offset, bl.offset, bj.size, bl.size) * pl);
                        }
                    }
                }
            }
        }

        if (inter) {
            for (std::size_t tix = 0; tix < inter->terms.size(); ++tix) {
                const auto& term = inter->terms[tix];
                double v = term.coeff;
                const auto& gi = term.factors.size() > static_cast<std::size_t>(i)
                                     ? term.factors[static_cast<std::size_t>(i)]
                                     : std::function<double(const Eigen::VectorXd&)>();
                if (gi) v *= gi(ci);
                for (int j : others) v *= term_moments[tix][static_cast<std::size_t>(j)];
                cpot += v;
            }
        }

        table.set_node(t, 0.5 * (A + A.transpose()), b, ckin + cpot);
    }
    table.finalize();
    return table;
}

// ---------------------------------------------------------------------------
// marginals and lifts

SubsystemDensity reduce_marginal(const TensorGrid& full_grid, const Eigen::VectorXd& values,
                                 const SubsystemLayout& layout, int i) {
    const int d = layout.dim();
    if (full_grid.ndim() != 2 * d) throw LayoutError("reduce_marginal: full grid must have 2d axes");
    const auto& bi = layout.block(i);
    std::vector<GridAxis> axes;
    for (int k = 0; k < bi.size; ++k) axes.push_back(full_grid.axis(bi.offset + k));
    for (int k = 0; k < bi.size; ++k) axes.push_back(full_grid.axis(d + bi.offset + k));
    TensorGrid sub(axes);

    SubsystemDensity out;
    out.subsystem = i;
    out.qdim = bi.size;
    out.grid = sub;
    out.values = Eigen::VectorXd::Zero(sub.size());
    const double vol_hat = full_grid.cell_volume() / sub.cell_volume();

    std::vector<int> idx;
    std::vector<int> sidx(static_cast<std::size_t>(2 * bi.size));
    for (std::int64_t f = 0; f < full_grid.size(); ++f) {
        if (values[f] == 0.0) continue;
        full_grid.unflatten(f, idx);
        for (int k = 0; k < bi.size; ++k) {
            sidx[static_cast<std::size_t>(k)] = idx[static_cast<std::size_t>(bi.offset + k)];
            sidx[static_cast<std::size_t>(bi.size + k)] = idx[static_cast<std::size_t>(d + bi.offset + k)];
        }
        out.values[sub.flatten(sidx)] += values[f] * vol_hat;
    }
    return out;
}

SubsystemDensity lift_factor(const SpatialFactor& w, const TensorGrid& pgrid,
                             const std::vector<Eigen::MatrixXd>& covariance_per_cell) {
    const int di = w.qgrid.ndim();
    if (pgrid.ndim() != di) throw LayoutError("lift_factor: momentum grid dimension mismatch");
    std::vector<GridAxis> axes = w.qgrid.axes();
    for (const auto& a : pgrid.axes()) axes.push_back(a);
    SubsystemDensity u;
    u.subsystem = w.subsystem;
    u.qdim = di;
    u.grid = TensorGrid(axes);
    u.values.resize(u.grid.size());

    std::vector<Eigen::MatrixXd> prec(covariance_per_cell.size());
    std::vector<double> norm(covariance_per_cell.size());
    const double two_pi = 6.283185307179586476925286766559;
    for (std::size_t a = 0; a < covariance_per_cell.size(); ++a) {
        prec[a] = covariance_per_cell[a].inverse();
        norm[a] = 1.0 / std::sqrt(std::pow(two_pi, di) * covariance_per_cell[a].determinant());
    }

    std::vector<int> idx;
    std::vector<int> qidx(static_cast<std::size_t>(di));
    Eigen::VectorXd p(di);
    for (std::int64_t f = 0; f < u.grid.size(); ++f) {
        u.grid.unflatten(f, idx);
        for (int k = 0; k < di; ++k) qidx[static_cast<std::size_t>(k)] = idx[static_cast<std::size_t>(k)];
        const std::int64_t a = w.qgrid.flatten(qidx);
        for (int k = 0; k < di; ++k)
            p[k] = u.grid.axis(di + k).center(idx[static_cast<std::size_t>(di + k)]);
        u.values[f] = w.values[a] * norm[static_cast<std::size_t>(a)] *
                      std::exp(-0.5 * p.dot(prec[static_cast<std::size_t>(a)] * p));
    }
    u.normalize();
    return u;
}

TensorGrid make_momentum_grid(const HamiltonianModel& model, const SubsystemLayout& layout, int i,
                              double beta, int cells_per_dim, double n_sigma) {
    const auto& bi = layout.block(i);
    // scan the configuration domain for the stiffest thermal block covariance
    const int scan = 8;
    double sigma_max = 0.0;
    std::vector<int> idx(static_cast<std::size_t>(model.dim()), 0);
    std::vector<std::int64_t> sizes(static_cast<std::size_t>(model.dim()), scan);
    Eigen::VectorXd q(model.dim());
    for (JointCells jc({sizes.begin(), sizes.end()}); !jc.done(); jc.advance()) {
        for (int k = 0; k < model.dim(); ++k) {
            const auto& c = model.domain()[static_cast<std::size_t>(k)];
            q[k] = c.lo + (jc.idx()[static_cast<std::size_t>(k)] + 0.5) * (c.hi - c.lo) / scan;
        }
        Eigen::MatrixXd blk = model.mass_matrix(q).block(bi.offset, bi.offset, bi.size, bi.size);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(blk, Eigen::EigenvaluesOnly);
        sigma_max = std::max(sigma_max, std::sqrt(es.eigenvalues().maxCoeff() / beta));
    }
    std::vector<GridAxis> axes;
    for (int k = 0; k < bi.size; ++k)
        axes.push_back({-n_sigma * sigma_max, n_sigma * sigma_max, cells_per_dim, Boundary::truncated});
    return TensorGrid(axes);
}

// ---------------------------------------------------------------------------
// transport

std::vector<SubsystemDensity> evolve_mean_field(const HamiltonianModel& model,
                                                const SubsystemLayout& layout,
                                                const std::vector<SubsystemDensity>& u0,
                                                const IntegratorSpec& spec, CouplingMode mode,
                                                int substeps, EvolveDiagnostics* diag) {
    const int N = layout.count();
    for (const auto& u : u0)
        if (std::abs(u.mass() - 1.0) > 1e-3)
            throw EvaluationError("evolve_mean_field: initial density not normalized");
    if (mode == CouplingMode::frozen) substeps = 1;
    if (substeps < 1) throw ConfigError("evolve_mean_field: substeps must be >= 1");

    std::vector<SubsystemDensity> u = u0;
    if (diag) {
        diag->mass_drift.assign(static_cast<std::size_t>(N), 0.0);
        diag->renormalized = false;
    }

    const double dt_sub = spec.T / substeps;
    const int steps_per = std::max(1, (spec.steps + substeps - 1) / substeps);

    for (int s = 0; s < substeps; ++s) {
        std::vector<SubsystemMoments> moments;
        const auto& source = (mode == CouplingMode::frozen) ? u0 : u;
        for (const auto& ui : source) moments.push_back(moments_from_density(ui));

        std::vector<EffectiveHamiltonianTable> tables;
        for (int i = 0; i < N; ++i) {
            // tabulate on a refined configuration grid: the moments live on the
            // density cells, but the finite-difference force tables gain a
            // 16-fold accuracy factor from the 4x finer spacing
            std::vector<GridAxis> fine;
            for (const auto& a : moments[static_cast<std::size_t>(i)].qgrid.axes())
                fine.push_back({a.lo, a.hi, a.cells * 4, a.boundary});
            tables.push_back(effective_hamiltonian(model, layout, moments, i, TensorGrid(fine)));
        }

        for (int i = 0; i < N; ++i) {
            const auto& bi = layout.block(i);
            std::vector<CoordinateDomain> qdom;
            for (int k = 0; k < bi.size; ++k) qdom.push_back(model.domain()[static_cast<std::size_t>(bi.offset + k)]);
            auto field = [&](const Eigen::VectorXd& z) {
                return tables[static_cast<std::size_t>(i)].field(z, OutOfRange::clamp);
            };
            IntegratorSpec back{spec.scheme, steps_per, -dt_sub};
            const auto& ui = u[static_cast<std::size_t>(i)];
            Eigen::VectorXd next(ui.grid.size());
            for (std::int64_t f = 0; f < ui.grid.size(); ++f) {
                Eigen::VectorXd z = ui.grid.center(f);
                PhaseState z0{z.head(bi.size), z.tail(bi.size)};
                PhaseState ze = flow(field, z0, back, std::span<const CoordinateDomain>(qdom));
                next[f] = ui.grid.interpolate(ui.values, ze.flat(), OutOfRange::zero);
            }
            u[static_cast<std::size_t>(i)].values = std::move(next);
        }

        // keep the densities unit-mass between substeps so the next effective
        // Hamiltonian sees normalized moments; track the worst drift seen
        for (int i = 0; i < N; ++i) {
            double m = u[static_cast<std::size_t>(i)].mass();
            if (diag) {
                diag->mass_drift[static_cast<std::size_t>(i)] =
                    std::max(diag->mass_drift[static_cast<std::size_t>(i)], std::abs(m - 1.0));
                if (std::abs(m - 1.0) > 1e-6) diag->renormalized = true;
            }
            u[static_cast<std::size_t>(i)].normalize();
        }
    }
    return u;
}

double mean_field_energy(const HamiltonianModel& model, const SubsystemLayout& layout,
                         const std::vector<SubsystemDensity>& u) {
    const int N = layout.count();
    std::vector<SubsystemMoments> moments;
    for (const auto& ui : u) moments.push_back(moments_from_density(ui));
    std::vector<std::int64_t> sizes;
    for (int s = 0; s < N; ++s) sizes.push_back(moments[static_cast<std::size_t>(s)].qgrid.size());

    const bool const_mass = model.constant_mass();
    Eigen::MatrixXd Minv_const;
    if (const_mass) Minv_const = model.mass_matrix(domain_midpoint(model)).inverse();

    double E = 0.0;
    Eigen::VectorXd q(model.dim());
    for (JointCells jc(sizes); !jc.done(); jc.advance()) {
        double wgt = 1.0;
        for (int s = 0; s < N; ++s) wgt *= moments[static_cast<std::size_t>(s)].w[jc.idx()[static_cast<std::size_t>(s)]];
        if (wgt == 0.0) continue;
        for (int s = 0; s < N; ++s) {
            const auto& bs = layout.block(s);
            q.segment(bs.offset, bs.size) =
                moments[static_cast<std::size_t>(s)].qgrid.center(jc.idx()[static_cast<std::size_t>(s)]);
        }
        Eigen::MatrixXd Minv = const_mass ? Minv_const : Eigen::MatrixXd(model.mass_matrix(q).inverse());
        double kin = 0.0;
        for (int j = 0; j < N; ++j) {
            const auto& bj = layout.block(j);
            const auto& mj = moments[static_cast<std::size_t>(j)];
            const double wj = mj.w[jc.idx()[static_cast<std::size_t>(j)]];
            const Eigen::MatrixXd pj2 = mj.p2[static_cast<std::size_t>(jc.idx()[static_cast<std::size_t>(j)])] / wj;
            kin += 0.5 * (Minv.block(bj.offset, bj.offset, bj.size, bj.size) * pj2).trace();
            for (int l = 0; l < N; ++l) {
                if (l == j) continue;
                const auto& bl = layout.block(l);
                const auto& ml = moments[static_cast<std::size_t>(l)];
                const Eigen::VectorXd pj = mj.p1[static_cast<std::size_t>(jc.idx()[static_cast<std::size_t>(j)])] / wj;
                const Eigen::VectorXd pl = ml.p1[static_cast<std::size_t>(jc.idx()[static_cast<std::size_t>(l)])] /
                                           ml.w[jc.idx()[static_cast<std::size_t>(l)]];
                kin += 0.5 * pj.dot(Minv.block(bj.offset, bl.offset, bj.size, bl.size) * pl);
            }
        }
        E += wgt * (kin + model.potential(q));
    }
    return E;
}

// ---------------------------------------------------------------------------
// component maps and the self-consistency loop

StochasticMatrix assemble_mf_component_spatial(const HamiltonianModel& model,
                                               const SubsystemLayout& layout, int i,
                                               const std::vector<SpatialFactor>& factors, double beta,
                                               const TensorPartition& part_i, int K,
                                               const IntegratorSpec& spec, std::uint64_t seed,
                                               int threads) {
    const int N = layout.count();
    const auto& bi = layout.block(i);
    const int di = bi.size;

    // lifted moments of the frozen factors
    std::vector<SubsystemMoments> moments(static_cast<std::size_t>(N));
    for (int j = 0; j < N; ++j) {
        if (j == i) continue;
        const auto& wj = factors[static_cast<std::size_t>(j)];
        auto Mjj = averaged_mass_block(model, layout, factors, j, wj.qgrid);
        for (auto& m : Mjj) m /= beta;
        moments[static_cast<std::size_t>(j)] = moments_from_factor(wj, Mjj);
    }
    EffectiveHamiltonianTable table = effective_hamiltonian(model, layout, moments, i, part_i.grid());

    // sampling covariance Sigma_i on the component partition
    auto Mii = averaged_mass_block(model, layout, factors, i, part_i.grid());
    std::vector<Eigen::VectorXd> cov_entries(static_cast<std::size_t>(di * di),
                                             Eigen::VectorXd::Zero(part_i.n()));
    for (std::int64_t t = 0; t < part_i.n(); ++t)
        for (int r = 0; r < di; ++r)
            for (int s = 0; s < di; ++s)
                cov_entries[static_cast<std::size_t>(r * di + s)][t] = Mii[static_cast<std::size_t>(t)](r, s) / beta;

    std::vector<CoordinateDomain> qdom;
    for (int k = 0; k < di; ++k) qdom.push_back(model.domain()[static_cast<std::size_t>(bi.offset + k)]);

    auto momenta = [&](const Eigen::VectorXd& q, Rng& rng) {
        Eigen::MatrixXd cov(di, di);
        for (int r = 0; r < di; ++r)
            for (int s = 0; s < di; ++s)
                cov(r, s) = part_i.grid().interpolate(cov_entries[static_cast<std::size_t>(r * di + s)], q,
                                                      OutOfRange::clamp);
        return sample_gaussian_momentum(0.5 * (cov + cov.transpose()), rng);
    };
    auto propagate = [&](const Eigen::VectorXd& q0, const Eigen::VectorXd& p0) {
        auto field = [&](const Eigen::VectorXd& z) { return table.field(z, OutOfRange::clamp); };
        PhaseState z = flow(field, PhaseState{q0, p0}, spec, std::span<const CoordinateDomain>(qdom));
        return z.q;
    };
    AssemblyMeta meta;
    meta.model_id = model.id() + ":mf-sub" + std::to_string(i);
    meta.T = spec.T;
    return assemble_ulam(part_i, momenta, propagate, UlamOptions{K, seed, threads}, std::move(meta));
}

RoothaanResult roothaan_iterate(const HamiltonianModel& model, const SubsystemLayout& layout,
                                const std::vector<SpatialFactor>& w0,
                                const std::vector<TensorPartition>& parts, double beta, int K,
                                const IntegratorSpec& spec, int n_sweeps, std::uint64_t seed,
                                int threads) {
    const int N = layout.count();
    if (static_cast<int>(w0.size()) != N || static_cast<int>(parts.size()) != N)
        throw LayoutError("roothaan_iterate: one factor and one partition per subsystem required");
    if (n_sweeps < 1) throw ConfigError("roothaan_iterate: n_sweeps must be >= 1");

    RoothaanResult out;
    out.factors = w0;
    for (auto& w : out.factors) {
        w.norm = SpatialFactor::Norm::density;
        w.normalize();
    }
    for (int i = 0; i < N; ++i) out.diag.sweep_order.push_back(i);

    auto sweep_seed = [&](int sweep, int i) {
        return splitmix64(splitmix64(seed) + static_cast<std::uint64_t>(sweep) * static_cast<std::uint64_t>(N) +
                          static_cast<std::uint64_t>(i));
    };

    int increasing_streak = 0;
    double prev_total_change = -1.0;
    for (int sweep = 0; sweep < n_sweeps; ++sweep) {
        std::vector<double> changes;
        for (int i = 0; i < N; ++i) {
            StochasticMatrix Si = assemble_mf_component_spatial(model, layout, i, out.factors, beta,
                                                                parts[static_cast<std::size_t>(i)], K, spec,
                                                                sweep_seed(sweep, i), threads);
            auto apply = [&Si](const Eigen::VectorXd& x) { return Si.apply(x); };
            Eigen::VectorXd mass = perron_power_iteration(apply, Si.n(), 1e-10, 100000);
            SpatialFactor wn;
            wn.subsystem = i;
            wn.qgrid = parts[static_cast<std::size_t>(i)].grid();
            wn.values = mass / parts[static_cast<std::size_t>(i)].cell_volume();
            wn.norm = SpatialFactor::Norm::density;
            wn.normalize();
            changes.push_back((wn.values - out.factors[static_cast<std::size_t>(i)].values).cwiseAbs().sum() *
                              wn.qgrid.cell_volume());
            out.factors[static_cast<std::size_t>(i)] = std::move(wn);
        }
        out.diag.factor_change.push_back(changes);
        double total = 0.0;
        for (double c : changes) total += c;
        if (prev_total_change >= 0.0 && total > prev_total_change) ++increasing_streak;
        else increasing_streak = 0;
        if (increasing_streak >= 3) out.diag.oscillation_warning = true;
        prev_total_change = total;
    }

    // component maps at the fixed point + residual certificates
    for (int i = 0; i < N; ++i) {
        StochasticMatrix Si = assemble_mf_component_spatial(model, layout, i, out.factors, beta,
                                                            parts[static_cast<std::size_t>(i)], K, spec,
                                                            sweep_seed(n_sweeps, i), threads);
        Eigen::VectorXd mass = out.factors[static_cast<std::size_t>(i)].values *
                               parts[static_cast<std::size_t>(i)].cell_volume();
        out.diag.fixed_point_residuals.push_back((Si.apply(mass) - mass).lpNorm<1>());
        out.component_matrices.push_back(std::move(Si));
    }
    return out;
}

std::vector<SpatialFactor> boltzmann_factors(const HamiltonianModel& model,
                                             const SubsystemLayout& layout,
                                             const std::vector<TensorPartition>& parts, double beta) {
    std::vector<SpatialFactor> out;
    Eigen::VectorXd q = domain_midpoint(model);
    for (int i = 0; i < layout.count(); ++i) {
        const auto& bi = layout.block(i);
        SpatialFactor w;
        w.subsystem = i;
        w.qgrid = parts[static_cast<std::size_t>(i)].grid();
        w.values.resize(w.qgrid.size());
        Eigen::VectorXd qq = q;
        for (std::int64_t t = 0; t < w.qgrid.size(); ++t) {
            qq.segment(bi.offset, bi.size) = w.qgrid.center(t);
            w.values[t] = std::exp(-beta * model.potential(qq));
        }
        w.norm = SpatialFactor::Norm::density;
        w.normalize();
        out.push_back(std::move(w));
    }
    return out;
}

Eigen::VectorXd product_eigenfunction(const std::vector<SpatialFactor>& selected,
                                      const TensorPartition& product_part) {
    const auto& g = product_part.grid();
    int ax = 0;
    std::vector<int> offsets;
    for (const auto& f : selected) {
        offsets.push_back(ax);
        for (int k = 0; k < f.qgrid.ndim(); ++k, ++ax) {
            if (ax >= g.ndim() || g.axis(ax).cells != f.qgrid.axis(k).cells)
                throw LayoutError("product_eigenfunction: factor grids incompatible with product grid");
        }
    }
    if (ax != g.ndim()) throw LayoutError("product_eigenfunction: factors do not cover the product grid");

    Eigen::VectorXd out(g.size());
    std::vector<int> idx;
    for (std::int64_t f = 0; f < g.size(); ++f) {
        g.unflatten(f, idx);
        double v = 1.0;
        for (std::size_t s = 0; s < selected.size(); ++s) {
            const auto& fac = selected[s];
            std::vector<int> sidx(static_cast<std::size_t>(fac.qgrid.ndim()));
            for (int k = 0; k < fac.qgrid.ndim(); ++k)
                sidx[static_cast<std::size_t>(k)] = idx[static_cast<std::size_t>(offsets[s] + k)];
            v *= fac.values[fac.qgrid.flatten(sidx)];
        }
        out[f] = v;
    }
    return out;
}

}  // namespace mfto
