#ifndef MFTO_MEANFIELD_HPP
#define MFTO_MEANFIELD_HPP

#include <optional>
#include <vector>

#include "mfto/integrate.hpp"
#include "mfto/partition.hpp"
#include "mfto/sampling.hpp"
#include "mfto/stochastic.hpp"
#include "mfto/ulam.hpp"

namespace mfto {

// Gridded nonnegative density on one subsystem's phase space. The grid axes
// are the subsystem's configuration axes followed by its momentum axes; the
// momentum axes are truncated to +-n_sigma thermal standard deviations.
struct SubsystemDensity {
    int subsystem = 0;
    int qdim = 0;  // number of leading configuration axes
    TensorGrid grid;
    Eigen::VectorXd values;  // density per cell

    double mass() const { return values.sum() * grid.cell_volume(); }
    void normalize() {
        double m = mass();
        if (m <= 0.0) throw EvaluationError("subsystem density has no mass");
        values /= m;
    }
};

// Real-valued grid function on one subsystem's configuration cells.
// Densities are nonnegative with unit mass; eigenfunction factors are signed
// with unit L2 norm.
struct SpatialFactor {
    enum class Norm { density, unit_l2 };

    int subsystem = 0;
    TensorGrid qgrid;
    Eigen::VectorXd values;
    Norm norm = Norm::density;

    double mass() const { return values.sum() * qgrid.cell_volume(); }
    void normalize() {
        if (norm == Norm::density) {
            double m = mass();
            if (m <= 0.0) throw EvaluationError("spatial factor has no mass");
            values /= m;
        } else {
            values.normalize();
        }
    }
};

// Per-configuration-cell momentum moments of a subsystem density:
//   w  = integral of u over the cell (mass),
//   p1 = integral of p u, p2 = integral of p p^T u.
struct SubsystemMoments {
    int subsystem = 0;
    TensorGrid qgrid;
    Eigen::VectorXd w;
    std::vector<Eigen::VectorXd> p1;
    std::vector<Eigen::MatrixXd> p2;
};

SubsystemMoments moments_from_density(const SubsystemDensity& u);

// Zero-mean Gaussian lift of a spatial factor: p1 = 0, p2 = w * covariance.
SubsystemMoments moments_from_factor(const SpatialFactor& w,
                                     const std::vector<Eigen::MatrixXd>& covariance_per_cell);

// M(q)_{jj} averaged over the other subsystems' spatial masses, per cell of
// eval_grid. Divided by beta this is the lift covariance Sigma_j(q_j).
std::vector<Eigen::MatrixXd> averaged_mass_block(const HamiltonianModel& model,
                                                 const SubsystemLayout& layout,
                                                 const std::vector<SpatialFactor>& factors, int j,
                                                 const TensorGrid& eval_grid);

// Effective subsystem Hamiltonian H_i(q_i,p_i) = 1/2 p.A(q_i)p + b(q_i).p + c(q_i)
// tabulated on configuration cells, with central-difference derivative tables
// for the induced phase-space field. c contains the subsystem's own potential
// part plus every averaged contribution of the others.
class EffectiveHamiltonianTable {
public:
    EffectiveHamiltonianTable() = default;
    EffectiveHamiltonianTable(int subsystem, TensorGrid qgrid, int di);

    int subsystem() const { return subsystem_; }
    int dim() const { return di_; }
    const TensorGrid& qgrid() const { return qgrid_; }

    // node accessors used during construction
    void set_node(std::int64_t node, const Eigen::MatrixXd& A, const Eigen::VectorXd& b, double c);
    void finalize();  // SPD check per node + derivative tables

    Eigen::MatrixXd interpolate_A(const Eigen::VectorXd& qi, OutOfRange policy) const;
    Eigen::VectorXd interpolate_b(const Eigen::VectorXd& qi, OutOfRange policy) const;
    double interpolate_c(const Eigen::VectorXd& qi, OutOfRange policy) const;

    double hamiltonian(const Eigen::VectorXd& z, OutOfRange policy = OutOfRange::clamp) const;

    // (dH/dp, -dH/dq) at the flattened subsystem state z = (q_i, p_i).
    Eigen::VectorXd field(const Eigen::VectorXd& z, OutOfRange policy = OutOfRange::clamp) const;

private:
    int subsystem_ = 0, di_ = 0;
    TensorGrid qgrid_;
    std::vector<Eigen::VectorXd> A_;               // di*di node arrays
    std::vector<Eigen::VectorXd> b_;               // di node arrays
    Eigen::VectorXd c_;
    std::vector<std::vector<Eigen::VectorXd>> dA_;  // [axis][entry]
    std::vector<std::vector<Eigen::VectorXd>> db_;  // [axis][entry]
    std::vector<Eigen::VectorXd> dc_;               // [axis]
    bool finalized_ = false;
};

// Quadrature of H over the other subsystems' moments (midpoint rule on their
// grids; tensor-decomposed potentials collapse to precomputed scalars).
EffectiveHamiltonianTable effective_hamiltonian(const HamiltonianModel& model,
                                                const SubsystemLayout& layout,
                                                const std::vector<SubsystemMoments>& moments, int i,
                                                const TensorGrid& qgrid_i);

// Strict [OP] surface: throws on queries outside the table's grid range.
Eigen::VectorXd mean_field_vector_field(const EffectiveHamiltonianTable& table, const Eigen::VectorXd& z);

// Marginal of a density on the full product phase grid (axes: q_0..q_{d-1},
// p_0..p_{d-1}) onto subsystem i's phase space.
SubsystemDensity reduce_marginal(const TensorGrid& full_grid, const Eigen::VectorXd& values,
                                 const SubsystemLayout& layout, int i);

enum class CouplingMode { frozen, co_evolved };

struct EvolveDiagnostics {
    std::vector<double> mass_drift;  // |mass-1| before renormalization, per subsystem
    bool renormalized = false;
};

// Semi-Lagrangian transport of every subsystem density through its mean-field
// field. `frozen` holds the effective Hamiltonians fixed at the initial
// densities for the whole of [0,T]; `co_evolved` rebuilds them after each of
// `substeps` intervals.
std::vector<SubsystemDensity> evolve_mean_field(const HamiltonianModel& model,
                                                const SubsystemLayout& layout,
                                                const std::vector<SubsystemDensity>& u0,
                                                const IntegratorSpec& spec, CouplingMode mode,
                                                int substeps = 1,
                                                EvolveDiagnostics* diag = nullptr);

// E = integral of H against the product of the subsystem densities.
double mean_field_energy(const HamiltonianModel& model, const SubsystemLayout& layout,
                         const std::vector<SubsystemDensity>& u);

// Ulam matrix of the linear spatial component map for subsystem i with the
// other factors frozen: per cell of part_i, uniform positions, momenta from
// the lifted conditional law N(0, Sigma_i(q_i)), trajectories of the
// mean-field field, endpoints binned.
StochasticMatrix assemble_mf_component_spatial(const HamiltonianModel& model,
                                               const SubsystemLayout& layout, int i,
                                               const std::vector<SpatialFactor>& factors, double beta,
                                               const TensorPartition& part_i, int K,
                                               const IntegratorSpec& spec, std::uint64_t seed,
                                               int threads = 0);

struct RoothaanDiagnostics {
    std::vector<std::vector<double>> factor_change;  // [sweep][subsystem], L1
    std::vector<double> fixed_point_residuals;       // ||S_i w_i - w_i||_1 at the result
    std::vector<int> sweep_order;
    bool oscillation_warning = false;
};

struct RoothaanResult {
    std::vector<SpatialFactor> factors;
    std::vector<StochasticMatrix> component_matrices;  // assembled at the fixed point
    RoothaanDiagnostics diag;
};

// Gauss-Seidel self-consistency sweeps: each subsystem's factor is replaced by
// the Perron vector of its component map assembled from the current others.
RoothaanResult roothaan_iterate(const HamiltonianModel& model, const SubsystemLayout& layout,
                                const std::vector<SpatialFactor>& w0,
                                const std::vector<TensorPartition>& parts, double beta, int K,
                                const IntegratorSpec& spec, int n_sweeps, std::uint64_t seed,
                                int threads = 0);

// Initialization w0_i proportional to exp(-beta V) with the other coordinates
// held at their domain midpoints.
std::vector<SpatialFactor> boltzmann_factors(const HamiltonianModel& model,
                                             const SubsystemLayout& layout,
                                             const std::vector<TensorPartition>& parts, double beta);

// Gaussian-lifted phase-space density of a spatial factor.
SubsystemDensity lift_factor(const SpatialFactor& w, const TensorGrid& pgrid,
                             const std::vector<Eigen::MatrixXd>& covariance_per_cell);

// Momentum grid for subsystem i: per-dimension truncation at +-n_sigma times
// the largest thermal standard deviation of the block over the domain.
TensorGrid make_momentum_grid(const HamiltonianModel& model, const SubsystemLayout& layout, int i,
                              double beta, int cells_per_dim, double n_sigma = 6.0);

// Outer product of the selected per-subsystem factors on the product grid.
Eigen::VectorXd product_eigenfunction(const std::vector<SpatialFactor>& selected,
                                      const TensorPartition& product_part);

}  // namespace mfto

#endif
