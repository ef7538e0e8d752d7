#ifndef MFTO_ULAM_HPP
#define MFTO_ULAM_HPP

#include <functional>

#include "mfto/integrate.hpp"
#include "mfto/partition.hpp"
#include "mfto/sampling.hpp"
#include "mfto/stochastic.hpp"

namespace mfto {

struct UlamOptions {
    int K = 32;              // samples per cell
    std::uint64_t seed = 0;  // master seed; cell j uses stream j
    int threads = 0;         // 0: hardware concurrency
};

// Draws p for a sampled position q.
using MomentumSampler = std::function<Eigen::VectorXd(const Eigen::VectorXd& q, Rng& rng)>;
// Integrates (q0,p0) for time T and projects onto configuration space.
// May throw BlowUpError; such samples count as lost mass.
using ConfigPropagator = std::function<Eigen::VectorXd(const Eigen::VectorXd& q0, const Eigen::VectorXd& p0)>;

// Monte-Carlo Ulam assembly over a box partition: per cell, K uniform
// positions, momenta from the sampler, endpoints binned into columns.
// Columns with lost samples are renormalized over the kept ones and tallied
// in the metadata; a column losing every sample keeps its mass on the
// diagonal. Parallel over cells; the result is independent of scheduling.
StochasticMatrix assemble_ulam(const TensorPartition& part, const MomentumSampler& momenta,
                               const ConfigPropagator& propagate, const UlamOptions& opt,
                               AssemblyMeta meta);

// Ulam discretization of the full spatial transfer operator: positions
// uniform per cell, momenta from h_bar(q,.), trajectories of the model's
// Hamiltonian field over time spec.T.
StochasticMatrix assemble_full_spatial(const HamiltonianModel& model, const CanonicalEnsemble& ens,
                                       const TensorPartition& part, int K, const IntegratorSpec& spec,
                                       std::uint64_t seed, int threads = 0);

}  // namespace mfto

#endif
