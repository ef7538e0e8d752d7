#include "mfto/ulam.hpp"

#include <atomic>
#include <map>
#include <thread>

namespace mfto {

StochasticMatrix assemble_ulam(const TensorPartition& part, const MomentumSampler& momenta,
                               const ConfigPropagator& propagate, const UlamOptions& opt,
                               AssemblyMeta meta) {
    if (opt.K < 1) throw ConfigError("Ulam assembly needs K >= 1");
    const std::int64_t n = part.n();
    std::vector<std::map<std::int64_t, int>> columns(static_cast<std::size_t>(n));
    std::vector<int> lost(static_cast<std::size_t>(n), 0);

    int threads = opt.threads > 0 ? opt.threads : static_cast<int>(std::thread::hardware_concurrency());
    if (threads < 1) threads = 1;

    std::atomic<std::int64_t> next{0};
    auto worker = [&]() {
        Eigen::VectorXd lo, hi;
        for (;;) {
            std::int64_t j = next.fetch_add(1);
            if (j >= n) break;
            Rng rng = Rng::for_stream(opt.seed, static_cast<std::uint64_t>(j));
            part.cell_bounds(j, lo, hi);
            auto& col = columns[static_cast<std::size_t>(j)];
            for (int k = 0; k < opt.K; ++k) {
                Eigen::VectorXd q0 = sample_uniform_in_box(lo, hi, rng);
                Eigen::VectorXd p0 = momenta(q0, rng);
                std::int64_t i = -1;
                try {
                    Eigen::VectorXd qe = propagate(q0, p0);
                    if (qe.allFinite()) i = part.locate(qe);
                } catch (const BlowUpError&) {
                    i = -1;
                } catch (const EvaluationError&) {
                    // field overflowed before the state itself went non-finite
                    i = -1;
                }
                if (i < 0)
                    ++lost[static_cast<std::size_t>(j)];
                else
                    ++col[i];
            }
        }
    };
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();

    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<std::size_t>(n) * std::min<std::int64_t>(opt.K, 8));
    std::int64_t total_lost = 0;
    double max_lost_frac = 0.0;
    for (std::int64_t j = 0; j < n; ++j) {
        const int kept = opt.K - lost[static_cast<std::size_t>(j)];
        total_lost += lost[static_cast<std::size_t>(j)];
        max_lost_frac = std::max(max_lost_frac, static_cast<double>(lost[static_cast<std::size_t>(j)]) / opt.K);
        if (kept == 0) {
            trip.emplace_back(static_cast<int>(j), static_cast<int>(j), 1.0);
            continue;
        }
        for (const auto& [i, c] : columns[static_cast<std::size_t>(j)])
            trip.emplace_back(static_cast<int>(i), static_cast<int>(j), static_cast<double>(c) / kept);
    }
    Eigen::SparseMatrix<double> S(static_cast<int>(n), static_cast<int>(n));
    S.setFromTriplets(trip.begin(), trip.end());
    S.makeCompressed();

    meta.K = opt.K;
    meta.seed = opt.seed;
    meta.lost_samples = total_lost;
    meta.max_lost_fraction = max_lost_frac;
    meta.grid_desc = part.grid().describe();
    return StochasticMatrix(std::move(S), std::move(meta));
}

StochasticMatrix assemble_full_spatial(const HamiltonianModel& model, const CanonicalEnsemble& ens,
                                       const TensorPartition& part, int K, const IntegratorSpec& spec,
                                       std::uint64_t seed, int threads) {
    auto momenta = [&](const Eigen::VectorXd& q, Rng& rng) {
        return sample_conditional_momentum(ens, q, rng);
    };
    auto propagate = [&](const Eigen::VectorXd& q0, const Eigen::VectorXd& p0) {
        PhaseState z = flow(model, PhaseState{q0, p0}, spec);
        return z.q;
    };
    AssemblyMeta meta;
    meta.model_id = model.id();
    meta.T = spec.T;
    meta.convention = convention_name(ens.convention);
    return assemble_ulam(part, momenta, propagate, UlamOptions{K, seed, threads}, std::move(meta));
}

double transition_probability(const StochasticMatrix& P, const std::vector<std::int64_t>& from,
                              const std::vector<std::int64_t>& to, const Eigen::VectorXd& weights) {
    if (from.empty() || to.empty()) throw SpectralError("transition_probability: empty cell set");
    std::vector<char> in_to(static_cast<std::size_t>(P.n()), 0);
    for (auto i : to) in_to[static_cast<std::size_t>(i)] = 1;
    double wsum = 0.0, acc = 0.0;
    const auto& S = P.matrix();
    for (auto j : from) {
        const double wj = weights[j];
        if (wj < 0.0) throw SpectralError("transition_probability: negative weight");
        wsum += wj;
        double colsum = 0.0;
        for (Eigen::SparseMatrix<double>::InnerIterator it(S, static_cast<int>(j)); it; ++it)
            if (in_to[static_cast<std::size_t>(it.row())]) colsum += it.value();
        acc += wj * colsum;
    }
    if (wsum <= 0.0) throw SpectralError("transition_probability: zero total weight on source set");
    return acc / wsum;
}

}  // namespace mfto
