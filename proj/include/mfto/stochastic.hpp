#ifndef MFTO_STOCHASTIC_HPP
#define MFTO_STOCHASTIC_HPP

#include <Eigen/Sparse>
#include <cstdint>
#include <string>
#include <vector>

#include "mfto/errors.hpp"

namespace mfto {

struct AssemblyMeta {
    std::string model_id;
    std::string grid_desc;
    int K = 0;
    double T = 0.0;
    std::uint64_t seed = 0;
    std::string convention = "paper";
    std::string config_hash;
    // lost-mass diagnostics: samples whose endpoint left the domain (or blew
    // up); the affected columns were renormalized over the kept samples.
    std::int64_t lost_samples = 0;
    double max_lost_fraction = 0.0;
};

// Sparse column-stochastic transition matrix: entry (i,j) is the estimated
// probability of moving from cell j to cell i. All spectral code assumes this
// orientation.
class StochasticMatrix {
public:
    StochasticMatrix() = default;
    StochasticMatrix(Eigen::SparseMatrix<double> S, AssemblyMeta meta)
        : S_(std::move(S)), meta_(std::move(meta)) {
        if (S_.rows() != S_.cols()) throw ModelConsistencyError("stochastic matrix must be square");
    }

    std::int64_t n() const { return S_.rows(); }
    const Eigen::SparseMatrix<double>& matrix() const { return S_; }
    const AssemblyMeta& meta() const { return meta_; }
    AssemblyMeta& meta() { return meta_; }

    Eigen::VectorXd apply(const Eigen::VectorXd& x) const { return S_ * x; }

    Eigen::VectorXd column_sums() const {
        Eigen::VectorXd s = Eigen::VectorXd::Zero(S_.cols());
        for (int j = 0; j < S_.outerSize(); ++j)
            for (Eigen::SparseMatrix<double>::InnerIterator it(S_, j); it; ++it) s[j] += it.value();
        return s;
    }

    // Column stochasticity within tol; also checks entry range.
    void assert_column_stochastic(double tol = 1e-12) const {
        Eigen::VectorXd s = column_sums();
        for (Eigen::Index j = 0; j < s.size(); ++j)
            if (std::abs(s[j] - 1.0) > tol)
                throw ModelConsistencyError("column " + std::to_string(j) + " sums to " +
                                            std::to_string(s[j]) + ", not 1");
        for (int j = 0; j < S_.outerSize(); ++j)
            for (Eigen::SparseMatrix<double>::InnerIterator it(S_, j); it; ++it)
                if (it.value() < 0.0 || it.value() > 1.0 + tol)
                    throw ModelConsistencyError("transition probability outside [0,1]");
    }

private:
    Eigen::SparseMatrix<double> S_;
    AssemblyMeta meta_;
};

// Discrete transition probability between weighted cell sets:
//   sum_{j in from} w_j sum_{i in to} P_ij / sum_{j in from} w_j.
double transition_probability(const StochasticMatrix& P, const std::vector<std::int64_t>& from,
                              const std::vector<std::int64_t>& to, const Eigen::VectorXd& weights);

}  // namespace mfto

#endif
