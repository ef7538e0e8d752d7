#ifndef MFTO_COMPARE_HPP
#define MFTO_COMPARE_HPP

#include <vector>

#include "mfto/spectral.hpp"

namespace mfto {

// Weighted cosine similarity after optimal sign alignment (always in [0,1]);
// weights must be nonnegative. Throws ComparisonError on size mismatch or a
// zero-norm input.
double weighted_cosine(const Eigen::VectorXd& a, const Eigen::VectorXd& b, const Eigen::VectorXd& w);

// Weighted fraction of cells on which sign(a) == sign(b) after the same sign
// alignment, counted over cells where both are nonzero.
double sign_agreement(const Eigen::VectorXd& a, const Eigen::VectorXd& b, const Eigen::VectorXd& w);

struct MatchedPair {
    int reference = -1;  // column of the reference set
    int candidate = -1;  // index into the candidate list
    double cosine = 0.0;
    double sign_agreement = 0.0;
};

struct ComparisonReport {
    std::vector<MatchedPair> pairs;
    double min_cosine = 0.0;
    double min_sign_agreement = 0.0;
};

// Greedy best-match assignment of candidate vectors to reference columns by
// descending weighted cosine; every reference column gets exactly one
// candidate (and vice versa up to the shorter list).
ComparisonReport match_eigenfunctions(const Eigen::MatrixXd& reference,
                                      const std::vector<Eigen::VectorXd>& candidates,
                                      const Eigen::VectorXd& weights);

}  // namespace mfto

#endif
