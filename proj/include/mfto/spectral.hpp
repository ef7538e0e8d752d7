#ifndef MFTO_SPECTRAL_HPP
#define MFTO_SPECTRAL_HPP

#include <complex>
#include <functional>
#include <vector>

#include "mfto/stochastic.hpp"

namespace mfto {

struct SpectralResult {
    std::vector<std::complex<double>> eigenvalues;  // sorted by descending modulus
    // Columns correspond to eigenvalues; real eigenvectors are sign-normalized
    // (largest-magnitude entry positive) and unit L2 norm. For a complex pair
    // the column holds the real part and is_real is false.
    Eigen::MatrixXd vectors;
    std::vector<double> residuals;  // ||P v - lambda v||_2
    std::vector<bool> is_real;
    std::string method;
    int iterations = 0;
};

using MatVec = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

// k largest-modulus eigenpairs via restarted Arnoldi with the deterministic
// all-ones start vector; throws SpectralError (with achieved residuals in the
// message) on non-convergence.
SpectralResult dominant_eigs(const MatVec& apply, std::int64_t n, int k, double tol = 1e-8,
                             int max_iter = 20000);
SpectralResult dominant_eigs(const StochasticMatrix& P, int k, double tol = 1e-8, int max_iter = 20000);

// Nonnegative unit-mass fixed vector of a column-stochastic matrix; tol is the
// eigensolver residual tolerance.
Eigen::VectorXd invariant_vector(const StochasticMatrix& P, double tol = 1e-8);

// Verification fallback: plain power iteration with L1 normalization.
Eigen::VectorXd perron_power_iteration(const MatVec& apply, std::int64_t n, double tol = 1e-10,
                                       int max_iter = 100000);

// Supports of the positive/negative parts of a real subdominant eigenvector;
// zero cells belong to neither set.
std::pair<std::vector<std::int64_t>, std::vector<std::int64_t>> almost_invariant_sets(
    const Eigen::VectorXd& v);

// rho(A) = weighted fraction of mass of A returning to A in one step.
double invariance_ratio(const StochasticMatrix& P, const std::vector<std::int64_t>& A,
                        const Eigen::VectorXd& weights);

// Sign convention helper: flips v so its largest-magnitude entry is positive.
void sign_normalize(Eigen::Ref<Eigen::VectorXd> v);

}  // namespace mfto

#endif
