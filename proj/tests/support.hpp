// Shared helpers for the test binaries: small reference models, independent
// finite-difference and dense-linear-algebra oracles, and a product-grid
// transport oracle. Everything here is deliberately written without reusing
// the library's own differentiation / spectral code paths.
#ifndef MFTO_TESTS_SUPPORT_HPP
#define MFTO_TESTS_SUPPORT_HPP

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <vector>

#include "mfto/integrate.hpp"
#include "mfto/model.hpp"
#include "mfto/rng.hpp"

namespace mfto::testing {

// Separable model with V(q) = sum_i 0.5 k_i (q_i - c_i)^2 on a truncated box
// and constant diagonal mass. Fully non-interacting by construction.
class SeparableQuadratic : public HamiltonianModel {
public:
    SeparableQuadratic(std::vector<double> k, std::vector<double> c, std::vector<double> m,
                       double half_width = 4.0)
        : k_(std::move(k)), c_(std::move(c)), m_(std::move(m)) {
        const int d = static_cast<int>(k_.size());
        for (int i = 0; i < d; ++i)
            domain_.push_back({c_[static_cast<std::size_t>(i)] - half_width,
                               c_[static_cast<std::size_t>(i)] + half_width, Boundary::truncated});
        layout_ = SubsystemLayout::per_coordinate(d);
    }

    std::string id() const override { return "separable_quadratic"; }
    int dim() const override { return static_cast<int>(k_.size()); }
    const std::vector<CoordinateDomain>& domain() const override { return domain_; }
    const SubsystemLayout& layout() const override { return layout_; }
    bool constant_mass() const override { return true; }

    double potential(const Eigen::VectorXd& q) const override {
        double v = 0.0;
        for (int i = 0; i < dim(); ++i) {
            const double x = q[i] - c_[static_cast<std::size_t>(i)];
            v += 0.5 * k_[static_cast<std::size_t>(i)] * x * x;
        }
        return v;
    }
    Eigen::VectorXd potential_gradient(const Eigen::VectorXd& q) const override {
        Eigen::VectorXd g(dim());
        for (int i = 0; i < dim(); ++i)
            g[i] = k_[static_cast<std::size_t>(i)] * (q[i] - c_[static_cast<std::size_t>(i)]);
        return g;
    }
    Eigen::MatrixXd mass_matrix(const Eigen::VectorXd&) const override {
        Eigen::VectorXd m(dim());
        for (int i = 0; i < dim(); ++i) m[i] = m_[static_cast<std::size_t>(i)];
        return m.asDiagonal();
    }

private:
    std::vector<double> k_, c_, m_;
    std::vector<CoordinateDomain> domain_;
    SubsystemLayout layout_;
};

// Central finite difference of a scalar function.
inline double fd_derivative(const std::function<double(double)>& f, double x, double h = 1e-6) {
    return (f(x + h) - f(x - h)) / (2.0 * h);
}

// Gradient of the Hamiltonian by central differences on the flattened state.
inline Eigen::VectorXd fd_hamiltonian_gradient(const HamiltonianModel& model, const Eigen::VectorXd& z,
                                               double h = 1e-6) {
    Eigen::VectorXd g(z.size());
    for (Eigen::Index k = 0; k < z.size(); ++k) {
        Eigen::VectorXd zp = z, zm = z;
        zp[k] += h;
        zm[k] -= h;
        g[k] = (model.hamiltonian(PhaseState::from_flat(zp)) - model.hamiltonian(PhaseState::from_flat(zm))) /
               (2.0 * h);
    }
    return g;
}

// Numerical divergence of a phase-space field by central differences.
inline double fd_divergence(const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& f,
                            const Eigen::VectorXd& z, double h = 1e-5) {
    double div = 0.0;
    for (Eigen::Index k = 0; k < z.size(); ++k) {
        Eigen::VectorXd zp = z, zm = z;
        zp[k] += h;
        zm[k] -= h;
        div += (f(zp)[k] - f(zm)[k]) / (2.0 * h);
    }
    return div;
}

// Dense full-spectrum oracle: eigenvalues sorted by descending modulus.
struct DenseEig {
    Eigen::VectorXcd values;
    Eigen::MatrixXcd vectors;
};
inline DenseEig dense_spectrum(const Eigen::MatrixXd& A) {
    Eigen::EigenSolver<Eigen::MatrixXd> es(A);
    std::vector<int> order(static_cast<std::size_t>(A.rows()));
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        const auto va = es.eigenvalues()[a], vb = es.eigenvalues()[b];
        if (std::abs(va) != std::abs(vb)) return std::abs(va) > std::abs(vb);
        if (va.real() != vb.real()) return va.real() > vb.real();
        return va.imag() > vb.imag();
    });
    DenseEig out;
    out.values.resize(A.rows());
    out.vectors.resize(A.rows(), A.cols());
    for (std::size_t t = 0; t < order.size(); ++t) {
        out.values[static_cast<Eigen::Index>(t)] = es.eigenvalues()[order[t]];
        out.vectors.col(static_cast<Eigen::Index>(t)) = es.eigenvectors().col(order[t]);
    }
    return out;
}

// Kolmogorov-Smirnov statistic against a given CDF.
inline double ks_statistic(std::vector<double> samples, const std::function<double(double)>& cdf) {
    std::sort(samples.begin(), samples.end());
    const double n = static_cast<double>(samples.size());
    double d = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double F = cdf(samples[i]);
        d = std::max(d, std::abs(F - static_cast<double>(i) / n));
        d = std::max(d, std::abs(F - static_cast<double>(i + 1) / n));
    }
    return d;
}

// Regularized lower incomplete gamma (series + continued fraction), for the
// chi-squared CDF used by the momentum-sampling law test.
inline double gamma_p(double a, double x) {
    if (x < 0.0 || a <= 0.0) return 0.0;
    if (x == 0.0) return 0.0;
    const double gln = std::lgamma(a);
    if (x < a + 1.0) {
        double ap = a, sum = 1.0 / a, del = sum;
        for (int i = 0; i < 500; ++i) {
            ap += 1.0;
            del *= x / ap;
            sum += del;
            if (std::abs(del) < std::abs(sum) * 1e-15) break;
        }
        return sum * std::exp(-x + a * std::log(x) - gln);
    }
    double b = x + 1.0 - a, c = 1e300, d = 1.0 / b, h = d;
    for (int i = 1; i < 500; ++i) {
        const double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < 1e-300) d = 1e-300;
        c = b + an / c;
        if (std::abs(c) < 1e-300) c = 1e-300;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < 1e-15) break;
    }
    return 1.0 - std::exp(-x + a * std::log(x) - gln) * h;
}

inline double chi2_cdf(double x, int dof) { return gamma_p(0.5 * dof, 0.5 * x); }

}  // namespace mfto::testing

#endif
