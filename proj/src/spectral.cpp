#include "mfto/spectral.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

namespace mfto {

void sign_normalize(Eigen::Ref<Eigen::VectorXd> v) {
    Eigen::Index imax = 0;
    v.cwiseAbs().maxCoeff(&imax);
    if (v[imax] < 0.0) v = -v;
}

namespace {

struct RitzPair {
    std::complex<double> value;
    Eigen::VectorXcd vector;
    double residual;
};

bool ritz_order(const std::complex<double>& a, const std::complex<double>& b) {
    if (std::abs(a) != std::abs(b)) return std::abs(a) > std::abs(b);
    if (a.real() != b.real()) return a.real() > b.real();
    return a.imag() > b.imag();
}

}  // namespace

SpectralResult dominant_eigs(const MatVec& apply, std::int64_t n, int k, double tol, int max_iter) {
    if (k < 1 || k > n) throw SpectralError("dominant_eigs: invalid eigenpair count");
    const int m = static_cast<int>(std::min<std::int64_t>(n, std::max(60, 4 * k + 20)));
    const int max_restarts = std::max(1, max_iter / m);

    Eigen::VectorXd v0 = Eigen::VectorXd::Ones(n).normalized();
    int iterations = 0;
    std::vector<RitzPair> best;

    for (int restart = 0; restart < max_restarts; ++restart) {
        Eigen::MatrixXd V(n, m + 1);
        Eigen::MatrixXd H = Eigen::MatrixXd::Zero(m + 1, m);
        V.col(0) = v0;
        int deterministic_fill = 0;
        for (int j = 0; j < m; ++j) {
            Eigen::VectorXd w = apply(V.col(j));
            ++iterations;
            // modified Gram-Schmidt with one reorthogonalization pass
            for (int pass = 0; pass < 2; ++pass)
                for (int i = 0; i <= j; ++i) {
                    double h = V.col(i).dot(w);
                    H(i, j) += h;
                    w -= h * V.col(i);
                }
            double hnext = w.norm();
            if (hnext < 1e-13) {
                // invariant subspace found; continue with a fresh deterministic
                // direction orthogonal to the basis so more pairs can appear
                Eigen::VectorXd f;
                double fn = 0.0;
                while (fn < 1e-8 && deterministic_fill < n) {
                    f = Eigen::VectorXd::Zero(n);
                    f[deterministic_fill++] = 1.0;
                    for (int i = 0; i <= j; ++i) f -= V.col(i).dot(f) * V.col(i);
                    fn = f.norm();
                }
                if (fn < 1e-8) {
                    // exhausted the space; shrink the factorization
                    Eigen::MatrixXd Hm = H.topLeftCorner(j + 1, j + 1);
                    H = Eigen::MatrixXd::Zero(j + 2, j + 1);
                    H.topRows(j + 1) = Hm;
                    V.conservativeResize(Eigen::NoChange, j + 2);
                    break;
                }
                H(j + 1, j) = 0.0;
                V.col(j + 1) = f / fn;
            } else {
                H(j + 1, j) = hnext;
                V.col(j + 1) = w / hnext;
            }
        }
        const int mm = static_cast<int>(H.cols());
        Eigen::EigenSolver<Eigen::MatrixXd> es(H.topLeftCorner(mm, mm));
        if (es.info() != Eigen::Success) throw SpectralError("Hessenberg eigen decomposition failed");

        std::vector<int> order(static_cast<std::size_t>(mm));
        for (int i = 0; i < mm; ++i) order[static_cast<std::size_t>(i)] = i;
        std::sort(order.begin(), order.end(), [&](int a, int b) {
            return ritz_order(es.eigenvalues()[a], es.eigenvalues()[b]);
        });

        best.clear();
        const int want = std::min(k, mm);
        for (int t = 0; t < want; ++t) {
            int idx = order[static_cast<std::size_t>(t)];
            RitzPair rp;
            rp.value = es.eigenvalues()[idx];
            Eigen::VectorXcd y = es.eigenvectors().col(idx);
            Eigen::VectorXcd x = V.leftCols(mm).cast<std::complex<double>>() * y;
            x.normalize();
            Eigen::VectorXcd r =
                apply(x.real()).cast<std::complex<double>>() +
                std::complex<double>(0, 1) * apply(x.imag()).cast<std::complex<double>>() -
                rp.value * x;
            rp.residual = r.norm();
            rp.vector = x;
            best.push_back(std::move(rp));
        }
        double worst = 0.0;
        for (const auto& rp : best) worst = std::max(worst, rp.residual);
        if (static_cast<int>(best.size()) == k && worst <= tol) break;
        if (restart + 1 == max_restarts) {
            std::string res;
            for (const auto& rp : best) res += " " + std::to_string(rp.residual);
            throw SpectralError("Arnoldi did not converge; achieved residuals:" + res);
        }
        // restart direction: combination of wanted Ritz vectors
        Eigen::VectorXd acc = Eigen::VectorXd::Zero(n);
        for (const auto& rp : best) acc += rp.vector.real();
        double nrm = acc.norm();
        v0 = nrm > 1e-14 ? Eigen::VectorXd(acc / nrm) : Eigen::VectorXd::Ones(n).normalized();
    }

    SpectralResult out;
    out.method = "arnoldi(m=" + std::to_string(m) + ",start=ones)";
    out.iterations = iterations;
    out.vectors.resize(n, k);
    for (int t = 0; t < k; ++t) {
        const auto& rp = best[static_cast<std::size_t>(t)];
        out.eigenvalues.push_back(rp.value);
        const bool real = std::abs(rp.value.imag()) <= 1e-10 * std::max(1.0, std::abs(rp.value));
        out.is_real.push_back(real);
        Eigen::VectorXd col = rp.vector.real();
        if (real && col.norm() > 0) {
            col.normalize();
            sign_normalize(col);
        }
        out.vectors.col(t) = col;
        out.residuals.push_back(rp.residual);
    }
    return out;
}

SpectralResult dominant_eigs(const StochasticMatrix& P, int k, double tol, int max_iter) {
    auto apply = [&P](const Eigen::VectorXd& x) { return P.apply(x); };
    return dominant_eigs(apply, P.n(), k, tol, max_iter);
}

Eigen::VectorXd invariant_vector(const StochasticMatrix& P, double tol) {
    // When several eigenvalues cluster near 1 (e.g. operators with many
    // long-lived modes), a single Ritz pair can have a tiny residual while
    // being a mixture across the cluster. Resolving a few pairs forces the
    // Krylov space to separate them; the fixed vector is the pair closest to 1.
    const int k = static_cast<int>(std::min<std::int64_t>(P.n(), 5));
    SpectralResult r = dominant_eigs(P, k, tol);
    int pick = 0;
    double best_dev = std::abs(r.eigenvalues[0] - std::complex<double>(1.0, 0.0));
    for (int t = 1; t < k; ++t) {
        const double dev = std::abs(r.eigenvalues[static_cast<std::size_t>(t)] -
                                    std::complex<double>(1.0, 0.0));
        if (dev < best_dev) {
            best_dev = dev;
            pick = t;
        }
    }
    if (best_dev > 1e-8)
        throw SpectralError("invariant_vector: leading eigenvalue is not 1");
    Eigen::VectorXd v = r.vectors.col(pick);
    sign_normalize(v);
    double most_negative = v.minCoeff();
    if (most_negative < -1e-6 * v.cwiseAbs().maxCoeff())
        throw SpectralError("invariant_vector: leading eigenvector changes sign");
    v = v.cwiseMax(0.0);
    double s = v.sum();
    if (s <= 0.0) throw SpectralError("invariant_vector: zero mass");
    return v / s;
}

Eigen::VectorXd perron_power_iteration(const MatVec& apply, std::int64_t n, double tol, int max_iter) {
    Eigen::VectorXd v = Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n));
    for (int it = 0; it < max_iter; ++it) {
        Eigen::VectorXd w = apply(v);
        double s = w.sum();
        if (s <= 0.0) throw SpectralError("power iteration lost all mass");
        w /= s;
        double change = (w - v).lpNorm<1>();
        v = std::move(w);
        if (change < tol) return v.cwiseMax(0.0);
    }
    throw SpectralError("power iteration did not converge");
}

std::pair<std::vector<std::int64_t>, std::vector<std::int64_t>> almost_invariant_sets(
    const Eigen::VectorXd& v) {
    std::vector<std::int64_t> pos, neg;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (v[i] > 0.0) pos.push_back(i);
        else if (v[i] < 0.0) neg.push_back(i);
    }
    if (pos.empty() || neg.empty())
        throw SpectralError("almost_invariant_sets: eigenvector is single-signed");
    return {pos, neg};
}

double invariance_ratio(const StochasticMatrix& P, const std::vector<std::int64_t>& A,
                        const Eigen::VectorXd& weights) {
    return transition_probability(P, A, A, weights);
}

}  // namespace mfto
