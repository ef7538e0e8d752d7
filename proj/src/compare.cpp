#include "mfto/compare.hpp"

#include <algorithm>
#include <cmath>

namespace mfto {

namespace {

void check_inputs(const Eigen::VectorXd& a, const Eigen::VectorXd& b, const Eigen::VectorXd& w) {
    if (a.size() != b.size() || a.size() != w.size())
        throw ComparisonError("weighted comparison: size mismatch");
    if ((w.array() < 0.0).any()) throw ComparisonError("weighted comparison: negative weight");
}

}  // namespace

double weighted_cosine(const Eigen::VectorXd& a, const Eigen::VectorXd& b, const Eigen::VectorXd& w) {
    check_inputs(a, b, w);
    const double na = std::sqrt((w.array() * a.array().square()).sum());
    const double nb = std::sqrt((w.array() * b.array().square()).sum());
    if (na <= 0.0 || nb <= 0.0) throw ComparisonError("weighted comparison: zero-norm vector");
    const double dot = (w.array() * a.array() * b.array()).sum();
    return std::abs(dot) / (na * nb);
}

double sign_agreement(const Eigen::VectorXd& a, const Eigen::VectorXd& b, const Eigen::VectorXd& w) {
    check_inputs(a, b, w);
    const double dot = (w.array() * a.array() * b.array()).sum();
    const double flip = dot < 0.0 ? -1.0 : 1.0;
    double agree = 0.0, total = 0.0;
    for (Eigen::Index i = 0; i < a.size(); ++i) {
        if (a[i] == 0.0 || b[i] == 0.0) continue;
        total += w[i];
        if ((a[i] > 0.0) == (flip * b[i] > 0.0)) agree += w[i];
    }
    if (total <= 0.0) throw ComparisonError("sign agreement: no jointly supported cells with weight");
    return agree / total;
}

ComparisonReport match_eigenfunctions(const Eigen::MatrixXd& reference,
                                      const std::vector<Eigen::VectorXd>& candidates,
                                      const Eigen::VectorXd& weights) {
    const int nr = static_cast<int>(reference.cols());
    const int nc = static_cast<int>(candidates.size());
    if (nr == 0 || nc == 0) throw ComparisonError("match_eigenfunctions: empty input");

    struct Entry {
        double cosine;
        int r, c;
    };
    std::vector<Entry> entries;
    for (int r = 0; r < nr; ++r)
        for (int c = 0; c < nc; ++c)
            entries.push_back({weighted_cosine(reference.col(r), candidates[static_cast<std::size_t>(c)], weights), r, c});
    std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
        if (a.cosine != b.cosine) return a.cosine > b.cosine;
        if (a.r != b.r) return a.r < b.r;
        return a.c < b.c;
    });

    std::vector<char> rused(static_cast<std::size_t>(nr), 0), cused(static_cast<std::size_t>(nc), 0);
    ComparisonReport rep;
    for (const auto& e : entries) {
        if (rused[static_cast<std::size_t>(e.r)] || cused[static_cast<std::size_t>(e.c)]) continue;
        rused[static_cast<std::size_t>(e.r)] = cused[static_cast<std::size_t>(e.c)] = 1;
        MatchedPair p;
        p.reference = e.r;
        p.candidate = e.c;
        p.cosine = e.cosine;
        p.sign_agreement = sign_agreement(reference.col(e.r), candidates[static_cast<std::size_t>(e.c)], weights);
        rep.pairs.push_back(p);
        if (static_cast<int>(rep.pairs.size()) == std::min(nr, nc)) break;
    }
    std::sort(rep.pairs.begin(), rep.pairs.end(),
              [](const MatchedPair& a, const MatchedPair& b) { return a.reference < b.reference; });
    rep.min_cosine = rep.pairs.front().cosine;
    rep.min_sign_agreement = rep.pairs.front().sign_agreement;
    for (const auto& p : rep.pairs) {
        rep.min_cosine = std::min(rep.min_cosine, p.cosine);
        rep.min_sign_agreement = std::min(rep.min_sign_agreement, p.sign_agreement);
    }
    return rep;
}

}  // namespace mfto
