#ifndef BREGTRIM_TESTS_SUPPORT_HPP
#define BREGTRIM_TESTS_SUPPORT_HPP

// Helpers shared by the unit tests and the acceptance binary: random points
// inside each divergence's domain and brute-force oracles that do not reuse
// the library's search code.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "bregtrim/divergence.hpp"
#include "bregtrim/matrix.hpp"

namespace testsupport {

using bregtrim::Dataset;
using bregtrim::Divergence;
using bregtrim::Matrix;

struct NamedDivergence {
    std::string name;
    Divergence divergence;
    std::size_t dimension;
};

inline std::vector<NamedDivergence> all_families() {
    return {
        {"sqeuclidean", Divergence::squared_euclidean(), 3},
        {"gaussian", Divergence::gaussian(2.5), 2},
        {"mahalanobis", Divergence::mahalanobis(Matrix::from_rows({{2.0, 0.5}, {0.5, 1.0}})), 2},
        {"poisson", Divergence::poisson(), 2},
        {"binomial", Divergence::binomial(20.0), 2},
        {"gamma", Divergence::gamma(3.0), 2},
        {"exp", Divergence::exponential_loss(), 2},
        {"logistic", Divergence::logistic_loss(), 2},
        {"kl", Divergence::kullback_leibler(), 3},
        {"percoord", Divergence::parse("percoord:poisson,gaussian:1,gamma:2"), 3},
    };
}

/// Coordinate draw strictly inside the codepoint domain of a scalar family.
inline double interior_scalar(const Divergence& d, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    switch (d.family()) {
        case bregtrim::Family::Poisson:
            return 0.05 + 30.0 * u(rng);
        case bregtrim::Family::Binomial:
            return d.parameter() * (0.02 + 0.96 * u(rng));
        case bregtrim::Family::Gamma:
            return 0.05 + 20.0 * u(rng);
        case bregtrim::Family::LogisticLoss:
            return 0.02 + 0.96 * u(rng);
        case bregtrim::Family::ExponentialLoss:
            return -3.0 + 6.0 * u(rng);
        default:
            return -20.0 + 40.0 * u(rng);
    }
}

/// A random point strictly inside the codepoint domain (so it is also a
/// valid data point and means of such points stay valid).
inline std::vector<double> interior_point(const Divergence& d, std::size_t dim, std::mt19937_64& rng) {
    std::vector<double> x(dim);
    if (d.family() == bregtrim::Family::KullbackLeiblerSimplex) {
        std::uniform_real_distribution<double> u(0.05, 1.0);
        double s = 0.0;
        for (auto& v : x) s += (v = u(rng));
        for (auto& v : x) v /= s;
        return x;
    }
    if (d.family() == bregtrim::Family::PerCoordinate) {
        for (std::size_t i = 0; i < dim; ++i) x[i] = interior_scalar(d.coordinates()[i], rng);
        return x;
    }
    for (auto& v : x) v = interior_scalar(d, rng);
    return x;
}

inline Dataset interior_dataset(const Divergence& d, std::size_t n, std::size_t dim, std::mt19937_64& rng) {
    Matrix m(n, dim);
    for (std::size_t i = 0; i < n; ++i) {
        const auto x = interior_point(d, dim, rng);
        std::copy(x.begin(), x.end(), m.row(i).begin());
    }
    return Dataset{std::move(m), std::nullopt};
}

inline double rel_diff(double a, double b) { return std::abs(a - b) / std::max(1.0, std::max(std::abs(a), std::abs(b))); }

/// Exhaustive trimmed optimum for tiny instances: every kept set of size q
/// times every labelling of it into at most k groups, each group centered
/// at its mean. Returns (1/n) * best sum.
inline double brute_force_cost(const Divergence& d, const Dataset& data, std::size_t k, std::size_t q) {
    const std::size_t n = data.size(), dim = data.dimension();
    double best = std::numeric_limits<double>::infinity();
    for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
        if (static_cast<std::size_t>(__builtin_popcount(mask)) != q) continue;
        std::vector<std::size_t> kept;
        for (std::size_t i = 0; i < n; ++i)
            if (mask & (1u << i)) kept.push_back(i);
        std::size_t labellings = 1;
        for (std::size_t i = 0; i < q; ++i) labellings *= k;
        for (std::size_t code = 0; code < labellings; ++code) {
            std::vector<std::size_t> group(q);
            std::size_t c = code;
            for (std::size_t i = 0; i < q; ++i) {
                group[i] = c % k;
                c /= k;
            }
            std::vector<std::vector<double>> mean(k, std::vector<double>(dim, 0.0));
            std::vector<std::size_t> size(k, 0);
            for (std::size_t i = 0; i < q; ++i) {
                ++size[group[i]];
                for (std::size_t t = 0; t < dim; ++t) mean[group[i]][t] += data.points(kept[i], t);
            }
            for (std::size_t g = 0; g < k; ++g)
                for (auto& v : mean[g]) v /= size[g] ? static_cast<double>(size[g]) : 1.0;
            double total = 0.0;
            for (std::size_t i = 0; i < q; ++i) total += d.evaluate(data.points.row(kept[i]), mean[group[i]]);
            best = std::min(best, total / static_cast<double>(n));
        }
    }
    return best;
}

/// Optimum of the two-center trimmed problem on three atoms with the given
/// multiplicities: enumerate how many copies of each atom are kept and which
/// of two groups each kept atom joins. Copies of one atom share the nearest
/// center, so atoms are never split. Squared Euclidean only.
struct AtomOptimum {
    double cost = std::numeric_limits<double>::infinity();
    std::vector<double> centers;
};

inline AtomOptimum three_atom_optimum(const std::vector<double>& atoms, const std::vector<std::size_t>& counts,
                                      std::size_t q) {
    const std::size_t n = counts[0] + counts[1] + counts[2];
    AtomOptimum best;
    for (std::size_t a = 0; a <= counts[0]; ++a)
        for (std::size_t b = 0; b <= counts[1]; ++b) {
            if (a + b > q || q - a - b > counts[2]) continue;
            const std::size_t kept[3] = {a, b, q - a - b};
            for (int assign = 0; assign < 8; ++assign) {
                double sum[2] = {0, 0}, cnt[2] = {0, 0};
                for (int t = 0; t < 3; ++t) {
                    const int g = (assign >> t) & 1;
                    sum[g] += atoms[t] * static_cast<double>(kept[t]);
                    cnt[g] += static_cast<double>(kept[t]);
                }
                double c[2];
                for (int g = 0; g < 2; ++g) c[g] = cnt[g] > 0 ? sum[g] / cnt[g] : 0.0;
                double cost = 0.0;
                for (int t = 0; t < 3; ++t) {
                    const double diff = atoms[t] - c[(assign >> t) & 1];
                    cost += static_cast<double>(kept[t]) * diff * diff;
                }
                cost /= static_cast<double>(n);
                std::vector<double> centers;
                for (int g = 0; g < 2; ++g)
                    if (cnt[g] > 0) centers.push_back(c[g]);
                std::sort(centers.begin(), centers.end());
                if (cost < best.cost - 1e-12 * std::max(1.0, best.cost)) best = {cost, centers};
                else if (std::abs(cost - best.cost) <= 1e-12 * std::max(1.0, best.cost)) {
                    // Worst case among ties, matching the breakdown convention.
                    auto mag = [](const std::vector<double>& v) {
                        double m = 0;
                        for (double x : v) m = std::max(m, std::abs(x));
                        return m;
                    };
                    if (mag(centers) > mag(best.centers)) best = {cost, centers};
                }
            }
        }
    return best;
}

/// NMI by pair counting over a label map, written without the library's
/// contingency code.
inline double reference_nmi(const std::vector<int>& a, const std::vector<int>& b) {
    const double n = static_cast<double>(a.size());
    std::map<int, double> pa, pb;
    std::map<std::pair<int, int>, double> pab;
    for (std::size_t i = 0; i < a.size(); ++i) {
        pa[a[i]] += 1;
        pb[b[i]] += 1;
        pab[{a[i], b[i]}] += 1;
    }
    double ha = 0, hb = 0, mi = 0;
    for (auto& [l, c] : pa) ha -= c / n * std::log(c / n);
    for (auto& [l, c] : pb) hb -= c / n * std::log(c / n);
    for (auto& [key, c] : pab) mi += c / n * std::log((c / n) / ((pa[key.first] / n) * (pb[key.second] / n)));
    if (ha <= 0 || hb <= 0) return 0.0;
    return mi / std::sqrt(ha * hb);
}

}  // namespace testsupport

#endif  // BREGTRIM_TESTS_SUPPORT_HPP
