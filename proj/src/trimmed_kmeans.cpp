#include "bregtrim/trimmed_kmeans.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <string>

#include "bregtrim/errors.hpp"
#include "bregtrim/parallel.hpp"
#include "bregtrim/rng.hpp"

namespace bregtrim {

namespace {

void check_q(std::size_t q, std::size_t k, std::size_t n) {
    if (k == 0) throw ConfigError("k must be at least 1");
    if (q < k || q > n) {
        throw ConfigError("q = " + std::to_string(q) + " must lie in [k, n] = [" + std::to_string(k) + ", " +
                          std::to_string(n) + "]");
    }
}

TrimSelection select_unchecked(const Divergence& divergence, const Matrix& points, const Codebook& codebook,
                               std::size_t q) {
    const std::size_t n = points.rows();
    TrimSelection out;
    out.divergence.resize(n);
    out.nearest.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const Nearest nn = divergence.nearest_unchecked(points.row(i), codebook);
        out.divergence[i] = nn.value;
        out.nearest[i] = nn.index;
    }
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    auto by_value_then_index = [&](std::size_t a, std::size_t b) {
        const double va = out.divergence[a];
        const double vb = out.divergence[b];
        if (va != vb) return va < vb;
        return a < b;
    };
    if (q < n) {
        std::nth_element(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(q - 1), order.end(),
                         by_value_then_index);
        // nth_element leaves [0, q-1) unordered but all <= order[q-1].
        order.resize(q);
    }
    std::sort(order.begin(), order.end());
    out.selected = std::move(order);
    return out;
}

struct SelectionStats {
    double cost = 0.0;
    double radius_sq = 0.0;
};

SelectionStats selection_stats(const TrimSelection& sel, std::size_t n) {
    SelectionStats s;
    double sum = 0.0;
    for (std::size_t i : sel.selected) {
        sum += sel.divergence[i];
        s.radius_sq = std::max(s.radius_sq, sel.divergence[i]);
    }
    s.cost = sum / static_cast<double>(n);
    return s;
}

CentroidUpdate update_unchecked(const Divergence& divergence, const Matrix& points,
                                const std::vector<std::vector<std::size_t>>& clusters, const Codebook& previous) {
    const std::size_t d = points.cols();
    CentroidUpdate out;
    out.codebook = previous;
    for (std::size_t j = 0; j < clusters.size(); ++j) {
        const auto& members = clusters[j];
        if (members.empty()) {
            ++out.empty_clusters;
            continue;
        }
        auto center = out.codebook.centers.row(j);
        std::fill(center.begin(), center.end(), 0.0);
        for (std::size_t i : members) {
            auto x = points.row(i);
            for (std::size_t c = 0; c < d; ++c) center[c] += x[c];
        }
        const double count = static_cast<double>(members.size());
        for (std::size_t c = 0; c < d; ++c) center[c] /= count;
        try {
            divergence.check_codepoint(center);
        } catch (const DomainError& e) {
            throw DomainError("mean of cluster " + std::to_string(j + 1) + " (" + std::to_string(members.size()) +
                                  " points) is not a valid codepoint: " + e.what(),
                              e.column());
        }
    }
    return out;
}

}  // namespace

void validate_points(const Divergence& divergence, const Matrix& points) {
    for (std::size_t i = 0; i < points.rows(); ++i) {
        try {
            divergence.check_point(points.row(i));
        } catch (const DomainError& e) {
            throw DomainError("row " + std::to_string(i) + ": " + e.what(), e.column(), i);
        }
    }
}

void validate_codebook(const Divergence& divergence, const Codebook& codebook, std::size_t dimension) {
    if (codebook.size() == 0) throw DegenerateInputError("empty codebook");
    if (codebook.dimension() != dimension) {
        throw DimensionError("codebook dimension " + std::to_string(codebook.dimension()) +
                             " does not match data dimension " + std::to_string(dimension));
    }
    for (std::size_t j = 0; j < codebook.size(); ++j) {
        try {
            divergence.check_codepoint(codebook.center(j));
        } catch (const DomainError& e) {
            throw DomainError("center " + std::to_string(j) + ": " + e.what(), e.column());
        }
    }
}

TrimSelection select_trimmed(const Divergence& divergence, const Dataset& data, const Codebook& codebook,
                             std::size_t q) {
    if (q == 0 || q > data.size()) {
        throw ConfigError("q = " + std::to_string(q) + " must lie in [1, n = " + std::to_string(data.size()) + "]");
    }
    validate_points(divergence, data.points);
    validate_codebook(divergence, codebook, data.dimension());
    return select_unchecked(divergence, data.points, codebook, q);
}

Partition partition_selected(std::span<const std::size_t> nearest, std::span<const std::size_t> selected, std::size_t k) {
    Partition out;
    out.clusters.resize(k);
    out.labels.assign(nearest.size(), 0);
    for (std::size_t i : selected) {
        const std::size_t j = nearest[i];
        if (j >= k) throw ConfigError("nearest center index out of range");
        out.clusters[j].push_back(i);
        out.labels[i] = static_cast<int>(j + 1);
    }
    return out;
}

CentroidUpdate centroid_update(const Divergence& divergence, const Dataset& data,
                               const std::vector<std::vector<std::size_t>>& clusters, const Codebook& previous) {
    if (clusters.size() != previous.size()) {
        throw ConfigError("cluster count does not match codebook size");
    }
    if (previous.dimension() != data.dimension()) throw DimensionError("codebook/data dimension mismatch");
    for (const auto& members : clusters)
        for (std::size_t i : members)
            if (i >= data.size()) throw ConfigError("cluster member index out of range");
    return update_unchecked(divergence, data.points, clusters, previous);
}

double empirical_distortion(const Divergence& divergence, const Dataset& data, const Codebook& codebook,
                            std::size_t q) {
    check_q(q, codebook.size(), data.size());
    const TrimSelection sel = select_trimmed(divergence, data, codebook, q);
    return selection_stats(sel, data.size()).cost;
}

TrimmedFit lloyd_fit(const Divergence& divergence, const Dataset& data, const TrimConfig& config,
                     const Codebook& initial) {
    const std::size_t n = data.size();
    const std::size_t k = config.k;
    if (n == 0) throw DegenerateInputError("empty dataset");
    check_q(config.q, k, n);
    if (config.max_iter < 1) throw ConfigError("max_iter must be positive");
    if (initial.size() != k) {
        throw ConfigError("initial codebook has " + std::to_string(initial.size()) + " centers, expected k = " +
                          std::to_string(k));
    }
    validate_points(divergence, data.points);
    validate_codebook(divergence, initial, data.dimension());
    if (count_distinct_rows(data.points) < k) {
        throw DegenerateInputError("fewer than k = " + std::to_string(k) + " distinct points");
    }

    TrimmedFit out;
    out.codebook = initial;
    TrimSelection sel = select_unchecked(divergence, data.points, out.codebook, config.q);
    Partition part = partition_selected(sel.nearest, sel.selected, k);
    SelectionStats stats = selection_stats(sel, n);
    out.cost_trace.push_back(stats.cost);

    while (std::isfinite(stats.cost)) {
        if (out.iterations >= config.max_iter) break;
        CentroidUpdate update = update_unchecked(divergence, data.points, part.clusters, out.codebook);
        ++out.iterations;
        out.empty_cluster_events += update.empty_clusters;

        TrimSelection next_sel = select_unchecked(divergence, data.points, update.codebook, config.q);
        Partition next_part = partition_selected(next_sel.nearest, next_sel.selected, k);
        stats = selection_stats(next_sel, n);
        out.cost_trace.push_back(stats.cost);

        out.codebook = std::move(update.codebook);
        const bool repeated = next_part.labels == part.labels;
        sel = std::move(next_sel);
        part = std::move(next_part);
        if (repeated) {
            out.converged = true;
            break;
        }
    }
    // An infinite trimmed cost means fewer than q points have a finite
    // divergence to the codebook; never reported as converged.
    if (!std::isfinite(stats.cost)) out.converged = false;

    out.labels = std::move(part.labels);
    out.cost = stats.cost;
    out.trim_radius_sq = stats.radius_sq;
    return out;
}

Codebook initial_codebook(const Dataset& data, std::size_t k, std::uint64_t master_seed, std::size_t start) {
    if (k == 0 || k > data.size()) throw ConfigError("cannot draw k centers from the data");
    Rng rng(derive_seed(master_seed, start));
    const auto picks = sample_without_replacement(rng, data.size(), k);
    Matrix centers(k, data.dimension());
    for (std::size_t j = 0; j < k; ++j) {
        auto src = data.points.row(picks[j]);
        std::copy(src.begin(), src.end(), centers.row(j).begin());
    }
    return Codebook{std::move(centers)};
}

TrimmedFit fit(const Divergence& divergence, const Dataset& data, const TrimConfig& config,
               std::span<const Codebook> extra_starts) {
    const std::size_t n = data.size();
    if (n == 0) throw DegenerateInputError("empty dataset");
    check_q(config.q, config.k, n);
    if (config.n_starts < 0) throw ConfigError("n_starts must be nonnegative");
    const std::size_t random_starts = static_cast<std::size_t>(config.n_starts);
    const std::size_t total = random_starts + extra_starts.size();
    if (total == 0) throw ConfigError("at least one start is required");
    validate_points(divergence, data.points);
    if (count_distinct_rows(data.points) < config.k) {
        throw DegenerateInputError("fewer than k = " + std::to_string(config.k) + " distinct points");
    }

    std::vector<std::optional<TrimmedFit>> results(total);
    std::vector<std::string> failures(total);
    parallel_for(total, config.threads, [&](std::size_t s) {
        try {
            const Codebook init = s < random_starts ? initial_codebook(data, config.k, config.seed, s)
                                                    : extra_starts[s - random_starts];
            TrimmedFit f = lloyd_fit(divergence, data, config, init);
            f.start_index = static_cast<int>(s);
            results[s] = std::move(f);
        } catch (const DomainError& e) {
            failures[s] = e.what();
        }
    });

    std::optional<std::size_t> best;
    int failed = 0;
    for (std::size_t s = 0; s < total; ++s) {
        if (!results[s]) {
            ++failed;
            continue;
        }
        if (!best || results[s]->cost < results[*best]->cost) best = s;
    }
    if (!best) {
        throw DomainError("all " + std::to_string(total) + " starts failed; last error: " + failures.back());
    }
    TrimmedFit out = std::move(*results[*best]);
    out.failed_starts = failed;
    return out;
}

void canonicalize(TrimmedFit& fit) {
    const std::size_t k = fit.codebook.size();
    std::vector<std::size_t> order(k);
    std::iota(order.begin(), order.end(), std::size_t{0});
    const Matrix& c = fit.codebook.centers;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        auto ra = c.row(a);
        auto rb = c.row(b);
        return std::lexicographical_compare(ra.begin(), ra.end(), rb.begin(), rb.end());
    });
    Matrix sorted(k, c.cols());
    std::vector<int> rename(k + 1, 0);
    for (std::size_t j = 0; j < k; ++j) {
        auto src = c.row(order[j]);
        std::copy(src.begin(), src.end(), sorted.row(j).begin());
        rename[order[j] + 1] = static_cast<int>(j + 1);
    }
    fit.codebook.centers = std::move(sorted);
    for (int& label : fit.labels) label = rename[static_cast<std::size_t>(label)];
}

}  // namespace bregtrim
