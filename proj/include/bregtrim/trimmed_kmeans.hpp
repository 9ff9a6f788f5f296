#ifndef BREGTRIM_TRIMMED_KMEANS_HPP
#define BREGTRIM_TRIMMED_KMEANS_HPP

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "bregtrim/divergence.hpp"
#include "bregtrim/matrix.hpp"

namespace bregtrim {

struct TrimConfig {
    std::size_t k = 1;
    /// Number of points kept as signal; q / n is the trim level h.
    std::size_t q = 1;
    int n_starts = 20;
    int max_iter = 100;
    std::uint64_t seed = 0;
    /// Workers for independent restarts; results do not depend on it.
    unsigned threads = 1;
};

/// Result of the trimmed Lloyd iterations.
///
/// labels: 0 for trimmed (noise) points, j in [1, k] for cluster j.
/// cost: (1/n) * sum of the q selected divergences to their centers.
/// trim_radius_sq: largest selected divergence to the codebook.
/// cost_trace: trimmed cost of every codebook visited, initial one first.
struct TrimmedFit {
    Codebook codebook;
    std::vector<int> labels;
    double cost = kInfinity;
    int iterations = 0;
    bool converged = false;
    int empty_cluster_events = 0;
    int start_index = 0;
    double trim_radius_sq = 0.0;
    std::vector<double> cost_trace;
    /// Restarts abandoned because a center left the codepoint domain.
    int failed_starts = 0;
};

/// q nearest points to a codebook plus per-point nearest-center data.
struct TrimSelection {
    /// Ascending point indices of the q smallest divergences.
    std::vector<std::size_t> selected;
    std::vector<double> divergence;
    /// 0-based nearest center per point.
    std::vector<std::size_t> nearest;
};

struct Partition {
    std::vector<std::vector<std::size_t>> clusters;
    std::vector<int> labels;
};

struct CentroidUpdate {
    Codebook codebook;
    int empty_clusters = 0;
};

/// Throws DomainError carrying the first offending row and column.
void validate_points(const Divergence& divergence, const Matrix& points);
void validate_codebook(const Divergence& divergence, const Codebook& codebook, std::size_t dimension);

/// Ties at the q-th value go to the smaller point index.
TrimSelection select_trimmed(const Divergence& divergence, const Dataset& data, const Codebook& codebook,
                             std::size_t q);

Partition partition_selected(std::span<const std::size_t> nearest, std::span<const std::size_t> selected, std::size_t k);

/// Arithmetic means of the clusters; an empty cluster keeps its previous
/// center. Throws DomainError if a mean is not a valid codepoint.
CentroidUpdate centroid_update(const Divergence& divergence, const Dataset& data,
                               const std::vector<std::vector<std::size_t>>& clusters, const Codebook& previous);

/// (1/n) * sum of the q smallest divergences to the codebook.
double empirical_distortion(const Divergence& divergence, const Dataset& data, const Codebook& codebook,
                            std::size_t q);

/// Trimmed Lloyd iterations from a given codebook until the (selected set,
/// partition) pair repeats or max_iter updates have been made.
TrimmedFit lloyd_fit(const Divergence& divergence, const Dataset& data, const TrimConfig& config,
                     const Codebook& initial);

/// k distinct data rows for restart `start` of `config.seed`.
Codebook initial_codebook(const Dataset& data, std::size_t k, std::uint64_t master_seed, std::size_t start);

/// Best of config.n_starts random restarts, plus any extra starting
/// codebooks (their start_index continues after the random ones). Lowest
/// cost wins; ties go to the smaller start index.
TrimmedFit fit(const Divergence& divergence, const Dataset& data, const TrimConfig& config,
               std::span<const Codebook> extra_starts = {});

/// Reorders centers lexicographically (first coordinate, then the next, ...)
/// and renames labels to match. Cost and assignments are unchanged.
void canonicalize(TrimmedFit& fit);

}  // namespace bregtrim

#endif  // BREGTRIM_TRIMMED_KMEANS_HPP
