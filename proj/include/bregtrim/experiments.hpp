#ifndef BREGTRIM_EXPERIMENTS_HPP
#define BREGTRIM_EXPERIMENTS_HPP

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "bregtrim/datagen.hpp"
#include "bregtrim/divergence.hpp"
#include "bregtrim/model_selection.hpp"
#include "bregtrim/trimmed_kmeans.hpp"

namespace bregtrim {

struct Quantiles {
    double min = 0, q25 = 0, median = 0, q75 = 0, max = 0;
};

/// Linear-interpolation quantiles of the finite values; NaN if none.
Quantiles summarize(std::vector<double> values);

struct ComparisonCell {
    std::string preset;
    std::string divergence;
    /// One value per replication; NaN where the fit failed.
    std::vector<double> nmi;
    std::vector<std::string> failures;
    Quantiles quantiles;
};

struct ComparisonReport {
    std::size_t k = 0;
    std::size_t q = 0;
    std::size_t replications = 0;
    std::uint64_t seed = 0;
    /// Data seed of each replication (shared by every preset and divergence).
    std::vector<std::uint64_t> data_seeds;
    std::vector<std::uint64_t> fit_seeds;
    std::vector<ComparisonCell> cells;
};

struct NamedMixture {
    std::string name;
    MixtureSpec spec;
};

struct ComparisonOptions {
    int n_starts = 20;
    int max_iter = 100;
    unsigned threads = 1;
};

/// For each replication r: draw every mixture with the data seed of r, fit
/// it with every divergence (k, q) and score the labels against the truth
/// with NMI (noise is cluster 0 on both sides).
ComparisonReport run_comparison(const std::vector<NamedMixture>& mixtures, const std::vector<Divergence>& divergences,
                                std::size_t k, std::size_t q, std::size_t replications, std::uint64_t seed,
                                const ComparisonOptions& options = {});
ComparisonReport run_comparison(const std::vector<std::string>& presets, const std::vector<Divergence>& divergences,
                                std::size_t k, std::size_t q, std::size_t replications, std::uint64_t seed,
                                const ComparisonOptions& options = {});

std::string comparison_to_json(const ComparisonReport& report);
std::string comparison_to_csv(const ComparisonReport& report);

/// Deterministic three-atom sample: round(n*gamma) points at N, the rest
/// split with fraction p at +1 and 1 - p at -1.
struct AtomCounts {
    std::size_t minus_one = 0;
    std::size_t plus_one = 0;
    std::size_t at_n = 0;
};

AtomCounts breakdown_atoms(double p, double gamma, std::size_t n);
Dataset breakdown_dataset(const AtomCounts& counts, double far_value);

/// min((h + p - 1) / p, 1 - h), valid for h > 1 - p.
double discernability_factor(double p, double h);

struct BreakdownPoint {
    double far_value = 0.0;
    Codebook codebook;
    double cost = 0.0;
    double max_magnitude = 0.0;
};

struct BreakdownSweep {
    double p = 0.0;
    double h = 0.0;
    double gamma = 0.0;
    std::size_t n = 0;
    std::size_t q = 0;
    AtomCounts atoms;
    double discernability = 0.0;
    std::vector<BreakdownPoint> points;
};

/// Two-center h-trimmed fits of the contaminated sample for every N,
/// started from every pair of distinct atoms and from the best grouping of
/// kept atom counts, keeping the cheapest.
/// Equal costs go to the codebook with the largest magnitude, so a far
/// optimal codebook is reported whenever one exists.
BreakdownSweep run_breakdown(double p, double h, double gamma, const std::vector<double>& far_values, std::size_t n,
                             const Divergence& divergence = Divergence::squared_euclidean(), int max_iter = 100);

std::string breakdown_to_json(const BreakdownSweep& sweep);

struct SelectionDemo {
    Dataset data;
    SelectionReport report;
    std::string curves_csv;
};

/// Samples `preset_name` with `seed` and runs select_k_q with the preset's
/// matching divergence.
SelectionDemo run_selection_demo(const std::string& preset_name, const std::vector<std::size_t>& k_grid,
                                 const std::vector<std::size_t>& q_grid, std::uint64_t seed, int n_starts = 20,
                                 unsigned threads = 1);

}  // namespace bregtrim

#endif  // BREGTRIM_EXPERIMENTS_HPP
