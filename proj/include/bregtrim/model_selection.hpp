#ifndef BREGTRIM_MODEL_SELECTION_HPP
#define BREGTRIM_MODEL_SELECTION_HPP

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "bregtrim/divergence.hpp"
#include "bregtrim/trimmed_kmeans.hpp"

namespace bregtrim {

struct CurveEntry {
    std::size_t q = 0;
    double cost = kInfinity;
    /// start_index of the winning restart.
    int best_start = -1;
    /// Set when the fit for this cell failed; `error` holds the reason.
    bool missing = false;
    std::string error;
    Codebook codebook;
};

/// q -> best trimmed cost for one k, entries sorted by q.
struct CostCurve {
    std::size_t k = 0;
    std::vector<CurveEntry> entries;
};

/// Cut point of a cost curve: the grid q with the largest second
/// difference cost[q+1] - 2 cost[q] + cost[q-1] (index-based, over the
/// non-missing entries). Heuristic; always inspect the curve itself.
struct Cutpoint {
    std::size_t q_star = 0;
    double score = 0.0;
    bool low_confidence = false;
};

inline constexpr double kLowConfidenceScore = 1e-9;

/// Slope jump of a cost curve: the slopes (cost increments per unit q)
/// are fitted by two line segments, each covering at least three slopes,
/// and q_star is the last q before the break. `strength` is the share of
/// the one-line residual removed by the break, in [0, 1].
struct SlopeJump {
    std::size_t q_star = 0;
    double strength = 0.0;
};

struct Candidate {
    std::size_t k = 0;
    std::size_t q = 0;
    /// Slope jump strength of the k curve at q.
    double knee = 0.0;
    /// (cost_{k-1}[q] - cost_k[q]) / cost_{k-1}[q]; 0 when the grid has no k-1.
    double decrease = 0.0;
    /// Ranking score, knee * decrease.
    double score = 0.0;
    bool low_confidence = false;
};

struct SelectionReport {
    /// Best first.
    std::vector<Candidate> candidates;
    /// Per k (same order as `curves`), the cut point of its curve.
    std::vector<std::pair<std::size_t, Cutpoint>> suggestions;
    std::vector<CostCurve> curves;
    /// Every cost is zero: the data cannot discriminate (k, q).
    bool degenerate = false;
};

/// Every integer in [k, n] when n <= 500, else 200 evenly spaced values.
std::vector<std::size_t> default_q_grid(std::size_t k, std::size_t n);

/// Best multi-restart cost for each q of the grid. Cells are fitted from
/// the largest q down; each cell also starts from the best codebook of the
/// next larger q, and, when `lower_k` is the curve for k - 1, from that
/// curve's codebook at the same q plus one data point. Failed cells are
/// marked missing instead of aborting the curve.
CostCurve cost_curve(const Divergence& divergence, const Dataset& data, std::size_t k,
                     const std::vector<std::size_t>& q_grid, const TrimConfig& config,
                     const CostCurve* lower_k = nullptr);

Cutpoint detect_cutpoint(const CostCurve& curve, bool median_smoothing = true);

/// Needs at least 7 non-missing entries; throws TooFewPointsError.
SlopeJump detect_slope_jump(const CostCurve& curve);

/// Curves for every k of the grid and a ranked list of (k, q) candidates.
/// Never picks a single answer.
SelectionReport select_k_q(const Divergence& divergence, const Dataset& data, const std::vector<std::size_t>& k_grid,
                           const std::vector<std::size_t>& q_grid, const TrimConfig& config);

/// CSV with header `k,q,cost,score`; score is the second difference at q
/// (empty at curve ends and for missing cells, cost empty when missing).
std::string curves_to_csv(const std::vector<CostCurve>& curves, bool median_smoothing = true);

/// SVG 1.1 line plot, one polyline per k.
std::string curves_to_svg(const std::vector<CostCurve>& curves);

}  // namespace bregtrim

#endif  // BREGTRIM_MODEL_SELECTION_HPP
