#ifndef BREGTRIM_METRICS_HPP
#define BREGTRIM_METRICS_HPP

#include <cstddef>
#include <span>
#include <vector>

namespace bregtrim {

/// Counts of co-occurring labels. Rows follow the distinct labels of `a`
/// in ascending order (0 = noise included), columns those of `b`.
struct Contingency {
    std::vector<int> row_labels;
    std::vector<int> column_labels;
    std::vector<std::vector<std::size_t>> counts;
};

Contingency contingency(std::span<const int> a, std::span<const int> b);

/// Normalized mutual information I(A;B) / sqrt(H(A) H(B)) with natural
/// logarithms. Noise (label 0) counts as an ordinary cluster. Returns 0
/// when either labeling has zero entropy.
double nmi(std::span<const int> a, std::span<const int> b);

}  // namespace bregtrim

#endif  // BREGTRIM_METRICS_HPP
