#include "bregtrim/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "bregtrim/errors.hpp"

namespace bregtrim {

namespace {

std::vector<int> distinct_sorted(std::span<const int> v) {
    std::vector<int> out(v.begin(), v.end());
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

std::size_t position(const std::vector<int>& sorted, int label) {
    return static_cast<std::size_t>(std::lower_bound(sorted.begin(), sorted.end(), label) - sorted.begin());
}

double entropy(const std::vector<double>& counts, double n) {
    double h = 0.0;
    for (double c : counts) {
        if (c > 0.0) h -= (c / n) * std::log(c / n);
    }
    return h;
}

}  // namespace

Contingency contingency(std::span<const int> a, std::span<const int> b) {
    if (a.size() != b.size()) {
        throw LengthMismatchError("label vectors differ in length: " + std::to_string(a.size()) + " vs " +
                                  std::to_string(b.size()));
    }
    Contingency out;
    out.row_labels = distinct_sorted(a);
    out.column_labels = distinct_sorted(b);
    out.counts.assign(out.row_labels.size(), std::vector<std::size_t>(out.column_labels.size(), 0));
    for (std::size_t i = 0; i < a.size(); ++i) {
        ++out.counts[position(out.row_labels, a[i])][position(out.column_labels, b[i])];
    }
    return out;
}

double nmi(std::span<const int> a, std::span<const int> b) {
    const Contingency table = contingency(a, b);
    const double n = static_cast<double>(a.size());
    if (n == 0.0) return 0.0;
    const std::size_t rows = table.row_labels.size();
    const std::size_t cols = table.column_labels.size();
    std::vector<double> row_sum(rows, 0.0);
    std::vector<double> col_sum(cols, 0.0);
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < cols; ++c) {
            row_sum[r] += static_cast<double>(table.counts[r][c]);
            col_sum[c] += static_cast<double>(table.counts[r][c]);
        }
    const double ha = entropy(row_sum, n);
    const double hb = entropy(col_sum, n);
    if (ha <= 0.0 || hb <= 0.0) return 0.0;

    // Terms are summed in sorted order so that transposing the table
    // (swapping a and b) gives the same value bit for bit.
    std::vector<double> terms;
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < cols; ++c) {
            const double nrc = static_cast<double>(table.counts[r][c]);
            if (nrc == 0.0) continue;
            terms.push_back((nrc / n) * std::log(nrc * n / (row_sum[r] * col_sum[c])));
        }
    std::sort(terms.begin(), terms.end());
    double mi = 0.0;
    for (double t : terms) mi += t;
    const double value = mi / std::sqrt(ha * hb);
    return std::clamp(value, 0.0, 1.0);
}

}  // namespace bregtrim
