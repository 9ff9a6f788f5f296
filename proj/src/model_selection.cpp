#include "bregtrim/model_selection.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "bregtrim/errors.hpp"
#include "bregtrim/io.hpp"

namespace bregtrim {

namespace {

void check_grid(const std::vector<std::size_t>& grid, std::size_t lo, std::size_t hi, const char* what) {
    if (grid.empty()) throw ConfigError(std::string(what) + " grid is empty");
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (grid[i] < lo || grid[i] > hi) {
            throw ConfigError(std::string(what) + " = " + std::to_string(grid[i]) + " outside [" + std::to_string(lo) +
                              ", " + std::to_string(hi) + "]");
        }
        if (i > 0 && grid[i] <= grid[i - 1]) throw ConfigError(std::string(what) + " grid must be strictly increasing");
    }
}

/// Lower-k codebook plus the selected point farthest from it.
std::optional<Codebook> augment(const Divergence& divergence, const Dataset& data, const Codebook& base,
                                std::size_t q) {
    const TrimSelection sel = select_trimmed(divergence, data, base, q);
    std::vector<std::size_t> order = sel.selected;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return sel.divergence[a] > sel.divergence[b]; });
    for (std::size_t i : order) {
        if (!divergence.codepoint_in_domain(data.points.row(i))) continue;
        Matrix centers(base.size() + 1, data.dimension());
        for (std::size_t j = 0; j < base.size(); ++j) {
            auto src = base.center(j);
            std::copy(src.begin(), src.end(), centers.row(j).begin());
        }
        auto src = data.points.row(i);
        std::copy(src.begin(), src.end(), centers.row(base.size()).begin());
        return Codebook{std::move(centers)};
    }
    return std::nullopt;
}

struct CurveSeries {
    std::vector<std::size_t> q;
    std::vector<double> cost;
    /// Second difference at interior positions; NaN at the two ends.
    std::vector<double> second;
};

CurveSeries series(const CostCurve& curve, bool median_smoothing) {
    CurveSeries s;
    for (const auto& e : curve.entries) {
        if (e.missing) continue;
        s.q.push_back(e.q);
        s.cost.push_back(e.cost);
    }
    const std::size_t m = s.cost.size();
    std::vector<double> smooth = s.cost;
    if (median_smoothing) {
        for (std::size_t i = 1; i + 1 < m; ++i) {
            double w[3] = {s.cost[i - 1], s.cost[i], s.cost[i + 1]};
            std::sort(w, w + 3);
            smooth[i] = w[1];
        }
    }
    s.second.assign(m, std::nan(""));
    for (std::size_t i = 1; i + 1 < m; ++i) s.second[i] = smooth[i + 1] - 2.0 * smooth[i] + smooth[i - 1];
    return s;
}

}  // namespace

std::vector<std::size_t> default_q_grid(std::size_t k, std::size_t n) {
    if (k == 0 || k > n) throw ConfigError("default q grid needs 1 <= k <= n");
    std::vector<std::size_t> grid;
    if (n <= 500) {
        for (std::size_t q = k; q <= n; ++q) grid.push_back(q);
        return grid;
    }
    constexpr std::size_t kPoints = 200;
    const double span = static_cast<double>(n - k);
    for (std::size_t i = 0; i < kPoints; ++i) {
        const auto q = k + static_cast<std::size_t>(std::llround(span * static_cast<double>(i) / (kPoints - 1)));
        if (grid.empty() || q > grid.back()) grid.push_back(q);
    }
    return grid;
}

CostCurve cost_curve(const Divergence& divergence, const Dataset& data, std::size_t k,
                     const std::vector<std::size_t>& q_grid, const TrimConfig& config, const CostCurve* lower_k) {
    check_grid(q_grid, k, data.size(), "q");
    CostCurve curve;
    curve.k = k;
    curve.entries.resize(q_grid.size());
    const Codebook* larger_q_best = nullptr;
    for (std::size_t idx = q_grid.size(); idx-- > 0;) {
        CurveEntry& entry = curve.entries[idx];
        entry.q = q_grid[idx];
        TrimConfig cell = config;
        cell.k = k;
        cell.q = entry.q;
        try {
            std::vector<Codebook> extra;
            if (larger_q_best) extra.push_back(*larger_q_best);
            if (lower_k && lower_k->k + 1 == k) {
                for (const auto& le : lower_k->entries) {
                    if (le.q != entry.q || le.missing) continue;
                    if (auto cb = augment(divergence, data, le.codebook, entry.q)) extra.push_back(std::move(*cb));
                }
            }
            TrimmedFit best = fit(divergence, data, cell, extra);
            entry.cost = best.cost;
            entry.best_start = best.start_index;
            entry.codebook = std::move(best.codebook);
            larger_q_best = &entry.codebook;
        } catch (const Error& e) {
            entry.missing = true;
            entry.error = e.what();
        }
    }
    return curve;
}

Cutpoint detect_cutpoint(const CostCurve& curve, bool median_smoothing) {
    const CurveSeries s = series(curve, median_smoothing);
    if (s.cost.size() < 4) {
        throw TooFewPointsError("cut point detection needs at least 4 curve entries, got " +
                                std::to_string(s.cost.size()));
    }
    Cutpoint out;
    std::size_t best = 1;
    for (std::size_t i = 2; i + 1 < s.cost.size(); ++i)
        if (s.second[i] > s.second[best]) best = i;
    out.q_star = s.q[best];
    out.score = s.second[best];
    out.low_confidence = !(out.score >= kLowConfidenceScore);
    return out;
}

namespace {

/// Least-squares line through (x[a..b), y[a..b)); returns the residual sum of squares.
double line_sse(const std::vector<double>& x, const std::vector<double>& y, std::size_t a, std::size_t b) {
    const double m = static_cast<double>(b - a);
    double sx = 0, sy = 0;
    for (std::size_t i = a; i < b; ++i) {
        sx += x[i];
        sy += y[i];
    }
    const double mx = sx / m, my = sy / m;
    double sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = a; i < b; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    const double sse = sxx > 0.0 ? syy - sxy * sxy / sxx : syy;
    return std::max(sse, 0.0);
}

}  // namespace

SlopeJump detect_slope_jump(const CostCurve& curve) {
    constexpr std::size_t min_segment = 3;
    const CurveSeries s = series(curve, false);
    if (s.cost.size() < 2 * min_segment + 1) {
        throw TooFewPointsError("slope jump detection needs at least 7 curve entries, got " +
                                std::to_string(s.cost.size()));
    }
    // Slope i runs from q[i] to q[i+1] and sits at q[i+1].
    std::vector<double> x, slope;
    for (std::size_t i = 0; i + 1 < s.cost.size(); ++i) {
        const double dq = static_cast<double>(s.q[i + 1] - s.q[i]);
        x.push_back(static_cast<double>(s.q[i + 1]));
        slope.push_back((s.cost[i + 1] - s.cost[i]) / dq);
    }
    const std::size_t m = slope.size();
    const double total = line_sse(x, slope, 0, m);
    SlopeJump out;
    double best = kInfinity;
    std::size_t best_j = min_segment;
    for (std::size_t j = min_segment; j + min_segment <= m; ++j) {
        const double sse = line_sse(x, slope, 0, j) + line_sse(x, slope, j, m);
        if (sse < best) {
            best = sse;
            best_j = j;
        }
    }
    out.q_star = s.q[best_j];
    double scale = 0.0;
    for (double v : slope) scale = std::max(scale, std::abs(v));
    // A one-line fit that is already exact (up to rounding) has no jump.
    out.strength = total > 1e-18 * scale * scale * static_cast<double>(m) ? std::clamp(1.0 - best / total, 0.0, 1.0) : 0.0;
    return out;
}

SelectionReport select_k_q(const Divergence& divergence, const Dataset& data, const std::vector<std::size_t>& k_grid,
                           const std::vector<std::size_t>& q_grid, const TrimConfig& config) {
    if (k_grid.empty()) throw ConfigError("k grid is empty");
    check_grid(k_grid, 1, data.size(), "k");
    SelectionReport report;
    report.degenerate = true;
    for (std::size_t k : k_grid) {
        std::vector<std::size_t> grid;
        for (std::size_t q : q_grid)
            if (q >= k) grid.push_back(q);
        if (grid.empty()) continue;
        const CostCurve* lower = report.curves.empty() ? nullptr : &report.curves.back();
        report.curves.push_back(cost_curve(divergence, data, k, grid, config, lower));
        for (const auto& e : report.curves.back().entries)
            if (!e.missing && e.cost != 0.0) report.degenerate = false;
    }

    for (std::size_t c = 0; c < report.curves.size(); ++c) {
        const CostCurve& curve = report.curves[c];
        const CostCurve* lower = c > 0 && report.curves[c - 1].k + 1 == curve.k ? &report.curves[c - 1] : nullptr;
        const CurveSeries s = series(curve, true);
        if (s.cost.size() < 4) continue;
        const Cutpoint cut = detect_cutpoint(curve);
        report.suggestions.emplace_back(curve.k, cut);

        if (s.cost.size() < 7) continue;
        const SlopeJump jump = detect_slope_jump(curve);
        Candidate cand;
        cand.k = curve.k;
        cand.q = jump.q_star;
        cand.knee = jump.strength;
        cand.low_confidence = !(jump.strength >= kLowConfidenceScore) || report.degenerate;
        cand.decrease = 0.0;
        if (lower) {
            const auto it = std::find_if(curve.entries.begin(), curve.entries.end(),
                                         [&](const CurveEntry& e) { return e.q == jump.q_star; });
            for (const auto& le : lower->entries) {
                if (le.q != jump.q_star || le.missing) continue;
                cand.decrease = le.cost > 0.0 ? (le.cost - it->cost) / le.cost : 0.0;
            }
        }
        cand.score = cand.knee * cand.decrease;
        report.candidates.push_back(cand);
    }
    std::stable_sort(report.candidates.begin(), report.candidates.end(),
                     [](const Candidate& a, const Candidate& b) { return a.score > b.score; });
    return report;
}

std::string curves_to_csv(const std::vector<CostCurve>& curves, bool median_smoothing) {
    std::string out = "k,q,cost,score\n";
    for (const auto& curve : curves) {
        const CurveSeries s = series(curve, median_smoothing);
        std::size_t pos = 0;
        for (const auto& e : curve.entries) {
            out += std::to_string(curve.k) + "," + std::to_string(e.q) + ",";
            if (e.missing) {
                out += ",\n";
                continue;
            }
            out += format_double(e.cost) + ",";
            if (!std::isnan(s.second[pos])) out += format_double(s.second[pos]);
            out += '\n';
            ++pos;
        }
    }
    return out;
}

std::string curves_to_svg(const std::vector<CostCurve>& curves) {
    constexpr double width = 640, height = 400, left = 70, right = 20, top = 20, bottom = 50;
    double qmin = kInfinity, qmax = -kInfinity, cmin = kInfinity, cmax = -kInfinity;
    for (const auto& curve : curves)
        for (const auto& e : curve.entries) {
            if (e.missing || !std::isfinite(e.cost)) continue;
            qmin = std::min(qmin, static_cast<double>(e.q));
            qmax = std::max(qmax, static_cast<double>(e.q));
            cmin = std::min(cmin, e.cost);
            cmax = std::max(cmax, e.cost);
        }
    if (!(qmin < qmax)) {
        qmin = std::isfinite(qmin) ? qmin - 1 : 0;
        qmax = qmin + 2;
    }
    if (!(cmin < cmax)) {
        cmin = std::isfinite(cmin) ? cmin : 0;
        cmax = cmin + 1;
    }
    auto px = [&](double q) { return left + (q - qmin) / (qmax - qmin) * (width - left - right); };
    auto py = [&](double c) { return height - bottom - (c - cmin) / (cmax - cmin) * (height - top - bottom); };
    static const char* palette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};

    std::ostringstream svg;
    svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
        << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << width << "\" height=\"" << height
        << "\" viewBox=\"0 0 " << width << " " << height << "\">\n"
        << "<rect x=\"0\" y=\"0\" width=\"" << width << "\" height=\"" << height << "\" fill=\"white\"/>\n"
        << "<line x1=\"" << left << "\" y1=\"" << height - bottom << "\" x2=\"" << width - right << "\" y2=\""
        << height - bottom << "\" stroke=\"black\"/>\n"
        << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\"" << height - bottom
        << "\" stroke=\"black\"/>\n"
        << "<text x=\"" << (left + width - right) / 2 << "\" y=\"" << height - 15
        << "\" text-anchor=\"middle\" font-size=\"14\">q</text>\n"
        << "<text x=\"15\" y=\"" << (top + height - bottom) / 2 << "\" text-anchor=\"middle\" font-size=\"14\" "
        << "transform=\"rotate(-90 15 " << (top + height - bottom) / 2 << ")\">cost</text>\n"
        << "<text x=\"" << left << "\" y=\"" << height - bottom + 18 << "\" font-size=\"11\">" << format_double(qmin)
        << "</text>\n"
        << "<text x=\"" << width - right << "\" y=\"" << height - bottom + 18 << "\" text-anchor=\"end\" font-size=\"11\">"
        << format_double(qmax) << "</text>\n"
        << "<text x=\"" << left - 5 << "\" y=\"" << height - bottom << "\" text-anchor=\"end\" font-size=\"11\">"
        << format_double(cmin) << "</text>\n"
        << "<text x=\"" << left - 5 << "\" y=\"" << top + 10 << "\" text-anchor=\"end\" font-size=\"11\">"
        << format_double(cmax) << "</text>\n";
    for (std::size_t c = 0; c < curves.size(); ++c) {
        const char* color = palette[c % (sizeof(palette) / sizeof(palette[0]))];
        svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
        bool first = true;
        for (const auto& e : curves[c].entries) {
            if (e.missing || !std::isfinite(e.cost)) continue;
            if (!first) svg << ' ';
            svg << px(static_cast<double>(e.q)) << ',' << py(e.cost);
            first = false;
        }
        svg << "\"/>\n";
        svg << "<text x=\"" << width - right - 5 << "\" y=\"" << top + 15 * (c + 1) << "\" text-anchor=\"end\" fill=\""
            << color << "\" font-size=\"12\">k=" << curves[c].k << "</text>\n";
    }
    svg << "</svg>\n";
    return svg.str();
}

}  // namespace bregtrim
