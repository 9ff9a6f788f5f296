#include "bregtrim/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>

#include <json.hpp>

#include "bregtrim/errors.hpp"
#include "bregtrim/io.hpp"
#include "bregtrim/metrics.hpp"
#include "bregtrim/parallel.hpp"
#include "bregtrim/rng.hpp"

namespace bregtrim {

Quantiles summarize(std::vector<double> values) {
    values.erase(std::remove_if(values.begin(), values.end(), [](double v) { return !std::isfinite(v); }),
                 values.end());
    Quantiles out;
    if (values.empty()) {
        const double nan = std::nan("");
        return {nan, nan, nan, nan, nan};
    }
    std::sort(values.begin(), values.end());
    auto at = [&](double prob) {
        const double pos = prob * static_cast<double>(values.size() - 1);
        const auto lo = static_cast<std::size_t>(std::floor(pos));
        const auto hi = std::min(lo + 1, values.size() - 1);
        const double frac = pos - static_cast<double>(lo);
        return values[lo] + frac * (values[hi] - values[lo]);
    };
    out.min = values.front();
    out.q25 = at(0.25);
    out.median = at(0.5);
    out.q75 = at(0.75);
    out.max = values.back();
    return out;
}

ComparisonReport run_comparison(const std::vector<NamedMixture>& mixtures, const std::vector<Divergence>& divergences,
                                std::size_t k, std::size_t q, std::size_t replications, std::uint64_t seed,
                                const ComparisonOptions& options) {
    if (mixtures.empty() || divergences.empty()) throw ConfigError("comparison needs mixtures and divergences");
    if (replications == 0) throw ConfigError("replications must be positive");
    for (const auto& m : mixtures) {
        m.spec.validate();
        const std::size_t n = m.spec.n_signal + m.spec.n_noise;
        if (q < k || q > n) {
            throw ConfigError("q = " + std::to_string(q) + " outside [k, n] for " + m.name + " (n = " +
                              std::to_string(n) + ")");
        }
    }

    ComparisonReport report;
    report.k = k;
    report.q = q;
    report.replications = replications;
    report.seed = seed;
    for (std::size_t r = 0; r < replications; ++r) {
        report.data_seeds.push_back(derive_seed(seed, 2 * r));
        report.fit_seeds.push_back(derive_seed(seed, 2 * r + 1));
    }
    const std::size_t n_div = divergences.size();
    report.cells.resize(mixtures.size() * n_div);
    for (std::size_t m = 0; m < mixtures.size(); ++m)
        for (std::size_t d = 0; d < n_div; ++d) {
            auto& cell = report.cells[m * n_div + d];
            cell.preset = mixtures[m].name;
            cell.divergence = divergences[d].to_string();
            cell.nmi.assign(replications, std::nan(""));
            cell.failures.assign(replications, "");
        }

    const std::size_t jobs = replications * mixtures.size();
    parallel_for(jobs, options.threads, [&](std::size_t job) {
        const std::size_t r = job / mixtures.size();
        const std::size_t m = job % mixtures.size();
        MixtureSpec spec = mixtures[m].spec;
        spec.seed = report.data_seeds[r];
        const Dataset data = sample(spec);
        for (std::size_t d = 0; d < n_div; ++d) {
            auto& cell = report.cells[m * n_div + d];
            TrimConfig config;
            config.k = k;
            config.q = q;
            config.n_starts = options.n_starts;
            config.max_iter = options.max_iter;
            config.seed = report.fit_seeds[r];
            try {
                const TrimmedFit f = fit(divergences[d], data, config);
                cell.nmi[r] = nmi(f.labels, *data.labels);
            } catch (const Error& e) {
                cell.failures[r] = e.what();
            }
        }
    });
    for (auto& cell : report.cells) cell.quantiles = summarize(cell.nmi);
    return report;
}

ComparisonReport run_comparison(const std::vector<std::string>& presets, const std::vector<Divergence>& divergences,
                                std::size_t k, std::size_t q, std::size_t replications, std::uint64_t seed,
                                const ComparisonOptions& options) {
    std::vector<NamedMixture> mixtures;
    for (const auto& p : presets) mixtures.push_back({p, preset(p)});
    return run_comparison(mixtures, divergences, k, q, replications, seed, options);
}

namespace {

nlohmann::ordered_json finite_or_null(double v) {
    if (std::isfinite(v)) return v;
    return nullptr;
}

nlohmann::ordered_json quantiles_json(const Quantiles& q) {
    nlohmann::ordered_json j;
    j["min"] = finite_or_null(q.min);
    j["q25"] = finite_or_null(q.q25);
    j["median"] = finite_or_null(q.median);
    j["q75"] = finite_or_null(q.q75);
    j["max"] = finite_or_null(q.max);
    return j;
}

}  // namespace

std::string comparison_to_json(const ComparisonReport& report) {
    nlohmann::ordered_json j;
    j["k"] = report.k;
    j["q"] = report.q;
    j["replications"] = report.replications;
    j["seed"] = report.seed;
    auto results = nlohmann::ordered_json::array();
    for (const auto& cell : report.cells) {
        nlohmann::ordered_json c;
        c["preset"] = cell.preset;
        c["divergence"] = cell.divergence;
        c["k"] = report.k;
        c["q"] = report.q;
        c["seeds"] = report.data_seeds;
        auto values = nlohmann::ordered_json::array();
        for (double v : cell.nmi) values.push_back(finite_or_null(v));
        c["nmi"] = std::move(values);
        c["quantiles"] = quantiles_json(cell.quantiles);
        auto failures = nlohmann::ordered_json::array();
        for (std::size_t r = 0; r < cell.failures.size(); ++r) {
            if (cell.failures[r].empty()) continue;
            failures.push_back({{"replication", r}, {"error", cell.failures[r]}});
        }
        c["failures"] = std::move(failures);
        results.push_back(std::move(c));
    }
    j["results"] = std::move(results);
    return j.dump(2) + "\n";
}

std::string comparison_to_csv(const ComparisonReport& report) {
    std::string out = "preset,divergence,k,q,replications,failed,min,q25,median,q75,max\n";
    for (const auto& cell : report.cells) {
        const auto failed = std::count_if(cell.failures.begin(), cell.failures.end(),
                                          [](const std::string& s) { return !s.empty(); });
        out += "\"" + cell.preset + "\"," + cell.divergence + "," + std::to_string(report.k) + "," +
               std::to_string(report.q) + "," + std::to_string(report.replications) + "," + std::to_string(failed);
        for (double v : {cell.quantiles.min, cell.quantiles.q25, cell.quantiles.median, cell.quantiles.q75,
                         cell.quantiles.max})
            out += "," + format_double(v);
        out += '\n';
    }
    return out;
}

AtomCounts breakdown_atoms(double p, double gamma, std::size_t n) {
    AtomCounts c;
    const double total = static_cast<double>(n);
    c.at_n = static_cast<std::size_t>(std::llround(total * gamma));
    const std::size_t rest = n - c.at_n;
    c.plus_one = static_cast<std::size_t>(std::llround(static_cast<double>(rest) * p));
    c.minus_one = rest - c.plus_one;
    return c;
}

Dataset breakdown_dataset(const AtomCounts& counts, double far_value) {
    std::vector<double> values;
    values.insert(values.end(), counts.minus_one, -1.0);
    values.insert(values.end(), counts.plus_one, 1.0);
    values.insert(values.end(), counts.at_n, far_value);
    return Dataset{Matrix::column(values), std::nullopt};
}

double discernability_factor(double p, double h) { return std::min((h + p - 1.0) / p, 1.0 - h); }

namespace {

double max_magnitude(const Codebook& codebook) {
    double m = 0.0;
    for (double v : codebook.centers.values()) m = std::max(m, std::abs(v));
    return m;
}

// Best two-center codebook over every choice of kept count per atom and
// every split of the kept atoms into two groups. Lloyd from the atom pairs
// alone can stall when an atom is equidistant from both centers.
std::optional<Codebook> best_grouped_codebook(const Divergence& divergence, const std::vector<double>& atoms,
                                              const std::vector<std::size_t>& counts, std::size_t q) {
    const std::size_t m = atoms.size();
    std::optional<Codebook> best;
    double best_cost = kInfinity;
    std::vector<std::size_t> kept(m, 0);

    auto score = [&] {
        std::vector<std::size_t> live;
        for (std::size_t t = 0; t < m; ++t)
            if (kept[t] > 0) live.push_back(t);
        if (live.size() < 2) return;
        // Group membership by bit; the first live atom is always in group 0.
        for (unsigned mask = 0; mask < (1u << (live.size() - 1)) - 1; ++mask) {
            double sum[2] = {0, 0}, weight[2] = {0, 0};
            std::vector<int> group(live.size());
            for (std::size_t i = 0; i < live.size(); ++i) {
                group[i] = i == 0 ? 0 : static_cast<int>((mask >> (i - 1)) & 1u) ^ 1;
                sum[group[i]] += atoms[live[i]] * static_cast<double>(kept[live[i]]);
                weight[group[i]] += static_cast<double>(kept[live[i]]);
            }
            if (weight[1] == 0.0) continue;
            const double center[2] = {sum[0] / weight[0], sum[1] / weight[1]};
            if (!divergence.codepoint_in_domain(std::span(center, 1)) ||
                !divergence.codepoint_in_domain(std::span(center + 1, 1)))
                continue;
            double cost = 0.0;
            for (std::size_t i = 0; i < live.size(); ++i)
                cost += static_cast<double>(kept[live[i]]) *
                        divergence.evaluate_unchecked(std::span(&atoms[live[i]], 1), std::span(center + group[i], 1));
            if (cost < best_cost) {
                best_cost = cost;
                best = Codebook{Matrix::from_rows({{center[0]}, {center[1]}})};
            }
        }
    };

    auto recurse = [&](auto&& self, std::size_t t, std::size_t left) -> void {
        if (t + 1 == m) {
            if (left > counts[t]) return;
            kept[t] = left;
            score();
            return;
        }
        for (std::size_t c = 0; c <= std::min(left, counts[t]); ++c) {
            kept[t] = c;
            self(self, t + 1, left - c);
        }
    };
    recurse(recurse, 0, q);
    return best;
}

}  // namespace

BreakdownSweep run_breakdown(double p, double h, double gamma, const std::vector<double>& far_values, std::size_t n,
                             const Divergence& divergence, int max_iter) {
    if (!(p > 0.0 && p <= 0.5)) throw ConfigError("p must lie in (0, 1/2]");
    if (!(h > 0.0 && h < 1.0)) throw ConfigError("h must lie in (0, 1)");
    if (!(h > 1.0 - p)) throw ConfigError("h must exceed 1 - p for the two-atom breakdown example");
    if (!(gamma >= 0.0 && gamma < 1.0)) throw ConfigError("gamma must lie in [0, 1)");
    if (far_values.empty()) throw ConfigError("N list is empty");
    for (std::size_t i = 0; i < far_values.size(); ++i) {
        if (!(far_values[i] > 1.0) || !std::isfinite(far_values[i])) throw ConfigError("every N must exceed 1");
        if (i > 0 && !(far_values[i] > far_values[i - 1])) throw ConfigError("N list must be strictly increasing");
    }

    BreakdownSweep sweep;
    sweep.p = p;
    sweep.h = h;
    sweep.gamma = gamma;
    sweep.n = n;
    // n*h is rounded before taking the ceiling so 0.9 * 1000 gives 900.
    sweep.q = static_cast<std::size_t>(std::ceil(static_cast<double>(n) * h - 1e-9));
    sweep.atoms = breakdown_atoms(p, gamma, n);
    sweep.discernability = discernability_factor(p, h);
    if (sweep.q < 2 || sweep.q > n) throw ConfigError("n * h must give at least 2 kept points");

    for (double far : far_values) {
        const Dataset data = breakdown_dataset(sweep.atoms, far);
        std::vector<double> atoms;
        std::vector<std::size_t> counts;
        auto add = [&](double value, std::size_t count) {
            if (count == 0) return;
            atoms.push_back(value);
            counts.push_back(count);
        };
        add(-1.0, sweep.atoms.minus_one);
        add(1.0, sweep.atoms.plus_one);
        add(far, sweep.atoms.at_n);
        if (atoms.size() < 2) throw DegenerateInputError("breakdown sample needs two distinct atoms");

        TrimConfig config;
        config.k = 2;
        config.q = sweep.q;
        config.max_iter = max_iter;
        std::vector<Codebook> starts;
        for (std::size_t a = 0; a < atoms.size(); ++a)
            for (std::size_t b = a + 1; b < atoms.size(); ++b)
                starts.push_back(Codebook{Matrix::from_rows({{atoms[a]}, {atoms[b]}})});
        if (auto grouped = best_grouped_codebook(divergence, atoms, counts, sweep.q)) starts.push_back(*grouped);

        std::optional<TrimmedFit> best;
        for (const auto& init : starts) {
            TrimmedFit f = lloyd_fit(divergence, data, config, init);
            if (!best) {
                best = std::move(f);
                continue;
            }
            // Breakdown is about the worst optimal codebook, so cost ties
            // go to the one reaching farthest.
            const double tol = 1e-12 * std::max(1.0, std::abs(best->cost));
            if (f.cost < best->cost - tol ||
                (std::abs(f.cost - best->cost) <= tol && max_magnitude(f.codebook) > max_magnitude(best->codebook)))
                best = std::move(f);
        }
        BreakdownPoint point;
        point.far_value = far;
        point.cost = best->cost;
        point.codebook = best->codebook;
        point.max_magnitude = max_magnitude(point.codebook);
        sweep.points.push_back(std::move(point));
    }
    return sweep;
}

std::string breakdown_to_json(const BreakdownSweep& sweep) {
    nlohmann::ordered_json j;
    j["p"] = sweep.p;
    j["h"] = sweep.h;
    j["gamma"] = sweep.gamma;
    j["n"] = sweep.n;
    j["q"] = sweep.q;
    j["atoms"] = {{"minus_one", sweep.atoms.minus_one}, {"plus_one", sweep.atoms.plus_one}, {"at_N", sweep.atoms.at_n}};
    j["discernability_factor"] = sweep.discernability;
    auto points = nlohmann::ordered_json::array();
    for (const auto& pt : sweep.points) {
        nlohmann::ordered_json e;
        e["N"] = pt.far_value;
        std::vector<double> centers;
        for (std::size_t c = 0; c < pt.codebook.size(); ++c) centers.push_back(pt.codebook.centers(c, 0));
        e["codebook"] = centers;
        e["cost"] = finite_or_null(pt.cost);
        e["max_magnitude"] = pt.max_magnitude;
        points.push_back(std::move(e));
    }
    j["points"] = std::move(points);
    return j.dump(2) + "\n";
}

SelectionDemo run_selection_demo(const std::string& preset_name, const std::vector<std::size_t>& k_grid,
                                 const std::vector<std::size_t>& q_grid, std::uint64_t seed, int n_starts,
                                 unsigned threads) {
    MixtureSpec spec = preset(preset_name);
    spec.seed = derive_seed(seed, 0);
    SelectionDemo demo;
    demo.data = sample(spec);
    if (k_grid.empty()) throw ConfigError("k grid is empty");
    const std::vector<std::size_t> grid =
        q_grid.empty() ? default_q_grid(*std::min_element(k_grid.begin(), k_grid.end()), demo.data.size()) : q_grid;
    TrimConfig config;
    config.n_starts = n_starts;
    config.seed = derive_seed(seed, 1);
    config.threads = threads;
    demo.report = select_k_q(preset_divergence(preset_name), demo.data, k_grid, grid, config);
    demo.curves_csv = curves_to_csv(demo.report.curves);
    return demo;
}

}  // namespace bregtrim
