#include "bregtrim/cli.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <charconv>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "bregtrim/datagen.hpp"
#include "bregtrim/divergence.hpp"
#include "bregtrim/errors.hpp"
#include "bregtrim/experiments.hpp"
#include "bregtrim/io.hpp"
#include "bregtrim/metrics.hpp"
#include "bregtrim/model_selection.hpp"
#include "bregtrim/parallel.hpp"
#include "bregtrim/trimmed_kmeans.hpp"

namespace bregtrim {

namespace {

std::string trim_copy(std::string_view s) {
    while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
    while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
    return std::string(s);
}

std::size_t parse_count(std::string_view text) {
    const std::string t = trim_copy(text);
    std::size_t value = 0;
    auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
    if (t.empty() || ec != std::errc() || ptr != t.data() + t.size()) {
        throw ConfigError("'" + t + "' is not a nonnegative integer");
    }
    return value;
}

/// Prints reals so that integral values keep a trailing ".0".
std::string format_real(double v) {
    std::string s = format_double(v);
    if (std::isfinite(v) && s.find_first_of(".eE") == std::string::npos) s += ".0";
    return s;
}

struct FitOptions {
    std::string input;
    std::string divergence = "sqeuclidean";
    std::size_t k = 0;
    std::size_t q = 0;
    int starts = 20;
    std::uint64_t seed = 0;
    int max_iter = 100;
    std::string output;
};

struct SweepOptions {
    std::string input;
    std::string divergence = "sqeuclidean";
    std::string k_grid;
    std::string q_grid;
    int starts = 20;
    std::uint64_t seed = 0;
    int max_iter = 100;
    std::string out_curves;
    std::string out_svg;
};

struct GenerateOptions {
    std::string preset;
    std::string spec_file;
    std::uint64_t seed = 0;
    std::string output;
};

struct EvalOptions {
    std::string labels_a;
    std::string labels_b;
    std::string column_a = "label";
    std::string column_b = "label";
};

struct BreakdownOptions {
    double p = 0.0;
    double h = 0.0;
    double gamma = 0.0;
    std::string n_list;
    std::size_t n = 1000;
    std::string divergence = "sqeuclidean";
    std::string output;
};

struct CompareOptions {
    std::vector<std::string> presets;
    std::vector<std::string> divergences;
    std::size_t k = 3;
    std::size_t q = 110;
    std::size_t replications = 100;
    std::uint64_t seed = 0;
    int starts = 20;
    std::string out_json;
    std::string out_csv;
};

Dataset load_dataset(const std::string& path) { return read_dataset_csv(path); }

int cmd_generate(const GenerateOptions& o, std::ostream& out) {
    if (o.preset.empty() == o.spec_file.empty()) throw ConfigError("give exactly one of --preset or --spec");
    MixtureSpec spec = o.preset.empty() ? mixture_spec_from_json(read_text_file(o.spec_file)) : preset(o.preset);
    spec.seed = o.seed;
    const Dataset data = sample(spec);
    write_file_atomic(o.output, dataset_to_csv(data));
    out << "wrote " << data.size() << " rows to " << o.output << "\n";
    return kExitOk;
}

int cmd_fit(const FitOptions& o, unsigned threads, std::ostream& out, std::ostream& err) {
    const Divergence divergence = Divergence::parse(o.divergence);
    const Dataset data = load_dataset(o.input);
    TrimConfig config;
    config.k = o.k;
    config.q = o.q;
    config.n_starts = o.starts;
    config.seed = o.seed;
    config.max_iter = o.max_iter;
    config.threads = threads;
    TrimmedFit result = fit(divergence, data, config);
    canonicalize(result);

    FitResultFile file;
    file.divergence = divergence.to_string();
    file.k = o.k;
    file.q = o.q;
    file.n = data.size();
    file.d = data.dimension();
    file.seed = o.seed;
    file.fit = result;
    if (!o.output.empty()) write_file_atomic(o.output, fit_result_to_json(file));

    out << "cost " << format_real(result.cost) << "\n"
        << "iterations " << result.iterations << "\n"
        << "converged " << (result.converged ? "true" : "false") << "\n";
    if (result.failed_starts > 0) err << "note: " << result.failed_starts << " starts left the codepoint domain\n";
    if (!std::isfinite(result.cost)) {
        err << "error: fewer than q points have a finite divergence to the codebook (cost is infinite)\n";
        return kExitDegenerate;
    }
    return kExitOk;
}

int cmd_sweep(const SweepOptions& o, unsigned threads, std::ostream& out) {
    const Divergence divergence = Divergence::parse(o.divergence);
    const Dataset data = load_dataset(o.input);
    const auto k_grid = parse_grid(o.k_grid);
    if (k_grid.empty()) throw ConfigError("k grid is empty");
    const auto q_grid =
        o.q_grid.empty() ? default_q_grid(*std::min_element(k_grid.begin(), k_grid.end()), data.size()) : parse_grid(o.q_grid);
    TrimConfig config;
    config.n_starts = o.starts;
    config.seed = o.seed;
    config.max_iter = o.max_iter;
    config.threads = threads;
    const SelectionReport report = select_k_q(divergence, data, k_grid, q_grid, config);
    if (!o.out_curves.empty()) write_file_atomic(o.out_curves, curves_to_csv(report.curves));
    if (!o.out_svg.empty()) write_file_atomic(o.out_svg, curves_to_svg(report.curves));

    if (report.degenerate) out << "degenerate: every cost is zero\n";
    out << "heuristic cut points (max second difference of cost[q]):\n";
    for (const auto& [k, cut] : report.suggestions) {
        out << "  k=" << k << " q*=" << cut.q_star << " score=" << format_double(cut.score)
            << (cut.low_confidence ? " low-confidence" : "") << "\n";
    }
    out << "ranked candidates (rank k q score knee decrease):\n";
    for (std::size_t i = 0; i < report.candidates.size(); ++i) {
        const auto& c = report.candidates[i];
        out << "  " << i + 1 << " " << c.k << " " << c.q << " " << format_double(c.score) << " "
            << format_double(c.knee) << " " << format_double(c.decrease) << (c.low_confidence ? " low-confidence" : "")
            << "\n";
    }
    return kExitOk;
}

int cmd_eval(const EvalOptions& o, std::ostream& out) {
    const auto a = read_labels(o.labels_a, o.column_a);
    const auto b = read_labels(o.labels_b, o.column_b);
    out << format_real(nmi(a, b)) << "\n";
    return kExitOk;
}

int cmd_breakdown(const BreakdownOptions& o, std::ostream& out) {
    const auto far_values = parse_real_list(o.n_list);
    const BreakdownSweep sweep = run_breakdown(o.p, o.h, o.gamma, far_values, o.n, Divergence::parse(o.divergence));
    if (!o.output.empty()) write_file_atomic(o.output, breakdown_to_json(sweep));
    out << "B_h " << format_real(sweep.discernability) << "\n";
    for (const auto& pt : sweep.points) {
        out << "N " << format_real(pt.far_value) << " max_magnitude " << format_real(pt.max_magnitude) << " codebook";
        for (std::size_t j = 0; j < pt.codebook.size(); ++j) out << " " << format_real(pt.codebook.centers(j, 0));
        out << "\n";
    }
    return kExitOk;
}

int cmd_compare(const CompareOptions& o, unsigned threads, std::ostream& out) {
    if (o.presets.empty()) throw ConfigError("give at least one --preset");
    if (o.divergences.empty()) throw ConfigError("give at least one --divergence");
    std::vector<Divergence> divs;
    for (const auto& d : o.divergences) divs.push_back(Divergence::parse(d));
    ComparisonOptions options;
    options.n_starts = o.starts;
    options.threads = threads;
    const ComparisonReport report = run_comparison(o.presets, divs, o.k, o.q, o.replications, o.seed, options);
    if (!o.out_json.empty()) write_file_atomic(o.out_json, comparison_to_json(report));
    const std::string csv = comparison_to_csv(report);
    if (!o.out_csv.empty()) write_file_atomic(o.out_csv, csv);
    out << csv;
    return kExitOk;
}

std::string describe_domain_error(const DomainError& e) {
    std::string msg = e.what();
    if (e.row()) {
        msg += " [data row " + std::to_string(*e.row() + 1);
        if (e.column()) msg += ", column " + std::to_string(*e.column() + 1);
        msg += "]";
    }
    return msg;
}

}  // namespace

std::vector<std::size_t> parse_grid(std::string_view text) {
    std::vector<std::size_t> out;
    std::size_t start = 0;
    const std::string t = trim_copy(text);
    if (t.empty()) return out;
    std::string_view s(t);
    for (;;) {
        const auto comma = s.find(',', start);
        const auto item = s.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
        const auto dots = item.find("..");
        if (dots == std::string_view::npos) {
            out.push_back(parse_count(item));
        } else {
            const std::size_t lo = parse_count(item.substr(0, dots));
            const std::size_t hi = parse_count(item.substr(dots + 2));
            if (hi < lo) throw ConfigError("empty range '" + std::string(item) + "'");
            for (std::size_t v = lo; v <= hi; ++v) out.push_back(v);
        }
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    for (std::size_t i = 1; i < out.size(); ++i)
        if (out[i] <= out[i - 1]) throw ConfigError("grid '" + t + "' must be strictly increasing");
    return out;
}

std::vector<double> parse_real_list(std::string_view text) {
    std::vector<double> out;
    std::size_t start = 0;
    for (;;) {
        const auto comma = text.find(',', start);
        const auto item = text.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
        try {
            out.push_back(parse_double(item));
        } catch (const ParseError& e) {
            throw ConfigError(e.what());
        }
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

int run_cli(const std::vector<std::string>& args) { return run_cli(args, std::cout, std::cerr); }

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Trimmed Bregman clustering: robust k-means under Bregman divergences", "bregtrim"};
    app.require_subcommand(1);
    app.fallthrough();
    unsigned threads = default_thread_count();
    app.add_option("--threads", threads, "Worker threads for restarts and grid cells (default: $BREGTRIM_THREADS or 1)")
        ->check(CLI::PositiveNumber);

    const std::string divergence_help =
        "Divergence: sqeuclidean, gaussian:<sigma>, mahalanobis:<csv>, poisson, binomial:<N>, gamma:<shape>, exp, "
        "logistic, kl, percoord:<spec>,<spec>,...";

    GenerateOptions gen;
    auto* generate = app.add_subcommand("generate", "Sample a synthetic mixture dataset to CSV");
    generate->add_option("--preset", gen.preset, "Preset <family>,<small|large>");
    generate->add_option("--spec", gen.spec_file, "Mixture spec JSON file");
    generate->add_option("--seed", gen.seed, "Random seed");
    generate->add_option("--out", gen.output, "Output CSV")->required();

    FitOptions fo;
    auto* fit_cmd = app.add_subcommand("fit", "Fit a trimmed Bregman clustering");
    fit_cmd->add_option("--in", fo.input, "Input CSV")->required();
    fit_cmd->add_option("--divergence", fo.divergence, divergence_help);
    fit_cmd->add_option("--k", fo.k, "Number of clusters")->required();
    fit_cmd->add_option("--q", fo.q, "Number of points kept (n - q are trimmed)")->required();
    fit_cmd->add_option("--starts", fo.starts, "Random restarts")->check(CLI::PositiveNumber);
    fit_cmd->add_option("--seed", fo.seed, "Random seed");
    fit_cmd->add_option("--max-iter", fo.max_iter, "Iteration cap per restart")->check(CLI::PositiveNumber);
    fit_cmd->add_option("--out", fo.output, "Output JSON fit result");

    SweepOptions so;
    auto* sweep = app.add_subcommand("sweep", "Cost curves over (k, q) grids and ranked candidates");
    sweep->add_option("--in", so.input, "Input CSV")->required();
    sweep->add_option("--divergence", so.divergence, divergence_help);
    sweep->add_option("--k-grid", so.k_grid, "k values, e.g. 1..5")->required();
    sweep->add_option("--q-grid", so.q_grid, "q values, e.g. 90..120 (default: all of [k, n], or 200 points)");
    sweep->add_option("--starts", so.starts, "Random restarts per cell")->check(CLI::PositiveNumber);
    sweep->add_option("--seed", so.seed, "Random seed");
    sweep->add_option("--max-iter", so.max_iter, "Iteration cap per restart")->check(CLI::PositiveNumber);
    sweep->add_option("--out-curves", so.out_curves, "Output CSV k,q,cost,score");
    sweep->add_option("--out-svg", so.out_svg, "Output SVG plot of the curves");

    EvalOptions eo;
    auto* eval = app.add_subcommand("eval", "Normalized mutual information between two labelings");
    eval->add_option("--labels-a", eo.labels_a, "CSV (label column) or fit JSON")->required();
    eval->add_option("--labels-b", eo.labels_b, "CSV (label column) or fit JSON")->required();
    eval->add_option("--column-a", eo.column_a, "Column name in --labels-a");
    eval->add_option("--column-b", eo.column_b, "Column name in --labels-b");

    BreakdownOptions bo;
    auto* breakdown = app.add_subcommand("breakdown", "Two-atom contamination sweep of 2-center trimmed fits");
    breakdown->set_help_flag("--help", "Print this help message and exit");
    breakdown->add_option("--p", bo.p, "Mass of the +1 atom, in (0, 1/2]")->required();
    breakdown->add_option("--h", bo.h, "Trim level q/n, above 1 - p")->required();
    breakdown->add_option("--gamma", bo.gamma, "Contamination fraction at N")->required();
    breakdown->add_option("--N-list", bo.n_list, "Comma-separated increasing N values")->required();
    breakdown->add_option("--n", bo.n, "Sample size");
    breakdown->add_option("--divergence", bo.divergence, divergence_help);
    breakdown->add_option("--out", bo.output, "Output JSON");

    CompareOptions co;
    auto* compare = app.add_subcommand("compare", "NMI of several divergences over replicated synthetic mixtures");
    compare->add_option("--preset", co.presets, "Preset (repeatable)")->delimiter('\0');
    compare->add_option("--divergence", co.divergences, "Divergence (repeatable)")->delimiter('\0');
    compare->add_option("--k", co.k, "Number of clusters");
    compare->add_option("--q", co.q, "Number of points kept");
    compare->add_option("--replications", co.replications, "Replications");
    compare->add_option("--seed", co.seed, "Master seed");
    compare->add_option("--starts", co.starts, "Random restarts per fit")->check(CLI::PositiveNumber);
    compare->add_option("--out-json", co.out_json, "Output JSON report");
    compare->add_option("--out-csv", co.out_csv, "Output CSV summary");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    }

    try {
        if (*generate) return cmd_generate(gen, out);
        if (*fit_cmd) return cmd_fit(fo, threads, out, err);
        if (*sweep) return cmd_sweep(so, threads, out);
        if (*eval) return cmd_eval(eo, out);
        if (*breakdown) return cmd_breakdown(bo, out);
        if (*compare) return cmd_compare(co, threads, out);
    } catch (const IoError& e) {
        err << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const DegenerateInputError& e) {
        err << "error: " << e.what() << "\n";
        return kExitDegenerate;
    } catch (const DomainError& e) {
        err << "error: " << describe_domain_error(e) << "\n";
        return kExitUsage;
    } catch (const UnknownPresetError& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    }
    return kExitUsage;
}

}  // namespace bregtrim
