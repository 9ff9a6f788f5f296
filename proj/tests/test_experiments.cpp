#include <doctest.h>

#include <cmath>
#include <limits>

#include <json.hpp>

#include "bregtrim/errors.hpp"
#include "bregtrim/experiments.hpp"
#include "support.hpp"

using namespace bregtrim;

namespace {

std::vector<double> sorted_centers(const Codebook& c) {
    std::vector<double> v(c.centers.values().begin(), c.centers.values().end());
    std::sort(v.begin(), v.end());
    return v;
}

void check_against_oracle(const BreakdownSweep& sweep) {
    for (const auto& pt : sweep.points) {
        const auto& a = sweep.atoms;
        const auto oracle =
            testsupport::three_atom_optimum({-1.0, 1.0, pt.far_value}, {a.minus_one, a.plus_one, a.at_n}, sweep.q);
        CHECK(std::abs(pt.cost - oracle.cost) <= 1e-10 * std::max(1.0, oracle.cost));
        // With p = 1/2 mirrored codebooks tie, so only the magnitude is compared.
        double want = 0.0;
        for (double c : oracle.centers) want = std::max(want, std::abs(c));
        CHECK(pt.max_magnitude == doctest::Approx(want).epsilon(1e-9));
    }
}

}  // namespace

TEST_CASE("atom counts and discernability") {
    const auto c = breakdown_atoms(0.4, 0.25, 1000);
    CHECK(c.at_n == 250);
    CHECK(c.plus_one == 300);
    CHECK(c.minus_one == 450);
    const auto z = breakdown_atoms(0.4, 0.0, 1000);
    CHECK(z.at_n == 0);
    CHECK(z.plus_one == 400);
    CHECK(z.minus_one == 600);
    CHECK(discernability_factor(0.4, 0.9) == doctest::Approx(0.1));
    CHECK(discernability_factor(0.4, 0.7) == doctest::Approx(0.25));
}

TEST_CASE("breakdown: contamination above 1 - h drives a center away") {
    const auto sweep = run_breakdown(0.4, 0.9, 0.15, {10, 100, 1000}, 1000);
    CHECK(sweep.q == 900);
    REQUIRE(sweep.points.size() == 3);
    for (std::size_t i = 1; i < 3; ++i) CHECK(sweep.points[i].max_magnitude > sweep.points[i - 1].max_magnitude);
    CHECK(sweep.points.back().max_magnitude > 500.0);
    check_against_oracle(sweep);
}

TEST_CASE("breakdown: at the discernability factor (-1, N) is optimal") {
    const auto sweep = run_breakdown(0.4, 0.7, 0.25, {10, 100, 1000}, 1000);
    for (const auto& pt : sweep.points) {
        const auto c = sorted_centers(pt.codebook);
        CHECK(std::abs(c[0] + 1.0) < 0.05);
        CHECK(std::abs(c[1] - pt.far_value) < 0.05);
    }
    check_against_oracle(sweep);
}

TEST_CASE("breakdown: no contamination") {
    const auto sweep = run_breakdown(0.4, 0.9, 0.0, {10, 100, 1000}, 1000);
    for (const auto& pt : sweep.points) {
        const auto c = sorted_centers(pt.codebook);
        CHECK(std::abs(c[0] + 1.0) < 0.05);
        CHECK(std::abs(c[1] - 1.0) < 0.05);
        CHECK(pt.max_magnitude == doctest::Approx(1.0));
    }
    check_against_oracle(sweep);
}

TEST_CASE("breakdown agrees with the atom oracle on a parameter grid") {
    for (double p : {0.2, 0.35, 0.5})
        for (double h : {0.6, 0.75, 0.85, 0.95}) {
            if (h <= 1.0 - p) continue;
            for (double g : {0.05, 0.1, 0.2, 0.3}) check_against_oracle(run_breakdown(p, h, g, {3, 30, 300}, 200));
        }
}

TEST_CASE("breakdown preconditions") {
    CHECK_THROWS_AS(run_breakdown(0.4, 0.6, 0.1, {10}, 1000), ConfigError);
    CHECK_THROWS_AS(run_breakdown(0.7, 0.9, 0.1, {10}, 1000), ConfigError);
    CHECK_THROWS_AS(run_breakdown(0.4, 0.9, 1.0, {10}, 1000), ConfigError);
}

TEST_CASE("breakdown JSON") {
    const auto j = nlohmann::json::parse(breakdown_to_json(run_breakdown(0.4, 0.9, 0.15, {10, 100}, 100)));
    CHECK(j.at("points").size() == 2);
    CHECK(j.at("discernability_factor").get<double>() == doctest::Approx(0.1));
}

TEST_CASE("quantiles use linear interpolation and skip NaN") {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    const auto q = summarize({4.0, nan, 1.0, 3.0, 2.0});
    CHECK(q.min == 1.0);
    CHECK(q.q25 == doctest::Approx(1.75));
    CHECK(q.median == doctest::Approx(2.5));
    CHECK(q.q75 == doctest::Approx(3.25));
    CHECK(q.max == 4.0);
    CHECK(std::isnan(summarize({nan}).median));
}

TEST_CASE("well separated mixtures are recovered") {
    MixtureSpec s;
    s.dimension = 1;
    for (double m : {0.0, 50.0, 100.0}) s.components.push_back({{Univariate::gaussian(m, 1.0)}, 1.0 / 3.0, std::nullopt});
    s.n_signal = 90;
    s.noise_box = cube(-10, 110, 1);
    const auto report = run_comparison(std::vector<NamedMixture>{{"sep", s}}, {Divergence::squared_euclidean()}, 3, 90, 5, 3);
    REQUIRE(report.cells.size() == 1);
    for (double v : report.cells[0].nmi) CHECK(v >= 0.95);
}

TEST_CASE("comparison reports") {
    const std::vector<std::string> presets = {"poisson,small"};
    const std::vector<Divergence> divs = {Divergence::squared_euclidean(), Divergence::poisson()};
    ComparisonOptions opts;
    opts.n_starts = 3;
    const auto a = run_comparison(presets, divs, 3, 110, 2, 42, opts);
    REQUIRE(a.cells.size() == 2);
    CHECK(a.data_seeds.size() == 2);
    for (const auto& cell : a.cells) CHECK(cell.nmi.size() == 2);
    opts.threads = 4;
    const auto b = run_comparison(presets, divs, 3, 110, 2, 42, opts);
    CHECK(comparison_to_json(a) == comparison_to_json(b));
    CHECK(comparison_to_csv(a) == comparison_to_csv(b));

    const auto j = nlohmann::json::parse(comparison_to_json(a));
    for (const char* key : {"k", "q", "seed", "results"}) CHECK(j.contains(key));
    const auto csv = comparison_to_csv(a);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);

    const auto one = run_comparison(presets, divs, 3, 110, 1, 42, opts);
    CHECK(one.cells[0].nmi.size() == 1);
    CHECK(one.cells[0].nmi[0] == a.cells[0].nmi[0]);
}

TEST_CASE("single-cell selection demo equals a direct fit") {
    const auto demo = run_selection_demo("poisson,small", {3}, {110}, 5, 10);
    REQUIRE(demo.report.curves.size() == 1);
    REQUIRE(demo.report.curves[0].entries.size() == 1);
    TrimConfig cfg;
    cfg.k = 3;
    cfg.q = 110;
    cfg.n_starts = 10;
    cfg.seed = 5;
    const auto direct = fit(Divergence::poisson(), demo.data, cfg);
    CHECK(demo.report.curves[0].entries[0].cost <= direct.cost * (1 + 1e-12));
    CHECK(demo.curves_csv.rfind("k,q,cost,score\n", 0) == 0);
}
