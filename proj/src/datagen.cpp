#include "bregtrim/datagen.hpp"

#include <cmath>
#include <numeric>

#include "bregtrim/errors.hpp"

namespace bregtrim {

double Univariate::mean() const {
    switch (kind) {
        case Distribution::Gaussian: return a;
        case Distribution::Poisson: return a;
        case Distribution::Binomial: return a * b;
        case Distribution::Gamma: return a * b;
        case Distribution::Cauchy: return a;  // location; the mean does not exist
    }
    return 0.0;
}

void Univariate::validate() const {
    auto fail = [](const std::string& msg) { throw ConfigError(msg); };
    if (!std::isfinite(a) || !std::isfinite(b)) fail("distribution parameters must be finite");
    switch (kind) {
        case Distribution::Gaussian:
            if (b < 0.0) fail("gaussian sd must be nonnegative");
            break;
        case Distribution::Poisson:
            if (a < 0.0) fail("poisson lambda must be nonnegative");
            break;
        case Distribution::Binomial:
            if (a < 1.0 || a != std::floor(a)) fail("binomial trials must be a positive integer");
            if (b < 0.0 || b > 1.0) fail("binomial probability must lie in [0, 1]");
            break;
        case Distribution::Gamma:
            if (a <= 0.0 || b <= 0.0) fail("gamma shape and scale must be positive");
            break;
        case Distribution::Cauchy:
            if (b <= 0.0) fail("cauchy scale must be positive");
            break;
    }
}

double Univariate::draw(Rng& rng) const {
    switch (kind) {
        case Distribution::Gaussian:
            if (b == 0.0) return a;
            return std::normal_distribution<double>(a, b)(rng);
        case Distribution::Poisson:
            if (a == 0.0) return 0.0;
            return static_cast<double>(std::poisson_distribution<long long>(a)(rng));
        case Distribution::Binomial:
            return static_cast<double>(std::binomial_distribution<long long>(static_cast<long long>(a), b)(rng));
        case Distribution::Gamma:
            return std::gamma_distribution<double>(a, b)(rng);
        case Distribution::Cauchy:
            return std::cauchy_distribution<double>(a, b)(rng);
    }
    return 0.0;
}

bool Box::contains(std::span<const double> x) const {
    if (x.size() != sides.size()) return false;
    for (std::size_t i = 0; i < x.size(); ++i)
        if (!sides[i].contains(x[i])) return false;
    return true;
}

Box cube(double lower, double upper, std::size_t d) {
    return Box{std::vector<Interval>(d, Interval{lower, upper, true, true})};
}

void MixtureSpec::validate() const {
    if (dimension == 0) throw ConfigError("dimension must be positive");
    if (n_signal > 0 && components.empty()) throw ConfigError("signal points requested but no components");
    double total = 0.0;
    for (const auto& c : components) {
        if (c.coordinates.size() != dimension) throw ConfigError("component has wrong number of coordinates");
        if (!(c.weight >= 0.0)) throw ConfigError("component weights must be nonnegative");
        total += c.weight;
        for (const auto& u : c.coordinates) u.validate();
        if (c.truncation) {
            if (c.truncation->sides.size() != dimension) throw ConfigError("truncation box has wrong dimension");
            for (const auto& s : c.truncation->sides)
                if (!(s.lower <= s.upper)) throw ConfigError("truncation box is empty");
        }
    }
    if (!components.empty() && std::abs(total - 1.0) > 1e-12) throw ConfigError("component weights must sum to 1");
    if (n_noise > 0) {
        if (noise_box.sides.size() != dimension) throw ConfigError("noise box has wrong dimension");
        for (const auto& s : noise_box.sides)
            if (!(s.lower < s.upper) || !std::isfinite(s.lower) || !std::isfinite(s.upper))
                throw ConfigError("noise box must be bounded with nonempty interior");
    }
}

Dataset sample(const MixtureSpec& spec) {
    spec.validate();
    const std::size_t d = spec.dimension;
    const std::size_t n = spec.n_signal + spec.n_noise;
    Rng rng(spec.seed);
    Matrix points(n, d);
    std::vector<int> labels(n, 0);

    const auto budget = static_cast<std::size_t>(1.0 / kMinAcceptanceRate);
    for (std::size_t i = 0; i < spec.n_signal; ++i) {
        const double u = uniform01(rng);
        std::size_t which = spec.components.size() - 1;
        double cumulative = 0.0;
        for (std::size_t c = 0; c < spec.components.size(); ++c) {
            cumulative += spec.components[c].weight;
            if (u < cumulative && spec.components[c].weight > 0.0) {
                which = c;
                break;
            }
        }
        while (spec.components[which].weight == 0.0) --which;
        const Component& comp = spec.components[which];
        auto row = points.row(i);
        std::size_t attempts = 0;
        for (;;) {
            for (std::size_t j = 0; j < d; ++j) row[j] = comp.coordinates[j].draw(rng);
            if (!comp.truncation || comp.truncation->contains(row)) break;
            if (++attempts >= budget) {
                throw RejectionBudgetError("truncation box of component " + std::to_string(which + 1) +
                                           " accepts fewer than 1 draw in " + std::to_string(budget));
            }
        }
        labels[i] = static_cast<int>(which + 1);
    }
    for (std::size_t i = spec.n_signal; i < n; ++i) {
        auto row = points.row(i);
        for (std::size_t j = 0; j < d; ++j) {
            const Interval& side = spec.noise_box.sides[j];
            double v;
            do {
                v = side.lower + (side.upper - side.lower) * uniform01(rng);
            } while (!(v > side.lower && v < side.upper));
            row[j] = v;
        }
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    shuffle_in_place(rng, order);
    Dataset out;
    out.points = Matrix(n, d);
    out.labels = std::vector<int>(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
        auto src = points.row(order[i]);
        std::copy(src.begin(), src.end(), out.points.row(i).begin());
        (*out.labels)[i] = labels[order[i]];
    }
    return out;
}

namespace {

const std::vector<std::string> kFamilies = {"gaussian", "poisson", "binomial", "gamma", "cauchy", "heterogeneous"};

constexpr double kMeans[3] = {10.0, 20.0, 40.0};
constexpr double kBoxUpper[3] = {20.0, 40.0, 80.0};
constexpr double kGaussianSd = 5.0;
constexpr double kBinomialTrials = 100.0;
constexpr double kGammaShape = 40.0;
constexpr double kCauchyScale = 1.0;

Component iid_component(Univariate law, std::optional<double> box_upper) {
    Component c;
    c.coordinates.assign(2, law);
    c.weight = 1.0 / 3.0;
    if (box_upper) c.truncation = cube(0.0, *box_upper, 2);
    return c;
}

std::pair<std::string, std::string> split_preset(std::string_view name) {
    const auto comma = name.find(',');
    if (comma == std::string_view::npos) return {std::string(name), "small"};
    return {std::string(name.substr(0, comma)), std::string(name.substr(comma + 1))};
}

std::string valid_presets_message() {
    std::string msg = "valid presets:";
    for (const auto& p : preset_names()) msg += " " + p;
    return msg;
}

}  // namespace

std::vector<std::string> preset_names() {
    std::vector<std::string> out;
    for (const auto& f : kFamilies) {
        out.push_back(f + ",small");
        out.push_back(f + ",large");
    }
    return out;
}

MixtureSpec preset(std::string_view name) {
    const auto [family, size] = split_preset(name);
    MixtureSpec spec;
    spec.dimension = 2;
    if (size == "small") {
        spec.n_signal = 100;
        spec.n_noise = 20;
    } else if (size == "large") {
        spec.n_signal = 10000;
        spec.n_noise = 2000;
    } else {
        throw UnknownPresetError("unknown preset '" + std::string(name) + "'; " + valid_presets_message());
    }
    spec.noise_box = cube(0.0, 60.0, 2);

    for (int c = 0; c < 3; ++c) {
        const double m = kMeans[c];
        if (family == "gaussian") {
            spec.components.push_back(iid_component(Univariate::gaussian(m, kGaussianSd), kBoxUpper[c]));
        } else if (family == "poisson") {
            spec.components.push_back(iid_component(Univariate::poisson(m), std::nullopt));
        } else if (family == "binomial") {
            spec.components.push_back(
                iid_component(Univariate::binomial(kBinomialTrials, m / kBinomialTrials), std::nullopt));
        } else if (family == "gamma") {
            spec.components.push_back(iid_component(Univariate::gamma(kGammaShape, m / kGammaShape), std::nullopt));
        } else if (family == "cauchy") {
            spec.components.push_back(iid_component(Univariate::cauchy(m, kCauchyScale), kBoxUpper[c]));
        } else if (family == "heterogeneous") {
            if (c == 0) spec.components.push_back(iid_component(Univariate::gamma(kGammaShape, m / kGammaShape), std::nullopt));
            if (c == 1) spec.components.push_back(iid_component(Univariate::gaussian(m, kGaussianSd), kBoxUpper[c]));
            if (c == 2) {
                spec.components.push_back(
                    iid_component(Univariate::binomial(kBinomialTrials, m / kBinomialTrials), std::nullopt));
            }
        } else {
            throw UnknownPresetError("unknown preset '" + std::string(name) + "'; " + valid_presets_message());
        }
    }
    return spec;
}

Divergence preset_divergence(std::string_view name) {
    const auto family = split_preset(name).first;
    if (family == "poisson") return Divergence::poisson();
    if (family == "binomial") return Divergence::binomial(kBinomialTrials);
    if (family == "gamma") return Divergence::gamma(kGammaShape);
    if (family == "gaussian" || family == "cauchy" || family == "heterogeneous") return Divergence::gaussian(1.0);
    throw UnknownPresetError("unknown preset '" + std::string(name) + "'; " + valid_presets_message());
}

}  // namespace bregtrim
