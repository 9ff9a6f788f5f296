#ifndef BREGTRIM_DATAGEN_HPP
#define BREGTRIM_DATAGEN_HPP

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "bregtrim/divergence.hpp"
#include "bregtrim/matrix.hpp"
#include "bregtrim/rng.hpp"

namespace bregtrim {

enum class Distribution { Gaussian, Poisson, Binomial, Gamma, Cauchy };

/// One univariate law. Parameter meaning by kind:
///   Gaussian(mean, sd), Poisson(lambda), Binomial(trials, prob),
///   Gamma(shape, scale), Cauchy(location, scale).
struct Univariate {
    Distribution kind = Distribution::Gaussian;
    double a = 0.0;
    double b = 1.0;

    static Univariate gaussian(double mean, double sd) { return {Distribution::Gaussian, mean, sd}; }
    static Univariate poisson(double lambda) { return {Distribution::Poisson, lambda, 0.0}; }
    static Univariate binomial(double trials, double prob) { return {Distribution::Binomial, trials, prob}; }
    static Univariate gamma(double shape, double scale) { return {Distribution::Gamma, shape, scale}; }
    static Univariate cauchy(double location, double scale) { return {Distribution::Cauchy, location, scale}; }

    double mean() const;
    double draw(Rng& rng) const;
    void validate() const;
};

struct Box {
    std::vector<Interval> sides;  // closed intervals per coordinate
    bool contains(std::span<const double> x) const;
};

/// Closed box [lower, upper]^d.
Box cube(double lower, double upper, std::size_t d);

struct Component {
    /// One law per coordinate; coordinates are independent.
    std::vector<Univariate> coordinates;
    double weight = 1.0;
    /// Draws outside the box are redrawn.
    std::optional<Box> truncation;
};

struct MixtureSpec {
    std::vector<Component> components;
    std::size_t n_signal = 0;
    std::size_t n_noise = 0;
    /// Noise points are uniform on the interior of this box.
    Box noise_box;
    std::size_t dimension = 2;
    std::uint64_t seed = 0;

    void validate() const;
};

/// Signal rows labelled 1..#components by their component, noise rows 0;
/// rows shuffled with the same seed.
Dataset sample(const MixtureSpec& spec);

/// Presets "<family>,<size>" with family in {gaussian, poisson, binomial,
/// gamma, cauchy, heterogeneous} and size in {small, large}; a bare family
/// name means small.
MixtureSpec preset(std::string_view name);
std::vector<std::string> preset_names();

/// The divergence matched to a preset family (gaussian/cauchy -> gaussian:1,
/// poisson -> poisson, binomial -> binomial:100, gamma -> gamma:40,
/// heterogeneous -> gaussian:1).
Divergence preset_divergence(std::string_view name);

inline constexpr double kMinAcceptanceRate = 1e-6;

}  // namespace bregtrim

#endif  // BREGTRIM_DATAGEN_HPP
