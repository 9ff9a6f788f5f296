#ifndef BREGTRIM_DIVERGENCE_HPP
#define BREGTRIM_DIVERGENCE_HPP

#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bregtrim/matrix.hpp"

namespace bregtrim {

enum class Family {
    SquaredEuclidean,
    GaussianScaled,
    Mahalanobis,
    Poisson,
    Binomial,
    Gamma,
    ExponentialLoss,
    LogisticLoss,
    KullbackLeiblerSimplex,
    PerCoordinate,
};

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// One coordinate of a domain: an interval with open/closed ends.
struct Interval {
    double lower = -kInfinity;
    double upper = kInfinity;
    bool lower_closed = false;
    bool upper_closed = false;

    bool contains(double v) const;
};

/// Explicit domain bounds. `point` constrains data points, `codepoint`
/// constrains centers (always the interior). Simplex families additionally
/// require the coordinates to sum to one.
struct DomainDescriptor {
    std::vector<Interval> point;
    std::vector<Interval> codepoint;
    bool simplex = false;
};

inline constexpr double kSimplexTolerance = 1e-9;
inline constexpr double kSpdTolerance = 1e-12;

/// Nearest codepoint: divergence value and 0-based center index.
struct Nearest {
    double value = kInfinity;
    std::size_t index = 0;
};

/// A Bregman divergence d(x, y) = phi(x) - phi(y) - <grad phi(y), x - y>.
///
/// Scalar families (everything except Mahalanobis, KullbackLeiblerSimplex and
/// PerCoordinate) accept points of any dimension and act coordinate-wise, the
/// total being the sum over coordinates. Mahalanobis and PerCoordinate have a
/// fixed dimension. Values are +infinity where the closed form overflows.
class Divergence {
public:
    static Divergence squared_euclidean();
    static Divergence gaussian(double sigma = 1.0);
    static Divergence mahalanobis(Matrix matrix, std::string source = {});
    static Divergence poisson();
    static Divergence binomial(double trials);
    static Divergence gamma(double shape);
    static Divergence exponential_loss();
    static Divergence logistic_loss();
    static Divergence kullback_leibler();
    static Divergence per_coordinate(std::vector<Divergence> coordinates);

    /// Parses `sqeuclidean`, `gaussian:<sigma>`, `mahalanobis:<csv path>`,
    /// `poisson`, `binomial:<N>`, `gamma:<shape>`, `exp`, `logistic`, `kl`,
    /// `percoord:<spec>,<spec>,...`. Throws ParseError.
    static Divergence parse(std::string_view spec);

    /// Canonical spec string; parse(to_string()) reproduces the divergence
    /// (Mahalanobis only when it was built from a file).
    std::string to_string() const;

    Family family() const { return family_; }
    /// sigma, N or shape depending on the family; 0 otherwise.
    double parameter() const { return parameter_; }
    const std::vector<Divergence>& coordinates() const { return coordinates_; }
    const Matrix& matrix() const { return matrix_; }

    bool is_scalar() const;
    std::optional<std::size_t> fixed_dimension() const;

    DomainDescriptor domain(std::size_t dimension) const;

    /// Throws DimensionError / DomainError (with the coordinate index).
    void check_point(std::span<const double> x) const;
    void check_codepoint(std::span<const double> y) const;
    bool point_in_domain(std::span<const double> x) const noexcept;
    bool codepoint_in_domain(std::span<const double> y) const noexcept;

    double phi(std::span<const double> x) const;
    std::vector<double> gradient_phi(std::span<const double> y) const;

    /// Checked evaluation: x in the point domain, y in the codepoint domain.
    double evaluate(std::span<const double> x, std::span<const double> y) const;
    /// Same closed form without domain or dimension checks.
    double evaluate_unchecked(std::span<const double> x, std::span<const double> y) const;

    /// Minimum over centers; ties go to the smallest index.
    Nearest evaluate_to_codebook(std::span<const double> x, const Codebook& codebook) const;
    Nearest nearest_unchecked(std::span<const double> x, const Codebook& codebook) const;

private:
    Divergence(Family family, double parameter) : family_(family), parameter_(parameter) {}

    void check_dimension(std::size_t d) const;
    void check_domain(std::span<const double> v, bool codepoint) const;

    Family family_;
    double parameter_ = 0.0;
    Matrix matrix_;
    std::string source_;
    std::vector<Divergence> coordinates_;
};

std::string_view family_name(Family family);

}  // namespace bregtrim

#endif  // BREGTRIM_DIVERGENCE_HPP
