#include "bregtrim/divergence.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <string>

#include <Eigen/Dense>

#include "bregtrim/errors.hpp"
#include "bregtrim/io.hpp"

namespace bregtrim {

namespace {

// x * log(x / y) with 0 * log 0 = 0.
double xlog_ratio(double x, double y) {
    if (x == 0.0) return 0.0;
    return x * std::log(x / y);
}

double xlogx(double x) {
    if (x == 0.0) return 0.0;
    return x * std::log(x);
}

double scalar_evaluate(Family f, double param, double x, double y) {
    switch (f) {
        case Family::SquaredEuclidean: {
            const double t = x - y;
            return t * t;
        }
        case Family::GaussianScaled: {
            const double t = x - y;
            return t * t / (2.0 * param * param);
        }
        case Family::Poisson:
            return xlog_ratio(x, y) - x + y;
        case Family::Binomial:
            return xlog_ratio(x, y) + xlog_ratio(param - x, param - y);
        case Family::Gamma:
            return param * (std::log(y / x) + x / y - 1.0);
        case Family::ExponentialLoss: {
            const double ey = std::exp(y);
            return std::exp(x) - ey - (x - y) * ey;
        }
        case Family::LogisticLoss:
            return xlog_ratio(x, y) + xlog_ratio(1.0 - x, 1.0 - y);
        default:
            break;
    }
    throw Error("not a scalar family");
}

double scalar_phi(Family f, double param, double x) {
    switch (f) {
        case Family::SquaredEuclidean:
            return x * x;
        case Family::GaussianScaled:
            return x * x / (2.0 * param * param);
        case Family::Poisson:
            return xlogx(x) - x;
        case Family::Binomial:
            return xlog_ratio(x, param) + xlog_ratio(param - x, param);
        case Family::Gamma:
            return -param + param * std::log(param / x);
        case Family::ExponentialLoss:
            return std::exp(x);
        case Family::LogisticLoss:
            return xlogx(x) + xlogx(1.0 - x);
        default:
            break;
    }
    throw Error("not a scalar family");
}

double scalar_gradient(Family f, double param, double y) {
    switch (f) {
        case Family::SquaredEuclidean:
            return 2.0 * y;
        case Family::GaussianScaled:
            return y / (param * param);
        case Family::Poisson:
            return std::log(y);
        case Family::Binomial:
            return std::log(y / (param - y));
        case Family::Gamma:
            return -param / y;
        case Family::ExponentialLoss:
            return std::exp(y);
        case Family::LogisticLoss:
            return std::log(y / (1.0 - y));
        default:
            break;
    }
    throw Error("not a scalar family");
}

Interval scalar_interval(Family f, double param, bool codepoint) {
    constexpr double inf = kInfinity;
    switch (f) {
        case Family::SquaredEuclidean:
        case Family::GaussianScaled:
        case Family::ExponentialLoss:
        case Family::Mahalanobis:
            return {-inf, inf, false, false};
        case Family::Poisson:
            return {0.0, inf, !codepoint, false};
        case Family::Binomial:
            return {0.0, param, !codepoint, !codepoint};
        case Family::Gamma:
            return {0.0, inf, false, false};
        case Family::LogisticLoss:
            return {0.0, 1.0, !codepoint, !codepoint};
        case Family::KullbackLeiblerSimplex:
            return {0.0, inf, !codepoint, false};
        case Family::PerCoordinate:
            break;
    }
    throw Error("no scalar interval for this family");
}

double parse_number(std::string_view text, std::string_view what) {
    double value = 0.0;
    const char* first = text.data();
    const char* last = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last || text.empty()) {
        throw ParseError("invalid " + std::string(what) + " '" + std::string(text) + "'");
    }
    return value;
}

std::string format_number(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

}  // namespace

bool Interval::contains(double v) const {
    if (std::isnan(v)) return false;
    const bool above = lower_closed ? v >= lower : v > lower;
    const bool below = upper_closed ? v <= upper : v < upper;
    return above && below;
}

Divergence Divergence::squared_euclidean() { return {Family::SquaredEuclidean, 0.0}; }

Divergence Divergence::gaussian(double sigma) {
    if (!(sigma > 0.0) || !std::isfinite(sigma)) throw ConfigError("gaussian sigma must be positive");
    return {Family::GaussianScaled, sigma};
}

Divergence Divergence::mahalanobis(Matrix matrix, std::string source) {
    const std::size_t d = matrix.rows();
    if (d == 0 || matrix.cols() != d) throw ConfigError("mahalanobis matrix must be square and nonempty");
    Eigen::MatrixXd a(d, d);
    double scale = 0.0;
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j) {
            a(i, j) = matrix(i, j);
            scale = std::max(scale, std::abs(matrix(i, j)));
        }
    if ((a - a.transpose()).cwiseAbs().maxCoeff() > kSpdTolerance * std::max(1.0, scale)) {
        throw ConfigError("mahalanobis matrix is not symmetric");
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(a, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success || solver.eigenvalues().minCoeff() <= kSpdTolerance) {
        throw ConfigError("mahalanobis matrix is not positive definite");
    }
    Divergence div(Family::Mahalanobis, 0.0);
    div.matrix_ = std::move(matrix);
    div.source_ = std::move(source);
    return div;
}

Divergence Divergence::poisson() { return {Family::Poisson, 0.0}; }

Divergence Divergence::binomial(double trials) {
    if (!(trials > 0.0) || !std::isfinite(trials)) throw ConfigError("binomial N must be positive");
    return {Family::Binomial, trials};
}

Divergence Divergence::gamma(double shape) {
    if (!(shape > 0.0) || !std::isfinite(shape)) throw ConfigError("gamma shape must be positive");
    return {Family::Gamma, shape};
}

Divergence Divergence::exponential_loss() { return {Family::ExponentialLoss, 0.0}; }
Divergence Divergence::logistic_loss() { return {Family::LogisticLoss, 0.0}; }
Divergence Divergence::kullback_leibler() { return {Family::KullbackLeiblerSimplex, 0.0}; }

Divergence Divergence::per_coordinate(std::vector<Divergence> coordinates) {
    if (coordinates.empty()) throw ConfigError("percoord needs at least one coordinate");
    for (const auto& c : coordinates) {
        if (!c.is_scalar()) {
            throw ConfigError("percoord entries must be scalar families, got " + c.to_string());
        }
    }
    Divergence div(Family::PerCoordinate, 0.0);
    div.coordinates_ = std::move(coordinates);
    return div;
}

Divergence Divergence::parse(std::string_view spec) {
    const auto colon = spec.find(':');
    const std::string_view name = spec.substr(0, colon);
    const std::string_view arg = colon == std::string_view::npos ? std::string_view{} : spec.substr(colon + 1);
    const bool has_arg = colon != std::string_view::npos;

    auto no_arg = [&](Divergence d) {
        if (has_arg) throw ParseError("divergence '" + std::string(name) + "' takes no parameter");
        return d;
    };
    try {
        if (name == "sqeuclidean") return no_arg(squared_euclidean());
        if (name == "poisson") return no_arg(poisson());
        if (name == "exp") return no_arg(exponential_loss());
        if (name == "logistic") return no_arg(logistic_loss());
        if (name == "kl") return no_arg(kullback_leibler());
        if (name == "gaussian") return gaussian(has_arg ? parse_number(arg, "gaussian sigma") : 1.0);
        if (name == "binomial") {
            if (!has_arg) throw ParseError("binomial requires the number of trials, e.g. binomial:100");
            return binomial(parse_number(arg, "binomial N"));
        }
        if (name == "gamma") {
            if (!has_arg) throw ParseError("gamma requires the shape, e.g. gamma:40");
            return gamma(parse_number(arg, "gamma shape"));
        }
        if (name == "mahalanobis") {
            if (!has_arg || arg.empty()) throw ParseError("mahalanobis requires a matrix CSV path");
            return mahalanobis(read_matrix_csv(std::string(arg)), std::string(arg));
        }
        if (name == "percoord") {
            std::vector<Divergence> coords;
            std::size_t start = 0;
            while (start <= arg.size()) {
                const auto comma = arg.find(',', start);
                const auto piece = arg.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
                if (piece.empty()) throw ParseError("empty entry in percoord list");
                coords.push_back(parse(piece));
                if (comma == std::string_view::npos) break;
                start = comma + 1;
            }
            return per_coordinate(std::move(coords));
        }
    } catch (const ConfigError& e) {
        throw ParseError(e.what());
    }
    throw ParseError("unknown divergence '" + std::string(spec) +
                     "' (expected sqeuclidean, gaussian:<sigma>, mahalanobis:<csv>, poisson, "
                     "binomial:<N>, gamma:<shape>, exp, logistic, kl, percoord:<spec>,...)");
}

std::string Divergence::to_string() const {
    switch (family_) {
        case Family::SquaredEuclidean: return "sqeuclidean";
        case Family::GaussianScaled: return "gaussian:" + format_number(parameter_);
        case Family::Mahalanobis: return "mahalanobis:" + (source_.empty() ? std::string("<inline>") : source_);
        case Family::Poisson: return "poisson";
        case Family::Binomial: return "binomial:" + format_number(parameter_);
        case Family::Gamma: return "gamma:" + format_number(parameter_);
        case Family::ExponentialLoss: return "exp";
        case Family::LogisticLoss: return "logistic";
        case Family::KullbackLeiblerSimplex: return "kl";
        case Family::PerCoordinate: {
            std::string out = "percoord:";
            for (std::size_t i = 0; i < coordinates_.size(); ++i) {
                if (i) out += ',';
                out += coordinates_[i].to_string();
            }
            return out;
        }
    }
    return {};
}

bool Divergence::is_scalar() const {
    return family_ != Family::Mahalanobis && family_ != Family::KullbackLeiblerSimplex &&
           family_ != Family::PerCoordinate;
}

std::optional<std::size_t> Divergence::fixed_dimension() const {
    if (family_ == Family::Mahalanobis) return matrix_.rows();
    if (family_ == Family::PerCoordinate) return coordinates_.size();
    return std::nullopt;
}

DomainDescriptor Divergence::domain(std::size_t dimension) const {
    DomainDescriptor out;
    out.simplex = family_ == Family::KullbackLeiblerSimplex;
    for (std::size_t i = 0; i < dimension; ++i) {
        if (family_ == Family::PerCoordinate) {
            const auto& c = coordinates_.at(i);
            out.point.push_back(scalar_interval(c.family_, c.parameter_, false));
            out.codepoint.push_back(scalar_interval(c.family_, c.parameter_, true));
        } else {
            out.point.push_back(scalar_interval(family_, parameter_, false));
            out.codepoint.push_back(scalar_interval(family_, parameter_, true));
        }
    }
    return out;
}

void Divergence::check_dimension(std::size_t d) const {
    if (d == 0) throw DimensionError("points must have at least one coordinate");
    if (auto fixed = fixed_dimension(); fixed && *fixed != d) {
        throw DimensionError(to_string() + " expects dimension " + std::to_string(*fixed) + ", got " +
                             std::to_string(d));
    }
}

void Divergence::check_domain(std::span<const double> v, bool codepoint) const {
    check_dimension(v.size());
    const char* role = codepoint ? "codepoint" : "point";
    double sum = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        const Family f = family_ == Family::PerCoordinate ? coordinates_[i].family_ : family_;
        const double p = family_ == Family::PerCoordinate ? coordinates_[i].parameter_ : parameter_;
        const Interval iv = scalar_interval(f, p, codepoint);
        if (!std::isfinite(v[i]) || !iv.contains(v[i])) {
            throw DomainError(std::string(role) + " coordinate " + std::to_string(i) + " = " +
                                  format_number(v[i]) + " is outside the " + std::string(family_name(f)) +
                                  " domain",
                              i);
        }
        sum += v[i];
    }
    if (family_ == Family::KullbackLeiblerSimplex && std::abs(sum - 1.0) > kSimplexTolerance) {
        throw DomainError(std::string(role) + " coordinates sum to " + format_number(sum) +
                          ", expected 1 (simplex)");
    }
}

void Divergence::check_point(std::span<const double> x) const { check_domain(x, false); }
void Divergence::check_codepoint(std::span<const double> y) const { check_domain(y, true); }

bool Divergence::point_in_domain(std::span<const double> x) const noexcept {
    try {
        check_point(x);
        return true;
    } catch (const Error&) {
        return false;
    }
}

bool Divergence::codepoint_in_domain(std::span<const double> y) const noexcept {
    try {
        check_codepoint(y);
        return true;
    } catch (const Error&) {
        return false;
    }
}

double Divergence::phi(std::span<const double> x) const {
    check_dimension(x.size());
    double total = 0.0;
    switch (family_) {
        case Family::Mahalanobis: {
            const std::size_t d = x.size();
            for (std::size_t i = 0; i < d; ++i)
                for (std::size_t j = 0; j < d; ++j) total += x[i] * matrix_(i, j) * x[j];
            return total;
        }
        case Family::KullbackLeiblerSimplex:
            for (double v : x) total += xlogx(v);
            return total;
        case Family::PerCoordinate:
            for (std::size_t i = 0; i < x.size(); ++i)
                total += scalar_phi(coordinates_[i].family_, coordinates_[i].parameter_, x[i]);
            return total;
        default:
            for (double v : x) total += scalar_phi(family_, parameter_, v);
            return total;
    }
}

std::vector<double> Divergence::gradient_phi(std::span<const double> y) const {
    check_codepoint(y);
    const std::size_t d = y.size();
    std::vector<double> g(d, 0.0);
    switch (family_) {
        case Family::Mahalanobis:
            for (std::size_t i = 0; i < d; ++i) {
                double s = 0.0;
                for (std::size_t j = 0; j < d; ++j) s += matrix_(i, j) * y[j];
                g[i] = 2.0 * s;
            }
            break;
        case Family::KullbackLeiblerSimplex:
            for (std::size_t i = 0; i < d; ++i) g[i] = std::log(y[i]) + 1.0;
            break;
        case Family::PerCoordinate:
            for (std::size_t i = 0; i < d; ++i)
                g[i] = scalar_gradient(coordinates_[i].family_, coordinates_[i].parameter_, y[i]);
            break;
        default:
            for (std::size_t i = 0; i < d; ++i) g[i] = scalar_gradient(family_, parameter_, y[i]);
            break;
    }
    return g;
}

double Divergence::evaluate(std::span<const double> x, std::span<const double> y) const {
    if (x.size() != y.size()) {
        throw DimensionError("dimension mismatch: " + std::to_string(x.size()) + " vs " + std::to_string(y.size()));
    }
    check_point(x);
    check_codepoint(y);
    return evaluate_unchecked(x, y);
}

double Divergence::evaluate_unchecked(std::span<const double> x, std::span<const double> y) const {
    const std::size_t d = x.size();
    double total = 0.0;
    switch (family_) {
        case Family::Mahalanobis:
            for (std::size_t i = 0; i < d; ++i) {
                double s = 0.0;
                for (std::size_t j = 0; j < d; ++j) s += matrix_(i, j) * (x[j] - y[j]);
                total += (x[i] - y[i]) * s;
            }
            break;
        case Family::KullbackLeiblerSimplex:
            for (std::size_t i = 0; i < d; ++i) total += xlog_ratio(x[i], y[i]) - x[i] + y[i];
            break;
        case Family::PerCoordinate:
            for (std::size_t i = 0; i < d; ++i)
                total += scalar_evaluate(coordinates_[i].family_, coordinates_[i].parameter_, x[i], y[i]);
            break;
        default:
            for (std::size_t i = 0; i < d; ++i) total += scalar_evaluate(family_, parameter_, x[i], y[i]);
            break;
    }
    // inf - inf in overflowing closed forms.
    if (std::isnan(total)) return kInfinity;
    return total;
}

Nearest Divergence::evaluate_to_codebook(std::span<const double> x, const Codebook& codebook) const {
    if (codebook.size() == 0) throw DegenerateInputError("empty codebook");
    if (codebook.dimension() != x.size()) {
        throw DimensionError("codebook dimension " + std::to_string(codebook.dimension()) +
                             " does not match point dimension " + std::to_string(x.size()));
    }
    check_point(x);
    for (std::size_t j = 0; j < codebook.size(); ++j) check_codepoint(codebook.center(j));
    return nearest_unchecked(x, codebook);
}

Nearest Divergence::nearest_unchecked(std::span<const double> x, const Codebook& codebook) const {
    Nearest best;
    for (std::size_t j = 0; j < codebook.size(); ++j) {
        const double v = evaluate_unchecked(x, codebook.center(j));
        if (j == 0 || v < best.value) {
            best.value = v;
            best.index = j;
        }
    }
    return best;
}

std::string_view family_name(Family family) {
    switch (family) {
        case Family::SquaredEuclidean: return "squared-euclidean";
        case Family::GaussianScaled: return "gaussian";
        case Family::Mahalanobis: return "mahalanobis";
        case Family::Poisson: return "poisson";
        case Family::Binomial: return "binomial";
        case Family::Gamma: return "gamma";
        case Family::ExponentialLoss: return "exponential-loss";
        case Family::LogisticLoss: return "logistic-loss";
        case Family::KullbackLeiblerSimplex: return "kullback-leibler";
        case Family::PerCoordinate: return "per-coordinate";
    }
    return "unknown";
}

}  // namespace bregtrim
