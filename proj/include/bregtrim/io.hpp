#ifndef BREGTRIM_IO_HPP
#define BREGTRIM_IO_HPP

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "bregtrim/datagen.hpp"
#include "bregtrim/errors.hpp"
#include "bregtrim/matrix.hpp"
#include "bregtrim/trimmed_kmeans.hpp"

namespace bregtrim {

/// Shortest decimal text that reads back to the same double.
std::string format_double(double v);

/// Locale-independent strict parse of a whole field. Throws ParseError.
double parse_double(std::string_view text);

/// A CSV parse failure with its 1-based line and 1-based column.
class CsvError : public ParseError {
public:
    CsvError(const std::string& what, std::size_t line, std::size_t column)
        : ParseError(what), line_(line), column_(column) {}
    std::size_t line() const { return line_; }
    std::size_t column() const { return column_; }

private:
    std::size_t line_;
    std::size_t column_;
};

/// Reads a numeric CSV dataset. A first line with any non-numeric field is
/// a header; a header column named `label` becomes the integer label
/// vector. Files without a header are all coordinates.
Dataset read_dataset_csv(const std::filesystem::path& path);
Dataset parse_dataset_csv(std::string_view text);

/// Header `x1,...,xd,label` (label column only if the dataset has labels).
std::string dataset_to_csv(const Dataset& data);

/// Plain numeric matrix, optional header line.
Matrix read_matrix_csv(const std::filesystem::path& path);

/// Integer labels from a CSV column (by header name; a single headerless
/// column is also accepted) or from the `labels` array of a fit JSON file.
std::vector<int> read_labels(const std::filesystem::path& path, std::string_view column = "label");

std::string read_text_file(const std::filesystem::path& path);

/// Writes through a temporary sibling file and renames it into place.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

/// JSON fit result, schema version 1.
struct FitResultFile {
    std::string divergence;
    std::size_t k = 0;
    std::size_t q = 0;
    std::size_t n = 0;
    std::size_t d = 0;
    std::uint64_t seed = 0;
    TrimmedFit fit;
};

std::string fit_result_to_json(const FitResultFile& result);
FitResultFile fit_result_from_json(std::string_view text);

/// Mixture from JSON:
///   {"dimension": 2, "n_signal": 100, "n_noise": 20,
///    "noise_box": [[0, 60], [0, 60]],
///    "components": [{"weight": 0.5,
///                    "coordinates": [{"law": "gaussian", "a": 10, "b": 5}, ...],
///                    "truncation": [[0, 20], [0, 20]]}, ...]}
/// `law` is one of gaussian, poisson, binomial, gamma, cauchy; `truncation`
/// is optional. The seed comes from the caller.
MixtureSpec mixture_spec_from_json(std::string_view text);

}  // namespace bregtrim

#endif  // BREGTRIM_IO_HPP
