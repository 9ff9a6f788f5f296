#include "bregtrim/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include <json.hpp>

#include "bregtrim/errors.hpp"

namespace bregtrim {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (;;) {
        const auto comma = line.find(',', start);
        out.push_back(trim(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

struct Line {
    std::size_t number;
    std::vector<std::string_view> fields;
};

std::vector<Line> split_lines(std::string_view text) {
    std::vector<Line> out;
    std::size_t number = 0;
    std::size_t start = 0;
    while (start <= text.size()) {
        const auto nl = text.find('\n', start);
        const auto raw = text.substr(start, nl == std::string_view::npos ? std::string_view::npos : nl - start);
        ++number;
        if (!trim(raw).empty()) out.push_back({number, split_fields(raw)});
        if (nl == std::string_view::npos) break;
        start = nl + 1;
    }
    return out;
}

bool is_number(std::string_view field) {
    try {
        parse_double(field);
        return true;
    } catch (const ParseError&) {
        return false;
    }
}

std::string location(std::size_t line, std::size_t row) {
    std::string s = "line " + std::to_string(line);
    if (row > 0) s = "data row " + std::to_string(row) + " (" + s + ")";
    return s;
}

// row is the 1-based data row, or 0 when unknown.
int parse_label(std::string_view field, std::size_t line, std::size_t column, std::size_t row = 0) {
    double v = 0.0;
    try {
        v = parse_double(field);
    } catch (const ParseError&) {
        throw CsvError(location(line, row) + ", column " + std::to_string(column) + ": label '" +
                           std::string(field) + "' is not an integer",
                       line, column);
    }
    if (v != std::floor(v) || v < 0.0 || v > 2147483647.0) {
        throw CsvError(location(line, row) + ", column " + std::to_string(column) +
                           ": label must be a nonnegative integer",
                       line, column);
    }
    return static_cast<int>(v);
}

}  // namespace

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

double parse_double(std::string_view text) {
    text = trim(text);
    if (!text.empty() && text.front() == '+') text.remove_prefix(1);
    double value = 0.0;
    const char* first = text.data();
    const char* last = first + text.size();
    auto [ptr, ec] = std::from_chars(first, last, value, std::chars_format::general);
    if (text.empty() || ec != std::errc() || ptr != last) {
        throw ParseError("'" + std::string(text) + "' is not a number");
    }
    return value;
}

Dataset parse_dataset_csv(std::string_view text) {
    const auto lines = split_lines(text);
    if (lines.empty()) throw DegenerateInputError("CSV contains no data");

    std::size_t first_data = 0;
    std::optional<std::size_t> label_column;
    std::size_t width = lines.front().fields.size();
    bool header = false;
    for (const auto& f : lines.front().fields)
        if (!is_number(f)) header = true;
    if (header) {
        first_data = 1;
        for (std::size_t c = 0; c < lines.front().fields.size(); ++c)
            if (lines.front().fields[c] == "label") label_column = c;
    }
    if (first_data >= lines.size()) throw DegenerateInputError("CSV contains a header but no rows");

    const std::size_t d = width - (label_column ? 1 : 0);
    if (d == 0) throw DegenerateInputError("CSV has no coordinate columns");
    const std::size_t n = lines.size() - first_data;
    Matrix points(n, d);
    std::vector<int> labels;
    if (label_column) labels.resize(n);

    for (std::size_t r = 0; r < n; ++r) {
        const Line& line = lines[first_data + r];
        if (line.fields.size() != width) {
            throw CsvError(location(line.number, r + 1) + ": expected " + std::to_string(width) +
                               " fields, found " + std::to_string(line.fields.size()),
                           line.number, std::min(line.fields.size(), width) + 1);
        }
        std::size_t j = 0;
        for (std::size_t c = 0; c < width; ++c) {
            if (label_column && c == *label_column) {
                labels[r] = parse_label(line.fields[c], line.number, c + 1, r + 1);
                continue;
            }
            try {
                points(r, j++) = parse_double(line.fields[c]);
            } catch (const ParseError&) {
                throw CsvError(location(line.number, r + 1) + ", column " + std::to_string(c + 1) + ": '" +
                                   std::string(line.fields[c]) + "' is not a number",
                               line.number, c + 1);
            }
        }
    }
    Dataset out;
    out.points = std::move(points);
    if (label_column) out.labels = std::move(labels);
    return out;
}

Dataset read_dataset_csv(const std::filesystem::path& path) { return parse_dataset_csv(read_text_file(path)); }

std::string dataset_to_csv(const Dataset& data) {
    std::string out;
    const std::size_t d = data.dimension();
    for (std::size_t j = 0; j < d; ++j) {
        if (j) out += ',';
        out += "x" + std::to_string(j + 1);
    }
    if (data.labels) out += ",label";
    out += '\n';
    for (std::size_t i = 0; i < data.size(); ++i) {
        for (std::size_t j = 0; j < d; ++j) {
            if (j) out += ',';
            out += format_double(data.points(i, j));
        }
        if (data.labels) out += "," + std::to_string((*data.labels)[i]);
        out += '\n';
    }
    return out;
}

Matrix read_matrix_csv(const std::filesystem::path& path) {
    const Dataset data = parse_dataset_csv(read_text_file(path));
    if (data.labels) throw ParseError("matrix CSV must not contain a label column");
    return data.points;
}

std::vector<int> read_labels(const std::filesystem::path& path, std::string_view column) {
    const std::string text = read_text_file(path);
    if (path.extension() == ".json") {
        try {
            const auto j = nlohmann::json::parse(text);
            return j.at("labels").get<std::vector<int>>();
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(path.string() + ": no integer 'labels' array (" + e.what() + ")");
        }
    }
    const auto lines = split_lines(text);
    if (lines.empty()) throw DegenerateInputError(path.string() + ": empty label file");
    std::size_t first = 0;
    std::optional<std::size_t> col;
    bool header = false;
    for (const auto& f : lines.front().fields)
        if (!is_number(f)) header = true;
    if (header) {
        first = 1;
        for (std::size_t c = 0; c < lines.front().fields.size(); ++c)
            if (lines.front().fields[c] == column) col = c;
        if (!col) throw ParseError(path.string() + ": no column named '" + std::string(column) + "'");
    } else if (lines.front().fields.size() == 1) {
        col = 0;
    } else {
        throw ParseError(path.string() + ": headerless label file must have exactly one column");
    }
    std::vector<int> out;
    for (std::size_t r = first; r < lines.size(); ++r) {
        const auto& line = lines[r];
        if (*col >= line.fields.size()) {
            throw CsvError("line " + std::to_string(line.number) + ": missing label column", line.number, *col + 1);
        }
        out.push_back(parse_label(line.fields[*col], line.number, *col + 1));
    }
    return out;
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
    std::ostringstream ss;
    ss << in.rdbuf();
    if (in.bad()) throw IoError("error reading '" + path.string() + "'");
    return ss.str();
}

void write_file_atomic(const std::filesystem::path& path, std::string_view contents) {
    auto tmp = path;
    tmp += ".tmp-" + std::to_string(::getpid());
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot open '" + tmp.string() + "' for writing");
        out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
        out.flush();
        if (!out) {
            std::error_code ignored;
            std::filesystem::remove(tmp, ignored);
            throw IoError("error writing '" + tmp.string() + "'");
        }
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::error_code ignored;
        std::filesystem::remove(tmp, ignored);
        throw IoError("cannot move output into '" + path.string() + "': " + ec.message());
    }
}

namespace {

nlohmann::json number_or_null(double v) {
    if (std::isfinite(v)) return v;
    return nullptr;
}

double number_or_inf(const nlohmann::json& j) { return j.is_null() ? kInfinity : j.get<double>(); }

}  // namespace

std::string fit_result_to_json(const FitResultFile& r) {
    nlohmann::ordered_json j;
    j["version"] = 1;
    j["divergence"] = r.divergence;
    j["k"] = r.k;
    j["q"] = r.q;
    j["n"] = r.n;
    j["d"] = r.d;
    j["seed"] = r.seed;
    j["cost"] = number_or_null(r.fit.cost);
    j["iterations"] = r.fit.iterations;
    j["converged"] = r.fit.converged;
    auto codebook = nlohmann::ordered_json::array();
    for (std::size_t c = 0; c < r.fit.codebook.size(); ++c) {
        auto center = r.fit.codebook.center(c);
        codebook.push_back(std::vector<double>(center.begin(), center.end()));
    }
    j["codebook"] = std::move(codebook);
    j["labels"] = r.fit.labels;
    j["trim_radius_sq"] = number_or_null(r.fit.trim_radius_sq);
    return j.dump(2) + "\n";
}

FitResultFile fit_result_from_json(std::string_view text) {
    try {
        const auto j = nlohmann::json::parse(text);
        if (j.at("version").get<int>() != 1) throw ParseError("unsupported fit result version");
        FitResultFile r;
        r.divergence = j.at("divergence").get<std::string>();
        r.k = j.at("k").get<std::size_t>();
        r.q = j.at("q").get<std::size_t>();
        r.n = j.at("n").get<std::size_t>();
        r.d = j.at("d").get<std::size_t>();
        r.seed = j.at("seed").get<std::uint64_t>();
        r.fit.cost = number_or_inf(j.at("cost"));
        r.fit.iterations = j.at("iterations").get<int>();
        r.fit.converged = j.at("converged").get<bool>();
        r.fit.labels = j.at("labels").get<std::vector<int>>();
        r.fit.trim_radius_sq = number_or_inf(j.at("trim_radius_sq"));
        const auto rows = j.at("codebook").get<std::vector<std::vector<double>>>();
        r.fit.codebook.centers = Matrix::from_rows(rows);
        return r;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("malformed fit result: ") + e.what());
    }
}

namespace {

Box box_from_json(const nlohmann::json& j) {
    Box box;
    for (const auto& side : j) {
        const auto bounds = side.get<std::vector<double>>();
        if (bounds.size() != 2) throw ParseError("box sides must be [lower, upper] pairs");
        box.sides.push_back(Interval{bounds[0], bounds[1], true, true});
    }
    return box;
}

Distribution law_from_name(const std::string& name) {
    if (name == "gaussian") return Distribution::Gaussian;
    if (name == "poisson") return Distribution::Poisson;
    if (name == "binomial") return Distribution::Binomial;
    if (name == "gamma") return Distribution::Gamma;
    if (name == "cauchy") return Distribution::Cauchy;
    throw ParseError("unknown law '" + name + "' (gaussian, poisson, binomial, gamma, cauchy)");
}

}  // namespace

MixtureSpec mixture_spec_from_json(std::string_view text) {
    try {
        const auto j = nlohmann::json::parse(text);
        MixtureSpec spec;
        spec.dimension = j.at("dimension").get<std::size_t>();
        spec.n_signal = j.at("n_signal").get<std::size_t>();
        spec.n_noise = j.value("n_noise", std::size_t{0});
        if (j.contains("noise_box")) spec.noise_box = box_from_json(j.at("noise_box"));
        for (const auto& c : j.at("components")) {
            Component comp;
            comp.weight = c.at("weight").get<double>();
            for (const auto& u : c.at("coordinates")) {
                comp.coordinates.push_back(
                    Univariate{law_from_name(u.at("law").get<std::string>()), u.at("a").get<double>(), u.value("b", 0.0)});
            }
            if (c.contains("truncation")) comp.truncation = box_from_json(c.at("truncation"));
            spec.components.push_back(std::move(comp));
        }
        spec.validate();
        return spec;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("malformed mixture spec: ") + e.what());
    } catch (const ConfigError& e) {
        throw ParseError(std::string("invalid mixture spec: ") + e.what());
    }
}

}  // namespace bregtrim
