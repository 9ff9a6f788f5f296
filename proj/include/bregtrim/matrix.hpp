#ifndef BREGTRIM_MATRIX_HPP
#define BREGTRIM_MATRIX_HPP

#include <cstddef>
#include <initializer_list>
#include <optional>
#include <span>
#include <vector>

namespace bregtrim {

/// Dense row-major matrix of doubles. Rows are points.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
    Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);

    /// Builds a matrix from nested rows; all rows must have the same length.
    static Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows);
    static Matrix from_rows(const std::vector<std::vector<double>>& rows);
    /// One-dimensional points.
    static Matrix column(std::span<const double> values);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    bool empty() const { return rows_ == 0; }

    std::span<const double> row(std::size_t i) const {
        return {data_.data() + i * cols_, cols_};
    }
    std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }

    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }
    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }

    const std::vector<double>& values() const { return data_; }

    friend bool operator==(const Matrix&, const Matrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

/// n points in dimension d with optional ground-truth labels (0 = noise).
struct Dataset {
    Matrix points;
    std::optional<std::vector<int>> labels;

    std::size_t size() const { return points.rows(); }
    std::size_t dimension() const { return points.cols(); }

    friend bool operator==(const Dataset&, const Dataset&) = default;
};

/// k codepoints, one per row.
struct Codebook {
    Matrix centers;

    std::size_t size() const { return centers.rows(); }
    std::size_t dimension() const { return centers.cols(); }
    std::span<const double> center(std::size_t j) const { return centers.row(j); }

    friend bool operator==(const Codebook&, const Codebook&) = default;
};

/// Number of distinct rows (exact comparison).
std::size_t count_distinct_rows(const Matrix& m);

}  // namespace bregtrim

#endif  // BREGTRIM_MATRIX_HPP
