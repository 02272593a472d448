#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "error.hpp"

namespace polyattn {

/// Dense row-major matrix of doubles. rows and cols are always >= 1.
class DenseMatrix {
public:
    DenseMatrix() = default;

    DenseMatrix(std::size_t rows, std::size_t cols)
        : rows_(rows), cols_(cols), data_(checked_size(rows, cols), 0.0) {}

    DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> data)
        : rows_(rows), cols_(cols), data_(std::move(data)) {
        if (data_.size() != checked_size(rows, cols))
            fail(ErrorCode::invalid_argument, "matrix data length does not equal rows*cols");
    }

    static DenseMatrix identity(std::size_t n) {
        DenseMatrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    double* row(std::size_t i) { return data_.data() + i * cols_; }
    const double* row(std::size_t i) const { return data_.data() + i * cols_; }

    std::vector<double>& data() { return data_; }
    const std::vector<double>& data() const { return data_; }

    bool all_finite() const;

private:
    static std::size_t checked_size(std::size_t rows, std::size_t cols) {
        if (rows == 0 || cols == 0)
            fail(ErrorCode::invalid_argument, "matrix dimensions must be positive");
        if (cols != 0 && rows > static_cast<std::size_t>(-1) / cols)
            fail(ErrorCode::overflow, "matrix dimensions overflow");
        return rows * cols;
    }

    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

/// Standard product. Per output entry the inner sum runs over k ascending,
/// so results are bit-reproducible across runs.
DenseMatrix matmul(const DenseMatrix& x, const DenseMatrix& y);

/// max_{i,j} |M_{i,j}|
double inf_norm(const DenseMatrix& m);

/// ||a - b||_inf; shapes must match.
double max_abs_diff(const DenseMatrix& a, const DenseMatrix& b);

// File formats.
// Text: first line "rows cols", then rows lines of cols space-separated reals.
// Binary: magic "PATN", u64-LE rows, u64-LE cols, rows*cols f64-LE row-major.

DenseMatrix read_matrix_text(std::istream& in, std::size_t& line_no);
void write_matrix_text(std::ostream& out, const DenseMatrix& m);
DenseMatrix read_matrix_binary(std::istream& in);
void write_matrix_binary(std::ostream& out, const DenseMatrix& m);

/// Reads a matrix in either format (sniffs the "PATN" magic).
DenseMatrix read_matrix_any(std::istream& in, std::size_t& line_no);

DenseMatrix load_matrix(const std::string& path);
void save_matrix(const std::string& path, const DenseMatrix& m, bool binary);

} // namespace polyattn
