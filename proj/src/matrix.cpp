#include "matrix.hpp"

#include <array>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

namespace polyattn {

bool DenseMatrix::all_finite() const {
    for (double v : data_)
        if (!std::isfinite(v)) return false;
    return true;
}

DenseMatrix matmul(const DenseMatrix& x, const DenseMatrix& y) {
    if (x.cols() != y.rows())
        fail(ErrorCode::dimension_mismatch,
             "matmul: inner dimensions differ (" + std::to_string(x.cols()) + " vs " +
                 std::to_string(y.rows()) + ")");
    const std::size_t a = x.rows(), b = x.cols(), c = y.cols();
    DenseMatrix out(a, c);
    for (std::size_t i = 0; i < a; ++i) {
        const double* xi = x.row(i);
        double* oi = out.row(i);
        for (std::size_t j = 0; j < c; ++j) {
            double acc = 0.0;
            for (std::size_t k = 0; k < b; ++k) acc += xi[k] * y(k, j);
            oi[j] = acc;
        }
    }
    if (!out.all_finite())
        fail(ErrorCode::numeric_failure, "matmul: non-finite value in product");
    return out;
}

double inf_norm(const DenseMatrix& m) {
    if (m.data().empty()) fail(ErrorCode::invalid_argument, "inf_norm: empty matrix");
    double best = 0.0;
    for (double v : m.data()) best = std::max(best, std::fabs(v));
    return best;
}

double max_abs_diff(const DenseMatrix& a, const DenseMatrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        fail(ErrorCode::dimension_mismatch, "max_abs_diff: shape mismatch");
    double best = 0.0;
    for (std::size_t i = 0; i < a.data().size(); ++i)
        best = std::max(best, std::fabs(a.data()[i] - b.data()[i]));
    return best;
}

namespace {

[[noreturn]] void parse_fail(std::size_t line_no, const std::string& what) {
    fail(ErrorCode::parse_failure, "line " + std::to_string(line_no) + ": " + what);
}

} // namespace

DenseMatrix read_matrix_text(std::istream& in, std::size_t& line_no) {
    std::string line;
    if (!std::getline(in, line)) parse_fail(line_no + 1, "expected header 'rows cols'");
    ++line_no;
    std::istringstream hdr(line);
    long long rows = 0, cols = 0;
    if (!(hdr >> rows >> cols) || rows <= 0 || cols <= 0)
        parse_fail(line_no, "malformed header, expected two positive integers");
    DenseMatrix m(static_cast<std::size_t>(rows), static_cast<std::size_t>(cols));
    for (long long i = 0; i < rows; ++i) {
        if (!std::getline(in, line)) parse_fail(line_no + 1, "unexpected end of matrix data");
        ++line_no;
        std::istringstream row(line);
        for (long long j = 0; j < cols; ++j) {
            double v;
            if (!(row >> v)) parse_fail(line_no, "expected " + std::to_string(cols) + " values");
            if (!std::isfinite(v)) parse_fail(line_no, "non-finite matrix entry");
            m(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) = v;
        }
        double extra;
        if (row >> extra) parse_fail(line_no, "trailing values beyond declared cols");
    }
    return m;
}

void write_matrix_text(std::ostream& out, const DenseMatrix& m) {
    out << m.rows() << ' ' << m.cols() << '\n';
    char buf[40];
    for (std::size_t i = 0; i < m.rows(); ++i) {
        for (std::size_t j = 0; j < m.cols(); ++j) {
            std::snprintf(buf, sizeof(buf), "%.17g", m(i, j));
            if (j) out << ' ';
            out << buf;
        }
        out << '\n';
    }
}

namespace {

constexpr std::array<char, 4> kMagic = {'P', 'A', 'T', 'N'};

std::uint64_t read_u64_le(std::istream& in) {
    unsigned char b[8];
    in.read(reinterpret_cast<char*>(b), 8);
    if (!in) fail(ErrorCode::parse_failure, "binary matrix: truncated header");
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | b[i];
    return v;
}

void write_u64_le(std::ostream& out, std::uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
    out.write(reinterpret_cast<const char*>(b), 8);
}

} // namespace

DenseMatrix read_matrix_binary(std::istream& in) {
    std::array<char, 4> magic{};
    in.read(magic.data(), 4);
    if (!in || magic != kMagic)
        fail(ErrorCode::parse_failure, "binary matrix: missing PATN magic");
    const std::uint64_t rows = read_u64_le(in);
    const std::uint64_t cols = read_u64_le(in);
    if (rows == 0 || cols == 0)
        fail(ErrorCode::parse_failure, "binary matrix: zero dimension");
    if (rows > (1ull << 32) || cols > (1ull << 32) || rows * cols > (1ull << 34))
        fail(ErrorCode::overflow, "binary matrix: dimensions unreasonably large");
    DenseMatrix m(static_cast<std::size_t>(rows), static_cast<std::size_t>(cols));
    static_assert(sizeof(double) == 8 && std::numeric_limits<double>::is_iec559);
    in.read(reinterpret_cast<char*>(m.data().data()),
            static_cast<std::streamsize>(rows * cols * 8));
    if (!in) fail(ErrorCode::parse_failure, "binary matrix: truncated data");
    if (!m.all_finite()) fail(ErrorCode::parse_failure, "binary matrix: non-finite entry");
    return m;
}

void write_matrix_binary(std::ostream& out, const DenseMatrix& m) {
    out.write(kMagic.data(), 4);
    write_u64_le(out, m.rows());
    write_u64_le(out, m.cols());
    out.write(reinterpret_cast<const char*>(m.data().data()),
              static_cast<std::streamsize>(m.data().size() * 8));
}

DenseMatrix read_matrix_any(std::istream& in, std::size_t& line_no) {
    std::array<char, 4> magic{};
    in.read(magic.data(), 4);
    const std::streamsize got = in.gcount();
    if (!in && got == 0) fail(ErrorCode::parse_failure, "line 1: empty input");
    in.clear();
    for (std::streamsize i = got; i > 0; --i) in.unget();
    if (got == 4 && magic == kMagic) return read_matrix_binary(in);
    return read_matrix_text(in, line_no);
}

DenseMatrix load_matrix(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorCode::io_failure, "cannot open " + path);
    std::size_t line_no = 0;
    return read_matrix_any(in, line_no);
}

void save_matrix(const std::string& path, const DenseMatrix& m, bool binary) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorCode::io_failure, "cannot open " + path + " for writing");
    if (binary)
        write_matrix_binary(out, m);
    else
        write_matrix_text(out, m);
    if (!out) fail(ErrorCode::io_failure, "write failed for " + path);
}

} // namespace polyattn
