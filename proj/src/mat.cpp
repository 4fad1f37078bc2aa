#include "abr/mat.hpp"

#include <cmath>
#include <stdexcept>

namespace abr {

void matmul(const Mat& a, const Mat& b, Mat& c) {
    if (a.cols != b.rows) throw std::invalid_argument("matmul: inner dimensions differ");
    if (c.rows != a.rows || c.cols != b.cols) c = Mat(a.rows, b.cols);
    else c.fill(0.0);
    const int m = a.rows, k = a.cols, n = b.cols;
    for (int i = 0; i < m; ++i) {
        const double* arow = a.row_ptr(i);
        double* crow = c.row_ptr(i);
        for (int p = 0; p < k; ++p) {
            const double av = arow[p];
            const double* brow = b.row_ptr(p);
            for (int j = 0; j < n; ++j) crow[j] += av * brow[j];
        }
    }
}

void matmul_tn_accum(const Mat& a, const Mat& b, Mat& c) {
    if (a.rows != b.rows) throw std::invalid_argument("matmul_tn: row counts differ");
    if (c.rows != a.cols || c.cols != b.cols) throw std::invalid_argument("matmul_tn: bad output shape");
    const int m = a.rows, k = a.cols, n = b.cols;
    for (int i = 0; i < m; ++i) {
        const double* arow = a.row_ptr(i);
        const double* brow = b.row_ptr(i);
        for (int p = 0; p < k; ++p) {
            const double av = arow[p];
            double* crow = c.row_ptr(p);
            for (int j = 0; j < n; ++j) crow[j] += av * brow[j];
        }
    }
}

void matmul_nt(const Mat& a, const Mat& b, Mat& c) {
    if (a.cols != b.cols) throw std::invalid_argument("matmul_nt: inner dimensions differ");
    if (c.rows != a.rows || c.cols != b.rows) c = Mat(a.rows, b.rows);
    const int m = a.rows, k = a.cols, n = b.rows;
    for (int i = 0; i < m; ++i) {
        const double* arow = a.row_ptr(i);
        double* crow = c.row_ptr(i);
        for (int j = 0; j < n; ++j) {
            const double* brow = b.row_ptr(j);
            double s = 0.0;
            for (int p = 0; p < k; ++p) s += arow[p] * brow[p];
            crow[j] = s;
        }
    }
}

void col_sums_accum(const Mat& a, std::vector<double>& out) {
    if (static_cast<int>(out.size()) != a.cols) throw std::invalid_argument("col_sums: bad output size");
    for (int i = 0; i < a.rows; ++i) {
        const double* arow = a.row_ptr(i);
        for (int j = 0; j < a.cols; ++j) out[j] += arow[j];
    }
}

Mat hcat(const Mat& a, const Mat& b) {
    if (a.rows != b.rows) throw std::invalid_argument("hcat: row counts differ");
    Mat c(a.rows, a.cols + b.cols);
    for (int i = 0; i < a.rows; ++i) {
        double* crow = c.row_ptr(i);
        const double* arow = a.row_ptr(i);
        const double* brow = b.row_ptr(i);
        for (int j = 0; j < a.cols; ++j) crow[j] = arow[j];
        for (int j = 0; j < b.cols; ++j) crow[a.cols + j] = brow[j];
    }
    return c;
}

bool all_finite(const Mat& a) {
    for (double v : a.data)
        if (!std::isfinite(v)) return false;
    return true;
}

}  // namespace abr
