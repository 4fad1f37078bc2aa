#pragma once

#include <algorithm>
#include <vector>

namespace abr {

// Dense row-major matrix of doubles. All training math is 64-bit.
struct Mat {
    int rows = 0;
    int cols = 0;
    std::vector<double> data;

    Mat() = default;
    Mat(int r, int c) : rows(r), cols(c), data(static_cast<size_t>(r) * c, 0.0) {}

    double& operator()(int r, int c) { return data[static_cast<size_t>(r) * cols + c]; }
    double operator()(int r, int c) const { return data[static_cast<size_t>(r) * cols + c]; }

    double* row_ptr(int r) { return data.data() + static_cast<size_t>(r) * cols; }
    const double* row_ptr(int r) const { return data.data() + static_cast<size_t>(r) * cols; }

    size_t size() const { return data.size(); }
    void fill(double v) { std::fill(data.begin(), data.end(), v); }
    bool same_shape(const Mat& o) const { return rows == o.rows && cols == o.cols; }
};

// c = a * b. Resizes c if needed, otherwise zeroes it first.
void matmul(const Mat& a, const Mat& b, Mat& c);

// c += a^T * b. Shapes must already match; used for weight gradients.
void matmul_tn_accum(const Mat& a, const Mat& b, Mat& c);

// c = a * b^T. Resizes c if needed.
void matmul_nt(const Mat& a, const Mat& b, Mat& c);

// out[j] += sum_i a(i, j). Used for bias gradients.
void col_sums_accum(const Mat& a, std::vector<double>& out);

// Column-wise concatenation of two matrices with equal row counts.
Mat hcat(const Mat& a, const Mat& b);

bool all_finite(const Mat& a);

}  // namespace abr
