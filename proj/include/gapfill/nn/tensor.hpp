#pragma once

#include <algorithm>
#include <cstddef>
#include <vector>

namespace gapfill::nn {

/// Dense row-major matrix of doubles; vectors are 1 x n.
struct Mat {
    std::size_t rows = 0, cols = 0;
    std::vector<double> a;

    Mat() = default;
    Mat(std::size_t r, std::size_t c) : rows(r), cols(c), a(r * c, 0.0) {}

    double& operator()(std::size_t r, std::size_t c) { return a[r * cols + c]; }
    double operator()(std::size_t r, std::size_t c) const { return a[r * cols + c]; }

    double* row(std::size_t r) { return a.data() + r * cols; }
    const double* row(std::size_t r) const { return a.data() + r * cols; }

    std::size_t size() const { return a.size(); }
    void zero() { std::fill(a.begin(), a.end(), 0.0); }

    bool same_shape(const Mat& o) const { return rows == o.rows && cols == o.cols; }
};

} // namespace gapfill::nn
