// Dense 3-way tensors and matrices, mode-n unfolding/folding, n-mode product.
#ifndef TCAM_TENSOR_HPP
#define TCAM_TENSOR_HPP

#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace tcam
{

/// Row-major dense matrix of doubles.
class DenseMatrix
{
public:
    DenseMatrix() = default;

    DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill)
    {
    }

    DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> data)
        : rows_(rows), cols_(cols), data_(std::move(data))
    {
        if (data_.size() != rows_ * cols_)
            throw std::invalid_argument("DenseMatrix: data length " +
                                        std::to_string(data_.size()) +
                                        " does not match " + std::to_string(rows_) +
                                        "x" + std::to_string(cols_));
    }

    static DenseMatrix identity(std::size_t n)
    {
        DenseMatrix m(n, n);
        for (std::size_t i = 0; i < n; ++i)
            m(i, i) = 1.0;
        return m;
    }

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    bool empty() const noexcept { return data_.empty(); }

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
    std::span<const double> row(std::size_t r) const
    {
        return {data_.data() + r * cols_, cols_};
    }

    std::vector<double> column(std::size_t c) const
    {
        std::vector<double> out(rows_);
        for (std::size_t r = 0; r < rows_; ++r)
            out[r] = (*this)(r, c);
        return out;
    }

    std::span<double> data() noexcept { return data_; }
    std::span<const double> data() const noexcept { return data_; }

    friend bool operator==(const DenseMatrix&, const DenseMatrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

using Shape3 = std::array<std::size_t, 3>;

/// C x H x W feature tensor, row-major (w fastest).
class FeatureTensor
{
public:
    FeatureTensor() = default;

    explicit FeatureTensor(Shape3 shape, double fill = 0.0)
        : shape_(shape), data_(checked_size(shape), fill)
    {
    }

    FeatureTensor(Shape3 shape, std::vector<double> data)
        : shape_(shape), data_(std::move(data))
    {
        if (data_.size() != checked_size(shape))
            throw std::invalid_argument("FeatureTensor: data length " +
                                        std::to_string(data_.size()) +
                                        " does not match shape");
    }

    const Shape3& shape() const noexcept { return shape_; }
    std::size_t channels() const noexcept { return shape_[0]; }
    std::size_t height() const noexcept { return shape_[1]; }
    std::size_t width() const noexcept { return shape_[2]; }
    std::size_t size() const noexcept { return data_.size(); }

    double& operator()(std::size_t c, std::size_t h, std::size_t w)
    {
        return data_[(c * shape_[1] + h) * shape_[2] + w];
    }
    double operator()(std::size_t c, std::size_t h, std::size_t w) const
    {
        return data_[(c * shape_[1] + h) * shape_[2] + w];
    }

    /// Spatial slice of one channel, H*W values.
    std::span<const double> channel(std::size_t c) const
    {
        return {data_.data() + c * shape_[1] * shape_[2], shape_[1] * shape_[2]};
    }

    std::span<double> data() noexcept { return data_; }
    std::span<const double> data() const noexcept { return data_; }

    bool all_finite() const
    {
        for (double v : data_)
            if (!std::isfinite(v))
                return false;
        return true;
    }

    friend bool operator==(const FeatureTensor&, const FeatureTensor&) = default;

private:
    static std::size_t checked_size(const Shape3& s)
    {
        if (s[0] == 0 || s[1] == 0 || s[2] == 0)
            throw std::invalid_argument("FeatureTensor: every dimension must be >= 1");
        return s[0] * s[1] * s[2];
    }

    Shape3 shape_{0, 0, 0};
    std::vector<double> data_;
};

namespace detail
{

inline std::size_t mode_index(int mode)
{
    if (mode < 1 || mode > 3)
        throw std::invalid_argument("invalid mode index " + std::to_string(mode) +
                                    " (expected 1, 2 or 3)");
    return static_cast<std::size_t>(mode - 1);
}

// The two modes other than `m`, ascending.
inline std::pair<std::size_t, std::size_t> other_modes(std::size_t m)
{
    switch (m) {
    case 0: return {1, 2};
    case 1: return {0, 2};
    default: return {0, 1};
    }
}

} // namespace detail

/// Mode-n unfolding (mode is 1-based). Rows index the chosen mode; columns
/// flatten the remaining two modes in ascending order, row-major.
inline DenseMatrix unfold(const FeatureTensor& t, int mode)
{
    const std::size_t m = detail::mode_index(mode);
    const auto [a, b] = detail::other_modes(m);
    const Shape3& s = t.shape();
    DenseMatrix out(s[m], s[a] * s[b]);
    std::array<std::size_t, 3> idx{};
    for (idx[0] = 0; idx[0] < s[0]; ++idx[0])
        for (idx[1] = 0; idx[1] < s[1]; ++idx[1])
            for (idx[2] = 0; idx[2] < s[2]; ++idx[2])
                out(idx[m], idx[a] * s[b] + idx[b]) = t(idx[0], idx[1], idx[2]);
    return out;
}

/// Inverse of unfold.
inline FeatureTensor fold(const DenseMatrix& mat, int mode, const Shape3& shape)
{
    const std::size_t m = detail::mode_index(mode);
    const auto [a, b] = detail::other_modes(m);
    if (mat.rows() != shape[m] || mat.cols() != shape[a] * shape[b])
        throw std::invalid_argument("fold: " + std::to_string(mat.rows()) + "x" +
                                    std::to_string(mat.cols()) +
                                    " matrix is inconsistent with target shape for mode " +
                                    std::to_string(mode));
    FeatureTensor out(shape);
    std::array<std::size_t, 3> idx{};
    for (idx[0] = 0; idx[0] < shape[0]; ++idx[0])
        for (idx[1] = 0; idx[1] < shape[1]; ++idx[1])
            for (idx[2] = 0; idx[2] < shape[2]; ++idx[2])
                out(idx[0], idx[1], idx[2]) = mat(idx[m], idx[a] * shape[b] + idx[b]);
    return out;
}

/// Dense product a * b.
inline DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b)
{
    if (a.cols() != b.rows())
        throw std::invalid_argument("matmul: inner dimensions differ (" +
                                    std::to_string(a.cols()) + " vs " +
                                    std::to_string(b.rows()) + ")");
    DenseMatrix out(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        auto orow = out.row(i);
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const double aik = a(i, k);
            if (aik == 0.0)
                continue;
            auto brow = b.row(k);
            for (std::size_t j = 0; j < b.cols(); ++j)
                orow[j] += aik * brow[j];
        }
    }
    return out;
}

inline DenseMatrix transpose(const DenseMatrix& a)
{
    DenseMatrix out(a.cols(), a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j)
            out(j, i) = a(i, j);
    return out;
}

/// n-mode product T x_mode A: the mode's size is replaced by A.rows().
inline FeatureTensor mode_product(const FeatureTensor& t, const DenseMatrix& a, int mode)
{
    const std::size_t m = detail::mode_index(mode);
    if (a.cols() != t.shape()[m])
        throw std::invalid_argument("mode_product: matrix has " + std::to_string(a.cols()) +
                                    " columns but mode " + std::to_string(mode) +
                                    " has size " + std::to_string(t.shape()[m]));
    Shape3 shape = t.shape();
    shape[m] = a.rows();
    return fold(matmul(a, unfold(t, mode)), mode, shape);
}

inline double frobenius_norm(std::span<const double> values)
{
    double acc = 0.0;
    for (double v : values)
        acc += v * v;
    return std::sqrt(acc);
}

inline double frobenius_norm(const FeatureTensor& t) { return frobenius_norm(t.data()); }
inline double frobenius_norm(const DenseMatrix& m) { return frobenius_norm(m.data()); }

} // namespace tcam

#endif // TCAM_TENSOR_HPP
