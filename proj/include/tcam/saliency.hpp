// Label-independent saliency maps from a single feature tensor.
//
// Two decomposition routes produce a channel-space spectrum:
//  - matricized: spatially centered (H*W) x C matrix, thin SVD, right vectors;
//  - tensorial:  full-rank HOOI, mode-1 factor columns and core slice norms.
// Univector methods collapse F along the leading vector; multivector methods
// average |collapse| over every non-zero direction weighted by sigma_i/sigma_1.
#ifndef TCAM_SALIENCY_HPP
#define TCAM_SALIENCY_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "tcam/linalg.hpp"
#include "tcam/tensor.hpp"
#include "tcam/tucker.hpp"

namespace tcam
{

/// H x W grid with every value in [0, 1].
class SaliencyMap
{
public:
    SaliencyMap() = default;

    explicit SaliencyMap(DenseMatrix grid) : grid_(std::move(grid))
    {
        for (double v : grid_.data())
            if (!(v >= 0.0 && v <= 1.0))
                throw std::invalid_argument("SaliencyMap: value outside [0,1]");
    }

    static SaliencyMap filled(std::size_t h, std::size_t w, double value)
    {
        return SaliencyMap(DenseMatrix(h, w, value));
    }

    std::size_t height() const noexcept { return grid_.rows(); }
    std::size_t width() const noexcept { return grid_.cols(); }
    double operator()(std::size_t h, std::size_t w) const { return grid_(h, w); }
    const DenseMatrix& grid() const noexcept { return grid_; }

    friend bool operator==(const SaliencyMap&, const SaliencyMap&) = default;

private:
    DenseMatrix grid_;
};

/// Interleaved H x W x channels image with values in [0, 1]; channels is 1 or 3.
struct RasterImage
{
    std::size_t height = 0;
    std::size_t width = 0;
    std::size_t channels = 0;
    std::vector<double> pixels;

    RasterImage() = default;
    RasterImage(std::size_t h, std::size_t w, std::size_t c, double fill = 0.0)
        : height(h), width(w), channels(c), pixels(h * w * c, fill)
    {
        if (c != 1 && c != 3)
            throw std::invalid_argument("RasterImage: channels must be 1 or 3");
    }

    double& at(std::size_t h, std::size_t w, std::size_t c)
    {
        return pixels[(h * width + w) * channels + c];
    }
    double at(std::size_t h, std::size_t w, std::size_t c) const
    {
        return pixels[(h * width + w) * channels + c];
    }

    friend bool operator==(const RasterImage&, const RasterImage&) = default;
};

enum class Method { eigencam, tsm, multivec_eigencam, mtsm };

inline constexpr std::array<std::string_view, 4> method_names{
    "eigencam", "tsm", "multivec-eigencam", "mtsm"};

inline std::string_view to_string(Method m) { return method_names[static_cast<int>(m)]; }

inline std::optional<Method> parse_method(std::string_view name)
{
    for (std::size_t i = 0; i < method_names.size(); ++i)
        if (method_names[i] == name)
            return static_cast<Method>(i);
    return std::nullopt;
}

inline bool uses_tucker(Method m) { return m == Method::tsm || m == Method::mtsm; }

/// Reduction over channels inside the weighted collapse.
enum class Collapse { sum, mean };
/// Reduction over per-vector maps in the multivector methods.
enum class Combine { mean, sum };
/// What the matricized route collapses: the raw tensor, or the spatially
/// centered tensor that was decomposed (reference CAM tooling does the latter).
enum class Projection { raw, centered };

struct SaliencyOptions
{
    HooiOptions hooi{};
    Collapse collapse = Collapse::sum;
    Combine combine = Combine::mean;
    Projection projection = Projection::raw;
};

struct SaliencyResult
{
    SaliencyMap map;
    int hooi_iterations = 0; // 0 for the matricized route
    double fit = 1.0;
};

/// (m - min) / (max - min). A range below 1e-12 (absolute, or relative to the
/// largest magnitude) yields the all-zero map.
inline SaliencyMap minmax_norm(const DenseMatrix& raw)
{
    if (raw.empty())
        return SaliencyMap(raw);
    double lo = raw.data()[0];
    double hi = lo;
    for (double v : raw.data()) {
        if (!std::isfinite(v))
            throw std::invalid_argument("minmax_norm: non-finite entry");
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    const double range = hi - lo;
    const double scale = std::max(std::abs(lo), std::abs(hi));
    DenseMatrix out(raw.rows(), raw.cols());
    if (range < 1e-12 || range < 1e-12 * scale)
        return SaliencyMap(out);
    for (std::size_t i = 0; i < raw.data().size(); ++i)
        out.data()[i] = std::clamp((raw.data()[i] - lo) / range, 0.0, 1.0);
    return SaliencyMap(out);
}

/// sum_i w_i F_i over channels (or the mean, with Collapse::mean).
inline DenseMatrix weighted_collapse(const FeatureTensor& f, std::span<const double> w,
                                     Collapse reduce = Collapse::sum)
{
    if (w.size() != f.channels())
        throw std::invalid_argument("weighted_collapse: weight length " +
                                    std::to_string(w.size()) + " != channel count " +
                                    std::to_string(f.channels()));
    DenseMatrix out(f.height(), f.width());
    auto acc = out.data();
    for (std::size_t c = 0; c < f.channels(); ++c) {
        const auto slice = f.channel(c);
        for (std::size_t p = 0; p < slice.size(); ++p)
            acc[p] += w[c] * slice[p];
    }
    if (reduce == Collapse::mean)
        for (double& v : acc)
            v /= static_cast<double>(f.channels());
    return out;
}

/// F with each channel's spatial mean removed.
inline FeatureTensor center_spatially(const FeatureTensor& f)
{
    FeatureTensor out = f;
    const std::size_t hw = f.height() * f.width();
    for (std::size_t c = 0; c < f.channels(); ++c) {
        double mean = 0.0;
        for (double v : f.channel(c))
            mean += v;
        mean /= static_cast<double>(hw);
        for (std::size_t p = 0; p < hw; ++p)
            out.data()[c * hw + p] -= mean;
    }
    return out;
}

/// Right singular spectrum of the centered (H*W) x C matricization.
inline SingularSpectrum centered_svd_spectrum(const FeatureTensor& f)
{
    // The (H*W) x C matricization is the transposed mode-1 unfolding.
    const SvdResult svd = svd_thin(transpose(unfold(center_spatially(f), 1)));
    SingularSpectrum out;
    out.values = svd.sigma;
    out.vectors = transpose(svd.V);
    return out;
}

/// Mode-1 spectrum of the full-rank HOOI of the raw tensor.
inline SingularSpectrum tucker_spectrum(const FeatureTensor& f, const HooiOptions& opts = {},
                                        TuckerFactors* factors_out = nullptr)
{
    TuckerFactors factors = hooi(f, full_ranks(f), opts);
    SingularSpectrum s = mode1_spectrum(factors);
    if (factors_out)
        *factors_out = std::move(factors);
    return s;
}

/// norm(|collapse(F, leading vector)|).
inline SaliencyMap univector_map(const FeatureTensor& f, const SingularSpectrum& s,
                                 Collapse reduce = Collapse::sum)
{
    if (s.vectors.rows() == 0)
        throw std::invalid_argument("univector_map: empty spectrum");
    DenseMatrix raw = weighted_collapse(f, s.vectors.row(0), reduce);
    for (double& v : raw.data())
        v = std::abs(v);
    return minmax_norm(raw);
}

/// norm(combine_i (sigma_i/sigma_1) |collapse(F, v_i)|) over directions with
/// sigma_i/sigma_1 >= singular_cutoff.
inline SaliencyMap multivector_map(const FeatureTensor& f, const SingularSpectrum& s,
                                   Collapse reduce = Collapse::sum,
                                   Combine combine = Combine::mean)
{
    DenseMatrix acc(f.height(), f.width());
    const double top = s.values.empty() ? 0.0 : s.values.front();
    std::size_t used = 0;
    if (top > 0.0) {
        for (std::size_t i = 0; i < s.values.size(); ++i) {
            const double weight = s.values[i] / top;
            if (weight < singular_cutoff)
                continue;
            const DenseMatrix proj = weighted_collapse(f, s.vectors.row(i), reduce);
            for (std::size_t p = 0; p < proj.data().size(); ++p)
                acc.data()[p] += weight * std::abs(proj.data()[p]);
            ++used;
        }
    }
    if (combine == Combine::mean && used > 0)
        for (double& v : acc.data())
            v /= static_cast<double>(used);
    return minmax_norm(acc);
}

inline SaliencyResult compute_saliency(Method method, const FeatureTensor& f,
                                       const SaliencyOptions& opts = {})
{
    if (!f.all_finite())
        throw std::invalid_argument("feature tensor has non-finite entries");
    SaliencyResult out;
    if (uses_tucker(method)) {
        TuckerFactors factors;
        const SingularSpectrum s = tucker_spectrum(f, opts.hooi, &factors);
        out.hooi_iterations = factors.iterations;
        out.fit = factors.fit;
        out.map = method == Method::tsm ? univector_map(f, s, opts.collapse)
                                        : multivector_map(f, s, opts.collapse, opts.combine);
        return out;
    }
    const SingularSpectrum s = centered_svd_spectrum(f);
    const FeatureTensor& operand =
        opts.projection == Projection::centered ? center_spatially(f) : f;
    out.map = method == Method::eigencam
                  ? univector_map(operand, s, opts.collapse)
                  : multivector_map(operand, s, opts.collapse, opts.combine);
    return out;
}

inline SaliencyMap eigencam(const FeatureTensor& f, const SaliencyOptions& opts = {})
{
    return compute_saliency(Method::eigencam, f, opts).map;
}

inline SaliencyMap tsm(const FeatureTensor& f, const SaliencyOptions& opts = {})
{
    return compute_saliency(Method::tsm, f, opts).map;
}

inline SaliencyMap multivec_eigencam(const FeatureTensor& f, const SaliencyOptions& opts = {})
{
    return compute_saliency(Method::multivec_eigencam, f, opts).map;
}

inline SaliencyMap mtsm(const FeatureTensor& f, const SaliencyOptions& opts = {})
{
    return compute_saliency(Method::mtsm, f, opts).map;
}

/// Corner-aligned bilinear resampling: output corners sample input corners.
inline SaliencyMap upsample_bilinear(const SaliencyMap& m, std::size_t out_h, std::size_t out_w)
{
    if (out_h < 1 || out_w < 1)
        throw std::invalid_argument("upsample_bilinear: target size must be >= 1");
    const std::size_t in_h = m.height();
    const std::size_t in_w = m.width();
    auto coord = [](std::size_t i, std::size_t in, std::size_t out) {
        if (out == 1 || in == 1)
            return 0.0;
        return static_cast<double>(i) * static_cast<double>(in - 1) /
               static_cast<double>(out - 1);
    };
    DenseMatrix out(out_h, out_w);
    for (std::size_t y = 0; y < out_h; ++y) {
        const double sy = coord(y, in_h, out_h);
        const auto y0 = std::min(static_cast<std::size_t>(sy), in_h - 1);
        const std::size_t y1 = std::min(y0 + 1, in_h - 1);
        const double fy = sy - static_cast<double>(y0);
        for (std::size_t x = 0; x < out_w; ++x) {
            const double sx = coord(x, in_w, out_w);
            const auto x0 = std::min(static_cast<std::size_t>(sx), in_w - 1);
            const std::size_t x1 = std::min(x0 + 1, in_w - 1);
            const double fx = sx - static_cast<double>(x0);
            const double top = (1.0 - fx) * m(y0, x0) + fx * m(y0, x1);
            const double bottom = (1.0 - fx) * m(y1, x0) + fx * m(y1, x1);
            out(y, x) = std::clamp((1.0 - fy) * top + fy * bottom, 0.0, 1.0);
        }
    }
    return SaliencyMap(out);
}

namespace detail
{

inline void check_same_grid(const RasterImage& img, const SaliencyMap& m, const char* who)
{
    if (img.height != m.height() || img.width != m.width())
        throw std::invalid_argument(std::string(who) + ": image is " +
                                    std::to_string(img.height) + "x" +
                                    std::to_string(img.width) + ", saliency map is " +
                                    std::to_string(m.height()) + "x" +
                                    std::to_string(m.width()));
}

} // namespace detail

/// Pixel-wise product of every channel with the saliency grid.
inline RasterImage apply_mask(const RasterImage& img, const SaliencyMap& m)
{
    detail::check_same_grid(img, m, "apply_mask");
    RasterImage out = img;
    for (std::size_t y = 0; y < img.height; ++y)
        for (std::size_t x = 0; x < img.width; ++x)
            for (std::size_t c = 0; c < img.channels; ++c)
                out.at(y, x, c) = img.at(y, x, c) * m(y, x);
    return out;
}

/// Blue -> green -> red ramp: 0 is (0,0,1), 0.5 is (0,1,0), 1 is (1,0,0).
inline std::array<double, 3> heat_color(double v)
{
    v = std::clamp(v, 0.0, 1.0);
    if (v <= 0.5)
        return {0.0, 2.0 * v, 1.0 - 2.0 * v};
    return {2.0 * v - 1.0, 2.0 - 2.0 * v, 0.0};
}

/// Equal-weight blend of the image (grayscale broadcast to RGB) with the
/// heat colormap of the saliency map. Always returns an RGB image.
inline RasterImage render_overlay(const RasterImage& img, const SaliencyMap& m)
{
    detail::check_same_grid(img, m, "render_overlay");
    RasterImage out(img.height, img.width, 3);
    for (std::size_t y = 0; y < img.height; ++y)
        for (std::size_t x = 0; x < img.width; ++x) {
            const auto color = heat_color(m(y, x));
            for (std::size_t c = 0; c < 3; ++c) {
                const double base = img.at(y, x, img.channels == 3 ? c : 0);
                out.at(y, x, c) = std::clamp(0.5 * base + 0.5 * color[c], 0.0, 1.0);
            }
        }
    return out;
}

} // namespace tcam

#endif // TCAM_SALIENCY_HPP
