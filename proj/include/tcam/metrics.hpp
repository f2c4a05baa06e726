// Saliency evaluation: Average Drop / Average Increase, embedding MSE, IoU.
#ifndef TCAM_METRICS_HPP
#define TCAM_METRICS_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "tcam/saliency.hpp"
#include "tcam/tucker.hpp"

namespace tcam
{

struct ConfidencePair
{
    std::string id;
    double p = 0.0; // true-class probability on the original image
    double o = 0.0; // true-class probability on the masked image
};

struct EmbeddingPair
{
    std::string id;
    std::vector<double> z;
    std::vector<double> z_masked;
};

class BinaryMask
{
public:
    BinaryMask() = default;
    BinaryMask(std::size_t h, std::size_t w, bool fill = false)
        : height_(h), width_(w), cells_(h * w, fill ? 1 : 0)
    {
    }

    std::size_t height() const noexcept { return height_; }
    std::size_t width() const noexcept { return width_; }
    bool operator()(std::size_t h, std::size_t w) const { return cells_[h * width_ + w] != 0; }
    void set(std::size_t h, std::size_t w, bool v) { cells_[h * width_ + w] = v ? 1 : 0; }
    std::size_t count() const
    {
        return static_cast<std::size_t>(std::count(cells_.begin(), cells_.end(), 1));
    }

    friend bool operator==(const BinaryMask&, const BinaryMask&) = default;

private:
    std::size_t height_ = 0;
    std::size_t width_ = 0;
    std::vector<unsigned char> cells_;
};

inline constexpr double default_threshold = 0.5;
inline const std::vector<double> default_sweep{0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
inline constexpr std::size_t default_spectrum_depth = 5;

struct AverageDrop
{
    double percent = 0.0;
    std::size_t used = 0;
    std::size_t excluded = 0; // pairs with p == 0
};

namespace detail
{

inline void check_probability(const ConfidencePair& pair)
{
    if (!(pair.p >= 0.0 && pair.p <= 1.0 && pair.o >= 0.0 && pair.o <= 1.0))
        throw std::invalid_argument("confidence pair '" + pair.id +
                                    "': probabilities must lie in [0,1]");
}

} // namespace detail

/// Mean of [p - o]_+ / p in percent; pairs with p == 0 are excluded and counted.
inline AverageDrop average_drop_report(const std::vector<ConfidencePair>& pairs)
{
    if (pairs.empty())
        throw std::invalid_argument("average_drop: empty input");
    AverageDrop out;
    double acc = 0.0;
    for (const auto& pair : pairs) {
        detail::check_probability(pair);
        if (pair.p == 0.0) {
            ++out.excluded;
            continue;
        }
        acc += std::max(pair.p - pair.o, 0.0) / pair.p;
        ++out.used;
    }
    if (out.used == 0)
        throw std::invalid_argument("average_drop: every pair has p == 0");
    out.percent = acc / static_cast<double>(out.used) * 100.0;
    return out;
}

inline double average_drop(const std::vector<ConfidencePair>& pairs)
{
    return average_drop_report(pairs).percent;
}

/// Percentage of pairs whose confidence strictly increases under masking.
inline double average_increase(const std::vector<ConfidencePair>& pairs)
{
    if (pairs.empty())
        throw std::invalid_argument("average_increase: empty input");
    std::size_t hits = 0;
    for (const auto& pair : pairs) {
        detail::check_probability(pair);
        if (pair.p < pair.o)
            ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(pairs.size()) * 100.0;
}

/// Mean over pairs of the squared Euclidean distance.
inline double embedding_mse(const std::vector<EmbeddingPair>& pairs)
{
    if (pairs.empty())
        throw std::invalid_argument("embedding_mse: empty input");
    double acc = 0.0;
    for (const auto& pair : pairs) {
        if (pair.z.size() != pair.z_masked.size())
            throw std::invalid_argument("embedding pair '" + pair.id + "': lengths " +
                                        std::to_string(pair.z.size()) + " and " +
                                        std::to_string(pair.z_masked.size()) + " differ");
        for (std::size_t i = 0; i < pair.z.size(); ++i) {
            const double d = pair.z[i] - pair.z_masked[i];
            acc += d * d;
        }
    }
    return acc / static_cast<double>(pairs.size());
}

/// Foreground where saliency >= threshold.
inline BinaryMask binarize(const SaliencyMap& m, double threshold)
{
    BinaryMask out(m.height(), m.width());
    for (std::size_t y = 0; y < m.height(); ++y)
        for (std::size_t x = 0; x < m.width(); ++x)
            out.set(y, x, m(y, x) >= threshold);
    return out;
}

struct IouCounts
{
    std::size_t intersection = 0;
    std::size_t uni = 0;
};

inline IouCounts iou_counts(const BinaryMask& b, const BinaryMask& s)
{
    if (b.height() != s.height() || b.width() != s.width())
        throw std::invalid_argument("iou: mask shapes differ (" + std::to_string(b.height()) +
                                    "x" + std::to_string(b.width()) + " vs " +
                                    std::to_string(s.height()) + "x" +
                                    std::to_string(s.width()) + ")");
    IouCounts out;
    for (std::size_t y = 0; y < b.height(); ++y)
        for (std::size_t x = 0; x < b.width(); ++x) {
            out.intersection += (b(y, x) && s(y, x)) ? 1 : 0;
            out.uni += (b(y, x) || s(y, x)) ? 1 : 0;
        }
    return out;
}

/// |B n S| / |B u S|; `empty_value` when both masks are empty.
inline double iou(const BinaryMask& b, const BinaryMask& s, double empty_value = 1.0)
{
    const IouCounts c = iou_counts(b, s);
    if (c.uni == 0)
        return empty_value;
    return static_cast<double>(c.intersection) / static_cast<double>(c.uni);
}

/// Mean per-image IoU in percent.
inline double miou(const std::vector<SaliencyMap>& maps, const std::vector<BinaryMask>& masks,
                   double threshold = default_threshold, double empty_value = 1.0)
{
    if (maps.size() != masks.size())
        throw std::invalid_argument("miou: " + std::to_string(maps.size()) + " maps but " +
                                    std::to_string(masks.size()) + " masks");
    if (maps.empty())
        throw std::invalid_argument("miou: empty input");
    double acc = 0.0;
    for (std::size_t i = 0; i < maps.size(); ++i)
        acc += iou(binarize(maps[i], threshold), masks[i], empty_value);
    return acc / static_cast<double>(maps.size()) * 100.0;
}

struct SweepRow
{
    double threshold = 0.0;
    double miou = 0.0;
};

inline std::vector<SweepRow> threshold_sweep(const std::vector<SaliencyMap>& maps,
                                             const std::vector<BinaryMask>& masks,
                                             const std::vector<double>& thresholds = default_sweep,
                                             double empty_value = 1.0)
{
    if (thresholds.empty())
        throw std::invalid_argument("threshold_sweep: empty threshold list");
    std::vector<SweepRow> rows;
    rows.reserve(thresholds.size());
    for (double t : thresholds)
        rows.push_back({t, miou(maps, masks, t, empty_value)});
    return rows;
}

/// min, Q1, median, Q3, max with linear interpolation between order statistics.
struct Quartiles
{
    double min = 0.0;
    double q1 = 0.0;
    double median = 0.0;
    double q3 = 0.0;
    double max = 0.0;
};

inline Quartiles quartiles(std::vector<double> values)
{
    if (values.empty())
        throw std::invalid_argument("quartiles: empty input");
    std::sort(values.begin(), values.end());
    auto at = [&](double q) {
        const double pos = q * static_cast<double>(values.size() - 1);
        const auto lo = static_cast<std::size_t>(std::floor(pos));
        const std::size_t hi = std::min(lo + 1, values.size() - 1);
        return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
    };
    return {values.front(), at(0.25), at(0.5), at(0.75), values.back()};
}

struct SpectrumReport
{
    /// ratios[t][j]: share of sigma_{j+1} in the total of tensor t.
    std::vector<std::vector<double>> ratios;
    /// summary[j]: distribution of ratios[.][j] over tensors.
    std::vector<Quartiles> summary;
};

/// Per-index shares sigma_j / sum(sigma) for the first k indices, plus their
/// distribution across tensors. Spectra shorter than k contribute zeros;
/// all-zero spectra contribute zeros everywhere.
inline SpectrumReport spectrum_report(const std::vector<SingularSpectrum>& spectra,
                                      std::size_t k = default_spectrum_depth)
{
    if (spectra.empty())
        throw std::invalid_argument("spectrum_report: empty input");
    if (k < 1)
        throw std::invalid_argument("spectrum_report: k must be >= 1");
    SpectrumReport out;
    for (const auto& s : spectra) {
        double total = 0.0;
        for (double v : s.values)
            total += v;
        std::vector<double> row(k, 0.0);
        if (total > 0.0)
            for (std::size_t j = 0; j < k && j < s.values.size(); ++j)
                row[j] = s.values[j] / total;
        out.ratios.push_back(std::move(row));
    }
    for (std::size_t j = 0; j < k; ++j) {
        std::vector<double> column;
        column.reserve(out.ratios.size());
        for (const auto& row : out.ratios)
            column.push_back(row[j]);
        out.summary.push_back(quartiles(std::move(column)));
    }
    return out;
}

} // namespace tcam

#endif // TCAM_METRICS_HPP
