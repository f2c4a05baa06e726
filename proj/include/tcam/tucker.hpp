// Tucker decomposition of 3-way tensors: HOSVD, HOOI and the mode-1 spectrum.
#ifndef TCAM_TUCKER_HPP
#define TCAM_TUCKER_HPP

#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "tcam/linalg.hpp"
#include "tcam/tensor.hpp"

namespace tcam
{

using Ranks = std::array<std::size_t, 3>;

struct TuckerFactors
{
    FeatureTensor core;                  // r1 x r2 x r3
    std::array<DenseMatrix, 3> factors;  // mode k: size_k x r_k
    double fit = 1.0;                    // 1 - ||T - T_hat|| / ||T||
    int iterations = 0;                  // HOOI sweeps over all modes
    std::vector<double> core_norms;      // ||core|| after init and each sweep
};

struct HooiOptions
{
    double tol = 1e-5;  // on the relative change of ||core||
    int max_iter = 100;
};

/// Singular values paired with channel-space vectors; row i of `vectors`
/// pairs with values[i].
struct SingularSpectrum
{
    std::vector<double> values;
    DenseMatrix vectors;
};

inline Ranks full_ranks(const FeatureTensor& t) { return t.shape(); }

namespace detail
{

inline void check_ranks(const FeatureTensor& t, const Ranks& ranks)
{
    for (std::size_t k = 0; k < 3; ++k)
        if (ranks[k] < 1 || ranks[k] > t.shape()[k])
            throw std::invalid_argument("rank " + std::to_string(ranks[k]) + " for mode " +
                                        std::to_string(k + 1) + " outside [1, " +
                                        std::to_string(t.shape()[k]) + "]");
    if (!t.all_finite())
        throw std::invalid_argument("tensor has non-finite entries");
}

// T multiplied by the transposed factor of every mode except `skip` (0-based;
// pass 3 to project on all modes).
inline FeatureTensor project(const FeatureTensor& t, const std::array<DenseMatrix, 3>& f,
                             std::size_t skip)
{
    FeatureTensor out = t;
    for (std::size_t k = 0; k < 3; ++k)
        if (k != skip)
            out = mode_product(out, transpose(f[k]), static_cast<int>(k) + 1);
    return out;
}

inline double relative_fit(const FeatureTensor& t, const FeatureTensor& approx)
{
    const double norm = frobenius_norm(t);
    double diff = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        const double d = t.data()[i] - approx.data()[i];
        diff += d * d;
    }
    if (norm == 0.0)
        return diff == 0.0 ? 1.0 : 0.0;
    return 1.0 - std::sqrt(diff) / norm;
}

} // namespace detail

/// Expands core x1 A1 x2 A2 x3 A3.
inline FeatureTensor reconstruct(const TuckerFactors& f)
{
    for (std::size_t k = 0; k < 3; ++k)
        if (f.factors[k].cols() != f.core.shape()[k])
            throw std::invalid_argument("reconstruct: factor " + std::to_string(k + 1) +
                                        " has " + std::to_string(f.factors[k].cols()) +
                                        " columns, core mode has " +
                                        std::to_string(f.core.shape()[k]));
    FeatureTensor out = f.core;
    for (std::size_t k = 0; k < 3; ++k)
        out = mode_product(out, f.factors[k], static_cast<int>(k) + 1);
    return out;
}

/// Truncated higher-order SVD: factor k holds the leading left singular
/// vectors of the mode-k unfolding.
inline TuckerFactors hosvd(const FeatureTensor& t, const Ranks& ranks)
{
    detail::check_ranks(t, ranks);
    TuckerFactors out;
    for (std::size_t k = 0; k < 3; ++k)
        out.factors[k] = leading_left_vectors(unfold(t, static_cast<int>(k) + 1), ranks[k]);
    out.core = detail::project(t, out.factors, 3);
    out.fit = detail::relative_fit(t, reconstruct(out));
    out.core_norms = {frobenius_norm(out.core)};
    return out;
}

/// Higher-order orthogonal iteration initialised by HOSVD.
inline TuckerFactors hooi(const FeatureTensor& t, const Ranks& ranks,
                          const HooiOptions& opts = {})
{
    if (!(opts.tol > 0.0))
        throw std::invalid_argument("hooi: tolerance must be positive");
    if (opts.max_iter < 1)
        throw std::invalid_argument("hooi: max_iter must be >= 1");

    TuckerFactors out = hosvd(t, ranks);
    double previous = out.core_norms.front();
    for (int it = 1; it <= opts.max_iter; ++it) {
        for (std::size_t k = 0; k < 3; ++k) {
            const FeatureTensor partial = detail::project(t, out.factors, k);
            out.factors[k] =
                leading_left_vectors(unfold(partial, static_cast<int>(k) + 1), ranks[k]);
        }
        out.core = detail::project(t, out.factors, 3);
        const double current = frobenius_norm(out.core);
        out.core_norms.push_back(current);
        out.iterations = it;
        const double change =
            previous > 0.0 ? std::abs(current - previous) / previous : std::abs(current);
        previous = current;
        if (change < opts.tol)
            break;
    }
    out.fit = detail::relative_fit(t, reconstruct(out));
    return out;
}

/// Singular values as Frobenius norms of the core's mode-1 slices, paired with
/// the columns of the mode-1 factor and sorted jointly in descending order.
inline SingularSpectrum mode1_spectrum(const TuckerFactors& f)
{
    const std::size_t r = f.core.shape()[0];
    const std::size_t channels = f.factors[0].rows();
    std::vector<double> norms(r);
    for (std::size_t i = 0; i < r; ++i)
        norms[i] = frobenius_norm(f.core.channel(i));
    const auto order = detail::descending_order(norms);

    SingularSpectrum out;
    out.values.resize(r);
    out.vectors = DenseMatrix(r, channels);
    for (std::size_t i = 0; i < r; ++i) {
        out.values[i] = norms[order[i]];
        for (std::size_t c = 0; c < channels; ++c)
            out.vectors(i, c) = f.factors[0](c, order[i]);
    }
    return out;
}

/// (sigma_1 + ... + sigma_k) / sum(sigma).
inline double variance_ratio(const SingularSpectrum& s, std::size_t k)
{
    if (k < 1 || k > s.values.size())
        throw std::invalid_argument("variance_ratio: k=" + std::to_string(k) +
                                    " outside [1, " + std::to_string(s.values.size()) + "]");
    double head = 0.0;
    double total = 0.0;
    for (std::size_t i = 0; i < s.values.size(); ++i) {
        total += s.values[i];
        if (i < k)
            head += s.values[i];
    }
    if (!(total > 0.0))
        throw std::domain_error("variance_ratio: all-zero spectrum");
    return head / total;
}

} // namespace tcam

#endif // TCAM_TUCKER_HPP
