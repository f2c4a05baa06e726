// Symmetric Jacobi eigensolver and Gram-side thin SVD.
#ifndef TCAM_LINALG_HPP
#define TCAM_LINALG_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "tcam/tensor.hpp"

namespace tcam
{

struct EigenResult
{
    std::vector<double> values; // descending
    DenseMatrix vectors;        // column i pairs with values[i]
    int sweeps = 0;
};

struct SvdResult
{
    DenseMatrix U;             // rows x k, orthonormal columns
    std::vector<double> sigma; // k = min(rows, cols), descending
    DenseMatrix V;             // cols x k, orthonormal columns
};

/// Relative cutoff below which a singular value counts as zero.
inline constexpr double singular_cutoff = 1e-12;

namespace detail
{

// Stable descending order of `values`, ties keep original index order.
inline std::vector<std::size_t> descending_order(const std::vector<double>& values)
{
    std::vector<std::size_t> order(values.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return values[a] > values[b]; });
    return order;
}

inline double dot_columns(const DenseMatrix& a, std::size_t i, const DenseMatrix& b,
                          std::size_t j)
{
    double acc = 0.0;
    for (std::size_t r = 0; r < a.rows(); ++r)
        acc += a(r, i) * b(r, j);
    return acc;
}

} // namespace detail

/// Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.
///
/// An off-diagonal entry is rotated away unless it is below machine epsilon
/// relative to its diagonal pair (or below 1e-18 * ||S||_F); sweeps stop when a full sweep rotates
/// nothing (which also puts every off-diagonal entry below 1e-12 * ||S||_F)
/// or after `max_sweeps`.
inline EigenResult sym_eig(const DenseMatrix& s, int max_sweeps = 50)
{
    const std::size_t n = s.rows();
    if (n != s.cols())
        throw std::invalid_argument("sym_eig: matrix is " + std::to_string(s.rows()) + "x" +
                                    std::to_string(s.cols()) + ", expected square");
    const double norm = frobenius_norm(s);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (std::abs(s(i, j) - s(j, i)) > 1e-10 * std::max(norm, 1.0))
                throw std::invalid_argument("sym_eig: matrix is not symmetric at (" +
                                            std::to_string(i) + "," + std::to_string(j) + ")");

    DenseMatrix a = s;
    DenseMatrix v = DenseMatrix::identity(n);
    const double eps = std::numeric_limits<double>::epsilon();
    // Entries this small are roundoff; rotating them only churns.
    const double floor = 1e-18 * norm;

    int sweep = 0;
    for (; sweep < max_sweeps; ++sweep) {
        bool rotated = false;
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (std::abs(apq) <= floor ||
                    std::abs(apq) <= eps * std::sqrt(std::abs(a(p, p)) * std::abs(a(q, q))))
                    continue;
                rotated = true;
                // Symmetric Schur 2x2: choose the smaller rotation angle.
                const double tau = (a(q, q) - a(p, p)) / (2.0 * apq);
                const double t = (tau >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(tau) + std::sqrt(1.0 + tau * tau));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double sn = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = a(k, p);
                    const double akq = a(k, q);
                    a(k, p) = c * akp - sn * akq;
                    a(k, q) = sn * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = a(p, k);
                    const double aqk = a(q, k);
                    a(p, k) = c * apk - sn * aqk;
                    a(q, k) = sn * apk + c * aqk;
                }
                a(p, q) = 0.0;
                a(q, p) = 0.0;
                for (std::size_t k = 0; k < n; ++k) {
                    const double vkp = v(k, p);
                    const double vkq = v(k, q);
                    v(k, p) = c * vkp - sn * vkq;
                    v(k, q) = sn * vkp + c * vkq;
                }
            }
        }
        if (!rotated)
            break;
    }

    std::vector<double> diag(n);
    for (std::size_t i = 0; i < n; ++i)
        diag[i] = a(i, i);
    const auto order = detail::descending_order(diag);

    EigenResult out;
    out.values.resize(n);
    out.vectors = DenseMatrix(n, n);
    out.sweeps = sweep + 1;
    for (std::size_t k = 0; k < n; ++k) {
        out.values[k] = diag[order[k]];
        for (std::size_t r = 0; r < n; ++r)
            out.vectors(r, k) = v(r, order[k]);
    }
    return out;
}

/// Scales each column by +-1 so its largest-magnitude entry is positive
/// (first index wins ties).
inline DenseMatrix fix_signs(DenseMatrix v)
{
    for (std::size_t c = 0; c < v.cols(); ++c) {
        std::size_t best = 0;
        for (std::size_t r = 1; r < v.rows(); ++r)
            if (std::abs(v(r, c)) > std::abs(v(best, c)))
                best = r;
        if (v.rows() > 0 && v(best, c) < 0.0)
            for (std::size_t r = 0; r < v.rows(); ++r)
                v(r, c) = -v(r, c);
    }
    return v;
}

/// Extends the first `valid` orthonormal columns of `q` to `total` orthonormal
/// columns. The extra columns come from the Householder QR of the valid block,
/// so they are orthogonal to its span to working precision.
inline DenseMatrix complete_orthonormal(const DenseMatrix& q, std::size_t valid,
                                        std::size_t total)
{
    const std::size_t m = q.rows();
    if (valid > q.cols() || total > m || valid > total)
        throw std::invalid_argument("complete_orthonormal: cannot extend " +
                                    std::to_string(valid) + " columns to " +
                                    std::to_string(total) + " in dimension " +
                                    std::to_string(m));
    DenseMatrix out(m, total);
    for (std::size_t c = 0; c < valid; ++c)
        for (std::size_t r = 0; r < m; ++r)
            out(r, c) = q(r, c);
    if (valid == total)
        return out;

    // Householder vectors of the valid block; reflector k acts on rows k..m-1.
    DenseMatrix work(m, valid);
    for (std::size_t c = 0; c < valid; ++c)
        for (std::size_t r = 0; r < m; ++r)
            work(r, c) = q(r, c);
    std::vector<std::vector<double>> reflectors;
    reflectors.reserve(valid);
    for (std::size_t k = 0; k < valid; ++k) {
        std::vector<double> h(m - k);
        double norm = 0.0;
        for (std::size_t r = k; r < m; ++r) {
            h[r - k] = work(r, k);
            norm += h[r - k] * h[r - k];
        }
        norm = std::sqrt(norm);
        const double alpha = h[0] >= 0.0 ? -norm : norm;
        h[0] -= alpha;
        double hn = 0.0;
        for (double x : h)
            hn += x * x;
        if (hn > 0.0) {
            const double inv = 1.0 / std::sqrt(hn);
            for (double& x : h)
                x *= inv;
        }
        for (std::size_t c = k; c < valid; ++c) {
            double d = 0.0;
            for (std::size_t r = k; r < m; ++r)
                d += h[r - k] * work(r, c);
            for (std::size_t r = k; r < m; ++r)
                work(r, c) -= 2.0 * d * h[r - k];
        }
        reflectors.push_back(std::move(h));
    }

    std::vector<double> col(m);
    for (std::size_t c = valid; c < total; ++c) {
        std::fill(col.begin(), col.end(), 0.0);
        col[c] = 1.0;
        for (std::size_t k = valid; k-- > 0;) {
            const auto& h = reflectors[k];
            double d = 0.0;
            for (std::size_t r = k; r < m; ++r)
                d += h[r - k] * col[r];
            for (std::size_t r = k; r < m; ++r)
                col[r] -= 2.0 * d * h[r - k];
        }
        for (std::size_t r = 0; r < m; ++r)
            out(r, c) = col[r];
    }
    return out;
}

namespace detail
{

// Modified Gram-Schmidt over the first `count` columns, in place. Returns the
// number of leading columns that stayed linearly independent.
inline std::size_t reorthonormalize(DenseMatrix& q, std::size_t count)
{
    for (std::size_t c = 0; c < count; ++c) {
        for (int pass = 0; pass < 2; ++pass)
            for (std::size_t p = 0; p < c; ++p) {
                const double d = dot_columns(q, p, q, c);
                for (std::size_t r = 0; r < q.rows(); ++r)
                    q(r, c) -= d * q(r, p);
            }
        const double n = std::sqrt(dot_columns(q, c, q, c));
        if (!(n > 0.5))
            return c;
        for (std::size_t r = 0; r < q.rows(); ++r)
            q(r, c) /= n;
    }
    return count;
}

} // namespace detail

/// Thin SVD through the eigendecomposition of the smaller Gram matrix.
///
/// Directions whose singular value falls below singular_cutoff * sigma_1 get
/// sigma = 0 and an orthonormal completion on the projected side. Each right
/// singular vector is sign-normalized by fix_signs and its left partner
/// flipped with it.
inline SvdResult svd_thin(const DenseMatrix& m)
{
    if (m.empty())
        throw std::invalid_argument("svd_thin: empty matrix");
    for (double v : m.data())
        if (!std::isfinite(v))
            throw std::invalid_argument("svd_thin: non-finite entry");

    const bool gram_on_cols = m.cols() <= m.rows();
    const DenseMatrix mt = transpose(m);
    const DenseMatrix gram = gram_on_cols ? matmul(mt, m) : matmul(m, mt);
    const EigenResult eig = sym_eig(gram);
    const std::size_t k = eig.values.size();

    std::vector<double> sigma(k);
    for (std::size_t i = 0; i < k; ++i)
        sigma[i] = std::sqrt(std::max(eig.values[i], 0.0));

    // `known` are the Gram eigenvectors; `projected` = op * known / sigma.
    const DenseMatrix& known = eig.vectors;
    const DenseMatrix& op = gram_on_cols ? m : mt;
    const DenseMatrix raw = matmul(op, known);
    const double cutoff = singular_cutoff * sigma[0];

    std::size_t rank = 0;
    while (rank < k && sigma[rank] > cutoff && sigma[rank] > 0.0)
        ++rank;

    DenseMatrix projected(op.rows(), k);
    for (std::size_t c = 0; c < rank; ++c)
        for (std::size_t r = 0; r < op.rows(); ++r)
            projected(r, c) = raw(r, c) / sigma[c];
    rank = detail::reorthonormalize(projected, rank);
    for (std::size_t c = rank; c < k; ++c)
        sigma[c] = 0.0;
    projected = complete_orthonormal(projected, rank, k);

    SvdResult out;
    out.sigma = std::move(sigma);
    out.V = gram_on_cols ? known : projected;
    out.U = gram_on_cols ? projected : known;

    const DenseMatrix fixed = fix_signs(out.V);
    for (std::size_t c = 0; c < k; ++c)
        if (k > 0 && fixed.column(c) != out.V.column(c))
            for (std::size_t r = 0; r < out.U.rows(); ++r)
                out.U(r, c) = -out.U(r, c);
    out.V = fixed;
    return out;
}

/// The leading `count` left singular vectors of `m` (count <= rows),
/// sign-fixed, completed orthonormally past the numerical rank.
inline DenseMatrix leading_left_vectors(const DenseMatrix& m, std::size_t count)
{
    if (count == 0 || count > m.rows())
        throw std::invalid_argument("leading_left_vectors: requested " +
                                    std::to_string(count) + " vectors of a " +
                                    std::to_string(m.rows()) + "-row matrix");
    const SvdResult svd = svd_thin(m);
    std::size_t rank = 0;
    while (rank < svd.sigma.size() && svd.sigma[rank] > 0.0)
        ++rank;
    const std::size_t keep = std::min(rank, count);
    DenseMatrix lead(m.rows(), keep);
    for (std::size_t c = 0; c < keep; ++c)
        for (std::size_t r = 0; r < m.rows(); ++r)
            lead(r, c) = svd.U(r, c);
    return fix_signs(complete_orthonormal(lead, keep, count));
}

} // namespace tcam

#endif // TCAM_LINALG_HPP
