// Batch commands over manifests: saliency, eval, spectrum, decompose.
//
// Entries are processed by a pool of `workers` threads; every numerical kernel
// stays sequential, outputs are per-entry files, and reports are written in
// manifest order, so results do not depend on scheduling.
#ifndef TCAM_COMMANDS_HPP
#define TCAM_COMMANDS_HPP

#include <algorithm>
#include <atomic>
#include <chrono>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "tcam/io/csv.hpp"
#include "tcam/io/image.hpp"
#include "tcam/io/manifest.hpp"
#include "tcam/io/npy.hpp"
#include "tcam/metrics.hpp"
#include "tcam/saliency.hpp"
#include "tcam/tucker.hpp"

namespace tcam
{

enum ExitCode : int { exit_ok = 0, exit_partial = 1, exit_usage = 2 };

/// A required manifest column is missing for the requested work.
class missing_field_error : public std::runtime_error
{
public:
    missing_field_error(const std::string& column, const std::string& id)
        : std::runtime_error("manifest entry '" + id + "' lacks required column '" + column +
                             "'"),
          column_(column)
    {
    }
    const std::string& column() const noexcept { return column_; }

private:
    std::string column_;
};

struct RunConfig
{
    Method method = Method::tsm;
    HooiOptions hooi{};
    Projection projection = Projection::raw;
    double threshold = default_threshold;
    bool sweep = false;
    std::vector<double> sweep_grid = default_sweep;
    std::filesystem::path out = ".";
    unsigned workers = 1;
    std::size_t k = default_spectrum_depth;
    bool overlay = true;
    bool mask_output = true;
    std::optional<Ranks> ranks; // decompose only; full ranks when unset
    std::vector<std::string> metrics; // eval only; empty selects every available metric

    void validate() const
    {
        if (!(hooi.tol > 0.0))
            throw std::invalid_argument("--tol must be positive");
        if (hooi.max_iter < 1)
            throw std::invalid_argument("--max-iter must be >= 1");
        if (!(threshold >= 0.0 && threshold <= 1.0))
            throw std::invalid_argument("--threshold must lie in [0,1]");
        for (double t : sweep_grid)
            if (!(t >= 0.0 && t <= 1.0))
                throw std::invalid_argument("sweep thresholds must lie in [0,1]");
        if (workers < 1)
            throw std::invalid_argument("--workers must be >= 1");
        if (k < 1)
            throw std::invalid_argument("--k must be >= 1");
    }

    SaliencyOptions saliency_options() const
    {
        SaliencyOptions o;
        o.hooi = hooi;
        o.projection = projection;
        return o;
    }

    /// Self-describing report preamble.
    std::vector<std::string> describe() const
    {
        std::string grid;
        for (std::size_t i = 0; i < sweep_grid.size(); ++i)
            grid += (i ? ";" : "") + io::format_number(sweep_grid[i]);
        return {"method=" + std::string(to_string(method)),
                "projection=" + std::string(projection == Projection::raw ? "raw" : "centered"),
                "tol=" + io::format_number(hooi.tol),
                "max_iter=" + std::to_string(hooi.max_iter),
                "threshold=" + io::format_number(threshold), "sweep=" + grid,
                "k=" + std::to_string(k)};
    }
};

/// Runs fn(i) for i in [0, n) on up to `workers` threads. Returns the error
/// message of every failed index (empty string on success).
inline std::vector<std::string> parallel_map(std::size_t n, unsigned workers,
                                             const std::function<void(std::size_t)>& fn)
{
    std::vector<std::string> errors(n);
    std::atomic<std::size_t> next{0};
    auto run = [&] {
        for (std::size_t i = next++; i < n; i = next++) {
            try {
                fn(i);
            } catch (const std::exception& e) {
                errors[i] = e.what();
                if (errors[i].empty())
                    errors[i] = "unknown error";
            }
        }
    };
    const unsigned count = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(n)));
    std::vector<std::jthread> pool;
    for (unsigned t = 1; t < count; ++t)
        pool.emplace_back(run);
    run();
    return errors;
}

namespace detail
{

inline const std::filesystem::path& require(const std::optional<std::filesystem::path>& p,
                                            const char* column, const io::ManifestEntry& e)
{
    if (!p)
        throw missing_field_error(column, e.id);
    return *p;
}

inline void ensure_dir(const std::filesystem::path& dir)
{
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec)
        throw io::io_error(dir.string() + ": cannot create directory: " + ec.message());
}

inline void log_failure(std::ostream& log, const std::string& id, const std::string& what)
{
    log << "entry '" << id << "' failed: " << what << '\n';
}

} // namespace detail

struct SaliencyOutcome
{
    std::size_t height = 0;
    std::size_t width = 0;
    int hooi_iterations = 0;
    double fit = 1.0;
    double seconds = 0.0;
};

/// Writes <id>.npy (feature-map resolution) per entry; with an image, also
/// <id>_overlay.png and <id>_masked.png at image resolution. summary.csv is
/// deterministic; wall-clock timings go to timing.csv.
inline int cmd_saliency(const io::DatasetManifest& manifest, const RunConfig& cfg,
                        std::ostream& log = std::cerr)
{
    cfg.validate();
    detail::ensure_dir(cfg.out);
    const auto& entries = manifest.entries;
    std::vector<SaliencyOutcome> outcomes(entries.size());
    const SaliencyOptions opts = cfg.saliency_options();

    const auto errors = parallel_map(entries.size(), cfg.workers, [&](std::size_t i) {
        const auto& e = entries[i];
        const auto start = std::chrono::steady_clock::now();
        const FeatureTensor f = io::read_tensor(detail::require(e.tensor, "tensor", e));
        const SaliencyResult r = compute_saliency(cfg.method, f, opts);
        io::write_array(r.map.grid(), cfg.out / (e.id + ".npy"));
        if (e.image && (cfg.overlay || cfg.mask_output)) {
            const RasterImage img = io::read_image(*e.image);
            const SaliencyMap up = upsample_bilinear(r.map, img.height, img.width);
            if (cfg.overlay)
                io::write_image(render_overlay(img, up), cfg.out / (e.id + "_overlay.png"));
            if (cfg.mask_output)
                io::write_image(apply_mask(img, up), cfg.out / (e.id + "_masked.png"));
        }
        auto& o = outcomes[i];
        o.height = r.map.height();
        o.width = r.map.width();
        o.hooi_iterations = r.hooi_iterations;
        o.fit = r.fit;
        o.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    });

    io::ReportTable summary;
    summary.comments = cfg.describe();
    summary.header = {"id", "status", "height", "width", "hooi_iterations", "fit", "error"};
    io::ReportTable timing;
    timing.header = {"id", "seconds"};
    bool failed = false;
    for (std::size_t i = 0; i < entries.size(); ++i) {
        const auto& o = outcomes[i];
        if (!errors[i].empty()) {
            failed = true;
            detail::log_failure(log, entries[i].id, errors[i]);
            summary.add_row({entries[i].id, "failed", "", "", "", "", errors[i]});
            continue;
        }
        summary.add_row({entries[i].id, "ok", std::to_string(o.height), std::to_string(o.width),
                         std::to_string(o.hooi_iterations), io::format_number(o.fit), ""});
        timing.add_row({entries[i].id, io::format_number(o.seconds)});
    }
    io::write_report(summary, cfg.out / "summary.csv");
    io::write_report(timing, cfg.out / "timing.csv");
    return failed ? exit_partial : exit_ok;
}

namespace detail
{

inline bool has(const io::ManifestEntry& e, std::string_view column)
{
    if (column == "p") return e.p.has_value();
    if (column == "o") return e.o.has_value();
    if (column == "mask") return e.mask.has_value();
    if (column == "tensor") return e.tensor.has_value();
    if (column == "embedding") return e.embedding.has_value();
    if (column == "embedding_masked") return e.embedding_masked.has_value();
    return false;
}

inline bool all_have(const io::DatasetManifest& m, std::string_view column)
{
    return std::all_of(m.entries.begin(), m.entries.end(),
                       [&](const io::ManifestEntry& e) { return has(e, column); });
}

inline void require_all(const io::DatasetManifest& m, std::string_view column)
{
    for (const auto& e : m.entries)
        if (!has(e, column))
            throw missing_field_error(std::string(column), e.id);
}

} // namespace detail

inline const std::vector<std::string> known_metrics{"ad", "ai", "mse", "miou"};

/// Writes metrics.csv (metric,n,value,excluded) and, with cfg.sweep, sweep.csv.
/// Metric rows: average_drop and average_increase in percent, mse raw and
/// mse_x1e3 (= mse * 1000), miou in percent at cfg.threshold.
inline int cmd_eval(const io::DatasetManifest& manifest, const RunConfig& cfg,
                    std::ostream& log = std::cerr)
{
    cfg.validate();
    if (manifest.entries.empty())
        throw std::invalid_argument("eval: manifest has no entries");

    std::vector<std::string> wanted = cfg.metrics;
    if (wanted.empty()) {
        if (detail::all_have(manifest, "p") && detail::all_have(manifest, "o")) {
            wanted.push_back("ad");
            wanted.push_back("ai");
        }
        if (detail::all_have(manifest, "embedding") &&
            detail::all_have(manifest, "embedding_masked"))
            wanted.push_back("mse");
        if (detail::all_have(manifest, "mask") && detail::all_have(manifest, "tensor"))
            wanted.push_back("miou");
        if (wanted.empty())
            throw std::invalid_argument("eval: manifest provides no columns for any metric");
    }
    auto wants = [&](const char* m) {
        return std::find(wanted.begin(), wanted.end(), m) != wanted.end();
    };
    for (const auto& m : wanted)
        if (std::find(known_metrics.begin(), known_metrics.end(), m) == known_metrics.end())
            throw std::invalid_argument("eval: unknown metric '" + m + "'");
    if (wants("ad") || wants("ai")) {
        detail::require_all(manifest, "p");
        detail::require_all(manifest, "o");
    }
    if (wants("mse")) {
        detail::require_all(manifest, "embedding");
        detail::require_all(manifest, "embedding_masked");
    }
    if (wants("miou")) {
        detail::require_all(manifest, "mask");
        detail::require_all(manifest, "tensor");
    }
    detail::ensure_dir(cfg.out);
    const auto& entries = manifest.entries;

    io::ReportTable table;
    table.comments = cfg.describe();
    table.header = {"metric", "n", "value", "excluded"};

    if (wants("ad") || wants("ai")) {
        std::vector<ConfidencePair> pairs;
        for (const auto& e : entries)
            pairs.push_back({e.id, *e.p, *e.o});
        if (wants("ad")) {
            const AverageDrop ad = average_drop_report(pairs);
            table.add_row({"average_drop", std::to_string(ad.used), io::format_number(ad.percent),
                           std::to_string(ad.excluded)});
        }
        if (wants("ai"))
            table.add_row({"average_increase", std::to_string(pairs.size()),
                           io::format_number(average_increase(pairs)), "0"});
    }

    if (wants("mse")) {
        std::vector<EmbeddingPair> pairs(entries.size());
        const auto errors = parallel_map(entries.size(), cfg.workers, [&](std::size_t i) {
            pairs[i] = {entries[i].id, io::read_vector(*entries[i].embedding),
                        io::read_vector(*entries[i].embedding_masked)};
        });
        for (std::size_t i = 0; i < errors.size(); ++i)
            if (!errors[i].empty())
                throw std::runtime_error("entry '" + entries[i].id + "': " + errors[i]);
        const double mse = embedding_mse(pairs);
        table.add_row({"mse", std::to_string(pairs.size()), io::format_number(mse), "0"});
        table.add_row({"mse_x1e3", std::to_string(pairs.size()), io::format_number(mse * 1e3), "0"});
    }

    int status = exit_ok;
    if (wants("miou")) {
        std::vector<std::optional<SaliencyMap>> maps(entries.size());
        std::vector<BinaryMask> masks(entries.size());
        const SaliencyOptions opts = cfg.saliency_options();
        const auto errors = parallel_map(entries.size(), cfg.workers, [&](std::size_t i) {
            masks[i] = io::read_mask(*entries[i].mask);
            const FeatureTensor f = io::read_tensor(*entries[i].tensor);
            maps[i] = upsample_bilinear(compute_saliency(cfg.method, f, opts).map,
                                        masks[i].height(), masks[i].width());
        });
        std::vector<SaliencyMap> ok_maps;
        std::vector<BinaryMask> ok_masks;
        std::size_t excluded = 0;
        for (std::size_t i = 0; i < entries.size(); ++i) {
            if (!errors[i].empty()) {
                detail::log_failure(log, entries[i].id, errors[i]);
                ++excluded;
                status = exit_partial;
                continue;
            }
            ok_maps.push_back(std::move(*maps[i]));
            ok_masks.push_back(std::move(masks[i]));
        }
        if (ok_maps.empty())
            throw std::runtime_error("eval: no entry produced a saliency map for miou");
        table.add_row({"miou", std::to_string(ok_maps.size()),
                       io::format_number(miou(ok_maps, ok_masks, cfg.threshold)),
                       std::to_string(excluded)});
        if (cfg.sweep) {
            io::ReportTable sweep;
            sweep.comments = cfg.describe();
            sweep.header = {"threshold", "miou"};
            for (const auto& row : threshold_sweep(ok_maps, ok_masks, cfg.sweep_grid))
                sweep.add_row({io::format_number(row.threshold), io::format_number(row.miou)});
            io::write_report(sweep, cfg.out / "sweep.csv");
        }
    }

    io::write_report(table, cfg.out / "metrics.csv");
    return status;
}

/// Writes spectrum.csv (per-tensor shares of the first k singular values for
/// the centered-SVD and Tucker routes) and spectrum_summary.csv (quartiles).
inline int cmd_spectrum(const io::DatasetManifest& manifest, const RunConfig& cfg,
                        std::ostream& log = std::cerr)
{
    cfg.validate();
    detail::ensure_dir(cfg.out);
    const auto& entries = manifest.entries;
    std::vector<SingularSpectrum> svd(entries.size());
    std::vector<SingularSpectrum> tucker(entries.size());
    const auto errors = parallel_map(entries.size(), cfg.workers, [&](std::size_t i) {
        const auto& e = entries[i];
        const FeatureTensor f = io::read_tensor(detail::require(e.tensor, "tensor", e));
        svd[i] = centered_svd_spectrum(f);
        tucker[i] = tucker_spectrum(f, cfg.hooi);
    });

    std::vector<std::string> ids;
    std::vector<SingularSpectrum> ok_svd;
    std::vector<SingularSpectrum> ok_tucker;
    bool failed = false;
    for (std::size_t i = 0; i < entries.size(); ++i) {
        if (!errors[i].empty()) {
            failed = true;
            detail::log_failure(log, entries[i].id, errors[i]);
            continue;
        }
        ids.push_back(entries[i].id);
        ok_svd.push_back(std::move(svd[i]));
        ok_tucker.push_back(std::move(tucker[i]));
    }

    io::ReportTable per;
    per.comments = cfg.describe();
    per.header = {"id", "route"};
    for (std::size_t j = 1; j <= cfg.k; ++j)
        per.header.push_back("sigma" + std::to_string(j));
    io::ReportTable summary;
    summary.comments = cfg.describe();
    summary.header = {"route", "index", "min", "q1", "median", "q3", "max"};

    if (!ids.empty()) {
        const SpectrumReport rs = spectrum_report(ok_svd, cfg.k);
        const SpectrumReport rt = spectrum_report(ok_tucker, cfg.k);
        for (std::size_t t = 0; t < ids.size(); ++t) {
            for (const auto& [route, rep] : {std::pair{"svd", &rs}, std::pair{"tucker", &rt}}) {
                std::vector<std::string> row{ids[t], route};
                for (double v : rep->ratios[t])
                    row.push_back(io::format_number(v));
                per.add_row(std::move(row));
            }
        }
        for (const auto& [route, rep] : {std::pair{"svd", &rs}, std::pair{"tucker", &rt}})
            for (std::size_t j = 0; j < cfg.k; ++j) {
                const Quartiles& q = rep->summary[j];
                summary.add_row({route, std::to_string(j + 1), io::format_number(q.min),
                                 io::format_number(q.q1), io::format_number(q.median),
                                 io::format_number(q.q3), io::format_number(q.max)});
            }
    }
    io::write_report(per, cfg.out / "spectrum.csv");
    io::write_report(summary, cfg.out / "spectrum_summary.csv");
    return failed ? exit_partial : exit_ok;
}

/// Writes <stem>_core.npy and <stem>_factor{1,2,3}.npy, and appends one JSON
/// record to decompose.jsonl.
inline int cmd_decompose(const std::filesystem::path& tensor_path, const RunConfig& cfg)
{
    cfg.validate();
    detail::ensure_dir(cfg.out);
    const FeatureTensor f = io::read_tensor(tensor_path);
    const Ranks ranks = cfg.ranks.value_or(full_ranks(f));
    const TuckerFactors tf = hooi(f, ranks, cfg.hooi);
    const std::string stem = tensor_path.stem().string();
    io::write_array(tf.core, cfg.out / (stem + "_core.npy"));
    for (std::size_t k = 0; k < 3; ++k)
        io::write_array(tf.factors[k], cfg.out / (stem + "_factor" + std::to_string(k + 1) + ".npy"));

    nlohmann::json rec;
    rec["tensor"] = tensor_path.string();
    rec["shape"] = f.shape();
    rec["ranks"] = ranks;
    rec["fit"] = tf.fit;
    rec["iterations"] = tf.iterations;
    rec["tol"] = cfg.hooi.tol;
    rec["max_iter"] = cfg.hooi.max_iter;
    rec["core_norms"] = tf.core_norms;
    std::ofstream out(cfg.out / "decompose.jsonl", std::ios::app);
    if (!out)
        throw io::io_error((cfg.out / "decompose.jsonl").string() + ": cannot open for writing");
    out << rec.dump() << '\n';
    return exit_ok;
}

} // namespace tcam

#endif // TCAM_COMMANDS_HPP
