// tcam: label-independent saliency maps and their evaluation, in batch.
//
//   tcam saliency  --manifest M --out DIR [--method tsm] [--workers N] ...
//   tcam eval      --manifest M --out DIR [--metrics ad,ai,mse,miou] [--sweep]
//   tcam spectrum  --manifest M --out DIR [--k 5]
//   tcam decompose TENSOR.npy --out DIR [--ranks r1,r2,r3]
//
// Exit codes: 0 success, 1 failure of some entry or input, 2 usage error.

#include <exception>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "tcam/commands.hpp"

namespace
{

struct Options
{
    std::string manifest;
    std::string method = "tsm";
    std::string projection = "raw";
    std::string tensor;
    std::vector<std::size_t> ranks;
    tcam::RunConfig cfg;
};

void add_common(CLI::App& cmd, Options& o, bool needs_manifest)
{
    if (needs_manifest)
        cmd.add_option("--manifest", o.manifest, "Dataset manifest CSV")
            ->required()
            ->check(CLI::ExistingFile);
    cmd.add_option("--out", o.cfg.out, "Output directory")->required();
    cmd.add_option("--tol", o.cfg.hooi.tol, "HOOI tolerance on relative core-norm change")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    cmd.add_option("--max-iter", o.cfg.hooi.max_iter, "HOOI iteration cap")
        ->capture_default_str()
        ->check(CLI::Range(1, 1000000));
    cmd.add_option("--workers", o.cfg.workers, "Parallel entries")
        ->capture_default_str()
        ->check(CLI::Range(1u, 1024u));
}

void add_method(CLI::App& cmd, Options& o)
{
    std::vector<std::string> names(tcam::method_names.begin(), tcam::method_names.end());
    cmd.add_option("--method", o.method, "Saliency method")
        ->capture_default_str()
        ->check(CLI::IsMember(names));
    cmd.add_option("--projection", o.projection,
                   "Operand collapsed by the SVD route: raw tensor or centered tensor")
        ->capture_default_str()
        ->check(CLI::IsMember({"raw", "centered"}));
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Label-independent CNN saliency maps via SVD and Tucker decompositions"};
    app.require_subcommand(1);
    Options o;

    auto* saliency = app.add_subcommand("saliency", "Compute a saliency map per manifest entry");
    add_common(*saliency, o, true);
    add_method(*saliency, o);
    saliency->add_option("--overlay", o.cfg.overlay, "Write heatmap overlays for entries with images")
        ->capture_default_str();
    saliency->add_option("--mask-output", o.cfg.mask_output,
                         "Write saliency-masked images for entries with images")
        ->capture_default_str();

    auto* eval = app.add_subcommand("eval", "Average Drop/Increase, embedding MSE and mIoU");
    add_common(*eval, o, true);
    add_method(*eval, o);
    eval->add_option("--metrics", o.cfg.metrics, "Subset of ad,ai,mse,miou (default: all available)")
        ->delimiter(',')
        ->check(CLI::IsMember(tcam::known_metrics));
    eval->add_option("--threshold", o.cfg.threshold, "Binarization threshold for mIoU")
        ->capture_default_str()
        ->check(CLI::Range(0.0, 1.0));
    eval->add_flag("--sweep", o.cfg.sweep, "Also write the mIoU threshold sweep (0.4..0.9)");

    auto* spectrum = app.add_subcommand("spectrum", "Singular-value share distributions");
    add_common(*spectrum, o, true);
    spectrum->add_option("--k", o.cfg.k, "Number of leading singular values")
        ->capture_default_str()
        ->check(CLI::Range(std::size_t{1}, std::size_t{100000}));

    auto* decompose = app.add_subcommand("decompose", "Tucker decomposition of one tensor");
    decompose->add_option("tensor", o.tensor, "3-D NPY tensor")->required()->check(CLI::ExistingFile);
    add_common(*decompose, o, false);
    decompose->add_option("--ranks", o.ranks, "Tucker ranks r1,r2,r3 (default: full)")
        ->delimiter(',')
        ->expected(3);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return tcam::exit_usage;
    }

    o.cfg.method = *tcam::parse_method(o.method);
    o.cfg.projection = o.projection == "centered" ? tcam::Projection::centered
                                                  : tcam::Projection::raw;
    if (!o.ranks.empty())
        o.cfg.ranks = tcam::Ranks{o.ranks[0], o.ranks[1], o.ranks[2]};
    try {
        o.cfg.validate();
    } catch (const std::exception& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return tcam::exit_usage;
    }

    try {
        if (*decompose)
            return tcam::cmd_decompose(o.tensor, o.cfg);
        const auto manifest = tcam::io::read_manifest(o.manifest);
        if (*saliency)
            return tcam::cmd_saliency(manifest, o.cfg);
        if (*eval)
            return tcam::cmd_eval(manifest, o.cfg);
        return tcam::cmd_spectrum(manifest, o.cfg);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return tcam::exit_partial;
    }
}
