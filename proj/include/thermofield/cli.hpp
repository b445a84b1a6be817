#pragma once

// Command-line front end: rescale, batch, iqa and bench subcommands.

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "thermofield/thermofield.hpp"

namespace thermofield::cli {

namespace fs = std::filesystem;

/// Bad or conflicting command-line usage; maps to exit code 2.
class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct MethodOptions {
    std::string method = "fieldscale";
    std::vector<int> grid;
    std::optional<int> iters;
    std::optional<double> lesThreshold;
    std::optional<int> lesDistance;
    std::string lesTarget = "max";
    bool fast = false;
    std::optional<double> gamma;
    std::string gammaMode = "inverse";
    bool noEnhance = false;
    double clipLo = 1.0;
    double clipHi = 99.0;
};

inline void add_method_flags(CLI::App& app, MethodOptions& o) {
    app.add_option("--method", o.method, "Rescaling method")
        ->check(CLI::IsMember({"fieldscale", "minmax", "clip", "clipvideo", "he", "msr", "cgf"}));
    app.add_option("--grid", o.grid, "Grid rows and columns")->expected(2);
    app.add_option("--iters", o.iters, "Message-passing iterations");
    app.add_option("--les-threshold", o.lesThreshold, "LES threshold in RAW counts");
    app.add_option("--les-distance", o.lesDistance, "LES neighbourhood radius in cells");
    app.add_option("--les-target", o.lesTarget, "Grids receiving LES")
        ->check(CLI::IsMember({"max", "both", "none"}));
    app.add_flag("--fast", o.fast, "Fast setting: 1 MP iteration, LES threshold 800");
    app.add_option("--gamma", o.gamma, "Gamma value");
    app.add_option("--gamma-mode", o.gammaMode, "inverse: exponent 1/gamma, direct: exponent gamma")
        ->check(CLI::IsMember({"inverse", "direct"}));
    app.add_flag("--no-enhance", o.noEnhance, "Skip gamma and CLAHE");
    app.add_option("--clip-lo", o.clipLo, "Lower percentile for clip methods");
    app.add_option("--clip-hi", o.clipHi, "Upper percentile for clip methods");
}

inline FieldscaleParams resolve_params(const MethodOptions& o) {
    if (o.fast && (o.iters || o.lesThreshold)) {
        throw UsageError("--fast cannot be combined with --iters or --les-threshold");
    }
    FieldscaleParams p = o.fast ? FieldscaleParams::fast() : FieldscaleParams::defaults();
    if (!o.grid.empty()) {
        p.gridRows = o.grid.at(0);
        p.gridCols = o.grid.at(1);
    }
    if (o.iters) p.mpIterations = *o.iters;
    if (o.lesThreshold) p.lesThreshold = *o.lesThreshold;
    if (o.lesDistance) p.lesDistance = *o.lesDistance;
    p.applyLesTo = o.lesTarget == "both"   ? LesTarget::Both
                   : o.lesTarget == "none" ? LesTarget::Neither
                                           : LesTarget::MaxOnly;
    if (o.gamma) p.gamma = *o.gamma;
    p.gammaConvention =
        o.gammaMode == "direct" ? GammaConvention::DirectExponent : GammaConvention::InverseExponent;
    p.enhanceEnabled = !o.noEnhance;
    try {
        validate(p);
    } catch (const ParameterError& e) {
        throw UsageError(e.what());
    }
    return p;
}

/// Single-frame rescale with any non-video method (clipvideo on one frame is clip).
inline Image8 rescale_frame(const RawFrame& frame, const MethodOptions& o, const FieldscaleParams& p) {
    if (o.method == "minmax") return minmax_rescale(frame);
    if (o.method == "clip" || o.method == "clipvideo") {
        return clip_percentile_rescale(frame, o.clipLo, o.clipHi);
    }
    if (o.method == "he") return he30_clahe(frame);
    if (o.method == "msr") return msr_rescale(frame);
    if (o.method == "cgf") return cgf_rescale(frame);
    return fieldscale(frame, p).image;
}

inline void dump_fields(const FieldPair& fields, const fs::path& dir, const std::string& stem) {
    fs::create_directories(dir);
    write_field_dump(fields.min, dir / (stem + "_phi_min.tfld"));
    write_field_dump(fields.max, dir / (stem + "_phi_max.tfld"));
    save_image8(visualize_field(fields.min), dir / (stem + "_phi_min.png"));
    save_image8(visualize_field(fields.max), dir / (stem + "_phi_max.png"));
}

/// input | phi_min | phi_max | output, fields shown on the input's global range.
inline Image8 make_montage(const RawFrame& frame, const FieldPair* fields, const Image8& output) {
    const ClipBounds b = global_bounds(frame).non_degenerate();
    std::vector<Image8> panels{rescale_linear(frame, b)};
    if (fields) {
        panels.push_back(visualize(fields->min.image, b.lo, b.hi));
        panels.push_back(visualize(fields->max.image, b.lo, b.hi));
    }
    panels.push_back(output);
    return montage(panels);
}

inline fs::path montage_path(const fs::path& out) {
    return out.parent_path() / (out.stem().string() + "_montage.png");
}

inline bool is_raw_image_name(const fs::path& p) {
    std::string ext = p.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    return ext == ".png" || ext == ".tif" || ext == ".tiff";
}

inline std::vector<fs::path> list_frames(const fs::path& dir, const std::optional<std::string>& glob) {
    std::vector<fs::path> out;
    for (const auto& e : scan_sequence(dir, glob.value_or("*"))) {
        if (glob || is_raw_image_name(e.path)) out.push_back(e.path);
    }
    return out;
}

/// Worker count for opt-in parallel batch mode, capped by THERMOFIELD_THREADS.
inline unsigned batch_threads() {
    unsigned n = std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("THERMOFIELD_THREADS")) {
        const long cap = std::strtol(env, nullptr, 10);
        if (cap >= 1) n = std::min<unsigned>(n, static_cast<unsigned>(cap));
    }
    return n;
}

struct RescaleArgs {
    std::string input;
    std::string output;
    MethodOptions method;
    std::string dumpDir;
    bool montage = false;
};

inline int run_rescale(const RescaleArgs& a, std::ostream& out) {
    const FieldscaleParams params = resolve_params(a.method);
    if (!a.dumpDir.empty() && a.method.method != "fieldscale") {
        throw UsageError("--dump-fields requires --method fieldscale");
    }
    const RawFrame frame = load_raw(a.input);
    Image8 image;
    std::optional<FieldPair> fields;
    if (a.method.method == "fieldscale") {
        FieldscaleResult r = fieldscale(frame, params);
        image = std::move(r.image);
        fields = std::move(r.fields);
    } else {
        image = rescale_frame(frame, a.method, params);
    }
    const fs::path outPath(a.output);
    if (outPath.has_parent_path()) fs::create_directories(outPath.parent_path());
    save_image8(image, outPath);
    if (fields && !a.dumpDir.empty()) dump_fields(*fields, a.dumpDir, fs::path(a.input).stem().string());
    if (a.montage) {
        save_image8(make_montage(frame, fields ? &*fields : nullptr, image), montage_path(outPath));
    }
    out << "wrote " << outPath.string() << " (" << image.width << "x" << image.height << ")\n";
    return 0;
}

struct BatchArgs {
    std::string inputDir;
    std::string outputDir;
    MethodOptions method;
    std::optional<double> smoothAlpha;
    std::optional<std::string> glob;
    bool parallel = false;
};

inline int run_batch(const BatchArgs& a, std::ostream& out, std::ostream& err) {
    const FieldscaleParams params = resolve_params(a.method);
    if (a.smoothAlpha) {
        if (a.method.method != "fieldscale") throw UsageError("--smooth-alpha requires --method fieldscale");
        if (!(*a.smoothAlpha >= 0.0 && *a.smoothAlpha <= 1.0)) {
            throw UsageError("--smooth-alpha must lie in [0, 1]");
        }
        if (a.parallel) throw UsageError("--smooth-alpha processes frames in order; drop --parallel");
    }
    const std::vector<fs::path> files = list_frames(a.inputDir, a.glob);
    if (files.empty()) {
        err << "warning: no input frames in " << a.inputDir << '\n';
        return 0;
    }
    fs::create_directories(a.outputDir);
    auto target = [&](const fs::path& in) { return fs::path(a.outputDir) / (in.stem().string() + ".png"); };

    if (a.method.method == "clipvideo") {
        std::vector<RawFrame> frames;
        for (const auto& f : files) frames.push_back(load_raw(f));
        const std::vector<Image8> images = clip_video_rescale(frames, a.method.clipLo, a.method.clipHi);
        for (std::size_t i = 0; i < files.size(); ++i) save_image8(images[i], target(files[i]));
    } else if (a.smoothAlpha) {
        std::optional<TemporalState> state = TemporalState{std::nullopt, *a.smoothAlpha};
        for (const auto& f : files) {
            FieldscaleResult r = fieldscale(load_raw(f), params, state);
            save_image8(r.image, target(f));
            state = std::move(r.state);
        }
    } else {
        const unsigned workers = a.parallel ? std::min<unsigned>(batch_threads(), files.size()) : 1u;
        std::atomic<std::size_t> next{0};
        std::mutex errMutex;
        std::vector<std::string> errors;
        auto work = [&] {
            for (std::size_t i = next++; i < files.size(); i = next++) {
                try {
                    save_image8(rescale_frame(load_raw(files[i]), a.method, params), target(files[i]));
                } catch (const std::exception& e) {
                    std::lock_guard lock(errMutex);
                    errors.emplace_back(e.what());
                }
            }
        };
        std::vector<std::thread> pool;
        for (unsigned t = 1; t < workers; ++t) pool.emplace_back(work);
        work();
        for (auto& t : pool) t.join();
        if (!errors.empty()) {
            for (const auto& e : errors) err << "error: " << e << '\n';
            return 1;
        }
    }
    out << "processed " << files.size() << " frames into " << a.outputDir << '\n';
    return 0;
}

struct IqaArgs {
    std::string inputDir;
    std::string output;
    bool noHeader = false;
    std::string glob = "*.png";
};

inline int run_iqa(const IqaArgs& a, std::ostream& out, std::ostream& err) {
    std::vector<fs::path> files;
    for (const auto& e : scan_sequence(a.inputDir, a.glob)) files.push_back(e.path);
    const IqaBatchReport report = iqa_batch(files);
    for (const auto& f : report.failures) err << "error: " << f.message << '\n';
    std::ofstream os(a.output);
    if (!os) throw WriteError(a.output, "cannot open for writing");
    write_iqa_csv(os, report, !a.noHeader);
    out << "scored " << report.rows.size() << " images, " << report.failures.size() << " failed\n";
    return report.rows.empty() ? 1 : 0;
}

struct BenchArgs {
    std::string inputDir;
    std::string output;
    int repeats = 5;
    int warmup = 3;
    std::vector<std::string> sweep;
    std::optional<std::string> glob;
    std::size_t maxFrames = 0;
};

inline std::vector<double> parse_values(const std::string& csv) {
    std::vector<double> values;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            values.push_back(std::stod(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw UsageError("bad sweep value '" + item + "'");
        }
    }
    if (values.empty()) throw UsageError("--sweep needs at least one value");
    return values;
}

inline int run_bench(const BenchArgs& a, std::ostream& out) {
    std::vector<fs::path> files = list_frames(a.inputDir, a.glob);
    if (a.maxFrames > 0 && files.size() > a.maxFrames) files.resize(a.maxFrames);
    if (files.empty()) throw ParameterError("no frames to benchmark in " + a.inputDir);
    std::vector<RawFrame> frames;
    for (const auto& f : files) frames.push_back(load_raw(f));

    const BenchOptions opts{a.repeats, a.warmup};
    std::vector<TimingRecord> records;
    if (!a.sweep.empty()) {
        SweepAxis axis;
        try {
            axis = parse_sweep_axis(a.sweep.at(0));
        } catch (const ParameterError& e) {
            throw UsageError(e.what());
        }
        const std::vector<double> values = parse_values(a.sweep.at(1));
        records = bench_sweep(frames, axis, values, opts);
    } else {
        const FieldscaleParams settings[] = {FieldscaleParams::defaults(), FieldscaleParams::fast()};
        records = bench_settings(frames, settings, opts);
    }
    std::ofstream os(a.output);
    if (!os) throw WriteError(a.output, "cannot open for writing");
    write_timing_csv(os, records);
    for (const auto& r : records) {
        out << to_string(r.setting) << ' ' << r.axis << ' ' << r.value << ": field "
            << r.fieldConstructionMs.mean << " +/- " << r.fieldConstructionMs.stdDev << " ms, total "
            << r.totalMs.mean << " +/- " << r.totalMs.stdDev << " ms over " << r.samples
            << " samples\n";
    }
    return 0;
}

/// Exit codes: 0 success, 1 runtime failure, 2 usage error.
inline int cli_main(int argc, const char* const* argv, std::ostream& out = std::cout,
                    std::ostream& err = std::cerr) {
    CLI::App app{"Thermal RAW to 8-bit rescaling with locality-aware min/max fields", "thermofield"};
    app.require_subcommand(1);

    RescaleArgs rescale;
    auto* rescaleCmd = app.add_subcommand("rescale", "Rescale one RAW frame");
    rescaleCmd->add_option("input", rescale.input, "16-bit PNG or TIFF")->required();
    rescaleCmd->add_option("-o,--output", rescale.output, "8-bit PNG output")->required();
    add_method_flags(*rescaleCmd, rescale.method);
    rescaleCmd->add_option("--dump-fields", rescale.dumpDir, "Write field dumps into this directory");
    rescaleCmd->add_flag("--montage", rescale.montage, "Also write an input|fields|output montage");

    BatchArgs batch;
    auto* batchCmd = app.add_subcommand("batch", "Rescale every frame of a directory");
    batchCmd->add_option("input", batch.inputDir, "Input directory")->required();
    batchCmd->add_option("-o,--output", batch.outputDir, "Output directory")->required();
    add_method_flags(*batchCmd, batch.method);
    batchCmd->add_option("--smooth-alpha", batch.smoothAlpha, "Temporal field smoothing weight");
    batchCmd->add_option("--glob", batch.glob, "File name pattern");
    batchCmd->add_flag("--parallel", batch.parallel, "Process frames concurrently");

    IqaArgs iqa;
    auto* iqaCmd = app.add_subcommand("iqa", "Score 8-bit images with gradient and entropy");
    iqaCmd->add_option("input", iqa.inputDir, "Directory of 8-bit PNGs")->required();
    iqaCmd->add_option("-o,--output", iqa.output, "CSV report")->required();
    iqaCmd->add_flag("--no-header", iqa.noHeader, "Omit the CSV header row");
    iqaCmd->add_option("--glob", iqa.glob, "File name pattern");

    BenchArgs bench;
    auto* benchCmd = app.add_subcommand("bench", "Time field construction and rescaling");
    benchCmd->add_option("input", bench.inputDir, "Directory of RAW frames")->required();
    benchCmd->add_option("-o,--output", bench.output, "Timing CSV")->required();
    benchCmd->add_option("--repeats", bench.repeats, "Timed passes over the frames")
        ->check(CLI::PositiveNumber);
    benchCmd->add_option("--warmup", bench.warmup, "Untimed warm-up runs")->check(CLI::NonNegativeNumber);
    benchCmd->add_option("--sweep", bench.sweep, "AXIS v1,v2,... (grid, iters, les_distance, les_threshold)")
        ->expected(2);
    benchCmd->add_option("--glob", bench.glob, "File name pattern");
    benchCmd->add_option("--max-frames", bench.maxFrames, "Use at most this many frames");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "usage error: " << e.what() << '\n';
        return 2;
    }

    try {
        if (*rescaleCmd) return run_rescale(rescale, out);
        if (*batchCmd) return run_batch(batch, out, err);
        if (*iqaCmd) return run_iqa(iqa, out, err);
        if (*benchCmd) return run_bench(bench, out);
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
    return 2;
}

inline int cli_main(const std::vector<std::string>& args, std::ostream& out = std::cout,
                    std::ostream& err = std::cerr) {
    std::vector<const char*> argv{"thermofield"};
    for (const auto& a : args) argv.push_back(a.c_str());
    return cli_main(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace thermofield::cli
