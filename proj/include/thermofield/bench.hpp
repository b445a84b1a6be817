#pragma once

// Wall-clock timing of the two pipeline phases (field construction, field-based
// rescaling with enhancement) and parameter sweeps over them.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "thermofield/fieldcore.hpp"
#include "thermofield/iqa.hpp"
#include "thermofield/rescaler.hpp"

namespace thermofield {

enum class BenchSetting { Default, Fast, Custom };

inline const char* to_string(BenchSetting s) {
    switch (s) {
        case BenchSetting::Default: return "default";
        case BenchSetting::Fast: return "fast";
        case BenchSetting::Custom: return "custom";
    }
    return "custom";
}

inline BenchSetting classify(const FieldscaleParams& p) {
    if (p == FieldscaleParams::defaults()) return BenchSetting::Default;
    if (p == FieldscaleParams::fast()) return BenchSetting::Fast;
    return BenchSetting::Custom;
}

enum class SweepAxis { GridSize, MpIterations, LesDistance, LesThreshold };

inline const char* to_string(SweepAxis a) {
    switch (a) {
        case SweepAxis::GridSize: return "grid";
        case SweepAxis::MpIterations: return "iters";
        case SweepAxis::LesDistance: return "les_distance";
        case SweepAxis::LesThreshold: return "les_threshold";
    }
    return "";
}

inline SweepAxis parse_sweep_axis(const std::string& name) {
    if (name == "grid") return SweepAxis::GridSize;
    if (name == "iters") return SweepAxis::MpIterations;
    if (name == "les_distance") return SweepAxis::LesDistance;
    if (name == "les_threshold") return SweepAxis::LesThreshold;
    throw ParameterError("unknown sweep axis '" + name +
                         "' (expected grid, iters, les_distance or les_threshold)");
}

struct TimingRecord {
    BenchSetting setting = BenchSetting::Custom;
    std::string axis = "none";
    std::string value;
    MetricSummary fieldConstructionMs;
    MetricSummary rescalingMs;
    MetricSummary totalMs;
    std::size_t samples = 0;
    int width = 0;
    int height = 0;
    /// Per-sample field construction times in visit order; records from one bench_settings
    /// call line up index by index (same frame, adjacent in time).
    std::vector<double> fieldConstructionSamples;
};

struct BenchOptions {
    int repeats = 1;
    int warmup = 3;
};

/// Times every frame `repeats` times for each parameter set, after `warmup` untimed passes
/// over the first frame per set. Sets are interleaved frame by frame, in reversed order on
/// every other frame, so drift in machine load and allocator state hits all of them alike.
/// Each sample brackets build_fields and render with three
/// monotonic clock reads, so a sample's total is exactly the sum of its two phases.
inline std::vector<TimingRecord> bench_settings(std::span<const RawFrame> frames,
                                                std::span<const FieldscaleParams> settings,
                                                BenchOptions options = {}) {
    if (frames.empty()) throw ParameterError("benchmark needs at least one frame");
    if (settings.empty()) throw ParameterError("benchmark needs at least one parameter set");
    if (options.repeats < 1) throw ParameterError("repeats must be >= 1");
    if (options.warmup < 0) throw ParameterError("warm-up count must be >= 0");
    for (const auto& params : settings)
        for (const auto& f : frames) validate(params, f.width, f.height);

    using Clock = std::chrono::steady_clock;
    auto ms = [](Clock::duration d) { return std::chrono::duration<double, std::milli>(d).count(); };

    // Field buffers persist across samples, as in a video loop.
    std::vector<FieldPair> fields(settings.size());
    for (int i = 0; i < options.warmup; ++i) {
        for (std::size_t k = 0; k < settings.size(); ++k) {
            build_fields_into(frames.front(), settings[k], fields[k]);
            (void)render(frames.front(), fields[k], settings[k]);
        }
    }

    struct Samples {
        std::vector<double> field, rescale, total;
    };
    std::vector<Samples> samples(settings.size());
    const std::size_t n = frames.size() * static_cast<std::size_t>(options.repeats);
    for (auto& s : samples) {
        s.field.reserve(n);
        s.rescale.reserve(n);
        s.total.reserve(n);
    }
    volatile std::uint8_t sink = 0;
    std::size_t visit = 0;
    for (int r = 0; r < options.repeats; ++r) {
        for (const auto& frame : frames) {
            const bool reversed = visit++ % 2 == 1;
            for (std::size_t j = 0; j < settings.size(); ++j) {
                const std::size_t k = reversed ? settings.size() - 1 - j : j;
                const auto t0 = Clock::now();
                build_fields_into(frame, settings[k], fields[k]);
                const auto t1 = Clock::now();
                const Image8 out = render(frame, fields[k], settings[k]);
                const auto t2 = Clock::now();
                sink = sink ^ out.data.front();
                samples[k].field.push_back(ms(t1 - t0));
                samples[k].rescale.push_back(ms(t2 - t1));
                samples[k].total.push_back(ms(t2 - t0));
            }
        }
    }

    std::vector<TimingRecord> records;
    for (std::size_t k = 0; k < settings.size(); ++k) {
        TimingRecord rec;
        rec.setting = classify(settings[k]);
        rec.fieldConstructionMs = summarize(samples[k].field);
        rec.rescalingMs = summarize(samples[k].rescale);
        rec.totalMs = summarize(samples[k].total);
        rec.fieldConstructionSamples = std::move(samples[k].field);
        rec.samples = n;
        rec.width = frames.front().width;
        rec.height = frames.front().height;
        records.push_back(std::move(rec));
    }
    return records;
}

inline TimingRecord bench_pipeline(std::span<const RawFrame> frames, const FieldscaleParams& params,
                                   BenchOptions options = {}) {
    return bench_settings(frames, std::span<const FieldscaleParams>(&params, 1), options).front();
}

/// Median over samples of a.field - b.field for records timed together by bench_settings.
/// Positive means `b` built its fields faster. Pairing cancels load shared by adjacent runs.
inline double median_field_difference_ms(const TimingRecord& a, const TimingRecord& b) {
    const auto& x = a.fieldConstructionSamples;
    const auto& y = b.fieldConstructionSamples;
    if (x.empty() || x.size() != y.size()) throw ParameterError("records are not paired");
    std::vector<double> d(x.size());
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = x[i] - y[i];
    const std::size_t mid = d.size() / 2;
    std::nth_element(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(mid), d.end());
    if (d.size() % 2 == 1) return d[mid];
    const double upper = d[mid];
    return 0.5 * (*std::max_element(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(mid)) + upper);
}

/// Defaults with one parameter replaced. Grid size v means v x v, with the LES distance
/// following the grid.
inline FieldscaleParams with_axis_value(SweepAxis axis, double value) {
    FieldscaleParams p;
    switch (axis) {
        case SweepAxis::GridSize:
            p.gridRows = p.gridCols = static_cast<int>(value);
            break;
        case SweepAxis::MpIterations:
            p.mpIterations = static_cast<int>(value);
            break;
        case SweepAxis::LesDistance:
            p.lesDistance = static_cast<int>(value);
            break;
        case SweepAxis::LesThreshold:
            p.lesThreshold = value;
            break;
    }
    validate(p);
    return p;
}

inline std::string format_axis_value(SweepAxis axis, double value) {
    if (axis == SweepAxis::LesThreshold) {
        std::string s = std::to_string(value);
        s.erase(s.find_last_not_of('0') + 1);
        if (!s.empty() && s.back() == '.') s.pop_back();
        return s;
    }
    return std::to_string(static_cast<int>(value));
}

inline std::vector<TimingRecord> bench_sweep(std::span<const RawFrame> frames, SweepAxis axis,
                                             std::span<const double> values,
                                             BenchOptions options = {}) {
    if (values.empty()) throw ParameterError("sweep needs at least one value");
    std::vector<FieldscaleParams> settings;
    for (const double v : values) settings.push_back(with_axis_value(axis, v));
    std::vector<TimingRecord> out = bench_settings(frames, settings, options);
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i].axis = to_string(axis);
        out[i].value = format_axis_value(axis, values[i]);
    }
    return out;
}

/// `setting,axis,value,phase,mean_ms,std_ms,samples,width,height`, three phase rows per record.
inline void write_timing_csv(std::ostream& os, std::span<const TimingRecord> records) {
    os << "setting,axis,value,phase,mean_ms,std_ms,samples,width,height\n";
    const auto old = os.precision(6);
    for (const auto& r : records) {
        const std::pair<const char*, const MetricSummary*> phases[] = {
            {"field_construction", &r.fieldConstructionMs},
            {"rescaling", &r.rescalingMs},
            {"total", &r.totalMs}};
        for (const auto& [phase, stats] : phases) {
            os << to_string(r.setting) << ',' << r.axis << ',' << r.value << ',' << phase << ','
               << stats->mean << ',' << stats->stdDev << ',' << r.samples << ',' << r.width << ','
               << r.height << '\n';
        }
    }
    os.precision(old);
}

}  // namespace thermofield
