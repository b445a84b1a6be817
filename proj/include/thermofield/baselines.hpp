#pragma once

// Classical global rescaling methods used for comparison: min/max and percentile
// clipping, 30-bin histogram equalization with CLAHE, multi-scale Retinex, and a
// simplified multiscale conditional-Gaussian variant.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <vector>

#include "thermofield/image.hpp"
#include "thermofield/rescaler.hpp"

namespace thermofield {

/// Linear rescale endpoints.
struct ClipBounds {
    double lo = 0.0;
    double hi = 1.0;

    /// hi := lo + 1 when the bounds collapse, so constant input maps to 0.
    [[nodiscard]] ClipBounds non_degenerate() const {
        return hi > lo ? *this : ClipBounds{lo, lo + 1.0};
    }
};

inline Image8 rescale_linear(const RawFrame& frame, ClipBounds bounds) {
    bounds = bounds.non_degenerate();
    Image8 out(frame.width, frame.height);
    for (std::size_t i = 0; i < frame.data.size(); ++i) {
        out.data[i] = rescale_pixel(frame.data[i], bounds.lo, bounds.hi);
    }
    return out;
}

inline ClipBounds global_bounds(const RawFrame& frame) {
    const auto [mn, mx] = std::minmax_element(frame.data.begin(), frame.data.end());
    return {static_cast<double>(*mn), static_cast<double>(*mx)};
}

inline Image8 minmax_rescale(const RawFrame& frame) {
    return rescale_linear(frame, global_bounds(frame));
}

/// Nearest-rank percentile: the ceil(pct/100 * n)-th smallest value (rank clamped to [1, n]).
inline std::uint16_t percentile_nearest_rank(const RawFrame& frame, double pct) {
    if (!(pct >= 0.0 && pct <= 100.0)) throw ParameterError("percentile must lie in [0, 100]");
    const auto n = static_cast<long long>(frame.data.size());
    long long rank = static_cast<long long>(std::ceil(pct * static_cast<double>(n) / 100.0 - 1e-9));
    rank = std::clamp(rank, 1LL, n);

    std::vector<long long> hist(65536, 0);
    for (const std::uint16_t v : frame.data) ++hist[v];
    long long seen = 0;
    for (int v = 0; v < 65536; ++v) {
        seen += hist[v];
        if (seen >= rank) return static_cast<std::uint16_t>(v);
    }
    return UINT16_MAX;
}

inline ClipBounds percentile_bounds(const RawFrame& frame, double loPct, double hiPct) {
    if (!(loPct >= 0.0 && loPct < hiPct && hiPct <= 100.0)) {
        throw ParameterError("percentiles must satisfy 0 <= lo < hi <= 100");
    }
    return {static_cast<double>(percentile_nearest_rank(frame, loPct)),
            static_cast<double>(percentile_nearest_rank(frame, hiPct))};
}

inline Image8 clip_percentile_rescale(const RawFrame& frame, double loPct = 1.0,
                                      double hiPct = 99.0) {
    return rescale_linear(frame, percentile_bounds(frame, loPct, hiPct));
}

/// Per-frame percentile bounds averaged over the whole sequence.
inline ClipBounds video_bounds(std::span<const RawFrame> frames, double loPct, double hiPct) {
    if (frames.empty()) throw ParameterError("clip-video needs at least one frame");
    ClipBounds sum{0.0, 0.0};
    for (const auto& f : frames) {
        const ClipBounds b = percentile_bounds(f, loPct, hiPct);
        sum.lo += b.lo;
        sum.hi += b.hi;
    }
    const auto n = static_cast<double>(frames.size());
    return {sum.lo / n, sum.hi / n};
}

inline std::vector<Image8> clip_video_rescale(std::span<const RawFrame> frames, double loPct = 1.0,
                                              double hiPct = 99.0) {
    const ClipBounds shared = video_bounds(frames, loPct, hiPct);
    std::vector<Image8> out;
    out.reserve(frames.size());
    for (const auto& f : frames) out.push_back(rescale_linear(f, shared));
    return out;
}

/// Histogram equalization with `bins` uniform bins over the occupied [min, max] range.
/// Each pixel maps to round(255 * CDF(bin)).
inline Image8 binned_histogram_equalize(const RawFrame& frame, int bins = 30) {
    if (bins < 1) throw ParameterError("bin count must be >= 1");
    const auto [mnIt, mxIt] = std::minmax_element(frame.data.begin(), frame.data.end());
    const long long mn = *mnIt;
    const long long span = static_cast<long long>(*mxIt) - mn;
    auto bin_of = [&](std::uint16_t v) -> int {
        if (span == 0) return 0;
        return static_cast<int>(std::min<long long>(bins - 1, (v - mn) * bins / span));
    };

    std::vector<long long> hist(bins, 0);
    for (const std::uint16_t v : frame.data) ++hist[bin_of(v)];
    std::vector<std::uint8_t> lut(bins);
    long long cdf = 0;
    const auto n = static_cast<double>(frame.data.size());
    for (int b = 0; b < bins; ++b) {
        cdf += hist[b];
        lut[b] = clamp_convert(255.0 * static_cast<double>(cdf) / n);
    }

    Image8 out(frame.width, frame.height);
    for (std::size_t i = 0; i < frame.data.size(); ++i) out.data[i] = lut[bin_of(frame.data[i])];
    return out;
}

inline Image8 he30_clahe(const RawFrame& frame) {
    const FieldscaleParams defaults;
    const Image8 equalized = binned_histogram_equalize(frame, 30);
    return clahe(equalized, defaults.claheClipLimit, std::min(defaults.claheTilesRows, frame.height),
                 std::min(defaults.claheTilesCols, frame.width));
}

/// Normalized Gaussian taps for offsets -radius..radius, radius = ceil(3 sigma).
inline std::vector<double> gaussian_kernel(double sigma) {
    if (!(sigma > 0.0) || !std::isfinite(sigma)) throw ParameterError("sigma must be > 0");
    const int radius = static_cast<int>(std::ceil(3.0 * sigma));
    std::vector<double> k(2 * radius + 1);
    for (int i = -radius; i <= radius; ++i) {
        k[i + radius] = std::exp(-0.5 * (i * i) / (sigma * sigma));
    }
    const double total = std::accumulate(k.begin(), k.end(), 0.0);
    for (auto& w : k) w /= total;
    return k;
}

/// Separable Gaussian blur with edge replication.
inline Image<double> gaussian_blur(const Image<double>& src, double sigma) {
    const std::vector<double> kernel = gaussian_kernel(sigma);
    const int radius = static_cast<int>(kernel.size() / 2);
    const int w = src.width, h = src.height;

    Image<double> tmp(w, h);
    std::vector<double> line(static_cast<std::size_t>(std::max(w, h)) + 2 * radius);
    for (int y = 0; y < h; ++y) {
        const double* in = src.row(y);
        for (int i = 0; i < w + 2 * radius; ++i) line[i] = in[std::clamp(i - radius, 0, w - 1)];
        double* out = tmp.row(y);
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            const double* p = line.data() + x;
            for (std::size_t k = 0; k < kernel.size(); ++k) acc += kernel[k] * p[k];
            out[x] = acc;
        }
    }

    Image<double> dst(w, h);
    for (int x = 0; x < w; ++x) {
        for (int i = 0; i < h + 2 * radius; ++i) line[i] = tmp.at(x, std::clamp(i - radius, 0, h - 1));
        for (int y = 0; y < h; ++y) {
            double acc = 0.0;
            const double* p = line.data() + y;
            for (std::size_t k = 0; k < kernel.size(); ++k) acc += kernel[k] * p[k];
            dst.at(x, y) = acc;
        }
    }
    return dst;
}

/// Spans below this are treated as flat; blur round-off must not be stretched to full range.
inline constexpr double kFlatSpan = 1e-9;

/// Min/max linear stretch of a real-valued image to 8 bits.
inline Image8 stretch_to_8bit(const Image<double>& img) {
    const auto [mn, mx] = std::minmax_element(img.data.begin(), img.data.end());
    const double lo = *mn;
    const double hi = (*mx - lo) > kFlatSpan ? *mx : lo + 1.0;
    Image8 out(img.width, img.height);
    for (std::size_t i = 0; i < img.data.size(); ++i) out.data[i] = rescale_pixel(img.data[i], lo, hi);
    return out;
}

namespace detail {

inline void check_sigmas(std::span<const double> sigmas) {
    if (sigmas.empty()) throw ParameterError("at least one sigma is required");
    for (const double s : sigmas) {
        if (!(s > 0.0) || !std::isfinite(s)) throw ParameterError("sigmas must be > 0");
    }
}

inline Image<double> to_double(const RawFrame& frame) {
    return Image<double>(frame.width, frame.height,
                         std::vector<double>(frame.data.begin(), frame.data.end()));
}

}  // namespace detail

inline constexpr std::array<double, 3> kRetinexSigmas{15.0, 80.0, 250.0};

/// Multi-scale Retinex response (1/K) sum_k [log(I+1) - log(G_k * I + 1)].
inline Image<double> msr_response(const RawFrame& frame, std::span<const double> sigmas) {
    detail::check_sigmas(sigmas);
    const Image<double> intensity = detail::to_double(frame);
    Image<double> response(frame.width, frame.height, 0.0);
    for (const double sigma : sigmas) {
        const Image<double> blurred = gaussian_blur(intensity, sigma);
        for (std::size_t i = 0; i < response.data.size(); ++i) {
            response.data[i] += std::log(intensity.data[i] + 1.0) - std::log(blurred.data[i] + 1.0);
        }
    }
    for (auto& v : response.data) v /= static_cast<double>(sigmas.size());
    return response;
}

inline Image8 msr_rescale(const RawFrame& frame, std::span<const double> sigmas = kRetinexSigmas) {
    return stretch_to_8bit(msr_response(frame, sigmas));
}

/// Simplified multiscale conditional-Gaussian filtering: the log image minus the mean of its
/// Gaussian-blurred copies, clipped at mean +/- 3 std. The conditional kernel weighting of the
/// original method is not reproduced.
inline Image<double> cgf_response(const RawFrame& frame, std::span<const double> sigmas) {
    detail::check_sigmas(sigmas);
    Image<double> logImage = detail::to_double(frame);
    for (auto& v : logImage.data) v = std::log(v + 1.0);

    Image<double> background(frame.width, frame.height, 0.0);
    for (const double sigma : sigmas) {
        const Image<double> blurred = gaussian_blur(logImage, sigma);
        for (std::size_t i = 0; i < background.data.size(); ++i) background.data[i] += blurred.data[i];
    }
    Image<double> detail = logImage;
    const auto k = static_cast<double>(sigmas.size());
    for (std::size_t i = 0; i < detail.data.size(); ++i) detail.data[i] -= background.data[i] / k;

    const auto n = static_cast<double>(detail.data.size());
    const double mean = std::accumulate(detail.data.begin(), detail.data.end(), 0.0) / n;
    double var = 0.0;
    for (const double v : detail.data) var += (v - mean) * (v - mean);
    const double sd = std::sqrt(var / n);
    for (auto& v : detail.data) v = std::clamp(v, mean - 3.0 * sd, mean + 3.0 * sd);
    return detail;
}

inline Image8 cgf_rescale(const RawFrame& frame, std::span<const double> sigmas = kRetinexSigmas) {
    return stretch_to_8bit(cgf_response(frame, sigmas));
}

}  // namespace thermofield
