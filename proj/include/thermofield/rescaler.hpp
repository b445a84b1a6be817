#pragma once

// Field-based rescaling to 8 bits, post-rescale enhancement (gamma, CLAHE) and
// temporal smoothing of fields across video frames.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <future>
#include <optional>
#include <string>
#include <vector>

#include "thermofield/fieldcore.hpp"
#include "thermofield/image.hpp"
#include "thermofield/params.hpp"

namespace thermofield {

/// Clamp-and-convert: round half away from zero, clamp to [0, 255].
inline std::uint8_t clamp_convert(double value) {
    const double r = std::round(value);
    if (!(r > 0.0)) return 0;
    if (r >= 255.0) return 255;
    return static_cast<std::uint8_t>(r);
}

/// 255 * (I - lo) / (hi - lo), clamp-and-converted. Shared by the field-based path and
/// the global linear baselines so both quantize identically.
inline std::uint8_t rescale_pixel(double intensity, double lo, double hi) {
    return clamp_convert(255.0 * (intensity - lo) / (hi - lo));
}

inline Image8 rescale_with_fields(const RawFrame& frame, const ScalarField& phiMin,
                                  const ScalarField& phiMax) {
    if (!same_dims(frame, phiMin.image) || !same_dims(frame, phiMax.image)) {
        throw ParameterError("field dimensions do not match frame");
    }
    Image8 out(frame.width, frame.height);
    const auto& lo = phiMin.data();
    const auto& hi = phiMax.data();
    for (std::size_t i = 0; i < frame.data.size(); ++i) {
        if (!(hi[i] > lo[i])) {
            throw InvariantError("non-positive field separation at pixel " + std::to_string(i));
        }
        out.data[i] = rescale_pixel(frame.data[i], lo[i], hi[i]);
    }
    return out;
}

using GammaTable = std::array<std::uint8_t, 256>;

inline GammaTable gamma_table(double gamma,
                              GammaConvention convention = GammaConvention::InverseExponent) {
    if (!(gamma > 0.0) || !std::isfinite(gamma)) throw ParameterError("gamma must be > 0");
    const double exponent = convention == GammaConvention::InverseExponent ? 1.0 / gamma : gamma;
    GammaTable table{};
    for (int v = 0; v < 256; ++v) {
        table[v] = clamp_convert(255.0 * std::pow(v / 255.0, exponent));
    }
    return table;
}

inline Image8 gamma_correct(const Image8& img, double gamma,
                            GammaConvention convention = GammaConvention::InverseExponent) {
    const GammaTable table = gamma_table(gamma, convention);
    Image8 out = img;
    for (auto& v : out.data) v = table[v];
    return out;
}

/// Contrast-limited adaptive histogram equalization.
///
/// The image is split into tilesR x tilesC equal tiles (reflect-101 padded when the
/// dimensions are not divisible). Each tile gets a 256-bin histogram clipped at
/// clipLimit * tilePixels / 256, with the excess spread uniformly, and its CDF becomes the
/// tile mapping. A pixel blends the mappings of the four nearest tile centers bilinearly;
/// tiles on the border replicate outward.
inline Image8 clahe(const Image8& img, double clipLimit, int tilesR, int tilesC) {
    if (tilesR < 1 || tilesC < 1) throw ParameterError("CLAHE tile counts must be >= 1");
    if (tilesR > img.height || tilesC > img.width) {
        throw ParameterError("CLAHE tile grid exceeds image dimensions");
    }
    if (!(clipLimit >= 1.0)) throw ParameterError("CLAHE clip limit must be >= 1");

    const int paddedW = (img.width + tilesC - 1) / tilesC * tilesC;
    const int paddedH = (img.height + tilesR - 1) / tilesR * tilesR;
    const int tileW = paddedW / tilesC;
    const int tileH = paddedH / tilesR;
    const long tileArea = static_cast<long>(tileW) * tileH;

    auto reflect = [](int i, int n) { return i < n ? i : 2 * (n - 1) - i; };

    const long clip = std::max(1L, static_cast<long>(clipLimit * static_cast<double>(tileArea) / 256.0));
    const double lutScale = 255.0 / static_cast<double>(tileArea);
    std::vector<std::array<std::uint8_t, 256>> luts(static_cast<std::size_t>(tilesR) * tilesC);

    for (int ty = 0; ty < tilesR; ++ty) {
        for (int tx = 0; tx < tilesC; ++tx) {
            std::array<long, 256> hist{};
            for (int y = ty * tileH; y < (ty + 1) * tileH; ++y) {
                const std::uint8_t* row = img.row(reflect(y, img.height));
                for (int x = tx * tileW; x < (tx + 1) * tileW; ++x) ++hist[row[reflect(x, img.width)]];
            }

            long excess = 0;
            for (auto& h : hist) {
                if (h > clip) {
                    excess += h - clip;
                    h = clip;
                }
            }
            const long batch = excess / 256;
            long residual = excess - batch * 256;
            for (auto& h : hist) h += batch;
            if (residual > 0) {
                const long step = std::max(256L / residual, 1L);
                for (long i = 0; i < 256 && residual > 0; i += step, --residual) ++hist[i];
            }

            auto& lut = luts[static_cast<std::size_t>(ty) * tilesC + tx];
            long cdf = 0;
            for (int i = 0; i < 256; ++i) {
                cdf += hist[i];
                lut[i] = clamp_convert(static_cast<double>(cdf) * lutScale);
            }
        }
    }

    struct Tap {
        int lo, hi;
        double w;
    };
    auto tap = [](int p, int tileSize, int tiles) {
        const double f = static_cast<double>(p) / tileSize - 0.5;
        const int t1 = static_cast<int>(std::floor(f));
        const double w = f - t1;
        return Tap{std::max(t1, 0), std::min(t1 + 1, tiles - 1), w};
    };
    std::vector<Tap> xs(img.width);
    for (int x = 0; x < img.width; ++x) xs[x] = tap(x, tileW, tilesC);

    Image8 out(img.width, img.height);
    for (int y = 0; y < img.height; ++y) {
        const Tap ty = tap(y, tileH, tilesR);
        const auto* top = &luts[static_cast<std::size_t>(ty.lo) * tilesC];
        const auto* bottom = &luts[static_cast<std::size_t>(ty.hi) * tilesC];
        const std::uint8_t* src = img.row(y);
        std::uint8_t* dst = out.row(y);
        for (int x = 0; x < img.width; ++x) {
            const Tap& tx = xs[x];
            const std::uint8_t v = src[x];
            const double upper = top[tx.lo][v] * (1.0 - tx.w) + top[tx.hi][v] * tx.w;
            const double lower = bottom[tx.lo][v] * (1.0 - tx.w) + bottom[tx.hi][v] * tx.w;
            dst[x] = clamp_convert(upper * (1.0 - ty.w) + lower * ty.w);
        }
    }
    return out;
}

/// Gamma then CLAHE, as configured. CLAHE tile counts are capped at the image size.
inline Image8 enhance(const Image8& img, const FieldscaleParams& params) {
    if (!params.enhanceEnabled) return img;
    Image8 out = gamma_correct(img, params.gamma, params.gammaConvention);
    return clahe(out, params.claheClipLimit, std::min(params.claheTilesRows, img.height),
                 std::min(params.claheTilesCols, img.width));
}

/// Fields carried over from the previous frame of one stream.
struct TemporalState {
    std::optional<FieldPair> previous;
    double alpha = 0.0;
};

/// out = alpha * previous + (1 - alpha) * current, with separation re-enforced.
inline FieldPair smooth_fields(const FieldPair& current, const TemporalState& state) {
    if (!(state.alpha >= 0.0 && state.alpha <= 1.0)) {
        throw ParameterError("smoothing alpha must lie in [0, 1]");
    }
    if (!state.previous) return current;
    const FieldPair& prev = *state.previous;
    if (!same_dims(prev.min.image, current.min.image) ||
        !same_dims(prev.max.image, current.max.image)) {
        throw ParameterError("previous fields do not match current frame dimensions");
    }
    const double a = state.alpha;
    auto blend = [a](const ScalarField& p, const ScalarField& c) {
        ScalarField out = c;
        for (std::size_t i = 0; i < out.data().size(); ++i) {
            out.data()[i] = a * p.data()[i] + (1.0 - a) * c.data()[i];
        }
        return out;
    };
    FieldPair out{blend(prev.min, current.min), blend(prev.max, current.max)};
    enforce_separation(out.min, out.max);
    return out;
}

/// Optional RAW-domain enhancement run concurrently with field construction. Its output
/// (same dimensions as the input) is what gets rescaled with the fields.
struct PipelineHooks {
    std::function<RawFrame(const RawFrame&)> rawEnhancement;
};

struct FieldscaleResult {
    Image8 image;
    FieldPair fields;
    TemporalState state;
};

/// Field-based rescale followed by enhancement.
inline Image8 render(const RawFrame& frame, const FieldPair& fields, const FieldscaleParams& params) {
    return enhance(rescale_with_fields(frame, fields.min, fields.max), params);
}

inline FieldscaleResult fieldscale(const RawFrame& frame, const FieldscaleParams& params,
                                   const std::optional<TemporalState>& state = std::nullopt,
                                   const PipelineHooks& hooks = {}) {
    validate(params, frame.width, frame.height);

    std::future<RawFrame> enhanced;
    if (hooks.rawEnhancement) {
        enhanced = std::async(std::launch::async, hooks.rawEnhancement, std::cref(frame));
    }

    FieldPair fields = build_fields(frame, params);
    TemporalState next;
    if (state) {
        fields = smooth_fields(fields, *state);
        next.alpha = state->alpha;
    }
    next.previous = fields;

    Image8 image;
    if (enhanced.valid()) {
        const RawFrame source = enhanced.get();
        if (!same_dims(source, frame)) {
            throw ParameterError("RAW enhancement hook changed frame dimensions");
        }
        image = render(source, fields, params);
    } else {
        image = render(frame, fields, params);
    }
    return {std::move(image), std::move(fields), std::move(next)};
}

}  // namespace thermofield
