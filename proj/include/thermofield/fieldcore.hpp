#pragma once

// Min/max scalar field construction: grid pooling, local extrema suppression,
// min/max message passing and bilinear upsampling back to frame resolution.

#include <algorithm>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "thermofield/image.hpp"
#include "thermofield/params.hpp"

namespace thermofield {

/// First pixel index of patch `cell` when `extent` pixels are split into `cells` patches.
/// Patch k covers [floor(k*extent/cells), floor((k+1)*extent/cells)).
inline int patch_start(int cell, int cells, int extent) {
    return static_cast<int>(static_cast<std::int64_t>(cell) * extent / cells);
}

/// Sample position of a patch in pixel coordinates (its center pixel, possibly half-integer).
inline double patch_center(int cell, int cells, int extent) {
    const int begin = patch_start(cell, cells, extent);
    const int end = patch_start(cell + 1, cells, extent);
    return 0.5 * static_cast<double>(begin + end - 1);
}

/// Index of the patch containing pixel coordinate `pixel`.
inline int patch_of(int pixel, int cells, int extent) {
    // Smallest k with patch_start(k+1) > pixel.
    int k = static_cast<int>(static_cast<std::int64_t>(pixel) * cells / extent);
    while (k > 0 && patch_start(k, cells, extent) > pixel) --k;
    while (k + 1 < cells && patch_start(k + 1, cells, extent) <= pixel) ++k;
    return k;
}

inline std::pair<MinMaxGrid, MinMaxGrid> pool_minmax(const RawFrame& frame, int gridRows,
                                                     int gridCols) {
    if (gridRows < 1 || gridCols < 1 || gridRows > frame.height || gridCols > frame.width) {
        throw ParameterError("grid " + std::to_string(gridRows) + "x" + std::to_string(gridCols) +
                             " does not fit frame " + std::to_string(frame.width) + "x" +
                             std::to_string(frame.height));
    }
    std::vector<std::uint16_t> lo(static_cast<std::size_t>(gridRows) * gridCols, UINT16_MAX);
    std::vector<std::uint16_t> hi(lo.size(), 0);

    std::vector<int> colBegin(gridCols + 1);
    for (int c = 0; c <= gridCols; ++c) colBegin[c] = patch_start(c, gridCols, frame.width);

    for (int r = 0; r < gridRows; ++r) {
        const int y0 = patch_start(r, gridRows, frame.height);
        const int y1 = patch_start(r + 1, gridRows, frame.height);
        for (int y = y0; y < y1; ++y) {
            const std::uint16_t* px = frame.row(y);
            for (int c = 0; c < gridCols; ++c) {
                const std::size_t i = static_cast<std::size_t>(r) * gridCols + c;
                std::uint16_t mn = lo[i], mx = hi[i];
                for (int x = colBegin[c]; x < colBegin[c + 1]; ++x) {
                    mn = std::min(mn, px[x]);
                    mx = std::max(mx, px[x]);
                }
                lo[i] = mn;
                hi[i] = mx;
            }
        }
    }
    return {MinMaxGrid(gridRows, gridCols, FieldRole::Min, std::vector<double>(lo.begin(), lo.end())),
            MinMaxGrid(gridRows, gridCols, FieldRole::Max, std::vector<double>(hi.begin(), hi.end()))};
}

/// Mean over in-bounds cells within Chebyshev distance d of (r, c), the cell itself excluded.
/// A 1x1 grid has no neighbours; the cell's own value is returned so LES and MP leave it as is.
inline double neighborhood_average(const MinMaxGrid& grid, int r, int c, int d) {
    if (r < 0 || r >= grid.rows || c < 0 || c >= grid.cols) {
        throw ParameterError("cell outside grid");
    }
    if (d < 1) throw ParameterError("neighbourhood distance must be >= 1");
    const int r0 = std::max(0, r - d), r1 = std::min(grid.rows - 1, r + d);
    const int c0 = std::max(0, c - d), c1 = std::min(grid.cols - 1, c + d);
    double sum = 0.0, lo = 0.0, hi = 0.0;
    int count = 0;
    for (int rr = r0; rr <= r1; ++rr) {
        for (int cc = c0; cc <= c1; ++cc) {
            if (rr == r && cc == c) continue;
            const double v = grid.at(rr, cc);
            lo = count == 0 ? v : std::min(lo, v);
            hi = count == 0 ? v : std::max(hi, v);
            sum += v;
            ++count;
        }
    }
    if (count == 0) return grid.at(r, c);
    // Summation round-off can push the mean of equal values off by an ulp.
    return std::clamp(sum / count, lo, hi);
}

/// Local extrema suppression. Every cell is clamped into [A - T, A + T] where A is its
/// neighbourhood average on the input grid (all cells updated simultaneously).
inline MinMaxGrid les(const MinMaxGrid& grid, double threshold, int d) {
    if (!(threshold >= 0.0)) throw ParameterError("LES threshold must be >= 0");
    if (d < 1) throw ParameterError("LES distance must be >= 1");
    MinMaxGrid out = grid;
    for (int r = 0; r < grid.rows; ++r) {
        for (int c = 0; c < grid.cols; ++c) {
            const double a = neighborhood_average(grid, r, c, d);
            const double v = grid.at(r, c);
            if (v < a - threshold) {
                out.at(r, c) = a - threshold;
            } else if (v > a + threshold) {
                out.at(r, c) = a + threshold;
            }
        }
    }
    return out;
}

/// One synchronous message-passing round: aggregate the 8-neighbour mean, then
/// keep min(v, agg) on the min grid and max(v, agg) on the max grid.
inline MinMaxGrid mp_step(const MinMaxGrid& grid) {
    MinMaxGrid out = grid;
    for (int r = 0; r < grid.rows; ++r) {
        for (int c = 0; c < grid.cols; ++c) {
            const double agg = neighborhood_average(grid, r, c, 1);
            const double v = grid.at(r, c);
            out.at(r, c) = grid.role == FieldRole::Min ? std::min(v, agg) : std::max(v, agg);
        }
    }
    return out;
}

inline MinMaxGrid mp(MinMaxGrid grid, int iterations) {
    if (iterations < 0) throw ParameterError("MP iterations must be >= 0");
    for (int t = 0; t < iterations; ++t) grid = mp_step(grid);
    return grid;
}

namespace detail {

struct AxisTap {
    int lo = 0;
    int hi = 0;
    double weight = 0.0;  // share of `hi`
};

/// Bracketing samples for a continuous pixel coordinate, clamped to the outermost centers.
inline AxisTap axis_tap(double pos, int cells, int extent) {
    if (cells == 1 || pos <= patch_center(0, cells, extent)) return {0, 0, 0.0};
    if (pos >= patch_center(cells - 1, cells, extent)) return {cells - 1, cells - 1, 0.0};
    int k = std::clamp(static_cast<int>(pos * cells / extent), 0, cells - 2);
    while (k > 0 && patch_center(k, cells, extent) > pos) --k;
    while (k + 2 < cells && patch_center(k + 1, cells, extent) <= pos) ++k;
    const double a = patch_center(k, cells, extent);
    const double b = patch_center(k + 1, cells, extent);
    return {k, k + 1, (pos - a) / (b - a)};
}

inline double lerp_exact(double a, double b, double w) { return a + w * (b - a); }

}  // namespace detail

/// Interpolated grid value at a continuous pixel position (x, y) of a width x height frame.
inline double sample_bilinear(const MinMaxGrid& grid, int width, int height, double x, double y) {
    const detail::AxisTap ty = detail::axis_tap(y, grid.rows, height);
    const detail::AxisTap tx = detail::axis_tap(x, grid.cols, width);
    const double top = detail::lerp_exact(grid.at(ty.lo, tx.lo), grid.at(ty.lo, tx.hi), tx.weight);
    const double bottom =
        detail::lerp_exact(grid.at(ty.hi, tx.lo), grid.at(ty.hi, tx.hi), tx.weight);
    return detail::lerp_exact(top, bottom, ty.weight);
}

namespace detail {

/// Grid rows interpolated along x at every pixel column: rows x width values.
inline std::vector<double> interpolate_rows(const MinMaxGrid& grid, int width) {
    std::vector<double> out(static_cast<std::size_t>(grid.rows) * width);
    for (int x = 0; x < width; ++x) {
        const AxisTap tx = axis_tap(x, grid.cols, width);
        for (int r = 0; r < grid.rows; ++r) {
            out[static_cast<std::size_t>(r) * width + x] = lerp_exact(grid.at(r, tx.lo), grid.at(r, tx.hi), tx.weight);
        }
    }
    return out;
}

inline void reshape(ScalarField& field, int width, int height, FieldRole role) {
    field.role = role;
    field.image.width = width;
    field.image.height = height;
    field.image.data.resize(static_cast<std::size_t>(width) * height);
}

}  // namespace detail

/// Upsamples a grid into `field`, reusing its buffer when the size already matches.
/// Samples sit at patch centers; pixels beyond the outermost centers replicate the edge.
inline void upsample_bilinear_into(const MinMaxGrid& grid, int width, int height, ScalarField& field) {
    if (width < grid.cols || height < grid.rows) {
        throw ParameterError("upsample target smaller than grid");
    }
    // Horizontal pass once per grid row, then one vertical lerp per pixel.
    const std::vector<double> along = detail::interpolate_rows(grid, width);
    detail::reshape(field, width, height, grid.role);
    for (int y = 0; y < height; ++y) {
        const detail::AxisTap ty = detail::axis_tap(y, grid.rows, height);
        const double* top = along.data() + static_cast<std::size_t>(ty.lo) * width;
        const double* bottom = along.data() + static_cast<std::size_t>(ty.hi) * width;
        const double w = ty.weight;
        double* out = field.image.row(y);
        for (int x = 0; x < width; ++x) out[x] = detail::lerp_exact(top[x], bottom[x], w);
    }
}

inline ScalarField upsample_bilinear(const MinMaxGrid& grid, int width, int height) {
    ScalarField field;
    upsample_bilinear_into(grid, width, height, field);
    return field;
}

/// phi_max := max(phi_max, phi_min + 1) so the rescale denominator stays positive.
inline void enforce_separation(const ScalarField& phiMin, ScalarField& phiMax) {
    if (!same_dims(phiMin.image, phiMax.image)) throw ParameterError("field dimensions differ");
    auto& hi = phiMax.data();
    const auto& lo = phiMin.data();
    for (std::size_t i = 0; i < hi.size(); ++i) hi[i] = std::max(hi[i], lo[i] + 1.0);
}

/// Pooled, suppressed and message-passed grids before upsampling.
inline std::pair<MinMaxGrid, MinMaxGrid> build_grids(const RawFrame& frame,
                                                     const FieldscaleParams& params) {
    validate(params, frame.width, frame.height);
    auto [lo, hi] = pool_minmax(frame, params.gridRows, params.gridCols);
    const int d = params.effective_les_distance();
    if (params.applyLesTo == LesTarget::Both) lo = les(lo, params.lesThreshold, d);
    if (params.applyLesTo != LesTarget::Neither) hi = les(hi, params.lesThreshold, d);
    return {mp(std::move(lo), params.mpIterations), mp(std::move(hi), params.mpIterations)};
}

/// Builds both fields into `fields`, reusing its buffers. Video loops that keep one
/// FieldPair alive avoid reallocating two full-resolution planes per frame.
inline void build_fields_into(const RawFrame& frame, const FieldscaleParams& params, FieldPair& fields) {
    const auto [lo, hi] = build_grids(frame, params);
    const int width = frame.width, height = frame.height;
    const std::vector<double> loAlong = detail::interpolate_rows(lo, width);
    const std::vector<double> hiAlong = detail::interpolate_rows(hi, width);
    detail::reshape(fields.min, width, height, FieldRole::Min);
    detail::reshape(fields.max, width, height, FieldRole::Max);
    // Same arithmetic as upsample_bilinear + enforce_separation, fused into one pass.
    for (int y = 0; y < height; ++y) {
        const detail::AxisTap ty = detail::axis_tap(y, lo.rows, height);
        const double* loTop = loAlong.data() + static_cast<std::size_t>(ty.lo) * width;
        const double* loBottom = loAlong.data() + static_cast<std::size_t>(ty.hi) * width;
        const double* hiTop = hiAlong.data() + static_cast<std::size_t>(ty.lo) * width;
        const double* hiBottom = hiAlong.data() + static_cast<std::size_t>(ty.hi) * width;
        const double w = ty.weight;
        double* outLo = fields.min.image.row(y);
        double* outHi = fields.max.image.row(y);
        for (int x = 0; x < width; ++x) {
            const double a = detail::lerp_exact(loTop[x], loBottom[x], w);
            const double b = detail::lerp_exact(hiTop[x], hiBottom[x], w);
            outLo[x] = a;
            outHi[x] = std::max(b, a + 1.0);
        }
    }
}

inline FieldPair build_fields(const RawFrame& frame, const FieldscaleParams& params) {
    FieldPair fields;
    build_fields_into(frame, params, fields);
    return fields;
}

}  // namespace thermofield
