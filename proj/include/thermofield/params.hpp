#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>

#include "thermofield/image.hpp"

namespace thermofield {

/// Which grids receive local extrema suppression.
enum class LesTarget { MaxOnly, Both, Neither };

/// out = 255 * (in/255)^(1/gamma) brightens; out = 255 * (in/255)^gamma darkens.
enum class GammaConvention { InverseExponent, DirectExponent };

struct FieldscaleParams {
    int gridRows = 8;
    int gridCols = 8;
    double lesThreshold = 100.0;
    /// Chebyshev radius of the LES neighbourhood. Unset means max(1, round(gridRows / 4)),
    /// which is 2 for the default 8x8 grid.
    std::optional<int> lesDistance;
    int mpIterations = 7;
    LesTarget applyLesTo = LesTarget::MaxOnly;

    double gamma = 1.5;
    GammaConvention gammaConvention = GammaConvention::InverseExponent;
    bool enhanceEnabled = true;
    double claheClipLimit = 2.0;
    int claheTilesRows = 8;
    int claheTilesCols = 8;

    [[nodiscard]] int effective_les_distance() const {
        if (lesDistance) return *lesDistance;
        return std::max(1, static_cast<int>(std::lround(static_cast<double>(gridRows) / 4.0)));
    }

    /// N=7, T_LES=100.
    static FieldscaleParams defaults() { return {}; }

    /// N=1, T_LES=800.
    static FieldscaleParams fast() {
        FieldscaleParams p;
        p.mpIterations = 1;
        p.lesThreshold = 800.0;
        return p;
    }

    bool operator==(const FieldscaleParams&) const = default;
};

/// Checks frame-independent ranges.
inline void validate(const FieldscaleParams& p) {
    if (p.gridRows < 1 || p.gridCols < 1) {
        throw ParameterError("grid dimensions must be at least 1x1");
    }
    if (!(p.lesThreshold >= 0.0) || !std::isfinite(p.lesThreshold)) {
        throw ParameterError("LES threshold must be finite and >= 0");
    }
    if (p.effective_les_distance() < 1) throw ParameterError("LES distance must be >= 1");
    if (p.mpIterations < 0) throw ParameterError("MP iterations must be >= 0");
    if (!(p.gamma > 0.0) || !std::isfinite(p.gamma)) throw ParameterError("gamma must be > 0");
    if (!(p.claheClipLimit >= 1.0)) throw ParameterError("CLAHE clip limit must be >= 1");
    if (p.claheTilesRows < 1 || p.claheTilesCols < 1) {
        throw ParameterError("CLAHE tile counts must be >= 1");
    }
}

inline void validate(const FieldscaleParams& p, int width, int height) {
    validate(p);
    if (p.gridRows > height || p.gridCols > width) {
        throw ParameterError("grid " + std::to_string(p.gridRows) + "x" +
                             std::to_string(p.gridCols) + " exceeds frame " +
                             std::to_string(width) + "x" + std::to_string(height));
    }
}

}  // namespace thermofield
