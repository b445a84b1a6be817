#pragma once

// No-reference image quality metrics: mean gradient magnitude and normalized entropy.

#include <array>
#include <cmath>
#include <ostream>
#include <string>
#include <vector>

#include "thermofield/image.hpp"

namespace thermofield {

/// Mean over interior pixels of sqrt(gx^2 + gy^2) / 255 with central differences
/// gx = (I(x+1,y) - I(x-1,y)) / 2. Border pixels are excluded.
inline double mean_gradient(const Image8& img) {
    if (img.width < 2 || img.height < 2) {
        throw ParameterError("mean gradient needs an image of at least 2x2");
    }
    if (img.width < 3 || img.height < 3) return 0.0;  // no interior pixels
    double sum = 0.0;
    for (int y = 1; y + 1 < img.height; ++y) {
        for (int x = 1; x + 1 < img.width; ++x) {
            const double gx = 0.5 * (static_cast<double>(img.at(x + 1, y)) - img.at(x - 1, y));
            const double gy = 0.5 * (static_cast<double>(img.at(x, y + 1)) - img.at(x, y - 1));
            sum += std::sqrt(gx * gx + gy * gy) / 255.0;
        }
    }
    return sum / (static_cast<double>(img.width - 2) * (img.height - 2));
}

/// Shannon entropy of the 256-bin histogram in bits, divided by 8.
inline double entropy(const Image8& img) {
    std::array<std::size_t, 256> hist{};
    for (const auto v : img.data) ++hist[v];
    const auto n = static_cast<double>(img.data.size());
    double bits = 0.0;
    for (const std::size_t count : hist) {
        if (count == 0) continue;
        const double p = static_cast<double>(count) / n;
        bits -= p * std::log2(p);
    }
    return bits / 8.0;
}

struct IqaReport {
    std::string imageId;
    double gradient = 0.0;
    double entropy = 0.0;
};

inline IqaReport assess(std::string imageId, const Image8& img) {
    return {std::move(imageId), mean_gradient(img), entropy(img)};
}

struct MetricSummary {
    double mean = 0.0;
    double stdDev = 0.0;  // population
};

inline MetricSummary summarize(const std::vector<double>& values) {
    if (values.empty()) return {};
    const auto n = static_cast<double>(values.size());
    double mean = 0.0;
    for (const double v : values) mean += v;
    mean /= n;
    double var = 0.0;
    for (const double v : values) var += (v - mean) * (v - mean);
    return {mean, std::sqrt(var / n)};
}

struct IqaFailure {
    std::string imageId;
    std::string message;
};

struct IqaBatchReport {
    std::vector<IqaReport> rows;
    std::vector<IqaFailure> failures;
    MetricSummary gradient;
    MetricSummary entropy;
};

/// Aggregates per-image rows (in input order) into mean/std per metric.
inline IqaBatchReport aggregate(std::vector<IqaReport> rows, std::vector<IqaFailure> failures = {}) {
    IqaBatchReport report;
    std::vector<double> g, e;
    for (const auto& r : rows) {
        g.push_back(r.gradient);
        e.push_back(r.entropy);
    }
    report.gradient = summarize(g);
    report.entropy = summarize(e);
    report.rows = std::move(rows);
    report.failures = std::move(failures);
    return report;
}

/// CSV: `image_id,gradient,entropy` rows, then `@mean` and `@std` aggregate rows.
inline void write_iqa_csv(std::ostream& os, const IqaBatchReport& report, bool header = true) {
    const auto old = os.precision(10);
    if (header) os << "image_id,gradient,entropy\n";
    for (const auto& r : report.rows) os << r.imageId << ',' << r.gradient << ',' << r.entropy << '\n';
    os << "@mean," << report.gradient.mean << ',' << report.entropy.mean << '\n';
    os << "@std," << report.gradient.stdDev << ',' << report.entropy.stdDev << '\n';
    os.precision(old);
}

}  // namespace thermofield
