#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "thermofield/imgio.hpp"
#include "thermofield/iqa.hpp"

namespace thermofield {

/// Scores each 8-bit PNG in order. Files that fail to load or score are recorded as
/// failures and skipped; the batch itself only fails when given no files.
inline IqaBatchReport iqa_batch(std::span<const std::filesystem::path> files) {
    if (files.empty()) throw ParameterError("IQA batch needs at least one image");
    std::vector<IqaReport> rows;
    std::vector<IqaFailure> failures;
    for (const auto& path : files) {
        const std::string id = path.filename().string();
        try {
            rows.push_back(assess(id, load_image8(path)));
        } catch (const std::exception& e) {
            failures.push_back({id, e.what()});
        }
    }
    return aggregate(std::move(rows), std::move(failures));
}

inline IqaBatchReport iqa_batch(const std::filesystem::path& dir, const std::string& glob = "*.png") {
    std::vector<std::filesystem::path> files;
    for (const auto& e : scan_sequence(dir, glob)) files.push_back(e.path);
    return iqa_batch(files);
}

}  // namespace thermofield
