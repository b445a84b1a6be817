#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace thermofield {

/// Raised when caller-supplied dimensions or tunables are out of range.
class ParameterError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Raised when an internal invariant does not hold (a bug, not bad input).
class InvariantError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// Dense row-major single-channel image.
template <typename T>
struct Image {
    using value_type = T;

    int width = 0;
    int height = 0;
    std::vector<T> data;

    Image() = default;
    Image(int w, int h, T fill = T{}) : width(w), height(h) {
        if (w < 1 || h < 1) {
            throw ParameterError("image dimensions must be positive, got " +
                                 std::to_string(w) + "x" + std::to_string(h));
        }
        data.assign(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), fill);
    }
    Image(int w, int h, std::vector<T> values) : width(w), height(h), data(std::move(values)) {
        if (w < 1 || h < 1) {
            throw ParameterError("image dimensions must be positive, got " +
                                 std::to_string(w) + "x" + std::to_string(h));
        }
        if (data.size() != pixel_count()) {
            throw ParameterError("pixel buffer holds " + std::to_string(data.size()) +
                                 " values, expected " + std::to_string(pixel_count()));
        }
    }

    [[nodiscard]] std::size_t pixel_count() const {
        return static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
    }
    [[nodiscard]] std::size_t index(int x, int y) const {
        return static_cast<std::size_t>(y) * static_cast<std::size_t>(width) +
               static_cast<std::size_t>(x);
    }

    T& at(int x, int y) { return data[index(x, y)]; }
    const T& at(int x, int y) const { return data[index(x, y)]; }

    T* row(int y) { return data.data() + index(0, y); }
    const T* row(int y) const { return data.data() + index(0, y); }

    bool operator==(const Image&) const = default;
};

/// 14-bit RAW thermal counts stored in 16-bit containers.
using RawFrame = Image<std::uint16_t>;
/// Display-ready 8-bit grayscale image.
using Image8 = Image<std::uint8_t>;

enum class FieldRole : std::uint32_t { Min = 0, Max = 1 };

inline const char* to_string(FieldRole role) { return role == FieldRole::Min ? "min" : "max"; }

/// Coarse R x C grid of pooled scalars. Values are kept in double precision
/// because LES and MP produce fractional averages.
struct MinMaxGrid {
    int rows = 0;
    int cols = 0;
    std::vector<double> values;
    FieldRole role = FieldRole::Min;

    MinMaxGrid() = default;
    MinMaxGrid(int r, int c, FieldRole role_, double fill = 0.0)
        : rows(r), cols(c), values(static_cast<std::size_t>(r) * static_cast<std::size_t>(c), fill),
          role(role_) {
        if (r < 1 || c < 1) throw ParameterError("grid dimensions must be positive");
    }
    MinMaxGrid(int r, int c, FieldRole role_, std::vector<double> v)
        : rows(r), cols(c), values(std::move(v)), role(role_) {
        if (r < 1 || c < 1) throw ParameterError("grid dimensions must be positive");
        if (values.size() != static_cast<std::size_t>(r) * static_cast<std::size_t>(c)) {
            throw ParameterError("grid buffer size does not match rows x cols");
        }
    }

    double& at(int r, int c) { return values[static_cast<std::size_t>(r) * cols + c]; }
    double at(int r, int c) const { return values[static_cast<std::size_t>(r) * cols + c]; }

    bool operator==(const MinMaxGrid&) const = default;
};

/// Full-resolution per-pixel rescale bound (phi_min or phi_max).
struct ScalarField {
    Image<double> image;
    FieldRole role = FieldRole::Min;

    ScalarField() = default;
    ScalarField(int w, int h, FieldRole role_, double fill = 0.0) : image(w, h, fill), role(role_) {}
    ScalarField(Image<double> img, FieldRole role_) : image(std::move(img)), role(role_) {}

    [[nodiscard]] int width() const { return image.width; }
    [[nodiscard]] int height() const { return image.height; }
    [[nodiscard]] const std::vector<double>& data() const { return image.data; }
    std::vector<double>& data() { return image.data; }

    bool operator==(const ScalarField&) const = default;
};

/// phi_min / phi_max pair produced for one frame.
struct FieldPair {
    ScalarField min;
    ScalarField max;

    bool operator==(const FieldPair&) const = default;
};

template <typename A, typename B>
bool same_dims(const Image<A>& a, const Image<B>& b) {
    return a.width == b.width && a.height == b.height;
}

}  // namespace thermofield
