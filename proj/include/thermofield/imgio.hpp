#pragma once

// Image file I/O: 16-bit grayscale PNG/TIFF RAW frames, 8-bit PNG outputs, binary
// field dumps and directory scanning for frame sequences.

#include <fnmatch.h>
#include <png.h>
#include <tiffio.h>

#include <algorithm>
#include <array>
#include <csetjmp>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "thermofield/image.hpp"

namespace thermofield {

class LoadError : public std::runtime_error {
public:
    enum class Kind { Missing, UnsupportedFormat, MultiChannel, BitDepth, Decode };

    LoadError(Kind kind, const std::string& path, const std::string& what)
        : std::runtime_error(path + ": " + what), kind_(kind) {}

    [[nodiscard]] Kind kind() const { return kind_; }

private:
    Kind kind_;
};

class WriteError : public std::runtime_error {
public:
    WriteError(const std::string& path, const std::string& what)
        : std::runtime_error(path + ": " + what) {}
};

namespace detail {

enum class Container { Png, Tiff, Unknown };

inline Container sniff(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw LoadError(LoadError::Kind::Missing, path.string(), "cannot open file");
    std::array<unsigned char, 8> magic{};
    in.read(reinterpret_cast<char*>(magic.data()), magic.size());
    const auto got = in.gcount();
    if (got >= 8 && png_sig_cmp(magic.data(), 0, 8) == 0) return Container::Png;
    if (got >= 4 && ((magic[0] == 'I' && magic[1] == 'I' && magic[2] == 42 && magic[3] == 0) ||
                     (magic[0] == 'M' && magic[1] == 'M' && magic[2] == 0 && magic[3] == 42))) {
        return Container::Tiff;
    }
    return Container::Unknown;
}

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

struct PngErrorState {
    std::jmp_buf jump;
    char message[256] = {};
};

inline void png_error_handler(png_structp png, png_const_charp msg) {
    auto* state = static_cast<PngErrorState*>(png_get_error_ptr(png));
    std::snprintf(state->message, sizeof state->message, "%s", msg);
    std::longjmp(state->jump, 1);
}

inline void png_warning_handler(png_structp, png_const_charp) {}

/// Decoded single-channel samples widened to 16 bits.
struct PngPixels {
    int width = 0;
    int height = 0;
    std::vector<std::uint16_t> samples;
};

/// Reads a grayscale PNG, requiring exactly `bitDepth` bits per sample.
inline PngPixels read_gray_png(const std::filesystem::path& path, int bitDepth) {
    const std::string name = path.string();
    FilePtr file(std::fopen(name.c_str(), "rb"));
    if (!file) throw LoadError(LoadError::Kind::Missing, name, "cannot open file");

    // Everything touched after setjmp lives on the heap so longjmp cannot leave
    // automatic objects in an indeterminate state.
    auto err = std::make_unique<PngErrorState>();
    auto out = std::make_unique<PngPixels>();
    auto rows = std::make_unique<std::vector<png_bytep>>();
    auto fail = std::make_unique<LoadError>(LoadError::Kind::Decode, name, "");
    auto failed = std::make_unique<bool>(false);
    auto raw = std::make_unique<std::vector<png_byte>>();

    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, err.get(), png_error_handler,
                                             png_warning_handler);
    if (!png) throw LoadError(LoadError::Kind::Decode, name, "libpng initialisation failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        throw LoadError(LoadError::Kind::Decode, name, "libpng initialisation failed");
    }

    if (setjmp(err->jump)) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw LoadError(LoadError::Kind::Decode, name, std::string("PNG decode error: ") + err->message);
    }

    png_init_io(png, file.get());
    png_read_info(png, info);
    const int colorType = png_get_color_type(png, info);
    const int depth = png_get_bit_depth(png, info);
    const int channels = png_get_channels(png, info);

    if (colorType != PNG_COLOR_TYPE_GRAY) {
        *fail = LoadError(LoadError::Kind::MultiChannel, name,
                          colorType == PNG_COLOR_TYPE_PALETTE
                              ? "expected single channel (palette image)"
                              : "expected single channel (found " + std::to_string(channels) + ")");
        *failed = true;
    } else if (depth != bitDepth) {
        *fail = LoadError(LoadError::Kind::BitDepth, name,
                          "unsupported bit depth " + std::to_string(depth));
        *failed = true;
    }
    if (*failed) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw LoadError(*fail);
    }

    out->width = static_cast<int>(png_get_image_width(png, info));
    out->height = static_cast<int>(png_get_image_height(png, info));
    const std::size_t rowBytes = static_cast<std::size_t>(out->width) * (bitDepth / 8);
    raw->resize(rowBytes * out->height);
    rows->resize(out->height);
    for (int y = 0; y < out->height; ++y) (*rows)[y] = raw->data() + rowBytes * y;
    png_read_image(png, rows->data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);

    // PNG stores 16-bit samples big-endian.
    out->samples.resize(static_cast<std::size_t>(out->width) * out->height);
    for (std::size_t i = 0; i < out->samples.size(); ++i) {
        out->samples[i] = bitDepth == 16
                              ? static_cast<std::uint16_t>(((*raw)[2 * i] << 8) | (*raw)[2 * i + 1])
                              : (*raw)[i];
    }
    return std::move(*out);
}

inline void write_gray_png(const std::filesystem::path& path, int width, int height, int bitDepth,
                           std::span<const std::uint16_t> samples) {
    const std::string name = path.string();
    std::vector<png_byte> bytes(samples.size() * (bitDepth / 8));
    for (std::size_t i = 0; i < samples.size(); ++i) {
        if (bitDepth == 16) {
            bytes[2 * i] = static_cast<png_byte>(samples[i] >> 8);
            bytes[2 * i + 1] = static_cast<png_byte>(samples[i] & 0xFF);
        } else {
            bytes[i] = static_cast<png_byte>(samples[i]);
        }
    }
    std::vector<png_bytep> rows(height);
    const std::size_t rowBytes = static_cast<std::size_t>(width) * (bitDepth / 8);
    for (int y = 0; y < height; ++y) rows[y] = bytes.data() + rowBytes * y;

    FilePtr file(std::fopen(name.c_str(), "wb"));
    if (!file) throw WriteError(name, std::string("cannot open for writing: ") + std::strerror(errno));

    auto err = std::make_unique<PngErrorState>();
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, err.get(), png_error_handler,
                                              png_warning_handler);
    if (!png) throw WriteError(name, "libpng initialisation failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_write_struct(&png, nullptr);
        throw WriteError(name, "libpng initialisation failed");
    }
    if (setjmp(err->jump)) {
        png_destroy_write_struct(&png, &info);
        throw WriteError(name, std::string("PNG encode error: ") + err->message);
    }
    png_init_io(png, file.get());
    png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height),
                 bitDepth, PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
                 PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    png_write_image(png, rows.data());
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
    if (std::fflush(file.get()) != 0) throw WriteError(name, "flush failed");
}

inline void silence_libtiff() {
    static const bool once = [] {
        TIFFSetWarningHandler(nullptr);
        TIFFSetErrorHandler(nullptr);
        return true;
    }();
    (void)once;
}

struct TiffCloser {
    void operator()(TIFF* t) const {
        if (t) TIFFClose(t);
    }
};
using TiffPtr = std::unique_ptr<TIFF, TiffCloser>;

inline RawFrame read_tiff16(const std::filesystem::path& path) {
    silence_libtiff();
    const std::string name = path.string();
    TiffPtr tif(TIFFOpen(name.c_str(), "r"));
    if (!tif) throw LoadError(LoadError::Kind::Decode, name, "TIFF open failed");

    std::uint32_t width = 0, height = 0;
    std::uint16_t spp = 1, bps = 1, format = SAMPLEFORMAT_UINT;
    TIFFGetField(tif.get(), TIFFTAG_IMAGEWIDTH, &width);
    TIFFGetField(tif.get(), TIFFTAG_IMAGELENGTH, &height);
    TIFFGetFieldDefaulted(tif.get(), TIFFTAG_SAMPLESPERPIXEL, &spp);
    TIFFGetFieldDefaulted(tif.get(), TIFFTAG_BITSPERSAMPLE, &bps);
    TIFFGetFieldDefaulted(tif.get(), TIFFTAG_SAMPLEFORMAT, &format);

    if (spp != 1) {
        throw LoadError(LoadError::Kind::MultiChannel, name,
                        "expected single channel (found " + std::to_string(spp) + ")");
    }
    if (bps != 16) {
        throw LoadError(LoadError::Kind::BitDepth, name, "unsupported bit depth " + std::to_string(bps));
    }
    if (format != SAMPLEFORMAT_UINT) {
        throw LoadError(LoadError::Kind::UnsupportedFormat, name, "expected unsigned integer samples");
    }
    if (width == 0 || height == 0) throw LoadError(LoadError::Kind::Decode, name, "empty image");

    RawFrame frame(static_cast<int>(width), static_cast<int>(height));
    if (TIFFIsTiled(tif.get())) {
        std::uint32_t tw = 0, th = 0;
        TIFFGetField(tif.get(), TIFFTAG_TILEWIDTH, &tw);
        TIFFGetField(tif.get(), TIFFTAG_TILELENGTH, &th);
        std::vector<std::uint16_t> tile(static_cast<std::size_t>(tw) * th);
        for (std::uint32_t ty = 0; ty < height; ty += th) {
            for (std::uint32_t tx = 0; tx < width; tx += tw) {
                if (TIFFReadTile(tif.get(), tile.data(), tx, ty, 0, 0) < 0) {
                    throw LoadError(LoadError::Kind::Decode, name, "failed to read tile");
                }
                for (std::uint32_t y = ty; y < std::min(height, ty + th); ++y) {
                    const std::uint32_t n = std::min(width, tx + tw) - tx;
                    std::copy_n(tile.data() + static_cast<std::size_t>(y - ty) * tw, n,
                                frame.row(static_cast<int>(y)) + tx);
                }
            }
        }
    } else {
        std::uint32_t rowsPerStrip = height;
        TIFFGetFieldDefaulted(tif.get(), TIFFTAG_ROWSPERSTRIP, &rowsPerStrip);
        rowsPerStrip = std::min(rowsPerStrip, height);
        std::vector<std::uint16_t> strip(static_cast<std::size_t>(width) * rowsPerStrip);
        const tstrip_t strips = TIFFNumberOfStrips(tif.get());
        for (tstrip_t s = 0; s < strips; ++s) {
            const std::uint32_t y0 = s * rowsPerStrip;
            if (y0 >= height) break;
            const std::uint32_t rows = std::min(rowsPerStrip, height - y0);
            const tmsize_t want = static_cast<tmsize_t>(rows) * width * 2;
            if (TIFFReadEncodedStrip(tif.get(), s, strip.data(), want) < want) {
                throw LoadError(LoadError::Kind::Decode, name, "failed to read strip");
            }
            std::copy_n(strip.data(), static_cast<std::size_t>(rows) * width,
                        frame.row(static_cast<int>(y0)));
        }
    }
    return frame;
}

/// Writes interleaved 16-bit samples as TIFF, stripped or tiled (16x16 tiles).
inline void write_tiff16(const std::filesystem::path& path, int width, int height, int channels,
                         std::span<const std::uint16_t> samples, bool tiled = false) {
    silence_libtiff();
    const std::string name = path.string();
    TiffPtr tif(TIFFOpen(name.c_str(), "w"));
    if (!tif) throw WriteError(name, "TIFF open failed");
    TIFF* t = tif.get();
    TIFFSetField(t, TIFFTAG_IMAGEWIDTH, static_cast<std::uint32_t>(width));
    TIFFSetField(t, TIFFTAG_IMAGELENGTH, static_cast<std::uint32_t>(height));
    TIFFSetField(t, TIFFTAG_SAMPLESPERPIXEL, static_cast<std::uint16_t>(channels));
    TIFFSetField(t, TIFFTAG_BITSPERSAMPLE, static_cast<std::uint16_t>(16));
    TIFFSetField(t, TIFFTAG_SAMPLEFORMAT, static_cast<std::uint16_t>(SAMPLEFORMAT_UINT));
    TIFFSetField(t, TIFFTAG_PLANARCONFIG, static_cast<std::uint16_t>(PLANARCONFIG_CONTIG));
    TIFFSetField(t, TIFFTAG_PHOTOMETRIC,
                 static_cast<std::uint16_t>(channels == 1 ? PHOTOMETRIC_MINISBLACK : PHOTOMETRIC_RGB));
    TIFFSetField(t, TIFFTAG_COMPRESSION, static_cast<std::uint16_t>(COMPRESSION_NONE));

    const std::size_t rowSamples = static_cast<std::size_t>(width) * channels;
    if (tiled) {
        constexpr std::uint32_t kTile = 16;
        TIFFSetField(t, TIFFTAG_TILEWIDTH, kTile);
        TIFFSetField(t, TIFFTAG_TILELENGTH, kTile);
        std::vector<std::uint16_t> tile(static_cast<std::size_t>(kTile) * kTile * channels);
        for (int ty = 0; ty < height; ty += kTile) {
            for (int tx = 0; tx < width; tx += kTile) {
                std::fill(tile.begin(), tile.end(), 0);
                for (int y = ty; y < std::min<int>(height, ty + kTile); ++y) {
                    const int n = std::min<int>(width, tx + kTile) - tx;
                    std::copy_n(samples.data() + y * rowSamples + static_cast<std::size_t>(tx) * channels,
                                static_cast<std::size_t>(n) * channels,
                                tile.data() + static_cast<std::size_t>(y - ty) * kTile * channels);
                }
                if (TIFFWriteTile(t, tile.data(), tx, ty, 0, 0) < 0) {
                    throw WriteError(name, "failed to write tile");
                }
            }
        }
    } else {
        TIFFSetField(t, TIFFTAG_ROWSPERSTRIP, TIFFDefaultStripSize(t, 0));
        std::vector<std::uint16_t> row(rowSamples);
        for (int y = 0; y < height; ++y) {
            std::copy_n(samples.data() + y * rowSamples, rowSamples, row.data());
            if (TIFFWriteScanline(t, row.data(), static_cast<std::uint32_t>(y), 0) < 0) {
                throw WriteError(name, "failed to write scanline");
            }
        }
    }
}

}  // namespace detail

/// Decodes a 16-bit single-channel PNG or TIFF. Sample values are passed through unchanged.
inline RawFrame load_raw(const std::filesystem::path& path) {
    if (!std::filesystem::exists(path)) {
        throw LoadError(LoadError::Kind::Missing, path.string(), "file not found");
    }
    switch (detail::sniff(path)) {
        case detail::Container::Png: {
            detail::PngPixels px = detail::read_gray_png(path, 16);
            return RawFrame(px.width, px.height, std::move(px.samples));
        }
        case detail::Container::Tiff:
            return detail::read_tiff16(path);
        case detail::Container::Unknown:
            break;
    }
    throw LoadError(LoadError::Kind::UnsupportedFormat, path.string(),
                    "unsupported format (expected PNG or TIFF)");
}

/// Reads an 8-bit grayscale PNG.
inline Image8 load_image8(const std::filesystem::path& path) {
    if (!std::filesystem::exists(path)) {
        throw LoadError(LoadError::Kind::Missing, path.string(), "file not found");
    }
    if (detail::sniff(path) != detail::Container::Png) {
        throw LoadError(LoadError::Kind::UnsupportedFormat, path.string(),
                        "unsupported format (expected PNG)");
    }
    detail::PngPixels px = detail::read_gray_png(path, 8);
    return Image8(px.width, px.height, std::vector<std::uint8_t>(px.samples.begin(), px.samples.end()));
}

inline void save_image8(const Image8& img, const std::filesystem::path& path) {
    const std::vector<std::uint16_t> samples(img.data.begin(), img.data.end());
    detail::write_gray_png(path, img.width, img.height, 8, samples);
}

inline void save_raw_png(const RawFrame& frame, const std::filesystem::path& path) {
    detail::write_gray_png(path, frame.width, frame.height, 16, frame.data);
}

inline void save_raw_tiff(const RawFrame& frame, const std::filesystem::path& path, bool tiled = false) {
    detail::write_tiff16(path, frame.width, frame.height, 1, frame.data, tiled);
}

// Field dump: "TFLD", u32 width, u32 height, u32 role (0 min, 1 max), then width*height
// little-endian float32 samples in row-major order.

namespace detail {

inline void put_u32(std::ostream& os, std::uint32_t v) {
    const char b[4] = {static_cast<char>(v & 0xFF), static_cast<char>((v >> 8) & 0xFF),
                       static_cast<char>((v >> 16) & 0xFF), static_cast<char>((v >> 24) & 0xFF)};
    os.write(b, 4);
}

inline std::uint32_t get_u32(const unsigned char* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

}  // namespace detail

inline void write_field_dump(const ScalarField& field, const std::filesystem::path& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw WriteError(path.string(), "cannot open for writing");
    os.write("TFLD", 4);
    detail::put_u32(os, static_cast<std::uint32_t>(field.width()));
    detail::put_u32(os, static_cast<std::uint32_t>(field.height()));
    detail::put_u32(os, static_cast<std::uint32_t>(field.role));
    for (const double v : field.data()) {
        const auto f = static_cast<float>(v);
        std::uint32_t bits = 0;
        std::memcpy(&bits, &f, sizeof bits);
        detail::put_u32(os, bits);
    }
    if (!os) throw WriteError(path.string(), "write failed");
}

inline ScalarField read_field_dump(const std::filesystem::path& path) {
    const std::string name = path.string();
    std::ifstream in(path, std::ios::binary);
    if (!in) throw LoadError(LoadError::Kind::Missing, name, "cannot open file");
    std::array<unsigned char, 16> header{};
    in.read(reinterpret_cast<char*>(header.data()), header.size());
    if (in.gcount() != 16 || std::memcmp(header.data(), "TFLD", 4) != 0) {
        throw LoadError(LoadError::Kind::UnsupportedFormat, name, "not a field dump");
    }
    const std::uint32_t w = detail::get_u32(header.data() + 4);
    const std::uint32_t h = detail::get_u32(header.data() + 8);
    const std::uint32_t role = detail::get_u32(header.data() + 12);
    if (w == 0 || h == 0 || role > 1) throw LoadError(LoadError::Kind::Decode, name, "bad header");

    std::vector<unsigned char> payload(static_cast<std::size_t>(w) * h * 4);
    in.read(reinterpret_cast<char*>(payload.data()), static_cast<std::streamsize>(payload.size()));
    if (static_cast<std::size_t>(in.gcount()) != payload.size()) {
        throw LoadError(LoadError::Kind::Decode, name, "truncated payload");
    }
    ScalarField field(static_cast<int>(w), static_cast<int>(h), static_cast<FieldRole>(role));
    for (std::size_t i = 0; i < field.data().size(); ++i) {
        const std::uint32_t bits = detail::get_u32(payload.data() + 4 * i);
        float f = 0.0f;
        std::memcpy(&f, &bits, sizeof f);
        field.data()[i] = f;
    }
    return field;
}

/// Linear map of [lo, hi] to [0, 255] for inspection images.
inline Image8 visualize(const Image<double>& img, double lo, double hi) {
    if (!(hi > lo)) hi = lo + 1.0;
    Image8 out(img.width, img.height);
    for (std::size_t i = 0; i < img.data.size(); ++i) {
        const double t = std::round(255.0 * (img.data[i] - lo) / (hi - lo));
        out.data[i] = static_cast<std::uint8_t>(std::clamp(t, 0.0, 255.0));
    }
    return out;
}

/// Field normalized by its own min/max.
inline Image8 visualize_field(const ScalarField& field) {
    const auto [mn, mx] = std::minmax_element(field.data().begin(), field.data().end());
    return visualize(field.image, *mn, *mx);
}

/// Horizontal concatenation of equally tall panels.
inline Image8 montage(std::span<const Image8> panels) {
    if (panels.empty()) throw ParameterError("montage needs at least one panel");
    int width = 0;
    for (const auto& p : panels) {
        if (p.height != panels.front().height) throw ParameterError("montage panels differ in height");
        width += p.width;
    }
    Image8 out(width, panels.front().height);
    int x0 = 0;
    for (const auto& p : panels) {
        for (int y = 0; y < p.height; ++y) std::copy_n(p.row(y), p.width, out.row(y) + x0);
        x0 += p.width;
    }
    return out;
}

struct DatasetEntry {
    std::filesystem::path path;
    std::size_t frameIndex = 0;
};

/// Regular files in `dir` whose names match the shell glob, sorted bytewise by file name.
inline std::vector<DatasetEntry> scan_sequence(const std::filesystem::path& dir,
                                               const std::string& glob = "*") {
    if (!std::filesystem::is_directory(dir)) {
        throw ParameterError("not a directory: " + dir.string());
    }
    std::vector<std::filesystem::path> matches;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (!entry.is_regular_file()) continue;
        const std::string fname = entry.path().filename().string();
        if (fnmatch(glob.c_str(), fname.c_str(), FNM_PERIOD) == 0) matches.push_back(entry.path());
    }
    std::sort(matches.begin(), matches.end(), [](const auto& a, const auto& b) {
        return a.filename().string() < b.filename().string();
    });
    if (matches.empty()) {
        std::clog << "warning: no files matching '" << glob << "' in " << dir.string() << '\n';
    }
    std::vector<DatasetEntry> out;
    out.reserve(matches.size());
    for (std::size_t i = 0; i < matches.size(); ++i) out.push_back({matches[i], i});
    return out;
}

}  // namespace thermofield
