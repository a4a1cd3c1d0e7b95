#include "dforge/image_io.hpp"

#include "dforge/errors.hpp"

#include <png.h>

#include <cmath>
#include <cstdio>
#include <memory>

namespace dforge {

namespace {

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f) {
            std::fclose(f);
        }
    }
};

using FileHandle = std::unique_ptr<std::FILE, FileCloser>;

FileHandle open_file(const std::string& path, const char* mode) {
    FileHandle f(std::fopen(path.c_str(), mode));
    if (!f) {
        throw IoError("cannot open " + path);
    }
    return f;
}

struct PngReader {
    png_structp png = nullptr;
    png_infop info = nullptr;

    PngReader() {
        png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
        if (png) {
            info = png_create_info_struct(png);
        }
        if (!png || !info) {
            png_destroy_read_struct(&png, &info, nullptr);
            throw IoError("libpng allocation failed");
        }
    }
    ~PngReader() { png_destroy_read_struct(&png, &info, nullptr); }
};

struct PngWriter {
    png_structp png = nullptr;
    png_infop info = nullptr;

    PngWriter() {
        png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
        if (png) {
            info = png_create_info_struct(png);
        }
        if (!png || !info) {
            png_destroy_write_struct(&png, &info);
            throw IoError("libpng allocation failed");
        }
    }
    ~PngWriter() { png_destroy_write_struct(&png, &info); }
};

// Reads any PNG into 8-bit samples with `channels` output channels.
std::vector<std::uint8_t> read_png_8bit(const std::string& path, int channels, int& width,
                                        int& height) {
    FileHandle file = open_file(path, "rb");
    PngReader ctx;
    if (setjmp(png_jmpbuf(ctx.png))) {
        throw IoError("failed to decode PNG: " + path);
    }
    png_init_io(ctx.png, file.get());
    png_read_info(ctx.png, ctx.info);

    png_set_expand(ctx.png);
    png_set_strip_16(ctx.png);
    png_set_strip_alpha(ctx.png);
    if (channels == 3) {
        png_set_gray_to_rgb(ctx.png);
    } else {
        const png_byte color = png_get_color_type(ctx.png, ctx.info);
        if (color & PNG_COLOR_MASK_COLOR) {
            png_set_rgb_to_gray_fixed(ctx.png, 1, -1, -1);
        }
    }
    png_read_update_info(ctx.png, ctx.info);

    width = static_cast<int>(png_get_image_width(ctx.png, ctx.info));
    height = static_cast<int>(png_get_image_height(ctx.png, ctx.info));
    const std::size_t rowbytes = png_get_rowbytes(ctx.png, ctx.info);
    if (rowbytes != static_cast<std::size_t>(width) * static_cast<std::size_t>(channels)) {
        throw IoError("unexpected PNG row layout in " + path);
    }

    std::vector<std::uint8_t> data(rowbytes * static_cast<std::size_t>(height));
    std::vector<png_bytep> rows(static_cast<std::size_t>(height));
    for (int y = 0; y < height; ++y) {
        rows[static_cast<std::size_t>(y)] = data.data() + static_cast<std::size_t>(y) * rowbytes;
    }
    png_read_image(ctx.png, rows.data());
    png_read_end(ctx.png, nullptr);
    return data;
}

void write_png_8bit(const std::string& path, const std::uint8_t* data, int width, int height,
                    int channels) {
    FileHandle file = open_file(path, "wb");
    PngWriter ctx;
    if (setjmp(png_jmpbuf(ctx.png))) {
        throw IoError("failed to encode PNG: " + path);
    }
    png_init_io(ctx.png, file.get());
    png_set_IHDR(ctx.png, ctx.info, static_cast<png_uint_32>(width),
                 static_cast<png_uint_32>(height), 8,
                 channels == 3 ? PNG_COLOR_TYPE_RGB : PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE,
                 PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(ctx.png, ctx.info);

    const std::size_t rowbytes = static_cast<std::size_t>(width) * static_cast<std::size_t>(channels);
    for (int y = 0; y < height; ++y) {
        png_write_row(ctx.png, const_cast<png_bytep>(data + static_cast<std::size_t>(y) * rowbytes));
    }
    png_write_end(ctx.png, nullptr);
}

} // namespace

RgbImage8 read_png_rgb8(const std::string& path) {
    RgbImage8 img;
    img.pixels = read_png_8bit(path, 3, img.width, img.height);
    return img;
}

void write_png_rgb8(const std::string& path, const RgbImage8& img) {
    write_png_8bit(path, img.pixels.data(), img.width, img.height, 3);
}

GrayImage8 read_png_gray8(const std::string& path) {
    GrayImage8 img;
    img.pixels = read_png_8bit(path, 1, img.width, img.height);
    return img;
}

void write_png_gray8(const std::string& path, const GrayImage8& img) {
    write_png_8bit(path, img.pixels.data(), img.width, img.height, 1);
}

GrayImage16 read_png_gray16(const std::string& path) {
    FileHandle file = open_file(path, "rb");
    PngReader ctx;
    if (setjmp(png_jmpbuf(ctx.png))) {
        throw IoError("failed to decode PNG: " + path);
    }
    png_init_io(ctx.png, file.get());
    png_read_info(ctx.png, ctx.info);

    if (png_get_color_type(ctx.png, ctx.info) != PNG_COLOR_TYPE_GRAY) {
        throw IoError("expected grayscale PNG: " + path);
    }
    if (png_get_bit_depth(ctx.png, ctx.info) != 16) {
        throw IoError("expected 16-bit PNG: " + path);
    }
#if __BYTE_ORDER__ == __ORDER_LITTLE_ENDIAN__
    png_set_swap(ctx.png); // PNG stores 16-bit samples big-endian
#endif
    png_read_update_info(ctx.png, ctx.info);

    GrayImage16 img;
    img.width = static_cast<int>(png_get_image_width(ctx.png, ctx.info));
    img.height = static_cast<int>(png_get_image_height(ctx.png, ctx.info));
    img.pixels.resize(static_cast<std::size_t>(img.width) * static_cast<std::size_t>(img.height));

    std::vector<png_bytep> rows(static_cast<std::size_t>(img.height));
    for (int y = 0; y < img.height; ++y) {
        rows[static_cast<std::size_t>(y)] = reinterpret_cast<png_bytep>(
            img.pixels.data() + static_cast<std::size_t>(y) * static_cast<std::size_t>(img.width));
    }
    png_read_image(ctx.png, rows.data());
    png_read_end(ctx.png, nullptr);
    return img;
}

void write_png_gray16(const std::string& path, const GrayImage16& img) {
    FileHandle file = open_file(path, "wb");
    PngWriter ctx;
    if (setjmp(png_jmpbuf(ctx.png))) {
        throw IoError("failed to encode PNG: " + path);
    }
    png_init_io(ctx.png, file.get());
    png_set_IHDR(ctx.png, ctx.info, static_cast<png_uint_32>(img.width),
                 static_cast<png_uint_32>(img.height), 16, PNG_COLOR_TYPE_GRAY,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(ctx.png, ctx.info);
#if __BYTE_ORDER__ == __ORDER_LITTLE_ENDIAN__
    png_set_swap(ctx.png);
#endif
    for (int y = 0; y < img.height; ++y) {
        png_write_row(ctx.png,
                      reinterpret_cast<png_const_bytep>(
                          img.pixels.data() +
                          static_cast<std::size_t>(y) * static_cast<std::size_t>(img.width)));
    }
    png_write_end(ctx.png, nullptr);
}

ImageBuffer to_image_buffer(const RgbImage8& img) {
    ImageBuffer out(img.height, img.width);
    for (std::size_t i = 0; i < img.pixels.size(); ++i) {
        out.pixels[i] = img.pixels[i] / 255.0;
    }
    return out;
}

RgbImage8 to_rgb8(const ImageBuffer& img) {
    RgbImage8 out;
    out.width = img.width;
    out.height = img.height;
    out.pixels.resize(img.element_count());
    for (std::size_t i = 0; i < out.pixels.size(); ++i) {
        out.pixels[i] = static_cast<std::uint8_t>(std::lround(img.pixels[i] * 255.0));
    }
    return out;
}

ConfidenceMap confidence_from_gray8(const GrayImage8& img) {
    ConfidenceMap map;
    map.width = img.width;
    map.height = img.height;
    map.conf.resize(img.pixels.size());
    for (std::size_t i = 0; i < img.pixels.size(); ++i) {
        map.conf[i] = img.pixels[i] / 255.0;
    }
    return map;
}

ConfidenceMap read_confidence_f32(const std::string& path, int width, int height) {
    FileHandle file = open_file(path, "rb");
    const std::size_t n = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
    std::vector<float> raw(n);
    if (std::fread(raw.data(), sizeof(float), n, file.get()) != n) {
        throw IoError("confidence file shorter than expected: " + path);
    }
    ConfidenceMap map;
    map.width = width;
    map.height = height;
    map.conf.assign(raw.begin(), raw.end());
    map.validate();
    return map;
}

} // namespace dforge
