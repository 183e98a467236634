#include "mixclass/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <vector>

namespace mixc {

namespace {

using Kind = ImageIoError::Kind;

std::vector<unsigned char> quantize(const ImageTensor& img) {
    if (img.channels != 1) {
        throw ImageIoError(Kind::UnsupportedFormat, "write_image: images are stored single-channel, got " + std::to_string(img.channels) + " channels");
    }
    std::vector<unsigned char> bytes(static_cast<std::size_t>(img.height) * img.width);
    for (std::size_t i = 0; i < bytes.size(); ++i) {
        const double v = std::clamp(img.values[i], 0.0, 1.0);
        bytes[i] = static_cast<unsigned char>(std::lround(v * 255.0));
    }
    return bytes;
}

// ---- PGM (P5) ---------------------------------------------------------------

// Skips whitespace and '#' comment lines between header tokens.
bool next_pgm_token(std::istream& in, std::string& tok) {
    tok.clear();
    int c;
    while ((c = in.get()) != EOF) {
        if (c == '#') {
            while ((c = in.get()) != EOF && c != '\n') {
            }
            continue;
        }
        if (!std::isspace(c)) break;
    }
    if (c == EOF) return false;
    do {
        tok.push_back(static_cast<char>(c));
        c = in.get();
    } while (c != EOF && !std::isspace(c) && c != '#');
    if (c == '#') in.unget();
    return true;
}

ImageTensor read_pgm(std::ifstream& in, const std::string& path) {
    std::string tok;
    if (!next_pgm_token(in, tok) || tok != "P5") {
        throw ImageIoError(Kind::MalformedHeader, path + ": not a binary PGM (P5) file");
    }
    long dims[3];
    for (int i = 0; i < 3; ++i) {
        if (!next_pgm_token(in, tok)) throw ImageIoError(Kind::MalformedHeader, path + ": PGM header ended early");
        char* end = nullptr;
        dims[i] = std::strtol(tok.c_str(), &end, 10);
        if (end == tok.c_str() || *end != '\0' || dims[i] <= 0) {
            throw ImageIoError(Kind::MalformedHeader, path + ": bad PGM header token '" + tok + "'");
        }
    }
    const long w = dims[0], h = dims[1], maxval = dims[2];
    if (maxval != 255) {
        throw ImageIoError(Kind::UnsupportedBitDepth, path + ": PGM maxval " + std::to_string(maxval) + " unsupported (need 255)");
    }
    // Header is terminated by exactly one whitespace byte (already consumed
    // by the tokenizer).
    ImageTensor img(static_cast<int>(h), static_cast<int>(w), 1);
    std::vector<unsigned char> bytes(static_cast<std::size_t>(h) * w);
    in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (static_cast<std::size_t>(in.gcount()) != bytes.size()) {
        throw ImageIoError(Kind::TruncatedPayload, path + ": PGM payload truncated (" + std::to_string(in.gcount()) + " of " + std::to_string(bytes.size()) + " bytes)");
    }
    for (std::size_t i = 0; i < bytes.size(); ++i) img.values[i] = bytes[i] / 255.0;
    return img;
}

void write_pgm(const ImageTensor& img, const std::filesystem::path& path) {
    const auto bytes = quantize(img);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ImageIoError(Kind::WriteFailed, path.string() + ": cannot open for writing");
    out << "P5\n" << img.width << " " << img.height << "\n255\n";
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw ImageIoError(Kind::WriteFailed, path.string() + ": write failed");
}

// ---- PNG (libpng) -----------------------------------------------------------

struct PngReadCtx {
    png_structp png = nullptr;
    png_infop info = nullptr;
    FILE* fp = nullptr;
    ~PngReadCtx() {
        if (png) png_destroy_read_struct(&png, info ? &info : nullptr, nullptr);
        if (fp) std::fclose(fp);
    }
};

ImageTensor read_png(const std::filesystem::path& path) {
    PngReadCtx ctx;
    ctx.fp = std::fopen(path.string().c_str(), "rb");
    if (!ctx.fp) throw ImageIoError(Kind::OpenFailed, path.string() + ": cannot open");

    unsigned char sig[8];
    if (std::fread(sig, 1, 8, ctx.fp) != 8 || png_sig_cmp(sig, 0, 8) != 0) {
        throw ImageIoError(Kind::MalformedHeader, path.string() + ": not a PNG file");
    }
    ctx.png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    ctx.info = png_create_info_struct(ctx.png);
    if (!ctx.png || !ctx.info) throw ImageIoError(Kind::OpenFailed, "libpng init failed");
    if (setjmp(png_jmpbuf(ctx.png))) {
        throw ImageIoError(Kind::TruncatedPayload, path.string() + ": PNG payload truncated or corrupt");
    }
    png_init_io(ctx.png, ctx.fp);
    png_set_sig_bytes(ctx.png, 8);
    png_read_info(ctx.png, ctx.info);

    const png_uint_32 w = png_get_image_width(ctx.png, ctx.info);
    const png_uint_32 h = png_get_image_height(ctx.png, ctx.info);
    const int depth = png_get_bit_depth(ctx.png, ctx.info);
    const int color = png_get_color_type(ctx.png, ctx.info);
    if (color != PNG_COLOR_TYPE_GRAY) {
        throw ImageIoError(Kind::UnsupportedFormat, path.string() + ": PNG must be single-channel grayscale");
    }
    if (depth != 8) {
        throw ImageIoError(Kind::UnsupportedBitDepth, path.string() + ": PNG bit depth " + std::to_string(depth) + " unsupported (need 8)");
    }

    ImageTensor img(static_cast<int>(h), static_cast<int>(w), 1);
    std::vector<unsigned char> row(w);
    for (png_uint_32 y = 0; y < h; ++y) {
        png_read_row(ctx.png, row.data(), nullptr);
        for (png_uint_32 x = 0; x < w; ++x) img.values[static_cast<std::size_t>(y) * w + x] = row[x] / 255.0;
    }
    png_read_end(ctx.png, nullptr);
    return img;
}

struct PngWriteCtx {
    png_structp png = nullptr;
    png_infop info = nullptr;
    FILE* fp = nullptr;
    ~PngWriteCtx() {
        if (png) png_destroy_write_struct(&png, info ? &info : nullptr);
        if (fp) std::fclose(fp);
    }
};

void write_png(const ImageTensor& img, const std::filesystem::path& path) {
    const auto bytes = quantize(img);
    PngWriteCtx ctx;
    ctx.fp = std::fopen(path.string().c_str(), "wb");
    if (!ctx.fp) throw ImageIoError(Kind::WriteFailed, path.string() + ": cannot open for writing");
    ctx.png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    ctx.info = png_create_info_struct(ctx.png);
    if (!ctx.png || !ctx.info) throw ImageIoError(Kind::WriteFailed, "libpng init failed");
    if (setjmp(png_jmpbuf(ctx.png))) {
        throw ImageIoError(Kind::WriteFailed, path.string() + ": PNG write failed");
    }
    png_init_io(ctx.png, ctx.fp);
    // Fixed settings so identical content yields identical bytes.
    png_set_compression_level(ctx.png, 6);
    png_set_IHDR(ctx.png, ctx.info, img.width, img.height, 8, PNG_COLOR_TYPE_GRAY,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(ctx.png, ctx.info);
    for (int y = 0; y < img.height; ++y) {
        png_write_row(ctx.png, const_cast<png_bytep>(bytes.data() + static_cast<std::size_t>(y) * img.width));
    }
    png_write_end(ctx.png, nullptr);
}

}  // namespace

const char* image_extension(ImageFormat fmt) {
    return fmt == ImageFormat::Pgm ? ".pgm" : ".png";
}

ImageFormat image_format_from_name(const std::string& name) {
    if (name == "pgm") return ImageFormat::Pgm;
    if (name == "png") return ImageFormat::Png;
    throw ImageIoError(Kind::UnsupportedFormat, "unknown image format '" + name + "' (expected pgm or png)");
}

ImageTensor read_image(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ImageIoError(Kind::OpenFailed, path.string() + ": cannot open");
    char magic[2] = {0, 0};
    in.read(magic, 2);
    if (in.gcount() == 2 && magic[0] == 'P' && magic[1] == '5') {
        in.seekg(0);
        return read_pgm(in, path.string());
    }
    in.close();
    return read_png(path);
}

void write_image(const ImageTensor& img, const std::filesystem::path& path, ImageFormat fmt) {
    if (fmt == ImageFormat::Pgm) {
        write_pgm(img, path);
    } else {
        write_png(img, path);
    }
}

ImageTensor resize_bilinear(const ImageTensor& img, int out_h, int out_w) {
    if (out_h <= 0 || out_w <= 0) throw std::invalid_argument("resize_bilinear: output dims must be positive");
    if (out_h == img.height && out_w == img.width) return img;
    ImageTensor out(out_h, out_w, img.channels);
    const double sy = static_cast<double>(img.height) / out_h;
    const double sx = static_cast<double>(img.width) / out_w;
    for (int y = 0; y < out_h; ++y) {
        double fy = (y + 0.5) * sy - 0.5;
        fy = std::clamp(fy, 0.0, static_cast<double>(img.height - 1));
        const int y0 = static_cast<int>(fy);
        const int y1 = std::min(y0 + 1, img.height - 1);
        const double wy = fy - y0;
        for (int x = 0; x < out_w; ++x) {
            double fx = (x + 0.5) * sx - 0.5;
            fx = std::clamp(fx, 0.0, static_cast<double>(img.width - 1));
            const int x0 = static_cast<int>(fx);
            const int x1 = std::min(x0 + 1, img.width - 1);
            const double wx = fx - x0;
            for (int c = 0; c < img.channels; ++c) {
                const double top = img.at(y0, x0, c) * (1.0 - wx) + img.at(y0, x1, c) * wx;
                const double bot = img.at(y1, x0, c) * (1.0 - wx) + img.at(y1, x1, c) * wx;
                out.at(y, x, c) = std::clamp(top * (1.0 - wy) + bot * wy, 0.0, 1.0);
            }
        }
    }
    return out;
}

ImageTensor triplicate(const ImageTensor& img) {
    if (img.channels != 1) throw std::invalid_argument("triplicate: input must be single-channel");
    ImageTensor out(img.height, img.width, 3);
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            const double v = img.at(y, x, 0);
            out.at(y, x, 0) = v;
            out.at(y, x, 1) = v;
            out.at(y, x, 2) = v;
        }
    }
    return out;
}

}  // namespace mixc
