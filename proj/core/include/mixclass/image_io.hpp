#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>

#include "mixclass/types.hpp"

namespace mixc {

enum class ImageFormat { Pgm, Png };

const char* image_extension(ImageFormat fmt);       // ".pgm" / ".png"
ImageFormat image_format_from_name(const std::string& name);  // "pgm" / "png"

struct ImageIoError : std::runtime_error {
    enum class Kind {
        OpenFailed,
        MalformedHeader,
        TruncatedPayload,
        UnsupportedBitDepth,
        UnsupportedFormat,
        WriteFailed,
    };
    Kind kind;
    ImageIoError(Kind k, const std::string& msg) : std::runtime_error(msg), kind(k) {}
};

// Reads an 8-bit grayscale PGM (P5) or single-channel PNG, detected from the
// magic bytes. Values map to [0,1] by /255.
ImageTensor read_image(const std::filesystem::path& path);

// Writes 8-bit grayscale (channels must be 1); exact inverse of read_image
// for values on the 1/255 grid.
void write_image(const ImageTensor& img, const std::filesystem::path& path, ImageFormat fmt);

// Bilinear resize (pixel-center aligned); output values stay in [0,1].
ImageTensor resize_bilinear(const ImageTensor& img, int out_h, int out_w);

// Grayscale -> three equal channels.
ImageTensor triplicate(const ImageTensor& img);

}  // namespace mixc
