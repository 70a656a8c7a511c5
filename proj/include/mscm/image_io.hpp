// Raster file IO: 8-bit PNG (gray / gray+alpha / RGB / RGBA, non-interlaced)
// and PGM/PPM (binary or ASCII, maxval 255). PNG inflate/deflate goes through
// zlib; alpha channels are dropped on load.

#ifndef MSCM_IMAGE_IO_HPP
#define MSCM_IMAGE_IO_HPP

#include "mscm/image.hpp"

#include <filesystem>

namespace mscm {

RasterImage load_image(const std::filesystem::path& path);

RasterImage decode_image(const std::vector<std::uint8_t>& bytes);
RasterImage decode_png(const std::vector<std::uint8_t>& bytes);
RasterImage decode_pnm(const std::vector<std::uint8_t>& bytes);

// Gray 8-bit only; `img` must have channels == 1.
std::vector<std::uint8_t> encode_png(const RasterImage& img);
std::vector<std::uint8_t> encode_pgm(const RasterImage& img);

void save_png(const std::filesystem::path& path, const RasterImage& img);
void save_pgm(const std::filesystem::path& path, const RasterImage& img);

// 0/255 rendering of a binary mask, row-major.
RasterImage mask_to_raster(const MaskArray& mask);

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);
// Writes to a temporary sibling then renames, so readers never see a torn file.
void write_file_atomic(const std::filesystem::path& path, const void* data, std::size_t size);
void write_file_atomic(const std::filesystem::path& path, const std::string& text);

}  // namespace mscm

#endif  // MSCM_IMAGE_IO_HPP
