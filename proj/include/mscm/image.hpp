// Raster containers and the image-side pipeline: gray conversion,
// segmentation into a single foreground region, and boundary tracing.

#ifndef MSCM_IMAGE_HPP
#define MSCM_IMAGE_HPP

#include "mscm/types.hpp"

#include <vector>

namespace mscm {

// 8-bit raster, row-major, interleaved channels (1 = gray, 3 = RGB).
struct RasterImage {
  int width = 0;
  int height = 0;
  int channels = 1;
  std::vector<std::uint8_t> data;

  RasterImage() = default;
  RasterImage(int w, int h, int c);

  std::uint8_t& at(int x, int y, int c = 0) {
    return data[static_cast<std::size_t>(y * width + x) * channels + c];
  }
  std::uint8_t at(int x, int y, int c = 0) const {
    return data[static_cast<std::size_t>(y * width + x) * channels + c];
  }
};

// Gray field in [0,1] plus a binary mask of the region of interest.
// Invariants: same dimensions; the mask holds exactly one 4-connected
// component, hole-free, at least 2 px away from every border.
struct LeafImage {
  ArrayXX gray;
  MaskArray mask;

  int width() const { return static_cast<int>(gray.cols()); }
  int height() const { return static_cast<int>(gray.rows()); }
};

// Luminance conversion to [0,1]. 3-channel input uses 0.299/0.587/0.114.
ArrayXX to_gray(const RasterImage& img);

// Otsu threshold -> polarity pick -> largest 4-connected component -> hole
// fill -> pad so the foreground keeps a 2 px border margin. The returned mask
// may therefore be larger than `gray`.
MaskArray segment(const ArrayXX& gray);

// segment() plus matching edge-replicated padding of the gray field.
LeafImage make_leaf(const ArrayXX& gray);

// Closed 8-connected boundary chain of the mask's single component, one pixel
// center per row, oriented so the signed polygon area is positive. Moore
// neighbor tracing with Jacob's stopping criterion.
PointMatrix trace_boundary(const MaskArray& mask);

// Field samplers shared by the chord integrals. `p` is in pixel-center
// coordinates; lookups clamp to the field rectangle.
double sample_mask(const MaskArray& mask, const Vec2& p);
double sample_gray(const ArrayXX& gray, const Vec2& p);

}  // namespace mscm

#endif  // MSCM_IMAGE_HPP
