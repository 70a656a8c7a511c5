#include "mscm/image.hpp"

#include "mscm/error.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <unordered_map>
#include <vector>

namespace mscm {

namespace {

constexpr int kBorderMargin = 2;

// 256-bin Otsu threshold over a [0,1] field; returns the first bin of the
// upper class, or -1 when no split exists (constant field).
int otsu_threshold_bin(const ArrayXX& gray) {
  std::array<std::int64_t, 256> hist{};
  const double* p = gray.data();
  const std::ptrdiff_t n = gray.size();
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    int bin = static_cast<int>(p[i] * 256.0);
    bin = std::clamp(bin, 0, 255);
    ++hist[static_cast<std::size_t>(bin)];
  }

  const double total = static_cast<double>(n);
  double sum_all = 0;
  for (int b = 0; b < 256; ++b) sum_all += static_cast<double>(b) * static_cast<double>(hist[b]);

  double best_var = 0, w0 = 0, sum0 = 0;
  int best_bin = -1;
  for (int b = 0; b < 255; ++b) {
    w0 += static_cast<double>(hist[b]);
    if (w0 == 0) continue;
    const double w1 = total - w0;
    if (w1 == 0) break;
    sum0 += static_cast<double>(b) * static_cast<double>(hist[b]);
    const double m0 = sum0 / w0;
    const double m1 = (sum_all - sum0) / w1;
    const double var = w0 * w1 * (m0 - m1) * (m0 - m1);
    if (var > best_var) {
      best_var = var;
      best_bin = b + 1;
    }
  }
  return best_bin;
}

// Flood fill (4-connected) over `value` pixels; marks labels, returns size.
std::int64_t flood_label(const MaskArray& field, std::uint8_t value,
                         Eigen::Array<std::int32_t, Eigen::Dynamic, Eigen::Dynamic>& labels,
                         int sx, int sy, std::int32_t label,
                         std::vector<std::pair<int, int>>& stack) {
  const int w = static_cast<int>(field.cols()), h = static_cast<int>(field.rows());
  std::int64_t size = 0;
  stack.clear();
  stack.emplace_back(sx, sy);
  labels(sy, sx) = label;
  while (!stack.empty()) {
    const auto [x, y] = stack.back();
    stack.pop_back();
    ++size;
    const std::array<std::pair<int, int>, 4> nbrs = {{{x - 1, y}, {x + 1, y}, {x, y - 1}, {x, y + 1}}};
    for (const auto& [nx, ny] : nbrs) {
      if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
      if (field(ny, nx) != value || labels(ny, nx) >= 0) continue;
      labels(ny, nx) = label;
      stack.emplace_back(nx, ny);
    }
  }
  return size;
}

struct SegmentResult {
  MaskArray mask;
  int pad_left = 0, pad_top = 0, pad_right = 0, pad_bottom = 0;
};

SegmentResult segment_impl(const ArrayXX& gray) {
  const int w = static_cast<int>(gray.cols()), h = static_cast<int>(gray.rows());
  if (w < 1 || h < 1) raise(Errc::empty_foreground, "empty gray field");

  const int thresh = otsu_threshold_bin(gray);
  if (thresh < 0) raise(Errc::empty_foreground, "constant gray field, nothing to segment");
  const double cut = static_cast<double>(thresh) / 256.0;

  MaskArray bright(h, w);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) bright(y, x) = gray(y, x) >= cut ? 1 : 0;

  // The object class is the one less represented on the image border; the
  // border belongs to the background regardless of scan polarity.
  std::int64_t border_bright = 0, border_total = 0;
  for (int x = 0; x < w; ++x) {
    border_bright += bright(0, x) + bright(h - 1, x);
    border_total += 2;
  }
  for (int y = 1; y + 1 < h; ++y) {
    border_bright += bright(y, 0) + bright(y, w - 1);
    border_total += 2;
  }
  const bool foreground_is_bright = 2 * border_bright <= border_total;

  MaskArray fg(h, w);
  std::int64_t fg_count = 0;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      fg(y, x) = (bright(y, x) != 0) == foreground_is_bright ? 1 : 0;
      fg_count += fg(y, x);
    }
  if (fg_count == 0) raise(Errc::empty_foreground, "no foreground pixels after threshold");

  // Largest 4-connected foreground component; ties keep the first in scan order.
  Eigen::Array<std::int32_t, Eigen::Dynamic, Eigen::Dynamic> labels(h, w);
  labels.setConstant(-1);
  std::vector<std::pair<int, int>> stack;
  std::int32_t next_label = 0, best_label = -1;
  std::int64_t best_size = 0;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      if (fg(y, x) == 0 || labels(y, x) >= 0) continue;
      const std::int64_t size = flood_label(fg, 1, labels, x, y, next_label, stack);
      if (size > best_size) {
        best_size = size;
        best_label = next_label;
      }
      ++next_label;
    }
  MaskArray mask(h, w);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) mask(y, x) = labels(y, x) == best_label ? 1 : 0;

  // Fill interior holes: background not reachable from the border is inside.
  Eigen::Array<std::int32_t, Eigen::Dynamic, Eigen::Dynamic> bg_labels(h, w);
  bg_labels.setConstant(-1);
  for (int x = 0; x < w; ++x)
    for (int y : {0, h - 1})
      if (mask(y, x) == 0 && bg_labels(y, x) < 0) flood_label(mask, 0, bg_labels, x, y, 0, stack);
  for (int y = 0; y < h; ++y)
    for (int x : {0, w - 1})
      if (mask(y, x) == 0 && bg_labels(y, x) < 0) flood_label(mask, 0, bg_labels, x, y, 0, stack);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      if (mask(y, x) == 0 && bg_labels(y, x) < 0) mask(y, x) = 1;

  // Pad so the foreground keeps a 2 px margin from every border.
  int min_x = w, max_x = -1, min_y = h, max_y = -1;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      if (mask(y, x)) {
        min_x = std::min(min_x, x);
        max_x = std::max(max_x, x);
        min_y = std::min(min_y, y);
        max_y = std::max(max_y, y);
      }
  SegmentResult result;
  result.pad_left = std::max(0, kBorderMargin - min_x);
  result.pad_top = std::max(0, kBorderMargin - min_y);
  result.pad_right = std::max(0, kBorderMargin - (w - 1 - max_x));
  result.pad_bottom = std::max(0, kBorderMargin - (h - 1 - max_y));
  if (result.pad_left || result.pad_top || result.pad_right || result.pad_bottom) {
    MaskArray padded(h + result.pad_top + result.pad_bottom, w + result.pad_left + result.pad_right);
    padded.setZero();
    padded.block(result.pad_top, result.pad_left, h, w) = mask;
    result.mask = std::move(padded);
  } else {
    result.mask = std::move(mask);
  }
  return result;
}

}  // namespace

RasterImage::RasterImage(int w, int h, int c) : width(w), height(h), channels(c) {
  if (w < 1 || h < 1) raise(Errc::bad_image, "non-positive image dimensions");
  if (c != 1 && c != 3)
    raise(Errc::unsupported_channels, std::to_string(c) + " channels (want 1 or 3)");
  data.assign(static_cast<std::size_t>(w) * h * c, 0);
}

ArrayXX to_gray(const RasterImage& img) {
  if (img.channels != 1 && img.channels != 3)
    raise(Errc::unsupported_channels, std::to_string(img.channels) + " channels (want 1 or 3)");
  ArrayXX gray(img.height, img.width);
  constexpr double wr = 0.299, wg = 0.587;
  constexpr double wb = 1.0 - wr - wg;  // keeps wr+wg+wb == 1 exactly
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      if (img.channels == 1) {
        gray(y, x) = img.at(x, y) / 255.0;
      } else {
        gray(y, x) = (img.at(x, y, 0) / 255.0) * wr + (img.at(x, y, 1) / 255.0) * wg +
                     (img.at(x, y, 2) / 255.0) * wb;
      }
    }
  }
  return gray;
}

MaskArray segment(const ArrayXX& gray) { return segment_impl(gray).mask; }

LeafImage make_leaf(const ArrayXX& gray) {
  SegmentResult seg = segment_impl(gray);
  const int h = static_cast<int>(gray.rows()), w = static_cast<int>(gray.cols());
  if (seg.mask.rows() == h && seg.mask.cols() == w) return LeafImage{gray, std::move(seg.mask)};

  // Edge-replicated gray padding keeps background statistics at the rim.
  ArrayXX padded(seg.mask.rows(), seg.mask.cols());
  for (Eigen::Index y = 0; y < padded.rows(); ++y) {
    const int sy = std::clamp(static_cast<int>(y) - seg.pad_top, 0, h - 1);
    for (Eigen::Index x = 0; x < padded.cols(); ++x) {
      const int sx = std::clamp(static_cast<int>(x) - seg.pad_left, 0, w - 1);
      padded(y, x) = gray(sy, sx);
    }
  }
  return LeafImage{std::move(padded), std::move(seg.mask)};
}

PointMatrix trace_boundary(const MaskArray& mask) {
  const int w = static_cast<int>(mask.cols()), h = static_cast<int>(mask.rows());

  // Clockwise Moore ring in image coordinates (y grows downward), W first.
  static constexpr std::array<std::array<int, 2>, 8> kRing = {
      {{-1, 0}, {-1, -1}, {0, -1}, {1, -1}, {1, 0}, {1, 1}, {0, 1}, {-1, 1}}};
  const auto ring_index = [](int dx, int dy) {
    for (int i = 0; i < 8; ++i)
      if (kRing[static_cast<std::size_t>(i)][0] == dx && kRing[static_cast<std::size_t>(i)][1] == dy)
        return i;
    return -1;
  };
  const auto on = [&](int x, int y) {
    return x >= 0 && y >= 0 && x < w && y < h && mask(y, x) != 0;
  };

  // Topmost-leftmost foreground pixel; its west neighbor is background.
  int sx = -1, sy = -1;
  for (int y = 0; y < h && sx < 0; ++y)
    for (int x = 0; x < w; ++x)
      if (mask(y, x)) {
        sx = x;
        sy = y;
        break;
      }
  if (sx < 0) raise(Errc::degenerate_region, "mask has no foreground");

  // Walk states are (pixel, backtrack direction); Jacob's stopping criterion
  // in state form: the walk is deterministic, so the first repeated state
  // delimits exactly one boundary cycle.
  std::vector<std::array<int, 2>> chain;
  std::unordered_map<std::uint64_t, std::size_t> seen;
  const auto encode = [&](int x, int y, int dir) {
    return (static_cast<std::uint64_t>(y) * static_cast<std::uint64_t>(w) +
            static_cast<std::uint64_t>(x)) * 8 + static_cast<std::uint64_t>(dir);
  };

  chain.push_back({sx, sy});
  int px = sx, py = sy;      // current boundary pixel
  int bx = sx - 1, by = sy;  // backtrack: last background cell examined
  const std::size_t guard = static_cast<std::size_t>(w) * static_cast<std::size_t>(h) * 8 + 8;
  while (chain.size() < guard) {
    const int from = ring_index(bx - px, by - py);
    const auto [it, inserted] = seen.emplace(encode(px, py, from), chain.size() - 1);
    if (!inserted) {
      // One full cycle between the two occurrences of this state.
      chain.erase(chain.begin(), chain.begin() + static_cast<std::ptrdiff_t>(it->second));
      chain.pop_back();  // current pixel already heads the cycle
      break;
    }
    int found = -1;
    int nbx = bx, nby = by;  // backtrack for the next step
    for (int step = 1; step <= 8; ++step) {
      const int idx = (from + step) % 8;
      const int cx = px + kRing[static_cast<std::size_t>(idx)][0];
      const int cy = py + kRing[static_cast<std::size_t>(idx)][1];
      if (on(cx, cy)) {
        found = idx;
        break;
      }
      nbx = cx;
      nby = cy;
    }
    if (found < 0) break;  // isolated pixel
    chain.push_back({px + kRing[static_cast<std::size_t>(found)][0],
                     py + kRing[static_cast<std::size_t>(found)][1]});
    px = chain.back()[0];
    py = chain.back()[1];
    bx = nbx;
    by = nby;
  }

  if (chain.size() < 8)
    raise(Errc::degenerate_region,
          "boundary has only " + std::to_string(chain.size()) + " points");

  PointMatrix pts(static_cast<Eigen::Index>(chain.size()), 2);
  for (Eigen::Index i = 0; i < pts.rows(); ++i) {
    pts(i, 0) = chain[static_cast<std::size_t>(i)][0];
    pts(i, 1) = chain[static_cast<std::size_t>(i)][1];
  }

  // Normalize orientation: positive signed area.
  double area2 = 0;
  for (Eigen::Index i = 0; i < pts.rows(); ++i) {
    const Eigen::Index j = (i + 1) % pts.rows();
    area2 += pts(i, 0) * pts(j, 1) - pts(j, 0) * pts(i, 1);
  }
  if (area2 < 0) pts = pts.colwise().reverse().eval();
  return pts;
}

double sample_mask(const MaskArray& mask, const Vec2& p) {
  const int x = std::clamp(static_cast<int>(std::lround(p.x())), 0, static_cast<int>(mask.cols()) - 1);
  const int y = std::clamp(static_cast<int>(std::lround(p.y())), 0, static_cast<int>(mask.rows()) - 1);
  return mask(y, x) ? 1.0 : 0.0;
}

double sample_gray(const ArrayXX& gray, const Vec2& p) {
  const int w = static_cast<int>(gray.cols()), h = static_cast<int>(gray.rows());
  const double x = std::clamp(p.x(), 0.0, static_cast<double>(w - 1));
  const double y = std::clamp(p.y(), 0.0, static_cast<double>(h - 1));
  const int x0 = std::clamp(static_cast<int>(x), 0, std::max(w - 2, 0));
  const int y0 = std::clamp(static_cast<int>(y), 0, std::max(h - 2, 0));
  const int x1 = std::min(x0 + 1, w - 1);
  const int y1 = std::min(y0 + 1, h - 1);
  const double fx = x - x0, fy = y - y0;
  // Difference form: exact for constant fields.
  const double g00 = gray(y0, x0), g10 = gray(y0, x1), g01 = gray(y1, x0), g11 = gray(y1, x1);
  return g00 + fx * (g10 - g00) + fy * (g01 - g00) + fx * fy * (g11 - g10 - g01 + g00);
}

}  // namespace mscm
