#include "mscm/image_io.hpp"

#include "mscm/error.hpp"

#include <zlib.h>

#include <array>
#include <atomic>
#include <cctype>
#include <cstring>
#include <fstream>
#include <string>

namespace mscm {

namespace {

constexpr std::array<std::uint8_t, 8> kPngSignature = {137, 80, 78, 71, 13, 10, 26, 10};

std::uint32_t read_be32(const std::uint8_t* p) {
  return (std::uint32_t(p[0]) << 24) | (std::uint32_t(p[1]) << 16) | (std::uint32_t(p[2]) << 8) |
         std::uint32_t(p[3]);
}

void append_be32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 24));
  out.push_back(static_cast<std::uint8_t>(v >> 16));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v));
}

int paeth(int a, int b, int c) {
  const int p = a + b - c;
  const int pa = std::abs(p - a), pb = std::abs(p - b), pc = std::abs(p - c);
  if (pa <= pb && pa <= pc) return a;
  if (pb <= pc) return b;
  return c;
}

void unfilter_rows(std::vector<std::uint8_t>& raw, int height, int row_bytes, int bpp) {
  std::vector<std::uint8_t> prior(static_cast<std::size_t>(row_bytes), 0);
  for (int y = 0; y < height; ++y) {
    std::uint8_t* row = raw.data() + static_cast<std::size_t>(y) * (row_bytes + 1);
    const int filter = row[0];
    std::uint8_t* cur = row + 1;
    switch (filter) {
      case 0:
        break;
      case 1:
        for (int i = bpp; i < row_bytes; ++i) cur[i] = static_cast<std::uint8_t>(cur[i] + cur[i - bpp]);
        break;
      case 2:
        for (int i = 0; i < row_bytes; ++i) cur[i] = static_cast<std::uint8_t>(cur[i] + prior[i]);
        break;
      case 3:
        for (int i = 0; i < row_bytes; ++i) {
          const int left = i >= bpp ? cur[i - bpp] : 0;
          cur[i] = static_cast<std::uint8_t>(cur[i] + (left + prior[i]) / 2);
        }
        break;
      case 4:
        for (int i = 0; i < row_bytes; ++i) {
          const int left = i >= bpp ? cur[i - bpp] : 0;
          const int upleft = i >= bpp ? prior[i - bpp] : 0;
          cur[i] = static_cast<std::uint8_t>(cur[i] + paeth(left, prior[i], upleft));
        }
        break;
      default:
        raise(Errc::bad_image, "unknown PNG filter type " + std::to_string(filter));
    }
    std::memcpy(prior.data(), cur, static_cast<std::size_t>(row_bytes));
  }
}

void append_chunk(std::vector<std::uint8_t>& out, const char type[4],
                  const std::uint8_t* data, std::size_t size) {
  append_be32(out, static_cast<std::uint32_t>(size));
  const std::size_t type_at = out.size();
  out.insert(out.end(), type, type + 4);
  if (size > 0) out.insert(out.end(), data, data + size);
  std::uint32_t crc = crc32(0L, Z_NULL, 0);
  crc = crc32(crc, out.data() + type_at, static_cast<uInt>(4 + size));
  append_be32(out, crc);
}

// --- PNM helpers -----------------------------------------------------------

struct TokenReader {
  const std::vector<std::uint8_t>& bytes;
  std::size_t pos = 0;

  std::string next() {
    while (pos < bytes.size()) {
      const char c = static_cast<char>(bytes[pos]);
      if (c == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        ++pos;
      } else {
        break;
      }
    }
    std::size_t start = pos;
    while (pos < bytes.size() && !std::isspace(static_cast<unsigned char>(bytes[pos]))) ++pos;
    if (start == pos) raise(Errc::bad_image, "truncated PNM header");
    return std::string(bytes.begin() + static_cast<std::ptrdiff_t>(start),
                       bytes.begin() + static_cast<std::ptrdiff_t>(pos));
  }

  int next_int() {
    const std::string tok = next();
    try {
      return std::stoi(tok);
    } catch (const std::exception&) {
      raise(Errc::bad_image, "bad PNM header token '" + tok + "'");
    }
  }
};

}  // namespace

RasterImage decode_png(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < 8 || !std::equal(kPngSignature.begin(), kPngSignature.end(), bytes.begin()))
    raise(Errc::bad_image, "not a PNG file");

  int width = 0, height = 0, color_type = -1;
  std::vector<std::uint8_t> idat;
  std::size_t pos = 8;
  bool seen_iend = false;
  while (pos + 8 <= bytes.size() && !seen_iend) {
    const std::uint32_t len = read_be32(&bytes[pos]);
    if (pos + 12 + len > bytes.size()) raise(Errc::bad_image, "truncated PNG chunk");
    const char* type = reinterpret_cast<const char*>(&bytes[pos + 4]);
    const std::uint8_t* data = &bytes[pos + 8];
    std::uint32_t crc = crc32(0L, Z_NULL, 0);
    crc = crc32(crc, &bytes[pos + 4], len + 4);
    if (crc != read_be32(&bytes[pos + 8 + len])) raise(Errc::bad_image, "PNG chunk CRC mismatch");

    if (std::memcmp(type, "IHDR", 4) == 0) {
      if (len != 13) raise(Errc::bad_image, "bad IHDR length");
      width = static_cast<int>(read_be32(data));
      height = static_cast<int>(read_be32(data + 4));
      const int bit_depth = data[8];
      color_type = data[9];
      const int interlace = data[12];
      if (bit_depth != 8) raise(Errc::bad_image, "only 8-bit PNG supported");
      if (color_type != 0 && color_type != 2 && color_type != 4 && color_type != 6)
        raise(Errc::bad_image, "unsupported PNG color type " + std::to_string(color_type));
      if (interlace != 0) raise(Errc::bad_image, "interlaced PNG not supported");
    } else if (std::memcmp(type, "IDAT", 4) == 0) {
      idat.insert(idat.end(), data, data + len);
    } else if (std::memcmp(type, "IEND", 4) == 0) {
      seen_iend = true;
    }
    pos += 12 + len;
  }
  if (width <= 0 || height <= 0 || color_type < 0) raise(Errc::bad_image, "missing IHDR");
  if (idat.empty()) raise(Errc::bad_image, "missing IDAT");

  const int src_channels = color_type == 0 ? 1 : color_type == 2 ? 3 : color_type == 4 ? 2 : 4;
  const int row_bytes = width * src_channels;
  const std::size_t raw_size = static_cast<std::size_t>(height) * (row_bytes + 1);
  std::vector<std::uint8_t> raw(raw_size);
  uLongf dest_len = raw_size;
  const int zrc = uncompress(raw.data(), &dest_len, idat.data(), static_cast<uLong>(idat.size()));
  if (zrc != Z_OK || dest_len != raw_size) raise(Errc::bad_image, "PNG inflate failed");
  unfilter_rows(raw, height, row_bytes, src_channels);

  const int dst_channels = src_channels >= 3 ? 3 : 1;
  RasterImage img(width, height, dst_channels);
  for (int y = 0; y < height; ++y) {
    const std::uint8_t* row = raw.data() + static_cast<std::size_t>(y) * (row_bytes + 1) + 1;
    for (int x = 0; x < width; ++x)
      for (int c = 0; c < dst_channels; ++c) img.at(x, y, c) = row[x * src_channels + c];
  }
  return img;
}

RasterImage decode_pnm(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P') raise(Errc::bad_image, "not a PNM file");
  const char kind = static_cast<char>(bytes[1]);
  if (kind != '2' && kind != '3' && kind != '5' && kind != '6')
    raise(Errc::bad_image, "unsupported PNM variant P" + std::string(1, kind));
  const bool binary = kind == '5' || kind == '6';
  const int channels = (kind == '3' || kind == '6') ? 3 : 1;

  TokenReader reader{bytes, 2};
  const int width = reader.next_int();
  const int height = reader.next_int();
  const int maxval = reader.next_int();
  if (width <= 0 || height <= 0) raise(Errc::bad_image, "bad PNM dimensions");
  if (maxval != 255) raise(Errc::bad_image, "only maxval 255 PNM supported");

  RasterImage img(width, height, channels);
  const std::size_t count = img.data.size();
  if (binary) {
    const std::size_t start = reader.pos + 1;  // single whitespace after maxval
    if (start + count > bytes.size()) raise(Errc::bad_image, "truncated PNM data");
    std::copy_n(bytes.begin() + static_cast<std::ptrdiff_t>(start), count, img.data.begin());
  } else {
    for (std::size_t i = 0; i < count; ++i) {
      const int v = reader.next_int();
      if (v < 0 || v > 255) raise(Errc::bad_image, "PNM sample out of range");
      img.data[i] = static_cast<std::uint8_t>(v);
    }
  }
  return img;
}

std::vector<std::uint8_t> encode_png(const RasterImage& img) {
  if (img.channels != 1) raise(Errc::bad_image, "PNG encoder writes gray images only");
  const int row_bytes = img.width;
  std::vector<std::uint8_t> raw(static_cast<std::size_t>(img.height) * (row_bytes + 1));
  for (int y = 0; y < img.height; ++y) {
    std::uint8_t* row = raw.data() + static_cast<std::size_t>(y) * (row_bytes + 1);
    row[0] = 0;  // filter: none
    std::memcpy(row + 1, img.data.data() + static_cast<std::size_t>(y) * row_bytes,
                static_cast<std::size_t>(row_bytes));
  }
  uLongf bound = compressBound(static_cast<uLong>(raw.size()));
  std::vector<std::uint8_t> compressed(bound);
  if (compress2(compressed.data(), &bound, raw.data(), static_cast<uLong>(raw.size()), 6) != Z_OK)
    raise(Errc::io_error, "PNG deflate failed");
  compressed.resize(bound);

  std::vector<std::uint8_t> out(kPngSignature.begin(), kPngSignature.end());
  std::uint8_t ihdr[13];
  ihdr[0] = static_cast<std::uint8_t>(img.width >> 24);
  ihdr[1] = static_cast<std::uint8_t>(img.width >> 16);
  ihdr[2] = static_cast<std::uint8_t>(img.width >> 8);
  ihdr[3] = static_cast<std::uint8_t>(img.width);
  ihdr[4] = static_cast<std::uint8_t>(img.height >> 24);
  ihdr[5] = static_cast<std::uint8_t>(img.height >> 16);
  ihdr[6] = static_cast<std::uint8_t>(img.height >> 8);
  ihdr[7] = static_cast<std::uint8_t>(img.height);
  ihdr[8] = 8;   // bit depth
  ihdr[9] = 0;   // gray
  ihdr[10] = 0;  // compression
  ihdr[11] = 0;  // filter
  ihdr[12] = 0;  // no interlace
  append_chunk(out, "IHDR", ihdr, sizeof(ihdr));
  append_chunk(out, "IDAT", compressed.data(), compressed.size());
  append_chunk(out, "IEND", nullptr, 0);
  return out;
}

std::vector<std::uint8_t> encode_pgm(const RasterImage& img) {
  if (img.channels != 1) raise(Errc::bad_image, "PGM encoder writes gray images only");
  std::string header =
      "P5\n" + std::to_string(img.width) + " " + std::to_string(img.height) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.insert(out.end(), img.data.begin(), img.data.end());
  return out;
}

RasterImage decode_image(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() >= 8 && std::equal(kPngSignature.begin(), kPngSignature.end(), bytes.begin()))
    return decode_png(bytes);
  if (bytes.size() >= 2 && bytes[0] == 'P') return decode_pnm(bytes);
  raise(Errc::bad_image, "unrecognized image format");
}

RasterImage load_image(const std::filesystem::path& path) {
  try {
    return decode_image(read_file(path));
  } catch (const Error& e) {
    if (e.code() == Errc::bad_image) raise(Errc::bad_image, path.string() + ": " + e.what());
    throw;
  }
}

void save_png(const std::filesystem::path& path, const RasterImage& img) {
  const auto bytes = encode_png(img);
  write_file_atomic(path, bytes.data(), bytes.size());
}

void save_pgm(const std::filesystem::path& path, const RasterImage& img) {
  const auto bytes = encode_pgm(img);
  write_file_atomic(path, bytes.data(), bytes.size());
}

RasterImage mask_to_raster(const MaskArray& mask) {
  RasterImage img(static_cast<int>(mask.cols()), static_cast<int>(mask.rows()), 1);
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x) img.at(x, y) = mask(y, x) ? 255 : 0;
  return img;
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(Errc::io_error, "cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return bytes;
}

void write_file_atomic(const std::filesystem::path& path, const void* data, std::size_t size) {
  static std::atomic<std::uint64_t> serial{0};
  const std::filesystem::path tmp =
      path.string() + ".tmp" + std::to_string(serial.fetch_add(1, std::memory_order_relaxed));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) raise(Errc::io_error, "cannot write " + tmp.string());
    out.write(static_cast<const char*>(data), static_cast<std::streamsize>(size));
    if (!out) raise(Errc::io_error, "short write to " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

void write_file_atomic(const std::filesystem::path& path, const std::string& text) {
  write_file_atomic(path, text.data(), text.size());
}

}  // namespace mscm
