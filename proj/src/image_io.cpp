#include "sattrack/image_io.hpp"

#include <bit>
#include <cctype>
#include <charconv>
#include <cstring>
#include <fstream>
#include <sstream>

namespace sattrack {
namespace {

static_assert(std::endian::native == std::endian::little, "PFM writer assumes little-endian host");

class HeaderReader {
 public:
  explicit HeaderReader(std::string_view bytes) : bytes_(bytes) {}

  std::size_t pos() const { return pos_; }

  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      const char c = bytes_[pos_];
      if (c == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  std::string_view token() {
    skip_space_and_comments();
    const std::size_t start = pos_;
    while (pos_ < bytes_.size() && !std::isspace(static_cast<unsigned char>(bytes_[pos_])) &&
           bytes_[pos_] != '#')
      ++pos_;
    if (start == pos_) throw ParseError("unexpected end of header", start);
    return bytes_.substr(start, pos_ - start);
  }

  long integer(const char* what) {
    const std::size_t start = pos_;
    auto tok = token();
    long value = 0;
    auto [end, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
    if (ec != std::errc{} || end != tok.data() + tok.size())
      throw ParseError(std::string("invalid ") + what + " '" + std::string(tok) + "'", start);
    return value;
  }

  double real(const char* what) {
    const std::size_t start = pos_;
    auto tok = token();
    // from_chars for double is unavailable on some standard libraries
    std::string copy(tok);
    char* end = nullptr;
    const double value = std::strtod(copy.c_str(), &end);
    if (end != copy.c_str() + copy.size())
      throw ParseError(std::string("invalid ") + what + " '" + copy + "'", start);
    return value;
  }

  /// Exactly one whitespace byte separates the header from the payload.
  void end_of_header() {
    if (pos_ >= bytes_.size() || !std::isspace(static_cast<unsigned char>(bytes_[pos_])))
      throw ParseError("missing whitespace after header", pos_);
    ++pos_;
  }

 private:
  std::string_view bytes_;
  std::size_t pos_ = 0;
};

void check_payload(std::string_view bytes, std::size_t offset, std::size_t expected) {
  const std::size_t actual = bytes.size() - offset;
  if (actual < expected)
    throw ParseError("truncated payload: expected " + std::to_string(expected) + " bytes, got " +
                         std::to_string(actual),
                     bytes.size());
}

std::pair<int, int> read_dims(HeaderReader& reader) {
  const std::size_t at = reader.pos();
  const long w = reader.integer("width");
  const long h = reader.integer("height");
  if (w <= 0 || h <= 0 || w > (1L << 20) || h > (1L << 20))
    throw ParseError("unsupported image dimensions " + std::to_string(w) + "x" + std::to_string(h),
                     at);
  return {static_cast<int>(w), static_cast<int>(h)};
}

AnyImage decode_pgm(std::string_view bytes, HeaderReader& reader) {
  const auto [w, h] = read_dims(reader);
  const std::size_t maxval_at = reader.pos();
  const long maxval = reader.integer("maxval");
  if (maxval < 1 || maxval > 65535)
    throw ParseError("unsupported maxval " + std::to_string(maxval), maxval_at);
  reader.end_of_header();
  const std::size_t off = reader.pos();
  const std::size_t n = static_cast<std::size_t>(w) * h;
  if (maxval <= 255) {
    check_payload(bytes, off, n);
    GrayImage8 img(w, h);
    std::memcpy(img.data().data(), bytes.data() + off, n);
    return img;
  }
  check_payload(bytes, off, 2 * n);
  GrayImage16 img(w, h);
  auto dst = img.data();
  for (std::size_t i = 0; i < n; ++i) {
    const auto hi = static_cast<unsigned char>(bytes[off + 2 * i]);
    const auto lo = static_cast<unsigned char>(bytes[off + 2 * i + 1]);
    dst[i] = static_cast<std::uint16_t>((hi << 8) | lo);
  }
  return img;
}

AnyImage decode_ppm(std::string_view bytes, HeaderReader& reader) {
  const auto [w, h] = read_dims(reader);
  const std::size_t maxval_at = reader.pos();
  const long maxval = reader.integer("maxval");
  if (maxval != 255) throw ParseError("unsupported PPM maxval " + std::to_string(maxval), maxval_at);
  reader.end_of_header();
  const std::size_t off = reader.pos();
  const std::size_t n = static_cast<std::size_t>(w) * h * 3;
  check_payload(bytes, off, n);
  RgbImage8 img(w, h);
  std::memcpy(img.data().data(), bytes.data() + off, n);
  return img;
}

AnyImage decode_pfm(std::string_view bytes, HeaderReader& reader) {
  const auto [w, h] = read_dims(reader);
  const std::size_t scale_at = reader.pos();
  const double scale = reader.real("scale");
  if (!(scale < 0.0))
    throw ParseError("only little-endian PFM (negative scale) is supported", scale_at);
  reader.end_of_header();
  const std::size_t off = reader.pos();
  const std::size_t row_bytes = static_cast<std::size_t>(w) * sizeof(float);
  check_payload(bytes, off, row_bytes * h);
  GrayImageF img(w, h);
  for (int y = 0; y < h; ++y)
    std::memcpy(img.row(h - 1 - y).data(), bytes.data() + off + row_bytes * y, row_bytes);
  return img;
}

}  // namespace

AnyImage decode_image(std::string_view bytes) {
  if (bytes.size() < 2) throw ParseError("file too short for a magic number", bytes.size());
  HeaderReader reader(bytes.substr(0));
  const auto magic = reader.token();
  if (magic == "P5") return decode_pgm(bytes, reader);
  if (magic == "P6") return decode_ppm(bytes, reader);
  if (magic == "Pf") return decode_pfm(bytes, reader);
  throw ParseError("unsupported magic '" + std::string(magic) + "'", 0);
}

AnyImage read_image(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return decode_image(ss.view());
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what(), e.offset());
  }
}

std::string encode_image(const AnyImage& img) {
  std::string out;
  std::visit(
      [&out](const auto& im) {
        using Img = std::decay_t<decltype(im)>;
        const std::string dims = std::to_string(im.width()) + " " + std::to_string(im.height());
        if constexpr (std::is_same_v<Img, GrayImage8>) {
          out = "P5\n" + dims + "\n255\n";
          for (int y = 0; y < im.height(); ++y) {
            auto r = im.row(y);
            out.append(reinterpret_cast<const char*>(r.data()), r.size());
          }
        } else if constexpr (std::is_same_v<Img, GrayImage16>) {
          out = "P5\n" + dims + "\n65535\n";
          for (int y = 0; y < im.height(); ++y)
            for (std::uint16_t v : im.row(y)) {
              out.push_back(static_cast<char>(v >> 8));
              out.push_back(static_cast<char>(v & 0xff));
            }
        } else if constexpr (std::is_same_v<Img, RgbImage8>) {
          out = "P6\n" + dims + "\n255\n";
          for (int y = 0; y < im.height(); ++y) {
            auto r = im.row(y);
            out.append(reinterpret_cast<const char*>(r.data()), r.size());
          }
        } else {
          out = "Pf\n" + dims + "\n-1.0\n";
          for (int y = im.height() - 1; y >= 0; --y) {
            auto r = im.row(y);
            out.append(reinterpret_cast<const char*>(r.data()), r.size() * sizeof(float));
          }
        }
      },
      img);
  return out;
}

void write_image(const AnyImage& img, const std::filesystem::path& path) {
  const std::string bytes = encode_image(img);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw DataError("short write to " + path.string());
}

}  // namespace sattrack
