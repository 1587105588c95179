#include "caries/pgm.hpp"

#include <cctype>
#include <fstream>
#include <iterator>
#include <string>

#include "caries/error.hpp"

namespace caries {

void write_pgm(const GrayImage& image, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  const std::string header = "P5\n" + std::to_string(image.width()) + " " +
                             std::to_string(image.height()) + "\n255\n";
  out.write(header.data(), static_cast<std::streamsize>(header.size()));
  const auto px = image.data();
  out.write(reinterpret_cast<const char*>(px.data()), static_cast<std::streamsize>(px.size()));
  if (!out) throw IoError("failed writing " + path.string());
}

namespace {

// Reads one whitespace-delimited header token, skipping '#' comments.
std::string next_token(const std::string& buf, std::size_t& pos) {
  for (;;) {
    while (pos < buf.size() && std::isspace(static_cast<unsigned char>(buf[pos]))) ++pos;
    if (pos < buf.size() && buf[pos] == '#') {
      while (pos < buf.size() && buf[pos] != '\n') ++pos;
      continue;
    }
    break;
  }
  const std::size_t start = pos;
  while (pos < buf.size() && !std::isspace(static_cast<unsigned char>(buf[pos]))) ++pos;
  if (start == pos) throw FormatError("unexpected end of PGM header", pos);
  return buf.substr(start, pos - start);
}

int parse_positive(const std::string& tok, std::size_t pos) {
  int value = 0;
  for (char ch : tok) {
    if (!std::isdigit(static_cast<unsigned char>(ch)) || value > 1'000'000) {
      throw FormatError("bad PGM header field '" + tok + "'", pos);
    }
    value = value * 10 + (ch - '0');
  }
  if (value <= 0) throw FormatError("non-positive PGM header field", pos);
  return value;
}

}  // namespace

GrayImage read_pgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  const std::string buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

  std::size_t pos = 0;
  if (next_token(buf, pos) != "P5") throw FormatError(path.string() + ": not a P5 PGM", 0);
  const int width = parse_positive(next_token(buf, pos), pos);
  const int height = parse_positive(next_token(buf, pos), pos);
  const int maxval = parse_positive(next_token(buf, pos), pos);
  if (maxval != 255) throw FormatError(path.string() + ": only maxval 255 is supported", pos);
  ++pos;  // single whitespace byte before the raster
  const std::size_t n = static_cast<std::size_t>(width) * height;
  if (buf.size() < pos + n) throw FormatError(path.string() + ": truncated raster", buf.size());
  std::vector<std::uint8_t> data(buf.begin() + static_cast<std::ptrdiff_t>(pos),
                                 buf.begin() + static_cast<std::ptrdiff_t>(pos + n));
  return GrayImage(width, height, std::move(data));
}

}  // namespace caries
