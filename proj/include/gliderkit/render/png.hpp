#pragma once

// PNG encode/decode through libpng's simplified API.

#include <png.h>

#include <cstdint>
#include <string>
#include <vector>

#include "gliderkit/error.hpp"
#include "gliderkit/render/image.hpp"

namespace gliderkit::render {

inline std::vector<std::uint8_t> encode_png(const Canvas& c) {
  png_image img{};
  img.version = PNG_IMAGE_VERSION;
  img.width = static_cast<png_uint_32>(c.width());
  img.height = static_cast<png_uint_32>(c.height());
  img.format = PNG_FORMAT_RGB;
  png_alloc_size_t size = 0;
  if (!png_image_write_to_memory(&img, nullptr, &size, 0, c.data().data(), 0, nullptr)) {
    throw Error(std::string("png encode failed: ") + img.message);
  }
  std::vector<std::uint8_t> out(size);
  if (!png_image_write_to_memory(&img, out.data(), &size, 0, c.data().data(), 0, nullptr)) {
    throw Error(std::string("png encode failed: ") + img.message);
  }
  out.resize(size);
  return out;
}

inline Canvas decode_png(const std::vector<std::uint8_t>& bytes) {
  png_image img{};
  img.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&img, bytes.data(), bytes.size())) {
    throw ParseError(std::string("png decode failed: ") + img.message, 0);
  }
  img.format = PNG_FORMAT_RGB;
  std::vector<std::uint8_t> buf(PNG_IMAGE_SIZE(img));
  if (!png_image_finish_read(&img, nullptr, buf.data(), 0, nullptr)) {
    png_image_free(&img);
    throw ParseError(std::string("png decode failed: ") + img.message, 0);
  }
  Canvas c(static_cast<int>(img.width), static_cast<int>(img.height));
  for (int y = 0; y < c.height(); ++y) {
    for (int x = 0; x < c.width(); ++x) {
      const std::size_t k = (static_cast<std::size_t>(y) * img.width + static_cast<std::size_t>(x)) * 3;
      c.set(x, y, {buf[k], buf[k + 1], buf[k + 2]});
    }
  }
  return c;
}

}  // namespace gliderkit::render
