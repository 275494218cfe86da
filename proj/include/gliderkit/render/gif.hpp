#pragma once

// Animated GIF89a writer: fixed 256-colour palette (6x7x6 colour cube plus
// four greys), LZW image data, infinite loop. A small reader is included so
// tests can decode what was written.

#include <array>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "gliderkit/error.hpp"
#include "gliderkit/render/image.hpp"

namespace gliderkit::render {

namespace gif_detail {

inline constexpr int kRedLevels = 6, kGreenLevels = 7, kBlueLevels = 6;
inline constexpr std::array<std::uint8_t, 4> kGreys = {32, 96, 160, 224};

inline std::uint8_t level(int k, int levels) {
  return static_cast<std::uint8_t>((k * 255 + (levels - 1) / 2) / (levels - 1));
}

inline std::array<Rgb, 256> palette() {
  std::array<Rgb, 256> p{};
  std::size_t n = 0;
  for (int r = 0; r < kRedLevels; ++r) {
    for (int g = 0; g < kGreenLevels; ++g) {
      for (int b = 0; b < kBlueLevels; ++b) {
        p[n++] = {level(r, kRedLevels), level(g, kGreenLevels), level(b, kBlueLevels)};
      }
    }
  }
  for (auto v : kGreys) p[n++] = {v, v, v};
  return p;
}

inline int nearest_level(int v, int levels) { return (v * (levels - 1) + 127) / 255; }

inline std::uint8_t quantize(Rgb c) {
  const int r = nearest_level(c.r, kRedLevels), g = nearest_level(c.g, kGreenLevels), b = nearest_level(c.b, kBlueLevels);
  const std::uint8_t cube = static_cast<std::uint8_t>((r * kGreenLevels + g) * kBlueLevels + b);
  auto err = [](Rgb a, Rgb q) {
    const int dr = a.r - q.r, dg = a.g - q.g, db = a.b - q.b;
    return dr * dr + dg * dg + db * db;
  };
  static const auto pal = palette();
  std::uint8_t best = cube;
  int best_err = err(c, pal[cube]);
  for (std::size_t k = 0; k < kGreys.size(); ++k) {
    const auto idx = static_cast<std::uint8_t>(kRedLevels * kGreenLevels * kBlueLevels + k);
    if (const int e = err(c, pal[idx]); e < best_err) {
      best = idx;
      best_err = e;
    }
  }
  return best;
}

class BitWriter {
 public:
  void put(unsigned code, int bits) {
    acc_ |= static_cast<std::uint32_t>(code) << nbits_;
    nbits_ += bits;
    while (nbits_ >= 8) {
      bytes_.push_back(static_cast<std::uint8_t>(acc_ & 0xFF));
      acc_ >>= 8;
      nbits_ -= 8;
    }
  }
  std::vector<std::uint8_t> finish() {
    if (nbits_ > 0) bytes_.push_back(static_cast<std::uint8_t>(acc_ & 0xFF));
    acc_ = 0;
    nbits_ = 0;
    return std::move(bytes_);
  }

 private:
  std::vector<std::uint8_t> bytes_;
  std::uint32_t acc_ = 0;
  int nbits_ = 0;
};

inline std::vector<std::uint8_t> lzw_encode(const std::vector<std::uint8_t>& indices) {
  constexpr unsigned kClear = 256, kEnd = 257, kMaxCode = 4095;
  BitWriter out;
  std::unordered_map<std::uint32_t, unsigned> dict;
  dict.reserve(8192);
  unsigned next = 258;
  int width = 9;
  out.put(kClear, width);
  if (indices.empty()) {
    out.put(kEnd, width);
    return out.finish();
  }
  unsigned prefix = indices[0];
  for (std::size_t k = 1; k < indices.size(); ++k) {
    const std::uint8_t c = indices[k];
    const std::uint32_t key = (static_cast<std::uint32_t>(prefix) << 8) | c;
    if (auto it = dict.find(key); it != dict.end()) {
      prefix = it->second;
      continue;
    }
    out.put(prefix, width);
    if (next <= kMaxCode) {
      dict.emplace(key, next);
      // The decoder widens one code later than the encoder assigns it.
      if (next == (1u << width) && width < 12) ++width;
      ++next;
    } else {
      out.put(kClear, width);
      dict.clear();
      next = 258;
      width = 9;
    }
    prefix = c;
  }
  out.put(prefix, width);
  if (next == (1u << width) && width < 12) ++width;
  out.put(kEnd, width);
  return out.finish();
}

inline void put16(std::vector<std::uint8_t>& v, unsigned x) {
  v.push_back(static_cast<std::uint8_t>(x & 0xFF));
  v.push_back(static_cast<std::uint8_t>((x >> 8) & 0xFF));
}

}  // namespace gif_detail

/// Frames must all share the first frame's size.
inline std::vector<std::uint8_t> encode_gif(const std::vector<Canvas>& frames, int delay_ms = 500) {
  using namespace gif_detail;
  if (frames.empty()) throw RangeError("animation needs at least one frame");
  if (delay_ms < 0) throw RangeError("frame delay must be >= 0");
  const int w = frames.front().width(), h = frames.front().height();
  if (w > 65535 || h > 65535) throw RangeError("animation frame too large for GIF");
  std::vector<std::uint8_t> out = {'G', 'I', 'F', '8', '9', 'a'};
  put16(out, static_cast<unsigned>(w));
  put16(out, static_cast<unsigned>(h));
  out.push_back(0xF7);  // global colour table, 8 bits per primary, 256 entries
  out.push_back(0);
  out.push_back(0);
  for (const auto& c : palette()) {
    out.push_back(c.r);
    out.push_back(c.g);
    out.push_back(c.b);
  }
  // NETSCAPE2.0 application extension: loop forever.
  const std::uint8_t loop[] = {0x21, 0xFF, 0x0B, 'N', 'E', 'T', 'S', 'C', 'A', 'P', 'E', '2', '.', '0', 0x03, 0x01, 0x00, 0x00, 0x00};
  out.insert(out.end(), std::begin(loop), std::end(loop));

  const unsigned delay_cs = static_cast<unsigned>((delay_ms + 5) / 10);
  for (const auto& f : frames) {
    if (f.width() != w || f.height() != h) throw RangeError("animation frames differ in size");
    out.insert(out.end(), {0x21, 0xF9, 0x04, 0x04});  // graphic control, disposal: leave in place
    put16(out, delay_cs);
    out.push_back(0);
    out.push_back(0);
    out.push_back(0x2C);
    put16(out, 0);
    put16(out, 0);
    put16(out, static_cast<unsigned>(w));
    put16(out, static_cast<unsigned>(h));
    out.push_back(0);
    std::vector<std::uint8_t> idx;
    idx.reserve(static_cast<std::size_t>(w) * static_cast<std::size_t>(h));
    const auto& d = f.data();
    for (std::size_t k = 0; k < d.size(); k += 3) idx.push_back(quantize({d[k], d[k + 1], d[k + 2]}));
    out.push_back(8);  // LZW minimum code size
    const auto lzw = lzw_encode(idx);
    for (std::size_t k = 0; k < lzw.size(); k += 255) {
      const std::size_t n = std::min<std::size_t>(255, lzw.size() - k);
      out.push_back(static_cast<std::uint8_t>(n));
      out.insert(out.end(), lzw.begin() + static_cast<long>(k), lzw.begin() + static_cast<long>(k + n));
    }
    out.push_back(0);
  }
  out.push_back(0x3B);
  return out;
}

struct DecodedGif {
  int width = 0, height = 0;
  std::vector<int> delays_cs;
  std::vector<std::vector<std::uint8_t>> frames;  // palette indices
  std::vector<Rgb> palette;
  bool loops = false;
};

/// Reader for the subset encode_gif produces (global palette, full frames).
inline DecodedGif decode_gif(const std::vector<std::uint8_t>& b) {
  DecodedGif g;
  std::size_t p = 0;
  auto need = [&](std::size_t n) {
    if (p + n > b.size()) throw ParseError("truncated GIF", 0);
  };
  auto u8 = [&]() {
    need(1);
    return b[p++];
  };
  auto u16 = [&]() {
    const unsigned lo = u8();
    return lo | (static_cast<unsigned>(u8()) << 8);
  };
  need(6);
  if (std::string(b.begin(), b.begin() + 6) != "GIF89a") throw ParseError("not a GIF89a stream", 0);
  p = 6;
  g.width = static_cast<int>(u16());
  g.height = static_cast<int>(u16());
  const std::uint8_t flags = u8();
  u8();
  u8();
  if (flags & 0x80) {
    const std::size_t n = std::size_t{1} << ((flags & 7) + 1);
    for (std::size_t k = 0; k < n; ++k) {
      const auto r = u8(), gg = u8(), bb = u8();
      g.palette.push_back({r, gg, bb});
    }
  }
  auto sub_blocks = [&]() {
    std::vector<std::uint8_t> data;
    for (;;) {
      const std::uint8_t n = u8();
      if (n == 0) break;
      need(n);
      data.insert(data.end(), b.begin() + static_cast<long>(p), b.begin() + static_cast<long>(p + n));
      p += n;
    }
    return data;
  };
  int pending_delay = 0;
  for (;;) {
    const std::uint8_t tag = u8();
    if (tag == 0x3B) break;
    if (tag == 0x21) {
      const std::uint8_t label = u8();
      const auto data = sub_blocks();
      if (label == 0xF9 && data.size() >= 3) pending_delay = data[1] | (data[2] << 8);
      if (label == 0xFF && data.size() >= 11 && std::string(data.begin(), data.begin() + 11) == "NETSCAPE2.0") g.loops = true;
      continue;
    }
    if (tag != 0x2C) throw ParseError("unexpected GIF block", 0);
    u16();
    u16();
    const unsigned fw = u16(), fh = u16();
    const std::uint8_t fflags = u8();
    if (fflags & 0x80) throw ParseError("local colour tables are not supported", 0);
    const int min_size = u8();
    const auto data = sub_blocks();
    // LZW decode.
    const unsigned clear = 1u << min_size, end = clear + 1;
    std::vector<std::vector<std::uint8_t>> table;
    auto reset = [&] {
      table.assign(clear + 2, {});
      for (unsigned k = 0; k < clear; ++k) table[k] = {static_cast<std::uint8_t>(k)};
    };
    reset();
    int width = min_size + 1;
    std::size_t bitpos = 0;
    auto read = [&]() -> long {
      if (bitpos + static_cast<std::size_t>(width) > data.size() * 8) return -1;
      unsigned v = 0;
      for (int k = 0; k < width; ++k, ++bitpos) {
        if (data[bitpos / 8] & (1u << (bitpos % 8))) v |= 1u << k;
      }
      return v;
    };
    std::vector<std::uint8_t> pix;
    long prev = -1;
    for (;;) {
      const long code = read();
      if (code < 0 || static_cast<unsigned>(code) == end) break;
      if (static_cast<unsigned>(code) == clear) {
        reset();
        width = min_size + 1;
        prev = -1;
        continue;
      }
      std::vector<std::uint8_t> entry;
      if (static_cast<std::size_t>(code) < table.size() && !table[static_cast<std::size_t>(code)].empty()) {
        entry = table[static_cast<std::size_t>(code)];
      } else if (prev >= 0 && static_cast<std::size_t>(code) == table.size()) {
        entry = table[static_cast<std::size_t>(prev)];
        entry.push_back(entry.front());
      } else {
        throw ParseError("corrupt LZW stream", 0);
      }
      pix.insert(pix.end(), entry.begin(), entry.end());
      if (prev >= 0 && table.size() < 4096) {
        auto e = table[static_cast<std::size_t>(prev)];
        e.push_back(entry.front());
        table.push_back(std::move(e));
        if (table.size() == (1u << width) && width < 12) ++width;
      }
      prev = code;
    }
    if (pix.size() != static_cast<std::size_t>(fw) * fh) throw ParseError("GIF frame has the wrong pixel count", 0);
    g.frames.push_back(std::move(pix));
    g.delays_cs.push_back(pending_delay);
  }
  return g;
}

}  // namespace gliderkit::render
