#include "stereopipe/descriptor.hpp"

#include <cstring>
#include <stdexcept>

namespace stereopipe {

int sobel_raw_horiz(const GrayImage& img, int u, int v) {
  const std::uint8_t* p = img.data.data();
  const int w = img.width;
  const std::size_t c = static_cast<std::size_t>(v) * w + u;
  return (p[c - w - 1] - p[c - w + 1]) + 2 * (p[c - 1] - p[c + 1]) +
         (p[c + w - 1] - p[c + w + 1]);
}

int sobel_raw_vert(const GrayImage& img, int u, int v) {
  const std::uint8_t* p = img.data.data();
  const int w = img.width;
  const std::size_t c = static_cast<std::size_t>(v) * w + u;
  return (p[c - w - 1] - p[c + w - 1]) + 2 * (p[c - w] - p[c + w]) +
         (p[c - w + 1] - p[c + w + 1]);
}

SobelPair sobel(const GrayImage& img) {
  if (img.width < kMinImageSize || img.height < kMinImageSize)
    throw std::invalid_argument("image below minimum size " +
                                std::to_string(kMinImageSize));
  SobelPair out;
  out.width = img.width;
  out.height = img.height;
  out.horiz.assign(img.data.size(), 128);
  out.vert.assign(img.data.size(), 128);
  for (int v = 1; v < img.height - 1; ++v) {
    const std::size_t row = static_cast<std::size_t>(v) * img.width;
    for (int u = 1; u < img.width - 1; ++u) {
      out.horiz[row + u] = encode_sobel(sobel_raw_horiz(img, u, v));
      out.vert[row + u] = encode_sobel(sobel_raw_vert(img, u, v));
    }
  }
  return out;
}

namespace {

inline void assemble(const SobelPair& sob, int u, int v, std::uint8_t* out) {
  const std::uint8_t* h = sob.horiz.data();
  const std::uint8_t* vt = sob.vert.data();
  const int w = sob.width;
  const std::size_t c = static_cast<std::size_t>(v) * w + u;
  out[0] = h[c - 2];
  out[1] = h[c - w - 1];
  out[2] = h[c - 1];
  out[3] = h[c + w - 1];
  out[4] = h[c - 2 * static_cast<std::size_t>(w)];
  out[5] = h[c - w];
  out[6] = h[c];
  out[7] = h[c + w];
  out[8] = h[c + 2 * static_cast<std::size_t>(w)];
  out[9] = h[c - w + 1];
  out[10] = h[c + 1];
  out[11] = h[c + w + 1];
  out[12] = vt[c - w];
  out[13] = vt[c - 1];
  out[14] = vt[c + w];
  out[15] = vt[c + 1];
}

}  // namespace

Descriptor16 descriptor_at(const SobelPair& sob, int u, int v) {
  if (u < kDescriptorMargin || u >= sob.width - kDescriptorMargin ||
      v < kDescriptorMargin || v >= sob.height - kDescriptorMargin)
    throw std::out_of_range("descriptor coordinates outside valid margin");
  Descriptor16 d;
  assemble(sob, u, v, d.data());
  return d;
}

DescriptorField build_descriptor_field(const SobelPair& sob) {
  DescriptorField field;
  field.width = sob.width;
  field.height = sob.height;
  field.bytes.assign(
      static_cast<std::size_t>(sob.width) * sob.height * kDescriptorBytes, 0);
  for (int v = kDescriptorMargin; v < sob.height - kDescriptorMargin; ++v) {
    std::uint8_t* row =
        field.bytes.data() +
        static_cast<std::size_t>(v) * sob.width * kDescriptorBytes;
    for (int u = kDescriptorMargin; u < sob.width - kDescriptorMargin; ++u)
      assemble(sob, u, v, row + static_cast<std::size_t>(u) * kDescriptorBytes);
  }
  return field;
}

void DescriptorSource::fill(int u, int v, std::uint8_t* out) const {
  if (field_) {
    std::memcpy(out, field_->at(u, v), kDescriptorBytes);
  } else {
    assemble(*sob_, u, v, out);
  }
}

void DescriptorSource::fill_row(int v, int u0, int u1, std::uint8_t* out) const {
  if (field_) {
    std::memcpy(out, field_->at(u0, v),
                static_cast<std::size_t>(u1 - u0) * kDescriptorBytes);
  } else {
    for (int u = u0; u < u1; ++u)
      assemble(*sob_, u, v,
               out + static_cast<std::size_t>(u - u0) * kDescriptorBytes);
  }
}

}  // namespace stereopipe
