#pragma once

// Subset of the libwebp simple C API (webp/encode.h, webp/decode.h). The
// development headers are not always installed next to the runtime library;
// these signatures have been stable since libwebp 0.x.

#include <cstddef>
#include <cstdint>

extern "C" {
std::size_t WebPEncodeRGB(const std::uint8_t* rgb, int width, int height, int stride,
                          float quality_factor, std::uint8_t** output);
std::size_t WebPEncodeLosslessRGB(const std::uint8_t* rgb, int width, int height, int stride,
                                  std::uint8_t** output);
int WebPGetInfo(const std::uint8_t* data, std::size_t data_size, int* width, int* height);
std::uint8_t* WebPDecodeRGB(const std::uint8_t* data, std::size_t data_size, int* width, int* height);
void WebPFree(void* ptr);
}
