#include "ptyroi/png.hpp"

#include "ptyroi/errors.hpp"

#include <zlib.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <vector>

namespace ptyroi {

namespace {

void put_u32_be(std::vector<unsigned char>& out, std::uint32_t v) {
    out.push_back(static_cast<unsigned char>((v >> 24) & 0xFF));
    out.push_back(static_cast<unsigned char>((v >> 16) & 0xFF));
    out.push_back(static_cast<unsigned char>((v >> 8) & 0xFF));
    out.push_back(static_cast<unsigned char>(v & 0xFF));
}

void append_chunk(std::vector<unsigned char>& out, const char type[4],
                  const unsigned char* data, std::size_t len) {
    put_u32_be(out, static_cast<std::uint32_t>(len));
    const std::size_t crc_start = out.size();
    out.insert(out.end(), type, type + 4);
    if (len > 0) out.insert(out.end(), data, data + len);
    const auto crc = crc32(0L, out.data() + crc_start, static_cast<uInt>(4 + len));
    put_u32_be(out, static_cast<std::uint32_t>(crc));
}

}  // namespace

void write_png_gray(const Grid<std::uint8_t>& img, const std::filesystem::path& path) {
    if (img.empty()) throw SizeError("cannot write an empty image");

    // Scanlines prefixed with filter byte 0.
    std::vector<unsigned char> raw;
    raw.reserve(img.rows() * (img.cols() + 1));
    for (std::size_t r = 0; r < img.rows(); ++r) {
        raw.push_back(0);
        raw.insert(raw.end(), img.row(r).begin(), img.row(r).end());
    }
    uLongf compressed_len = compressBound(static_cast<uLong>(raw.size()));
    std::vector<unsigned char> compressed(compressed_len);
    if (compress2(compressed.data(), &compressed_len, raw.data(),
                  static_cast<uLong>(raw.size()), Z_BEST_SPEED) != Z_OK)
        throw IoError("png: deflate failed");

    std::vector<unsigned char> out = {0x89, 'P', 'N', 'G', 0x0D, 0x0A, 0x1A, 0x0A};
    unsigned char ihdr[13];
    const std::uint32_t w = static_cast<std::uint32_t>(img.cols());
    const std::uint32_t h = static_cast<std::uint32_t>(img.rows());
    ihdr[0] = static_cast<unsigned char>((w >> 24) & 0xFF);
    ihdr[1] = static_cast<unsigned char>((w >> 16) & 0xFF);
    ihdr[2] = static_cast<unsigned char>((w >> 8) & 0xFF);
    ihdr[3] = static_cast<unsigned char>(w & 0xFF);
    ihdr[4] = static_cast<unsigned char>((h >> 24) & 0xFF);
    ihdr[5] = static_cast<unsigned char>((h >> 16) & 0xFF);
    ihdr[6] = static_cast<unsigned char>((h >> 8) & 0xFF);
    ihdr[7] = static_cast<unsigned char>(h & 0xFF);
    ihdr[8] = 8;   // bit depth
    ihdr[9] = 0;   // grayscale
    ihdr[10] = 0;  // compression
    ihdr[11] = 0;  // filter
    ihdr[12] = 0;  // interlace
    append_chunk(out, "IHDR", ihdr, sizeof(ihdr));
    append_chunk(out, "IDAT", compressed.data(), compressed_len);
    append_chunk(out, "IEND", nullptr, 0);

    std::ofstream file(path, std::ios::binary | std::ios::trunc);
    if (!file) throw IoError("cannot write png: " + path.string());
    file.write(reinterpret_cast<const char*>(out.data()),
               static_cast<std::streamsize>(out.size()));
    if (!file) throw IoError("png: write failed");
}

Grid<std::uint8_t> to_gray(const Grid<double>& values, const Grid<std::uint8_t>* valid) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (valid && !valid->flat()[i]) continue;
        const double v = values.flat()[i];
        if (!std::isfinite(v)) continue;
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    Grid<std::uint8_t> out(values.rows(), values.cols(), 0);
    if (!(hi > lo)) return out;
    const double scale = 255.0 / (hi - lo);
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (valid && !valid->flat()[i]) continue;
        const double v = values.flat()[i];
        if (!std::isfinite(v)) continue;
        out.flat()[i] = static_cast<std::uint8_t>(
            std::clamp(std::round((v - lo) * scale), 0.0, 255.0));
    }
    return out;
}

}  // namespace ptyroi
