#include "skelforge/image_io.hpp"

#include <png.h>

#include <array>
#include <cstring>
#include <fstream>
#include <random>

#include "skelforge/error.hpp"

namespace skelforge {

namespace {

bool is_png(std::span<const std::uint8_t> b) {
    static constexpr std::array<std::uint8_t, 8> sig{0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
    return b.size() >= sig.size() && std::equal(sig.begin(), sig.end(), b.begin());
}

bool is_gif(std::span<const std::uint8_t> b) {
    return b.size() >= 6 && std::memcmp(b.data(), "GIF8", 4) == 0 && (b[4] == '7' || b[4] == '9') && b[5] == 'a';
}

std::uint8_t luminance(std::uint8_t r, std::uint8_t g, std::uint8_t b) {
    return static_cast<std::uint8_t>((299 * r + 587 * g + 114 * b + 500) / 1000);
}

/// Byte cursor over a GIF stream.
class GifReader {
public:
    explicit GifReader(std::span<const std::uint8_t> b) : b_(b) {}

    std::uint8_t u8() {
        if (pos_ >= b_.size()) throw Error(ErrorCode::DecodeError, "truncated GIF");
        return b_[pos_++];
    }
    int u16() {
        const int lo = u8();
        return lo | (u8() << 8);
    }
    std::vector<std::uint8_t> palette(int entries) {
        std::vector<std::uint8_t> p(static_cast<std::size_t>(entries) * 3);
        for (auto& v : p) v = u8();
        return p;
    }
    std::vector<std::uint8_t> sub_blocks() {
        std::vector<std::uint8_t> out;
        for (std::uint8_t n = u8(); n != 0; n = u8()) {
            for (int i = 0; i < n; ++i) out.push_back(u8());
        }
        return out;
    }

private:
    std::span<const std::uint8_t> b_;
    std::size_t pos_ = 0;
};

std::vector<std::uint8_t> lzw_decode(const std::vector<std::uint8_t>& data, int min_code_size, std::size_t expected) {
    if (min_code_size < 2 || min_code_size > 8) throw Error(ErrorCode::DecodeError, "bad GIF code size");
    const int clear = 1 << min_code_size;
    const int stop = clear + 1;
    std::vector<std::uint16_t> prefix(4096);
    std::vector<std::uint8_t> suffix(4096);
    std::vector<std::uint8_t> first(4096);
    for (int i = 0; i < clear; ++i) {
        suffix[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(i);
        first[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(i);
    }
    int width = min_code_size + 1;
    int next = clear + 2;
    int prev = -1;
    std::vector<std::uint8_t> out;
    out.reserve(expected);
    std::vector<std::uint8_t> stack;
    std::uint32_t bits = 0;
    int nbits = 0;
    std::size_t pos = 0;
    while (out.size() < expected) {
        while (nbits < width) {
            if (pos >= data.size()) return out;
            bits |= static_cast<std::uint32_t>(data[pos++]) << nbits;
            nbits += 8;
        }
        const int code = static_cast<int>(bits & ((1U << width) - 1));
        bits >>= width;
        nbits -= width;
        if (code == clear) {
            width = min_code_size + 1;
            next = clear + 2;
            prev = -1;
            continue;
        }
        if (code == stop) break;
        if (prev < 0) {
            if (code >= clear) throw Error(ErrorCode::DecodeError, "corrupt GIF data");
            out.push_back(static_cast<std::uint8_t>(code));
            prev = code;
            continue;
        }
        int cur = code;
        stack.clear();
        if (code >= next) {
            if (code > next) throw Error(ErrorCode::DecodeError, "corrupt GIF data");
            stack.push_back(first[static_cast<std::size_t>(prev)]);
            cur = prev;
        }
        while (cur >= clear) {
            stack.push_back(suffix[static_cast<std::size_t>(cur)]);
            cur = prefix[static_cast<std::size_t>(cur)];
        }
        stack.push_back(static_cast<std::uint8_t>(cur));
        out.insert(out.end(), stack.rbegin(), stack.rend());
        if (next < 4096) {
            prefix[static_cast<std::size_t>(next)] = static_cast<std::uint16_t>(prev);
            suffix[static_cast<std::size_t>(next)] = static_cast<std::uint8_t>(cur);
            first[static_cast<std::size_t>(next)] = first[static_cast<std::size_t>(prev)];
            ++next;
            if (next == (1 << width) && width < 12) ++width;
        }
        prev = code;
    }
    return out;
}

void png_write_to_vector(png_structp png, png_bytep data, png_size_t length) {
    auto* out = static_cast<std::vector<std::uint8_t>*>(png_get_io_ptr(png));
    out->insert(out->end(), data, data + length);
}

void png_fail(png_structp png, png_const_charp message) {
    auto* msg = static_cast<std::string*>(png_get_error_ptr(png));
    if (msg != nullptr) *msg = message;
    png_longjmp(png, 1);
}

void png_quiet(png_structp, png_const_charp) {}

/// Fixed settings so identical rasters always encode to identical bytes.
std::vector<std::uint8_t> encode(int width, int height, int color_type, int channels, const std::uint8_t* pixels) {
    if (width <= 0 || height <= 0) throw Error(ErrorCode::InvalidArgument, "cannot encode an empty image");
    std::vector<std::uint8_t> out;
    std::string message;
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &message, png_fail, png_quiet);
    if (png == nullptr) throw Error(ErrorCode::IoError, "png_create_write_struct failed");
    png_infop info = png_create_info_struct(png);
    std::vector<png_bytep> rows(static_cast<std::size_t>(height));
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw Error(ErrorCode::IoError, "PNG encode failed: " + message);
    }
    png_set_write_fn(png, &out, png_write_to_vector, nullptr);
    png_set_compression_level(png, 6);
    png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height), 8, color_type,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    for (int y = 0; y < height; ++y) {
        rows[static_cast<std::size_t>(y)] =
            const_cast<png_bytep>(pixels + static_cast<std::size_t>(y) * static_cast<std::size_t>(width) * static_cast<std::size_t>(channels));
    }
    png_set_rows(png, info, rows.data());
    png_write_png(png, info, PNG_TRANSFORM_IDENTITY, nullptr);
    png_destroy_write_struct(&png, &info);
    return out;
}

}  // namespace

GrayImage decode_png(std::span<const std::uint8_t> bytes) {
    png_image image;
    std::memset(&image, 0, sizeof(image));
    image.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_memory(&image, bytes.data(), bytes.size())) {
        const std::string why = image.message;
        png_image_free(&image);
        throw Error(ErrorCode::DecodeError, "PNG decode failed: " + why);
    }
    // Read as RGBA and reduce ourselves, so that gray values are not gamma
    // converted and alpha always composites on black.
    image.format = PNG_FORMAT_RGBA;
    std::vector<std::uint8_t> rgba(PNG_IMAGE_SIZE(image));
    if (!png_image_finish_read(&image, nullptr, rgba.data(), 0, nullptr)) {
        const std::string why = image.message;
        png_image_free(&image);
        throw Error(ErrorCode::DecodeError, "PNG decode failed: " + why);
    }
    GrayImage out;
    out.width = static_cast<int>(image.width);
    out.height = static_cast<int>(image.height);
    out.pixels.resize(static_cast<std::size_t>(out.width) * static_cast<std::size_t>(out.height));
    for (std::size_t i = 0; i < out.pixels.size(); ++i) {
        const std::uint8_t* p = &rgba[i * 4];
        const unsigned lum = luminance(p[0], p[1], p[2]);
        out.pixels[i] = static_cast<std::uint8_t>((lum * p[3] + 127) / 255);
    }
    png_image_free(&image);
    return out;
}

GrayImage decode_gif(std::span<const std::uint8_t> bytes) {
    if (!is_gif(bytes)) throw Error(ErrorCode::DecodeError, "not a GIF stream");
    GifReader r(bytes.subspan(6));
    GrayImage out;
    out.width = r.u16();
    out.height = r.u16();
    if (out.width <= 0 || out.height <= 0) throw Error(ErrorCode::DecodeError, "GIF has no pixels");
    const std::uint8_t flags = r.u8();
    r.u8();  // background index
    r.u8();  // aspect
    std::vector<std::uint8_t> global;
    if (flags & 0x80) global = r.palette(1 << ((flags & 7) + 1));
    out.pixels.assign(static_cast<std::size_t>(out.width) * static_cast<std::size_t>(out.height), 0);
    int transparent = -1;
    while (true) {
        const std::uint8_t tag = r.u8();
        if (tag == 0x3b) break;
        if (tag == 0x21) {
            const std::uint8_t label = r.u8();
            const auto body = r.sub_blocks();
            if (label == 0xf9 && body.size() >= 4 && (body[0] & 1)) transparent = body[3];
            continue;
        }
        if (tag != 0x2c) throw Error(ErrorCode::DecodeError, "unexpected GIF block");
        const int left = r.u16();
        const int top = r.u16();
        const int w = r.u16();
        const int h = r.u16();
        const std::uint8_t iflags = r.u8();
        std::vector<std::uint8_t> palette = global;
        if (iflags & 0x80) palette = r.palette(1 << ((iflags & 7) + 1));
        if (palette.empty()) throw Error(ErrorCode::DecodeError, "GIF without a color table");
        const int code_size = r.u8();
        const auto data = r.sub_blocks();
        const std::size_t count = static_cast<std::size_t>(w) * static_cast<std::size_t>(h);
        const auto indices = lzw_decode(data, code_size, count);
        // Row order for interlaced frames: passes at 8/8/4/2 with offsets 0/4/2/1.
        std::vector<int> rows;
        if (iflags & 0x40) {
            for (int y = 0; y < h; y += 8) rows.push_back(y);
            for (int y = 4; y < h; y += 8) rows.push_back(y);
            for (int y = 2; y < h; y += 4) rows.push_back(y);
            for (int y = 1; y < h; y += 2) rows.push_back(y);
        } else {
            for (int y = 0; y < h; ++y) rows.push_back(y);
        }
        for (std::size_t i = 0; i < indices.size(); ++i) {
            const int y = top + rows[i / static_cast<std::size_t>(w)];
            const int x = left + static_cast<int>(i % static_cast<std::size_t>(w));
            if (x >= out.width || y >= out.height) continue;
            const std::size_t idx = indices[i];
            if (static_cast<int>(idx) == transparent || idx * 3 + 2 >= palette.size()) continue;
            out.pixels[static_cast<std::size_t>(y) * static_cast<std::size_t>(out.width) + static_cast<std::size_t>(x)] =
                luminance(palette[idx * 3], palette[idx * 3 + 1], palette[idx * 3 + 2]);
        }
        break;  // first frame only
    }
    return out;
}

GrayImage decode_image(std::span<const std::uint8_t> bytes) {
    if (is_png(bytes)) return decode_png(bytes);
    if (is_gif(bytes)) return decode_gif(bytes);
    throw Error(ErrorCode::DecodeError, "unsupported image format");
}

std::vector<std::uint8_t> encode_png(const GrayImage& image) {
    if (image.pixels.size() != static_cast<std::size_t>(image.width) * static_cast<std::size_t>(image.height)) {
        throw Error(ErrorCode::InvalidArgument, "gray image size mismatch");
    }
    return encode(image.width, image.height, PNG_COLOR_TYPE_GRAY, 1, image.pixels.data());
}

std::vector<std::uint8_t> encode_png(const RgbImage& image) {
    if (image.pixels.size() != static_cast<std::size_t>(image.width) * static_cast<std::size_t>(image.height) * 3) {
        throw Error(ErrorCode::InvalidArgument, "rgb image size mismatch");
    }
    return encode(image.width, image.height, PNG_COLOR_TYPE_RGB, 3, image.pixels.data());
}

std::vector<std::uint8_t> read_bytes(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot read " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
    static thread_local std::mt19937_64 rng{std::random_device{}()};
    std::filesystem::path tmp = path;
    tmp += ".tmp" + std::to_string(rng());
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error(ErrorCode::IoError, "cannot write " + tmp.string());
        out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
        if (!out) throw Error(ErrorCode::IoError, "short write to " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp, ec);
        throw Error(ErrorCode::IoError, "cannot move " + tmp.string() + " into place");
    }
}

void write_file_atomic(const std::filesystem::path& path, const std::string& text) {
    write_file_atomic(path, std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

GrayImage read_image(const std::filesystem::path& path) {
    const auto bytes = read_bytes(path);
    return decode_image(bytes);
}

BinaryMask binarize(const GrayImage& image, std::uint8_t threshold) {
    std::vector<std::uint8_t> bits(image.pixels.size());
    for (std::size_t i = 0; i < bits.size(); ++i) bits[i] = image.pixels[i] >= threshold ? 1 : 0;
    return BinaryMask(image.width, image.height, std::move(bits));
}

GrayImage to_gray(const BinaryMask& mask) {
    GrayImage g;
    g.width = mask.width();
    g.height = mask.height();
    g.pixels.reserve(mask.bits().size());
    for (std::uint8_t b : mask.bits()) g.pixels.push_back(b ? 255 : 0);
    return g;
}

BinaryMask read_mask(const std::filesystem::path& path) {
    return binarize(read_image(path), 1);
}

void write_mask(const std::filesystem::path& path, const BinaryMask& mask) {
    write_file_atomic(path, encode_png(to_gray(mask)));
}

}  // namespace skelforge
