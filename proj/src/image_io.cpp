#include "image_io.hpp"

#include <cstring>
#include <fstream>

#include "errors.hpp"

namespace canopy {

namespace {

void write_u32_le(std::ostream& os, std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                          static_cast<unsigned char>((v >> 8) & 0xff),
                          static_cast<unsigned char>((v >> 16) & 0xff),
                          static_cast<unsigned char>((v >> 24) & 0xff)};
    os.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t read_u32_le(std::istream& is, const std::string& path, const char* what) {
    unsigned char b[4];
    if (!is.read(reinterpret_cast<char*>(b), 4))
        throw DataError(path + ": truncated while reading " + what);
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

}  // namespace

void save_cdm(const DepthMap& depth, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out.write("CDM1", 4);
    write_u32_le(out, static_cast<std::uint32_t>(depth.width));
    write_u32_le(out, static_cast<std::uint32_t>(depth.height));
    static_assert(sizeof(float) == 4);
    out.write(reinterpret_cast<const char*>(depth.depth.data()),
              static_cast<std::streamsize>(depth.depth.size() * sizeof(float)));
    if (!out) throw IoError("write failure on '" + path + "'");
}

DepthMap load_cdm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "'");
    char magic[4];
    if (!in.read(magic, 4) || std::memcmp(magic, "CDM1", 4) != 0)
        throw DataError(path + ": bad magic bytes at offset 0 (expected \"CDM1\")");
    std::uint32_t w = read_u32_le(in, path, "width at offset 4");
    std::uint32_t h = read_u32_le(in, path, "height at offset 8");
    if (w == 0 || h == 0 || static_cast<std::uint64_t>(w) * h > (1ULL << 28))
        throw DataError(path + ": implausible dimensions " + std::to_string(w) + "x" +
                        std::to_string(h));
    DepthMap d;
    d.width = static_cast<int>(w);
    d.height = static_cast<int>(h);
    d.depth.resize(static_cast<std::size_t>(w) * h);
    if (!in.read(reinterpret_cast<char*>(d.depth.data()),
                 static_cast<std::streamsize>(d.depth.size() * sizeof(float))))
        throw DataError(path + ": truncated pixel data at offset 12");
    d.camera.width = d.width;
    d.camera.height = d.height;
    return d;
}

void save_pgm(const ForegroundMask& mask, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out << "P5\n" << mask.width << " " << mask.height << "\n255\n";
    out.write(reinterpret_cast<const char*>(mask.mask.data()),
              static_cast<std::streamsize>(mask.mask.size()));
    if (!out) throw IoError("write failure on '" + path + "'");
}

namespace {

int read_pnm_int(std::istream& is, const std::string& path) {
    // skips whitespace and '#' comments
    int c = is.peek();
    while (c == '#' || std::isspace(c)) {
        if (c == '#') {
            std::string line;
            std::getline(is, line);
        } else {
            is.get();
        }
        c = is.peek();
    }
    int v = 0;
    if (!(is >> v)) throw DataError(path + ": malformed PNM header");
    return v;
}

}  // namespace

ForegroundMask load_pgm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "'");
    char m0 = 0, m1 = 0;
    in.get(m0);
    in.get(m1);
    if (m0 != 'P' || m1 != '5') throw DataError(path + ": not a binary PGM (P5)");
    int w = read_pnm_int(in, path);
    int h = read_pnm_int(in, path);
    int maxval = read_pnm_int(in, path);
    if (maxval != 255) throw DataError(path + ": expected maxval 255");
    in.get();  // single whitespace after header
    ForegroundMask mask = make_mask(w, h);
    if (!in.read(reinterpret_cast<char*>(mask.mask.data()),
                 static_cast<std::streamsize>(mask.mask.size())))
        throw DataError(path + ": truncated pixel data");
    for (auto& v : mask.mask) v = v >= 128 ? 255 : 0;
    return mask;
}

void save_ppm(const RgbImage& img, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out << "P6\n" << img.width << " " << img.height << "\n255\n";
    out.write(reinterpret_cast<const char*>(img.pixels.data()),
              static_cast<std::streamsize>(img.pixels.size() * 3));
    if (!out) throw IoError("write failure on '" + path + "'");
}

RgbImage load_ppm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "'");
    char m0 = 0, m1 = 0;
    in.get(m0);
    in.get(m1);
    if (m0 != 'P' || m1 != '6') throw DataError(path + ": not a binary PPM (P6)");
    int w = read_pnm_int(in, path);
    int h = read_pnm_int(in, path);
    int maxval = read_pnm_int(in, path);
    if (maxval != 255) throw DataError(path + ": expected maxval 255");
    in.get();
    RgbImage img;
    img.width = w;
    img.height = h;
    img.pixels.resize(static_cast<std::size_t>(w) * h);
    if (!in.read(reinterpret_cast<char*>(img.pixels.data()),
                 static_cast<std::streamsize>(img.pixels.size() * 3)))
        throw DataError(path + ": truncated pixel data");
    return img;
}

}  // namespace canopy
