#include "tsr/shapeio.hpp"

#include "tsr/errors.hpp"

#include <png.h>

#include <algorithm>
#include <cctype>
#include <csetjmp>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

namespace tsr {

namespace {

// --- PNM (P1/P2/P4/P5) ------------------------------------------------------

// Skips whitespace and '#' comments between header tokens.
bool next_token(std::istream& in, std::string& tok) {
    tok.clear();
    int c;
    while ((c = in.get()) != EOF) {
        if (c == '#') {
            while ((c = in.get()) != EOF && c != '\n') {}
        } else if (!std::isspace(c)) {
            tok.push_back(char(c));
            while ((c = in.get()) != EOF && !std::isspace(c) && c != '#') tok.push_back(char(c));
            if (c == '#') in.unget();
            return true;
        }
    }
    return false;
}

long parse_dim(const std::string& tok, const std::string& what, const std::filesystem::path& path) {
    try {
        std::size_t pos = 0;
        long v = std::stol(tok, &pos);
        if (pos != tok.size() || v <= 0) throw std::invalid_argument(tok);
        return v;
    } catch (const std::exception&) {
        throw CorruptFile(path.string() + ": bad " + what + " '" + tok + "'");
    }
}

BinaryShape decode_pnm(std::istream& in, const std::filesystem::path& path, int threshold) {
    std::string magic;
    if (!next_token(in, magic)) throw CorruptFile(path.string() + ": empty file");
    if (magic != "P1" && magic != "P2" && magic != "P4" && magic != "P5")
        throw UnsupportedFormat(path.string() + ": unsupported PNM type " + magic);

    std::string tok;
    if (!next_token(in, tok)) throw CorruptFile(path.string() + ": missing width");
    long w = parse_dim(tok, "width", path);
    if (!next_token(in, tok)) throw CorruptFile(path.string() + ": missing height");
    long h = parse_dim(tok, "height", path);

    long maxval = 1;
    if (magic == "P2" || magic == "P5") {
        if (!next_token(in, tok)) throw CorruptFile(path.string() + ": missing maxval");
        maxval = parse_dim(tok, "maxval", path);
        if (maxval > 65535) throw CorruptFile(path.string() + ": bad maxval");
        if (maxval > 255) throw UnsupportedFormat(path.string() + ": 16-bit PGM not supported");
    }

    BinaryShape shape;
    shape.width = int(w);
    shape.height = int(h);
    shape.grid.assign(std::size_t(w) * h, 0);

    if (magic == "P1") {
        for (long i = 0; i < w * h; ++i) {
            int c = in.get();
            while (c != EOF && (std::isspace(c) || c == '#')) {
                if (c == '#')
                    while ((c = in.get()) != EOF && c != '\n') {}
                c = in.get();
            }
            if (c == EOF) throw CorruptFile(path.string() + ": truncated P1 data");
            if (c != '0' && c != '1') throw CorruptFile(path.string() + ": bad P1 digit");
            shape.grid[i] = (c == '1') ? 1 : 0; // PBM: 1 = black = foreground
        }
    } else if (magic == "P2") {
        for (long i = 0; i < w * h; ++i) {
            if (!next_token(in, tok)) throw CorruptFile(path.string() + ": truncated P2 data");
            long v = 0;
            try {
                std::size_t pos = 0;
                v = std::stol(tok, &pos);
                if (pos != tok.size() || v < 0) throw std::invalid_argument(tok);
            } catch (const std::exception&) {
                throw CorruptFile(path.string() + ": bad P2 sample '" + tok + "'");
            }
            if (v > maxval) throw CorruptFile(path.string() + ": sample above maxval");
            long scaled = maxval == 255 ? v : v * 255 / maxval;
            shape.grid[i] = scaled >= threshold ? 1 : 0;
        }
    } else if (magic == "P4") {
        // one padding byte of whitespace already consumed by next_token's stop
        long row_bytes = (w + 7) / 8;
        std::vector<char> row(row_bytes);
        for (long y = 0; y < h; ++y) {
            in.read(row.data(), row_bytes);
            if (in.gcount() != row_bytes) throw CorruptFile(path.string() + ": truncated P4 data");
            for (long x = 0; x < w; ++x) {
                int bit = (row[x / 8] >> (7 - x % 8)) & 1;
                shape.grid[y * w + x] = bit ? 1 : 0;
            }
        }
    } else { // P5
        std::vector<unsigned char> row(w);
        for (long y = 0; y < h; ++y) {
            in.read(reinterpret_cast<char*>(row.data()), w);
            if (in.gcount() != w) throw CorruptFile(path.string() + ": truncated P5 data");
            for (long x = 0; x < w; ++x) {
                long scaled = maxval == 255 ? row[x] : long(row[x]) * 255 / maxval;
                shape.grid[y * w + x] = scaled >= threshold ? 1 : 0;
            }
        }
    }
    return shape;
}

// --- PNG --------------------------------------------------------------------

struct PngReader {
    png_structp png = nullptr;
    png_infop info = nullptr;
    std::FILE* fp = nullptr;
    ~PngReader() {
        if (png) png_destroy_read_struct(&png, info ? &info : nullptr, nullptr);
        if (fp) std::fclose(fp);
    }
};

BinaryShape decode_png(const std::filesystem::path& path, int threshold) {
    PngReader r;
    r.fp = std::fopen(path.string().c_str(), "rb");
    if (!r.fp) throw CorruptFile(path.string() + ": cannot open");

    unsigned char sig[8];
    if (std::fread(sig, 1, 8, r.fp) != 8 || png_sig_cmp(sig, 0, 8))
        throw CorruptFile(path.string() + ": not a PNG");

    r.png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!r.png) throw CorruptFile(path.string() + ": png init failed");
    r.info = png_create_info_struct(r.png);
    if (!r.info) throw CorruptFile(path.string() + ": png init failed");
    if (setjmp(png_jmpbuf(r.png))) throw CorruptFile(path.string() + ": png decode error");

    png_init_io(r.png, r.fp);
    png_set_sig_bytes(r.png, 8);
    png_read_info(r.png, r.info);

    png_uint_32 w, h;
    int bit_depth, color_type;
    png_get_IHDR(r.png, r.info, &w, &h, &bit_depth, &color_type, nullptr, nullptr, nullptr);

    // Accept anything libpng can turn into 8-bit gray.
    if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(r.png);
    if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8) png_set_expand_gray_1_2_4_to_8(r.png);
    if (bit_depth == 16) png_set_strip_16(r.png);
    if (color_type & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(r.png);
    if (color_type == PNG_COLOR_TYPE_RGB || color_type == PNG_COLOR_TYPE_RGB_ALPHA ||
        color_type == PNG_COLOR_TYPE_PALETTE)
        png_set_rgb_to_gray_fixed(r.png, 1, -1, -1);
    png_read_update_info(r.png, r.info);

    if (png_get_rowbytes(r.png, r.info) != w)
        throw UnsupportedFormat(path.string() + ": cannot reduce PNG to 8-bit gray");

    BinaryShape shape;
    shape.width = int(w);
    shape.height = int(h);
    shape.grid.assign(std::size_t(w) * h, 0);

    std::vector<unsigned char> row(w);
    for (png_uint_32 y = 0; y < h; ++y) {
        png_read_row(r.png, row.data(), nullptr);
        for (png_uint_32 x = 0; x < w; ++x)
            shape.grid[std::size_t(y) * w + x] = row[x] >= threshold ? 1 : 0;
    }
    return shape;
}

bool has_suffix_ci(const std::string& name, const std::string& suffix) {
    if (name.size() < suffix.size()) return false;
    return std::equal(suffix.rbegin(), suffix.rend(), name.rbegin(),
                      [](char a, char b) { return std::tolower(a) == std::tolower(b); });
}

} // namespace

BinaryShape load_shape(const std::filesystem::path& path, int threshold) {
    if (!std::filesystem::exists(path)) throw CorruptFile(path.string() + ": no such file");

    BinaryShape shape;
    const std::string name = path.filename().string();
    if (has_suffix_ci(name, ".png")) {
        shape = decode_png(path, threshold);
    } else if (has_suffix_ci(name, ".pbm") || has_suffix_ci(name, ".pgm") ||
               has_suffix_ci(name, ".pnm")) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw CorruptFile(path.string() + ": cannot open");
        shape = decode_pnm(in, path, threshold);
    } else {
        throw UnsupportedFormat(path.string() + ": unknown extension");
    }

    shape.id = path.stem().string();
    if (shape.foreground_count() == 0) throw EmptyShape(path.string() + ": no foreground pixels");
    return shape;
}

void save_pgm(const BinaryShape& shape, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw CorruptFile(path.string() + ": cannot open for writing");
    out << "P5\n" << shape.width << " " << shape.height << "\n255\n";
    std::vector<unsigned char> row(shape.width);
    for (int y = 0; y < shape.height; ++y) {
        for (int x = 0; x < shape.width; ++x) row[x] = shape.at(x, y) ? 255 : 0;
        out.write(reinterpret_cast<const char*>(row.data()), shape.width);
    }
    if (!out) throw CorruptFile(path.string() + ": write failed");
}

namespace {

std::string label_for(const std::filesystem::path& file, LabelRule rule) {
    if (rule == LabelRule::ParentDirectory) return file.parent_path().filename().string();
    const std::string stem = file.stem().string();
    auto dash = stem.rfind('-');
    return dash == std::string::npos ? stem : stem.substr(0, dash);
}

} // namespace

Gallery load_dataset(const std::filesystem::path& dir, LabelRule rule, bool strict,
                     LoadReport* report, int threshold) {
    if (!std::filesystem::is_directory(dir)) throw EmptyDirectory(dir.string() + ": not a directory");

    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(dir))
        if (entry.is_regular_file()) files.push_back(entry.path());
    std::sort(files.begin(), files.end(),
              [](const auto& a, const auto& b) { return a.filename().string() < b.filename().string(); });

    Gallery gallery;
    gallery.source = dir.string();
    gallery.labeling = rule == LabelRule::ParentDirectory ? "parent-directory" : "prefix-before-last-dash";

    for (const auto& file : files) {
        try {
            BinaryShape shape = load_shape(file, threshold);
            shape.label = label_for(file, rule);
            gallery.shapes.push_back(std::move(shape));
        } catch (const UnsupportedFormat&) {
            continue; // non-image clutter in the directory is not an error
        } catch (const DataError& e) {
            if (strict) throw;
            if (report) report->failures.push_back({file.filename().string(), e.what()});
        }
    }
    if (gallery.shapes.empty()) throw EmptyDirectory(dir.string() + ": no decodable images");
    return gallery;
}

} // namespace tsr
