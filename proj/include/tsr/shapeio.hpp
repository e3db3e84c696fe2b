#pragma once

#include "tsr/index.hpp"
#include "tsr/types.hpp"

#include <cstdint>
#include <filesystem>

namespace tsr {

inline constexpr std::uint32_t kIndexVersion = 1;

// Decodes PBM (P1/P4), PGM (P2/P5) or 8-bit grayscale PNG. A pixel is
// foreground iff its gray value >= threshold; for PBM, bit 1 is foreground.
// id = filename stem.
BinaryShape load_shape(const std::filesystem::path& path, int threshold = 128);

// Writes a shape as binary PGM (P5), foreground = 255.
void save_pgm(const BinaryShape& shape, const std::filesystem::path& path);

enum class LabelRule {
    PrefixBeforeLastDash, // "apple-1.pgm" -> "apple"
    ParentDirectory,
};

struct LoadReport {
    struct Failure {
        std::string file;
        std::string error;
    };
    std::vector<Failure> failures;
};

// Loads every decodable image in a directory, sorted lexicographically by
// filename. strict = throw on the first bad file; lenient = skip it and
// record the failure in `report`.
Gallery load_dataset(const std::filesystem::path& dir, LabelRule rule = LabelRule::PrefixBeforeLastDash,
                     bool strict = true, LoadReport* report = nullptr, int threshold = 128);

// Versioned sectioned binary container; matrices as little-endian 64-bit
// floats, one CRC32 per section. load(save(x)) == x bit for bit.
void save_index(const RetrievalIndex& index, const std::filesystem::path& path);
RetrievalIndex load_index(const std::filesystem::path& path,
                          std::uint32_t expected_version = kIndexVersion);

} // namespace tsr
