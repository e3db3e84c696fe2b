#include "tsr/errors.hpp"
#include "tsr/shapeio.hpp"

#include <zlib.h>

#include <bit>
#include <cstring>
#include <fstream>

// Index container layout:
//   8 bytes magic "TSRIDX\0\0"
//   u32 version, u32 section count
//   section table: 16-byte name, u64 offset, u64 length, u32 crc32, u32 pad
//   section payloads
// All integers and doubles little-endian. Every section is checksummed, so a
// truncated or bit-flipped file fails loudly instead of producing a wrong
// index.

namespace tsr {

namespace {

constexpr char kMagic[8] = {'T', 'S', 'R', 'I', 'D', 'X', '\0', '\0'};

static_assert(std::endian::native == std::endian::little,
              "index container assumes a little-endian host");

class Writer {
public:
    std::vector<std::uint8_t> buf;

    void u8(std::uint8_t v) { buf.push_back(v); }
    void u16(std::uint16_t v) { raw(&v, 2); }
    void u32(std::uint32_t v) { raw(&v, 4); }
    void u64(std::uint64_t v) { raw(&v, 8); }
    void i32(std::int32_t v) { raw(&v, 4); }
    void f64(double v) { raw(&v, 8); }
    void str(const std::string& s) {
        u32(std::uint32_t(s.size()));
        raw(s.data(), s.size());
    }
    void f64s(const std::vector<double>& v) {
        u64(v.size());
        raw(v.data(), v.size() * 8);
    }
    void raw(const void* p, std::size_t n) {
        const auto* b = static_cast<const std::uint8_t*>(p);
        buf.insert(buf.end(), b, b + n);
    }
};

class Reader {
public:
    Reader(const std::uint8_t* p, std::size_t n) : p_(p), end_(p + n) {}

    std::uint8_t u8() { return *take(1); }
    std::uint16_t u16() { return read<std::uint16_t>(); }
    std::uint32_t u32() { return read<std::uint32_t>(); }
    std::uint64_t u64() { return read<std::uint64_t>(); }
    std::int32_t i32() { return read<std::int32_t>(); }
    double f64() { return read<double>(); }
    std::string str() {
        std::uint32_t n = u32();
        const auto* p = take(n);
        return std::string(reinterpret_cast<const char*>(p), n);
    }
    std::vector<double> f64s() {
        std::uint64_t n = u64();
        std::vector<double> v(n);
        std::memcpy(v.data(), take(n * 8), n * 8);
        return v;
    }
    bool done() const { return p_ == end_; }

private:
    template <class T> T read() {
        T v;
        std::memcpy(&v, take(sizeof(T)), sizeof(T));
        return v;
    }
    const std::uint8_t* take(std::size_t n) {
        if (p_ + n > end_) throw ChecksumFailure("index section truncated");
        const auto* r = p_;
        p_ += n;
        return r;
    }
    const std::uint8_t* p_;
    const std::uint8_t* end_;
};

void write_matrix(Writer& w, const Matrix& m) {
    w.i32(m.rows);
    w.i32(m.cols);
    w.f64s(m.data);
}

Matrix read_matrix(Reader& r) {
    Matrix m;
    m.rows = r.i32();
    m.cols = r.i32();
    m.data = r.f64s();
    if (m.data.size() != std::size_t(m.rows) * m.cols)
        throw CorruptFile("matrix size mismatch in index");
    return m;
}

Writer encode_config(const BuildConfig& c) {
    Writer w;
    w.i32(c.cluster_count);
    w.i32(c.raster);
    w.i32(c.descriptor.samples);
    w.i32(c.descriptor.dist_bins);
    w.i32(c.descriptor.angle_bins);
    w.f64(c.descriptor.skip_penalty);
    w.i32(c.descriptor.shifts);
    w.f64(c.descriptor.smooth_sigma);
    w.i32(c.forest.trees_per_group);
    w.i32(c.forest.max_depth);
    w.i32(c.forest.min_leaf);
    w.i32(c.knn_count);
    w.f64(c.epsilon);
    w.f64(c.prob_floor);
    w.i32(c.kernel_k);
    w.i32(c.knn_w);
    w.i32(c.diffusion_iters);
    w.u64(c.seed);
    w.i32(c.binarize_threshold);
    w.f64(c.prune_branch_frac);
    w.f64(c.turn_angle_deg);
    return w;
}

BuildConfig decode_config(Reader& r) {
    BuildConfig c;
    c.cluster_count = r.i32();
    c.raster = r.i32();
    c.descriptor.samples = r.i32();
    c.descriptor.dist_bins = r.i32();
    c.descriptor.angle_bins = r.i32();
    c.descriptor.skip_penalty = r.f64();
    c.descriptor.shifts = r.i32();
    c.descriptor.smooth_sigma = r.f64();
    c.forest.trees_per_group = r.i32();
    c.forest.max_depth = r.i32();
    c.forest.min_leaf = r.i32();
    c.knn_count = r.i32();
    c.epsilon = r.f64();
    c.prob_floor = r.f64();
    c.kernel_k = r.i32();
    c.knn_w = r.i32();
    c.diffusion_iters = r.i32();
    c.seed = r.u64();
    c.binarize_threshold = r.i32();
    c.prune_branch_frac = r.f64();
    c.turn_angle_deg = r.f64();
    return c;
}

struct Section {
    std::string name;
    std::vector<std::uint8_t> payload;
};

} // namespace

void save_index(const RetrievalIndex& index, const std::filesystem::path& path) {
    std::vector<Section> sections;

    sections.push_back({"config", encode_config(index.config).buf});

    {
        Writer w;
        w.u64(index.ids.size());
        for (std::size_t i = 0; i < index.ids.size(); ++i) {
            w.str(index.ids[i]);
            w.str(i < index.labels.size() ? index.labels[i] : std::string());
        }
        sections.push_back({"gallery", std::move(w.buf)});
    }
    {
        Writer w;
        for (int k = 0; k < 4; ++k) w.f64(index.scaling.min[k]);
        for (int k = 0; k < 4; ++k) w.f64(index.scaling.max[k]);
        w.u64(index.global_features.size());
        for (const auto& f : index.global_features)
            for (double v : f) w.f64(v);
        sections.push_back({"globalfeat", std::move(w.buf)});
    }
    {
        Writer w;
        w.u64(index.descriptors.size());
        for (const auto& d : index.descriptors) {
            w.i32(d.n);
            w.i32(d.bins);
            w.f64s(d.hist);
        }
        sections.push_back({"localdesc", std::move(w.buf)});
    }
    {
        Writer w;
        write_matrix(w, index.distances);
        sections.push_back({"distmat", std::move(w.buf)});
    }
    {
        Writer w;
        const ClusterModel& c = index.clusters;
        w.i32(c.cluster_count);
        w.u64(c.assignment.size());
        for (int a : c.assignment) w.i32(a);
        w.u64(c.medoids.size());
        for (int m : c.medoids) w.i32(m);
        w.u64(c.training.size());
        for (auto [idx, label] : c.training) {
            w.i32(idx);
            w.i32(label);
        }
        sections.push_back({"clusters", std::move(w.buf)});
    }
    {
        Writer w;
        const ForestEnsemble& f = index.forest;
        w.i32(f.cluster_count);
        w.u64(f.seed);
        w.u64(f.groups.size());
        for (const auto& g : f.groups) {
            w.u64(g.features.size());
            for (int d : g.features) w.i32(d);
            w.u64(g.trees.size());
            for (const auto& t : g.trees) {
                w.u64(t.nodes.size());
                for (const auto& n : t.nodes) {
                    w.i32(n.feature);
                    w.f64(n.threshold);
                    w.i32(n.left);
                    w.i32(n.right);
                    w.i32(n.leaf_class);
                }
            }
        }
        sections.push_back({"forest", std::move(w.buf)});
    }
    {
        Writer w;
        write_matrix(w, index.relevance);
        sections.push_back({"relevance", std::move(w.buf)});
    }

    // assemble file
    Writer head;
    head.raw(kMagic, 8);
    head.u32(kIndexVersion);
    head.u32(std::uint32_t(sections.size()));
    std::size_t table_at = head.buf.size();
    std::size_t offset = table_at + sections.size() * 40;
    for (const auto& s : sections) {
        char name[16] = {};
        std::strncpy(name, s.name.c_str(), 15);
        head.raw(name, 16);
        head.u64(offset);
        head.u64(s.payload.size());
        head.u32(std::uint32_t(crc32(0, s.payload.data(), uInt(s.payload.size()))));
        head.u32(0);
        offset += s.payload.size();
    }

    std::ofstream out(path, std::ios::binary);
    if (!out) throw CorruptFile(path.string() + ": cannot open for writing");
    out.write(reinterpret_cast<const char*>(head.buf.data()), head.buf.size());
    for (const auto& s : sections)
        out.write(reinterpret_cast<const char*>(s.payload.data()), s.payload.size());
    if (!out) throw CorruptFile(path.string() + ": write failed");
}

RetrievalIndex load_index(const std::filesystem::path& path, std::uint32_t expected_version) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw CorruptFile(path.string() + ": cannot open");
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());

    if (bytes.size() < 16 || std::memcmp(bytes.data(), kMagic, 8) != 0)
        throw CorruptFile(path.string() + ": not an index file");

    Reader head(bytes.data() + 8, bytes.size() - 8);
    std::uint32_t version = head.u32();
    if (version != expected_version)
        throw VersionMismatch(path.string() + ": index version " + std::to_string(version) +
                              ", expected " + std::to_string(expected_version));
    std::uint32_t nsec = head.u32();

    struct Entry {
        std::string name;
        std::uint64_t offset, length;
        std::uint32_t crc;
    };
    std::vector<Entry> entries;
    for (std::uint32_t i = 0; i < nsec; ++i) {
        if (16 + std::size_t(i + 1) * 40 > bytes.size())
            throw ChecksumFailure(path.string() + ": section table truncated");
        char name[17] = {};
        const std::uint8_t* at = bytes.data() + 16 + std::size_t(i) * 40;
        std::memcpy(name, at, 16);
        Entry e;
        e.name = name;
        std::memcpy(&e.offset, at + 16, 8);
        std::memcpy(&e.length, at + 24, 8);
        std::memcpy(&e.crc, at + 32, 4);
        entries.push_back(e);
    }

    auto section = [&](const std::string& name) -> Reader {
        for (const auto& e : entries) {
            if (e.name != name) continue;
            if (e.offset + e.length > bytes.size())
                throw ChecksumFailure(path.string() + ": section '" + name + "' truncated");
            const std::uint8_t* p = bytes.data() + e.offset;
            if (std::uint32_t(crc32(0, p, uInt(e.length))) != e.crc)
                throw ChecksumFailure(path.string() + ": section '" + name + "' checksum mismatch");
            return Reader(p, e.length);
        }
        throw CorruptFile(path.string() + ": missing section '" + name + "'");
    };

    RetrievalIndex index;
    {
        Reader r = section("config");
        index.config = decode_config(r);
    }
    {
        Reader r = section("gallery");
        std::uint64_t n = r.u64();
        index.ids.reserve(n);
        index.labels.reserve(n);
        for (std::uint64_t i = 0; i < n; ++i) {
            index.ids.push_back(r.str());
            index.labels.push_back(r.str());
        }
    }
    {
        Reader r = section("globalfeat");
        for (int k = 0; k < 4; ++k) index.scaling.min[k] = r.f64();
        for (int k = 0; k < 4; ++k) index.scaling.max[k] = r.f64();
        std::uint64_t n = r.u64();
        index.global_features.resize(n);
        for (auto& f : index.global_features)
            for (double& v : f) v = r.f64();
    }
    {
        Reader r = section("localdesc");
        std::uint64_t n = r.u64();
        index.descriptors.resize(n);
        for (auto& d : index.descriptors) {
            d.n = r.i32();
            d.bins = r.i32();
            d.hist = r.f64s();
        }
    }
    {
        Reader r = section("distmat");
        index.distances = read_matrix(r);
    }
    {
        Reader r = section("clusters");
        ClusterModel& c = index.clusters;
        c.cluster_count = r.i32();
        c.assignment.resize(r.u64());
        for (auto& a : c.assignment) a = r.i32();
        c.medoids.resize(r.u64());
        for (auto& m : c.medoids) m = r.i32();
        c.training.resize(r.u64());
        for (auto& [idx, label] : c.training) {
            idx = r.i32();
            label = r.i32();
        }
    }
    {
        Reader r = section("forest");
        ForestEnsemble& f = index.forest;
        f.cluster_count = r.i32();
        f.seed = r.u64();
        f.groups.resize(r.u64());
        for (auto& g : f.groups) {
            g.features.resize(r.u64());
            for (auto& d : g.features) d = r.i32();
            g.trees.resize(r.u64());
            for (auto& t : g.trees) {
                t.nodes.resize(r.u64());
                for (auto& n : t.nodes) {
                    n.feature = r.i32();
                    n.threshold = r.f64();
                    n.left = r.i32();
                    n.right = r.i32();
                    n.leaf_class = r.i32();
                }
            }
        }
    }
    {
        Reader r = section("relevance");
        index.relevance = read_matrix(r);
    }
    return index;
}

} // namespace tsr
