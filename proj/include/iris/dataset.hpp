#pragma once

// Dataset manifests, ground-truth sidecars, and the feature cache file.

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "iris/common.hpp"
#include "iris/features.hpp"
#include "iris/lvq.hpp"

namespace iris {

enum class Split { Train, Test };

inline const char* to_string(Split s) { return s == Split::Train ? "train" : "test"; }

struct ManifestEntry {
    std::string path;  // relative to the manifest directory
    int class_id = -1;
    Split split = Split::Train;
};

struct Manifest {
    std::filesystem::path root;  // directory entry paths resolve against
    int class_count = 0;
    std::vector<ManifestEntry> entries;

    std::filesystem::path resolve(const ManifestEntry& e) const { return root / e.path; }

    // Class ids must be dense 0..C-1 and every class must appear in the
    // train split.
    void validate() const {
        if (class_count < 1) throw DataError("manifest: class count must be >= 1");
        std::vector<char> seen_train(static_cast<size_t>(class_count), 0);
        std::vector<char> seen(static_cast<size_t>(class_count), 0);
        for (const auto& e : entries) {
            if (e.class_id < 0 || e.class_id >= class_count)
                throw DataError(strf("manifest: entry '%s' has class %d outside [0, %d)", e.path.c_str(),
                                     e.class_id, class_count));
            seen[static_cast<size_t>(e.class_id)] = 1;
            if (e.split == Split::Train) seen_train[static_cast<size_t>(e.class_id)] = 1;
        }
        for (int c = 0; c < class_count; ++c) {
            if (!seen[static_cast<size_t>(c)])
                throw DataError(strf("manifest: class %d has no entries", c));
            if (!seen_train[static_cast<size_t>(c)])
                throw DataError(strf("manifest: class %d has no train entries", c));
        }
    }
};

inline void save_manifest(const Manifest& m, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError(strf("cannot write %s", path.string().c_str()));
    out << "iris-manifest v1\n";
    out << "classes " << m.class_count << "\n";
    for (const auto& e : m.entries)
        out << "entry " << e.class_id << ' ' << to_string(e.split) << ' ' << e.path << "\n";
    if (!out) throw IoError(strf("short write to %s", path.string().c_str()));
}

inline Manifest load_manifest(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(strf("cannot open %s", path.string().c_str()));
    Manifest m;
    m.root = path.has_parent_path() ? path.parent_path() : std::filesystem::path(".");
    std::string line;
    if (!std::getline(in, line) || line != "iris-manifest v1")
        throw DataError(strf("%s: not an iris manifest", path.string().c_str()));
    if (!std::getline(in, line)) throw DataError("manifest: missing classes line");
    {
        std::istringstream ls(line);
        std::string k;
        if (!(ls >> k >> m.class_count) || k != "classes")
            throw DataError(strf("manifest: bad classes line '%s'", line.c_str()));
    }
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string k, split;
        ManifestEntry e;
        if (!(ls >> k >> e.class_id >> split) || k != "entry")
            throw DataError(strf("manifest: bad entry line '%s'", line.c_str()));
        if (split == "train") e.split = Split::Train;
        else if (split == "test") e.split = Split::Test;
        else throw DataError(strf("manifest: unknown split '%s'", split.c_str()));
        ls >> std::ws;
        std::getline(ls, e.path);
        if (e.path.empty()) throw DataError(strf("manifest: entry line '%s' missing path", line.c_str()));
        m.entries.push_back(std::move(e));
    }
    m.validate();
    return m;
}

// Builds a manifest from the root/classNN/*.pgm layout with a seeded
// per-class split. Directories are taken in name order, images likewise.
inline Manifest discover_manifest(const std::filesystem::path& root, double train_fraction,
                                  uint64_t seed) {
    if (!(train_fraction > 0.0 && train_fraction <= 1.0))
        throw ConfigError("train fraction must be in (0, 1]");
    std::vector<std::filesystem::path> class_dirs;
    for (const auto& entry : std::filesystem::directory_iterator(root))
        if (entry.is_directory() && entry.path().filename().string().rfind("class", 0) == 0)
            class_dirs.push_back(entry.path());
    std::sort(class_dirs.begin(), class_dirs.end());
    if (class_dirs.empty()) throw DataError(strf("no class directories under %s", root.string().c_str()));

    Manifest m;
    m.root = root;
    m.class_count = static_cast<int>(class_dirs.size());
    for (size_t c = 0; c < class_dirs.size(); ++c) {
        std::vector<std::filesystem::path> images;
        for (const auto& f : std::filesystem::directory_iterator(class_dirs[c]))
            if (f.path().extension() == ".pgm") images.push_back(f.path());
        std::sort(images.begin(), images.end());
        if (images.empty())
            throw DataError(strf("class directory %s has no .pgm images", class_dirs[c].string().c_str()));
        std::vector<size_t> order(images.size());
        for (size_t i = 0; i < order.size(); ++i) order[i] = i;
        Rng rng(mix_seed({seed, static_cast<uint64_t>(c), 0x5917}));
        rng.shuffle(order);
        size_t n_train = std::max<size_t>(1, static_cast<size_t>(std::llround(train_fraction * images.size())));
        std::vector<Split> split(images.size(), Split::Test);
        for (size_t i = 0; i < n_train && i < order.size(); ++i) split[order[i]] = Split::Train;
        for (size_t i = 0; i < images.size(); ++i) {
            ManifestEntry e;
            e.path = std::filesystem::relative(images[i], root).generic_string();
            e.class_id = static_cast<int>(c);
            e.split = split[i];
            m.entries.push_back(std::move(e));
        }
    }
    m.validate();
    return m;
}

// ------------------------------------------------------------ ground truth

struct GroundTruth {
    Circle pupil;
    Circle iris;
    double rotation_deg = 0.0;
};

inline void save_truth(const GroundTruth& t, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError(strf("cannot write %s", path.string().c_str()));
    out << "iris-truth v1\n";
    out << "pupil " << format_double(t.pupil.cx) << ' ' << format_double(t.pupil.cy) << ' '
        << format_double(t.pupil.r) << "\n";
    out << "iris " << format_double(t.iris.cx) << ' ' << format_double(t.iris.cy) << ' '
        << format_double(t.iris.r) << "\n";
    out << "rotation-deg " << format_double(t.rotation_deg) << "\n";
}

inline GroundTruth load_truth(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(strf("cannot open %s", path.string().c_str()));
    std::string line;
    if (!std::getline(in, line) || line != "iris-truth v1")
        throw DataError(strf("%s: not a truth sidecar", path.string().c_str()));
    GroundTruth t;
    auto read_circle = [&](const char* key) {
        if (!std::getline(in, line)) throw DataError(strf("truth sidecar: missing %s", key));
        std::istringstream ls(line);
        std::string k;
        Circle c;
        if (!(ls >> k >> c.cx >> c.cy >> c.r) || k != key)
            throw DataError(strf("truth sidecar: bad %s line '%s'", key, line.c_str()));
        return c;
    };
    t.pupil = read_circle("pupil");
    t.iris = read_circle("iris");
    if (!std::getline(in, line)) throw DataError("truth sidecar: missing rotation");
    std::istringstream ls(line);
    std::string k;
    if (!(ls >> k >> t.rotation_deg) || k != "rotation-deg")
        throw DataError(strf("truth sidecar: bad rotation line '%s'", line.c_str()));
    return t;
}

// ----------------------------------------------------------- feature cache

struct FeatureRecord {
    std::string id;  // usually the manifest-relative image path
    FeatureVector features;
};

struct FeatureCache {
    std::vector<FeatureRecord> records;
};

inline void save_feature_cache(const FeatureCache& cache, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError(strf("cannot write %s", path.string().c_str()));
    out << "iris-feature-cache v1\n";
    out << "records " << cache.records.size() << "\n";
    for (const auto& rec : cache.records) {
        out << "record " << rec.features.label << ' ' << rec.features.dimension() << ' '
            << rec.features.config_tag << ' ' << rec.id << "\n";
        bool first = true;
        for (double v : rec.features.values) {
            if (!first) out << ' ';
            out << format_double(v);
            first = false;
        }
        out << "\n";
    }
    if (!out) throw IoError(strf("short write to %s", path.string().c_str()));
}

inline FeatureCache load_feature_cache(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(strf("cannot open %s", path.string().c_str()));
    std::string line;
    if (!std::getline(in, line) || line != "iris-feature-cache v1")
        throw DataError(strf("%s: not a feature cache", path.string().c_str()));
    if (!std::getline(in, line)) throw DataError("feature cache: missing records line");
    size_t count = 0;
    {
        std::istringstream ls(line);
        std::string k;
        if (!(ls >> k >> count) || k != "records")
            throw DataError(strf("feature cache: bad records line '%s'", line.c_str()));
    }
    FeatureCache cache;
    cache.records.reserve(count);
    size_t expect_dim = 0;
    std::string expect_tag;
    for (size_t i = 0; i < count; ++i) {
        if (!std::getline(in, line)) throw DataError(strf("feature cache: missing record %zu", i));
        std::istringstream ls(line);
        std::string k;
        FeatureRecord rec;
        size_t dim = 0;
        if (!(ls >> k >> rec.features.label >> dim >> rec.features.config_tag) || k != "record")
            throw DataError(strf("feature cache: bad record header '%s'", line.c_str()));
        ls >> std::ws;
        std::getline(ls, rec.id);
        if (i == 0) {
            expect_dim = dim;
            expect_tag = rec.features.config_tag;
        } else {
            if (dim != expect_dim)
                throw DimensionError(strf("feature cache: record '%s' has dimension %zu, expected %zu",
                                          rec.id.c_str(), dim, expect_dim));
            if (rec.features.config_tag != expect_tag)
                throw DataError(strf("feature cache: record '%s' config '%s' differs from '%s'",
                                     rec.id.c_str(), rec.features.config_tag.c_str(), expect_tag.c_str()));
        }
        if (!std::getline(in, line)) throw DataError(strf("feature cache: record '%s' missing values", rec.id.c_str()));
        std::istringstream vs(line);
        std::string tok;
        rec.features.values.reserve(dim);
        while (vs >> tok) {
            double v;
            if (!parse_double(tok, v))
                throw DataError(strf("feature cache: bad value '%s' in record '%s'", tok.c_str(), rec.id.c_str()));
            rec.features.values.push_back(v);
        }
        if (rec.features.values.size() != dim)
            throw DimensionError(strf("feature cache: record '%s' has %zu values, header says %zu",
                                      rec.id.c_str(), rec.features.values.size(), dim));
        cache.records.push_back(std::move(rec));
    }
    return cache;
}

// Labeled vectors for the classifier.
inline Dataset to_dataset(const FeatureCache& cache) {
    Dataset data;
    data.reserve(cache.records.size());
    for (const auto& rec : cache.records) {
        if (rec.features.label < 0)
            throw DataError(strf("feature record '%s' is unlabeled", rec.id.c_str()));
        data.push_back(Sample{rec.features.values, rec.features.label});
    }
    return data;
}

}  // namespace iris
