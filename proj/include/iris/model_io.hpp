#pragma once

// Text persistence for trained ensembles. Values are written with
// round-trip precision so save/load reproduces the model bit for bit.

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "iris/common.hpp"
#include "iris/lvq.hpp"

namespace iris {

inline void save_ensemble(const TrainedEnsemble& ens, std::ostream& out) {
    out << "iris-lvq-ensemble v1\n";
    out << "dimension " << ens.dimension() << "\n";
    out << "classes " << ens.class_count() << "\n";
    out << "members " << ens.members.size() << "\n";
    for (size_t i = 0; i < ens.members.size(); ++i) {
        const Codebook& cb = ens.members[i];
        const LvqConfig& cfg = ens.member_configs[i];
        out << "member " << i << "\n";
        out << "alpha0 " << format_double(cfg.alpha0) << "\n";
        out << "epochs " << cfg.epochs << "\n";
        out << "seed " << cfg.seed << "\n";
        out << "prototypes-per-class " << cb.prototypes_per_class << "\n";
        out << "cap " << cfg.total_prototypes_cap << "\n";
        out << "prototypes " << cb.prototypes.size() << "\n";
        for (const Prototype& p : cb.prototypes) {
            out << "prototype " << p.label;
            for (double v : p.w) out << ' ' << format_double(v);
            out << "\n";
        }
    }
    out << "end\n";
}

inline void save_ensemble_file(const TrainedEnsemble& ens, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError(strf("cannot write %s", path.string().c_str()));
    save_ensemble(ens, out);
    if (!out) throw IoError(strf("short write to %s", path.string().c_str()));
}

namespace detail {

inline std::string expect_line(std::istream& in, const char* what) {
    std::string line;
    if (!std::getline(in, line)) throw DataError(strf("model file: missing %s", what));
    return line;
}

inline long long expect_keyed_int(std::istream& in, const std::string& key) {
    std::string line = expect_line(in, key.c_str());
    std::istringstream ls(line);
    std::string k;
    long long v = 0;
    if (!(ls >> k >> v) || k != key)
        throw DataError(strf("model file: expected '%s <n>', got '%s'", key.c_str(), line.c_str()));
    return v;
}

}  // namespace detail

inline TrainedEnsemble load_ensemble(std::istream& in) {
    std::string header = detail::expect_line(in, "header");
    if (header != "iris-lvq-ensemble v1")
        throw DataError(strf("model file: unrecognized header '%s'", header.c_str()));
    size_t dimension = static_cast<size_t>(detail::expect_keyed_int(in, "dimension"));
    long long classes = detail::expect_keyed_int(in, "classes");
    long long members = detail::expect_keyed_int(in, "members");
    if (members < 1) throw DataError("model file: member count must be >= 1");

    TrainedEnsemble ens;
    ens.members.resize(static_cast<size_t>(members));
    ens.member_configs.resize(static_cast<size_t>(members));
    ens.training_logs.resize(static_cast<size_t>(members));
    for (long long i = 0; i < members; ++i) {
        long long idx = detail::expect_keyed_int(in, "member");
        if (idx != i) throw DataError(strf("model file: member %lld out of order", idx));
        LvqConfig& cfg = ens.member_configs[static_cast<size_t>(i)];
        std::string line = detail::expect_line(in, "alpha0");
        {
            std::istringstream ls(line);
            std::string k, v;
            if (!(ls >> k >> v) || k != "alpha0" || !parse_double(v, cfg.alpha0))
                throw DataError(strf("model file: bad alpha0 line '%s'", line.c_str()));
        }
        cfg.epochs = static_cast<int>(detail::expect_keyed_int(in, "epochs"));
        cfg.seed = static_cast<uint64_t>(detail::expect_keyed_int(in, "seed"));
        Codebook& cb = ens.members[static_cast<size_t>(i)];
        cb.dimension = dimension;
        cb.prototypes_per_class = static_cast<int>(detail::expect_keyed_int(in, "prototypes-per-class"));
        cfg.prototypes_per_class = std::max(1, cb.prototypes_per_class);
        cfg.total_prototypes_cap = static_cast<int>(detail::expect_keyed_int(in, "cap"));
        long long nproto = detail::expect_keyed_int(in, "prototypes");
        cb.prototypes.resize(static_cast<size_t>(nproto));
        for (long long p = 0; p < nproto; ++p) {
            std::string pline = detail::expect_line(in, "prototype row");
            std::istringstream ls(pline);
            std::string k;
            ls >> k;
            if (k != "prototype")
                throw DataError(strf("model file: expected prototype row, got '%s'", pline.c_str()));
            Prototype& proto = cb.prototypes[static_cast<size_t>(p)];
            if (!(ls >> proto.label)) throw DataError("model file: prototype row missing label");
            proto.w.reserve(dimension);
            std::string tok;
            while (ls >> tok) {
                double v;
                if (!parse_double(tok, v))
                    throw DataError(strf("model file: bad value '%s' in prototype row", tok.c_str()));
                proto.w.push_back(v);
            }
            if (proto.w.size() != dimension)
                throw DimensionError(strf("model file: prototype has %zu values, expected %zu",
                                          proto.w.size(), dimension));
        }
    }
    std::string tail = detail::expect_line(in, "end marker");
    if (tail != "end") throw DataError("model file: missing end marker");
    if (ens.class_count() > classes)
        throw DataError("model file: prototype labels exceed declared class count");
    return ens;
}

inline TrainedEnsemble load_ensemble_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(strf("cannot open %s", path.string().c_str()));
    return load_ensemble(in);
}

}  // namespace iris
