#pragma once

// LVQ1 prototype classifier: seeded codebook initialization, winner-update
// training with a linearly decaying learning rate, an independently trained
// ensemble with majority voting, and evaluation metrics.

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <numeric>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "iris/common.hpp"

namespace iris {

struct Sample {
    std::vector<double> x;
    int label = -1;
};

using Dataset = std::vector<Sample>;

struct LvqConfig {
    int prototypes_per_class = 2;
    double alpha0 = 0.1;
    int epochs = 500;
    uint64_t seed = 0;
    int total_prototypes_cap = 40;

    void validate() const {
        if (!(alpha0 > 0.0 && alpha0 < 1.0)) throw ParameterError("lvq: alpha0 must be in (0,1)");
        if (epochs < 1) throw ParameterError("lvq: epochs must be >= 1");
        if (prototypes_per_class < 1) throw ParameterError("lvq: prototypes_per_class must be >= 1");
        if (total_prototypes_cap < 1) throw ParameterError("lvq: total_prototypes_cap must be >= 1");
    }
};

struct Prototype {
    std::vector<double> w;
    int label = -1;
};

struct Codebook {
    std::vector<Prototype> prototypes;
    size_t dimension = 0;
    int prototypes_per_class = 0;  // effective count after any cap reduction
    bool cap_reduced = false;
};

namespace detail {

// Squared Euclidean distance with early abandonment: once the partial sum
// exceeds `cap` the exact value no longer matters (the caller rejects it),
// so the scan stops. Partial sums are non-decreasing, so results at or
// below the cap are always exact.
inline double squared_distance_capped(const double* a, const double* b, size_t n, double cap) {
    double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
    size_t i = 0;
    while (i + 4 <= n) {
        double d0 = a[i] - b[i];
        double d1 = a[i + 1] - b[i + 1];
        double d2 = a[i + 2] - b[i + 2];
        double d3 = a[i + 3] - b[i + 3];
        s0 += d0 * d0;
        s1 += d1 * d1;
        s2 += d2 * d2;
        s3 += d3 * d3;
        i += 4;
        if ((i & 255) == 0 && s0 + s1 + s2 + s3 > cap) return s0 + s1 + s2 + s3;
    }
    for (; i < n; ++i) {
        double d = a[i] - b[i];
        s0 += d * d;
    }
    return s0 + s1 + s2 + s3;
}

inline std::map<int, std::vector<size_t>> indices_by_class(const Dataset& data) {
    std::map<int, std::vector<size_t>> by_class;
    for (size_t i = 0; i < data.size(); ++i) by_class[data[i].label].push_back(i);
    return by_class;
}

}  // namespace detail

// Prototypes are training samples drawn without replacement, class by class
// in ascending label order. When class_count * prototypes_per_class would
// exceed the cap, the per-class count is reduced uniformly (never below 1)
// and the reduction is recorded on the codebook.
inline Codebook init_codebook(const Dataset& data, const LvqConfig& cfg) {
    cfg.validate();
    if (data.empty()) throw DataError("init_codebook: empty training set");
    const size_t dim = data[0].x.size();
    for (size_t i = 0; i < data.size(); ++i)
        if (data[i].x.size() != dim)
            throw DimensionError(strf("init_codebook: sample %zu has dimension %zu, expected %zu", i,
                                      data[i].x.size(), dim));

    auto by_class = detail::indices_by_class(data);
    const int class_count = static_cast<int>(by_class.size());

    int ppc = cfg.prototypes_per_class;
    bool reduced = false;
    while (ppc > 1 && static_cast<long>(class_count) * ppc > cfg.total_prototypes_cap) {
        --ppc;
        reduced = true;
    }

    Codebook cb;
    cb.dimension = dim;
    cb.prototypes_per_class = ppc;
    cb.cap_reduced = reduced;
    Rng rng(cfg.seed);
    for (const auto& [label, indices] : by_class) {
        if (static_cast<int>(indices.size()) < ppc)
            throw DataError(strf("init_codebook: class %d has %zu samples, needs %d", label,
                                 indices.size(), ppc));
        std::vector<size_t> chosen = rng.sample_without_replacement(indices, static_cast<size_t>(ppc));
        for (size_t idx : chosen) cb.prototypes.push_back(Prototype{data[idx].x, label});
    }
    return cb;
}

// Index and Euclidean distance of the closest prototype; ties go to the
// smallest index.
inline std::pair<size_t, double> nearest_prototype(const Codebook& cb, std::span<const double> x) {
    if (x.size() != cb.dimension)
        throw DimensionError(strf("nearest_prototype: input dimension %zu, codebook dimension %zu",
                                  x.size(), cb.dimension));
    if (cb.prototypes.empty()) throw DataError("nearest_prototype: empty codebook");
    size_t best = 0;
    double best_sq = detail::squared_distance_capped(cb.prototypes[0].w.data(), x.data(), x.size(),
                                                     std::numeric_limits<double>::infinity());
    for (size_t i = 1; i < cb.prototypes.size(); ++i) {
        double sq = detail::squared_distance_capped(cb.prototypes[i].w.data(), x.data(), x.size(), best_sq);
        if (sq < best_sq) {
            best_sq = sq;
            best = i;
        }
    }
    return {best, std::sqrt(best_sq)};
}

// One LVQ1 step on the winner: attracted to a same-label sample, repelled
// from a different-label one. ||w' - x|| = (1 -+ alpha) ||w - x|| exactly.
inline void lvq1_update(std::vector<double>& w, std::span<const double> x, bool label_match,
                        double alpha) {
    if (label_match) {
        for (size_t i = 0; i < w.size(); ++i) w[i] += alpha * (x[i] - w[i]);
    } else {
        for (size_t i = 0; i < w.size(); ++i) w[i] -= alpha * (x[i] - w[i]);
    }
}

struct UpdateEvent {
    int epoch = 0;
    size_t step = 0;
    size_t prototype_index = 0;
    bool label_match = false;
    double alpha = 0.0;
    double distance_before = 0.0;
    double distance_after = 0.0;
};

struct TrainHooks {
    std::function<void(const UpdateEvent&)> on_update;
};

struct TrainResult {
    Codebook codebook;
    std::vector<double> training_log;  // end-of-epoch accuracy on the training set
};

inline double codebook_accuracy(const Codebook& cb, const Dataset& data) {
    size_t correct = 0;
    for (const Sample& s : data) {
        auto [idx, dist] = nearest_prototype(cb, s.x);
        (void)dist;
        if (cb.prototypes[idx].label == s.label) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(data.size());
}

// LVQ1: seeded-shuffled presentation order each epoch, winner update with
// alpha_t = alpha0 * (1 - t / epochs), accuracy logged after each epoch.
inline TrainResult train_lvq1(const Dataset& data, const LvqConfig& cfg,
                              const TrainHooks* hooks = nullptr) {
    TrainResult result;
    result.codebook = init_codebook(data, cfg);
    Codebook& cb = result.codebook;

    Rng shuffle_rng(splitmix64(cfg.seed ^ 0x5BD1E995u));
    std::vector<size_t> order(data.size());
    std::iota(order.begin(), order.end(), 0);

    result.training_log.reserve(static_cast<size_t>(cfg.epochs));
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        const double alpha = cfg.alpha0 * (1.0 - static_cast<double>(epoch) / cfg.epochs);
        shuffle_rng.shuffle(order);
        for (size_t step = 0; step < order.size(); ++step) {
            const Sample& s = data[order[step]];
            auto [win, dist] = nearest_prototype(cb, s.x);
            bool match = cb.prototypes[win].label == s.label;
            lvq1_update(cb.prototypes[win].w, s.x, match, alpha);
            if (hooks && hooks->on_update) {
                double after = std::sqrt(detail::squared_distance_capped(
                    cb.prototypes[win].w.data(), s.x.data(), s.x.size(),
                    std::numeric_limits<double>::infinity()));
                hooks->on_update(UpdateEvent{epoch, step, win, match, alpha, dist, after});
            }
        }
        result.training_log.push_back(codebook_accuracy(cb, data));
    }
    return result;
}

struct TrainedEnsemble {
    std::vector<Codebook> members;
    std::vector<LvqConfig> member_configs;
    std::vector<std::vector<double>> training_logs;

    int class_count() const {
        int c = 0;
        for (const auto& m : members)
            for (const auto& p : m.prototypes) c = std::max(c, p.label + 1);
        return c;
    }
    size_t dimension() const { return members.empty() ? 0 : members[0].dimension; }
};

// Default member set: alpha0 in {0.1, 0.2, 0.3} with seeds seed+0, +1, +2.
inline std::vector<LvqConfig> default_member_configs(uint64_t seed) {
    std::vector<LvqConfig> configs(3);
    const double alphas[3] = {0.1, 0.2, 0.3};
    for (size_t i = 0; i < 3; ++i) {
        configs[i].alpha0 = alphas[i];
        configs[i].seed = seed + i;
    }
    return configs;
}

// Members train independently (in parallel when allowed); results are
// identical either way since each member owns its seeded stream.
inline TrainedEnsemble ensemble_train(const Dataset& data, const std::vector<LvqConfig>& member_configs,
                                      bool parallel = true) {
    if (member_configs.empty()) throw ParameterError("ensemble_train: need at least one member config");
    for (const auto& cfg : member_configs) cfg.validate();

    TrainedEnsemble ens;
    ens.member_configs = member_configs;
    ens.members.resize(member_configs.size());
    ens.training_logs.resize(member_configs.size());

    std::vector<std::string> errors(member_configs.size());
    auto train_one = [&](size_t i) {
        try {
            TrainResult r = train_lvq1(data, member_configs[i]);
            ens.members[i] = std::move(r.codebook);
            ens.training_logs[i] = std::move(r.training_log);
        } catch (const std::exception& e) {
            errors[i] = e.what();
        }
    };

    if (parallel && member_configs.size() > 1) {
        std::vector<std::thread> threads;
        threads.reserve(member_configs.size());
        for (size_t i = 0; i < member_configs.size(); ++i) threads.emplace_back(train_one, i);
        for (auto& t : threads) t.join();
    } else {
        for (size_t i = 0; i < member_configs.size(); ++i) train_one(i);
    }
    for (size_t i = 0; i < errors.size(); ++i)
        if (!errors[i].empty()) throw DataError(strf("ensemble member %zu: %s", i, errors[i].c_str()));
    return ens;
}

struct MemberVote {
    int label = -1;
    double distance = 0.0;
    size_t prototype_index = 0;
};

struct EnsembleDecision {
    int label = -1;
    int winning_votes = 0;
    std::vector<MemberVote> votes;
};

// Majority vote over member decisions. Tied vote counts break toward the
// smallest summed winner distance, then the smallest class id.
inline EnsembleDecision ensemble_classify(const TrainedEnsemble& ens, std::span<const double> x) {
    if (ens.members.empty()) throw DataError("ensemble_classify: empty ensemble");
    EnsembleDecision out;
    out.votes.reserve(ens.members.size());
    std::map<int, std::pair<int, double>> tally;  // label -> (votes, distance sum)
    for (const Codebook& cb : ens.members) {
        auto [idx, dist] = nearest_prototype(cb, x);
        int label = cb.prototypes[idx].label;
        out.votes.push_back(MemberVote{label, dist, idx});
        auto& t = tally[label];
        t.first += 1;
        t.second += dist;
    }
    int best_votes = 0;
    for (const auto& [label, t] : tally) best_votes = std::max(best_votes, t.first);
    int best_label = -1;
    double best_dist = 0.0;
    for (const auto& [label, t] : tally) {
        if (t.first != best_votes) continue;
        if (best_label == -1 || t.second < best_dist) {
            best_label = label;
            best_dist = t.second;
        }
        // Equal distance sums keep the earlier (smaller) label from the map order.
    }
    out.label = best_label;
    out.winning_votes = best_votes;
    return out;
}

struct Metrics {
    size_t total = 0;
    size_t correct = 0;
    double recognition_rate = 0.0;  // correct / total
    int class_count = 0;
    std::vector<std::vector<size_t>> confusion;  // [true][predicted]
    std::vector<size_t> per_class_total;
    std::vector<double> per_class_accuracy;
};

inline Metrics evaluate(const TrainedEnsemble& ens, const Dataset& test) {
    if (test.empty()) throw DataError("evaluate: empty test set");
    Metrics m;
    m.class_count = ens.class_count();
    for (const Sample& s : test)
        if (s.label < 0 || s.label >= m.class_count)
            throw DataError(strf("evaluate: test label %d outside trained classes [0, %d)", s.label,
                                 m.class_count));
    m.confusion.assign(static_cast<size_t>(m.class_count),
                       std::vector<size_t>(static_cast<size_t>(m.class_count), 0));
    m.per_class_total.assign(static_cast<size_t>(m.class_count), 0);
    for (const Sample& s : test) {
        EnsembleDecision d = ensemble_classify(ens, s.x);
        ++m.total;
        ++m.per_class_total[static_cast<size_t>(s.label)];
        ++m.confusion[static_cast<size_t>(s.label)][static_cast<size_t>(d.label)];
        if (d.label == s.label) ++m.correct;
    }
    m.recognition_rate = static_cast<double>(m.correct) / static_cast<double>(m.total);
    m.per_class_accuracy.assign(static_cast<size_t>(m.class_count), 0.0);
    for (int c = 0; c < m.class_count; ++c) {
        size_t n = m.per_class_total[static_cast<size_t>(c)];
        if (n > 0)
            m.per_class_accuracy[static_cast<size_t>(c)] =
                static_cast<double>(m.confusion[static_cast<size_t>(c)][static_cast<size_t>(c)]) /
                static_cast<double>(n);
    }
    return m;
}

}  // namespace iris
