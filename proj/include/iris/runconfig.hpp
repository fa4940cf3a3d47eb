#pragma once

// Flat key=value run configuration. Every module default is overridable;
// each key is range-checked when set, so bad configs fail before any work
// starts. The effective configuration can be echoed into reports.

#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "iris/common.hpp"
#include "iris/lbp.hpp"
#include "iris/localization.hpp"
#include "iris/lvq.hpp"
#include "iris/normalization.hpp"
#include "iris/synth.hpp"

namespace iris {

struct RunConfig {
    uint64_t seed = 1;
    double train_fraction = 0.7;
    LocateParams locate;           // includes CannyParams
    NoiseMaskParams mask;
    NormalizationParams norm;
    LbpConfig lbp;
    std::vector<double> lvq_alphas{0.1, 0.2, 0.3};  // one ensemble member per alpha
    int lvq_epochs = 500;
    int lvq_prototypes_per_class = 2;
    int lvq_cap = 40;
    SynthEyeSpec synth;

    std::vector<LvqConfig> member_configs() const {
        std::vector<LvqConfig> configs(lvq_alphas.size());
        for (size_t i = 0; i < configs.size(); ++i) {
            configs[i].alpha0 = lvq_alphas[i];
            configs[i].epochs = lvq_epochs;
            configs[i].prototypes_per_class = lvq_prototypes_per_class;
            configs[i].total_prototypes_cap = lvq_cap;
            configs[i].seed = seed + i;
        }
        return configs;
    }

    SynthEyeSpec synth_spec() const {
        SynthEyeSpec s = synth;
        s.seed = seed;
        return s;
    }
};

namespace detail {

struct ConfigKey {
    std::string name;
    std::function<void(RunConfig&, const std::string&)> set;
    std::function<std::string(const RunConfig&)> get;
};

inline double parse_double_checked(const std::string& key, const std::string& value, double lo,
                                   double hi) {
    double v;
    if (!parse_double(value, v))
        throw ConfigError(strf("config: %s: '%s' is not a number", key.c_str(), value.c_str()));
    if (!(v >= lo && v <= hi))
        throw ConfigError(strf("config: %s = %s outside [%g, %g]", key.c_str(), value.c_str(), lo, hi));
    return v;
}

inline long long parse_int_checked(const std::string& key, const std::string& value, long long lo,
                                   long long hi) {
    long long v;
    if (!parse_long(value, v))
        throw ConfigError(strf("config: %s: '%s' is not an integer", key.c_str(), value.c_str()));
    if (v < lo || v > hi)
        throw ConfigError(strf("config: %s = %s outside [%lld, %lld]", key.c_str(), value.c_str(), lo, hi));
    return v;
}

inline bool parse_bool_checked(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1") return true;
    if (value == "false" || value == "0") return false;
    throw ConfigError(strf("config: %s: '%s' is not a boolean", key.c_str(), value.c_str()));
}

inline const std::vector<ConfigKey>& config_keys() {
    auto dkey = [](const char* name, auto member_ptr, double lo, double hi) {
        return ConfigKey{
            name,
            [name, member_ptr, lo, hi](RunConfig& c, const std::string& v) {
                c.*member_ptr = parse_double_checked(name, v, lo, hi);
            },
            [member_ptr](const RunConfig& c) { return format_double(c.*member_ptr); }};
    };
    (void)dkey;
    static const std::vector<ConfigKey> keys = [] {
        std::vector<ConfigKey> k;
        auto add_double = [&k](const char* name, std::function<double&(RunConfig&)> field, double lo,
                               double hi) {
            std::string key_name = name;
            k.push_back(ConfigKey{
                key_name,
                [key_name, field, lo, hi](RunConfig& c, const std::string& v) {
                    field(c) = parse_double_checked(key_name, v, lo, hi);
                },
                [field](const RunConfig& c) { return format_double(field(const_cast<RunConfig&>(c))); }});
        };
        auto add_int = [&k](const char* name, std::function<long long(RunConfig&, long long, bool)> io,
                            long long lo, long long hi) {
            std::string key_name = name;
            k.push_back(ConfigKey{key_name,
                                  [key_name, io, lo, hi](RunConfig& c, const std::string& v) {
                                      io(c, parse_int_checked(key_name, v, lo, hi), true);
                                  },
                                  [io](const RunConfig& c) {
                                      return strf("%lld", io(const_cast<RunConfig&>(c), 0, false));
                                  }});
        };
        auto add_bool = [&k](const char* name, std::function<bool&(RunConfig&)> field) {
            std::string key_name = name;
            k.push_back(ConfigKey{
                key_name,
                [key_name, field](RunConfig& c, const std::string& v) {
                    field(c) = parse_bool_checked(key_name, v);
                },
                [field](const RunConfig& c) {
                    return field(const_cast<RunConfig&>(c)) ? "true" : "false";
                }});
        };

        add_int("seed",
                [](RunConfig& c, long long v, bool set) {
                    if (set) c.seed = static_cast<uint64_t>(v);
                    return static_cast<long long>(c.seed);
                },
                0, std::numeric_limits<long long>::max());
        add_double("split.train_fraction", [](RunConfig& c) -> double& { return c.train_fraction; }, 0.05,
                   1.0);

        add_double("canny.sigma", [](RunConfig& c) -> double& { return c.locate.canny.sigma; }, 0.3, 10.0);
        add_double("canny.high_frac", [](RunConfig& c) -> double& { return c.locate.canny.high_frac; },
                   0.01, 1.0);
        add_double("canny.low_frac", [](RunConfig& c) -> double& { return c.locate.canny.low_frac; }, 0.01,
                   0.99);

        add_double("locate.pupil_r_lo", [](RunConfig& c) -> double& { return c.locate.pupil_r_lo; }, 0.1,
                   1.0);
        add_double("locate.pupil_r_hi", [](RunConfig& c) -> double& { return c.locate.pupil_r_hi; }, 1.0,
                   4.0);
        add_double("locate.pupil_center_window",
                   [](RunConfig& c) -> double& { return c.locate.pupil_center_window; }, 1.0, 100.0);
        add_double("locate.iris_r_lo", [](RunConfig& c) -> double& { return c.locate.iris_r_lo; }, 1.05,
                   3.0);
        add_double("locate.iris_r_hi", [](RunConfig& c) -> double& { return c.locate.iris_r_hi; }, 2.0,
                   10.0);
        add_double("locate.iris_center_window",
                   [](RunConfig& c) -> double& { return c.locate.iris_center_window; }, 0.05, 1.0);
        add_double("locate.min_support_frac",
                   [](RunConfig& c) -> double& { return c.locate.min_support_frac; }, 0.0, 1.0);
        add_int("locate.min_support_abs",
                [](RunConfig& c, long long v, bool set) {
                    if (set) c.locate.min_support_abs = v;
                    return c.locate.min_support_abs;
                },
                0, 100000);

        add_double("mask.dark_factor", [](RunConfig& c) -> double& { return c.mask.dark_factor; }, 0.0,
                   1.0);
        add_double("mask.bright_threshold",
                   [](RunConfig& c) -> double& { return c.mask.bright_threshold; }, 0.0, 255.0);

        add_int("norm.radial_res",
                [](RunConfig& c, long long v, bool set) {
                    if (set) {
                        if (v % 10 != 0)
                            throw ConfigError("config: norm.radial_res must be a multiple of 10");
                        c.norm.radial_res = static_cast<int>(v);
                    }
                    return static_cast<long long>(c.norm.radial_res);
                },
                10, 1000);
        add_int("norm.angular_res",
                [](RunConfig& c, long long v, bool set) {
                    if (set) {
                        if (v % 10 != 0)
                            throw ConfigError("config: norm.angular_res must be a multiple of 10");
                        c.norm.angular_res = static_cast<int>(v);
                    }
                    return static_cast<long long>(c.norm.angular_res);
                },
                10, 10000);

        add_int("lbp.neighbors",
                [](RunConfig& c, long long v, bool set) {
                    if (set) {
                        if (v != 8 && v != 16 && v != 24)
                            throw ConfigError("config: lbp.neighbors must be 8, 16, or 24");
                        c.lbp.neighbors = static_cast<int>(v);
                        c.lbp.radius = v == 8 ? 1 : v == 16 ? 2 : 3;
                    }
                    return static_cast<long long>(c.lbp.neighbors);
                },
                8, 24);
        add_bool("lbp.uniform", [](RunConfig& c) -> bool& { return c.lbp.uniform; });
        add_bool("lbp.append_contrast", [](RunConfig& c) -> bool& { return c.lbp.append_contrast; });

        k.push_back(ConfigKey{
            "lvq.alphas",
            [](RunConfig& c, const std::string& v) {
                std::vector<double> alphas;
                std::stringstream ss(v);
                std::string tok;
                while (std::getline(ss, tok, ',')) {
                    double a;
                    if (!parse_double(tok, a) || !(a > 0.0 && a < 1.0))
                        throw ConfigError(strf("config: lvq.alphas entry '%s' must be in (0,1)",
                                               tok.c_str()));
                    alphas.push_back(a);
                }
                if (alphas.empty()) throw ConfigError("config: lvq.alphas must list at least one rate");
                c.lvq_alphas = std::move(alphas);
            },
            [](const RunConfig& c) {
                std::string out;
                for (size_t i = 0; i < c.lvq_alphas.size(); ++i) {
                    if (i) out += ',';
                    out += format_double(c.lvq_alphas[i]);
                }
                return out;
            }});
        add_int("lvq.epochs",
                [](RunConfig& c, long long v, bool set) {
                    if (set) c.lvq_epochs = static_cast<int>(v);
                    return static_cast<long long>(c.lvq_epochs);
                },
                1, 100000);
        add_int("lvq.prototypes_per_class",
                [](RunConfig& c, long long v, bool set) {
                    if (set) c.lvq_prototypes_per_class = static_cast<int>(v);
                    return static_cast<long long>(c.lvq_prototypes_per_class);
                },
                1, 1000);
        add_int("lvq.cap",
                [](RunConfig& c, long long v, bool set) {
                    if (set) c.lvq_cap = static_cast<int>(v);
                    return static_cast<long long>(c.lvq_cap);
                },
                1, 100000);

        add_int("synth.classes",
                [](RunConfig& c, long long v, bool set) {
                    if (set) c.synth.classes = static_cast<int>(v);
                    return static_cast<long long>(c.synth.classes);
                },
                1, 10000);
        add_int("synth.images_per_class",
                [](RunConfig& c, long long v, bool set) {
                    if (set) c.synth.images_per_class = static_cast<int>(v);
                    return static_cast<long long>(c.synth.images_per_class);
                },
                1, 10000);
        add_int("synth.width",
                [](RunConfig& c, long long v, bool set) {
                    if (set) c.synth.width = static_cast<int>(v);
                    return static_cast<long long>(c.synth.width);
                },
                64, 4096);
        add_int("synth.height",
                [](RunConfig& c, long long v, bool set) {
                    if (set) c.synth.height = static_cast<int>(v);
                    return static_cast<long long>(c.synth.height);
                },
                64, 4096);
        add_double("synth.pupil_r_min", [](RunConfig& c) -> double& { return c.synth.pupil_r_min; }, 5.0,
                   500.0);
        add_double("synth.pupil_r_max", [](RunConfig& c) -> double& { return c.synth.pupil_r_max; }, 5.0,
                   500.0);
        add_double("synth.iris_ratio_min", [](RunConfig& c) -> double& { return c.synth.iris_ratio_min; },
                   1.2, 10.0);
        add_double("synth.iris_ratio_max", [](RunConfig& c) -> double& { return c.synth.iris_ratio_max; },
                   1.2, 10.0);
        add_double("synth.center_jitter", [](RunConfig& c) -> double& { return c.synth.center_jitter; },
                   0.0, 200.0);
        add_double("synth.rotation_jitter_deg",
                   [](RunConfig& c) -> double& { return c.synth.rotation_jitter_deg; }, 0.0, 180.0);
        add_double("synth.noise_sigma", [](RunConfig& c) -> double& { return c.synth.noise_sigma; }, 0.0,
                   64.0);
        add_double("synth.occluder_prob", [](RunConfig& c) -> double& { return c.synth.occluder_prob; },
                   0.0, 1.0);
        return k;
    }();
    return keys;
}

}  // namespace detail

// Cross-field checks that single keys cannot express.
inline void validate_config(const RunConfig& cfg) {
    if (!(cfg.locate.pupil_r_lo < cfg.locate.pupil_r_hi))
        throw ConfigError("config: locate.pupil_r_lo must be below locate.pupil_r_hi");
    if (!(cfg.locate.iris_r_lo < cfg.locate.iris_r_hi))
        throw ConfigError("config: locate.iris_r_lo must be below locate.iris_r_hi");
    if (!(cfg.synth.pupil_r_min <= cfg.synth.pupil_r_max))
        throw ConfigError("config: synth.pupil_r_min must be <= synth.pupil_r_max");
    if (!(cfg.synth.iris_ratio_min <= cfg.synth.iris_ratio_max))
        throw ConfigError("config: synth.iris_ratio_min must be <= synth.iris_ratio_max");
    try {
        cfg.lbp.validate();
        for (const LvqConfig& m : cfg.member_configs()) m.validate();
    } catch (const ParameterError& e) {
        throw ConfigError(strf("config: %s", e.what()));
    }
}

inline void set_config_key(RunConfig& cfg, const std::string& key, const std::string& value) {
    for (const auto& k : detail::config_keys()) {
        if (k.name == key) {
            k.set(cfg, value);
            return;
        }
    }
    throw ConfigError(strf("config: unknown key '%s'", key.c_str()));
}

// Parses "key = value" lines; '#' starts a comment, blank lines are fine.
inline void apply_config_text(RunConfig& cfg, std::istream& in, const char* source) {
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        size_t hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        size_t begin = line.find_first_not_of(" \t\r");
        if (begin == std::string::npos) continue;
        size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(strf("%s:%d: expected 'key = value', got '%s'", source, lineno,
                                   line.c_str()));
        auto trim = [](std::string s) {
            size_t a = s.find_first_not_of(" \t\r");
            size_t b = s.find_last_not_of(" \t\r");
            return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
        };
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (key.empty() || value.empty())
            throw ConfigError(strf("%s:%d: empty key or value", source, lineno));
        set_config_key(cfg, key, value);
    }
    validate_config(cfg);
}

inline void apply_config_file(RunConfig& cfg, const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(strf("cannot open config %s", path.string().c_str()));
    apply_config_text(cfg, in, path.string().c_str());
}

// Every key in declaration order with its effective value; embedded in
// reports for provenance.
inline std::string echo_config(const RunConfig& cfg) {
    std::string out;
    for (const auto& k : detail::config_keys()) out += strf("  %s = %s\n", k.name.c_str(), k.get(cfg).c_str());
    return out;
}

}  // namespace iris
