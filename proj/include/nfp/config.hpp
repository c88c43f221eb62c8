#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "nfp/errors.hpp"
#include "nfp/network.hpp"
#include "nfp/optim.hpp"
#include "nfp/tasks.hpp"

namespace nfp {

// ------------------------------------------------------------ config model

struct TaskConfig {
    std::string kind = "1d";      // 1d | image | occupancy
    std::int64_t n_points = 256;  // 1d grid size / occupancy sample count
    std::string source = "chirp";  // image: builtin name or .ppm path
    int size = 64;                 // image: builtin pattern size
    std::string shape = "sphere";  // occupancy: analytic shape or mesh path
};

struct NetConfig {
    std::vector<std::int64_t> hidden = {16, 16};
    std::string activation = "gaussian";  // relu | sine | gaussian | wavelet | sinc
    std::optional<double> sigma;          // gaussian width
    std::optional<double> omega0;         // sine / wavelet frequency
    std::optional<double> s;              // wavelet envelope width
    std::optional<double> a;              // sinc bandwidth
    bool encoding = false;
    int bands = 6;
    bool include_input = true;
    std::string init = "auto";  // auto | siren | glorot
};

struct TrainConfig {
    std::int64_t epochs = 1;
    std::int64_t iters = -1;  // >= 0 overrides the epoch-derived budget
    std::int64_t batch = 0;   // 0 = full batch
    std::int64_t eval_interval = 50;
    std::int64_t snapshot_interval = 0;    // PPM snapshots (image tasks); 0 = final only
    std::int64_t checkpoint_interval = 0;  // 0 = final checkpoint only
};

struct DiagConfig {
    bool sparsity = false;
    bool kappa = false;
};

struct ExperimentConfig {
    TaskConfig task;
    NetConfig net;
    OptimizerConfig optim;
    TrainConfig train;
    DiagConfig diag;
    std::uint64_t seed = 0;
    bool seed_set = false;  // seed is mandatory; no entropy default
    std::string out_dir = "out";
    bool wall_clock = false;  // false keeps metrics.csv byte-reproducible

    ActivationKind make_activation() const {
        if (net.activation == "relu") return ActivationKind::relu();
        if (net.activation == "sine") return ActivationKind::sine(net.omega0.value_or(30.0));
        if (net.activation == "gaussian") return ActivationKind::gaussian(net.sigma.value_or(0.05));
        if (net.activation == "wavelet")
            return ActivationKind::wavelet(net.omega0.value_or(10.0), net.s.value_or(1.0));
        if (net.activation == "sinc") return ActivationKind::sinc(net.a.value_or(30.0));
        throw ConfigError("config: unknown activation '" + net.activation + "'");
    }

    InitScheme make_init() const {
        if (net.init == "auto") return InitScheme::kAuto;
        if (net.init == "siren") return InitScheme::kSiren;
        if (net.init == "glorot") return InitScheme::kGlorot;
        throw ConfigError("config: unknown init scheme '" + net.init + "'");
    }

    // Input/output dims follow the task; everything else from net config.
    NetworkSpec make_network_spec() const {
        NetworkSpec spec;
        if (task.kind == "1d") {
            spec.input_dim = 1;
            spec.output_dim = 1;
        } else if (task.kind == "image") {
            spec.input_dim = 2;
            spec.output_dim = 3;
        } else if (task.kind == "occupancy") {
            spec.input_dim = 3;
            spec.output_dim = 1;
        } else {
            throw ConfigError("config: unknown task kind '" + task.kind + "'");
        }
        spec.hidden = net.hidden;
        spec.activation = make_activation();
        spec.has_encoding = net.encoding;
        spec.encoding = {net.bands, net.include_input};
        spec.init = make_init();
        spec.validate();
        return spec;
    }

    void validate() const {
        if (!seed_set) throw ConfigError("config: seed is mandatory");
        make_network_spec();
        optim.validate();
        if (train.epochs < 0 || (train.iters < 0 && train.iters != -1))
            throw ConfigError("config: training budget must be >= 0");
        if (train.eval_interval < 1) throw ConfigError("config: eval interval must be >= 1");
        if (train.batch < 0) throw ConfigError("config: batch must be >= 0");
        if (task.kind == "1d" && task.n_points < 2)
            throw ConfigError("config: 1d task needs >= 2 points");
        if (task.kind == "occupancy" && task.n_points < 3)
            throw ConfigError("config: occupancy task needs >= 3 points");
    }
};

// ------------------------------------------------------------- key=value IO

namespace detail {

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

inline bool parse_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ConfigError("config: bad boolean for " + key + ": '" + v + "'");
}

inline double parse_double(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        const double d = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return d;
    } catch (const std::exception&) {
        throw ConfigError("config: bad number for " + key + ": '" + v + "'");
    }
}

inline std::int64_t parse_int(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        const std::int64_t i = std::stoll(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return i;
    } catch (const std::exception&) {
        throw ConfigError("config: bad integer for " + key + ": '" + v + "'");
    }
}

inline std::uint64_t parse_uint(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        const std::uint64_t i = std::stoull(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return i;
    } catch (const std::exception&) {
        throw ConfigError("config: bad unsigned integer for " + key + ": '" + v + "'");
    }
}

inline std::vector<std::int64_t> parse_int_list(const std::string& key, const std::string& v) {
    std::vector<std::int64_t> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(parse_int(key, item));
    }
    if (out.empty()) throw ConfigError("config: empty list for " + key);
    return out;
}

// shortest round-trip decimal for doubles, so serialize/parse is lossless
inline std::string format_double(double v) {
    char buf[64];
    for (int prec = 15; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
        if (std::stod(buf) == v) break;
    }
    return buf;
}

}  // namespace detail

// Applies one dotted key. Shared by the text parser, the JSON loader, and
// CLI overrides, so every entry point accepts the same schema.
inline void apply_config_key(ExperimentConfig& cfg, const std::string& key,
                             const std::string& value) {
    using namespace detail;
    if (key == "seed") {
        cfg.seed = parse_uint(key, value);
        cfg.seed_set = true;
    } else if (key == "out_dir") {
        cfg.out_dir = value;
    } else if (key == "wall_clock") {
        cfg.wall_clock = parse_bool(key, value);
    } else if (key == "task.kind") {
        if (value != "1d" && value != "image" && value != "occupancy")
            throw ConfigError("config: unknown task kind '" + value + "'");
        cfg.task.kind = value;
    } else if (key == "task.n_points") {
        cfg.task.n_points = parse_int(key, value);
    } else if (key == "task.source") {
        cfg.task.source = value;
    } else if (key == "task.size") {
        cfg.task.size = static_cast<int>(parse_int(key, value));
    } else if (key == "task.shape") {
        cfg.task.shape = value;
    } else if (key == "net.hidden") {
        cfg.net.hidden = parse_int_list(key, value);
    } else if (key == "net.activation") {
        cfg.net.activation = value;
    } else if (key == "net.sigma") {
        cfg.net.sigma = parse_double(key, value);
    } else if (key == "net.omega0") {
        cfg.net.omega0 = parse_double(key, value);
    } else if (key == "net.s") {
        cfg.net.s = parse_double(key, value);
    } else if (key == "net.a") {
        cfg.net.a = parse_double(key, value);
    } else if (key == "net.encoding") {
        cfg.net.encoding = parse_bool(key, value);
    } else if (key == "net.bands") {
        cfg.net.bands = static_cast<int>(parse_int(key, value));
    } else if (key == "net.include_input") {
        cfg.net.include_input = parse_bool(key, value);
    } else if (key == "net.init") {
        cfg.net.init = value;
    } else if (key == "optim.algorithm") {
        cfg.optim.algorithm = algorithm_from_name(value);
        cfg.optim.damping = OptimizerConfig::default_damping(cfg.optim.algorithm);
    } else if (key == "optim.eta") {
        cfg.optim.eta = parse_double(key, value);
    } else if (key == "optim.beta1") {
        cfg.optim.beta1 = parse_double(key, value);
    } else if (key == "optim.beta2") {
        cfg.optim.beta2 = parse_double(key, value);
    } else if (key == "optim.damping") {
        cfg.optim.damping = parse_double(key, value);
    } else if (key == "optim.refresh_every") {
        cfg.optim.refresh_every = static_cast<int>(parse_int(key, value));
    } else if (key == "optim.probes") {
        cfg.optim.probes_per_refresh = static_cast<int>(parse_int(key, value));
    } else if (key == "optim.shampoo_interval") {
        cfg.optim.shampoo_interval = static_cast<int>(parse_int(key, value));
    } else if (key == "optim.shampoo_eps") {
        cfg.optim.shampoo_eps = parse_double(key, value);
    } else if (key == "train.epochs") {
        cfg.train.epochs = parse_int(key, value);
    } else if (key == "train.iters") {
        cfg.train.iters = parse_int(key, value);
    } else if (key == "train.batch") {
        cfg.train.batch = parse_int(key, value);
    } else if (key == "train.eval_interval") {
        cfg.train.eval_interval = parse_int(key, value);
    } else if (key == "train.snapshot_interval") {
        cfg.train.snapshot_interval = parse_int(key, value);
    } else if (key == "train.checkpoint_interval") {
        cfg.train.checkpoint_interval = parse_int(key, value);
    } else if (key == "diag.sparsity") {
        cfg.diag.sparsity = parse_bool(key, value);
    } else if (key == "diag.kappa") {
        cfg.diag.kappa = parse_bool(key, value);
    } else {
        throw ConfigError("config: unknown key '" + key + "'");
    }
}

// Flat `key = value` lines; '#' comments; blank lines ignored.
inline ExperimentConfig parse_config_text(const std::string& body) {
    ExperimentConfig cfg;
    std::istringstream in(body);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config: line " + std::to_string(lineno) + " is not key=value");
        const std::string key = detail::trim(line.substr(0, eq));
        const std::string value = detail::trim(line.substr(eq + 1));
        apply_config_key(cfg, key, value);
    }
    return cfg;
}

namespace detail {

inline std::string json_scalar_to_string(const nlohmann::json& j) {
    if (j.is_string()) return j.get<std::string>();
    if (j.is_boolean()) return j.get<bool>() ? "true" : "false";
    return j.dump();
}

inline void flatten_json(const nlohmann::json& j, const std::string& prefix,
                         ExperimentConfig& cfg) {
    for (const auto& [k, v] : j.items()) {
        const std::string key = prefix.empty() ? k : prefix + "." + k;
        if (v.is_object()) {
            flatten_json(v, key, cfg);
        } else if (v.is_array()) {
            std::string joined;
            for (const auto& item : v) {
                if (!joined.empty()) joined += ",";
                joined += json_scalar_to_string(item);
            }
            apply_config_key(cfg, key, joined);
        } else {
            apply_config_key(cfg, key, json_scalar_to_string(v));
        }
    }
}

}  // namespace detail

// JSON documents use nested sections ({"optim": {"eta": 0.01}}) mapping to
// the same dotted keys as the text format.
inline ExperimentConfig parse_config_json(const std::string& body) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(body);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("config: JSON parse failure: ") + e.what());
    }
    if (!j.is_object()) throw ConfigError("config: JSON root must be an object");
    ExperimentConfig cfg;
    detail::flatten_json(j, "", cfg);
    return cfg;
}

// Referenced files must exist at load time, not at first use deep inside a run.
inline void check_referenced_files(const ExperimentConfig& cfg) {
    if (cfg.task.kind == "image" && cfg.task.source != "chirp" &&
        !std::filesystem::exists(cfg.task.source))
        throw ConfigError("config: image source '" + cfg.task.source + "' does not exist");
    if (cfg.task.kind == "occupancy" && cfg.task.shape.find('.') != std::string::npos &&
        !std::filesystem::exists(cfg.task.shape))
        throw ConfigError("config: mesh '" + cfg.task.shape + "' does not exist");
}

inline ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open '" + path + "'");
    std::ostringstream body;
    body << in.rdbuf();
    const bool json = path.size() >= 5 && path.substr(path.size() - 5) == ".json";
    ExperimentConfig cfg = json ? parse_config_json(body.str()) : parse_config_text(body.str());
    check_referenced_files(cfg);
    return cfg;
}

// Every field explicit, so parse(config_to_text(c)) reproduces c exactly.
inline std::string config_to_text(const ExperimentConfig& cfg) {
    using detail::format_double;
    std::ostringstream out;
    out << "seed = " << cfg.seed << "\n";
    out << "out_dir = " << cfg.out_dir << "\n";
    out << "wall_clock = " << (cfg.wall_clock ? "true" : "false") << "\n";
    out << "task.kind = " << cfg.task.kind << "\n";
    out << "task.n_points = " << cfg.task.n_points << "\n";
    out << "task.source = " << cfg.task.source << "\n";
    out << "task.size = " << cfg.task.size << "\n";
    out << "task.shape = " << cfg.task.shape << "\n";
    out << "net.hidden = ";
    for (std::size_t i = 0; i < cfg.net.hidden.size(); ++i)
        out << (i ? "," : "") << cfg.net.hidden[i];
    out << "\n";
    out << "net.activation = " << cfg.net.activation << "\n";
    if (cfg.net.sigma) out << "net.sigma = " << format_double(*cfg.net.sigma) << "\n";
    if (cfg.net.omega0) out << "net.omega0 = " << format_double(*cfg.net.omega0) << "\n";
    if (cfg.net.s) out << "net.s = " << format_double(*cfg.net.s) << "\n";
    if (cfg.net.a) out << "net.a = " << format_double(*cfg.net.a) << "\n";
    out << "net.encoding = " << (cfg.net.encoding ? "true" : "false") << "\n";
    out << "net.bands = " << cfg.net.bands << "\n";
    out << "net.include_input = " << (cfg.net.include_input ? "true" : "false") << "\n";
    out << "net.init = " << cfg.net.init << "\n";
    out << "optim.algorithm = " << algorithm_name(cfg.optim.algorithm) << "\n";
    out << "optim.eta = " << format_double(cfg.optim.eta) << "\n";
    out << "optim.beta1 = " << format_double(cfg.optim.beta1) << "\n";
    out << "optim.beta2 = " << format_double(cfg.optim.beta2) << "\n";
    out << "optim.damping = " << format_double(cfg.optim.damping) << "\n";
    out << "optim.refresh_every = " << cfg.optim.refresh_every << "\n";
    out << "optim.probes = " << cfg.optim.probes_per_refresh << "\n";
    out << "optim.shampoo_interval = " << cfg.optim.shampoo_interval << "\n";
    out << "optim.shampoo_eps = " << format_double(cfg.optim.shampoo_eps) << "\n";
    out << "train.epochs = " << cfg.train.epochs << "\n";
    out << "train.iters = " << cfg.train.iters << "\n";
    out << "train.batch = " << cfg.train.batch << "\n";
    out << "train.eval_interval = " << cfg.train.eval_interval << "\n";
    out << "train.snapshot_interval = " << cfg.train.snapshot_interval << "\n";
    out << "train.checkpoint_interval = " << cfg.train.checkpoint_interval << "\n";
    out << "diag.sparsity = " << (cfg.diag.sparsity ? "true" : "false") << "\n";
    out << "diag.kappa = " << (cfg.diag.kappa ? "true" : "false") << "\n";
    return out.str();
}

}  // namespace nfp
