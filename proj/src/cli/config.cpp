#include "hoconv/cli/config.hpp"

#include <charconv>
#include <cstdlib>

#include <openssl/evp.h>

#include "hoconv/core/errors.hpp"
#include "hoconv/core/io.hpp"

namespace hoconv::cli {

using nlohmann::json;

namespace {

json common_defaults() { return {{"out", "out"}}; }

json training_defaults() {
    return {{"lr", 1e-3},          {"weight_decay", 5e-4},        {"batch_size", 64},
            {"max_epochs", 100},   {"plateau_patience", 5},       {"plateau_factor", 0.5},
            {"early_stop_patience", 12}};
}

void merge(json& into, const json& from) {
    for (auto it = from.begin(); it != from.end(); ++it) into[it.key()] = it.value();
}

bool same_kind(const json& a, const json& b) {
    if (a.is_number() && b.is_number()) {
        if (a.is_number_float()) return true;
        return b.is_number_integer() || b.is_number_unsigned();
    }
    return a.type() == b.type();
}

std::uint64_t parse_u64(std::string_view s, std::string_view what) {
    std::uint64_t v = 0;
    const auto* end = s.data() + s.size();
    auto [p, ec] = std::from_chars(s.data(), end, v);
    if (ec != std::errc{} || p != end) throw ConfigError("invalid " + std::string(what) + " '" + std::string(s) + "'");
    return v;
}

void check_positive(const json& cfg, const char* key) {
    if (cfg.contains(key) && cfg.at(key).get<double>() <= 0) {
        throw ConfigError(std::string("config key '") + key + "' must be positive");
    }
}

}  // namespace

const std::vector<std::string>& command_names() {
    static const std::vector<std::string> names = {"gen", "train", "eval", "pca-tied", "rsa", "perturb", "flops"};
    return names;
}

json default_config(std::string_view command) {
    json d = common_defaults();
    const json dataset = {{"seed", 0}, {"level", 1.0}, {"height", 32}, {"width", 32}};
    if (command == "gen") {
        merge(d, dataset);
        merge(d, {{"train_size", 2000}, {"val_size", 1000}, {"test_size", 2000}});
    } else if (command == "train") {
        merge(d, training_defaults());
        merge(d, {{"data", "data"}, {"model", "hocnn3"}, {"activation", "relu"}, {"seed", 0}, {"seeds", 10}});
    } else if (command == "eval") {
        merge(d, {{"data", "data"}, {"checkpoint", ""}, {"split", "test"}});
    } else if (command == "pca-tied") {
        merge(d, {{"seed", 0},
                  {"level", 1.0},
                  {"n_inits", 1000},
                  {"threshold", 0.95},
                  {"models", {"cnn", "hocnn2", "hocnn3"}},
                  {"nonlinearities", {"relu"}}});
    } else if (command == "rsa") {
        merge(d, {{"data", "data"},
                  {"checkpoints", "out"},
                  {"model_a", "cnn"},
                  {"model_b", "hocnn3"},
                  {"seed", 0},
                  {"seeds", 10},
                  {"stimuli_per_class", 10},
                  {"n_bins", 20},
                  {"layers", {"block1", "block2", "logits"}}});
    } else if (command == "perturb") {
        merge(d, {{"data", "data"},
                  {"checkpoints", "out"},
                  {"models", {"cnn", "hocnn3"}},
                  {"seed", 0},
                  {"seeds", 10},
                  {"texture_seed", 12345},
                  {"level", 1.0},
                  {"intensities", {0.05, 0.09, 0.12, 0.16, 0.20}}});
    } else if (command == "flops") {
        merge(d, {{"kh", 3}, {"kw", 3}, {"c_in", 1}, {"c_out", 64}, {"max_order", 4}, {"height", 32}, {"width", 32}});
    } else {
        throw ConfigError("unknown command '" + std::string(command) + "'");
    }
    return d;
}

ExperimentConfig ExperimentConfig::load(std::string_view command, const std::optional<std::filesystem::path>& file,
                                        const FlagOverrides& flags) {
    json overrides = json::object();
    if (file) {
        std::string text;
        try {
            text = read_text(*file);
        } catch (const IoError& e) {
            throw ConfigError(e.what());
        }
        try {
            overrides = json::parse(text);
        } catch (const json::parse_error& e) {
            throw ConfigError(file->string() + ": invalid JSON: " + e.what());
        }
        if (!overrides.is_object()) throw ConfigError(file->string() + ": config must be a JSON object");
    }
    return from_json(command, overrides, flags);
}

ExperimentConfig ExperimentConfig::from_json(std::string_view command, const json& overrides,
                                             const FlagOverrides& flags) {
    ExperimentConfig c;
    c.command_ = std::string(command);
    json cfg = default_config(command);
    for (auto it = overrides.begin(); it != overrides.end(); ++it) {
        if (!cfg.contains(it.key())) {
            throw ConfigError("unknown config key '" + it.key() + "' for command '" + c.command_ + "'");
        }
        const json& def = cfg[it.key()];
        const bool seeds_key = it.key() == "seeds" && (it.value().is_array() || it.value().is_number_unsigned() ||
                                                       it.value().is_number_integer());
        if (!seeds_key && !same_kind(def, it.value())) {
            throw ConfigError("config key '" + it.key() + "' has the wrong type");
        }
        cfg[it.key()] = it.value();
    }
    if (flags.out) cfg["out"] = *flags.out;
    if (flags.seed) {
        if (!cfg.contains("seed")) throw ConfigError("command '" + c.command_ + "' does not take --seed");
        cfg["seed"] = *flags.seed;
    }
    if (flags.seeds) {
        if (!cfg.contains("seeds")) throw ConfigError("command '" + c.command_ + "' does not take --seeds");
        cfg["seeds"] = parse_seeds_flag(*flags.seeds);
    }
    if (cfg.contains("seeds")) {
        try {
            cfg["seeds"] = expand_seeds(cfg["seeds"], cfg.value("seed", std::uint64_t{0}));
        } catch (const json::exception& e) {
            throw ConfigError(std::string("invalid seeds: ") + e.what());
        }
        if (cfg["seeds"].empty()) throw ConfigError("seed list is empty");
    }
    if (cfg.contains("level")) {
        const double level = cfg["level"].get<double>();
        if (!(level >= 0.0 && level <= 1.0)) throw ConfigError("level must lie in [0, 1]");
    }
    for (const char* key : {"lr", "batch_size", "max_epochs", "plateau_factor", "n_inits", "threshold", "n_bins",
                            "stimuli_per_class", "height", "width", "kh", "kw", "c_in", "c_out", "max_order"}) {
        check_positive(cfg, key);
    }
    c.json_ = std::move(cfg);
    c.sha256_ = sha256_hex(c.canonical());
    return c;
}

std::string sha256_hex(std::string_view data) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
        throw std::runtime_error("SHA-256 computation failed");
    }
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    out.reserve(2 * len);
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(hex[digest[i] >> 4]);
        out.push_back(hex[digest[i] & 0xF]);
    }
    return out;
}

std::vector<std::uint64_t> expand_seeds(const json& spec, std::uint64_t base) {
    if (spec.is_array()) return spec.get<std::vector<std::uint64_t>>();
    if (spec.is_number_integer() || spec.is_number_unsigned()) {
        const auto n = spec.get<std::int64_t>();
        if (n < 1) throw ConfigError("seed count must be positive");
        std::vector<std::uint64_t> seeds;
        for (std::int64_t i = 0; i < n; ++i) seeds.push_back(base + static_cast<std::uint64_t>(i));
        return seeds;
    }
    throw ConfigError("seeds must be a list or a count");
}

json parse_seeds_flag(std::string_view text) {
    if (text.find(',') == std::string_view::npos) return parse_u64(text, "seed count");
    json list = json::array();
    std::size_t start = 0;
    while (start <= text.size()) {
        const auto comma = text.find(',', start);
        const auto item = text.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
        list.push_back(parse_u64(item, "seed"));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return list;
}

int resolve_threads(std::optional<int> flag) {
    if (flag) {
        if (*flag < 1) throw ConfigError("--threads must be at least 1");
        return *flag;
    }
    if (const char* env = std::getenv("HOCONV_THREADS"); env && *env) {
        const auto v = parse_u64(env, "HOCONV_THREADS");
        if (v < 1) throw ConfigError("HOCONV_THREADS must be at least 1");
        return static_cast<int>(v);
    }
    return 1;
}

}  // namespace hoconv::cli
