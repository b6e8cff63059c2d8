#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace hoconv::cli {

inline constexpr std::string_view kToolName = "hoconv";
inline constexpr std::string_view kToolVersion = "0.1.0";

/// Command names accepted by the entry point.
const std::vector<std::string>& command_names();

/// Default configuration of a command; its keys are the only ones accepted.
nlohmann::json default_config(std::string_view command);

/// Values given on the command line. Unset fields leave the file/defaults alone.
struct FlagOverrides {
    std::optional<std::string> out;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> seeds;  // "1,2,3" list or a count "10"
};

/// Effective configuration: defaults, then the JSON file, then flags.
class ExperimentConfig {
public:
    /// Throws ConfigError on unknown keys, type mismatches or bad values.
    static ExperimentConfig load(std::string_view command, const std::optional<std::filesystem::path>& file,
                                 const FlagOverrides& flags);
    static ExperimentConfig from_json(std::string_view command, const nlohmann::json& overrides,
                                      const FlagOverrides& flags = {});

    const std::string& command() const noexcept { return command_; }
    const nlohmann::json& values() const noexcept { return json_; }

    /// Canonical text (sorted keys, compact) and its SHA-256 in hex.
    std::string canonical() const { return json_.dump(); }
    const std::string& sha256() const noexcept { return sha256_; }

    template <class T>
    T get(const std::string& key) const {
        return json_.at(key).get<T>();
    }
    bool has(const std::string& key) const { return json_.contains(key); }

    std::filesystem::path out_dir() const { return get<std::string>("out"); }
    std::vector<std::uint64_t> seeds() const { return get<std::vector<std::uint64_t>>("seeds"); }

private:
    std::string command_;
    nlohmann::json json_;
    std::string sha256_;
};

/// Hex SHA-256 of a byte string.
std::string sha256_hex(std::string_view data);

/// Expands a seed spec: a JSON array is taken as-is, an integer N becomes
/// base, base+1, ..., base+N-1.
std::vector<std::uint64_t> expand_seeds(const nlohmann::json& spec, std::uint64_t base);

/// Parses "--seeds" text: a comma list ("3,5,8") or a single count ("10").
nlohmann::json parse_seeds_flag(std::string_view text);

/// Thread count from the flag, else HOCONV_THREADS, else 1.
int resolve_threads(std::optional<int> flag);

}  // namespace hoconv::cli
