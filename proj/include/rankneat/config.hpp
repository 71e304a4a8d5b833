#pragma once

#include "rankneat/dataset.hpp"
#include "rankneat/evaluation.hpp"
#include "rankneat/neat.hpp"
#include "rankneat/sgd.hpp"
#include "rankneat/synthetic.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace rankneat {

/// Everything a CLI invocation can configure. Loaded from a `key = value`
/// file (blank lines and `#` comments ignored); flags override the file.
struct RunConfig {
    std::string features;
    std::string annotations;
    std::string out = "out";
    TrainerKind trainer = TrainerKind::RankNeat;
    std::uint64_t seed = 1;
    std::size_t jobs = 1;

    DatasetConfig dataset;
    std::vector<double> thresholds{0.25};
    std::size_t folds = 10;
    std::size_t runs = 5;
    std::size_t budget = 1500;

    SgdConfig sgd;
    NeatConfig neat;
    SyntheticSpec synthetic;
    std::size_t bayes_samples = 0;  // 0 disables the oracle estimate in gen-synth

    /// Throws InvalidArgument for unknown keys or malformed values.
    void set(std::string_view key, std::string_view value);

    /// Renders the config in the file format; parsing it back yields an equal config.
    std::string dump() const;

    ExperimentSettings experiment_settings() const;
    TrainerSpec trainer_spec() const;
    SyntheticSpec synthetic_spec() const;

    bool operator==(const RunConfig&) const = default;
};

struct ConfigKey {
    std::string_view name;
    std::string_view flag;  // long flag without the leading dashes
    std::string_view help;
    std::function<void(RunConfig&, std::string_view)> set;
    std::function<std::string(const RunConfig&)> get;
};

std::span<const ConfigKey> config_keys();

RunConfig parse_config(std::istream& in);
RunConfig load_config(const std::filesystem::path& path);

}  // namespace rankneat
