#include "rankneat/config.hpp"

#include "rankneat/error.hpp"
#include "text.hpp"

#include <algorithm>
#include <charconv>
#include <fmt/format.h>
#include <fstream>
#include <istream>

namespace rankneat {

namespace {

Error bad_value(std::string_view key, std::string_view value, std::string_view expected) {
    return Error(ErrorKind::InvalidArgument,
                 fmt::format("{} = '{}': expected {}", key, value, expected));
}

double to_real(std::string_view key, std::string_view value) {
    try {
        return detail::parse_finite(value, std::string(key));
    } catch (const Error&) {
        throw bad_value(key, value, "a finite number");
    }
}

template <class Int>
Int to_integer(std::string_view key, std::string_view value) {
    value = detail::trim(value);
    Int out{};
    const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
    if (ec != std::errc() || ptr != value.data() + value.size()) {
        throw bad_value(key, value, "a non-negative integer");
    }
    return out;
}

std::vector<double> to_real_list(std::string_view key, std::string_view value) {
    std::vector<double> out;
    for (auto item : detail::split_csv(value)) out.push_back(to_real(key, item));
    if (out.empty()) throw bad_value(key, value, "a comma separated list of numbers");
    return out;
}

std::string real(double v) { return fmt::format("{}", v); }

template <class Member>
ConfigKey real_key(std::string_view name, std::string_view flag, std::string_view help, Member member) {
    return {name, flag, help,
            [name, member](RunConfig& c, std::string_view v) { std::invoke(member, c) = to_real(name, v); },
            [member](const RunConfig& c) { return real(std::invoke(member, c)); }};
}

template <class Int, class Member>
ConfigKey int_key(std::string_view name, std::string_view flag, std::string_view help, Member member) {
    return {name, flag, help,
            [name, member](RunConfig& c, std::string_view v) {
                std::invoke(member, c) = to_integer<Int>(name, v);
            },
            [member](const RunConfig& c) { return std::to_string(std::invoke(member, c)); }};
}

ConfigKey string_key(std::string_view name, std::string_view flag, std::string_view help,
                     std::string RunConfig::*member) {
    return {name, flag, help,
            [member](RunConfig& c, std::string_view v) { c.*member = std::string(detail::trim(v)); },
            [member](const RunConfig& c) { return c.*member; }};
}

std::vector<ConfigKey> build_keys() {
    using C = RunConfig;
    std::vector<ConfigKey> keys;
    keys.push_back(string_key("features", "features", "features CSV", &C::features));
    keys.push_back(string_key("annotations", "annotations", "annotations CSV", &C::annotations));
    keys.push_back(string_key("out", "out", "output directory", &C::out));
    keys.push_back({"trainer", "trainer", "ranknet or rankneat",
                    [](C& c, std::string_view v) { c.trainer = parse_trainer(detail::trim(v)); },
                    [](const C& c) { return std::string(to_string(c.trainer)); }});
    keys.push_back(int_key<std::uint64_t>("seed", "seed", "master seed", &C::seed));
    keys.push_back(int_key<std::size_t>("jobs", "jobs", "worker threads", &C::jobs));

    keys.push_back(real_key("window_seconds", "window-seconds", "label window length (s)",
                            [](auto& c) -> auto& { return c.dataset.window_seconds; }));
    keys.push_back(real_key("lag_seconds", "lag-seconds", "annotation lag (s)",
                            [](auto& c) -> auto& { return c.dataset.lag_seconds; }));
    keys.push_back({"preference_threshold", "pt", "preference threshold(s), comma separated",
                    [](C& c, std::string_view v) {
                        auto list = to_real_list("preference_threshold", v);
                        for (double t : list) {
                            if (!(t > 0.0 && t < 1.0)) {
                                throw bad_value("preference_threshold", v, "values in (0,1)");
                            }
                        }
                        c.thresholds = std::move(list);
                    },
                    [](const C& c) {
                        std::string out;
                        for (double t : c.thresholds) out += (out.empty() ? "" : ",") + real(t);
                        return out;
                    }});
    keys.push_back(int_key<std::size_t>("folds", "folds", "cross-validation folds", &C::folds));
    keys.push_back(int_key<std::size_t>("runs", "runs", "independent runs", &C::runs));
    keys.push_back(int_key<std::size_t>("budget", "budget", "iteration budget", &C::budget));

    keys.push_back(int_key<std::size_t>("batch_number", "bn", "RankNet pairs per epoch",
                                        [](auto& c) -> auto& { return c.sgd.batch_number; }));
    keys.push_back(real_key("learning_rate", "learning-rate", "RankNet SGD step size",
                            [](auto& c) -> auto& { return c.sgd.learning_rate; }));

    keys.push_back(int_key<std::size_t>("population_size", "pop", "RankNEAT population",
                                        [](auto& c) -> auto& { return c.neat.population_size; }));
    keys.push_back(real_key("compatibility_threshold", "compatibility-threshold", "speciation threshold",
                            [](auto& c) -> auto& { return c.neat.compatibility_threshold; }));
    keys.push_back(int_key<std::size_t>("elitism_per_species", "elitism", "elites kept per species",
                                        [](auto& c) -> auto& { return c.neat.elitism_per_species; }));
    keys.push_back(real_key("node_mutation_rate", "node-mutation-rate", "must stay 0",
                            [](auto& c) -> auto& { return c.neat.node_mutation_rate; }));
    keys.push_back(real_key("edge_add_rate", "edge-add-rate", "edge insertion probability",
                            [](auto& c) -> auto& { return c.neat.edge_add_rate; }));
    keys.push_back(real_key("edge_delete_rate", "edge-delete-rate", "edge deletion probability",
                            [](auto& c) -> auto& { return c.neat.edge_delete_rate; }));
    keys.push_back(real_key("weight_mutation_rate", "weight-mutation-rate", "per-gene perturbation probability",
                            [](auto& c) -> auto& { return c.neat.weight_mutation_rate; }));
    keys.push_back(real_key("weight_perturb_std", "weight-perturb-std", "perturbation std",
                            [](auto& c) -> auto& { return c.neat.weight_perturb_std; }));
    keys.push_back(real_key("weight_replace_rate", "weight-replace-rate", "per-gene replacement probability",
                            [](auto& c) -> auto& { return c.neat.weight_replace_rate; }));
    keys.push_back(real_key("survival_threshold", "survival-threshold", "parent fraction per species",
                            [](auto& c) -> auto& { return c.neat.survival_threshold; }));
    keys.push_back(int_key<std::size_t>("stagnation_limit", "stagnation-limit", "generations without improvement",
                                        [](auto& c) -> auto& { return c.neat.stagnation_limit; }));
    keys.push_back(real_key("crossover_rate", "crossover-rate", "crossover probability",
                            [](auto& c) -> auto& { return c.neat.crossover_rate; }));
    keys.push_back(real_key("compatibility_disjoint_coefficient", "compatibility-disjoint", "disjoint-gene coefficient",
                            [](auto& c) -> auto& { return c.neat.compatibility.disjoint; }));
    keys.push_back(real_key("compatibility_weight_coefficient", "compatibility-weight", "weight-difference coefficient",
                            [](auto& c) -> auto& { return c.neat.compatibility.weight; }));

    keys.push_back(int_key<std::size_t>("synth_dimension", "synth-dimension", "synthetic feature dimension",
                                        [](auto& c) -> auto& { return c.synthetic.dimension; }));
    keys.push_back(real_key("synth_signal_fraction", "synth-signal-fraction", "fraction of informative features",
                            [](auto& c) -> auto& { return c.synthetic.signal_fraction; }));
    keys.push_back(int_key<std::size_t>("synth_participants", "synth-participants", "synthetic participants",
                                        [](auto& c) -> auto& { return c.synthetic.participants; }));
    keys.push_back(int_key<std::size_t>("synth_windows", "synth-windows", "windows per synthetic session",
                                        [](auto& c) -> auto& { return c.synthetic.windows_per_session; }));
    keys.push_back(real_key("synth_noise", "synth-noise", "label noise std",
                            [](auto& c) -> auto& { return c.synthetic.label_noise_std; }));
    keys.push_back(int_key<std::size_t>("bayes_samples", "bayes-samples", "Monte-Carlo pairs for the oracle (0 = off)",
                                        &C::bayes_samples));
    return keys;
}

}  // namespace

std::span<const ConfigKey> config_keys() {
    static const std::vector<ConfigKey> keys = build_keys();
    return keys;
}

void RunConfig::set(std::string_view key, std::string_view value) {
    const auto keys = config_keys();
    const auto it = std::find_if(keys.begin(), keys.end(), [&](const auto& k) { return k.name == key; });
    if (it == keys.end()) throw Error(ErrorKind::InvalidArgument, fmt::format("unknown config key '{}'", key));
    it->set(*this, value);
}

std::string RunConfig::dump() const {
    std::string out;
    for (const auto& key : config_keys()) out += fmt::format("{} = {}\n", key.name, key.get(*this));
    return out;
}

ExperimentSettings RunConfig::experiment_settings() const {
    return {thresholds.front(), folds, runs, budget, seed, jobs};
}

TrainerSpec RunConfig::trainer_spec() const { return {trainer, sgd, neat}; }

SyntheticSpec RunConfig::synthetic_spec() const {
    auto spec = synthetic;
    spec.window_seconds = dataset.window_seconds;
    spec.lag_seconds = dataset.lag_seconds;
    spec.seed = seed;
    return spec;
}

RunConfig parse_config(std::istream& in) {
    RunConfig config;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::string_view view = line;
        if (const auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
        view = detail::trim(view);
        if (view.empty()) continue;
        const auto eq = view.find('=');
        if (eq == std::string_view::npos) {
            throw Error(ErrorKind::InvalidArgument, fmt::format("config line {}: expected key = value", line_no));
        }
        config.set(detail::trim(view.substr(0, eq)), detail::trim(view.substr(eq + 1)));
    }
    return config;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::InvalidArgument, fmt::format("cannot open config {}", path.string()));
    return parse_config(in);
}

}  // namespace rankneat
