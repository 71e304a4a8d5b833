#pragma once

#include "rankneat/dataset.hpp"
#include "rankneat/random.hpp"

#include <random>
#include <string>
#include <vector>

namespace rankneat::testing {

// Session with the given window labels; features are the label itself followed
// by `extra` standard-normal components.
inline WindowedSession labeled_session(std::string id, std::string participant,
                                       const std::vector<double>& labels, std::size_t extra = 0,
                                       std::uint64_t seed = 0) {
    Rng rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    WindowedSession s{std::move(id), std::move(participant), {}};
    for (std::size_t k = 0; k < labels.size(); ++k) {
        std::vector<double> x{labels[k]};
        for (std::size_t e = 0; e < extra; ++e) x.push_back(normal(rng));
        s.windows.push_back({k, std::move(x), labels[k]});
    }
    return s;
}

inline AnnotationTrace trace_of(std::vector<std::pair<double, double>> samples,
                                std::string id = "s", std::string participant = "p") {
    AnnotationTrace t{std::move(id), std::move(participant), {}};
    for (auto [time, value] : samples) t.samples.push_back({time, value});
    return t;
}

inline std::vector<double> values_of(const AnnotationTrace& t) {
    std::vector<double> out;
    for (const auto& s : t.samples) out.push_back(s.value);
    return out;
}

}  // namespace rankneat::testing
