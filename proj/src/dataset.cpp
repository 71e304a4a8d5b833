#include "rankneat/dataset.hpp"

#include "rankneat/error.hpp"
#include "text.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <set>

namespace rankneat {

namespace {

void check_threshold(double threshold) {
    if (!(threshold > 0.0 && threshold < 1.0)) {
        throw Error(ErrorKind::InvalidArgument,
                    fmt::format("preference threshold must lie in (0,1), got {}", threshold));
    }
}

std::string location(std::size_t line) { return fmt::format("line {}", line); }

}  // namespace

std::vector<double> WindowedSession::labels() const {
    std::vector<double> out;
    out.reserve(windows.size());
    for (const auto& w : windows) out.push_back(w.label);
    return out;
}

// ---------------------------------------------------------------------------
// PairDataset
// ---------------------------------------------------------------------------

PairDataset::PairDataset(std::vector<WindowedSession> sessions, double threshold)
    : sessions_(std::move(sessions)), threshold_(threshold) {
    check_threshold(threshold);
    std::sort(sessions_.begin(), sessions_.end(),
              [](const auto& a, const auto& b) { return a.session_id < b.session_id; });
    for (std::size_t s = 0; s < sessions_.size(); ++s) {
        const auto d = sessions_[s].dimension();
        if (d == 0) continue;
        if (dimension_ == 0) {
            dimension_ = d;
        } else if (d != dimension_) {
            throw Error(ErrorKind::DimensionMismatch,
                        fmt::format("session {} has dimension {}, expected {}",
                                    sessions_[s].session_id, d, dimension_));
        }
        auto session_pairs = build_pairs(sessions_[s], threshold, s);
        pairs_.insert(pairs_.end(), session_pairs.begin(), session_pairs.end());
    }
}

// ---------------------------------------------------------------------------
// Label pipeline
// ---------------------------------------------------------------------------

AnnotationTrace normalize_trace(const AnnotationTrace& trace) {
    if (trace.samples.size() < 2) {
        throw Error(ErrorKind::InvalidArgument,
                    fmt::format("trace {} needs at least 2 samples", trace.session_id));
    }
    const auto [lo, hi] = std::minmax_element(
        trace.samples.begin(), trace.samples.end(),
        [](const auto& a, const auto& b) { return a.value < b.value; });
    const double min = lo->value;
    const double range = hi->value - min;
    if (!(range > 0.0)) {
        throw Error(ErrorKind::ConstantTrace,
                    fmt::format("trace {} is constant", trace.session_id));
    }
    AnnotationTrace out = trace;
    for (auto& sample : out.samples) sample.value = (sample.value - min) / range;
    return out;
}

std::vector<WindowLabel> window_labels(const AnnotationTrace& trace, double window_seconds,
                                       double lag_seconds) {
    if (!(window_seconds > 0.0) || !(lag_seconds >= 0.0)) {
        throw Error(ErrorKind::InvalidArgument,
                    fmt::format("window {} s / lag {} s out of range", window_seconds,
                                lag_seconds));
    }
    struct Accumulator {
        double sum = 0.0;
        std::size_t count = 0;
    };
    std::map<std::size_t, Accumulator> windows;
    for (const auto& sample : trace.samples) {
        const double shifted = sample.time - lag_seconds;
        if (shifted < 0.0) continue;
        const auto index = static_cast<std::size_t>(std::floor(shifted / window_seconds));
        auto& acc = windows[index];
        acc.sum += sample.value;
        ++acc.count;
    }
    if (windows.empty()) {
        throw Error(ErrorKind::EmptyResult,
                    fmt::format("no window of trace {} contains samples", trace.session_id));
    }
    std::vector<WindowLabel> out;
    out.reserve(windows.size());
    for (const auto& [index, acc] : windows) {
        out.push_back({index, acc.sum / static_cast<double>(acc.count)});
    }
    return out;
}

std::vector<PreferencePair> build_pairs(const WindowedSession& session, double threshold,
                                        std::size_t session_position) {
    check_threshold(threshold);
    std::vector<PreferencePair> pairs;
    const auto& w = session.windows;
    for (std::size_t i = 0; i < w.size(); ++i) {
        for (std::size_t j = i + 1; j < w.size(); ++j) {
            const double diff = w[i].label - w[j].label;
            // equality with the threshold is not a preference
            if (std::abs(diff) <= threshold) continue;
            const int label = diff > 0.0 ? 1 : 0;
            pairs.push_back({session_position, i, j, label});
            pairs.push_back({session_position, j, i, 1 - label});
        }
    }
    return pairs;
}

std::size_t count_pairs(std::span<const WindowedSession> sessions, double threshold) {
    std::size_t total = 0;
    for (const auto& s : sessions) total += build_pairs(s, threshold).size();
    return total;
}

double dataset_volume_ratio(std::span<const WindowedSession> sessions, double threshold_a,
                            double threshold_b) {
    const auto numerator = count_pairs(sessions, threshold_a);
    const auto denominator = count_pairs(sessions, threshold_b);
    if (denominator == 0) {
        throw Error(ErrorKind::DivisionByZero,
                    fmt::format("no pairs at threshold {}", threshold_b));
    }
    return static_cast<double>(numerator) / static_cast<double>(denominator);
}

WindowedSession align_session(const AnnotationTrace& trace,
                              std::span<const FeatureWindow> features,
                              const DatasetConfig& config) {
    const auto labels =
        window_labels(normalize_trace(trace), config.window_seconds, config.lag_seconds);
    std::map<std::size_t, const FeatureWindow*> by_index;
    for (const auto& f : features) {
        if (!by_index.emplace(f.window_index, &f).second) {
            throw Error(ErrorKind::ParseError,
                        fmt::format("session {} repeats window {}", trace.session_id,
                                    f.window_index));
        }
    }
    WindowedSession session{trace.session_id, trace.participant_id, {}};
    for (const auto& label : labels) {
        const auto it = by_index.find(label.window_index);
        if (it == by_index.end()) continue;
        session.windows.push_back({label.window_index, it->second->features, label.value});
    }
    if (session.windows.empty()) {
        throw Error(ErrorKind::EmptyResult,
                    fmt::format("session {} has no aligned windows", trace.session_id));
    }
    return session;
}

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

FeatureTable read_features_csv(std::istream& in) {
    FeatureTable table;
    std::string line;
    std::size_t line_no = 0;
    if (!detail::next_line(in, line, line_no)) {
        throw Error(ErrorKind::ParseError, "features file is empty");
    }
    const auto header = detail::split_csv(line);
    if (header.size() < 4 || header[0] != "session_id" || header[1] != "participant_id" ||
        header[2] != "window_index") {
        throw Error(ErrorKind::ParseError,
                    "features header must be session_id,participant_id,window_index,f0,...");
    }
    table.dimension = header.size() - 3;
    for (std::size_t k = 0; k < table.dimension; ++k) {
        if (header[k + 3] != fmt::format("f{}", k)) {
            throw Error(ErrorKind::ParseError,
                        fmt::format("features header column {} should be f{}", k + 3, k));
        }
    }
    while (detail::next_line(in, line, line_no)) {
        const auto fields = detail::split_csv(line);
        if (fields.size() != table.dimension + 3) {
            throw Error(ErrorKind::DimensionMismatch,
                        fmt::format("{}: {} feature values, header declares {}",
                                    location(line_no), fields.size() < 3 ? 0 : fields.size() - 3,
                                    table.dimension));
        }
        FeatureWindow window;
        window.session_id = std::string(fields[0]);
        window.window_index = detail::parse_index(fields[2], location(line_no));
        window.features.reserve(table.dimension);
        for (std::size_t k = 0; k < table.dimension; ++k) {
            window.features.push_back(detail::parse_finite(fields[k + 3], location(line_no)));
        }
        const auto [it, inserted] =
            table.participant_of.emplace(window.session_id, std::string(fields[1]));
        if (!inserted && it->second != fields[1]) {
            throw Error(ErrorKind::ParseError,
                        fmt::format("{}: session {} changes participant", location(line_no),
                                    window.session_id));
        }
        table.windows.push_back(std::move(window));
    }
    return table;
}

std::vector<AnnotationTrace> read_annotations_csv(std::istream& in) {
    std::string line;
    std::size_t line_no = 0;
    if (!detail::next_line(in, line, line_no)) {
        throw Error(ErrorKind::ParseError, "annotations file is empty");
    }
    const auto header = detail::split_csv(line);
    if (header.size() != 3 || header[0] != "session_id" || header[1] != "time_seconds" ||
        header[2] != "value") {
        throw Error(ErrorKind::ParseError, "annotations header must be session_id,time_seconds,value");
    }
    std::map<std::string, AnnotationTrace> traces;
    while (detail::next_line(in, line, line_no)) {
        const auto fields = detail::split_csv(line);
        if (fields.size() != 3) {
            throw Error(ErrorKind::ParseError,
                        fmt::format("{}: expected 3 fields, got {}", location(line_no),
                                    fields.size()));
        }
        auto& trace = traces[std::string(fields[0])];
        trace.session_id = std::string(fields[0]);
        trace.samples.push_back({detail::parse_finite(fields[1], location(line_no)),
                                 detail::parse_finite(fields[2], location(line_no))});
    }
    std::vector<AnnotationTrace> out;
    out.reserve(traces.size());
    for (auto& [id, trace] : traces) {
        std::stable_sort(trace.samples.begin(), trace.samples.end(),
                         [](const auto& a, const auto& b) { return a.time < b.time; });
        for (std::size_t i = 1; i < trace.samples.size(); ++i) {
            if (trace.samples[i].time == trace.samples[i - 1].time) {
                throw Error(ErrorKind::ParseError,
                            fmt::format("session {} repeats timestamp {}", id,
                                        trace.samples[i].time));
            }
        }
        out.push_back(std::move(trace));
    }
    return out;
}

void write_features_csv(std::ostream& out, std::span<const WindowedSession> sessions) {
    std::size_t d = 0;
    for (const auto& s : sessions) d = std::max(d, s.dimension());
    out << "session_id,participant_id,window_index";
    for (std::size_t k = 0; k < d; ++k) out << ",f" << k;
    out << '\n';
    for (const auto& s : sessions) {
        for (const auto& w : s.windows) {
            out << s.session_id << ',' << s.participant_id << ',' << w.window_index;
            for (double v : w.features) out << ',' << fmt::format("{}", v);
            out << '\n';
        }
    }
}

void write_annotations_csv(std::ostream& out, std::span<const AnnotationTrace> traces) {
    out << "session_id,time_seconds,value\n";
    for (const auto& t : traces) {
        for (const auto& s : t.samples) {
            out << t.session_id << ',' << fmt::format("{}", s.time) << ','
                << fmt::format("{}", s.value) << '\n';
        }
    }
}

// ---------------------------------------------------------------------------
// Ingestion
// ---------------------------------------------------------------------------

IngestResult ingest(const std::filesystem::path& features_path,
                    const std::filesystem::path& annotations_path,
                    const DatasetConfig& config) {
    std::ifstream features_in(features_path);
    if (!features_in) {
        throw Error(ErrorKind::Io, fmt::format("cannot open {}", features_path.string()));
    }
    std::ifstream annotations_in(annotations_path);
    if (!annotations_in) {
        throw Error(ErrorKind::Io, fmt::format("cannot open {}", annotations_path.string()));
    }
    const auto table = read_features_csv(features_in);
    auto traces = read_annotations_csv(annotations_in);

    std::map<std::string, std::vector<FeatureWindow>> windows_of;
    for (const auto& w : table.windows) windows_of[w.session_id].push_back(w);

    std::set<std::string> annotated;
    for (const auto& t : traces) annotated.insert(t.session_id);
    for (const auto& [id, _] : windows_of) {
        if (!annotated.contains(id)) {
            throw Error(ErrorKind::MissingSession,
                        fmt::format("session {} has features but no annotations", id));
        }
    }

    IngestResult result;
    for (auto& trace : traces) {
        const auto it = windows_of.find(trace.session_id);
        if (it == windows_of.end()) {
            throw Error(ErrorKind::MissingSession,
                        fmt::format("session {} has annotations but no features",
                                    trace.session_id));
        }
        trace.participant_id = table.participant_of.at(trace.session_id);
        try {
            result.sessions.push_back(align_session(trace, it->second, config));
        } catch (const Error& e) {
            if (e.kind() == ErrorKind::ParseError) throw;
            result.dropped.push_back({trace.session_id, e.what()});
        }
    }
    return result;
}

}  // namespace rankneat
