#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace rankneat {

// ---------------------------------------------------------------------------
// Raw annotation input
// ---------------------------------------------------------------------------

struct AnnotationSample {
    double time = 0.0;   // seconds
    double value = 0.0;  // unbounded before normalization

    bool operator==(const AnnotationSample&) const = default;
};

struct AnnotationTrace {
    std::string session_id;
    std::string participant_id;
    std::vector<AnnotationSample> samples;  // strictly increasing time

    bool operator==(const AnnotationTrace&) const = default;
};

struct WindowLabel {
    std::size_t window_index = 0;
    double value = 0.0;

    bool operator==(const WindowLabel&) const = default;
};

struct FeatureWindow {
    std::string session_id;
    std::size_t window_index = 0;
    std::vector<double> features;

    bool operator==(const FeatureWindow&) const = default;
};

// ---------------------------------------------------------------------------
// Windowed sessions and the pairwise dataset built from them
// ---------------------------------------------------------------------------

struct LabeledWindow {
    std::size_t window_index = 0;
    std::vector<double> features;
    double label = 0.0;  // in [0,1]

    bool operator==(const LabeledWindow&) const = default;
};

struct WindowedSession {
    std::string session_id;
    std::string participant_id;
    std::vector<LabeledWindow> windows;

    std::size_t dimension() const noexcept {
        return windows.empty() ? 0 : windows.front().features.size();
    }
    std::vector<double> labels() const;

    bool operator==(const WindowedSession&) const = default;
};

/// One oriented preference: `first` and `second` are positions inside the
/// session's window list, `session` indexes PairDataset::sessions().
struct PreferencePair {
    std::size_t session = 0;
    std::size_t first = 0;
    std::size_t second = 0;
    int label = 0;  // 1 when window `first` is preferred

    bool operator==(const PreferencePair&) const = default;
};

/// Pairs are emitted in both orientations, so the label counts are equal by
/// construction. Sessions are held sorted by session_id.
class PairDataset {
public:
    PairDataset() = default;
    PairDataset(std::vector<WindowedSession> sessions, double threshold);

    const std::vector<PreferencePair>& pairs() const noexcept { return pairs_; }
    const std::vector<WindowedSession>& sessions() const noexcept { return sessions_; }
    double threshold() const noexcept { return threshold_; }
    std::size_t size() const noexcept { return pairs_.size(); }
    bool empty() const noexcept { return pairs_.empty(); }
    std::size_t dimension() const noexcept { return dimension_; }

    const std::string& session_id(const PreferencePair& pair) const {
        return sessions_.at(pair.session).session_id;
    }
    std::span<const double> first_features(const PreferencePair& pair) const {
        return sessions_[pair.session].windows[pair.first].features;
    }
    std::span<const double> second_features(const PreferencePair& pair) const {
        return sessions_[pair.session].windows[pair.second].features;
    }

private:
    std::vector<WindowedSession> sessions_;
    std::vector<PreferencePair> pairs_;
    double threshold_ = 0.25;
    std::size_t dimension_ = 0;
};

struct DatasetConfig {
    double window_seconds = 3.0;
    double lag_seconds = 1.0;

    bool operator==(const DatasetConfig&) const = default;
};

struct DroppedSession {
    std::string session_id;
    std::string reason;
};

struct IngestResult {
    std::vector<WindowedSession> sessions;  // sorted by session_id
    std::vector<DroppedSession> dropped;
};

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

/// Min-max maps the trace values onto [0,1]. Throws ConstantTrace when every
/// sample carries the same value.
AnnotationTrace normalize_trace(const AnnotationTrace& trace);

/// Mean label per window of `window_seconds`, after shifting every sample
/// back by `lag_seconds`. Samples that land before t = 0 are discarded and
/// windows without samples are omitted.
std::vector<WindowLabel> window_labels(const AnnotationTrace& trace, double window_seconds,
                                       double lag_seconds);

std::vector<PreferencePair> build_pairs(const WindowedSession& session, double threshold,
                                        std::size_t session_position = 0);

/// |pairs at threshold_a| / |pairs at threshold_b| over all sessions.
double dataset_volume_ratio(std::span<const WindowedSession> sessions, double threshold_a,
                            double threshold_b);

std::size_t count_pairs(std::span<const WindowedSession> sessions, double threshold);

/// Combines a normalized trace with its feature windows. Windows present on
/// only one side are discarded.
WindowedSession align_session(const AnnotationTrace& trace,
                              std::span<const FeatureWindow> features,
                              const DatasetConfig& config);

IngestResult ingest(const std::filesystem::path& features_path,
                    const std::filesystem::path& annotations_path,
                    const DatasetConfig& config);

struct FeatureTable {
    std::size_t dimension = 0;
    std::vector<FeatureWindow> windows;
    std::map<std::string, std::string> participant_of;  // session_id -> participant_id
};

FeatureTable read_features_csv(std::istream& in);
std::vector<AnnotationTrace> read_annotations_csv(std::istream& in);

/// The participant of each session comes from the features file.
void write_features_csv(std::ostream& out, std::span<const WindowedSession> sessions);
void write_annotations_csv(std::ostream& out, std::span<const AnnotationTrace> traces);

}  // namespace rankneat
