#pragma once

#include "gaitid/core.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace gaitid {

enum class Sensor { ACC, LACC };
enum class SubActivity { BLP, BRP, FLP, FRP, GENERIC };
enum class Layout { CUSTOM_CSV, HAR_DIR };

inline constexpr std::array<SubActivity, 4> kPockets{SubActivity::BLP, SubActivity::BRP,
                                                     SubActivity::FLP, SubActivity::FRP};

inline std::string to_string(Sensor s) { return s == Sensor::ACC ? "ACC" : "LACC"; }

inline std::string to_string(SubActivity a) {
    switch (a) {
        case SubActivity::BLP: return "BLP";
        case SubActivity::BRP: return "BRP";
        case SubActivity::FLP: return "FLP";
        case SubActivity::FRP: return "FRP";
        case SubActivity::GENERIC: break;
    }
    return "GENERIC";
}

inline std::optional<Sensor> parse_sensor(std::string_view s) {
    if (s == "ACC" || s == "acc") return Sensor::ACC;
    if (s == "LACC" || s == "lacc") return Sensor::LACC;
    return std::nullopt;
}

inline std::optional<SubActivity> parse_sub_activity(std::string_view s) {
    std::string up(s);
    std::transform(up.begin(), up.end(), up.begin(), [](unsigned char c) { return std::toupper(c); });
    if (up == "BLP") return SubActivity::BLP;
    if (up == "BRP") return SubActivity::BRP;
    if (up == "FLP") return SubActivity::FLP;
    if (up == "FRP") return SubActivity::FRP;
    if (up == "GENERIC") return SubActivity::GENERIC;
    return std::nullopt;
}

using Sample = std::array<double, 3>;

/// One subject/sensor/sub-activity session of tri-axial accelerations (m/s^2).
struct SignalRecording {
    std::string subject_id;
    Sensor sensor = Sensor::ACC;
    SubActivity sub_activity = SubActivity::GENERIC;
    /// Session tag; empty when the source has a single session.
    std::string session;
    double sample_rate_hz = 50.0;
    std::vector<Sample> samples;
    /// Source activity code for pre-labelled public data (0 when unknown).
    int activity_code = 0;

    std::size_t size() const noexcept { return samples.size(); }

    void validate() const {
        if (samples.empty()) throw EmptyInputError("recording has no samples");
        if (!(sample_rate_hz > 0.0)) throw InvalidParameterError("sample_rate_hz must be positive");
        for (const auto& s : samples)
            for (double v : s)
                if (!std::isfinite(v)) throw InvalidInputError("recording contains a non-finite sample");
    }
};

/// Fixed-length slice of a recording. `axes[k]` holds component k.
struct Window {
    std::string subject_id;
    Sensor sensor = Sensor::ACC;
    SubActivity sub_activity = SubActivity::GENERIC;
    std::string session;
    std::array<std::vector<double>, 3> axes;

    std::size_t length() const noexcept { return axes[0].size(); }
};

inline constexpr std::size_t kMinWindowLength = 8;

struct LoadDiagnostics {
    std::size_t non_monotonic_timestamps = 0;
    bool had_header = false;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
    const auto ws = " \t\r\n";
    const auto b = s.find_first_not_of(ws);
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(ws);
    return s.substr(b, e - b + 1);
}

inline std::optional<double> parse_double(std::string_view s) {
    s = trim(s);
    if (s.empty()) return std::nullopt;
    if (s.front() == '+') s.remove_prefix(1);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
    return v;
}

inline std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = s.find(sep, start);
        out.push_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

inline std::vector<std::string_view> split_ws(std::string_view s) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
        const std::size_t b = i;
        while (i < s.size() && !std::isspace(static_cast<unsigned char>(s[i]))) ++i;
        if (i > b) out.push_back(s.substr(b, i - b));
    }
    return out;
}

inline std::vector<std::vector<double>> read_whitespace_table(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InvalidInputError("cannot open " + path.string());
    std::vector<std::vector<double>> rows;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto fields = split_ws(line);
        if (fields.empty()) continue;
        std::vector<double> row;
        row.reserve(fields.size());
        for (auto f : fields) {
            auto v = parse_double(f);
            if (!v) throw ParseError(path.string() + ": non-numeric value '" + std::string(f) + "'", lineno);
            row.push_back(*v);
        }
        if (!rows.empty() && row.size() != rows.front().size())
            throw ParseError(path.string() + ": inconsistent column count", lineno);
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace detail

/// Reads one CUSTOM_CSV session (`t,ax,ay,az`, header optional).
/// Metadata other than the samples is left at defaults for the caller to fill.
inline SignalRecording load_csv_recording(const std::filesystem::path& path, LoadDiagnostics* diag = nullptr) {
    std::ifstream in(path);
    if (!in) throw InvalidInputError("cannot open " + path.string());

    SignalRecording rec;
    std::string line;
    std::size_t lineno = 0;
    std::optional<double> last_t;
    LoadDiagnostics local;
    while (std::getline(in, line)) {
        ++lineno;
        const auto text = detail::trim(line);
        if (text.empty()) continue;
        const auto cols = detail::split(text, ',');
        if (cols.size() != 4) throw ParseError("expected 4 columns, got " + std::to_string(cols.size()), lineno);
        std::array<double, 4> vals{};
        bool numeric = true;
        for (std::size_t k = 0; k < 4; ++k) {
            auto v = detail::parse_double(cols[k]);
            if (!v) {
                numeric = false;
                break;
            }
            vals[k] = *v;
        }
        if (!numeric) {
            if (rec.samples.empty() && !local.had_header && detail::trim(cols[0]) == "t") {
                local.had_header = true;
                continue;
            }
            throw ParseError("non-numeric field", lineno);
        }
        for (std::size_t k = 1; k < 4; ++k)
            if (!std::isfinite(vals[k])) throw ParseError("non-finite sample", lineno);
        if (last_t && vals[0] < *last_t) ++local.non_monotonic_timestamps;
        last_t = vals[0];
        rec.samples.push_back({vals[1], vals[2], vals[3]});
    }
    if (rec.samples.empty()) throw EmptyInputError(path.string() + ": no samples");
    if (diag) *diag = local;
    return rec;
}

/// Writes the CUSTOM_CSV form with full round-trip precision.
inline void save_csv_recording(const SignalRecording& rec, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw InvalidInputError("cannot write " + path.string());
    out.precision(17);
    out << "t,ax,ay,az\n";
    for (std::size_t i = 0; i < rec.samples.size(); ++i) {
        const auto& s = rec.samples[i];
        out << static_cast<double>(i) / rec.sample_rate_hz << ',' << s[0] << ',' << s[1] << ',' << s[2] << '\n';
    }
    if (!out) throw InvalidInputError("write failed for " + path.string());
}

inline std::filesystem::path custom_csv_path(const std::filesystem::path& root, const SignalRecording& rec) {
    std::string file = to_string(rec.sub_activity);
    if (!rec.session.empty()) file += "_" + rec.session;
    return root / rec.subject_id / to_string(rec.sensor) / (file + ".csv");
}

/// Walks `<root>/<subject>/<sensor>/<sub_activity>[_<session>].csv`, sorted by path.
inline std::vector<SignalRecording> load_custom_tree(const std::filesystem::path& root) {
    namespace fs = std::filesystem;
    if (!fs::is_directory(root)) throw InvalidInputError("not a directory: " + root.string());
    std::vector<fs::path> files;
    for (const auto& e : fs::recursive_directory_iterator(root))
        if (e.is_regular_file() && e.path().extension() == ".csv") files.push_back(e.path());
    std::sort(files.begin(), files.end());

    std::vector<SignalRecording> out;
    for (const auto& f : files) {
        const auto rel = fs::relative(f, root);
        std::vector<std::string> parts;
        for (const auto& p : rel) parts.push_back(p.string());
        if (parts.size() != 3) continue;
        auto sensor = parse_sensor(parts[1]);
        if (!sensor) continue;
        const std::string stem = f.stem().string();
        const auto us = stem.find('_');
        auto act = parse_sub_activity(stem.substr(0, us));
        if (!act) continue;
        SignalRecording rec;
        try {
            rec = load_csv_recording(f);
        } catch (const ParseError& e) {
            throw ParseError(f.string() + ": " + e.message(), e.line());
        }
        rec.subject_id = parts[0];
        rec.sensor = *sensor;
        rec.sub_activity = *act;
        rec.session = us == std::string::npos ? std::string{} : stem.substr(us + 1);
        out.push_back(std::move(rec));
    }
    if (out.empty()) throw EmptyInputError("no recordings found under " + root.string());
    return out;
}

inline void save_custom_tree(const std::vector<SignalRecording>& recs, const std::filesystem::path& root) {
    for (const auto& r : recs) {
        const auto p = custom_csv_path(root, r);
        std::filesystem::create_directories(p.parent_path());
        save_csv_recording(r, p);
    }
}

/// Standard gravity, used to convert the public dataset's g units to m/s^2.
inline constexpr double kGravity = 9.80665;

inline constexpr std::size_t kHarWindowSamples = 128;

/// Reads one split directory of the public HAR layout
/// (`Inertial Signals/{total,body}_acc_{x,y,z}_<split>.txt`, `subject_<split>.txt`,
/// optional `y_<split>.txt`). Each row becomes one 128-sample recording; ACC maps
/// to total acceleration and LACC to body acceleration.
inline std::vector<SignalRecording> load_har_directory(const std::filesystem::path& dir, Sensor sensor,
                                                       std::optional<int> activity_filter = std::nullopt) {
    namespace fs = std::filesystem;
    if (!fs::is_directory(dir)) throw InvalidInputError("not a directory: " + dir.string());
    std::string split;
    for (const auto& e : fs::directory_iterator(dir)) {
        const auto name = e.path().filename().string();
        if (name.rfind("subject_", 0) == 0 && e.path().extension() == ".txt") {
            split = e.path().stem().string().substr(8);
            break;
        }
    }
    if (split.empty()) throw InvalidInputError("no subject_<split>.txt in " + dir.string());

    const std::string prefix = sensor == Sensor::ACC ? "total_acc_" : "body_acc_";
    const double scale = kGravity;
    std::array<std::vector<std::vector<double>>, 3> axes;
    const char* names[3] = {"x", "y", "z"};
    for (int k = 0; k < 3; ++k)
        axes[k] = detail::read_whitespace_table(dir / "Inertial Signals" / (prefix + names[k] + "_" + split + ".txt"));
    const auto subjects = detail::read_whitespace_table(dir / ("subject_" + split + ".txt"));
    std::vector<std::vector<double>> labels;
    if (fs::exists(dir / ("y_" + split + ".txt"))) labels = detail::read_whitespace_table(dir / ("y_" + split + ".txt"));

    const std::size_t n = subjects.size();
    for (int k = 0; k < 3; ++k)
        if (axes[k].size() != n) throw ShapeError("HAR axis file row count differs from subject file");
    if (!labels.empty() && labels.size() != n) throw ShapeError("HAR label file row count differs from subject file");
    if (n == 0) throw EmptyInputError("HAR split is empty: " + dir.string());

    std::vector<SignalRecording> out;
    for (std::size_t i = 0; i < n; ++i) {
        const int code = labels.empty() ? 0 : static_cast<int>(labels[i].at(0));
        if (activity_filter && code != *activity_filter) continue;
        const std::size_t len = axes[0][i].size();
        if (axes[1][i].size() != len || axes[2][i].size() != len)
            throw ParseError("HAR axis rows differ in length", i + 1);
        SignalRecording rec;
        rec.subject_id = std::to_string(static_cast<int>(subjects[i].at(0)));
        rec.sensor = sensor;
        rec.sub_activity = SubActivity::GENERIC;
        rec.session = split + "_" + std::to_string(i);
        rec.activity_code = code;
        rec.samples.resize(len);
        for (std::size_t t = 0; t < len; ++t)
            rec.samples[t] = {axes[0][i][t] * scale, axes[1][i][t] * scale, axes[2][i][t] * scale};
        out.push_back(std::move(rec));
    }
    return out;
}

/// Layout dispatcher: a CSV file yields one recording, a HAR split directory yields one
/// recording per pre-segmented row.
inline std::vector<SignalRecording> load_recordings(const std::filesystem::path& path, Layout layout,
                                                    Sensor har_sensor = Sensor::LACC) {
    if (layout == Layout::CUSTOM_CSV) {
        if (std::filesystem::is_directory(path)) return load_custom_tree(path);
        return {load_csv_recording(path)};
    }
    return load_har_directory(path, har_sensor);
}

/// Centered moving average. Near the ends the neighbourhood is truncated, so the first
/// output averages samples [0, order/2] only. Length is preserved.
inline SignalRecording moving_average_filter(const SignalRecording& rec, std::size_t order = 3) {
    if (order == 0 || order % 2 == 0) throw InvalidParameterError("filter order must be odd and positive");
    if (order > rec.samples.size()) throw InvalidParameterError("filter order exceeds recording length");
    const std::size_t n = rec.samples.size();
    const std::size_t half = order / 2;
    SignalRecording out = rec;
    for (int k = 0; k < 3; ++k) {
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t lo = i >= half ? i - half : 0;
            const std::size_t hi = std::min(n - 1, i + half);
            double s = 0.0;
            for (std::size_t j = lo; j <= hi; ++j) s += rec.samples[j][k];
            out.samples[i][k] = s / static_cast<double>(hi - lo + 1);
        }
    }
    return out;
}

inline std::size_t window_stride(std::size_t window_size, double overlap_fraction) {
    const double s = std::round(static_cast<double>(window_size) * (1.0 - overlap_fraction));
    return std::max<std::size_t>(1, static_cast<std::size_t>(s));
}

/// Cuts fixed-size windows at stride round(size * (1 - overlap)); a trailing partial window
/// is dropped.
inline std::vector<Window> segment_windows(const SignalRecording& rec, std::size_t window_size,
                                           double overlap_fraction = 0.0) {
    if (window_size < kMinWindowLength)
        throw InvalidParameterError("window size must be at least " + std::to_string(kMinWindowLength));
    if (!(overlap_fraction >= 0.0 && overlap_fraction < 1.0))
        throw InvalidParameterError("overlap fraction must lie in [0, 1)");
    const std::size_t n = rec.samples.size();
    if (window_size > n)
        throw EmptyInputError("window size " + std::to_string(window_size) + " exceeds recording length " +
                              std::to_string(n));
    const std::size_t stride = window_stride(window_size, overlap_fraction);
    std::vector<Window> out;
    out.reserve((n - window_size) / stride + 1);
    for (std::size_t start = 0; start + window_size <= n; start += stride) {
        Window w;
        w.subject_id = rec.subject_id;
        w.sensor = rec.sensor;
        w.sub_activity = rec.sub_activity;
        w.session = rec.session;
        for (int k = 0; k < 3; ++k) {
            w.axes[k].resize(window_size);
            for (std::size_t t = 0; t < window_size; ++t) w.axes[k][t] = rec.samples[start + t][k];
        }
        out.push_back(std::move(w));
    }
    return out;
}

}  // namespace gaitid
