#pragma once

#include "gaitid/core.hpp"
#include "gaitid/signal_io.hpp"
#include "gaitid/timeseries.hpp"

#include <array>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

namespace gaitid {

inline constexpr std::size_t kAcLags = 4;
inline constexpr std::size_t kArOrder = 3;
inline constexpr std::size_t kMaOrder = 3;
inline constexpr std::size_t kWaveletLevels = 3;
inline constexpr std::size_t kFeaturesPerAxis = 5 + kAcLags + kAcLags + kArOrder + kMaOrder + 2 + kWaveletLevels;
inline constexpr std::size_t kFeatureCount = 3 * kFeaturesPerAxis;
static_assert(kFeatureCount == 72);

/// Windows shorter than this are still processed but flagged as reduced reliability.
inline constexpr std::size_t kReliableWindowLength = 31;

struct FeatureName {
    char axis;
    std::string name;
    std::string full() const { return std::string(1, axis) + "_" + name; }
};

/// The frozen column layout: per axis x, y, z in turn, 24 named features.
inline const std::vector<FeatureName>& feature_schema() {
    static const std::vector<FeatureName> schema = [] {
        std::vector<FeatureName> s;
        for (char axis : {'x', 'y', 'z'}) {
            for (const char* n : {"mean", "median", "variance", "std", "iqr"}) s.push_back({axis, n});
            for (std::size_t k = 1; k <= kAcLags; ++k) s.push_back({axis, "ac" + std::to_string(k)});
            for (std::size_t k = 1; k <= kAcLags; ++k) s.push_back({axis, "pac" + std::to_string(k)});
            for (std::size_t k = 1; k <= kArOrder; ++k) s.push_back({axis, "ar" + std::to_string(k)});
            for (std::size_t k = 1; k <= kMaOrder; ++k) s.push_back({axis, "ma" + std::to_string(k)});
            s.push_back({axis, "arma_phi"});
            s.push_back({axis, "arma_theta"});
            for (std::size_t k = 1; k <= kWaveletLevels; ++k) s.push_back({axis, "haar" + std::to_string(k)});
        }
        return s;
    }();
    return schema;
}

inline std::vector<std::string> feature_names() {
    std::vector<std::string> out;
    for (const auto& f : feature_schema()) out.push_back(f.full());
    return out;
}

struct FeatureVector {
    std::array<double, kFeatureCount> values{};
    std::string subject_id;
    SubActivity sub_activity = SubActivity::GENERIC;
    Sensor sensor = Sensor::ACC;
    std::string session;
    std::size_t window_size = 0;
    /// Number of model fits that hit the zero-variance / singular policy.
    int degenerate_fits = 0;
    bool reduced_reliability = false;
};

namespace detail {

inline void append_axis_features(std::span<const double> x, double* out, FeatureVector& fv) {
    const auto st = basic_stats(x);
    *out++ = st.mean;
    *out++ = st.median;
    *out++ = st.variance;
    *out++ = st.std;
    *out++ = st.iqr;

    const auto ac = autocorrelation(x, kAcLags);
    out = std::copy(ac.values.begin(), ac.values.end(), out);
    const auto pac = partial_autocorrelation(x, kAcLags);
    out = std::copy(pac.values.begin(), pac.values.end(), out);

    const auto ar = fit_ar(x, kArOrder);
    out = std::copy(ar.ar.begin(), ar.ar.end(), out);
    const auto ma = fit_ma(x, kMaOrder);
    out = std::copy(ma.ma.begin(), ma.ma.end(), out);
    const auto arma = fit_arma(x, 1, 1);
    *out++ = arma.ar[0];
    *out++ = arma.ma[0];

    const auto wav = wavelet_energies(x, kWaveletLevels);
    std::copy(wav.begin(), wav.end(), out);

    fv.degenerate_fits += int(ac.degenerate) + int(pac.degenerate) + int(ar.degenerate) + int(ma.degenerate) +
                          int(arma.degenerate);
}

}  // namespace detail

inline FeatureVector extract_feature_vector(const Window& w) {
    const std::size_t n = w.length();
    for (const auto& a : w.axes)
        if (a.size() != n) throw ShapeError("window axes differ in length");
    if (n < kMinWindowLength)
        throw InvalidInputError("window of " + std::to_string(n) + " samples is below the minimum of " +
                                std::to_string(kMinWindowLength));
    FeatureVector fv;
    fv.subject_id = w.subject_id;
    fv.sub_activity = w.sub_activity;
    fv.sensor = w.sensor;
    fv.session = w.session;
    fv.window_size = n;
    fv.reduced_reliability = n < kReliableWindowLength;
    for (std::size_t k = 0; k < 3; ++k)
        detail::append_axis_features(w.axes[k], fv.values.data() + k * kFeaturesPerAxis, fv);
    return fv;
}

/// Row-major feature table with per-row labels. Columns are the 72 schema features after
/// extraction, or projected coordinates after reduction.
struct FeatureMatrix {
    Matrix values;
    std::vector<std::string> columns;
    std::vector<std::string> subjects;
    std::vector<SubActivity> sub_activities;
    std::vector<Sensor> sensors;
    std::vector<std::string> sessions;
    std::size_t window_size = 0;

    Eigen::Index rows() const noexcept { return values.rows(); }
    Eigen::Index cols() const noexcept { return values.cols(); }

    FeatureMatrix select_rows(std::span<const std::size_t> idx) const {
        FeatureMatrix out;
        out.columns = columns;
        out.window_size = window_size;
        out.values.resize(static_cast<Eigen::Index>(idx.size()), values.cols());
        for (std::size_t r = 0; r < idx.size(); ++r) {
            out.values.row(static_cast<Eigen::Index>(r)) = values.row(static_cast<Eigen::Index>(idx[r]));
            out.subjects.push_back(subjects[idx[r]]);
            out.sub_activities.push_back(sub_activities[idx[r]]);
            out.sensors.push_back(sensors[idx[r]]);
            out.sessions.push_back(sessions[idx[r]]);
        }
        return out;
    }

    /// Same labels, new values (e.g. after projection).
    FeatureMatrix with_values(Matrix v, std::vector<std::string> cols) const {
        FeatureMatrix out = *this;
        out.values = std::move(v);
        out.columns = std::move(cols);
        return out;
    }
};

inline FeatureMatrix to_matrix(const std::vector<FeatureVector>& rows) {
    FeatureMatrix m;
    m.columns = feature_names();
    m.values.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(kFeatureCount));
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (r > 0 && rows[r].window_size != rows[0].window_size)
            throw ShapeError("feature rows have mixed window sizes");
        for (std::size_t c = 0; c < kFeatureCount; ++c)
            m.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r].values[c];
        m.subjects.push_back(rows[r].subject_id);
        m.sub_activities.push_back(rows[r].sub_activity);
        m.sensors.push_back(rows[r].sensor);
        m.sessions.push_back(rows[r].session);
    }
    if (!rows.empty()) m.window_size = rows[0].window_size;
    return m;
}

/// Per-column min/max fitted on training rows.
struct Normalizer {
    std::vector<double> min;
    std::vector<double> max;

    std::size_t dims() const noexcept { return min.size(); }
};

inline Normalizer fit_normalizer(const Matrix& train) {
    if (train.rows() == 0) throw EmptyInputError("cannot fit a normalizer on zero rows");
    Normalizer n;
    n.min.resize(static_cast<std::size_t>(train.cols()));
    n.max.resize(static_cast<std::size_t>(train.cols()));
    for (Eigen::Index c = 0; c < train.cols(); ++c) {
        n.min[static_cast<std::size_t>(c)] = train.col(c).minCoeff();
        n.max[static_cast<std::size_t>(c)] = train.col(c).maxCoeff();
    }
    return n;
}

/// Min-max scaling with clipping to [0, 1]; constant training columns map to 0.5.
inline Matrix apply_normalizer(const Normalizer& n, const Matrix& m) {
    if (static_cast<std::size_t>(m.cols()) != n.dims())
        throw ShapeError("normalizer expects " + std::to_string(n.dims()) + " columns, got " +
                         std::to_string(m.cols()));
    Matrix out(m.rows(), m.cols());
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
        const double lo = n.min[static_cast<std::size_t>(c)];
        const double hi = n.max[static_cast<std::size_t>(c)];
        const double range = hi - lo;
        for (Eigen::Index r = 0; r < m.rows(); ++r) {
            out(r, c) = range > 0.0 ? std::clamp((m(r, c) - lo) / range, 0.0, 1.0) : 0.5;
        }
    }
    return out;
}

inline FeatureMatrix apply_normalizer(const Normalizer& n, const FeatureMatrix& m) {
    return m.with_values(apply_normalizer(n, m.values), m.columns);
}

/// CSV with the column names as header and `subject,activity,sensor` appended.
inline void write_feature_csv(const FeatureMatrix& m, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw InvalidInputError("cannot write " + path.string());
    out.precision(17);
    for (const auto& c : m.columns) out << c << ',';
    out << "subject,activity,sensor\n";
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) out << m.values(r, c) << ',';
        const auto i = static_cast<std::size_t>(r);
        out << m.subjects[i] << ',' << to_string(m.sub_activities[i]) << ',' << to_string(m.sensors[i]) << '\n';
    }
    if (!out) throw InvalidInputError("write failed for " + path.string());
}

inline FeatureMatrix read_feature_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InvalidInputError("cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw EmptyInputError(path.string() + " is empty");
    auto header = detail::split(detail::trim(line), ',');
    if (header.size() < 4 || header[header.size() - 3] != "subject" || header[header.size() - 2] != "activity" ||
        header.back() != "sensor")
        throw ParseError("feature CSV header must end with subject,activity,sensor", 1);
    FeatureMatrix m;
    const std::size_t d = header.size() - 3;
    for (std::size_t c = 0; c < d; ++c) m.columns.emplace_back(header[c]);
    std::vector<double> flat;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        const auto text = detail::trim(line);
        if (text.empty()) continue;
        const auto f = detail::split(text, ',');
        if (f.size() != header.size()) throw ParseError("wrong column count", lineno);
        for (std::size_t c = 0; c < d; ++c) {
            auto v = detail::parse_double(f[c]);
            if (!v) throw ParseError("non-numeric feature value", lineno);
            flat.push_back(*v);
        }
        m.subjects.emplace_back(f[d]);
        auto act = parse_sub_activity(f[d + 1]);
        auto sen = parse_sensor(f[d + 2]);
        if (!act || !sen) throw ParseError("unknown activity or sensor label", lineno);
        m.sub_activities.push_back(*act);
        m.sensors.push_back(*sen);
        m.sessions.emplace_back();
    }
    const auto n = static_cast<Eigen::Index>(m.subjects.size());
    m.values = Eigen::Map<Matrix>(flat.data(), n, static_cast<Eigen::Index>(d));
    return m;
}

}  // namespace gaitid
