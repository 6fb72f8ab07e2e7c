#pragma once

// JSON documents for fitted models and evaluation reports. Matrices are stored row-major
// as {"rows": r, "cols": c, "data": [...]}; every model document carries "format" and
// "version" keys.

#include "gaitid/experiment.hpp"

#include <nlohmann/json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace gaitid {

using json = nlohmann::json;

inline constexpr int kModelFormatVersion = 1;

template <class Derived>
json matrix_to_json(const Eigen::MatrixBase<Derived>& m) {
    const Matrix rm = m;
    std::vector<double> data(rm.data(), rm.data() + rm.size());
    return {{"rows", rm.rows()}, {"cols", rm.cols()}, {"data", data}};
}

inline Matrix matrix_from_json(const json& j) {
    const auto r = j.at("rows").get<Eigen::Index>();
    const auto c = j.at("cols").get<Eigen::Index>();
    const auto data = j.at("data").get<std::vector<double>>();
    if (static_cast<Eigen::Index>(data.size()) != r * c) throw ShapeError("matrix document has wrong data length");
    Matrix m(r, c);
    std::copy(data.begin(), data.end(), m.data());
    return m;
}

inline json vector_to_json(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

inline Vector vector_from_json(const json& j) {
    const auto d = j.get<std::vector<double>>();
    return Eigen::Map<const Vector>(d.data(), static_cast<Eigen::Index>(d.size()));
}

namespace detail {

inline void check_header(const json& j, const std::string& format) {
    if (j.value("format", std::string{}) != format) throw ParseError("expected a '" + format + "' document", 1);
    if (j.value("version", 0) != kModelFormatVersion)
        throw ParseError("unsupported " + format + " version " + std::to_string(j.value("version", 0)), 1);
}

}  // namespace detail

inline json to_json(const PCAModel& m) {
    return {{"format", "gaitid.pca"},
            {"version", kModelFormatVersion},
            {"mean", vector_to_json(m.mean)},
            {"components", matrix_to_json(m.components)},
            {"eigenvalues", vector_to_json(m.eigenvalues)},
            {"total_variance", m.total_variance}};
}

inline PCAModel pca_from_json(const json& j) {
    detail::check_header(j, "gaitid.pca");
    PCAModel m;
    m.mean = vector_from_json(j.at("mean"));
    m.components = matrix_from_json(j.at("components"));
    m.eigenvalues = vector_from_json(j.at("eigenvalues"));
    m.total_variance = j.at("total_variance").get<double>();
    return m;
}

inline json to_json(const ESPModel& m) {
    return {{"format", "gaitid.esp"},
            {"version", kModelFormatVersion},
            {"anchors_high", matrix_to_json(m.anchors_high)},
            {"anchors_low", matrix_to_json(m.anchors_low)},
            {"alpha", m.alpha},
            {"stress_trace", m.stress_trace},
            {"distance_sum", m.distance_sum},
            {"init", to_json(m.init)},
            {"transform_max_iter", m.transform_max_iter},
            {"rel_tol", m.rel_tol}};
}

inline ESPModel esp_from_json(const json& j) {
    detail::check_header(j, "gaitid.esp");
    ESPModel m;
    m.anchors_high = matrix_from_json(j.at("anchors_high"));
    m.anchors_low = matrix_from_json(j.at("anchors_low"));
    if (m.anchors_high.rows() != m.anchors_low.rows()) throw ShapeError("ESP anchor row counts differ");
    m.alpha = j.at("alpha").get<double>();
    m.stress_trace = j.at("stress_trace").get<std::vector<double>>();
    m.distance_sum = j.at("distance_sum").get<double>();
    m.init = pca_from_json(j.at("init"));
    m.transform_max_iter = j.at("transform_max_iter").get<std::size_t>();
    m.rel_tol = j.at("rel_tol").get<double>();
    return m;
}

inline json to_json(const KernelParams& p) { return {{"a", p.a}, {"b", p.b}, {"C", p.C}}; }

inline KernelParams kernel_params_from_json(const json& j) {
    KernelParams p{j.at("a").get<double>(), j.at("b").get<double>(), j.at("C").get<double>()};
    p.validate();
    return p;
}

inline json to_json(const KELMModel& m) {
    return {{"format", "gaitid.kelm"},
            {"version", kModelFormatVersion},
            {"classes", m.classes},
            {"params", to_json(m.params)},
            {"train_inputs", matrix_to_json(m.train_inputs)},
            {"output_weights", matrix_to_json(m.output_weights)}};
}

inline KELMModel kelm_from_json(const json& j) {
    detail::check_header(j, "gaitid.kelm");
    KELMModel m;
    m.classes = j.at("classes").get<std::vector<std::string>>();
    m.params = kernel_params_from_json(j.at("params"));
    m.train_inputs = matrix_from_json(j.at("train_inputs"));
    m.output_weights = matrix_from_json(j.at("output_weights"));
    if (m.output_weights.rows() != m.train_inputs.rows()) throw ShapeError("KELM weight rows differ from inputs");
    if (m.output_weights.cols() != static_cast<Eigen::Index>(m.classes.size()))
        throw ShapeError("KELM weight columns differ from class count");
    return m;
}

inline json to_json(const Normalizer& n) { return {{"min", n.min}, {"max", n.max}}; }

inline Normalizer normalizer_from_json(const json& j) {
    Normalizer n{j.at("min").get<std::vector<double>>(), j.at("max").get<std::vector<double>>()};
    if (n.min.size() != n.max.size()) throw ShapeError("normalizer bounds differ in length");
    return n;
}

inline json to_json(const Reducer& r) {
    json j{{"format", "gaitid.reducer"},
           {"version", kModelFormatVersion},
           {"method", to_string(r.method)},
           {"normalizer", to_json(r.normalizer)}};
    if (r.pca) j["pca"] = to_json(*r.pca);
    if (r.esp) j["esp"] = to_json(*r.esp);
    return j;
}

inline Reducer reducer_from_json(const json& j) {
    detail::check_header(j, "gaitid.reducer");
    Reducer r;
    const auto method = j.at("method").get<std::string>();
    r.method = method == "PCA" ? Method::PCA : method == "ESP" ? Method::ESP : Method::NONE;
    r.normalizer = normalizer_from_json(j.at("normalizer"));
    if (r.method == Method::PCA) r.pca = pca_from_json(j.at("pca"));
    if (r.method == Method::ESP) r.esp = esp_from_json(j.at("esp"));
    return r;
}

/// Deterministic part of the report; timings live under "timings" only.
inline json to_json(const EvalReport& r, bool include_timings = true) {
    json splits = json::array();
    for (const auto& s : r.splits)
        splits.push_back({{"descriptor", s.descriptor},
                          {"accuracy", s.accuracy},
                          {"train_accuracy", s.train_accuracy},
                          {"n_train", s.n_train},
                          {"n_test", s.n_test},
                          {"params", to_json(s.params)},
                          {"tuned", s.tuned},
                          {"tuning_fitness", s.tuning_fitness},
                          {"fallbacks", s.fallbacks}});
    json j{{"format", "gaitid.report"},
           {"version", kModelFormatVersion},
           {"protocol", r.protocol},
           {"config", r.config},
           {"splits", splits},
           {"mean_accuracy", r.mean_accuracy},
           {"ci_halfwidth", r.ci_halfwidth},
           {"ci_level", r.ci_level},
           {"n_windows", r.n_windows},
           {"feature_dim", r.feature_dim},
           {"n_classes", r.n_classes}};
    if (include_timings) {
        json t = json::object();
        for (const auto& [stage, timing] : r.timings.stages())
            t[stage] = {{"total_s", timing.total()},
                        {"mean_s", timing.mean()},
                        {"variance", timing.variance()},
                        {"samples", timing.seconds}};
        j["timings"] = t;
    }
    return j;
}

inline double stage_total(const EvalReport& r, const std::string& stage) {
    const auto it = r.timings.stages().find(stage);
    return it == r.timings.stages().end() ? 0.0 : it->second.total();
}

/// Train plus predict seconds summed over splits.
inline double classification_seconds(const EvalReport& r) {
    return stage_total(r, kStageTrain) + stage_total(r, kStagePredict);
}

inline std::string csv_header() {
    return "method,features,window,sensor,activity,protocol,accuracy,halfwidth,extract_s,projection_s,tuning_s,"
           "classify_s,time_s";
}

/// One row in the method / features / accuracy / halfwidth / time layout of the result tables.
inline std::string csv_row(const EvalReport& r) {
    auto cfg = [&](const char* k) {
        const auto it = r.config.find(k);
        return it == r.config.end() ? std::string{} : it->second;
    };
    std::ostringstream os;
    os << std::setprecision(6);
    const double ex = stage_total(r, kStageExtraction);
    const double pr = stage_total(r, kStageProjection);
    const double tu = stage_total(r, kStageTuning);
    const double cl = classification_seconds(r);
    os << cfg("method") << ',' << r.feature_dim << ',' << cfg("window_size") << ',' << cfg("sensor") << ','
       << cfg("sub_activity") << ',' << cfg("protocol") << ',' << r.mean_accuracy << ',' << r.ci_halfwidth << ','
       << ex << ',' << pr << ',' << tu << ',' << cl << ',' << (ex + pr + tu + cl);
    return os.str();
}

inline std::string text_table(const EvalReport& r) {
    std::ostringstream os;
    os << "protocol " << r.protocol << ", " << r.splits.size() << " splits, " << r.n_windows << " windows, "
       << r.feature_dim << " features\n";
    os << std::left << std::setw(28) << "split" << std::right << std::setw(10) << "accuracy" << std::setw(10)
       << "train" << std::setw(8) << "n_test" << '\n';
    os << std::fixed << std::setprecision(4);
    for (const auto& s : r.splits)
        os << std::left << std::setw(28) << s.descriptor << std::right << std::setw(10) << s.accuracy << std::setw(10)
           << s.train_accuracy << std::setw(8) << s.n_test << '\n';
    os << "mean " << r.mean_accuracy << " +- " << r.ci_halfwidth << " (" << std::setprecision(0)
       << r.ci_level * 100.0 << "% CI)\n";
    os << std::setprecision(4);
    for (const auto& [stage, t] : r.timings.stages())
        os << "  " << std::left << std::setw(20) << stage << std::right << std::setw(10) << t.total() << " s\n";
    return os.str();
}

/// Writes through a temporary file and renames it into place. Refuses to replace an
/// existing file unless `overwrite`.
inline void write_file_atomic(const std::filesystem::path& path, const std::string& content, bool overwrite) {
    namespace fs = std::filesystem;
    if (fs::exists(path) && !overwrite)
        throw InvalidInputError(path.string() + " exists (use --force to overwrite)");
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    const auto tmp = fs::path(path.string() + ".tmp");
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw InvalidInputError("cannot write " + tmp.string());
        out << content;
        if (!out) throw InvalidInputError("write failed for " + tmp.string());
    }
    fs::rename(tmp, path);
}

inline json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InvalidInputError("cannot open " + path.string());
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ParseError(path.string() + ": " + e.what(), 1);
    }
}

}  // namespace gaitid
