#pragma once

#include "gaitid/core.hpp"
#include "gaitid/features.hpp"
#include "gaitid/kelm.hpp"
#include "gaitid/projection.hpp"
#include "gaitid/pso.hpp"
#include "gaitid/signal_io.hpp"
#include "gaitid/splits.hpp"
#include "gaitid/statistics.hpp"

#include <algorithm>
#include <cstdlib>
#include <map>
#include <mutex>
#include <optional>
#include <random>
#include <string>
#include <thread>
#include <vector>

namespace gaitid {

enum class Method { NONE, PCA, ESP };
enum class Protocol { KFOLD, LOSO, SESSION };
enum class Target { SUBJECT, SUB_ACTIVITY, TWO_STAGE };

inline std::string to_string(Method m) {
    return m == Method::NONE ? "NONE" : m == Method::PCA ? "PCA" : "ESP";
}
inline std::string to_string(Protocol p) {
    return p == Protocol::KFOLD ? "KFOLD" : p == Protocol::LOSO ? "LOSO" : "SESSION";
}
inline std::string to_string(Target t) {
    return t == Target::SUBJECT ? "SUBJECT" : t == Target::SUB_ACTIVITY ? "SUB_ACTIVITY" : "TWO_STAGE";
}

struct TuningConfig {
    bool enabled = false;
    KernelSearchConfig search = default_kernel_search();
    std::size_t cv_folds = 3;
    /// Stratified subsample cap for the inner cross-validation (0 = all training rows).
    std::size_t max_rows = 300;
};

struct ExperimentConfig {
    std::optional<Sensor> sensor;
    std::optional<SubActivity> sub_activity;
    std::size_t filter_order = 3;  // <= 1 disables filtering
    std::size_t window_size = 50;
    double overlap = 0.0;
    Method method = Method::NONE;
    std::size_t n_features = 30;
    EspOptions esp = [] {
        EspOptions o;
        o.max_anchors = 200;
        return o;
    }();
    KernelParams kernel;
    TuningConfig tuning;
    Protocol protocol = Protocol::KFOLD;
    std::size_t folds = 10;
    Target target = Target::SUBJECT;
    std::uint64_t seed = 7;
    double ci_level = 0.99;
    /// 0 means hardware concurrency; GAITID_THREADS caps either.
    std::size_t threads = 0;
    /// Leakage sentinel: permute test labels within each split before scoring.
    bool shuffle_test_labels = false;

    void validate() const {
        if (window_size < kMinWindowLength)
            throw ConfigError("window size must be at least " + std::to_string(kMinWindowLength));
        if (!(overlap >= 0.0 && overlap < 1.0)) throw ConfigError("overlap must lie in [0, 1)");
        if (filter_order > 1 && filter_order % 2 == 0) throw ConfigError("filter order must be odd");
        if (method != Method::NONE) {
            if (n_features < 1 || n_features > kFeatureCount)
                throw ConfigError("feature count must lie in [1, " + std::to_string(kFeatureCount) + "]");
            if (method == Method::ESP && n_features >= kFeatureCount)
                throw ConfigError("ESP feature count must be below " + std::to_string(kFeatureCount));
        }
        if (protocol == Protocol::KFOLD && folds < 2) throw ConfigError("k-fold needs at least 2 folds");
        if (!(ci_level > 0.0 && ci_level < 1.0)) throw ConfigError("confidence level must lie in (0, 1)");
        try {
            kernel.validate();
            if (tuning.enabled) tuning.search.validate();
        } catch (const Error& e) {
            throw ConfigError(e.what());
        }
    }
};

/// Requested worker count (0 = hardware concurrency), capped by GAITID_THREADS when set.
inline std::size_t resolve_threads(std::size_t requested) {
    std::size_t n = requested != 0 ? requested : std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("GAITID_THREADS")) {
        const auto cap = static_cast<std::size_t>(std::strtoul(env, nullptr, 10));
        if (cap > 0) n = std::min(n, cap);
    }
    return n;
}

/// Runs fn(i) for i in [0, n) on up to `threads` workers. The first exception is rethrown.
template <class Fn>
void parallel_for(std::size_t n, std::size_t threads, Fn&& fn) {
    threads = std::min(threads, n);
    if (threads <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::mutex mu;
    std::size_t next = 0;
    std::exception_ptr err;
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t)
        pool.emplace_back([&] {
            while (true) {
                std::size_t i;
                {
                    std::lock_guard lk(mu);
                    if (next >= n || err) return;
                    i = next++;
                }
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard lk(mu);
                    if (!err) err = std::current_exception();
                }
            }
        });
    for (auto& th : pool) th.join();
    if (err) std::rethrow_exception(err);
}

/// Applies the sensor / sub-activity filters.
inline std::vector<SignalRecording> select_recordings(const std::vector<SignalRecording>& recs,
                                                      const ExperimentConfig& cfg) {
    std::vector<SignalRecording> out;
    for (const auto& r : recs) {
        if (cfg.sensor && r.sensor != *cfg.sensor) continue;
        if (cfg.sub_activity && r.sub_activity != *cfg.sub_activity) continue;
        out.push_back(r);
    }
    return out;
}

/// filter -> window -> 72 features, in recording order.
inline FeatureMatrix extract_features(const std::vector<SignalRecording>& recs, std::size_t window_size,
                                      double overlap, std::size_t filter_order, std::size_t threads = 1) {
    if (recs.empty()) throw EmptyInputError("no recordings selected");
    for (const auto& r : recs)
        if (r.size() < window_size)
            throw ConfigError("window size " + std::to_string(window_size) + " exceeds recording " + r.subject_id +
                              "/" + to_string(r.sub_activity) + " of " + std::to_string(r.size()) + " samples");
    std::vector<std::vector<FeatureVector>> per(recs.size());
    parallel_for(recs.size(), threads, [&](std::size_t i) {
        const auto filtered = filter_order > 1 ? moving_average_filter(recs[i], filter_order) : recs[i];
        for (const auto& w : segment_windows(filtered, window_size, overlap)) per[i].push_back(extract_feature_vector(w));
    });
    std::vector<FeatureVector> rows;
    for (auto& p : per) rows.insert(rows.end(), std::make_move_iterator(p.begin()), std::make_move_iterator(p.end()));
    return to_matrix(rows);
}

/// Fitted normalizer plus optional projection, applied identically to any later rows.
struct Reducer {
    Normalizer normalizer;
    Method method = Method::NONE;
    std::optional<PCAModel> pca;
    std::optional<ESPModel> esp;

    Matrix transform(const Matrix& raw) const {
        const Matrix norm = apply_normalizer(normalizer, raw);
        switch (method) {
            case Method::PCA: return pca_transform(*pca, norm);
            case Method::ESP: return esp_transform(*esp, norm);
            case Method::NONE: break;
        }
        return norm;
    }
};

struct ReducerFit {
    Reducer reducer;
    Matrix train;  // transformed training rows
};

inline ReducerFit fit_reducer(const Matrix& raw_train, Method method, std::size_t n_features, const EspOptions& esp) {
    ReducerFit out;
    out.reducer.normalizer = fit_normalizer(raw_train);
    out.reducer.method = method;
    const Matrix norm = apply_normalizer(out.reducer.normalizer, raw_train);
    switch (method) {
        case Method::NONE: out.train = norm; break;
        case Method::PCA:
            out.reducer.pca = pca_fit(norm, static_cast<Eigen::Index>(n_features));
            out.train = pca_transform(*out.reducer.pca, norm);
            break;
        case Method::ESP: {
            EspOptions o = esp;
            o.target_dim = static_cast<Eigen::Index>(n_features);
            auto ft = esp_fit_transform(norm, o);
            out.reducer.esp = std::move(ft.model);
            out.train = std::move(ft.embedding);
            break;
        }
    }
    return out;
}

namespace detail {

inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t tag) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(tag), static_cast<std::uint32_t>(tag >> 32)};
    std::array<std::uint32_t, 2> out{};
    seq.generate(out.begin(), out.end());
    return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

/// Stratified subsample of at most `cap` row indices.
inline std::vector<std::size_t> stratified_subsample(const std::vector<std::string>& labels, std::size_t cap,
                                                     std::uint64_t seed) {
    std::vector<std::size_t> all(labels.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    if (cap == 0 || cap >= labels.size()) return all;
    std::map<std::string, std::vector<std::size_t>> by_class;
    for (std::size_t i = 0; i < labels.size(); ++i) by_class[labels[i]].push_back(i);
    std::mt19937_64 rng(seed);
    std::vector<std::size_t> out;
    for (auto& [cls, idx] : by_class) {
        std::shuffle(idx.begin(), idx.end(), rng);
        const double share = static_cast<double>(idx.size()) / static_cast<double>(labels.size());
        const auto take = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(share * static_cast<double>(cap))));
        out.insert(out.end(), idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(std::min(take, idx.size())));
    }
    std::sort(out.begin(), out.end());
    return out;
}

template <class T>
std::vector<T> pick(const std::vector<T>& v, const std::vector<std::size_t>& idx) {
    std::vector<T> out;
    out.reserve(idx.size());
    for (std::size_t i : idx) out.push_back(v[i]);
    return out;
}

inline Matrix pick_rows(const Matrix& m, const std::vector<std::size_t>& idx) {
    Matrix out(static_cast<Eigen::Index>(idx.size()), m.cols());
    for (std::size_t r = 0; r < idx.size(); ++r) out.row(static_cast<Eigen::Index>(r)) = m.row(static_cast<Eigen::Index>(idx[r]));
    return out;
}

}  // namespace detail

/// Mean stratified k-fold accuracy of a KELM with `params`; NaN when a fold fails to train.
inline double cv_accuracy(const Matrix& X, const std::vector<std::string>& labels, const KernelParams& params,
                          std::size_t folds, std::uint64_t seed) {
    const auto splits = stratified_kfold(labels, folds, seed);
    double sum = 0.0;
    for (const auto& sp : splits) {
        try {
            const auto model = kelm_train(detail::pick_rows(X, sp.train_indices), detail::pick(labels, sp.train_indices), params);
            const auto pred = kelm_predict(model, detail::pick_rows(X, sp.test_indices));
            sum += accuracy(pred.labels, detail::pick(labels, sp.test_indices));
        } catch (const TrainingError&) {
            return std::numeric_limits<double>::quiet_NaN();
        }
    }
    return sum / static_cast<double>(splits.size());
}

struct TuningOutcome {
    KernelParams params;
    double fitness = 0.0;
    bool tuned = false;
    std::vector<double> history;
};

/// PSO over (a, b, C) scored by inner cross-validation on the given (training) rows only.
inline TuningOutcome tune_kernel(const Matrix& X, const std::vector<std::string>& labels, const TuningConfig& cfg,
                                 const KernelParams& fallback, std::uint64_t seed) {
    TuningOutcome out{fallback, 0.0, false, {}};
    const auto sub = detail::stratified_subsample(labels, cfg.max_rows, detail::mix_seed(seed, 1));
    const Matrix Xs = detail::pick_rows(X, sub);
    const auto ys = detail::pick(labels, sub);
    std::map<std::string, std::size_t> counts;
    for (const auto& y : ys) ++counts[y];
    std::size_t smallest = std::numeric_limits<std::size_t>::max();
    for (const auto& [k, c] : counts) smallest = std::min(smallest, c);
    const std::size_t folds = std::min(cfg.cv_folds, smallest);
    if (counts.size() < 2 || folds < 2) return out;
    auto search = cfg.search;
    search.seed = detail::mix_seed(seed, 2);
    const auto inner_seed = detail::mix_seed(seed, 3);
    auto res = pso_optimize([&](const KernelParams& p) { return cv_accuracy(Xs, ys, p, folds, inner_seed); }, search);
    out.params = res.params;
    out.fitness = res.best_fitness;
    out.tuned = true;
    out.history = std::move(res.history);
    return out;
}

/// Per-activity subject classifier; a constant answer when only one subject was seen.
struct SubjectModel {
    std::optional<KELMModel> model;
    std::string constant;
};

struct TwoStageModel {
    std::optional<KELMModel> activity_model;
    std::string only_activity;
    std::map<std::string, SubjectModel> per_activity;
    SubjectModel global;
};

struct TwoStagePrediction {
    std::vector<std::string> activity;
    std::vector<std::string> subject;
    std::vector<bool> legitimate;
    std::size_t fallbacks = 0;
};

namespace detail {

inline SubjectModel train_subject_model(const Matrix& X, const std::vector<std::string>& subjects,
                                        const KernelParams& params) {
    SubjectModel m;
    if (distinct_sorted(subjects).size() < 2) {
        m.constant = subjects.empty() ? std::string{} : subjects.front();
        return m;
    }
    m.model = kelm_train(X, subjects, params);
    return m;
}

inline std::string predict_subject(const SubjectModel& m, const Matrix& row) {
    if (!m.model) return m.constant;
    return kelm_predict(*m.model, row).labels.front();
}

}  // namespace detail

/// Stage 1 recognizes the sub-activity; stage 2 applies that activity's subject classifier.
inline TwoStageModel train_two_stage(const Matrix& X, const std::vector<std::string>& activities,
                                     const std::vector<std::string>& subjects, const KernelParams& params,
                                     std::size_t min_rows_per_activity = 2) {
    TwoStageModel m;
    const auto acts = distinct_sorted(activities);
    if (acts.empty()) throw EmptyInputError("two-stage training needs rows");
    if (acts.size() >= 2)
        m.activity_model = kelm_train(X, activities, params);
    else
        m.only_activity = acts.front();
    for (const auto& a : acts) {
        std::vector<std::size_t> idx;
        for (std::size_t i = 0; i < activities.size(); ++i)
            if (activities[i] == a) idx.push_back(i);
        if (idx.size() < min_rows_per_activity) continue;
        m.per_activity[a] = detail::train_subject_model(detail::pick_rows(X, idx), detail::pick(subjects, idx), params);
    }
    m.global = detail::train_subject_model(X, subjects, params);
    return m;
}

/// Per-row activity, subject, and legitimacy against `claimed` (may be empty).
inline TwoStagePrediction predict_two_stage(const TwoStageModel& m, const Matrix& X,
                                            const std::vector<std::string>& claimed = {}) {
    TwoStagePrediction out;
    const auto n = static_cast<std::size_t>(X.rows());
    if (m.activity_model)
        out.activity = kelm_predict(*m.activity_model, X).labels;
    else
        out.activity.assign(n, m.only_activity);

    // Batch rows by predicted activity.
    out.subject.assign(n, {});
    std::map<std::string, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < n; ++i) groups[out.activity[i]].push_back(i);
    for (const auto& [act, idx] : groups) {
        const auto it = m.per_activity.find(act);
        const SubjectModel* sm = &m.global;
        if (it != m.per_activity.end())
            sm = &it->second;
        else
            out.fallbacks += idx.size();
        if (sm->model) {
            const auto labels = kelm_predict(*sm->model, detail::pick_rows(X, idx)).labels;
            for (std::size_t j = 0; j < idx.size(); ++j) out.subject[idx[j]] = labels[j];
        } else {
            for (std::size_t i : idx) out.subject[i] = sm->constant;
        }
    }
    if (!claimed.empty()) {
        if (claimed.size() != n) throw ShapeError("claimed subject list differs from row count");
        out.legitimate.resize(n);
        for (std::size_t i = 0; i < n; ++i) out.legitimate[i] = out.subject[i] == claimed[i];
    }
    return out;
}

/// Convenience over FeatureMatrix values (already normalized / projected).
inline TwoStagePrediction identify_two_stage(const FeatureMatrix& train, const FeatureMatrix& test,
                                             const KernelParams& params, const std::vector<std::string>& claimed = {}) {
    std::vector<std::string> train_acts;
    for (auto a : train.sub_activities) train_acts.push_back(to_string(a));
    for (auto a : test.sub_activities)
        if (std::find(train.sub_activities.begin(), train.sub_activities.end(), a) == train.sub_activities.end())
            throw InvalidInputError("test sub-activity " + to_string(a) + " is absent from training data");
    const auto model = train_two_stage(train.values, train_acts, train.subjects, params);
    return predict_two_stage(model, test.values, claimed);
}

struct SplitReport {
    std::string descriptor;
    double accuracy = 0.0;
    double train_accuracy = 0.0;
    std::size_t n_train = 0;
    std::size_t n_test = 0;
    KernelParams params;
    bool tuned = false;
    double tuning_fitness = 0.0;
    std::size_t fallbacks = 0;
};

struct EvalReport {
    std::string protocol;
    std::map<std::string, std::string> config;
    std::vector<SplitReport> splits;
    double mean_accuracy = 0.0;
    double ci_halfwidth = 0.0;
    double ci_level = 0.99;
    StageTimer timings;
    std::size_t n_windows = 0;
    std::size_t feature_dim = 0;
    std::size_t n_classes = 0;

    std::vector<double> accuracies() const {
        std::vector<double> a;
        for (const auto& s : splits) a.push_back(s.accuracy);
        return a;
    }
};

inline const char* const kStageExtraction = "feature_extraction";
inline const char* const kStageProjection = "projection";
inline const char* const kStageTuning = "tuning";
inline const char* const kStageTrain = "train";
inline const char* const kStagePredict = "predict";

inline std::vector<std::string> target_labels(const FeatureMatrix& fm, Target target) {
    std::vector<std::string> out;
    if (target == Target::SUB_ACTIVITY)
        for (auto a : fm.sub_activities) out.push_back(to_string(a));
    else
        out = fm.subjects;
    return out;
}

struct PlannedSplit {
    Split split;
    std::vector<std::string> labels;  // per row of the full matrix
};

/// Expands the protocol into splits. LOSO with a subject target is evaluated per user as
/// legitimate-vs-rest on a session split, since a held-out subject cannot be named.
inline std::vector<PlannedSplit> plan_splits(const FeatureMatrix& fm, const ExperimentConfig& cfg) {
    std::vector<PlannedSplit> out;
    const auto labels = target_labels(fm, cfg.target);
    switch (cfg.protocol) {
        case Protocol::KFOLD:
            for (auto& sp : stratified_kfold(labels, cfg.folds, cfg.seed)) out.push_back({std::move(sp), labels});
            break;
        case Protocol::SESSION: out.push_back({session_split(fm.subjects, fm.sessions), labels}); break;
        case Protocol::LOSO:
            if (cfg.target == Target::SUB_ACTIVITY) {
                for (auto& sp : loso_splits(fm.subjects)) out.push_back({std::move(sp), labels});
            } else {
                const auto base = session_split(fm.subjects, fm.sessions);
                const auto subjects = distinct_sorted(fm.subjects);
                if (subjects.size() < 2) throw InvalidInputError("per-user evaluation needs at least 2 subjects");
                for (const auto& s : subjects) {
                    PlannedSplit ps{base, {}};
                    ps.split.descriptor = "user " + s + " vs rest";
                    for (const auto& subj : fm.subjects) ps.labels.push_back(subj == s ? "legitimate" : "impostor");
                    out.push_back(std::move(ps));
                }
            }
            break;
    }
    return out;
}

inline SplitReport evaluate_split(const FeatureMatrix& fm, const PlannedSplit& ps, const ExperimentConfig& cfg,
                                  std::size_t split_index, StageTimer& timer) {
    const auto& sp = ps.split;
    if (sp.train_indices.empty() || sp.test_indices.empty())
        throw InvalidInputError("split '" + sp.descriptor + "' has an empty side");
    const std::uint64_t seed = detail::mix_seed(cfg.seed, 1000 + split_index);
    const Matrix raw_train = detail::pick_rows(fm.values, sp.train_indices);
    const Matrix raw_test = detail::pick_rows(fm.values, sp.test_indices);
    auto y_train = detail::pick(ps.labels, sp.train_indices);
    auto y_test = detail::pick(ps.labels, sp.test_indices);

    auto [fit, proj_s] = timed([&] {
        auto f = fit_reducer(raw_train, cfg.method, cfg.n_features, cfg.esp);
        Matrix test = f.reducer.transform(raw_test);
        return std::make_pair(std::move(f), std::move(test));
    });
    if (cfg.method != Method::NONE) timer.record(kStageProjection, proj_s);
    const Matrix& X_train = fit.first.train;
    const Matrix& X_test = fit.second;

    SplitReport rep;
    rep.descriptor = sp.descriptor;
    rep.n_train = sp.train_indices.size();
    rep.n_test = sp.test_indices.size();
    rep.params = cfg.kernel;
    if (cfg.tuning.enabled) {
        const auto tuning = timed(timer, kStageTuning, [&] {
            // Two-stage tuning targets the subject classifier.
            return tune_kernel(X_train, y_train, cfg.tuning, cfg.kernel, seed);
        });
        rep.params = tuning.params;
        rep.tuned = tuning.tuned;
        rep.tuning_fitness = tuning.fitness;
    }

    if (cfg.shuffle_test_labels) {
        std::mt19937_64 rng(detail::mix_seed(seed, 7));
        std::shuffle(y_test.begin(), y_test.end(), rng);
    }

    if (cfg.target == Target::TWO_STAGE) {
        std::vector<std::string> acts;
        for (auto a : fm.sub_activities) acts.push_back(to_string(a));
        const auto acts_train = detail::pick(acts, sp.train_indices);
        const auto model =
            timed(timer, kStageTrain, [&] { return train_two_stage(X_train, acts_train, y_train, rep.params); });
        const auto pred = timed(timer, kStagePredict, [&] { return predict_two_stage(model, X_test); });
        rep.accuracy = accuracy(pred.subject, y_test);
        rep.fallbacks = pred.fallbacks;
        rep.train_accuracy = accuracy(predict_two_stage(model, X_train).subject, y_train);
    } else {
        const auto model = timed(timer, kStageTrain, [&] { return kelm_train(X_train, y_train, rep.params); });
        const auto pred = timed(timer, kStagePredict, [&] { return kelm_predict(model, X_test); });
        rep.accuracy = accuracy(pred.labels, y_test);
        rep.train_accuracy = accuracy(kelm_predict(model, X_train).labels, y_train);
    }
    return rep;
}

inline std::map<std::string, std::string> config_echo(const ExperimentConfig& cfg) {
    std::map<std::string, std::string> e;
    e["window_size"] = std::to_string(cfg.window_size);
    e["overlap"] = std::to_string(cfg.overlap);
    e["filter_order"] = std::to_string(cfg.filter_order);
    e["method"] = to_string(cfg.method);
    e["n_features"] = cfg.method == Method::NONE ? std::to_string(kFeatureCount) : std::to_string(cfg.n_features);
    e["sensor"] = cfg.sensor ? to_string(*cfg.sensor) : "ALL";
    e["sub_activity"] = cfg.sub_activity ? to_string(*cfg.sub_activity) : "ALL";
    e["protocol"] = to_string(cfg.protocol);
    e["folds"] = std::to_string(cfg.folds);
    e["target"] = to_string(cfg.target);
    e["seed"] = std::to_string(cfg.seed);
    e["tuning"] = cfg.tuning.enabled ? "PSO" : "OFF";
    return e;
}

/// Runs every split on already extracted features. All fitting uses training rows only.
inline EvalReport run_experiment(const FeatureMatrix& features, const ExperimentConfig& cfg) {
    cfg.validate();
    if (features.rows() == 0) throw EmptyInputError("no feature rows");
    if (cfg.method == Method::PCA && cfg.n_features > static_cast<std::size_t>(features.cols()))
        throw ConfigError("feature count exceeds feature dimension");
    const auto planned = plan_splits(features, cfg);

    EvalReport report;
    report.protocol = to_string(cfg.protocol);
    report.config = config_echo(cfg);
    report.ci_level = cfg.ci_level;
    report.n_windows = static_cast<std::size_t>(features.rows());
    report.feature_dim = cfg.method == Method::NONE ? static_cast<std::size_t>(features.cols()) : cfg.n_features;
    report.splits.resize(planned.size());
    report.n_classes = distinct_sorted(planned.front().labels).size();

    std::vector<StageTimer> timers(planned.size());
    parallel_for(planned.size(), resolve_threads(cfg.threads), [&](std::size_t i) {
        report.splits[i] = evaluate_split(features, planned[i], cfg, i, timers[i]);
    });
    for (const auto& t : timers) report.timings.merge(t);

    const auto acc = report.accuracies();
    if (acc.size() >= 2) {
        const auto ci = confidence_interval(acc, cfg.ci_level);
        report.mean_accuracy = ci.mean;
        report.ci_halfwidth = ci.halfwidth;
    } else {
        report.mean_accuracy = acc.front();
    }
    return report;
}

/// Full pipeline from recordings: select, extract (timed), then evaluate.
inline EvalReport run_experiment(const std::vector<SignalRecording>& recordings, const ExperimentConfig& cfg) {
    cfg.validate();
    const auto selected = select_recordings(recordings, cfg);
    if (selected.empty()) throw ConfigError("no recordings match the sensor / sub-activity filter");
    for (const auto& r : selected)
        if (r.size() < cfg.window_size)
            throw ConfigError("window size " + std::to_string(cfg.window_size) + " exceeds a recording of " +
                              std::to_string(r.size()) + " samples");
    auto [features, secs] = timed([&] {
        return extract_features(selected, cfg.window_size, cfg.overlap, cfg.filter_order, resolve_threads(cfg.threads));
    });
    auto report = run_experiment(features, cfg);
    report.timings.record(kStageExtraction, secs);
    return report;
}

}  // namespace gaitid
