// gaitid command-line tool.
//
// Every subcommand accepts --config FILE: flat `key = value` lines, `#` comments, lists as
// `[a, b, c]` or `a, b, c`, numeric ranges as `start:stop:step`. Flags use the same keys with
// dashes (`window_size` -> `--window-size`) and override file values.
//
// Exit codes: 0 success, 2 usage or configuration error, 1 runtime failure.

#include "gaitid/gaitid.hpp"

#include "CLI11.hpp"

#include <charconv>
#include <filesystem>
#include <functional>
#include <iostream>
#include <set>

using namespace gaitid;
namespace fs = std::filesystem;

namespace {

using Settings = std::map<std::string, std::vector<std::string>>;

std::string upper(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::toupper(c); });
    return s;
}

std::string format_number(double v) {
    if (v == std::floor(v) && std::abs(v) < 1e15) return std::to_string(static_cast<long long>(v));
    std::ostringstream os;
    os << std::setprecision(12) << v;
    return os.str();
}

/// `[a, b]`, `a, b`, and `start:stop:step` (inclusive) all expand to a flat list.
std::vector<std::string> parse_list(std::string_view text) {
    text = detail::trim(text);
    if (text.size() >= 2 && text.front() == '[' && text.back() == ']') text = text.substr(1, text.size() - 2);
    std::vector<std::string> out;
    for (auto item : detail::split(text, ',')) {
        item = detail::trim(item);
        if (item.empty()) continue;
        const auto parts = detail::split(item, ':');
        if (parts.size() == 3) {
            const auto a = detail::parse_double(parts[0]), b = detail::parse_double(parts[1]),
                       s = detail::parse_double(parts[2]);
            if (!a || !b || !s || !(*s > 0.0) || *b < *a)
                throw ConfigError("bad range '" + std::string(item) + "' (expected start:stop:step)");
            for (double v = *a; v <= *b + 1e-9 * *s; v += *s) out.push_back(format_number(v));
            continue;
        }
        out.emplace_back(item);
    }
    return out;
}

Settings read_config_file(const fs::path& path, const std::set<std::string>& allowed) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    Settings s;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        const auto text = detail::trim(line);
        if (text.empty()) continue;
        const auto eq = text.find('=');
        const auto where = path.string() + ":" + std::to_string(lineno) + ": ";
        if (eq == std::string_view::npos) throw ConfigError(where + "expected key = value");
        std::string key(detail::trim(text.substr(0, eq)));
        std::replace(key.begin(), key.end(), '-', '_');
        if (!allowed.count(key)) throw ConfigError(where + "unknown key '" + key + "'");
        s[key] = parse_list(text.substr(eq + 1));
    }
    return s;
}

/// One subcommand: string-valued options keyed like the config file, plus boolean flags.
class Command {
public:
    Command(CLI::App& parent, const std::string& name, const std::string& help)
        : app_(parent.add_subcommand(name, help)) {
        app_->add_option("--config", config_path_, "Flat key = value config file")->check(CLI::ExistingFile);
        app_->add_flag("--force", force_, "Overwrite existing outputs");
    }

    Command& opt(const std::string& key, const std::string& help) {
        keys_.insert(key);
        std::string flag = key;
        std::replace(flag.begin(), flag.end(), '_', '-');
        app_->add_option("--" + flag, values_[key], help);
        return *this;
    }

    Command& flag(const std::string& key, const std::string& help) {
        keys_.insert(key);
        std::string name = key;
        std::replace(name.begin(), name.end(), '_', '-');
        app_->add_flag("--" + name, flags_[key], help);
        return *this;
    }

    CLI::App* app() const { return app_; }
    bool force() const { return force_; }

    /// Config file first, then flags given on the command line.
    Settings settings() const {
        Settings s = config_path_.empty() ? Settings{} : read_config_file(config_path_, keys_);
        for (const auto& [key, value] : values_)
            if (app_->get_option("--" + dashed(key))->count() > 0) s[key] = parse_list(value);
        for (const auto& [key, on] : flags_)
            if (on) s[key] = {"true"};
        return s;
    }

private:
    static std::string dashed(std::string k) {
        std::replace(k.begin(), k.end(), '_', '-');
        return k;
    }

    CLI::App* app_;
    std::string config_path_;
    bool force_ = false;
    std::set<std::string> keys_;
    std::map<std::string, std::string> values_;
    std::map<std::string, bool> flags_;
};

// ---- typed access -------------------------------------------------------------------------

bool has(const Settings& s, const std::string& k) { return s.count(k) && !s.at(k).empty(); }

std::vector<std::string> many(const Settings& s, const std::string& k, std::vector<std::string> fallback) {
    return has(s, k) ? s.at(k) : fallback;
}

std::string one(const Settings& s, const std::string& k, const std::string& fallback = {}) {
    if (!has(s, k)) return fallback;
    if (s.at(k).size() != 1) throw ConfigError(k + " takes a single value");
    return s.at(k).front();
}

std::size_t to_size(const std::string& v, const std::string& k) {
    std::size_t out = 0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || ptr != v.data() + v.size())
        throw ConfigError(k + ": expected a non-negative integer, got '" + v + "'");
    return out;
}

double to_double(const std::string& v, const std::string& k) {
    const auto d = detail::parse_double(v);
    if (!d || !std::isfinite(*d)) throw ConfigError(k + ": expected a number, got '" + v + "'");
    return *d;
}

bool to_bool(const std::string& v, const std::string& k) {
    const auto u = upper(v);
    if (u == "TRUE" || u == "1" || u == "YES" || u == "ON") return true;
    if (u == "FALSE" || u == "0" || u == "NO" || u == "OFF") return false;
    throw ConfigError(k + ": expected true or false, got '" + v + "'");
}

std::size_t size_of(const Settings& s, const std::string& k, std::size_t fallback) {
    return has(s, k) ? to_size(one(s, k), k) : fallback;
}
double double_of(const Settings& s, const std::string& k, double fallback) {
    return has(s, k) ? to_double(one(s, k), k) : fallback;
}
bool bool_of(const Settings& s, const std::string& k, bool fallback) {
    return has(s, k) ? to_bool(one(s, k), k) : fallback;
}

Method parse_method(const std::string& v) {
    const auto u = upper(v);
    if (u == "NONE") return Method::NONE;
    if (u == "PCA") return Method::PCA;
    if (u == "ESP") return Method::ESP;
    throw ConfigError("method must be NONE, PCA or ESP, got '" + v + "'");
}

Protocol parse_protocol(const std::string& v) {
    const auto u = upper(v);
    if (u == "KFOLD") return Protocol::KFOLD;
    if (u == "LOSO") return Protocol::LOSO;
    if (u == "SESSION") return Protocol::SESSION;
    throw ConfigError("protocol must be KFOLD, LOSO or SESSION, got '" + v + "'");
}

Target parse_target(const std::string& v) {
    const auto u = upper(v);
    if (u == "SUBJECT") return Target::SUBJECT;
    if (u == "SUB_ACTIVITY" || u == "ACTIVITY") return Target::SUB_ACTIVITY;
    if (u == "TWO_STAGE") return Target::TWO_STAGE;
    throw ConfigError("target must be SUBJECT, ACTIVITY or TWO_STAGE, got '" + v + "'");
}

std::optional<Sensor> parse_sensor_filter(const std::string& v) {
    if (upper(v) == "ALL") return std::nullopt;
    const auto s = parse_sensor(upper(v));
    if (!s) throw ConfigError("sensor must be ACC, LACC or ALL, got '" + v + "'");
    return s;
}

std::optional<SubActivity> parse_activity_filter(const std::string& v) {
    if (upper(v) == "ALL") return std::nullopt;
    const auto a = parse_sub_activity(v);
    if (!a) throw ConfigError("activity must be BLP, BRP, FLP, FRP, GENERIC or ALL, got '" + v + "'");
    return a;
}

// ---- shared option groups ---------------------------------------------------------------

void dataset_options(Command& c) {
    c.opt("data", "Dataset path (CUSTOM_CSV tree or file, or HAR split directory)")
        .opt("layout", "custom | har")
        .opt("har_sensor", "Sensor recorded in a HAR directory: ACC | LACC")
        .flag("synthetic", "Generate the synthetic dataset instead of reading --data")
        .opt("users", "Synthetic users")
        .opt("sessions", "Synthetic sessions per user and pocket")
        .opt("duration", "Synthetic seconds per recording")
        .opt("rate", "Synthetic sample rate in Hz");
}

void extraction_options(Command& c) {
    c.opt("sensor", "ACC | LACC | ALL (list in sweeps)")
        .opt("activity", "BLP | BRP | FLP | FRP | GENERIC | ALL (list in sweeps)")
        .opt("window_size", "Samples per window (list in sweeps)")
        .opt("overlap", "Window overlap fraction in [0, 1)")
        .opt("filter_order", "Moving-average order (odd; <= 1 disables)");
}

void model_options(Command& c) {
    c.opt("method", "NONE | PCA | ESP (list in sweeps)")
        .opt("n_features", "Projected dimension (list in sweeps)")
        .opt("anchors", "ESP anchor cap (0 = all rows)")
        .opt("a", "Kernel cosine scale")
        .opt("b", "Kernel decay scale")
        .opt("C", "Regularization coefficient")
        .flag("tune", "Tune (a, b, C) with PSO on training rows")
        .opt("tune_rows", "Row cap for the tuning cross-validation")
        .opt("tune_folds", "Inner folds for tuning")
        .opt("swarm", "PSO swarm size")
        .opt("iterations", "PSO iterations")
        .opt("seed", "Seed for every random choice")
        .opt("threads", "Worker threads (capped by GAITID_THREADS)");
}

SyntheticSpec synthetic_spec(const Settings& s) {
    SyntheticSpec spec;
    spec.users = size_of(s, "users", spec.users);
    spec.sessions = size_of(s, "sessions", spec.sessions);
    spec.duration_s = double_of(s, "duration", spec.duration_s);
    spec.sample_rate_hz = double_of(s, "rate", spec.sample_rate_hz);
    spec.seed = size_of(s, "seed", spec.seed);
    try {
        spec.validate();
    } catch (const InvalidParameterError& e) {
        throw ConfigError(e.what());
    }
    return spec;
}

std::vector<SignalRecording> load_dataset(const Settings& s, bool allow_synthetic) {
    if (!has(s, "data")) {
        if (allow_synthetic && bool_of(s, "synthetic", false)) return generate_synthetic_dataset(synthetic_spec(s));
        throw ConfigError(allow_synthetic ? "missing dataset: give --data PATH or --synthetic"
                                          : "missing dataset path (--data)");
    }
    const fs::path path = one(s, "data");
    if (!fs::exists(path)) throw ConfigError("dataset path does not exist: " + path.string());
    const auto layout = upper(one(s, "layout", "custom"));
    if (layout != "CUSTOM" && layout != "HAR") throw ConfigError("layout must be custom or har");
    const auto har_sensor = parse_sensor_filter(one(s, "har_sensor", "LACC"));
    if (!har_sensor) throw ConfigError("har_sensor must be ACC or LACC");
    return load_recordings(path, layout == "HAR" ? Layout::HAR_DIR : Layout::CUSTOM_CSV, *har_sensor);
}

/// Scalar settings shared by every experiment; sweep axes are filled in by the caller.
ExperimentConfig base_config(const Settings& s) {
    ExperimentConfig cfg;
    cfg.overlap = double_of(s, "overlap", cfg.overlap);
    cfg.filter_order = size_of(s, "filter_order", cfg.filter_order);
    cfg.protocol = parse_protocol(one(s, "protocol", "KFOLD"));
    cfg.folds = size_of(s, "folds", cfg.folds);
    cfg.target = parse_target(one(s, "target", "SUBJECT"));
    cfg.seed = size_of(s, "seed", cfg.seed);
    cfg.ci_level = double_of(s, "ci_level", cfg.ci_level);
    cfg.threads = size_of(s, "threads", cfg.threads);
    cfg.esp.max_anchors = size_of(s, "anchors", cfg.esp.max_anchors);
    cfg.kernel = {double_of(s, "a", cfg.kernel.a), double_of(s, "b", cfg.kernel.b), double_of(s, "C", cfg.kernel.C)};
    cfg.tuning.enabled = bool_of(s, "tune", false);
    cfg.tuning.max_rows = size_of(s, "tune_rows", cfg.tuning.max_rows);
    cfg.tuning.cv_folds = size_of(s, "tune_folds", cfg.tuning.cv_folds);
    cfg.tuning.search.swarm_size = size_of(s, "swarm", cfg.tuning.search.swarm_size);
    cfg.tuning.search.iterations = size_of(s, "iterations", cfg.tuning.search.iterations);
    cfg.shuffle_test_labels = bool_of(s, "shuffle_test_labels", false);
    return cfg;
}

void require_output(const fs::path& p, bool force) {
    if (fs::exists(p) && !force) throw ConfigError(p.string() + " exists (use --force to overwrite)");
}

/// Runs `writer` on a temporary sibling, then renames it over `p`.
void write_atomic(const fs::path& p, const std::function<void(const fs::path&)>& writer) {
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    const fs::path tmp = p.string() + ".tmp";
    writer(tmp);
    fs::rename(tmp, p);
}

std::size_t shortest_recording(const std::vector<SignalRecording>& recs, const ExperimentConfig& cfg) {
    const auto sel = select_recordings(recs, cfg);
    if (sel.empty()) throw ConfigError("no recordings match the sensor / activity filter");
    std::size_t n = std::numeric_limits<std::size_t>::max();
    for (const auto& r : sel) n = std::min(n, r.size());
    return n;
}

// ---- synth ------------------------------------------------------------------------------

int cmd_synth(const Command& c) {
    const auto s = c.settings();
    const auto spec = [&] {
        auto sp = synthetic_spec(s);
        sp.include_lacc = bool_of(s, "lacc", true);
        return sp;
    }();
    if (!has(s, "out")) throw ConfigError("synth needs --out DIR");
    const fs::path out = one(s, "out");
    if (fs::exists(out) && !(fs::is_directory(out) && fs::is_empty(out)) && !c.force())
        throw ConfigError(out.string() + " exists (use --force to overwrite)");

    const auto recs = generate_synthetic_dataset(spec);
    const fs::path tmp = out.string() + ".tmp";
    fs::remove_all(tmp);
    save_custom_tree(recs, tmp);
    fs::remove_all(out);
    if (out.has_parent_path()) fs::create_directories(out.parent_path());
    fs::rename(tmp, out);
    std::cout << "wrote " << recs.size() << " recordings (" << spec.users << " users, " << spec.sessions
              << " sessions) to " << out.string() << '\n';
    return 0;
}

// ---- extract ----------------------------------------------------------------------------

int cmd_extract(const Command& c) {
    const auto s = c.settings();
    if (!has(s, "out")) throw ConfigError("extract needs --out FILE");
    const fs::path out = one(s, "out");
    require_output(out, c.force());
    auto cfg = base_config(s);
    cfg.sensor = parse_sensor_filter(one(s, "sensor", "ALL"));
    cfg.sub_activity = parse_activity_filter(one(s, "activity", "ALL"));
    cfg.window_size = size_of(s, "window_size", cfg.window_size);
    cfg.validate();

    const auto recs = load_dataset(s, false);
    if (shortest_recording(recs, cfg) < cfg.window_size)
        throw ConfigError("window size " + std::to_string(cfg.window_size) + " exceeds the shortest recording");
    const auto selected = select_recordings(recs, cfg);
    auto [fm, secs] = timed([&] {
        return extract_features(selected, cfg.window_size, cfg.overlap, cfg.filter_order, resolve_threads(cfg.threads));
    });
    write_atomic(out, [&](const fs::path& p) { write_feature_csv(fm, p); });
    std::cout << fm.rows() << " windows x " << fm.cols() << " features from " << selected.size() << " recordings in "
              << secs << " s -> " << out.string() << '\n';
    return 0;
}

// ---- reduce -----------------------------------------------------------------------------

int cmd_reduce(const Command& c) {
    const auto s = c.settings();
    if (!has(s, "features")) throw ConfigError("reduce needs --features FILE");
    if (!has(s, "out") && !has(s, "save")) throw ConfigError("reduce needs --out and/or --save");
    if (has(s, "out")) require_output(one(s, "out"), c.force());
    if (has(s, "save")) require_output(one(s, "save"), c.force());
    const auto cfg = base_config(s);
    const auto method = parse_method(one(s, "method", "ESP"));
    const auto dim = size_of(s, "n_features", 30);
    if (method != Method::NONE && (dim < 1 || dim >= kFeatureCount))
        throw ConfigError("n_features must lie in [1, " + std::to_string(kFeatureCount - 1) + "]");

    const auto fm = read_feature_csv(one(s, "features"));
    if (method == Method::PCA && dim > static_cast<std::size_t>(fm.cols()))
        throw ConfigError("n_features exceeds the input dimension");
    auto [fit, secs] = timed([&] { return fit_reducer(fm.values, method, dim, cfg.esp); });

    if (has(s, "out")) {
        std::vector<std::string> cols;
        for (Eigen::Index k = 0; k < fit.train.cols(); ++k) cols.push_back("c" + std::to_string(k + 1));
        const auto projected = fm.with_values(fit.train, cols);
        write_atomic(one(s, "out"), [&](const fs::path& p) { write_feature_csv(projected, p); });
    }
    if (has(s, "save")) write_file_atomic(one(s, "save"), to_json(fit.reducer).dump(2) + "\n", true);
    std::cout << to_string(method) << " " << fm.cols() << " -> " << fit.train.cols() << " features on " << fm.rows()
              << " rows in " << secs << " s";
    if (fit.reducer.esp && !fit.reducer.esp->stress_trace.empty())
        std::cout << ", final stress " << fit.reducer.esp->stress_trace.back();
    std::cout << '\n';
    return 0;
}

// ---- train ------------------------------------------------------------------------------

std::vector<std::string> labels_for(const FeatureMatrix& fm, Target t) {
    if (t == Target::TWO_STAGE) throw ConfigError("train supports target SUBJECT or ACTIVITY");
    return target_labels(fm, t);
}

int cmd_train(const Command& c) {
    const auto s = c.settings();
    if (!has(s, "features")) throw ConfigError("train needs --features FILE");
    if (!has(s, "save")) throw ConfigError("train needs --save FILE");
    const fs::path save = one(s, "save");
    require_output(save, c.force());
    auto cfg = base_config(s);
    cfg.method = parse_method(one(s, "method", "NONE"));
    cfg.n_features = size_of(s, "n_features", cfg.n_features);
    cfg.validate();

    const auto fm = read_feature_csv(one(s, "features"));
    const auto labels = labels_for(fm, cfg.target);
    const auto fit = fit_reducer(fm.values, cfg.method, cfg.n_features, cfg.esp);
    KernelParams params = cfg.kernel;
    if (cfg.tuning.enabled) {
        const auto t = tune_kernel(fit.train, labels, cfg.tuning, cfg.kernel, cfg.seed);
        params = t.params;
        std::cout << "tuned a=" << params.a << " b=" << params.b << " C=" << params.C << " (cv accuracy " << t.fitness
                  << ")\n";
    }
    auto [model, secs] = timed([&] { return kelm_train(fit.train, labels, params); });
    const double acc = accuracy(kelm_predict(model, fit.train).labels, labels);
    const json doc{{"format", "gaitid.pipeline"},
                   {"version", kModelFormatVersion},
                   {"target", to_string(cfg.target)},
                   {"reducer", to_json(fit.reducer)},
                   {"kelm", to_json(model)}};
    write_file_atomic(save, doc.dump() + "\n", true);
    std::cout << model.classes.size() << " classes, " << fm.rows() << " rows, train accuracy " << acc << ", " << secs
              << " s -> " << save.string() << '\n';
    return 0;
}

// ---- evaluate ---------------------------------------------------------------------------

int evaluate_saved_model(const Command& c, const Settings& s) {
    if (!has(s, "features")) throw ConfigError("evaluate --model needs --features FILE");
    if (has(s, "out")) require_output(one(s, "out"), c.force());
    const auto doc = read_json_file(one(s, "model"));
    if (doc.value("format", std::string{}) != "gaitid.pipeline") throw ParseError("expected a gaitid.pipeline document", 1);
    const auto reducer = reducer_from_json(doc.at("reducer"));
    const auto model = kelm_from_json(doc.at("kelm"));
    const auto target = parse_target(doc.at("target").get<std::string>());
    const auto fm = read_feature_csv(one(s, "features"));
    const auto pred = kelm_predict(model, reducer.transform(fm.values));
    const double acc = accuracy(pred.labels, labels_for(fm, target));
    const json report{{"format", "gaitid.score"},
                      {"version", kModelFormatVersion},
                      {"target", to_string(target)},
                      {"n_rows", fm.rows()},
                      {"accuracy", acc}};
    if (has(s, "out")) write_file_atomic(one(s, "out"), report.dump(2) + "\n", true);
    std::cout << "accuracy " << acc << " on " << fm.rows() << " rows\n";
    return 0;
}

struct Experiment {
    std::string name;
    ExperimentConfig cfg;
};

/// Cartesian product of the sweep axes, in a fixed order.
std::vector<Experiment> expand_sweep(const Settings& s) {
    const auto base = base_config(s);
    std::vector<Experiment> out;
    std::set<std::string> seen;
    for (const auto& sensor : many(s, "sensor", {"ACC"}))
        for (const auto& act : many(s, "activity", {"ALL"}))
            for (const auto& w : many(s, "window_size", {"50"}))
                for (const auto& m : many(s, "method", {"ESP"}))
                    for (const auto& nf : many(s, "n_features", {"30"})) {
                        auto cfg = base;
                        cfg.sensor = parse_sensor_filter(sensor);
                        cfg.sub_activity = parse_activity_filter(act);
                        cfg.window_size = to_size(w, "window_size");
                        cfg.method = parse_method(m);
                        cfg.n_features = cfg.method == Method::NONE ? kFeatureCount : to_size(nf, "n_features");
                        cfg.validate();
                        std::ostringstream name;
                        name << to_string(cfg.method) << '-' << cfg.n_features << "_w" << cfg.window_size << '_'
                             << upper(sensor) << '_' << upper(act);
                        if (!seen.insert(name.str()).second) continue;  // NONE ignores n_features
                        out.push_back({name.str(), cfg});
                    }
    for (std::size_t i = 0; i < out.size(); ++i) {
        std::ostringstream n;
        n << std::setw(3) << std::setfill('0') << i << '_' << out[i].name;
        out[i].name = n.str();
    }
    return out;
}

int evaluate_sweep(const Command& c, const Settings& s) {
    if (!has(s, "out_dir")) throw ConfigError("evaluate needs --out-dir DIR");
    const fs::path dir = one(s, "out_dir");
    auto experiments = expand_sweep(s);
    const fs::path csv_path = dir / "results.csv";
    require_output(csv_path, c.force());
    for (const auto& e : experiments) require_output(dir / (e.name + ".json"), c.force());

    const auto recs = load_dataset(s, true);
    for (const auto& e : experiments)
        if (shortest_recording(recs, e.cfg) < e.cfg.window_size)
            throw ConfigError(e.name + ": window size exceeds the shortest selected recording");

    const std::size_t threads = resolve_threads(size_of(s, "threads", 0));
    const std::size_t outer = std::min(threads, experiments.size());
    for (auto& e : experiments) e.cfg.threads = outer > 1 ? 1 : threads;

    std::vector<std::optional<EvalReport>> reports(experiments.size());
    std::vector<std::string> errors(experiments.size());
    parallel_for(experiments.size(), outer, [&](std::size_t i) {
        try {
            reports[i] = run_experiment(recs, experiments[i].cfg);
        } catch (const std::exception& ex) {
            errors[i] = ex.what();
        }
    });

    std::string csv = "experiment," + csv_header() + "\n";
    bool failed = false;
    for (std::size_t i = 0; i < experiments.size(); ++i) {
        if (!reports[i]) {
            std::cerr << "gaitid: experiment " << experiments[i].name << " failed: " << errors[i] << '\n';
            failed = true;
            continue;
        }
        write_file_atomic(dir / (experiments[i].name + ".json"), to_json(*reports[i]).dump(2) + "\n", true);
        csv += experiments[i].name + "," + csv_row(*reports[i]) + "\n";
        std::cout << experiments[i].name << ": " << reports[i]->splits.size() << " splits, accuracy "
                  << reports[i]->mean_accuracy << " +- " << reports[i]->ci_halfwidth << '\n';
    }
    write_file_atomic(csv_path, csv, true);
    return failed ? 1 : 0;
}

int cmd_evaluate(const Command& c) {
    const auto s = c.settings();
    return has(s, "model") ? evaluate_saved_model(c, s) : evaluate_sweep(c, s);
}

// ---- benchmark --------------------------------------------------------------------------

int cmd_benchmark(const Command& c) {
    const auto s = c.settings();
    if (!has(s, "out")) throw ConfigError("benchmark needs --out FILE");
    const fs::path out = one(s, "out");
    require_output(out, c.force());
    auto base = base_config(s);
    base.sensor = parse_sensor_filter(one(s, "sensor", "ACC"));
    base.sub_activity = parse_activity_filter(one(s, "activity", "ALL"));
    base.method = parse_method(one(s, "method", "NONE"));
    base.n_features = size_of(s, "n_features", base.n_features);
    base.threads = 1;  // timings are single-threaded
    const std::size_t repeats = std::max<std::size_t>(1, size_of(s, "repeats", 1));
    std::vector<std::size_t> windows;
    for (const auto& w : many(s, "window_size", {"25", "50", "100", "200"})) windows.push_back(to_size(w, "window_size"));
    for (auto w : windows) {
        auto cfg = base;
        cfg.window_size = w;
        cfg.validate();
    }

    const auto recs = load_dataset(s, true);
    for (auto w : windows)
        if (shortest_recording(recs, base) < w) throw ConfigError("window size " + std::to_string(w) + " exceeds the shortest recording");

    json rows = json::array();
    std::cout << std::left << std::setw(8) << "window" << std::right << std::setw(10) << "windows" << std::setw(12)
              << "extract_s" << std::setw(14) << "projection_s" << std::setw(12) << "tuning_s" << std::setw(12)
              << "classify_s" << std::setw(10) << "accuracy" << '\n';
    for (auto w : windows) {
        auto cfg = base;
        cfg.window_size = w;
        EvalReport merged;
        double acc = 0.0;
        for (std::size_t r = 0; r < repeats; ++r) {
            auto rep = run_experiment(recs, cfg);
            merged.timings.merge(rep.timings);
            merged.n_windows = rep.n_windows;
            acc = rep.mean_accuracy;
        }
        json stages = json::object();
        for (const auto& [stage, t] : merged.timings.stages())
            stages[stage] = {{"total_s", t.total() / double(repeats)},
                             {"mean_s", t.mean()},
                             {"variance", t.variance()},
                             {"samples", t.seconds}};
        const double per = 1.0 / double(repeats);
        const double classify = classification_seconds(merged) * per;
        rows.push_back({{"window_size", w},
                        {"n_windows", merged.n_windows},
                        {"accuracy", acc},
                        {"classification_s", classify},
                        {"stages", stages}});
        std::cout << std::left << std::setw(8) << w << std::right << std::setw(10) << merged.n_windows << std::fixed
                  << std::setprecision(4) << std::setw(12) << stage_total(merged, kStageExtraction) * per
                  << std::setw(14) << stage_total(merged, kStageProjection) * per << std::setw(12)
                  << stage_total(merged, kStageTuning) * per << std::setw(12) << classify << std::setw(10) << acc
                  << std::defaultfloat << '\n';
    }
    json doc{{"format", "gaitid.benchmark"},
             {"version", kModelFormatVersion},
             {"method", to_string(base.method)},
             {"repeats", repeats},
             {"windows", rows}};
    write_file_atomic(out, doc.dump(2) + "\n", true);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"gaitid: gait-based legitimate user identification"};
    app.require_subcommand(1);

    Command synth(app, "synth", "Generate a synthetic CUSTOM_CSV dataset");
    synth.opt("users", "Number of users (>= 2)")
        .opt("sessions", "Sessions per user and pocket")
        .opt("duration", "Seconds per recording")
        .opt("rate", "Sample rate in Hz")
        .opt("lacc", "Also write gravity-free LACC recordings (true/false)")
        .opt("seed", "Generator seed")
        .opt("out", "Output directory");

    Command extract(app, "extract", "Filter, window and extract the 72 features to CSV");
    dataset_options(extract);
    extraction_options(extract);
    extract.opt("threads", "Worker threads (capped by GAITID_THREADS)").opt("out", "Output feature CSV");

    Command reduce(app, "reduce", "Fit a normalizer plus PCA or ESP on a feature CSV");
    reduce.opt("features", "Input feature CSV")
        .opt("method", "NONE | PCA | ESP")
        .opt("n_features", "Target dimension")
        .opt("anchors", "ESP anchor cap (0 = all rows)")
        .opt("out", "Projected feature CSV")
        .opt("save", "Reducer model JSON");

    Command train(app, "train", "Train a KELM pipeline on a feature CSV");
    train.opt("features", "Input feature CSV").opt("target", "SUBJECT | ACTIVITY").opt("save", "Model JSON");
    model_options(train);

    Command evaluate(app, "evaluate", "Run an experiment sweep, or score a saved model");
    dataset_options(evaluate);
    extraction_options(evaluate);
    model_options(evaluate);
    evaluate.opt("protocol", "KFOLD | LOSO | SESSION")
        .opt("folds", "Folds for KFOLD")
        .opt("target", "SUBJECT | ACTIVITY | TWO_STAGE")
        .opt("ci_level", "Confidence level")
        .opt("shuffle_test_labels", "Permute test labels (leakage check)")
        .opt("out_dir", "Directory for per-experiment JSON and results.csv")
        .opt("model", "Saved model from train")
        .opt("features", "Feature CSV scored with --model")
        .opt("out", "Score JSON for --model");

    Command bench(app, "benchmark", "Per-stage timings across window sizes");
    dataset_options(bench);
    extraction_options(bench);
    model_options(bench);
    bench.opt("protocol", "KFOLD | LOSO | SESSION")
        .opt("folds", "Folds for KFOLD")
        .opt("target", "SUBJECT | ACTIVITY | TWO_STAGE")
        .opt("repeats", "Timing repetitions per window size")
        .opt("out", "Benchmark JSON");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (synth.app()->parsed()) return cmd_synth(synth);
        if (extract.app()->parsed()) return cmd_extract(extract);
        if (reduce.app()->parsed()) return cmd_reduce(reduce);
        if (train.app()->parsed()) return cmd_train(train);
        if (evaluate.app()->parsed()) return cmd_evaluate(evaluate);
        if (bench.app()->parsed()) return cmd_benchmark(bench);
    } catch (const ConfigError& e) {
        std::cerr << "gaitid: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "gaitid: " << e.what() << '\n';
        return 1;
    }
    return 2;
}
