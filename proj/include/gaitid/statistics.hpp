#pragma once

#include "gaitid/core.hpp"

#include <boost/math/distributions/students_t.hpp>

#include <chrono>
#include <cmath>
#include <map>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

namespace gaitid {

struct ConfidenceInterval {
    double mean = 0.0;
    double halfwidth = 0.0;
};

/// Upper quantile of Student's t with `dof` degrees of freedom.
inline double student_t_quantile(double p, double dof) {
    boost::math::students_t dist(dof);
    return boost::math::quantile(dist, p);
}

/// mean +- t_{(1+level)/2, n-1} * s / sqrt(n).
inline ConfidenceInterval confidence_interval(const std::vector<double>& values, double level = 0.99) {
    if (values.size() < 2) throw InvalidInputError("confidence interval needs at least 2 values");
    if (!(level > 0.0 && level < 1.0)) throw InvalidParameterError("confidence level must lie in (0, 1)");
    const double n = static_cast<double>(values.size());
    ConfidenceInterval ci;
    ci.mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
    double ss = 0.0;
    for (double v : values) ss += (v - ci.mean) * (v - ci.mean);
    const double s = std::sqrt(ss / (n - 1.0));
    ci.halfwidth = s == 0.0 ? 0.0 : student_t_quantile(0.5 * (1.0 + level), n - 1.0) * s / std::sqrt(n);
    return ci;
}

struct StageTiming {
    std::vector<double> seconds;

    double total() const { return std::accumulate(seconds.begin(), seconds.end(), 0.0); }
    double mean() const { return seconds.empty() ? 0.0 : total() / static_cast<double>(seconds.size()); }
    /// Sample variance of the repeated measurements; 0 with fewer than two.
    double variance() const {
        if (seconds.size() < 2) return 0.0;
        const double m = mean();
        double ss = 0.0;
        for (double s : seconds) ss += (s - m) * (s - m);
        return ss / static_cast<double>(seconds.size() - 1);
    }
};

/// Wall-clock stage timings keyed by stage name.
class StageTimer {
public:
    void record(const std::string& stage, double seconds) { stages_[stage].seconds.push_back(seconds); }

    void merge(const StageTimer& other) {
        for (const auto& [k, v] : other.stages_)
            stages_[k].seconds.insert(stages_[k].seconds.end(), v.seconds.begin(), v.seconds.end());
    }

    const std::map<std::string, StageTiming>& stages() const noexcept { return stages_; }
    bool has(const std::string& stage) const { return stages_.count(stage) != 0; }

private:
    std::map<std::string, StageTiming> stages_;
};

/// Runs `fn` and returns its result with the elapsed wall-clock seconds.
template <class Fn>
auto timed(Fn&& fn) {
    const auto t0 = std::chrono::steady_clock::now();
    if constexpr (std::is_void_v<decltype(fn())>) {
        fn();
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    } else {
        auto result = fn();
        const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        return std::pair<decltype(result), double>(std::move(result), s);
    }
}

/// Times `fn` under `stage` and records it in `timer`.
template <class Fn>
auto timed(StageTimer& timer, const std::string& stage, Fn&& fn) {
    if constexpr (std::is_void_v<decltype(fn())>) {
        const double s = timed(std::forward<Fn>(fn));
        timer.record(stage, s);
        return s;
    } else {
        auto [result, s] = timed(std::forward<Fn>(fn));
        timer.record(stage, s);
        return result;
    }
}

}  // namespace gaitid
