#pragma once

// Sample statistics and Box-Jenkins style estimators used by the per-window features.
// All model fits work on the de-meaned series and are invariant to positive rescaling.

#include "gaitid/core.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <vector>

namespace gaitid {

struct BasicStats {
    double mean = 0.0;
    double median = 0.0;
    double variance = 0.0;  // unbiased, n - 1
    double std = 0.0;
    double iqr = 0.0;
};

/// Linear-interpolation quantile of sorted data (h = (n - 1) p).
inline double quantile_sorted(std::span<const double> sorted, double p) {
    const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

inline BasicStats basic_stats(std::span<const double> x) {
    if (x.size() < 2) throw InvalidInputError("basic_stats needs at least 2 samples");
    const double n = static_cast<double>(x.size());
    BasicStats s;
    s.mean = std::accumulate(x.begin(), x.end(), 0.0) / n;
    double ss = 0.0;
    for (double v : x) ss += (v - s.mean) * (v - s.mean);
    s.variance = ss / (n - 1.0);
    s.std = std::sqrt(s.variance);
    std::vector<double> sorted(x.begin(), x.end());
    std::sort(sorted.begin(), sorted.end());
    s.median = quantile_sorted(sorted, 0.5);
    s.iqr = quantile_sorted(sorted, 0.75) - quantile_sorted(sorted, 0.25);
    return s;
}

/// Coefficient sequence plus the flag raised for constant (zero-variance) input.
struct CorrelationResult {
    std::vector<double> values;
    bool degenerate = false;
};

struct TimeSeriesFit {
    std::vector<double> ar;
    std::vector<double> ma;
    double noise_variance = 0.0;
    bool degenerate = false;
    /// Set when the series is shorter than the estimator's reliability threshold.
    bool reduced_reliability = false;
};

namespace detail {

inline std::vector<double> demeaned(std::span<const double> x) {
    const double m = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
    std::vector<double> out(x.size());
    std::transform(x.begin(), x.end(), out.begin(), [m](double v) { return v - m; });
    return out;
}

/// True when the centered sum of squares is indistinguishable from rounding noise.
inline bool is_flat(std::span<const double> x, std::span<const double> centered) {
    double scale = 0.0;
    for (double v : x) scale = std::max(scale, std::abs(v));
    if (scale == 0.0) return true;
    double ss = 0.0;
    for (double v : centered) ss += v * v;
    const double tol = 1e-12 * scale;
    return ss <= static_cast<double>(x.size()) * tol * tol;
}

/// Biased sample autocovariances gamma(0..max_lag) of an already centered series.
inline std::vector<double> autocovariance(std::span<const double> c, std::size_t max_lag) {
    const std::size_t n = c.size();
    std::vector<double> g(max_lag + 1, 0.0);
    for (std::size_t k = 0; k <= max_lag && k < n; ++k) {
        double s = 0.0;
        for (std::size_t t = k; t < n; ++t) s += c[t] * c[t - k];
        g[k] = s / static_cast<double>(n);
    }
    return g;
}

struct LevinsonResult {
    std::vector<double> phi;      // order-p prediction coefficients
    std::vector<double> reflect;  // partial autocorrelations 1..p
    double error_ratio = 1.0;     // v_p / gamma(0)
    bool singular = false;
};

/// Durbin-Levinson recursion on normalized autocorrelations r(0) = 1, r(1..p).
inline LevinsonResult durbin_levinson(std::span<const double> r, std::size_t p) {
    LevinsonResult out;
    out.phi.assign(p, 0.0);
    out.reflect.assign(p, 0.0);
    std::vector<double> prev(p, 0.0);
    double v = 1.0;
    for (std::size_t k = 1; k <= p; ++k) {
        double num = r[k];
        for (std::size_t j = 1; j < k; ++j) num -= prev[j - 1] * r[k - j];
        if (v <= 1e-14) {
            out.singular = true;
            std::fill(out.phi.begin(), out.phi.end(), 0.0);
            return out;
        }
        const double kk = num / v;
        out.reflect[k - 1] = kk;
        out.phi[k - 1] = kk;
        for (std::size_t j = 1; j < k; ++j) out.phi[j - 1] = prev[j - 1] - kk * prev[k - j - 1];
        v *= (1.0 - kk * kk);
        prev = out.phi;
    }
    out.error_ratio = v;
    if (v <= 1e-14) out.singular = true;
    return out;
}

}  // namespace detail

/// r(k) for k = 1..max_lag, normalized by the lag-0 sum of squares.
inline CorrelationResult autocorrelation(std::span<const double> x, std::size_t max_lag) {
    if (max_lag == 0 || max_lag >= x.size()) throw InvalidInputError("autocorrelation lag must be in [1, n)");
    CorrelationResult out;
    out.values.assign(max_lag, 0.0);
    const auto c = detail::demeaned(x);
    if (detail::is_flat(x, c)) {
        out.degenerate = true;
        return out;
    }
    const auto g = detail::autocovariance(c, max_lag);
    for (std::size_t k = 1; k <= max_lag; ++k) out.values[k - 1] = g[k] / g[0];
    return out;
}

/// Partial autocorrelations 1..max_lag via Durbin-Levinson on the sample autocorrelations.
inline CorrelationResult partial_autocorrelation(std::span<const double> x, std::size_t max_lag) {
    auto ac = autocorrelation(x, max_lag);
    CorrelationResult out;
    out.values.assign(max_lag, 0.0);
    if (ac.degenerate) {
        out.degenerate = true;
        return out;
    }
    std::vector<double> r(max_lag + 1);
    r[0] = 1.0;
    std::copy(ac.values.begin(), ac.values.end(), r.begin() + 1);
    const auto dl = detail::durbin_levinson(r, max_lag);
    out.values = dl.reflect;
    out.degenerate = dl.singular;
    return out;
}

/// Yule-Walker AR(p) estimate.
inline TimeSeriesFit fit_ar(std::span<const double> x, std::size_t p) {
    if (p == 0 || p >= x.size()) throw InvalidInputError("AR order must be in [1, n)");
    TimeSeriesFit fit;
    fit.ar.assign(p, 0.0);
    fit.reduced_reliability = x.size() <= 10 * p;
    const auto c = detail::demeaned(x);
    if (detail::is_flat(x, c)) {
        fit.degenerate = true;
        return fit;
    }
    const auto g = detail::autocovariance(c, p);
    std::vector<double> r(p + 1);
    for (std::size_t k = 0; k <= p; ++k) r[k] = g[k] / g[0];
    const auto dl = detail::durbin_levinson(r, p);
    if (dl.singular) {
        fit.degenerate = true;
        return fit;
    }
    fit.ar = dl.phi;
    fit.noise_variance = g[0] * dl.error_ratio;
    return fit;
}

/// Depth of the innovations recursion used for an MA(q) fit on n samples.
inline std::size_t innovations_depth(std::size_t n, std::size_t q) {
    return std::max(q, std::min<std::size_t>(20, n / 5));
}

/// MA(q) estimate from the innovations algorithm run to depth m, taking theta_{m,1..q}.
/// Sign convention: x_t = e_t + theta_1 e_{t-1} + ... + theta_q e_{t-q}.
inline TimeSeriesFit fit_ma(std::span<const double> x, std::size_t q) {
    if (q == 0 || q >= x.size()) throw InvalidInputError("MA order must be in [1, n)");
    TimeSeriesFit fit;
    fit.ma.assign(q, 0.0);
    const std::size_t n = x.size();
    const std::size_t m = std::min(innovations_depth(n, q), n - 1);
    fit.reduced_reliability = n <= 10 * q;
    const auto c = detail::demeaned(x);
    if (detail::is_flat(x, c)) {
        fit.degenerate = true;
        return fit;
    }
    const auto g = detail::autocovariance(c, m);

    // theta[i][j] holds theta_{i, j} for j = 1..i (index j - 1).
    std::vector<std::vector<double>> theta(m + 1);
    std::vector<double> v(m + 1, 0.0);
    v[0] = g[0];
    for (std::size_t i = 1; i <= m; ++i) {
        theta[i].assign(i, 0.0);
        for (std::size_t k = 0; k < i; ++k) {
            double s = g[i - k];
            for (std::size_t j = 0; j < k; ++j) s -= theta[k][k - j - 1] * theta[i][i - j - 1] * v[j];
            if (!(v[k] > 1e-14 * g[0])) {
                fit.degenerate = true;
                return fit;
            }
            theta[i][i - k - 1] = s / v[k];
        }
        double vi = g[0];
        for (std::size_t j = 0; j < i; ++j) vi -= theta[i][i - j - 1] * theta[i][i - j - 1] * v[j];
        v[i] = vi;
    }
    if (!(v[m] > 0.0)) {
        fit.degenerate = true;
        return fit;
    }
    for (std::size_t j = 0; j < q; ++j) fit.ma[j] = theta[m][j];
    fit.noise_variance = v[m];
    return fit;
}

/// Order of the long autoregression used as the first Hannan-Rissanen stage.
inline std::size_t long_ar_order(std::size_t n, std::size_t p, std::size_t q) {
    return std::max(p + q, std::min<std::size_t>(20, n / 10));
}

/// Two-stage Hannan-Rissanen ARMA(p, q): a long Yule-Walker AR supplies innovation
/// estimates, then x_t is regressed by least squares on its p lags and q lagged innovations.
inline TimeSeriesFit fit_arma(std::span<const double> x, std::size_t p, std::size_t q) {
    if (p + q == 0) throw InvalidInputError("ARMA needs p + q >= 1");
    TimeSeriesFit fit;
    fit.ar.assign(p, 0.0);
    fit.ma.assign(q, 0.0);
    const std::size_t n = x.size();
    const std::size_t L = long_ar_order(n, p, q);
    fit.reduced_reliability = n <= 10 * L || n <= 10 * (p + q);
    const auto c = detail::demeaned(x);
    if (detail::is_flat(x, c)) {
        fit.degenerate = true;
        return fit;
    }
    const std::size_t first = L + q;  // earliest t with all regressors defined
    const std::size_t cols = p + q;
    if (L >= n || first >= n || n - first <= cols) {
        fit.degenerate = true;
        return fit;
    }
    const auto pre = fit_ar(x, L);
    if (pre.degenerate) {
        fit.degenerate = true;
        return fit;
    }
    std::vector<double> e(n, 0.0);
    for (std::size_t t = L; t < n; ++t) {
        double pred = 0.0;
        for (std::size_t j = 0; j < L; ++j) pred += pre.ar[j] * c[t - j - 1];
        e[t] = c[t] - pred;
    }

    const std::size_t rows = n - first;
    Eigen::MatrixXd A(rows, cols);
    Eigen::VectorXd y(rows);
    for (std::size_t r = 0; r < rows; ++r) {
        const std::size_t t = first + r;
        for (std::size_t j = 0; j < p; ++j) A(r, j) = c[t - j - 1];
        for (std::size_t j = 0; j < q; ++j) A(r, p + j) = e[t - j - 1];
        y(r) = c[t];
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
    qr.setThreshold(1e-10);
    if (qr.rank() < static_cast<Eigen::Index>(cols)) {
        fit.degenerate = true;
        return fit;
    }
    const Eigen::VectorXd beta = qr.solve(y);
    for (std::size_t j = 0; j < p; ++j) fit.ar[j] = beta(j);
    for (std::size_t j = 0; j < q; ++j) fit.ma[j] = beta(p + j);
    fit.noise_variance = (y - A * beta).squaredNorm() / static_cast<double>(rows);
    return fit;
}

/// Mean squared Haar detail coefficient at each of the first `levels` levels. Odd-length
/// approximations are extended periodically (first sample appended).
inline std::vector<double> wavelet_energies(std::span<const double> x, std::size_t levels) {
    if (levels == 0) throw InvalidInputError("wavelet levels must be positive");
    if (levels >= 64 || x.size() < (std::size_t{1} << levels))
        throw InvalidInputError("sequence too short for " + std::to_string(levels) + " Haar levels");
    static const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    std::vector<double> approx(x.begin(), x.end());
    std::vector<double> out(levels, 0.0);
    for (std::size_t lv = 0; lv < levels; ++lv) {
        if (approx.size() % 2 == 1) approx.push_back(approx.front());
        const std::size_t half = approx.size() / 2;
        std::vector<double> next(half);
        double energy = 0.0;
        for (std::size_t k = 0; k < half; ++k) {
            const double a = approx[2 * k];
            const double b = approx[2 * k + 1];
            const double d = (a - b) * inv_sqrt2;
            next[k] = (a + b) * inv_sqrt2;
            energy += d * d;
        }
        out[lv] = energy / static_cast<double>(half);
        approx = std::move(next);
    }
    return out;
}

}  // namespace gaitid
