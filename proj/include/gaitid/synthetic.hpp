#pragma once

// Deterministic stand-in for private pocket recordings: each user walks with a personal
// cadence and harmonic signature, sessions jitter around it, and each pocket re-orients the
// body axes into the phone frame.

#include "gaitid/core.hpp"
#include "gaitid/signal_io.hpp"

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string>
#include <vector>

namespace gaitid {

struct SyntheticSpec {
    std::size_t users = 4;
    std::size_t sessions = 8;
    double duration_s = 60.0;
    double sample_rate_hz = 50.0;
    std::uint64_t seed = 7;
    bool include_lacc = true;

    void validate() const {
        if (users < 2) throw InvalidParameterError("synthetic data needs at least 2 users");
        if (sessions < 1) throw InvalidParameterError("synthetic data needs at least 1 session");
        if (!(duration_s > 0.0) || !(sample_rate_hz > 0.0))
            throw InvalidParameterError("duration and sample rate must be positive");
    }
};

inline constexpr std::size_t kGaitHarmonics = 4;
inline constexpr double kNoisePhi = 0.3;

// Session-to-session variation of one user's walk (relative std, radians).
inline constexpr double kSessionCadenceJitter = 0.03;
inline constexpr double kSessionAmplitudeJitter = 0.10;
inline constexpr double kSessionPhaseJitter = 0.2;
/// Per-axis std of the phone's placement tilt within a pocket.
inline constexpr double kSessionTiltRad = 0.15;

struct UserGait {
    double step_hz = 1.9;
    /// Body-frame amplitude (m/s^2) and phase of harmonic h of the stride frequency.
    std::array<std::array<double, kGaitHarmonics>, 3> amplitude{};
    std::array<std::array<double, kGaitHarmonics>, 3> phase{};
    double noise_std = 0.3;
};

/// Phone-frame axis k reads body axis perm[k] with sign sign[k]. Body axis 0 is vertical.
struct PocketOrientation {
    std::array<int, 3> perm;
    std::array<double, 3> sign;
};

inline PocketOrientation pocket_orientation(SubActivity pocket) {
    switch (pocket) {
        case SubActivity::BLP: return {{1, 0, 2}, {1.0, -1.0, 1.0}};
        case SubActivity::BRP: return {{1, 0, 2}, {-1.0, -1.0, -1.0}};
        case SubActivity::FLP: return {{0, 2, 1}, {1.0, 1.0, -1.0}};
        case SubActivity::FRP: return {{0, 2, 1}, {-1.0, 1.0, 1.0}};
        case SubActivity::GENERIC: break;
    }
    return {{0, 1, 2}, {1.0, 1.0, 1.0}};
}

using Rotation = std::array<std::array<double, 3>, 3>;

/// Rz(gamma) * Ry(beta) * Rx(alpha).
inline Rotation small_rotation(double alpha, double beta, double gamma) {
    const double ca = std::cos(alpha), sa = std::sin(alpha);
    const double cb = std::cos(beta), sb = std::sin(beta);
    const double cg = std::cos(gamma), sg = std::sin(gamma);
    return {{{cg * cb, cg * sb * sa - sg * ca, cg * sb * ca + sg * sa},
             {sg * cb, sg * sb * sa + cg * ca, sg * sb * ca - cg * sa},
             {-sb, cb * sa, cb * ca}}};
}

namespace detail {

inline std::mt19937_64 seeded(std::uint64_t seed, std::initializer_list<std::uint32_t> tags) {
    std::vector<std::uint32_t> v{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
    v.insert(v.end(), tags.begin(), tags.end());
    std::seed_seq seq(v.begin(), v.end());
    return std::mt19937_64(seq);
}

}  // namespace detail

inline UserGait draw_user_gait(std::uint64_t seed, std::size_t user) {
    auto rng = detail::seeded(seed, {0x75u, static_cast<std::uint32_t>(user)});
    std::uniform_real_distribution<double> u(0.0, 1.0);
    UserGait g;
    g.step_hz = 1.6 + 0.6 * u(rng);
    // Vertical motion is dominated by the step (second stride harmonic), the lateral axis
    // by the stride itself.
    const std::array<std::array<double, kGaitHarmonics>, 3> base{{
        {0.6, 2.4, 0.5, 0.9},
        {1.2, 0.7, 0.5, 0.3},
        {0.5, 1.4, 0.4, 0.4},
    }};
    for (int k = 0; k < 3; ++k)
        for (std::size_t h = 0; h < kGaitHarmonics; ++h) {
            g.amplitude[k][h] = base[k][h] * (0.4 + 1.2 * u(rng));
            g.phase[k][h] = 2.0 * std::numbers::pi * u(rng);
        }
    g.noise_std = 0.15 + 0.25 * u(rng);
    return g;
}

inline std::string synthetic_subject_id(std::size_t user) {
    std::string s = std::to_string(user + 1);
    return "u" + std::string(s.size() < 2 ? 2 - s.size() : 0, '0') + s;
}

inline std::string synthetic_session_id(std::size_t session) {
    std::string s = std::to_string(session + 1);
    return "s" + std::string(s.size() < 2 ? 2 - s.size() : 0, '0') + s;
}

/// Recordings for every (user, session, pocket, sensor), ordered user-major.
inline std::vector<SignalRecording> generate_synthetic_dataset(const SyntheticSpec& spec) {
    spec.validate();
    const auto n = static_cast<std::size_t>(std::llround(spec.duration_s * spec.sample_rate_hz));
    if (n == 0) throw InvalidParameterError("synthetic recording would be empty");
    std::vector<SignalRecording> out;
    const double dt = 1.0 / spec.sample_rate_hz;
    for (std::size_t u = 0; u < spec.users; ++u) {
        const auto gait = draw_user_gait(spec.seed, u);
        for (std::size_t s = 0; s < spec.sessions; ++s) {
            for (std::size_t pi = 0; pi < kPockets.size(); ++pi) {
                const auto pocket = kPockets[pi];
                auto rng = detail::seeded(spec.seed, {0x5eu, static_cast<std::uint32_t>(u),
                                                      static_cast<std::uint32_t>(s), static_cast<std::uint32_t>(pi)});
                std::normal_distribution<double> z(0.0, 1.0);
                const double step_hz = gait.step_hz * (1.0 + kSessionCadenceJitter * z(rng));
                const double stride_hz = 0.5 * step_hz;
                const double amp_scale = 1.0 + kSessionAmplitudeJitter * z(rng);
                std::array<std::array<double, kGaitHarmonics>, 3> phase = gait.phase;
                for (auto& axis : phase)
                    for (auto& ph : axis) ph += kSessionPhaseJitter * z(rng);
                const auto orient = pocket_orientation(pocket);
                const auto tilt = small_rotation(kSessionTiltRad * z(rng), kSessionTiltRad * z(rng),
                                                 kSessionTiltRad * z(rng));

                std::vector<std::array<double, 3>> body(n);
                for (std::size_t t = 0; t < n; ++t) {
                    const double time = static_cast<double>(t) * dt;
                    for (int k = 0; k < 3; ++k) {
                        double v = 0.0;
                        for (std::size_t h = 0; h < kGaitHarmonics; ++h)
                            v += gait.amplitude[k][h] *
                                 std::sin(2.0 * std::numbers::pi * stride_hz * static_cast<double>(h + 1) * time +
                                          phase[k][h]);
                        body[t][k] = amp_scale * v;
                    }
                }

                std::array<Sensor, 2> sensors{Sensor::ACC, Sensor::LACC};
                const std::size_t n_sensors = spec.include_lacc ? 2 : 1;
                for (std::size_t si = 0; si < n_sensors; ++si) {
                    const double innov_std = gait.noise_std * std::sqrt(1.0 - kNoisePhi * kNoisePhi);
                    std::array<double, 3> noise{0.0, 0.0, 0.0};
                    for (auto& e : noise) e = gait.noise_std * z(rng);
                    SignalRecording rec;
                    rec.subject_id = synthetic_subject_id(u);
                    rec.sensor = sensors[si];
                    rec.sub_activity = pocket;
                    rec.session = synthetic_session_id(s);
                    rec.sample_rate_hz = spec.sample_rate_hz;
                    rec.samples.resize(n);
                    const double gravity = sensors[si] == Sensor::ACC ? kGravity : 0.0;
                    for (std::size_t t = 0; t < n; ++t) {
                        for (int k = 0; k < 3; ++k) {
                            noise[k] = kNoisePhi * noise[k] + innov_std * z(rng);
                            const int b = orient.perm[k];
                            double body_v = 0.0;
                            for (int c = 0; c < 3; ++c)
                                body_v += tilt[b][c] * (body[t][c] + (c == 0 ? gravity : 0.0));
                            rec.samples[t][k] = orient.sign[k] * body_v + noise[k];
                        }
                    }
                    out.push_back(std::move(rec));
                }
            }
        }
    }
    return out;
}

}  // namespace gaitid
