#pragma once

#include "memd/error.hpp"
#include "memd/signal.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace memd
{

/// One oscillation with a per-channel participation pattern.
struct ModeSpec
{
    double frequency = 0.0;
    /// 0 is sustained; the envelope is exp(-2 pi f zeta (t - onset)).
    double damping_ratio = 0.0;
    std::vector<double> amplitudes;
    std::vector<double> phases;
    double onset_time = 0.0;
};

struct StepEvent
{
    double time = 0.0;
    std::vector<double> magnitudes;
};

/// Ground truth for a synthetic multichannel record.
struct ScenarioSpec
{
    std::vector<std::string> channel_ids;
    std::vector<ModeSpec> modes;
    /// Per-channel polynomial coefficients in ascending powers of t / duration.
    /// Empty means no trend.
    std::vector<std::vector<double>> trend;
    /// Noise power relative to the mean mode power across channels.
    std::optional<double> noise_snr_db;
    /// Absolute noise standard deviation, for records without modes.
    std::optional<double> noise_std;
    /// Relative noise power per channel; normalized to mean 1. Empty means equal.
    std::vector<double> noise_channel_weights;
    /// One-pole low-pass cutoff applied to the noise before scaling.
    std::optional<double> noise_lowpass_hz;
    std::optional<StepEvent> step_event;
    double duration = 0.0;
    double sample_rate = 0.0;
    std::uint64_t seed = 0;

    std::size_t channel_count() const noexcept { return channel_ids.size(); }
    std::size_t sample_count() const noexcept
    {
        return static_cast<std::size_t>(std::llround(duration * sample_rate));
    }
};

namespace detail
{

inline void check_channels(std::size_t got, std::size_t n, const std::string& what)
{
    if (got != n)
        throw Error(ErrorCode::BadScenario,
                    what + " has " + std::to_string(got) + " entries for " + std::to_string(n) + " channels");
}

} // namespace detail

inline void validate(const ScenarioSpec& s)
{
    const std::size_t n = s.channel_count();
    if (n == 0)
        throw Error(ErrorCode::BadScenario, "scenario has no channels");
    if (!(s.sample_rate > 0.0) || !std::isfinite(s.sample_rate))
        throw Error(ErrorCode::BadScenario, "sample_rate must be positive");
    if (!(s.duration > 0.0) || !std::isfinite(s.duration) || s.sample_count() < kMinSamples)
        throw Error(ErrorCode::BadScenario, "duration * sample_rate must be at least 4 samples");
    for (const auto& m : s.modes) {
        if (!(m.frequency > 0.0) || !std::isfinite(m.frequency))
            throw Error(ErrorCode::BadScenario, "mode frequency must be positive");
        if (!std::isfinite(m.damping_ratio) || !std::isfinite(m.onset_time))
            throw Error(ErrorCode::BadScenario, "mode damping and onset must be finite");
        detail::check_channels(m.amplitudes.size(), n, "mode amplitudes");
        detail::check_channels(m.phases.size(), n, "mode phases");
        for (double a : m.amplitudes) {
            if (!(a >= 0.0) || !std::isfinite(a))
                throw Error(ErrorCode::BadScenario, "mode amplitudes must be non-negative");
        }
    }
    if (!s.trend.empty())
        detail::check_channels(s.trend.size(), n, "trend");
    if (s.noise_snr_db && s.noise_std)
        throw Error(ErrorCode::BadScenario, "give either noise_snr_db or noise_std, not both");
    if (s.noise_snr_db && (s.modes.empty() || !std::isfinite(*s.noise_snr_db)))
        throw Error(ErrorCode::BadScenario, "an SNR needs at least one mode to define signal power");
    if (s.noise_std && !(*s.noise_std >= 0.0))
        throw Error(ErrorCode::BadScenario, "noise_std must be non-negative");
    if (!s.noise_channel_weights.empty()) {
        detail::check_channels(s.noise_channel_weights.size(), n, "noise_channel_weights");
        double total = 0.0;
        for (double w : s.noise_channel_weights) {
            if (!(w >= 0.0))
                throw Error(ErrorCode::BadScenario, "noise weights must be non-negative");
            total += w;
        }
        if (!(total > 0.0))
            throw Error(ErrorCode::BadScenario, "noise weights sum to zero");
    }
    if (s.noise_lowpass_hz && !(*s.noise_lowpass_hz > 0.0))
        throw Error(ErrorCode::BadScenario, "noise_lowpass_hz must be positive");
    if (s.step_event)
        detail::check_channels(s.step_event->magnitudes.size(), n, "step magnitudes");
}

/// Sum of all modes in channel n at time t.
inline double mode_value(const ScenarioSpec& s, std::size_t n, double t)
{
    double v = 0.0;
    for (const auto& m : s.modes) {
        if (t < m.onset_time)
            continue;
        const double tau = t - m.onset_time;
        const double env = std::exp(-2.0 * std::numbers::pi * m.frequency * m.damping_ratio * tau);
        v += m.amplitudes[n] * env * std::sin(2.0 * std::numbers::pi * m.frequency * tau + m.phases[n]);
    }
    return v;
}

inline double trend_value(const ScenarioSpec& s, std::size_t n, double t)
{
    if (s.trend.empty())
        return 0.0;
    const double x = t / s.duration;
    double v = 0.0;
    const auto& c = s.trend[n];
    for (std::size_t k = c.size(); k-- > 0;)
        v = v * x + c[k];
    return v;
}

struct GeneratedRecord
{
    MultichannelRecord record;
    ScenarioSpec ground_truth;
};

/// Synthesizes the record described by `scenario`. Deterministic in the seed.
inline GeneratedRecord generate(const ScenarioSpec& scenario)
{
    validate(scenario);
    const std::size_t n = scenario.channel_count();
    const std::size_t len = scenario.sample_count();
    const double dt = 1.0 / scenario.sample_rate;

    std::vector<std::vector<double>> modes(n, std::vector<double>(len));
    double mode_power = 0.0;
    for (std::size_t c = 0; c < n; ++c) {
        for (std::size_t i = 0; i < len; ++i) {
            const double v = mode_value(scenario, c, static_cast<double>(i) * dt);
            modes[c][i] = v;
            mode_power += v * v;
        }
    }
    mode_power /= static_cast<double>(n * len);

    double sigma = 0.0;
    if (scenario.noise_snr_db)
        sigma = std::sqrt(mode_power / std::pow(10.0, *scenario.noise_snr_db / 10.0));
    else if (scenario.noise_std)
        sigma = *scenario.noise_std;

    std::vector<double> weights(n, 1.0);
    if (!scenario.noise_channel_weights.empty()) {
        double mean = 0.0;
        for (double w : scenario.noise_channel_weights)
            mean += w;
        mean /= static_cast<double>(n);
        for (std::size_t c = 0; c < n; ++c)
            weights[c] = scenario.noise_channel_weights[c] / mean;
    }

    // One-pole smoother y = alpha y + (1 - alpha) x, rescaled to unit variance.
    double alpha = 0.0;
    if (scenario.noise_lowpass_hz)
        alpha = std::exp(-2.0 * std::numbers::pi * *scenario.noise_lowpass_hz * dt);
    const double lowpass_gain = std::sqrt((1.0 - alpha) / (1.0 + alpha));

    std::mt19937_64 rng(scenario.seed);
    std::normal_distribution<double> gauss(0.0, 1.0);

    std::vector<std::vector<double>> out(n, std::vector<double>(len));
    for (std::size_t c = 0; c < n; ++c) {
        const double scale = sigma * std::sqrt(weights[c]);
        double state = 0.0;
        bool primed = false;
        for (std::size_t i = 0; i < len; ++i) {
            const double t = static_cast<double>(i) * dt;
            double v = modes[c][i] + trend_value(scenario, c, t);
            if (scenario.step_event && t >= scenario.step_event->time)
                v += scenario.step_event->magnitudes[c];
            if (sigma > 0.0) {
                double e = gauss(rng);
                if (scenario.noise_lowpass_hz) {
                    // Start from the stationary distribution.
                    state = primed ? alpha * state + (1.0 - alpha) * e : e * lowpass_gain;
                    primed = true;
                    e = state / lowpass_gain;
                }
                v += scale * e;
            }
            out[c][i] = v;
        }
    }
    return GeneratedRecord{build_record(out, scenario.sample_rate, scenario.channel_ids), scenario};
}

/// Frequency from the spacing of zero crossings after mean removal:
/// (crossings - 1) / (2 * span between first and last crossing).
inline double oracle_zero_crossing_frequency(std::span<const double> x, double sample_rate)
{
    double mean = 0.0;
    for (double v : x)
        mean += v;
    mean /= static_cast<double>(x.size());
    std::vector<double> crossings;
    for (std::size_t i = 1; i < x.size(); ++i) {
        const double a = x[i - 1] - mean;
        const double b = x[i] - mean;
        if ((a >= 0.0) != (b >= 0.0))
            crossings.push_back(static_cast<double>(i - 1) + a / (a - b));
    }
    if (crossings.size() < 4)
        throw Error(ErrorCode::TooFewCrossings, "need at least 4 zero crossings, found " +
                                                    std::to_string(crossings.size()));
    const double span = (crossings.back() - crossings.front()) / sample_rate;
    return static_cast<double>(crossings.size() - 1) / (2.0 * span);
}

inline double oracle_zero_crossing_frequency(const TimeSeries& series)
{
    return oracle_zero_crossing_frequency(series.samples(), series.sample_rate());
}

struct RecoveredMode
{
    std::size_t truth_index = 0;
    double truth_frequency = 0.0;
    bool missed = true;
    /// Position in the candidate list (1-based) when matched.
    std::size_t rank = 0;
    double candidate_frequency = std::numeric_limits<double>::quiet_NaN();
    double frequency_error = std::numeric_limits<double>::quiet_NaN();
};

/// Greedy nearest-frequency matching: the globally closest unmatched
/// (truth, candidate) pair is matched first.
inline std::vector<RecoveredMode> recovery_report(const std::vector<double>& truth_frequencies,
                                                  const std::vector<double>& candidate_frequencies)
{
    std::vector<RecoveredMode> out(truth_frequencies.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i].truth_index = i;
        out[i].truth_frequency = truth_frequencies[i];
    }
    std::vector<bool> taken(candidate_frequencies.size(), false);
    for (;;) {
        double best = std::numeric_limits<double>::infinity();
        std::size_t bi = 0, bj = 0;
        for (std::size_t i = 0; i < out.size(); ++i) {
            if (!out[i].missed)
                continue;
            for (std::size_t j = 0; j < candidate_frequencies.size(); ++j) {
                if (taken[j] || !std::isfinite(candidate_frequencies[j]))
                    continue;
                const double d = std::abs(candidate_frequencies[j] - truth_frequencies[i]);
                if (d < best) {
                    best = d;
                    bi = i;
                    bj = j;
                }
            }
        }
        if (!std::isfinite(best))
            break;
        taken[bj] = true;
        out[bi].missed = false;
        out[bi].rank = bj + 1;
        out[bi].candidate_frequency = candidate_frequencies[bj];
        out[bi].frequency_error = candidate_frequencies[bj] - truth_frequencies[bi];
    }
    return out;
}

inline std::vector<double> mode_frequencies(const ScenarioSpec& s)
{
    std::vector<double> f;
    for (const auto& m : s.modes)
        f.push_back(m.frequency);
    return f;
}

/// Three channels, 300 s at 10 samples/s: shared 0.30 Hz and 0.15 Hz modes
/// with dispersed phases, a 1.0 Hz oscillation in the first channel only, a
/// common slow drift, and 15 dB noise concentrated in the third channel.
inline ScenarioSpec european_scenario(std::uint64_t seed = 1)
{
    ScenarioSpec s;
    s.channel_ids = {"north", "central", "south"};
    s.duration = 300.0;
    s.sample_rate = 10.0;
    s.seed = seed;
    s.modes.push_back({0.30, 0.0, {1.0, 0.8, 0.2}, {0.0, 2.2, 4.0}, 0.0});
    s.modes.push_back({0.15, 0.0, {0.8, 1.0, 1.0}, {0.0, 1.5, 3.6}, 0.0});
    s.modes.push_back({1.00, 0.0, {0.5, 0.0, 0.0}, {0.0, 0.0, 0.0}, 0.0});
    s.trend = {{0.0, 6.0, -6.0, 1.5}, {0.0, 5.0, -5.0, 1.2}, {0.0, 5.5, -5.5, 1.4}};
    s.noise_snr_db = 15.0;
    s.noise_channel_weights = {0.5, 0.5, 2.0};
    return s;
}

/// Twelve channels, 300 s at 10 samples/s: a sustained 0.20 Hz inter-area
/// mode (two coherent groups in rough antiphase), the same mode re-excited
/// with damping by a step event at 125 s, and noise.
inline ScenarioSpec ei_scenario(std::uint64_t seed = 2)
{
    ScenarioSpec s;
    s.duration = 300.0;
    s.sample_rate = 10.0;
    s.seed = seed;
    const std::size_t n = 12;
    std::vector<double> amp = {1.0, 0.9, 0.8, 0.7, 0.6, 0.5, 0.9, 1.0, 0.7, 0.6, 0.25, 0.2};
    std::vector<double> phase = {0.0, 0.2, 0.35, 0.5, 0.1, 0.6, 3.0, 3.3, 2.8, 3.5, 2.6, 3.9};
    std::vector<double> event_amp(n), step(n);
    for (std::size_t c = 0; c < n; ++c) {
        s.channel_ids.push_back("fdr" + std::to_string(c + 1));
        event_amp[c] = 2.0 * amp[c];
        step[c] = -1.5 - 0.05 * static_cast<double>(c);
    }
    s.modes.push_back({0.20, 0.0, amp, phase, 0.0});
    s.modes.push_back({0.20, 0.03, event_amp, phase, 125.0});
    s.step_event = StepEvent{125.0, step};
    s.noise_snr_db = 0.0;
    return s;
}

} // namespace memd
