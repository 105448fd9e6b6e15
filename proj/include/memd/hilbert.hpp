#pragma once

#include "memd/error.hpp"
#include "memd/fft.hpp"
#include "memd/signal.hpp"

#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <vector>

namespace memd
{

inline constexpr std::size_t kMinHilbertSamples = 8;

/// Samples [first, last) covering the central `fraction` of a record of
/// `length` samples.
struct SampleRange
{
    std::size_t first = 0;
    std::size_t last = 0;

    std::size_t size() const noexcept { return last - first; }
};

inline SampleRange interior(std::size_t length, double fraction = 0.8)
{
    const auto trim = static_cast<std::size_t>(std::floor(static_cast<double>(length) * (1.0 - fraction) / 2.0));
    return {trim, length - trim};
}

/// f + i H[f] by zeroing negative frequencies and doubling positive ones.
inline std::vector<std::complex<double>> analytic_signal(std::span<const double> x)
{
    if (x.size() < kMinHilbertSamples)
        throw Error(ErrorCode::TooShort, "Hilbert transform needs at least 8 samples, got " + std::to_string(x.size()));
    const std::size_t n = x.size();
    const auto half = fft::forward_real(x);
    std::vector<std::complex<double>> full(n, {0.0, 0.0});
    full[0] = half[0];
    const std::size_t positive_end = (n + 1) / 2;
    for (std::size_t k = 1; k < positive_end; ++k)
        full[k] = 2.0 * half[k];
    if (n % 2 == 0)
        full[n / 2] = half[n / 2];
    auto z = fft::inverse(std::move(full));
    // The real part is x up to rounding; keep it exact.
    for (std::size_t t = 0; t < n; ++t)
        z[t].real(x[t]);
    return z;
}

inline TimeSeries hilbert_transform(const TimeSeries& series)
{
    const auto z = analytic_signal(series.samples());
    std::vector<double> h(z.size());
    for (std::size_t t = 0; t < z.size(); ++t)
        h[t] = z[t].imag();
    return TimeSeries(std::move(h), series.sample_rate(), series.t0());
}

struct AnalyticOptions
{
    /// Samples whose amplitude is at or below this fraction of the channel
    /// RMS have undefined phase and frequency.
    double amplitude_floor = 1e-6;
    /// 5-point moving average of the instantaneous frequency.
    bool smooth_frequency = false;
};

/// Instantaneous amplitude, unwrapped phase and frequency of one channel.
/// Undefined frequency samples hold NaN.
struct AnalyticTrace
{
    std::vector<double> amplitude;
    std::vector<double> phase;
    std::vector<double> inst_frequency;
    std::vector<double> hilbert;
    double sample_rate = 0.0;
    double amplitude_floor = 0.0;

    bool defined(std::size_t t) const noexcept { return !std::isnan(inst_frequency[t]); }
};

namespace detail
{

/// Wraps an angle difference into (-pi, pi].
inline double wrap_angle(double d)
{
    d = std::remainder(d, 2.0 * std::numbers::pi);
    if (d <= -std::numbers::pi)
        d += 2.0 * std::numbers::pi;
    return d;
}

} // namespace detail

inline AnalyticTrace analytic_trace(std::span<const double> x, double sample_rate, const AnalyticOptions& options = {})
{
    const auto z = analytic_signal(x);
    const std::size_t n = x.size();
    AnalyticTrace tr;
    tr.sample_rate = sample_rate;
    tr.amplitude.resize(n);
    tr.phase.resize(n);
    tr.hilbert.resize(n);
    tr.inst_frequency.assign(n, std::numeric_limits<double>::quiet_NaN());
    tr.amplitude_floor = options.amplitude_floor * detail::rms(x);

    for (std::size_t t = 0; t < n; ++t) {
        tr.hilbert[t] = z[t].imag();
        tr.amplitude[t] = std::hypot(z[t].real(), z[t].imag());
        const double raw = std::atan2(z[t].imag(), z[t].real());
        tr.phase[t] = t == 0 ? raw : tr.phase[t - 1] + detail::wrap_angle(raw - tr.phase[t - 1]);
    }

    const double scale = sample_rate / (2.0 * std::numbers::pi);
    std::vector<double> freq(n);
    freq[0] = (tr.phase[1] - tr.phase[0]) * scale;
    freq[n - 1] = (tr.phase[n - 1] - tr.phase[n - 2]) * scale;
    for (std::size_t t = 1; t + 1 < n; ++t)
        freq[t] = (tr.phase[t + 1] - tr.phase[t - 1]) * 0.5 * scale;
    if (options.smooth_frequency) {
        std::vector<double> s(n);
        for (std::size_t t = 0; t < n; ++t) {
            const std::size_t lo = t >= 2 ? t - 2 : 0;
            const std::size_t hi = std::min(n - 1, t + 2);
            double acc = 0.0;
            for (std::size_t k = lo; k <= hi; ++k)
                acc += freq[k];
            s[t] = acc / static_cast<double>(hi - lo + 1);
        }
        freq.swap(s);
    }
    for (std::size_t t = 0; t < n; ++t) {
        if (tr.amplitude[t] > tr.amplitude_floor)
            tr.inst_frequency[t] = freq[t];
    }
    return tr;
}

inline AnalyticTrace analytic_trace(const TimeSeries& series, const AnalyticOptions& options = {})
{
    return analytic_trace(series.samples(), series.sample_rate(), options);
}

/// Cross-channel frequency and amplitude of one IMF: amplitude-weighted mean
/// of channel frequencies, plain mean of channel amplitudes. Undefined joint
/// frequency samples hold NaN.
struct JointModeTrace
{
    std::vector<double> joint_frequency;
    std::vector<double> joint_amplitude;
};

inline JointModeTrace joint_mode_trace(std::span<const AnalyticTrace> channels)
{
    if (channels.empty())
        throw Error(ErrorCode::WrongChannelCount, "joint trace needs at least one channel");
    const std::size_t n = channels.front().amplitude.size();
    double floor = 0.0;
    for (const auto& c : channels)
        floor += c.amplitude_floor;

    JointModeTrace out;
    out.joint_frequency.assign(n, std::numeric_limits<double>::quiet_NaN());
    out.joint_amplitude.assign(n, 0.0);
    const double inv_n = 1.0 / static_cast<double>(channels.size());
    for (std::size_t t = 0; t < n; ++t) {
        double amp_sum = 0.0;
        double weight = 0.0;
        double weighted = 0.0;
        double ref = std::numeric_limits<double>::quiet_NaN();
        for (const auto& c : channels) {
            const double a = c.amplitude[t];
            amp_sum += a;
            if (!c.defined(t))
                continue;
            // Deviations from the first defined channel keep identical
            // channels exact.
            if (std::isnan(ref))
                ref = c.inst_frequency[t];
            weight += a;
            weighted += a * (c.inst_frequency[t] - ref);
        }
        out.joint_amplitude[t] = amp_sum * inv_n;
        if (weight > floor && weight > 0.0)
            out.joint_frequency[t] = ref + weighted / weight;
    }
    return out;
}

/// Analytic traces of every channel of one IMF plus their joint trace.
struct ImfTraces
{
    std::vector<AnalyticTrace> channels;
    JointModeTrace joint;
};

inline ImfTraces imf_traces(const std::vector<TimeSeries>& imf_channels, const AnalyticOptions& options = {})
{
    ImfTraces out;
    out.channels.reserve(imf_channels.size());
    for (const auto& s : imf_channels)
        out.channels.push_back(analytic_trace(s, options));
    out.joint = joint_mode_trace(out.channels);
    return out;
}

inline JointModeTrace joint_mode_trace(std::size_t imf_index, const ImfSet& set, const AnalyticOptions& options = {})
{
    if (imf_index >= set.imf_count())
        throw Error(ErrorCode::IndexOutOfRange, "IMF index " + std::to_string(imf_index) + " out of range");
    return imf_traces(set.imf_channels(imf_index), options).joint;
}

inline std::vector<ImfTraces> all_imf_traces(const ImfSet& set, const AnalyticOptions& options = {})
{
    std::vector<ImfTraces> out;
    out.reserve(set.imf_count());
    for (std::size_t m = 0; m < set.imf_count(); ++m)
        out.push_back(imf_traces(set.imf_channels(m), options));
    return out;
}

struct HilbertPoint
{
    double time;
    double frequency;
    double amplitude;
};

struct HilbertSpectrumBand
{
    std::size_t imf_index;
    std::vector<HilbertPoint> points;
};

/// Time-frequency-amplitude samples of the joint traces of IMFs
/// [first, last). Samples with undefined joint frequency are omitted.
inline std::vector<HilbertSpectrumBand> hilbert_spectrum(const ImfSet& set, std::size_t first, std::size_t last,
                                                         const AnalyticOptions& options = {})
{
    std::vector<HilbertSpectrumBand> out;
    last = std::min(last, set.imf_count());
    for (std::size_t m = first; m < last; ++m) {
        const auto joint = joint_mode_trace(m, set, options);
        HilbertSpectrumBand band{m, {}};
        for (std::size_t t = 0; t < joint.joint_frequency.size(); ++t) {
            if (std::isnan(joint.joint_frequency[t]))
                continue;
            band.points.push_back({set.t0() + static_cast<double>(t) / set.sample_rate(), joint.joint_frequency[t],
                                   joint.joint_amplitude[t]});
        }
        out.push_back(std::move(band));
    }
    return out;
}

} // namespace memd
