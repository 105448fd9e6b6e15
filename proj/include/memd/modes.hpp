#pragma once

#include "memd/error.hpp"
#include "memd/fft.hpp"
#include "memd/hilbert.hpp"
#include "memd/signal.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace memd
{

enum class ModeClass
{
    Noise,
    LocalMode,
    InterAreaCandidate,
    Trend,
};

constexpr std::string_view to_string(ModeClass c)
{
    switch (c) {
    case ModeClass::Noise: return "Noise";
    case ModeClass::LocalMode: return "LocalMode";
    case ModeClass::InterAreaCandidate: return "InterAreaCandidate";
    case ModeClass::Trend: return "Trend";
    }
    return "Unknown";
}

/// Operational thresholds for separating trends, noise and local oscillations
/// from inter-area candidates.
struct ClassifierThresholds
{
    double trend_frequency_hz = 0.05;
    double trend_circular_variance = 0.1;
    double local_share = 0.8;
    double noise_frequency_hz = 2.0;
    /// Mean pairwise phase coherence below which a multichannel IMF is noise.
    double min_coherence = 0.5;
    /// Central fraction of the record used for medians and means.
    double interior_fraction = 0.8;
};

struct CompassEntry
{
    std::string channel_id;
    double amplitude = 0.0;
    /// Circular mean of (channel phase - reference channel phase), radians in (-pi, pi].
    double phase = 0.0;
};

struct ModeCandidate
{
    std::size_t imf_index = 0;
    double energy = 0.0;
    double median_joint_frequency = std::numeric_limits<double>::quiet_NaN();
    double mean_joint_amplitude = 0.0;
    ModeClass classification = ModeClass::Noise;
    std::vector<CompassEntry> per_channel;

    double phase_circular_variance = 0.0;
    double max_channel_share = 0.0;
    std::size_t dominant_channel = 0;
    double coherence = 1.0;
    std::size_t undefined_frequency_samples = 0;
    std::size_t negative_frequency_samples = 0;
};

/// sum_t sum_n imf[t][n]^2
inline double imf_energy(std::size_t imf_index, const ImfSet& set)
{
    double e = 0.0;
    for (const auto& s : set.imf_channels(imf_index)) {
        for (double v : s.samples())
            e += v * v;
    }
    return e;
}

namespace detail
{

inline double median(std::vector<double> v)
{
    if (v.empty())
        return std::numeric_limits<double>::quiet_NaN();
    const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
    std::nth_element(v.begin(), mid, v.end());
    if (v.size() % 2 == 1)
        return *mid;
    const double hi = *mid;
    const double lo = *std::max_element(v.begin(), mid);
    return 0.5 * (lo + hi);
}

/// 1 - mean resultant length of unit phasors at `angles`.
inline double circular_variance(std::span<const double> angles)
{
    if (angles.empty())
        return 0.0;
    std::complex<double> acc(0.0, 0.0);
    for (double a : angles)
        acc += std::polar(1.0, a);
    return 1.0 - std::abs(acc) / static_cast<double>(angles.size());
}

inline SampleRange window_samples(const ImfSet& set, double t_begin, double t_end)
{
    const double rate = set.sample_rate();
    const double lo = std::ceil((t_begin - set.t0()) * rate - 1e-9);
    const double hi = std::ceil((t_end - set.t0()) * rate - 1e-9);
    const auto clamp = [&](double v) {
        return static_cast<std::size_t>(std::clamp(v, 0.0, static_cast<double>(set.length())));
    };
    SampleRange r{clamp(lo), clamp(hi)};
    if (r.last <= r.first)
        throw Error(ErrorCode::EmptyWindow, "compass window contains no samples");
    return r;
}

inline std::vector<CompassEntry> compass_over(const ImfSet& set, const ImfTraces& traces, SampleRange r,
                                              std::size_t reference = 0)
{
    std::vector<CompassEntry> out;
    const auto& ref = traces.channels.at(reference);
    for (std::size_t n = 0; n < traces.channels.size(); ++n) {
        const auto& c = traces.channels[n];
        double amp = 0.0;
        std::complex<double> acc(0.0, 0.0);
        for (std::size_t t = r.first; t < r.last; ++t) {
            amp += c.amplitude[t];
            if (c.amplitude[t] > c.amplitude_floor && ref.amplitude[t] > ref.amplitude_floor)
                acc += std::polar(1.0, c.phase[t] - ref.phase[t]);
        }
        CompassEntry e;
        e.channel_id = set.channel_ids()[n];
        e.amplitude = amp / static_cast<double>(r.size());
        e.phase = std::abs(acc) > 0.0 ? std::arg(acc) : 0.0;
        out.push_back(std::move(e));
    }
    return out;
}

/// Mean over channel pairs of |sum z_a conj(z_b)| / sum |z_a| |z_b|.
inline double pairwise_coherence(const ImfTraces& traces, SampleRange r)
{
    const auto& ch = traces.channels;
    if (ch.size() < 2)
        return 1.0;
    double total = 0.0;
    std::size_t pairs = 0;
    for (std::size_t a = 0; a < ch.size(); ++a) {
        for (std::size_t b = a + 1; b < ch.size(); ++b) {
            std::complex<double> cross(0.0, 0.0);
            double norm = 0.0;
            for (std::size_t t = r.first; t < r.last; ++t) {
                const auto za = std::polar(ch[a].amplitude[t], ch[a].phase[t]);
                const auto zb = std::polar(ch[b].amplitude[t], ch[b].phase[t]);
                cross += za * std::conj(zb);
                norm += ch[a].amplitude[t] * ch[b].amplitude[t];
            }
            total += norm > 0.0 ? std::abs(cross) / norm : 0.0;
            ++pairs;
        }
    }
    return total / static_cast<double>(pairs);
}

} // namespace detail

/// Per-channel mean analytic amplitude and phase relative to the first
/// channel over [t_begin, t_end) seconds.
inline std::vector<CompassEntry> mode_compass(std::size_t imf_index, const ImfSet& set, const ImfTraces& traces,
                                              double t_begin, double t_end)
{
    if (imf_index >= set.imf_count())
        throw Error(ErrorCode::IndexOutOfRange, "IMF index " + std::to_string(imf_index) + " out of range");
    return detail::compass_over(set, traces, detail::window_samples(set, t_begin, t_end));
}

/// Trend, local, noise and inter-area rules applied in that order. The
/// phase-spread, single-channel-share and coherence tests need at least two
/// channels.
inline ModeClass classify_trend(const ModeCandidate& c, std::size_t channel_count, const ClassifierThresholds& th = {})
{
    const bool multichannel = channel_count > 1;
    const double f = c.median_joint_frequency;
    if (std::isnan(f) || f < th.trend_frequency_hz)
        return ModeClass::Trend;
    if (multichannel && c.phase_circular_variance < th.trend_circular_variance)
        return ModeClass::Trend;
    if (multichannel && c.max_channel_share > th.local_share)
        return ModeClass::LocalMode;
    if (f > th.noise_frequency_hz)
        return ModeClass::Noise;
    if (multichannel && c.coherence < th.min_coherence)
        return ModeClass::Noise;
    return ModeClass::InterAreaCandidate;
}

/// Energy, joint statistics, compass and classification of IMF `imf_index`.
inline ModeCandidate describe_imf(std::size_t imf_index, const ImfSet& set, const ImfTraces& traces,
                                  const ClassifierThresholds& th = {})
{
    ModeCandidate c;
    c.imf_index = imf_index;
    c.energy = imf_energy(imf_index, set);
    const auto r = interior(set.length(), th.interior_fraction);

    std::vector<double> freqs;
    freqs.reserve(r.size());
    double amp = 0.0;
    for (std::size_t t = r.first; t < r.last; ++t) {
        const double f = traces.joint.joint_frequency[t];
        amp += traces.joint.joint_amplitude[t];
        if (std::isnan(f)) {
            ++c.undefined_frequency_samples;
            continue;
        }
        if (f < 0.0)
            ++c.negative_frequency_samples;
        freqs.push_back(f);
    }
    c.median_joint_frequency = detail::median(std::move(freqs));
    c.mean_joint_amplitude = amp / static_cast<double>(r.size());

    c.per_channel = detail::compass_over(set, traces, r);
    std::vector<double> phases;
    for (const auto& e : c.per_channel)
        phases.push_back(e.phase);
    c.phase_circular_variance = detail::circular_variance(phases);

    double total = 0.0, top = 0.0;
    const auto& chans = set.imf_channels(imf_index);
    for (std::size_t n = 0; n < chans.size(); ++n) {
        double e = 0.0;
        for (double v : chans[n].samples())
            e += v * v;
        total += e;
        if (e > top) {
            top = e;
            c.dominant_channel = n;
        }
    }
    c.max_channel_share = total > 0.0 ? top / total : 0.0;
    c.coherence = detail::pairwise_coherence(traces, r);
    c.classification = classify_trend(c, set.channel_count(), th);
    return c;
}

struct RankedModes
{
    /// Non-trend, non-noise candidates by descending energy.
    std::vector<ModeCandidate> ranked;
    /// Trend and noise IMFs in index order.
    std::vector<ModeCandidate> excluded;

    /// The first `n` ranked candidates of class `c`.
    std::vector<ModeCandidate> top(ModeClass c, std::size_t n) const
    {
        std::vector<ModeCandidate> out;
        for (const auto& m : ranked) {
            if (m.classification == c && out.size() < n)
                out.push_back(m);
        }
        return out;
    }
};

/// Classifies every IMF and ranks the oscillatory ones by energy; ties go to
/// the lower (faster) IMF index.
inline RankedModes rank_modes(const ImfSet& set, const std::vector<ImfTraces>& traces,
                              const ClassifierThresholds& th = {})
{
    if (traces.size() != set.imf_count())
        throw Error(ErrorCode::LengthMismatch, "one trace set per IMF is required");
    RankedModes out;
    for (std::size_t m = 0; m < set.imf_count(); ++m) {
        auto c = describe_imf(m, set, traces[m], th);
        if (c.classification == ModeClass::Trend || c.classification == ModeClass::Noise)
            out.excluded.push_back(std::move(c));
        else
            out.ranked.push_back(std::move(c));
    }
    std::stable_sort(out.ranked.begin(), out.ranked.end(), [](const ModeCandidate& a, const ModeCandidate& b) {
        if (a.energy != b.energy)
            return a.energy > b.energy;
        return a.imf_index < b.imf_index;
    });
    return out;
}

enum class SpectrumWindow
{
    Rectangular,
    Hann,
};

struct SpectrumOptions
{
    SpectrumWindow window = SpectrumWindow::Rectangular;
    bool remove_mean = true;
};

struct AmplitudeSpectrum
{
    std::vector<double> frequencies;
    std::vector<double> amplitudes;
};

/// Single-sided amplitude spectrum: |X_k| scaled by 2/sum(w), by 1/sum(w) at
/// DC and Nyquist. The rectangular window gives the usual 2/T.
inline AmplitudeSpectrum fft_amplitude_spectrum(std::span<const double> x, double sample_rate,
                                                const SpectrumOptions& options = {})
{
    if (x.size() < kMinSamples)
        throw Error(ErrorCode::TooShort, "spectrum needs at least 4 samples");
    const std::size_t n = x.size();
    std::vector<double> buf(x.begin(), x.end());
    if (options.remove_mean) {
        double mean = 0.0;
        for (double v : buf)
            mean += v;
        mean /= static_cast<double>(n);
        for (double& v : buf)
            v -= mean;
    }
    double wsum = static_cast<double>(n);
    if (options.window == SpectrumWindow::Hann) {
        wsum = 0.0;
        for (std::size_t t = 0; t < n; ++t) {
            const double w = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(t) / static_cast<double>(n));
            buf[t] *= w;
            wsum += w;
        }
    }
    const auto spec = fft::forward_real(buf);
    AmplitudeSpectrum out;
    out.frequencies.resize(spec.size());
    out.amplitudes.resize(spec.size());
    for (std::size_t k = 0; k < spec.size(); ++k) {
        const bool edge = k == 0 || (n % 2 == 0 && k == n / 2);
        out.frequencies[k] = static_cast<double>(k) * sample_rate / static_cast<double>(n);
        out.amplitudes[k] = (edge ? 1.0 : 2.0) * std::abs(spec[k]) / wsum;
    }
    return out;
}

inline AmplitudeSpectrum fft_amplitude_spectrum(const TimeSeries& series, const SpectrumOptions& options = {})
{
    return fft_amplitude_spectrum(series.samples(), series.sample_rate(), options);
}

struct SpectralCrest
{
    std::size_t bin = 0;
    double frequency = 0.0;
    double amplitude = 0.0;
    /// Crest amplitude over the median amplitude in the searched band.
    double prominence = 0.0;
};

/// Largest spectral amplitude with frequency in [f_lo, f_hi].
inline SpectralCrest spectral_crest(const AmplitudeSpectrum& s, double f_lo, double f_hi)
{
    SpectralCrest best;
    std::vector<double> band;
    bool found = false;
    for (std::size_t k = 0; k < s.frequencies.size(); ++k) {
        if (s.frequencies[k] < f_lo || s.frequencies[k] > f_hi)
            continue;
        band.push_back(s.amplitudes[k]);
        if (!found || s.amplitudes[k] > best.amplitude) {
            best = {k, s.frequencies[k], s.amplitudes[k], 0.0};
            found = true;
        }
    }
    if (!found)
        throw Error(ErrorCode::EmptyWindow, "no spectral bins inside the search band");
    const double med = detail::median(std::move(band));
    best.prominence = med > 0.0 ? best.amplitude / med : std::numeric_limits<double>::infinity();
    return best;
}

/// Bin-wise mean of several spectra on the same frequency grid.
inline AmplitudeSpectrum pooled_spectrum(std::span<const AmplitudeSpectrum> spectra)
{
    if (spectra.empty())
        throw Error(ErrorCode::WrongChannelCount, "nothing to pool");
    AmplitudeSpectrum out{spectra.front().frequencies, std::vector<double>(spectra.front().amplitudes.size(), 0.0)};
    for (const auto& s : spectra) {
        for (std::size_t k = 0; k < out.amplitudes.size(); ++k)
            out.amplitudes[k] += s.amplitudes[k];
    }
    for (double& a : out.amplitudes)
        a /= static_cast<double>(spectra.size());
    return out;
}

} // namespace memd
