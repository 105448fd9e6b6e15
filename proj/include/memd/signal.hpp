#pragma once

#include "memd/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstddef>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace memd
{

/// Minimum number of samples any channel may carry.
inline constexpr std::size_t kMinSamples = 4;

/// One uniformly sampled real-valued channel.
///
/// Immutable after construction. The constructor enforces the invariants:
/// at least kMinSamples samples, all finite, sample_rate > 0.
class TimeSeries
{
public:
    TimeSeries(std::vector<double> samples, double sample_rate, double t0 = 0.0)
        : samples_(std::move(samples)), sample_rate_(sample_rate), t0_(t0)
    {
        if (!(sample_rate_ > 0.0) || !std::isfinite(sample_rate_))
            throw Error(ErrorCode::RateInvalid, "sample rate must be positive and finite");
        if (samples_.size() < kMinSamples)
            throw Error(ErrorCode::TooShort, "a series needs at least 4 samples, got " +
                                                 std::to_string(samples_.size()));
        for (std::size_t i = 0; i < samples_.size(); ++i) {
            if (!std::isfinite(samples_[i]))
                throw Error(ErrorCode::NonFinite, "non-finite sample at index " + std::to_string(i));
        }
    }

    std::span<const double> samples() const noexcept { return samples_; }
    std::size_t size() const noexcept { return samples_.size(); }
    double operator[](std::size_t i) const noexcept { return samples_[i]; }
    double sample_rate() const noexcept { return sample_rate_; }
    double dt() const noexcept { return 1.0 / sample_rate_; }
    double t0() const noexcept { return t0_; }
    double time_at(std::size_t i) const noexcept { return t0_ + static_cast<double>(i) / sample_rate_; }

    const std::vector<double>& vector() const noexcept { return samples_; }

    friend bool operator==(const TimeSeries&, const TimeSeries&) = default;

private:
    std::vector<double> samples_;
    double sample_rate_;
    double t0_;
};

/// N time-aligned channels sharing one time base.
class MultichannelRecord
{
public:
    MultichannelRecord(std::vector<TimeSeries> channels, std::vector<std::string> ids)
        : channels_(std::move(channels)), ids_(std::move(ids))
    {
        if (channels_.empty())
            throw Error(ErrorCode::WrongChannelCount, "a record needs at least one channel");
        if (ids_.empty()) {
            for (std::size_t n = 0; n < channels_.size(); ++n)
                ids_.push_back("ch" + std::to_string(n + 1));
        }
        if (ids_.size() != channels_.size())
            throw Error(ErrorCode::LengthMismatch, "channel id count does not match channel count");
        const auto& first = channels_.front();
        for (std::size_t n = 1; n < channels_.size(); ++n) {
            if (channels_[n].size() != first.size())
                throw Error(ErrorCode::LengthMismatch,
                            "channel " + ids_[n] + " has " + std::to_string(channels_[n].size()) +
                                " samples, expected " + std::to_string(first.size()));
            if (channels_[n].sample_rate() != first.sample_rate())
                throw Error(ErrorCode::RateInvalid, "channel " + ids_[n] + " has a different sample rate");
        }
    }

    std::size_t channel_count() const noexcept { return channels_.size(); }
    std::size_t length() const noexcept { return channels_.front().size(); }
    double sample_rate() const noexcept { return channels_.front().sample_rate(); }
    double t0() const noexcept { return channels_.front().t0(); }
    const TimeSeries& channel(std::size_t n) const { return channels_.at(n); }
    const std::vector<TimeSeries>& channels() const noexcept { return channels_; }
    const std::vector<std::string>& ids() const noexcept { return ids_; }

    /// Samples [first, last) of every channel as a new record.
    MultichannelRecord slice(std::size_t first, std::size_t last) const
    {
        if (first >= last || last > length())
            throw Error(ErrorCode::EmptyWindow, "slice bounds out of range");
        std::vector<TimeSeries> out;
        out.reserve(channels_.size());
        for (const auto& ch : channels_) {
            std::vector<double> s(ch.vector().begin() + static_cast<std::ptrdiff_t>(first),
                                  ch.vector().begin() + static_cast<std::ptrdiff_t>(last));
            out.emplace_back(std::move(s), ch.sample_rate(), ch.time_at(first));
        }
        return MultichannelRecord(std::move(out), ids_);
    }

    friend bool operator==(const MultichannelRecord&, const MultichannelRecord&) = default;

private:
    std::vector<TimeSeries> channels_;
    std::vector<std::string> ids_;
};

/// Validating constructor from raw channel sequences.
inline MultichannelRecord build_record(const std::vector<std::vector<double>>& channels, double sample_rate,
                                       std::vector<std::string> ids = {}, double t0 = 0.0)
{
    if (!(sample_rate > 0.0) || !std::isfinite(sample_rate))
        throw Error(ErrorCode::RateInvalid, "sample rate must be positive and finite");
    if (channels.empty())
        throw Error(ErrorCode::WrongChannelCount, "no channels supplied");
    for (std::size_t n = 1; n < channels.size(); ++n) {
        if (channels[n].size() != channels[0].size())
            throw Error(ErrorCode::LengthMismatch, "channel " + std::to_string(n + 1) + " has " +
                                                       std::to_string(channels[n].size()) + " samples, expected " +
                                                       std::to_string(channels[0].size()));
    }
    std::vector<TimeSeries> series;
    series.reserve(channels.size());
    for (const auto& c : channels)
        series.emplace_back(c, sample_rate, t0);
    return MultichannelRecord(std::move(series), std::move(ids));
}

enum class BoundaryPolicy
{
    MirrorExtrema,
};

enum class DirectionScheme
{
    UniformAngles2D,
    LowDiscrepancySphere,
    SphericalGrid3D,
};

/// How the per-direction envelopes are combined into the multivariate mean.
enum class MeanNormalization
{
    /// (1/K) * sum of the K direction envelopes.
    Average,
    /// (2/K) * sum, the back-projection factor of the complex-valued bivariate procedure.
    BackProjection2D,
};

struct DecompositionConfig
{
    double sd_threshold = 0.2;
    /// 0 selects max(64, 8N).
    int direction_count = 0;
    int max_sift_iterations = 100;
    int max_imfs = 16;
    BoundaryPolicy boundary_policy = BoundaryPolicy::MirrorExtrema;
    int n_mirror = 2;
    std::uint64_t rng_seed = 0;
    DirectionScheme direction_scheme = DirectionScheme::LowDiscrepancySphere;
    MeanNormalization mean_normalization = MeanNormalization::Average;

    int directions_for(std::size_t n_channels) const
    {
        if (direction_count > 0)
            return direction_count;
        return std::max(64, 8 * static_cast<int>(n_channels));
    }

    void validate(std::size_t n_channels) const
    {
        if (!(sd_threshold > 0.0) || !std::isfinite(sd_threshold))
            throw Error(ErrorCode::BadConfig, "sd_threshold must be positive");
        if (direction_count < 0)
            throw Error(ErrorCode::BadConfig, "direction_count must be positive");
        if (n_channels > 1 && directions_for(n_channels) < 2 * static_cast<int>(n_channels))
            throw Error(ErrorCode::TooFewDirections, "direction_count must be at least 2N");
        if (max_sift_iterations < 1)
            throw Error(ErrorCode::BadConfig, "max_sift_iterations must be positive");
        if (max_imfs < 1)
            throw Error(ErrorCode::BadConfig, "max_imfs must be positive");
        if (n_mirror < 1)
            throw Error(ErrorCode::BadConfig, "n_mirror must be positive");
    }
};

/// Per-IMF bookkeeping produced by the sifting loops.
struct ImfDiagnostics
{
    int sift_iterations = 0;
    bool exhausted = false;
    double last_sd = 0.0;
    /// Largest number of directions skipped as degenerate in any sifting pass.
    int max_degenerate_directions = 0;
    int direction_count = 0;
};

/// M x N stack of IMFs plus one residue per channel.
class ImfSet
{
public:
    /// `imfs[m][n]` is IMF m of channel n.
    ImfSet(std::vector<std::vector<TimeSeries>> imfs, std::vector<TimeSeries> residue,
           std::vector<std::string> channel_ids, std::vector<ImfDiagnostics> diagnostics = {})
        : imfs_(std::move(imfs)), residue_(std::move(residue)), ids_(std::move(channel_ids)),
          diagnostics_(std::move(diagnostics))
    {
        if (residue_.empty())
            throw Error(ErrorCode::WrongChannelCount, "an IMF set needs at least one channel");
        if (ids_.size() != residue_.size())
            throw Error(ErrorCode::LengthMismatch, "channel id count does not match residue count");
        for (const auto& r : residue_) {
            if (r.size() != residue_.front().size() || r.sample_rate() != residue_.front().sample_rate())
                throw Error(ErrorCode::LengthMismatch, "residue channels are not aligned");
        }
        for (const auto& row : imfs_) {
            if (row.size() != residue_.size())
                throw Error(ErrorCode::LengthMismatch, "every IMF must cover every channel");
            for (const auto& s : row) {
                if (s.size() != length())
                    throw Error(ErrorCode::LengthMismatch, "IMF length differs from residue length");
            }
        }
        if (diagnostics_.empty())
            diagnostics_.resize(imfs_.size());
        if (diagnostics_.size() != imfs_.size())
            throw Error(ErrorCode::LengthMismatch, "diagnostics count does not match IMF count");
    }

    std::size_t imf_count() const noexcept { return imfs_.size(); }
    std::size_t channel_count() const noexcept { return residue_.size(); }
    std::size_t length() const noexcept { return residue_.front().size(); }
    double sample_rate() const noexcept { return residue_.front().sample_rate(); }
    double t0() const noexcept { return residue_.front().t0(); }

    const TimeSeries& imf(std::size_t m, std::size_t n) const
    {
        if (m >= imfs_.size() || n >= residue_.size())
            throw Error(ErrorCode::IndexOutOfRange, "IMF index out of range");
        return imfs_[m][n];
    }
    const std::vector<TimeSeries>& imf_channels(std::size_t m) const
    {
        if (m >= imfs_.size())
            throw Error(ErrorCode::IndexOutOfRange, "IMF index " + std::to_string(m) + " out of range");
        return imfs_[m];
    }
    const TimeSeries& residue(std::size_t n) const { return residue_.at(n); }
    const std::vector<TimeSeries>& residues() const noexcept { return residue_; }
    const std::vector<std::string>& channel_ids() const noexcept { return ids_; }
    const ImfDiagnostics& diagnostics(std::size_t m) const { return diagnostics_.at(m); }
    const std::vector<ImfDiagnostics>& diagnostics() const noexcept { return diagnostics_; }

    friend bool operator==(const ImfSet& a, const ImfSet& b)
    {
        return a.imfs_ == b.imfs_ && a.residue_ == b.residue_ && a.ids_ == b.ids_;
    }

private:
    std::vector<std::vector<TimeSeries>> imfs_;
    std::vector<TimeSeries> residue_;
    std::vector<std::string> ids_;
    std::vector<ImfDiagnostics> diagnostics_;
};

/// Sum of all IMFs plus residue, per channel.
inline MultichannelRecord reconstruct(const ImfSet& set)
{
    std::vector<TimeSeries> channels;
    channels.reserve(set.channel_count());
    for (std::size_t n = 0; n < set.channel_count(); ++n) {
        std::vector<double> acc(set.length(), 0.0);
        for (std::size_t m = 0; m < set.imf_count(); ++m) {
            const auto& s = set.imf(m, n).vector();
            for (std::size_t t = 0; t < acc.size(); ++t)
                acc[t] += s[t];
        }
        const auto& r = set.residue(n).vector();
        for (std::size_t t = 0; t < acc.size(); ++t)
            acc[t] += r[t];
        channels.emplace_back(std::move(acc), set.sample_rate(), set.t0());
    }
    return MultichannelRecord(std::move(channels), set.channel_ids());
}

namespace detail
{

inline double rms(std::span<const double> x)
{
    if (x.empty())
        return 0.0;
    double s = 0.0;
    for (double v : x)
        s += v * v;
    return std::sqrt(s / static_cast<double>(x.size()));
}

} // namespace detail

} // namespace memd
