#pragma once

#include "memd/envelope.hpp"
#include "memd/error.hpp"
#include "memd/signal.hpp"

#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <vector>

namespace memd
{

/// Normalized squared deviation between two successive sifting results:
/// sum_t |curr[t] - prev[t]|^2 / (prev[t]^2 + epsilon).
inline double sd_criterion(std::span<const double> prev, std::span<const double> curr, double epsilon)
{
    if (prev.size() != curr.size())
        throw Error(ErrorCode::LengthMismatch, "sd_criterion needs equal lengths");
    double sd = 0.0;
    for (std::size_t t = 0; t < prev.size(); ++t) {
        const double d = curr[t] - prev[t];
        const double den = prev[t] * prev[t] + epsilon;
        if (d == 0.0)
            continue;
        sd += den > 0.0 ? d * d / den : std::numeric_limits<double>::infinity();
    }
    return sd;
}

inline double sd_criterion(const TimeSeries& prev, const TimeSeries& curr, double epsilon)
{
    return sd_criterion(prev.samples(), curr.samples(), epsilon);
}

/// Guard added to the denominator of the SD criterion for a signal of the given RMS.
inline double sd_epsilon(double rms)
{
    return std::max(1e-12 * rms * rms, std::numeric_limits<double>::min());
}

struct SiftResult
{
    std::vector<double> imf;
    bool exhausted = false;
    int iterations = 0;
    double last_sd = 0.0;
};

namespace detail
{

/// Sifts `x` into one IMF. Empty optional when `x` lacks the extrema for even
/// one envelope mean.
inline std::optional<SiftResult> sift_univariate(std::span<const double> x, const DecompositionConfig& config,
                                                 EnvelopeWorkspace& ws)
{
    const double eps = sd_epsilon(rms(x));
    SiftResult result;
    result.imf.assign(x.begin(), x.end());
    std::vector<double> mean, next(x.size());
    for (int it = 1; it <= config.max_sift_iterations; ++it) {
        if (!envelope_mean(result.imf, config.n_mirror, mean, ws)) {
            if (it == 1)
                return std::nullopt;
            return result;
        }
        for (std::size_t t = 0; t < next.size(); ++t)
            next[t] = result.imf[t] - mean[t];
        result.last_sd = sd_criterion(result.imf, next, eps);
        result.imf.swap(next);
        result.iterations = it;
        if (result.last_sd <= config.sd_threshold)
            return result;
    }
    result.exhausted = true;
    return result;
}

} // namespace detail

/// One sifting step: series minus its envelope mean.
inline TimeSeries sift_once(const TimeSeries& series, const DecompositionConfig& config)
{
    const auto mean = envelope_mean_univariate(series, config);
    std::vector<double> out(series.size());
    for (std::size_t t = 0; t < out.size(); ++t)
        out[t] = series[t] - mean.values[t];
    return TimeSeries(std::move(out), series.sample_rate(), series.t0());
}

/// Repeats sift_once until the SD criterion drops to the threshold or the
/// iteration cap is hit (`exhausted`).
inline SiftResult sift_to_imf(const TimeSeries& series, const DecompositionConfig& config)
{
    detail::EnvelopeWorkspace ws;
    auto result = detail::sift_univariate(series.samples(), config, ws);
    if (!result)
        throw Error(ErrorCode::InsufficientExtrema, "series is monotonic or has too few extrema to sift");
    return std::move(*result);
}

/// Univariate EMD of one channel.
inline ImfSet emd_decompose(const TimeSeries& series, const DecompositionConfig& config = {},
                            std::string channel_id = "ch1")
{
    config.validate(1);
    detail::EnvelopeWorkspace ws;
    std::vector<double> residue = series.vector();
    std::vector<std::vector<TimeSeries>> imfs;
    std::vector<ImfDiagnostics> diagnostics;
    while (static_cast<int>(imfs.size()) < config.max_imfs) {
        auto sifted = detail::sift_univariate(residue, config, ws);
        if (!sifted)
            break;
        for (std::size_t t = 0; t < residue.size(); ++t)
            residue[t] -= sifted->imf[t];
        diagnostics.push_back({sifted->iterations, sifted->exhausted, sifted->last_sd, 0, 0});
        imfs.push_back({TimeSeries(std::move(sifted->imf), series.sample_rate(), series.t0())});
    }
    return ImfSet(std::move(imfs), {TimeSeries(std::move(residue), series.sample_rate(), series.t0())},
                  {std::move(channel_id)}, std::move(diagnostics));
}

} // namespace memd
