#pragma once

#include "memd/directions.hpp"
#include "memd/emd.hpp"
#include "memd/envelope.hpp"
#include "memd/error.hpp"
#include "memd/signal.hpp"

#include <algorithm>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace memd
{

struct ProjectionSeries
{
    std::vector<double> values;
    std::size_t direction_index = 0;
};

/// values[t] = sum_n direction[n] * channel_n[t].
inline ProjectionSeries project(const MultichannelRecord& record, std::span<const double> direction,
                                std::size_t direction_index = 0)
{
    if (direction.size() != record.channel_count())
        throw Error(ErrorCode::DimensionMismatch, "direction has " + std::to_string(direction.size()) +
                                                      " components for " + std::to_string(record.channel_count()) +
                                                      " channels");
    ProjectionSeries out{std::vector<double>(record.length(), 0.0), direction_index};
    for (std::size_t n = 0; n < record.channel_count(); ++n) {
        const double w = direction[n];
        const auto& x = record.channel(n).vector();
        for (std::size_t t = 0; t < out.values.size(); ++t)
            out.values[t] += w * x[t];
    }
    return out;
}

struct MultivariateMean
{
    /// channels[n][t]
    std::vector<std::vector<double>> channels;
    std::size_t used_directions = 0;
    std::size_t degenerate_directions = 0;
};

namespace detail
{

using Channels = std::vector<std::vector<double>>;

struct MultivariateWorkspace
{
    std::vector<double> interleaved, projection, positions, ordinates, mean;
    std::vector<std::size_t> maxima, source;
    SplineBasis basis;
};

inline void project_into(const Channels& x, std::span<const double> direction, std::vector<double>& out)
{
    out.assign(x.front().size(), 0.0);
    for (std::size_t n = 0; n < x.size(); ++n) {
        const double w = direction[n];
        const auto& c = x[n];
        for (std::size_t t = 0; t < out.size(); ++t)
            out[t] += w * c[t];
    }
}

/// Envelope mean over all directions whose projection has at least two
/// maxima. Each direction contributes one spline per channel through the
/// channel values at the projection's maxima. Directions are accumulated in
/// index order.
inline void envelope_mean_multivariate(const Channels& x, const DirectionSet& dirs, int n_mirror,
                                       MeanNormalization normalization, MultivariateMean& out,
                                       MultivariateWorkspace& ws)
{
    const std::size_t nch = x.size();
    const std::size_t len = x.front().size();
    ws.interleaved.resize(nch * len);
    for (std::size_t n = 0; n < nch; ++n) {
        for (std::size_t t = 0; t < len; ++t)
            ws.interleaved[t * nch + n] = x[n][t];
    }
    ws.mean.assign(nch * len, 0.0);
    ws.projection.resize(len);
    out.used_directions = 0;
    out.degenerate_directions = 0;
    for (std::size_t k = 0; k < dirs.count(); ++k) {
        const auto dir = dirs.direction(k);
        for (std::size_t t = 0; t < len; ++t) {
            const double* row = &ws.interleaved[t * nch];
            double acc = 0.0;
            for (std::size_t n = 0; n < nch; ++n)
                acc += dir[n] * row[n];
            ws.projection[t] = acc;
        }
        find_maxima(ws.projection, ws.maxima);
        if (ws.maxima.size() < 2) {
            ++out.degenerate_directions;
            continue;
        }
        ++out.used_directions;
        mirrored_knots(ws.maxima, len, n_mirror, ws.positions, ws.source);
        ws.basis.reset(ws.positions, len);
        ws.ordinates.resize(ws.source.size() * nch);
        for (std::size_t i = 0; i < ws.source.size(); ++i) {
            const double* row = &ws.interleaved[ws.source[i] * nch];
            std::copy(row, row + nch, &ws.ordinates[i * nch]);
        }
        ws.basis.accumulate_interleaved(ws.ordinates, nch, ws.mean);
    }
    out.channels.assign(nch, std::vector<double>(len, 0.0));
    if (out.used_directions == 0)
        return;
    const double factor = normalization == MeanNormalization::BackProjection2D ? 2.0 : 1.0;
    const double scale = factor / static_cast<double>(out.used_directions);
    for (std::size_t n = 0; n < nch; ++n) {
        for (std::size_t t = 0; t < len; ++t)
            out.channels[n][t] = ws.mean[t * nch + n] * scale;
    }
}

struct MultivariateSift
{
    Channels imf;
    bool exhausted = false;
    int iterations = 0;
    double last_sd = 0.0;
    int max_degenerate = 0;
};

inline std::optional<MultivariateSift> sift_multivariate(const Channels& x, const DirectionSet& dirs,
                                                         const DecompositionConfig& config,
                                                         MultivariateWorkspace& ws)
{
    const std::size_t nch = x.size();
    std::vector<double> eps(nch);
    for (std::size_t n = 0; n < nch; ++n)
        eps[n] = sd_epsilon(rms(x[n]));

    MultivariateSift result;
    result.imf = x;
    MultivariateMean mean;
    std::vector<double> next;
    for (int it = 1; it <= config.max_sift_iterations; ++it) {
        envelope_mean_multivariate(result.imf, dirs, config.n_mirror, config.mean_normalization, mean, ws);
        if (mean.used_directions == 0) {
            if (it == 1)
                return std::nullopt;
            return result;
        }
        result.max_degenerate = std::max(result.max_degenerate, static_cast<int>(mean.degenerate_directions));
        double sd = 0.0;
        for (std::size_t n = 0; n < nch; ++n) {
            auto& cur = result.imf[n];
            next.resize(cur.size());
            for (std::size_t t = 0; t < cur.size(); ++t)
                next[t] = cur[t] - mean.channels[n][t];
            sd += sd_criterion(cur, next, eps[n]);
            cur.swap(next);
        }
        result.last_sd = sd / static_cast<double>(nch);
        result.iterations = it;
        if (result.last_sd <= config.sd_threshold)
            return result;
    }
    result.exhausted = true;
    return result;
}

/// True while at least one projection of `x` still has three or more extrema.
inline bool has_oscillating_projection(const Channels& x, const DirectionSet& dirs, MultivariateWorkspace& ws)
{
    for (std::size_t k = 0; k < dirs.count(); ++k) {
        project_into(x, dirs.direction(k), ws.projection);
        if (count_extrema(ws.projection) >= 3)
            return true;
    }
    return false;
}

inline Channels channels_of(const MultichannelRecord& record)
{
    Channels x;
    x.reserve(record.channel_count());
    for (const auto& c : record.channels())
        x.push_back(c.vector());
    return x;
}

inline std::vector<TimeSeries> to_series(Channels&& x, const MultichannelRecord& like)
{
    std::vector<TimeSeries> out;
    out.reserve(x.size());
    for (auto& c : x)
        out.emplace_back(std::move(c), like.sample_rate(), like.t0());
    return out;
}

} // namespace detail

/// Mean of the K direction envelopes of `record`.
inline MultivariateMean multivariate_envelope_mean(const MultichannelRecord& record, const DirectionSet& directions,
                                                   const DecompositionConfig& config = {})
{
    if (directions.dimension() != record.channel_count())
        throw Error(ErrorCode::DimensionMismatch, "direction dimension does not match channel count");
    detail::MultivariateWorkspace ws;
    MultivariateMean out;
    detail::envelope_mean_multivariate(detail::channels_of(record), directions, config.n_mirror,
                                       config.mean_normalization, out, ws);
    if (out.used_directions == 0)
        throw Error(ErrorCode::AllDirectionsDegenerate, "every projection has fewer than two maxima");
    return out;
}

struct MultivariateSiftResult
{
    std::vector<TimeSeries> imf;
    bool exhausted = false;
    int iterations = 0;
    double last_sd = 0.0;
    int max_degenerate_directions = 0;
};

/// Sifts all channels jointly into one aligned IMF.
inline MultivariateSiftResult memd_sift_to_imf(const MultichannelRecord& record, const DirectionSet& directions,
                                               const DecompositionConfig& config = {})
{
    if (directions.dimension() != record.channel_count())
        throw Error(ErrorCode::DimensionMismatch, "direction dimension does not match channel count");
    detail::MultivariateWorkspace ws;
    auto sifted = detail::sift_multivariate(detail::channels_of(record), directions, config, ws);
    if (!sifted)
        throw Error(ErrorCode::AllDirectionsDegenerate, "every projection has fewer than two maxima");
    return MultivariateSiftResult{detail::to_series(std::move(sifted->imf), record), sifted->exhausted,
                                  sifted->iterations, sifted->last_sd, sifted->max_degenerate};
}

/// Multivariate EMD with an explicit direction set.
inline ImfSet memd_decompose(const MultichannelRecord& record, const DirectionSet& directions,
                             const DecompositionConfig& config)
{
    config.validate(record.channel_count());
    if (directions.dimension() != record.channel_count())
        throw Error(ErrorCode::DimensionMismatch, "direction dimension does not match channel count");

    detail::MultivariateWorkspace ws;
    detail::Channels residue = detail::channels_of(record);
    std::vector<std::vector<TimeSeries>> imfs;
    std::vector<ImfDiagnostics> diagnostics;
    while (static_cast<int>(imfs.size()) < config.max_imfs) {
        if (!detail::has_oscillating_projection(residue, directions, ws))
            break;
        auto sifted = detail::sift_multivariate(residue, directions, config, ws);
        if (!sifted)
            break;
        for (std::size_t n = 0; n < residue.size(); ++n) {
            for (std::size_t t = 0; t < residue[n].size(); ++t)
                residue[n][t] -= sifted->imf[n][t];
        }
        diagnostics.push_back({sifted->iterations, sifted->exhausted, sifted->last_sd, sifted->max_degenerate,
                               static_cast<int>(directions.count())});
        imfs.push_back(detail::to_series(std::move(sifted->imf), record));
    }
    return ImfSet(std::move(imfs), detail::to_series(std::move(residue), record), record.ids(),
                  std::move(diagnostics));
}

/// Multivariate EMD with the direction set selected by `config`. A single
/// channel is decomposed by univariate EMD.
inline ImfSet memd_decompose(const MultichannelRecord& record, const DecompositionConfig& config = {})
{
    if (record.channel_count() == 1)
        return emd_decompose(record.channel(0), config, record.ids().front());
    config.validate(record.channel_count());
    const auto dirs =
        generate_directions(record.channel_count(), static_cast<std::size_t>(config.directions_for(record.channel_count())),
                            config.direction_scheme, config.rng_seed);
    return memd_decompose(record, dirs, config);
}

/// Bivariate EMD: the 2-channel configuration with uniformly spaced angles.
inline ImfSet bemd_decompose(const MultichannelRecord& record, const DecompositionConfig& config = {})
{
    if (record.channel_count() != 2)
        throw Error(ErrorCode::WrongChannelCount, "bemd_decompose needs exactly 2 channels");
    auto cfg = config;
    cfg.direction_scheme = DirectionScheme::UniformAngles2D;
    return memd_decompose(record, cfg);
}

/// Trivariate EMD: the 3-channel configuration with a polar x azimuth grid.
inline ImfSet temd_decompose(const MultichannelRecord& record, const DecompositionConfig& config = {})
{
    if (record.channel_count() != 3)
        throw Error(ErrorCode::WrongChannelCount, "temd_decompose needs exactly 3 channels");
    auto cfg = config;
    cfg.direction_scheme = DirectionScheme::SphericalGrid3D;
    return memd_decompose(record, cfg);
}

} // namespace memd
