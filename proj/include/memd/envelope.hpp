#pragma once

#include "memd/error.hpp"
#include "memd/signal.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace memd
{

/// Sample position and value of a local extremum. Positions may be virtual
/// (negative or beyond the record) after boundary extension.
struct Extremum
{
    std::ptrdiff_t index;
    double value;

    friend bool operator==(const Extremum&, const Extremum&) = default;
};

struct ExtremaSet
{
    std::vector<Extremum> maxima;
    std::vector<Extremum> minima;

    bool empty() const noexcept { return maxima.empty() && minima.empty(); }
};

enum class PlateauPolicy
{
    /// A flat run bounded by lower (higher) neighbours yields one maximum
    /// (minimum) at the first index of the run.
    FirstOfPlateau,
};

struct EnvelopeCurve
{
    std::vector<double> values;
};

namespace detail
{

/// Scans interior extrema of `x`; endpoints and plateaus touching an endpoint
/// are never reported.
template <typename OnMax, typename OnMin>
void scan_extrema(std::span<const double> x, OnMax&& on_max, OnMin&& on_min)
{
    const std::size_t n = x.size();
    std::size_t i = 1;
    while (i + 1 < n) {
        if (x[i] == x[i - 1]) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j + 1 < n && x[j + 1] == x[i])
            ++j;
        if (j + 1 >= n)
            break;
        if (x[i] > x[i - 1] && x[j + 1] < x[i])
            on_max(i);
        else if (x[i] < x[i - 1] && x[j + 1] > x[i])
            on_min(i);
        i = j + 1;
    }
}

inline void find_maxima(std::span<const double> x, std::vector<std::size_t>& out)
{
    out.clear();
    scan_extrema(x, [&](std::size_t i) { out.push_back(i); }, [](std::size_t) {});
}

inline void find_maxima_minima(std::span<const double> x, std::vector<std::size_t>& maxima,
                               std::vector<std::size_t>& minima)
{
    maxima.clear();
    minima.clear();
    scan_extrema(x, [&](std::size_t i) { maxima.push_back(i); }, [&](std::size_t i) { minima.push_back(i); });
}

inline std::size_t count_extrema(std::span<const double> x)
{
    std::size_t count = 0;
    scan_extrema(x, [&](std::size_t) { ++count; }, [&](std::size_t) { ++count; });
    return count;
}

/// Knot positions for a list of extremum sample indices with `n_mirror`
/// reflections about each endpoint prepended/appended. `source` receives the
/// real sample index each knot takes its ordinate from.
inline void mirrored_knots(std::span<const std::size_t> extrema, std::size_t length, int n_mirror,
                           std::vector<double>& positions, std::vector<std::size_t>& source)
{
    positions.clear();
    source.clear();
    const std::size_t count = extrema.size();
    const std::size_t reflect = std::min<std::size_t>(static_cast<std::size_t>(n_mirror), count);
    const double last = static_cast<double>(length - 1);
    for (std::size_t k = reflect; k-- > 0;) {
        positions.push_back(-static_cast<double>(extrema[k]));
        source.push_back(extrema[k]);
    }
    for (std::size_t k = 0; k < count; ++k) {
        positions.push_back(static_cast<double>(extrema[k]));
        source.push_back(extrema[k]);
    }
    for (std::size_t k = 0; k < reflect; ++k) {
        const std::size_t e = extrema[count - 1 - k];
        positions.push_back(2.0 * last - static_cast<double>(e));
        source.push_back(e);
    }
}

} // namespace detail

/// Interpolation weights of a natural cubic spline with fixed knot positions,
/// evaluated at the integer sample positions 0..T-1.
///
/// The tridiagonal system depends only on the knot positions, so one basis
/// serves any number of ordinate sets (one per channel in the multivariate
/// case). Two knots give a straight line and three a quadratic.
class SplineBasis
{
public:
    SplineBasis() = default;

    SplineBasis(std::span<const double> knots, std::size_t eval_length) { reset(knots, eval_length); }

    void reset(std::span<const double> knots, std::size_t eval_length)
    {
        const std::size_t n = knots.size();
        if (n < 2)
            throw Error(ErrorCode::TooFewKnots, "spline needs at least 2 knots, got " + std::to_string(n));
        for (std::size_t i = 1; i < n; ++i) {
            if (!(knots[i] > knots[i - 1]))
                throw Error(ErrorCode::DuplicateKnotIndex, "knot positions must be strictly increasing");
        }
        x_.assign(knots.begin(), knots.end());
        length_ = eval_length;

        h_.resize(n - 1);
        for (std::size_t i = 0; i + 1 < n; ++i)
            h_[i] = x_[i + 1] - x_[i];

        // Forward-elimination factors of the natural-spline system for M_1..M_{n-2}.
        cp_.assign(n, 0.0);
        denom_.assign(n, 1.0);
        for (std::size_t i = 1; i + 1 < n; ++i) {
            const double a = h_[i - 1];
            const double b = 2.0 * (h_[i - 1] + h_[i]);
            const double c = h_[i];
            const double d = b - (i > 1 ? a * cp_[i - 1] : 0.0);
            denom_[i] = d;
            cp_[i] = c / d;
        }

        interval_.resize(eval_length);
        wa_.resize(eval_length);
        wc_.resize(eval_length);
        wd_.resize(eval_length);
        std::size_t seg = 0;
        for (std::size_t t = 0; t < eval_length; ++t) {
            const double pos = static_cast<double>(t);
            while (seg + 2 < n && pos > x_[seg + 1])
                ++seg;
            const double h = h_[seg];
            const double a = (x_[seg + 1] - pos) / h;
            const double b = 1.0 - a;
            interval_[t] = static_cast<std::uint32_t>(seg);
            wa_[t] = a;
            wc_[t] = (a * a * a - a) * h * h / 6.0;
            wd_[t] = (b * b * b - b) * h * h / 6.0;
        }
    }

    std::size_t knot_count() const noexcept { return x_.size(); }
    std::size_t length() const noexcept { return length_; }

    /// out[t] += scale * S(t) for the spline through (knots[i], y[i]).
    void accumulate(std::span<const double> y, std::span<double> out, double scale = 1.0)
    {
        const std::size_t n = x_.size();
        if (y.size() != n)
            throw Error(ErrorCode::DimensionMismatch, "ordinate count does not match knot count");
        if (n == 3) {
            accumulate_quadratic(y, out, scale);
            return;
        }
        m_.assign(n, 0.0);
        if (n > 2) {
            dp_.assign(n, 0.0);
            for (std::size_t i = 1; i + 1 < n; ++i) {
                const double rhs = 6.0 * ((y[i + 1] - y[i]) / h_[i] - (y[i] - y[i - 1]) / h_[i - 1]);
                dp_[i] = (rhs - (i > 1 ? h_[i - 1] * dp_[i - 1] : 0.0)) / denom_[i];
            }
            m_[n - 2] = dp_[n - 2];
            for (std::size_t i = n - 2; i-- > 1;)
                m_[i] = dp_[i] - cp_[i] * m_[i + 1];
        }
        for (std::size_t t = 0; t < length_; ++t) {
            const std::uint32_t i = interval_[t];
            const double a = wa_[t];
            out[t] += scale * (a * y[i] + (1.0 - a) * y[i + 1] + wc_[t] * m_[i] + wd_[t] * m_[i + 1]);
        }
    }

    /// Interleaved form of accumulate() for `channels` curves sharing these
    /// knots: y[i * channels + c] and out[t * channels + c].
    void accumulate_interleaved(std::span<const double> y, std::size_t channels, std::span<double> out,
                                double scale = 1.0)
    {
        const std::size_t n = x_.size();
        if (y.size() != n * channels || out.size() != length_ * channels)
            throw Error(ErrorCode::DimensionMismatch, "interleaved sizes do not match knots and length");
        m_.assign(n * channels, 0.0);
        if (n == 3) {
            quadratic_second_derivatives(y, channels);
        } else if (n > 3) {
            dp_.assign(n * channels, 0.0);
            for (std::size_t i = 1; i + 1 < n; ++i) {
                const double inv_hl = 1.0 / h_[i - 1];
                const double inv_hr = 1.0 / h_[i];
                const double carry = i > 1 ? h_[i - 1] : 0.0;
                const double inv_d = 1.0 / denom_[i];
                const double* yl = &y[(i - 1) * channels];
                const double* yc = &y[i * channels];
                const double* yr = &y[(i + 1) * channels];
                const double* dprev = &dp_[(i - 1) * channels];
                double* dcur = &dp_[i * channels];
                for (std::size_t c = 0; c < channels; ++c) {
                    const double rhs = 6.0 * ((yr[c] - yc[c]) * inv_hr - (yc[c] - yl[c]) * inv_hl);
                    dcur[c] = (rhs - carry * dprev[c]) * inv_d;
                }
            }
            for (std::size_t c = 0; c < channels; ++c)
                m_[(n - 2) * channels + c] = dp_[(n - 2) * channels + c];
            for (std::size_t i = n - 2; i-- > 1;) {
                const double f = cp_[i];
                for (std::size_t c = 0; c < channels; ++c)
                    m_[i * channels + c] = dp_[i * channels + c] - f * m_[(i + 1) * channels + c];
            }
        }
        for (std::size_t t = 0; t < length_; ++t) {
            const std::size_t i = interval_[t];
            const double a = wa_[t] * scale;
            const double b = (1.0 - wa_[t]) * scale;
            const double wc = wc_[t] * scale;
            const double wd = wd_[t] * scale;
            const double* y0 = &y[i * channels];
            const double* y1 = y0 + channels;
            const double* m0 = &m_[i * channels];
            const double* m1 = m0 + channels;
            double* o = &out[t * channels];
            for (std::size_t c = 0; c < channels; ++c)
                o[c] += a * y0[c] + b * y1[c] + wc * m0[c] + wd * m1[c];
        }
    }

    std::vector<double> evaluate(std::span<const double> y)
    {
        std::vector<double> out(length_, 0.0);
        accumulate(y, out);
        return out;
    }

private:
    // Three knots: the quadratic through them has a constant second
    // derivative, so the cubic form with equal end moments reproduces it.
    void quadratic_second_derivatives(std::span<const double> y, std::size_t channels)
    {
        for (std::size_t c = 0; c < channels; ++c) {
            const double s0 = (y[channels + c] - y[c]) / h_[0];
            const double s1 = (y[2 * channels + c] - y[channels + c]) / h_[1];
            const double m = 2.0 * (s1 - s0) / (h_[0] + h_[1]);
            for (std::size_t i = 0; i < 3; ++i)
                m_[i * channels + c] = m;
        }
    }

    void accumulate_quadratic(std::span<const double> y, std::span<double> out, double scale) const
    {
        const double x0 = x_[0], x1 = x_[1], x2 = x_[2];
        for (std::size_t t = 0; t < length_; ++t) {
            const double p = static_cast<double>(t);
            const double l0 = (p - x1) * (p - x2) / ((x0 - x1) * (x0 - x2));
            const double l1 = (p - x0) * (p - x2) / ((x1 - x0) * (x1 - x2));
            const double l2 = (p - x0) * (p - x1) / ((x2 - x0) * (x2 - x1));
            out[t] += scale * (l0 * y[0] + l1 * y[1] + l2 * y[2]);
        }
    }

    std::vector<double> x_, h_, cp_, denom_;
    std::vector<std::uint32_t> interval_;
    std::vector<double> wa_, wc_, wd_;
    std::vector<double> m_, dp_;
    std::size_t length_ = 0;
};

/// All interior local maxima and minima of `series`.
inline ExtremaSet find_extrema(std::span<const double> series,
                               PlateauPolicy plateau_policy = PlateauPolicy::FirstOfPlateau)
{
    (void)plateau_policy;
    ExtremaSet out;
    detail::scan_extrema(
        series, [&](std::size_t i) { out.maxima.push_back({static_cast<std::ptrdiff_t>(i), series[i]}); },
        [&](std::size_t i) { out.minima.push_back({static_cast<std::ptrdiff_t>(i), series[i]}); });
    return out;
}

inline ExtremaSet find_extrema(const TimeSeries& series,
                               PlateauPolicy plateau_policy = PlateauPolicy::FirstOfPlateau)
{
    return find_extrema(series.samples(), plateau_policy);
}

/// Adds `n_mirror` extrema reflected about sample 0 and about sample T-1 to
/// each non-empty list. Reflected knots keep the value of their source.
inline ExtremaSet extend_boundaries(std::size_t length, const ExtremaSet& extrema, int n_mirror)
{
    if (extrema.empty())
        throw Error(ErrorCode::InsufficientExtrema, "no extrema to reflect");
    if (n_mirror < 0)
        throw Error(ErrorCode::BadConfig, "n_mirror must be non-negative");
    const auto last = static_cast<std::ptrdiff_t>(length) - 1;
    auto extend = [&](const std::vector<Extremum>& list) {
        std::vector<Extremum> out;
        if (list.empty())
            return out;
        const std::size_t reflect = std::min<std::size_t>(static_cast<std::size_t>(n_mirror), list.size());
        for (std::size_t k = reflect; k-- > 0;)
            out.push_back({-list[k].index, list[k].value});
        out.insert(out.end(), list.begin(), list.end());
        for (std::size_t k = 0; k < reflect; ++k) {
            const auto& e = list[list.size() - 1 - k];
            out.push_back({2 * last - e.index, e.value});
        }
        return out;
    };
    return ExtremaSet{extend(extrema.maxima), extend(extrema.minima)};
}

inline ExtremaSet extend_boundaries(const TimeSeries& series, const ExtremaSet& extrema, int n_mirror)
{
    return extend_boundaries(series.size(), extrema, n_mirror);
}

/// Natural cubic spline through `knots`, evaluated at 0..eval_length-1.
inline EnvelopeCurve spline_envelope(std::span<const Extremum> knots, std::size_t eval_length)
{
    std::vector<double> x, y;
    x.reserve(knots.size());
    y.reserve(knots.size());
    for (const auto& k : knots) {
        if (!x.empty() && static_cast<double>(k.index) == x.back())
            throw Error(ErrorCode::DuplicateKnotIndex, "duplicate knot index " + std::to_string(k.index));
        x.push_back(static_cast<double>(k.index));
        y.push_back(k.value);
    }
    SplineBasis basis(x, eval_length);
    return EnvelopeCurve{basis.evaluate(y)};
}

namespace detail
{

/// Reusable buffers for the univariate envelope mean.
struct EnvelopeWorkspace
{
    std::vector<std::size_t> maxima, minima, source;
    std::vector<double> positions, ordinates;
    SplineBasis basis;
};

/// mean[t] = (upper[t] + lower[t]) / 2. Returns false when the series has
/// fewer than two maxima or fewer than two minima.
inline bool envelope_mean(std::span<const double> x, int n_mirror, std::vector<double>& mean,
                          EnvelopeWorkspace& ws)
{
    find_maxima_minima(x, ws.maxima, ws.minima);
    if (ws.maxima.size() < 2 || ws.minima.size() < 2)
        return false;
    mean.assign(x.size(), 0.0);
    for (const auto* list : {&ws.maxima, &ws.minima}) {
        mirrored_knots(*list, x.size(), n_mirror, ws.positions, ws.source);
        ws.ordinates.resize(ws.source.size());
        for (std::size_t k = 0; k < ws.source.size(); ++k)
            ws.ordinates[k] = x[ws.source[k]];
        ws.basis.reset(ws.positions, x.size());
        ws.basis.accumulate(ws.ordinates, mean, 0.5);
    }
    return true;
}

} // namespace detail

/// Pointwise mean of the upper and lower spline envelopes, both built with
/// mirrored boundary extrema.
inline EnvelopeCurve envelope_mean_univariate(const TimeSeries& series, const DecompositionConfig& config)
{
    detail::EnvelopeWorkspace ws;
    EnvelopeCurve out;
    if (!detail::envelope_mean(series.samples(), config.n_mirror, out.values, ws))
        throw Error(ErrorCode::InsufficientExtrema, "envelope mean needs at least two maxima and two minima");
    return out;
}

} // namespace memd
