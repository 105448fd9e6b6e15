#include "memd/envelope.hpp"
#include "memd/error.hpp"
#include "memd/signal.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

using namespace memd;

namespace
{

std::vector<double> sine(double freq, double rate, std::size_t n, double phase = 0.0, double offset = 0.0)
{
    std::vector<double> v(n);
    for (std::size_t t = 0; t < n; ++t)
        v[t] = offset + std::sin(2.0 * std::numbers::pi * freq * static_cast<double>(t) / rate + phase);
    return v;
}

// Independent count: sign changes of the first difference, ignoring zero steps.
std::pair<int, int> difference_sign_changes(const std::vector<double>& x)
{
    int maxima = 0, minima = 0, prev = 0;
    for (std::size_t i = 1; i < x.size(); ++i) {
        const double d = x[i] - x[i - 1];
        const int s = d > 0 ? 1 : (d < 0 ? -1 : 0);
        if (s == 0)
            continue;
        if (prev == 1 && s == -1)
            ++maxima;
        if (prev == -1 && s == 1)
            ++minima;
        prev = s;
    }
    return {maxima, minima};
}

} // namespace

TEST(FindExtrema, SinglePeakAndTrough)
{
    const std::vector<double> x{0, 1, 0, -1, 0};
    const auto e = find_extrema(x);
    ASSERT_EQ(e.maxima.size(), 1u);
    ASSERT_EQ(e.minima.size(), 1u);
    EXPECT_EQ(e.maxima[0], (Extremum{1, 1.0}));
    EXPECT_EQ(e.minima[0], (Extremum{3, -1.0}));
}

TEST(FindExtrema, RampHasNone)
{
    EXPECT_TRUE(find_extrema(std::vector<double>{0, 1, 2, 3}).empty());
}

TEST(FindExtrema, SineCountMatchesDifferenceOracle)
{
    const auto x = sine(0.3, 10.0, 1000, 0.1);
    const auto e = find_extrema(x);
    const auto [mx, mn] = difference_sign_changes(x);
    EXPECT_EQ(static_cast<int>(e.maxima.size()), mx);
    EXPECT_EQ(static_cast<int>(e.minima.size()), mn);
    EXPECT_NEAR(static_cast<double>(e.maxima.size()), 30.0, 1.0);
    EXPECT_NEAR(static_cast<double>(e.minima.size()), 30.0, 1.0);
}

TEST(FindExtrema, PlateauReportsFirstIndex)
{
    const auto e = find_extrema(std::vector<double>{0, 2, 2, 2, 1, -1, -1, 0});
    ASSERT_EQ(e.maxima.size(), 1u);
    EXPECT_EQ(e.maxima[0].index, 1);
    ASSERT_EQ(e.minima.size(), 1u);
    EXPECT_EQ(e.minima[0].index, 5);
}

TEST(FindExtrema, PlateauTouchingEndIsNotExtremum)
{
    EXPECT_TRUE(find_extrema(std::vector<double>{0, 1, 2, 2, 2}).empty());
    EXPECT_TRUE(find_extrema(std::vector<double>{3, 3, 2, 1}).empty());
}

TEST(FindExtrema, NegationSwapsMaximaAndMinima)
{
    std::mt19937_64 rng(3);
    std::normal_distribution<double> d;
    std::vector<double> x(500), neg(500);
    for (std::size_t i = 0; i < x.size(); ++i) {
        x[i] = std::round(d(rng) * 4.0) / 4.0;
        neg[i] = -x[i];
    }
    const auto a = find_extrema(x);
    const auto b = find_extrema(neg);
    ASSERT_EQ(a.maxima.size(), b.minima.size());
    ASSERT_EQ(a.minima.size(), b.maxima.size());
    for (std::size_t i = 0; i < a.maxima.size(); ++i)
        EXPECT_EQ(a.maxima[i].index, b.minima[i].index);
    for (std::size_t i = 0; i < a.minima.size(); ++i)
        EXPECT_EQ(a.minima[i].index, b.maxima[i].index);
}

TEST(ExtendBoundaries, ReflectionArithmetic)
{
    ExtremaSet e;
    e.maxima = {{10, 1.0}, {30, 2.0}};
    const auto x = extend_boundaries(100, e, 1);
    ASSERT_EQ(x.maxima.size(), 4u);
    EXPECT_EQ(x.maxima[0], (Extremum{-10, 1.0}));
    EXPECT_EQ(x.maxima[1], (Extremum{10, 1.0}));
    EXPECT_EQ(x.maxima[2], (Extremum{30, 2.0}));
    EXPECT_EQ(x.maxima[3], (Extremum{168, 2.0}));
    EXPECT_TRUE(x.minima.empty());
}

TEST(ExtendBoundaries, EmptyIsInsufficient)
{
    try {
        extend_boundaries(100, ExtremaSet{}, 2);
        FAIL();
    } catch (const Error& err) {
        EXPECT_EQ(err.code(), ErrorCode::InsufficientExtrema);
    }
}

TEST(ExtendBoundaries, SymmetricTriangleMatchesPeriodicExtension)
{
    // Period 20 with troughs at multiples of 20: even about both endpoints.
    const auto tri = [](std::ptrdiff_t t) {
        const double p = std::fmod(std::fmod(static_cast<double>(t), 20.0) + 20.0, 20.0);
        return p <= 10.0 ? -1.0 + p / 5.0 : 3.0 - p / 5.0;
    };
    std::vector<double> x(101);
    for (std::size_t t = 0; t < x.size(); ++t)
        x[t] = tri(static_cast<std::ptrdiff_t>(t));
    const auto ext = extend_boundaries(x.size(), find_extrema(x), 2);

    const std::ptrdiff_t pad = 60;
    std::vector<double> periodic(x.size() + 2 * pad);
    for (std::size_t i = 0; i < periodic.size(); ++i)
        periodic[i] = tri(static_cast<std::ptrdiff_t>(i) - pad);
    auto oracle = find_extrema(periodic);
    for (auto* list : {&oracle.maxima, &oracle.minima})
        for (auto& e : *list)
            e.index -= pad;

    const auto contains = [](const std::vector<Extremum>& list, const Extremum& e) {
        return std::find(list.begin(), list.end(), e) != list.end();
    };
    EXPECT_EQ(ext.maxima.size(), 9u);
    for (const auto& e : ext.maxima)
        EXPECT_TRUE(contains(oracle.maxima, e)) << e.index;
    for (const auto& e : ext.minima)
        EXPECT_TRUE(contains(oracle.minima, e)) << e.index;
    EXPECT_EQ(ext.maxima.front().index, -30);
    EXPECT_EQ(ext.maxima.back().index, 130);
}

TEST(SplineEnvelope, CollinearKnotsGiveLine)
{
    const std::vector<Extremum> k{{0, 0.0}, {5, 5.0}, {10, 10.0}};
    const auto e = spline_envelope(k, 11);
    for (std::size_t t = 0; t < 11; ++t)
        EXPECT_NEAR(e.values[t], static_cast<double>(t), 1e-12);
}

TEST(SplineEnvelope, InterpolatesKnot)
{
    const std::vector<Extremum> k{{0, 0.0}, {4, 1.0}, {8, 0.0}};
    EXPECT_DOUBLE_EQ(spline_envelope(k, 9).values[4], 1.0);
}

TEST(SplineEnvelope, TwoKnotsGiveLineThreeGiveQuadratic)
{
    const auto line = spline_envelope(std::vector<Extremum>{{2, 1.0}, {6, 3.0}}, 10);
    for (std::size_t t = 0; t < 10; ++t)
        EXPECT_NEAR(line.values[t], 1.0 + 0.5 * (static_cast<double>(t) - 2.0), 1e-12);
    const auto quad = spline_envelope(std::vector<Extremum>{{0, 0.0}, {3, 9.0}, {7, 49.0}}, 10);
    for (std::size_t t = 0; t < 10; ++t)
        EXPECT_NEAR(quad.values[t], static_cast<double>(t * t), 1e-9);
}

TEST(SplineEnvelope, Errors)
{
    auto code = [](std::vector<Extremum> k) {
        try {
            spline_envelope(k, 10);
        } catch (const Error& e) {
            return e.code();
        }
        return ErrorCode::ParseError;
    };
    EXPECT_EQ(code({{1, 0.0}}), ErrorCode::TooFewKnots);
    EXPECT_EQ(code({{1, 0.0}, {1, 1.0}, {4, 2.0}}), ErrorCode::DuplicateKnotIndex);
}

TEST(SplineEnvelope, PassesThroughRandomKnotsAndIsNatural)
{
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<Extremum> k;
    std::ptrdiff_t pos = -7;
    for (int i = 0; i < 40; ++i) {
        k.push_back({pos, u(rng)});
        pos += 2 + static_cast<std::ptrdiff_t>(rng() % 7);
    }
    const auto e = spline_envelope(k, static_cast<std::size_t>(pos));
    for (const auto& kn : k) {
        if (kn.index >= 0 && kn.index < pos) {
            EXPECT_NEAR(e.values[static_cast<std::size_t>(kn.index)], kn.value, 1e-12);
        }
    }
}

TEST(SplineEnvelope, SineMaximaEnvelopeIsFlat)
{
    const auto x = sine(0.3, 10.0, 3000);
    const auto ext = extend_boundaries(x.size(), find_extrema(x), 2);
    const auto upper = spline_envelope(ext.maxima, x.size());
    for (std::size_t t = 300; t < 2700; ++t)
        EXPECT_NEAR(upper.values[t], 1.0, 0.01);
}

TEST(SplineBasis, InterleavedMatchesPerChannel)
{
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (std::size_t knots : {2u, 3u, 4u, 17u}) {
        std::vector<double> pos;
        double p = -3.0;
        for (std::size_t i = 0; i < knots; ++i) {
            pos.push_back(p);
            p += 3.0 + static_cast<double>(rng() % 5);
        }
        const auto len = static_cast<std::size_t>(p);
        SplineBasis basis(pos, len);
        const std::size_t nch = 3;
        std::vector<double> inter(knots * nch);
        std::vector<std::vector<double>> per(nch, std::vector<double>(knots));
        for (std::size_t i = 0; i < knots; ++i)
            for (std::size_t c = 0; c < nch; ++c)
                inter[i * nch + c] = per[c][i] = u(rng);
        std::vector<double> out(len * nch, 0.0);
        basis.accumulate_interleaved(inter, nch, out);
        for (std::size_t c = 0; c < nch; ++c) {
            const auto ref = basis.evaluate(per[c]);
            for (std::size_t t = 0; t < len; ++t)
                EXPECT_NEAR(out[t * nch + c], ref[t], 1e-9) << "knots " << knots;
        }
    }
}

TEST(EnvelopeMean, SineIsNearZero)
{
    const TimeSeries s(sine(0.3, 10.0, 3000, 0.4), 10.0);
    const auto m = envelope_mean_univariate(s, {});
    for (std::size_t t = 300; t < 2700; ++t)
        EXPECT_NEAR(m.values[t], 0.0, 0.02);
}

TEST(EnvelopeMean, OffsetIsRecovered)
{
    const TimeSeries s(sine(0.3, 10.0, 3000, 0.4, 2.5), 10.0);
    const auto m = envelope_mean_univariate(s, {});
    for (std::size_t t = 300; t < 2700; ++t)
        EXPECT_NEAR(m.values[t], 2.5, 0.02);
}

TEST(EnvelopeMean, PeriodicSignalMatchesPeriodicEnvelope)
{
    // Period 40 samples, even about every multiple of 40; the record spans
    // 40 periods and the reference record 3 times as many.
    const auto wave = [](std::size_t t) {
        const double th = 2.0 * std::numbers::pi * static_cast<double>(t) / 40.0;
        return std::cos(th) + 0.6 * std::cos(3.0 * th);
    };
    std::vector<double> x(1601), big(4801);
    for (std::size_t t = 0; t < x.size(); ++t)
        x[t] = wave(t);
    for (std::size_t t = 0; t < big.size(); ++t)
        big[t] = wave(t);
    const auto m = envelope_mean_univariate(TimeSeries(x, 10.0), {});
    const auto ref = envelope_mean_univariate(TimeSeries(big, 10.0), {});
    for (std::size_t t = 400; t < 1200; ++t)
        EXPECT_NEAR(m.values[t], ref.values[t + 1600], 1e-6);
}

TEST(EnvelopeMean, RampIsInsufficient)
{
    std::vector<double> r(50);
    for (std::size_t t = 0; t < r.size(); ++t)
        r[t] = static_cast<double>(t);
    try {
        envelope_mean_univariate(TimeSeries(r, 10.0), {});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::InsufficientExtrema);
    }
}
