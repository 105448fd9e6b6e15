#pragma once

#include "memd/error.hpp"
#include "memd/signal.hpp"

#include <boost/math/special_functions/erf.hpp>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace memd
{

/// K unit vectors on the (N-1)-sphere, stored row-major.
class DirectionSet
{
public:
    DirectionSet(std::size_t dimension, std::vector<double> vectors, DirectionScheme scheme, std::uint64_t seed)
        : dimension_(dimension), vectors_(std::move(vectors)), scheme_(scheme), seed_(seed)
    {
        if (dimension_ == 0 || vectors_.size() % dimension_ != 0)
            throw Error(ErrorCode::DimensionMismatch, "direction storage is not a K x N matrix");
        for (std::size_t k = 0; k < count(); ++k) {
            double norm2 = 0.0;
            for (double v : direction(k))
                norm2 += v * v;
            if (std::abs(std::sqrt(norm2) - 1.0) > 1e-12)
                throw Error(ErrorCode::BadScheme, "direction " + std::to_string(k) + " is not a unit vector");
        }
    }

    std::size_t count() const noexcept { return vectors_.size() / dimension_; }
    std::size_t dimension() const noexcept { return dimension_; }
    DirectionScheme scheme() const noexcept { return scheme_; }
    std::uint64_t seed() const noexcept { return seed_; }

    std::span<const double> direction(std::size_t k) const
    {
        return std::span<const double>(vectors_).subspan(k * dimension_, dimension_);
    }

    friend bool operator==(const DirectionSet&, const DirectionSet&) = default;

private:
    std::size_t dimension_;
    std::vector<double> vectors_;
    DirectionScheme scheme_;
    std::uint64_t seed_;
};

namespace detail
{

inline double radical_inverse(std::uint64_t base, std::uint64_t index)
{
    double result = 0.0;
    double f = 1.0 / static_cast<double>(base);
    while (index > 0) {
        result += f * static_cast<double>(index % base);
        index /= base;
        f /= static_cast<double>(base);
    }
    return result;
}

inline std::vector<std::uint64_t> first_primes(std::size_t count)
{
    std::vector<std::uint64_t> primes;
    for (std::uint64_t c = 2; primes.size() < count; ++c) {
        bool prime = true;
        for (auto p : primes) {
            if (p * p > c)
                break;
            if (c % p == 0) {
                prime = false;
                break;
            }
        }
        if (prime)
            primes.push_back(c);
    }
    return primes;
}

inline void normalize(std::span<double> v)
{
    double norm2 = 0.0;
    for (double x : v)
        norm2 += x * x;
    const double inv = 1.0 / std::sqrt(norm2);
    for (double& x : v)
        x *= inv;
}

/// Hammersley points in [0,1)^N with a seeded Cranley-Patterson shift, pushed
/// through the Gaussian quantile and normalized onto the sphere.
inline std::vector<double> low_discrepancy_sphere(std::size_t n, std::size_t k, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    std::vector<double> shift(n);
    for (auto& s : shift)
        s = uniform(rng);
    const auto primes = first_primes(n > 0 ? n - 1 : 0);

    // Keeps the quantile finite.
    const double lo = 0.5 / static_cast<double>(k);
    std::vector<double> out(n * k);
    for (std::size_t i = 0; i < k; ++i) {
        auto row = std::span<double>(out).subspan(i * n, n);
        for (std::size_t d = 0; d < n; ++d) {
            double u = d == 0 ? (static_cast<double>(i) + 0.5) / static_cast<double>(k)
                              : radical_inverse(primes[d - 1], i);
            u += shift[d];
            u -= std::floor(u);
            u = std::clamp(u, lo * 1e-3, 1.0 - lo * 1e-3);
            row[d] = std::numbers::sqrt2 * boost::math::erf_inv(2.0 * u - 1.0);
        }
        double norm2 = 0.0;
        for (double x : row)
            norm2 += x * x;
        if (norm2 == 0.0)
            row[0] = 1.0;
        normalize(row);
    }
    return out;
}

} // namespace detail

/// Polar x azimuth grid of unit 3-vectors: polar angles (k - 1/2) pi / P for
/// k = 1..P, azimuths 2 pi j / A for j = 1..A.
inline DirectionSet spherical_grid_directions(std::size_t polar, std::size_t azimuth)
{
    if (polar * azimuth < 6)
        throw Error(ErrorCode::TooFewDirections, "a 3-channel direction set needs at least 6 directions");
    std::vector<double> v;
    v.reserve(3 * polar * azimuth);
    for (std::size_t k = 1; k <= polar; ++k) {
        const double theta = (static_cast<double>(k) - 0.5) * std::numbers::pi / static_cast<double>(polar);
        for (std::size_t j = 1; j <= azimuth; ++j) {
            const double phi = 2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(azimuth);
            double row[3] = {std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi), std::cos(theta)};
            detail::normalize(row);
            v.insert(v.end(), row, row + 3);
        }
    }
    return DirectionSet(3, std::move(v), DirectionScheme::SphericalGrid3D, 0);
}

/// Direction set for projecting an N-channel record.
///
/// UniformAngles2D places K directions at angles 2 pi k / K (N = 2 only).
/// SphericalGrid3D factors K into the most square polar x azimuth grid (N = 3 only).
inline DirectionSet generate_directions(std::size_t n_channels, std::size_t count, DirectionScheme scheme,
                                        std::uint64_t seed = 0)
{
    if (n_channels < 2)
        throw Error(ErrorCode::DimensionMismatch, "direction sets need at least 2 channels");
    if (count < 2 * n_channels)
        throw Error(ErrorCode::TooFewDirections,
                    "need at least " + std::to_string(2 * n_channels) + " directions, got " + std::to_string(count));
    switch (scheme) {
    case DirectionScheme::UniformAngles2D: {
        if (n_channels != 2)
            throw Error(ErrorCode::BadScheme, "UniformAngles2D is only defined for 2 channels");
        std::vector<double> v;
        v.reserve(2 * count);
        for (std::size_t k = 1; k <= count; ++k) {
            const double phi = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(count);
            double row[2] = {std::cos(phi), std::sin(phi)};
            detail::normalize(row);
            v.insert(v.end(), row, row + 2);
        }
        return DirectionSet(2, std::move(v), scheme, seed);
    }
    case DirectionScheme::SphericalGrid3D: {
        if (n_channels != 3)
            throw Error(ErrorCode::BadScheme, "SphericalGrid3D is only defined for 3 channels");
        std::size_t polar = 1;
        for (std::size_t p = 1; p * p <= count; ++p) {
            if (count % p == 0)
                polar = p;
        }
        return spherical_grid_directions(polar, count / polar);
    }
    case DirectionScheme::LowDiscrepancySphere:
        return DirectionSet(n_channels, detail::low_discrepancy_sphere(n_channels, count, seed), scheme, seed);
    }
    throw Error(ErrorCode::BadScheme, "unknown direction scheme");
}

} // namespace memd
