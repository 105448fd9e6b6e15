#pragma once

#include "memd/error.hpp"
#include "memd/hilbert.hpp"
#include "memd/modes.hpp"
#include "memd/signal.hpp"
#include "memd/synth.hpp"
#include "memd/text.hpp"

#include <charconv>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace memd
{

/// Flat `key = value` text; `#` starts a comment, blank lines are ignored.
using KeyValues = std::map<std::string, std::string, std::less<>>;

namespace detail
{

inline double parse_double(std::string_view text, std::string_view key)
{
    text = trim(text);
    double v = 0.0;
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, v);
    if (ec != std::errc() || ptr != end || text.empty())
        throw Error(ErrorCode::BadConfig, "key '" + std::string(key) + "': '" + std::string(text) + "' is not a number");
    return v;
}

inline long long parse_integer(std::string_view text, std::string_view key)
{
    text = trim(text);
    long long v = 0;
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, v);
    if (ec != std::errc() || ptr != end || text.empty())
        throw Error(ErrorCode::BadConfig,
                    "key '" + std::string(key) + "': '" + std::string(text) + "' is not an integer");
    return v;
}

inline bool parse_bool(std::string_view text, std::string_view key)
{
    text = trim(text);
    if (text == "true" || text == "1")
        return true;
    if (text == "false" || text == "0")
        return false;
    throw Error(ErrorCode::BadConfig, "key '" + std::string(key) + "': expected true or false");
}

inline std::vector<std::string> split_list(std::string_view text)
{
    std::vector<std::string> out;
    while (true) {
        const auto comma = text.find(',');
        out.emplace_back(trim(text.substr(0, comma)));
        if (comma == std::string_view::npos)
            break;
        text.remove_prefix(comma + 1);
    }
    if (out.size() == 1 && out.front().empty())
        out.clear();
    return out;
}

inline std::vector<double> parse_list(std::string_view text, std::string_view key)
{
    std::vector<double> out;
    for (const auto& item : split_list(text))
        out.push_back(parse_double(item, key));
    return out;
}

/// Shortest text that reads back to the same double.
inline std::string format_exact(double v)
{
    char buf[32];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

inline std::string format_list(const std::vector<double>& v)
{
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i > 0)
            out += ", ";
        out += format_exact(v[i]);
    }
    return out;
}

} // namespace detail

inline KeyValues parse_key_values(std::string_view text)
{
    KeyValues out;
    std::size_t line_no = 0;
    while (!text.empty()) {
        const auto nl = text.find('\n');
        auto line = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string_view::npos)
            line = line.substr(0, hash);
        line = detail::trim(line);
        if (line.empty())
            continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos)
            throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": expected key = value");
        const auto key = detail::trim(line.substr(0, eq));
        if (key.empty())
            throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": empty key");
        if (!out.emplace(std::string(key), std::string(detail::trim(line.substr(eq + 1)))).second)
            throw Error(ErrorCode::ParseError,
                        "line " + std::to_string(line_no) + ": duplicate key '" + std::string(key) + "'");
    }
    return out;
}

inline KeyValues read_key_values(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error(ErrorCode::ParseError, "cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_key_values(ss.str());
}

/// Everything the analysis pipeline reads from a config file.
struct AnalysisSettings
{
    DecompositionConfig decomposition;
    ClassifierThresholds thresholds;
    AnalyticOptions analytic;
    SpectrumWindow window = SpectrumWindow::Rectangular;
    double crest_band_low_hz = 0.1;
    double crest_band_high_hz = 1.0;
    /// Crest-to-median amplitude ratio below which a crest is flagged.
    double min_crest_prominence = 4.0;
};

inline std::string_view to_string(DirectionScheme s)
{
    switch (s) {
    case DirectionScheme::UniformAngles2D: return "uniform_angles_2d";
    case DirectionScheme::LowDiscrepancySphere: return "low_discrepancy_sphere";
    case DirectionScheme::SphericalGrid3D: return "spherical_grid_3d";
    }
    return "unknown";
}

inline std::string_view to_string(MeanNormalization m)
{
    return m == MeanNormalization::BackProjection2D ? "back_projection_2d" : "average";
}

inline std::string_view to_string(SpectrumWindow w)
{
    return w == SpectrumWindow::Hann ? "hann" : "rect";
}

inline SpectrumWindow parse_window(std::string_view text)
{
    if (text == "rect")
        return SpectrumWindow::Rectangular;
    if (text == "hann")
        return SpectrumWindow::Hann;
    throw Error(ErrorCode::BadConfig, "window must be rect or hann, got '" + std::string(text) + "'");
}

/// Applies recognised keys to `settings`. Unknown keys are an error.
inline void apply(AnalysisSettings& settings, const KeyValues& kv)
{
    auto& d = settings.decomposition;
    auto& th = settings.thresholds;
    for (const auto& [key, value] : kv) {
        if (key == "sd_threshold")
            d.sd_threshold = detail::parse_double(value, key);
        else if (key == "direction_count")
            d.direction_count = static_cast<int>(detail::parse_integer(value, key));
        else if (key == "max_sift_iterations")
            d.max_sift_iterations = static_cast<int>(detail::parse_integer(value, key));
        else if (key == "max_imfs")
            d.max_imfs = static_cast<int>(detail::parse_integer(value, key));
        else if (key == "n_mirror")
            d.n_mirror = static_cast<int>(detail::parse_integer(value, key));
        else if (key == "rng_seed")
            d.rng_seed = static_cast<std::uint64_t>(detail::parse_integer(value, key));
        else if (key == "boundary_policy") {
            if (value != "mirror_extrema")
                throw Error(ErrorCode::BadConfig, "boundary_policy must be mirror_extrema");
            d.boundary_policy = BoundaryPolicy::MirrorExtrema;
        } else if (key == "direction_scheme") {
            if (value == "uniform_angles_2d")
                d.direction_scheme = DirectionScheme::UniformAngles2D;
            else if (value == "low_discrepancy_sphere")
                d.direction_scheme = DirectionScheme::LowDiscrepancySphere;
            else if (value == "spherical_grid_3d")
                d.direction_scheme = DirectionScheme::SphericalGrid3D;
            else
                throw Error(ErrorCode::BadConfig, "unknown direction_scheme '" + value + "'");
        } else if (key == "mean_normalization") {
            if (value == "average")
                d.mean_normalization = MeanNormalization::Average;
            else if (value == "back_projection_2d")
                d.mean_normalization = MeanNormalization::BackProjection2D;
            else
                throw Error(ErrorCode::BadConfig, "unknown mean_normalization '" + value + "'");
        } else if (key == "trend_frequency_hz")
            th.trend_frequency_hz = detail::parse_double(value, key);
        else if (key == "trend_circular_variance")
            th.trend_circular_variance = detail::parse_double(value, key);
        else if (key == "local_share")
            th.local_share = detail::parse_double(value, key);
        else if (key == "noise_frequency_hz")
            th.noise_frequency_hz = detail::parse_double(value, key);
        else if (key == "min_coherence")
            th.min_coherence = detail::parse_double(value, key);
        else if (key == "interior_fraction")
            th.interior_fraction = detail::parse_double(value, key);
        else if (key == "amplitude_floor")
            settings.analytic.amplitude_floor = detail::parse_double(value, key);
        else if (key == "smooth_frequency")
            settings.analytic.smooth_frequency = detail::parse_bool(value, key);
        else if (key == "window")
            settings.window = parse_window(value);
        else if (key == "crest_band_low_hz")
            settings.crest_band_low_hz = detail::parse_double(value, key);
        else if (key == "crest_band_high_hz")
            settings.crest_band_high_hz = detail::parse_double(value, key);
        else if (key == "min_crest_prominence")
            settings.min_crest_prominence = detail::parse_double(value, key);
        else
            throw Error(ErrorCode::BadConfig, "unknown config key '" + key + "'");
    }
    if (!(th.interior_fraction > 0.0 && th.interior_fraction <= 1.0))
        throw Error(ErrorCode::BadConfig, "interior_fraction must be in (0, 1]");
    if (!(settings.crest_band_low_hz < settings.crest_band_high_hz))
        throw Error(ErrorCode::BadConfig, "crest band is empty");
}

inline AnalysisSettings analysis_settings(const KeyValues& kv)
{
    AnalysisSettings s;
    apply(s, kv);
    return s;
}

/// Scenario keys: channels, duration, sample_rate, seed, noise_snr_db,
/// noise_std, noise_weights, noise_lowpass_hz, step_time, step_magnitudes,
/// trend.<channel number>, and mode.<k>.{frequency, damping_ratio,
/// amplitudes, phases, onset_time} with k counting from 1.
inline ScenarioSpec parse_scenario(const KeyValues& kv)
{
    ScenarioSpec s;
    std::map<std::size_t, ModeSpec> modes;
    std::map<std::size_t, std::vector<double>> trends;
    std::optional<double> step_time;
    std::vector<double> step_magnitudes;
    const auto index_of = [](std::string_view key, std::string_view text) {
        const auto v = detail::parse_integer(text, key);
        if (v < 1)
            throw Error(ErrorCode::BadScenario, "index in '" + std::string(key) + "' must be at least 1");
        return static_cast<std::size_t>(v);
    };

    for (const auto& [key, value] : kv) {
        if (key == "channels")
            s.channel_ids = detail::split_list(value);
        else if (key == "duration")
            s.duration = detail::parse_double(value, key);
        else if (key == "sample_rate")
            s.sample_rate = detail::parse_double(value, key);
        else if (key == "seed")
            s.seed = static_cast<std::uint64_t>(detail::parse_integer(value, key));
        else if (key == "noise_snr_db")
            s.noise_snr_db = detail::parse_double(value, key);
        else if (key == "noise_std")
            s.noise_std = detail::parse_double(value, key);
        else if (key == "noise_weights")
            s.noise_channel_weights = detail::parse_list(value, key);
        else if (key == "noise_lowpass_hz")
            s.noise_lowpass_hz = detail::parse_double(value, key);
        else if (key == "step_time")
            step_time = detail::parse_double(value, key);
        else if (key == "step_magnitudes")
            step_magnitudes = detail::parse_list(value, key);
        else if (key.starts_with("trend."))
            trends[index_of(key, std::string_view(key).substr(6))] = detail::parse_list(value, key);
        else if (key.starts_with("mode.")) {
            const std::string_view rest = std::string_view(key).substr(5);
            const auto dot = rest.find('.');
            if (dot == std::string_view::npos)
                throw Error(ErrorCode::BadScenario, "mode key '" + key + "' needs a field");
            auto& m = modes[index_of(key, rest.substr(0, dot))];
            const auto field = rest.substr(dot + 1);
            if (field == "frequency")
                m.frequency = detail::parse_double(value, key);
            else if (field == "damping_ratio")
                m.damping_ratio = detail::parse_double(value, key);
            else if (field == "amplitudes")
                m.amplitudes = detail::parse_list(value, key);
            else if (field == "phases")
                m.phases = detail::parse_list(value, key);
            else if (field == "onset_time")
                m.onset_time = detail::parse_double(value, key);
            else
                throw Error(ErrorCode::BadScenario, "unknown mode field in '" + key + "'");
        } else
            throw Error(ErrorCode::BadScenario, "unknown scenario key '" + key + "'");
    }

    std::size_t expected = 1;
    for (auto& [k, m] : modes) {
        if (k != expected++)
            throw Error(ErrorCode::BadScenario, "mode numbers must run 1, 2, ... without gaps");
        s.modes.push_back(std::move(m));
    }
    expected = 1;
    for (auto& [k, t] : trends) {
        if (k != expected++)
            throw Error(ErrorCode::BadScenario, "trend channel numbers must run 1, 2, ... without gaps");
        s.trend.push_back(std::move(t));
    }
    if (step_time)
        s.step_event = StepEvent{*step_time, step_magnitudes};
    else if (!step_magnitudes.empty())
        throw Error(ErrorCode::BadScenario, "step_magnitudes given without step_time");
    validate(s);
    return s;
}

/// Text form of `s` that parse_scenario() reads back to an equal scenario.
inline std::string format_scenario(const ScenarioSpec& s)
{
    std::ostringstream out;
    out << "channels = ";
    for (std::size_t i = 0; i < s.channel_ids.size(); ++i)
        out << (i > 0 ? ", " : "") << s.channel_ids[i];
    out << "\nduration = " << detail::format_exact(s.duration) << "\nsample_rate = " << detail::format_exact(s.sample_rate)
        << "\nseed = " << s.seed << '\n';
    if (s.noise_snr_db)
        out << "noise_snr_db = " << detail::format_exact(*s.noise_snr_db) << '\n';
    if (s.noise_std)
        out << "noise_std = " << detail::format_exact(*s.noise_std) << '\n';
    if (!s.noise_channel_weights.empty())
        out << "noise_weights = " << detail::format_list(s.noise_channel_weights) << '\n';
    if (s.noise_lowpass_hz)
        out << "noise_lowpass_hz = " << detail::format_exact(*s.noise_lowpass_hz) << '\n';
    if (s.step_event) {
        out << "step_time = " << detail::format_exact(s.step_event->time) << '\n';
        out << "step_magnitudes = " << detail::format_list(s.step_event->magnitudes) << '\n';
    }
    for (std::size_t n = 0; n < s.trend.size(); ++n)
        out << "trend." << n + 1 << " = " << detail::format_list(s.trend[n]) << '\n';
    for (std::size_t k = 0; k < s.modes.size(); ++k) {
        const auto& m = s.modes[k];
        const std::string p = "mode." + std::to_string(k + 1) + ".";
        out << p << "frequency = " << detail::format_exact(m.frequency) << '\n';
        out << p << "damping_ratio = " << detail::format_exact(m.damping_ratio) << '\n';
        out << p << "amplitudes = " << detail::format_list(m.amplitudes) << '\n';
        out << p << "phases = " << detail::format_list(m.phases) << '\n';
        out << p << "onset_time = " << detail::format_exact(m.onset_time) << '\n';
    }
    return out.str();
}

} // namespace memd
