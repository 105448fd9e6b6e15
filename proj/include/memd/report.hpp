#pragma once

#include "memd/config_file.hpp"
#include "memd/csv.hpp"
#include "memd/error.hpp"
#include "memd/hilbert.hpp"
#include "memd/modes.hpp"
#include "memd/multivariate.hpp"
#include "memd/signal.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <cstdlib>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

namespace memd
{

inline constexpr const char* kToolVersion = "0.1.0";
inline constexpr const char* kSchemaVersion = "1";

using Json = nlohmann::json;

struct Warning
{
    std::string code;
    std::optional<std::size_t> imf;
    std::string message;
};

struct AnalysisResult
{
    ImfSet imfs;
    std::vector<ImfTraces> traces;
    /// Every IMF in index order.
    std::vector<ModeCandidate> summary;
    RankedModes modes;
    std::vector<Warning> warnings;

    bool degenerate() const noexcept { return imfs.imf_count() == 0; }
};

/// Decomposition, Hilbert traces, classification and warnings for `record`.
inline AnalysisResult run_analysis(const MultichannelRecord& record, const AnalysisSettings& settings)
{
    AnalysisResult out{memd_decompose(record, settings.decomposition), {}, {}, {}, {}};
    out.traces = all_imf_traces(out.imfs, settings.analytic);
    out.modes = rank_modes(out.imfs, out.traces, settings.thresholds);
    out.summary = out.modes.ranked;
    out.summary.insert(out.summary.end(), out.modes.excluded.begin(), out.modes.excluded.end());
    std::sort(out.summary.begin(), out.summary.end(),
              [](const ModeCandidate& a, const ModeCandidate& b) { return a.imf_index < b.imf_index; });

    auto& w = out.warnings;
    if (out.degenerate()) {
        w.push_back({"no_imfs", std::nullopt,
                     "no projection of the record has enough extrema to extract an IMF; the residue is the input"});
        return out;
    }
    const auto edge = static_cast<std::size_t>(std::floor(0.05 * static_cast<double>(record.length())));
    w.push_back({"low_confidence_edges", std::nullopt,
                 "instantaneous frequency in the first and last " + std::to_string(edge) +
                     " samples is low confidence"});
    for (std::size_t m = 0; m < out.imfs.imf_count(); ++m) {
        const auto& d = out.imfs.diagnostics(m);
        if (d.exhausted)
            w.push_back({"sift_iteration_cap", m,
                         "sifting stopped at the iteration cap (" + std::to_string(d.sift_iterations) +
                             ") with SD " + std::to_string(d.last_sd)});
        if (d.max_degenerate_directions > 0)
            w.push_back({"degenerate_directions", m,
                         std::to_string(d.max_degenerate_directions) + " of " + std::to_string(d.direction_count) +
                             " directions had fewer than two maxima in some sift"});
        const auto& c = out.summary[m];
        if (c.undefined_frequency_samples > 0)
            w.push_back({"undefined_frequency", m,
                         std::to_string(c.undefined_frequency_samples) +
                             " interior samples have joint amplitude below the floor"});
        if (c.negative_frequency_samples > 0)
            w.push_back({"negative_frequency", m,
                         std::to_string(c.negative_frequency_samples) +
                             " interior samples have negative joint frequency"});
    }
    return out;
}

namespace detail
{

/// Rounds to 6 significant digits for human-facing fields; non-finite
/// values become null.
inline Json round6(double v)
{
    if (!std::isfinite(v))
        return nullptr;
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return std::strtod(buf, nullptr);
}

inline Json warnings_json(const std::vector<Warning>& warnings)
{
    Json out = Json::array();
    for (const auto& w : warnings) {
        Json j{{"code", w.code}, {"message", w.message}};
        j["imf"] = w.imf ? Json(*w.imf) : Json(nullptr);
        out.push_back(std::move(j));
    }
    return out;
}

inline double degrees(double radians)
{
    return radians * 180.0 / std::numbers::pi;
}

} // namespace detail

/// Config-file keys and values that reproduce `s`.
inline KeyValues config_echo(const AnalysisSettings& s)
{
    const auto& d = s.decomposition;
    const auto& th = s.thresholds;
    const auto num = [](double v) { return detail::format_exact(v); };
    return {
        {"sd_threshold", num(d.sd_threshold)},
        {"direction_count", std::to_string(d.direction_count)},
        {"max_sift_iterations", std::to_string(d.max_sift_iterations)},
        {"max_imfs", std::to_string(d.max_imfs)},
        {"n_mirror", std::to_string(d.n_mirror)},
        {"rng_seed", std::to_string(d.rng_seed)},
        {"boundary_policy", "mirror_extrema"},
        {"direction_scheme", std::string(to_string(d.direction_scheme))},
        {"mean_normalization", std::string(to_string(d.mean_normalization))},
        {"trend_frequency_hz", num(th.trend_frequency_hz)},
        {"trend_circular_variance", num(th.trend_circular_variance)},
        {"local_share", num(th.local_share)},
        {"noise_frequency_hz", num(th.noise_frequency_hz)},
        {"min_coherence", num(th.min_coherence)},
        {"interior_fraction", num(th.interior_fraction)},
        {"amplitude_floor", num(s.analytic.amplitude_floor)},
        {"smooth_frequency", s.analytic.smooth_frequency ? "true" : "false"},
        {"window", std::string(to_string(s.window))},
        {"crest_band_low_hz", num(s.crest_band_low_hz)},
        {"crest_band_high_hz", num(s.crest_band_high_hz)},
        {"min_crest_prominence", num(s.min_crest_prominence)},
    };
}

inline Json metadata_json(const MultichannelRecord& record, const AnalysisSettings& settings,
                          const std::string& record_id)
{
    Json config = Json::object();
    for (const auto& [k, v] : config_echo(settings))
        config[k] = v;
    return Json{
        {"record_id", record_id},
        {"channel_count", record.channel_count()},
        {"sample_count", record.length()},
        {"sample_rate", detail::round6(record.sample_rate())},
        {"start_time", detail::round6(record.t0())},
        {"channel_ids", record.ids()},
        {"tool_version", kToolVersion},
        {"config", std::move(config)},
    };
}

inline Json candidate_json(const ModeCandidate& c)
{
    return Json{
        {"imf", c.imf_index},
        {"energy", detail::round6(c.energy)},
        {"classification", std::string(to_string(c.classification))},
        {"median_joint_frequency", detail::round6(c.median_joint_frequency)},
        {"mean_joint_amplitude", detail::round6(c.mean_joint_amplitude)},
        {"phase_circular_variance", detail::round6(c.phase_circular_variance)},
        {"max_channel_share", detail::round6(c.max_channel_share)},
        {"coherence", detail::round6(c.coherence)},
    };
}

inline Json analysis_report_json(const AnalysisResult& result, const MultichannelRecord& record,
                                 const AnalysisSettings& settings, const std::string& record_id,
                                 bool include_traces)
{
    Json report;
    report["schema_version"] = kSchemaVersion;
    report["metadata"] = metadata_json(record, settings, record_id);

    Json summary = Json::array();
    for (const auto& c : result.summary) {
        auto j = candidate_json(c);
        const auto& d = result.imfs.diagnostics(c.imf_index);
        j["sift_iterations"] = d.sift_iterations;
        j["iteration_cap_hit"] = d.exhausted;
        summary.push_back(std::move(j));
    }
    report["imf_summary"] = std::move(summary);

    Json ranked = Json::array();
    std::size_t rank = 0;
    for (const auto& c : result.modes.ranked) {
        auto j = candidate_json(c);
        j["rank"] = ++rank;
        Json compass = Json::array();
        for (const auto& e : c.per_channel)
            compass.push_back({{"channel", e.channel_id},
                               {"amplitude", detail::round6(e.amplitude)},
                               {"phase_deg", detail::round6(detail::degrees(e.phase))}});
        j["compass"] = std::move(compass);
        ranked.push_back(std::move(j));
    }
    report["ranked_modes"] = std::move(ranked);
    report["residue_energy"] = detail::round6([&] {
        double e = 0.0;
        for (const auto& r : result.imfs.residues())
            for (double v : r.samples())
                e += v * v;
        return e;
    }());

    if (include_traces) {
        Json traces = Json::array();
        for (std::size_t m = 0; m < result.traces.size(); ++m) {
            Json f = Json::array(), a = Json::array();
            for (double v : result.traces[m].joint.joint_frequency)
                f.push_back(detail::round6(v));
            for (double v : result.traces[m].joint.joint_amplitude)
                a.push_back(detail::round6(v));
            traces.push_back({{"imf", m}, {"joint_frequency", std::move(f)}, {"joint_amplitude", std::move(a)}});
        }
        report["traces"] = std::move(traces);
    }
    report["warnings"] = detail::warnings_json(result.warnings);
    return report;
}

/// Sorted keys, two-space indent, trailing newline.
inline std::string canonical_dump(const Json& j)
{
    return j.dump(2) + "\n";
}

struct ChannelCrest
{
    std::string channel_id;
    SpectralCrest crest;
};

struct SpectrumResult
{
    std::vector<AmplitudeSpectrum> channels;
    AmplitudeSpectrum pooled;
    std::vector<ChannelCrest> crests;
    SpectralCrest pooled_crest;
    std::vector<Warning> warnings;
};

inline SpectrumResult run_spectrum(const MultichannelRecord& record, const AnalysisSettings& settings)
{
    SpectrumResult out;
    const SpectrumOptions opts{settings.window, true};
    for (const auto& c : record.channels())
        out.channels.push_back(fft_amplitude_spectrum(c, opts));
    out.pooled = pooled_spectrum(out.channels);
    for (std::size_t n = 0; n < record.channel_count(); ++n) {
        const auto crest = spectral_crest(out.channels[n], settings.crest_band_low_hz, settings.crest_band_high_hz);
        out.crests.push_back({record.ids()[n], crest});
        if (crest.prominence < settings.min_crest_prominence)
            out.warnings.push_back({"low_crest_prominence", std::nullopt,
                                    "channel " + record.ids()[n] + ": crest prominence " +
                                        std::to_string(crest.prominence) + " is below " +
                                        std::to_string(settings.min_crest_prominence)});
    }
    out.pooled_crest = spectral_crest(out.pooled, settings.crest_band_low_hz, settings.crest_band_high_hz);
    if (out.pooled_crest.prominence < settings.min_crest_prominence)
        out.warnings.push_back({"low_crest_prominence", std::nullopt,
                                "pooled spectrum: crest prominence " + std::to_string(out.pooled_crest.prominence) +
                                    " is below " + std::to_string(settings.min_crest_prominence)});
    return out;
}

inline Json crest_json(const SpectralCrest& c)
{
    return Json{{"bin", c.bin},
                {"frequency", detail::round6(c.frequency)},
                {"amplitude", detail::round6(c.amplitude)},
                {"prominence", detail::round6(c.prominence)}};
}

inline Json spectrum_report_json(const SpectrumResult& s, const MultichannelRecord& record,
                                 const AnalysisSettings& settings, const std::string& record_id)
{
    Json per_channel = Json::array();
    for (const auto& c : s.crests) {
        auto j = crest_json(c.crest);
        j["channel"] = c.channel_id;
        per_channel.push_back(std::move(j));
    }
    return Json{
        {"schema_version", kSchemaVersion},
        {"metadata", metadata_json(record, settings, record_id)},
        {"resolution_hz", detail::round6(record.sample_rate() / static_cast<double>(record.length()))},
        {"band_hz", {detail::round6(settings.crest_band_low_hz), detail::round6(settings.crest_band_high_hz)}},
        {"window", std::string(to_string(settings.window))},
        {"crests", std::move(per_channel)},
        {"pooled_crest", crest_json(s.pooled_crest)},
        {"warnings", detail::warnings_json(s.warnings)},
    };
}

/// Frequency, one amplitude column per channel, and the pooled amplitude.
inline std::string format_spectrum_csv(const SpectrumResult& s, const MultichannelRecord& record)
{
    std::string out = "frequency";
    for (const auto& id : record.ids())
        out += "," + id;
    out += ",pooled\n";
    for (std::size_t k = 0; k < s.pooled.frequencies.size(); ++k) {
        out += detail::format_17(s.pooled.frequencies[k]);
        for (const auto& c : s.channels)
            out += "," + detail::format_17(c.amplitudes[k]);
        out += "," + detail::format_17(s.pooled.amplitudes[k]) + "\n";
    }
    return out;
}

struct Comparison
{
    AnalysisResult analysis;
    SpectrumResult spectrum;
    /// Top-ranked inter-area candidate, if any.
    std::optional<ModeCandidate> dominant;
    /// Median instantaneous frequency of the dominant IMF in each channel.
    std::vector<double> channel_frequencies;
    std::vector<Warning> warnings;
};

inline Comparison run_compare(const MultichannelRecord& record, const AnalysisSettings& settings)
{
    Comparison out{run_analysis(record, settings), run_spectrum(record, settings), std::nullopt, {}, {}};
    out.warnings = out.analysis.warnings;
    out.warnings.insert(out.warnings.end(), out.spectrum.warnings.begin(), out.spectrum.warnings.end());
    const auto top = out.analysis.modes.top(ModeClass::InterAreaCandidate, 1);
    if (top.empty()) {
        out.warnings.push_back({"no_inter_area_candidate", std::nullopt, "no IMF classified as an inter-area candidate"});
        return out;
    }
    out.dominant = top.front();
    const auto& traces = out.analysis.traces[top.front().imf_index];
    const auto r = interior(record.length(), settings.thresholds.interior_fraction);
    for (const auto& c : traces.channels) {
        std::vector<double> f;
        for (std::size_t t = r.first; t < r.last; ++t) {
            if (c.defined(t))
                f.push_back(c.inst_frequency[t]);
        }
        out.channel_frequencies.push_back(detail::median(std::move(f)));
    }
    return out;
}

inline Json compare_report_json(const Comparison& c, const MultichannelRecord& record,
                                const AnalysisSettings& settings, const std::string& record_id)
{
    Json rows = Json::array();
    for (std::size_t n = 0; n < record.channel_count(); ++n) {
        rows.push_back({{"channel", record.ids()[n]},
                        {"memd_frequency", c.dominant ? detail::round6(c.channel_frequencies[n]) : Json(nullptr)},
                        {"fft_frequency", detail::round6(c.spectrum.crests[n].crest.frequency)},
                        {"fft_prominence", detail::round6(c.spectrum.crests[n].crest.prominence)}});
    }
    Json pooled{{"memd_frequency", c.dominant ? detail::round6(c.dominant->median_joint_frequency) : Json(nullptr)},
                {"fft_frequency", detail::round6(c.spectrum.pooled_crest.frequency)},
                {"fft_prominence", detail::round6(c.spectrum.pooled_crest.prominence)}};
    Json memd = c.dominant ? candidate_json(*c.dominant) : Json(nullptr);
    return Json{
        {"schema_version", kSchemaVersion},
        {"metadata", metadata_json(record, settings, record_id)},
        {"method", record.channel_count() == 1 ? "emd" : "memd"},
        {"dominant_mode", std::move(memd)},
        {"resolution_hz", detail::round6(record.sample_rate() / static_cast<double>(record.length()))},
        {"window", std::string(to_string(settings.window))},
        {"channels", std::move(rows)},
        {"pooled", std::move(pooled)},
        {"warnings", detail::warnings_json(c.warnings)},
    };
}

} // namespace memd
