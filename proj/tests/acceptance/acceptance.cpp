// One PASS/FAIL line per acceptance criterion. Exit status is the number of
// failed criteria.

#include "../bivariate_oracle.hpp"
#include "../oracles.hpp"

#include "memd/config_file.hpp"
#include "memd/csv.hpp"
#include "memd/emd.hpp"
#include "memd/hilbert.hpp"
#include "memd/modes.hpp"
#include "memd/multivariate.hpp"
#include "memd/report.hpp"
#include "memd/synth.hpp"

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace memd;
namespace fs = std::filesystem;

namespace
{

const std::string kScenarios = MEMD_SCENARIO_DIR;
const std::string kCli = MEMD_CLI_PATH;

// Pinned tolerances.
constexpr double kTimeBudgetSeconds = 30.0;
constexpr double kReconstructionRelRms = 1e-8;
constexpr double kBivariateMaxAbs = 1e-10;
constexpr double kToneAmplitudeRel = 0.01;
constexpr double kToneFrequencyRel = 0.02;
constexpr double kModeFrequencyHz = 0.02;
constexpr double kEventBandLowHz = 0.18;
constexpr double kEventBandHighHz = 0.22;
constexpr double kCompassAgreementDeg = 15.0;
constexpr double kMixingShare = 0.30;
constexpr double kSeparationShare = 0.60;
constexpr int kMinCrestChannels = 10;
constexpr double kEnergyRel = 1e-12;
constexpr double kFastBandLow = 0.27, kFastBandHigh = 0.33;
constexpr double kSlowBandLow = 0.13, kSlowBandHigh = 0.17;
constexpr double kLocalBandLow = 0.9, kLocalBandHigh = 1.1;

struct Outcome
{
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, auto... args)
{
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

AnalysisSettings settings()
{
    return analysis_settings(read_key_values(kScenarios + "/analysis.cfg"));
}

ScenarioSpec scenario(const std::string& name)
{
    return parse_scenario(read_key_values(kScenarios + "/" + name + ".cfg"));
}

double band(std::span<const double> x, double rate, double lo, double hi)
{
    return oracle::band_energy(x, rate, lo, hi);
}

/// 1. Sum of IMFs plus residue equals the input.
Outcome reconstruction()
{
    const auto cfg = settings().decomposition;
    double worst = 0.0;
    int records = 0;
    for (std::size_t n : {1u, 2u, 3u, 8u, 12u}) {
        for (std::size_t T : {500u, 3000u}) {
            for (std::uint64_t seed = 0; seed < 5; ++seed) {
                std::mt19937_64 rng(1000 * n + 10 * T + seed);
                std::normal_distribution<double> g;
                std::uniform_real_distribution<double> u(0.05, 1.5);
                std::vector<std::vector<double>> ch(n, std::vector<double>(T));
                const double f = u(rng);
                for (std::size_t c = 0; c < n; ++c) {
                    const auto tone = oracle::sine(f, 10.0, T, u(rng), 6.0 * u(rng));
                    for (std::size_t t = 0; t < T; ++t)
                        ch[c][t] = 60.0 + tone[t] + 0.3 * g(rng);
                }
                const auto rec = build_record(ch, 10.0);
                const auto back = reconstruct(memd_decompose(rec, cfg));
                for (std::size_t c = 0; c < n; ++c) {
                    double err = 0.0, ref = 0.0;
                    for (std::size_t t = 0; t < T; ++t) {
                        const double d = back.channel(c)[t] - ch[c][t];
                        err += d * d;
                        ref += ch[c][t] * ch[c][t];
                    }
                    worst = std::max(worst, std::sqrt(err / ref));
                }
                ++records;
            }
        }
    }
    return {worst <= kReconstructionRelRms, fmt("%d records, worst relative RMS %.3g", records, worst)};
}

/// 2. Single-channel MEMD is univariate EMD, bitwise.
Outcome single_channel_equivalence()
{
    const auto cfg = settings().decomposition;
    int equal = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        std::mt19937_64 rng(seed);
        std::normal_distribution<double> g;
        const std::size_t T = 500 + 100 * (seed % 5);
        auto x = oracle::sine(0.2 + 0.05 * static_cast<double>(seed), 10.0, T);
        for (auto& v : x)
            v += 0.4 * g(rng);
        const auto rec = build_record({x}, 10.0, {"ch1"});
        if (memd_decompose(rec, cfg) == emd_decompose(rec.channel(0), cfg, "ch1"))
            ++equal;
    }
    return {equal == 20, fmt("%d of 20 cases bitwise equal", equal)};
}

/// 3. The complex-valued bivariate procedure and the direction-projection
/// procedure agree when both use the same directions and mean scaling.
Outcome bivariate_equivalence()
{
    constexpr int kDirections = 16;
    constexpr int kSift = 10;
    constexpr int kImfs = 4;
    double worst = 0.0;
    bool counts_match = true;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        std::mt19937_64 rng(500 + seed);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        const std::size_t T = 800;
        std::vector<double> a(T, 0.0), b(T, 0.0);
        for (int k = 0; k < 3; ++k) {
            const double f = 0.05 + 1.2 * u(rng);
            const double pa = 6.3 * u(rng), pb = 6.3 * u(rng), aa = 0.3 + u(rng), ab = 0.3 + u(rng);
            for (std::size_t t = 0; t < T; ++t) {
                const double w = 2.0 * std::numbers::pi * f * static_cast<double>(t) / 10.0;
                a[t] += aa * std::sin(w + pa);
                b[t] += ab * std::sin(w + pb);
            }
        }
        const auto rec = build_record({a, b}, 10.0);
        for (auto norm : {MeanNormalization::BackProjection2D, MeanNormalization::Average}) {
            DecompositionConfig cfg;
            cfg.direction_count = kDirections;
            cfg.max_sift_iterations = kSift;
            cfg.max_imfs = kImfs;
            cfg.mean_normalization = norm;
            const auto set = memd_decompose(rec, generate_directions(2, kDirections, DirectionScheme::UniformAngles2D),
                                            cfg);
            const double scale = norm == MeanNormalization::Average ? 1.0 : 2.0;
            const auto ref = oracle::bivariate_emd(a, b, kDirections, scale, cfg.sd_threshold, kSift, kImfs,
                                                   cfg.n_mirror);
            if (set.imf_count() != ref.imfs.size()) {
                counts_match = false;
                continue;
            }
            for (std::size_t m = 0; m < set.imf_count(); ++m) {
                for (std::size_t t = 0; t < T; ++t) {
                    worst = std::max(worst, std::abs(set.imf(m, 0)[t] - ref.imfs[m][t].real()));
                    worst = std::max(worst, std::abs(set.imf(m, 1)[t] - ref.imfs[m][t].imag()));
                }
            }
            for (std::size_t t = 0; t < T; ++t) {
                worst = std::max(worst, std::abs(set.residue(0)[t] - ref.residue[t].real()));
                worst = std::max(worst, std::abs(set.residue(1)[t] - ref.residue[t].imag()));
            }
        }
    }
    return {counts_match && worst <= kBivariateMaxAbs,
            fmt("10 cases x 2 scalings, IMF counts %s, worst |diff| %.3g", counts_match ? "match" : "differ", worst)};
}

/// 4. Analytic amplitude and frequency of a pure tone.
Outcome pure_tone()
{
    const std::size_t T = 3000;
    const auto tr = analytic_trace(TimeSeries(oracle::sine(0.3, 10.0, T), 10.0));
    const auto r = interior(T);
    double worst_amp = 0.0;
    std::vector<double> f;
    for (std::size_t t = r.first; t < r.last; ++t) {
        worst_amp = std::max(worst_amp, std::abs(tr.amplitude[t] - 1.0));
        f.push_back(tr.inst_frequency[t]);
    }
    std::sort(f.begin(), f.end());
    const double med = 0.5 * (f[(f.size() - 1) / 2] + f[f.size() / 2]);
    const double ferr = std::abs(med - 0.3) / 0.3;
    return {worst_amp <= kToneAmplitudeRel && ferr <= kToneFrequencyRel,
            fmt("max |a-1| %.3g, median frequency %.6f Hz (rel err %.3g)", worst_amp, med, ferr)};
}

struct EuropeanRun
{
    GeneratedRecord gen;
    AnalysisResult result;
};

const EuropeanRun& european()
{
    static const EuropeanRun run = [] {
        auto gen = generate(scenario("european"));
        auto result = run_analysis(gen.record, settings());
        return EuropeanRun{std::move(gen), std::move(result)};
    }();
    return run;
}

/// 5. Two inter-area modes, one local mode and a trend.
Outcome european_modes()
{
    const auto& run = european();
    const auto& set = run.result.imfs;
    const auto& truth = run.gen.ground_truth;
    const auto inter = run.result.modes.top(ModeClass::InterAreaCandidate, 2);
    bool ok = inter.size() == 2;
    double f_fast = std::nan(""), f_slow = std::nan("");
    if (ok) {
        f_fast = std::max(inter[0].median_joint_frequency, inter[1].median_joint_frequency);
        f_slow = std::min(inter[0].median_joint_frequency, inter[1].median_joint_frequency);
        ok = std::abs(f_fast - 0.30) <= kModeFrequencyHz && std::abs(f_slow - 0.15) <= kModeFrequencyHz;
    }

    // The local mode lives in the first channel only.
    std::size_t local = 0;
    double best = -1.0;
    for (std::size_t m = 0; m < set.imf_count(); ++m) {
        const double e = band(set.imf(m, 0).samples(), 10.0, kLocalBandLow, kLocalBandHigh);
        if (e > best) {
            best = e;
            local = m;
        }
    }
    const auto local_class = run.result.summary[local].classification;

    // The trend IMF is the one most aligned with the generated drift.
    const std::size_t T = run.gen.record.length();
    std::vector<std::vector<double>> drift(truth.channel_count(), std::vector<double>(T));
    for (std::size_t n = 0; n < truth.channel_count(); ++n) {
        double mean = 0.0;
        for (std::size_t t = 0; t < T; ++t)
            mean += drift[n][t] = trend_value(truth, n, static_cast<double>(t) / truth.sample_rate);
        mean /= static_cast<double>(T);
        for (auto& v : drift[n])
            v -= mean;
    }
    std::size_t trend = 0;
    best = -std::numeric_limits<double>::infinity();
    for (std::size_t m = 0; m < set.imf_count(); ++m) {
        double dot = 0.0;
        for (std::size_t n = 0; n < truth.channel_count(); ++n)
            for (std::size_t t = 0; t < T; ++t)
                dot += set.imf(m, n)[t] * drift[n][t];
        if (dot > best) {
            best = dot;
            trend = m;
        }
    }
    const auto trend_class = run.result.summary[trend].classification;
    ok = ok && local_class == ModeClass::LocalMode && trend_class == ModeClass::Trend;
    return {ok, fmt("inter-area %.4f / %.4f Hz, 1.0 Hz IMF %zu is %s, drift IMF %zu is %s", f_fast, f_slow, local,
                    std::string(to_string(local_class)).c_str(), trend,
                    std::string(to_string(trend_class)).c_str())};
}

/// 6. Same dominant mode and compass before and after the event.
Outcome event_segments()
{
    const auto gen = generate(scenario("ei"));
    const auto s = settings();
    const std::size_t split = static_cast<std::size_t>(std::llround(gen.ground_truth.step_event->time * 10.0));
    const auto ambient = run_analysis(gen.record.slice(0, split), s);
    const auto event = run_analysis(gen.record.slice(split, gen.record.length()), s);
    const auto a = ambient.modes.top(ModeClass::InterAreaCandidate, 1);
    const auto b = event.modes.top(ModeClass::InterAreaCandidate, 1);
    if (a.empty() || b.empty())
        return {false, "no inter-area candidate in a segment"};
    const double fa = a[0].median_joint_frequency, fb = b[0].median_joint_frequency;
    double worst = 0.0;
    for (std::size_t n = 0; n < a[0].per_channel.size(); ++n) {
        const double d = std::remainder(a[0].per_channel[n].phase - b[0].per_channel[n].phase, 2.0 * std::numbers::pi);
        worst = std::max(worst, std::abs(d) * 180.0 / std::numbers::pi);
    }
    const auto in_band = [](double f) { return f >= kEventBandLowHz && f <= kEventBandHighHz; };
    return {in_band(fa) && in_band(fb) && worst <= kCompassAgreementDeg,
            fmt("ambient %.4f Hz, event %.4f Hz, worst compass difference %.1f deg", fa, fb, worst)};
}

/// 7. Univariate EMD mixes the two inter-area modes on the noisiest channel;
/// the multivariate decomposition separates them.
Outcome mode_mixing()
{
    const auto& run = european();
    const auto& truth = run.gen.ground_truth;
    std::size_t noisiest = 0;
    for (std::size_t n = 1; n < truth.channel_count(); ++n)
        if (truth.noise_channel_weights[n] > truth.noise_channel_weights[noisiest])
            noisiest = n;
    const auto& x = run.gen.record.channel(noisiest);
    const double total_fast = band(x.samples(), 10.0, kFastBandLow, kFastBandHigh);
    const double total_slow = band(x.samples(), 10.0, kSlowBandLow, kSlowBandHigh);

    const auto uni = emd_decompose(x, settings().decomposition);
    double mixed = 0.0;
    std::size_t mixed_imf = 0;
    for (std::size_t m = 0; m < uni.imf_count(); ++m) {
        const double both = std::min(band(uni.imf(m, 0).samples(), 10.0, kFastBandLow, kFastBandHigh) / total_fast,
                                     band(uni.imf(m, 0).samples(), 10.0, kSlowBandLow, kSlowBandHigh) / total_slow);
        if (both > mixed) {
            mixed = both;
            mixed_imf = m;
        }
    }

    const auto& set = run.result.imfs;
    double fast = 0.0, slow = 0.0;
    std::size_t fast_imf = 0, slow_imf = 0;
    for (std::size_t m = 0; m < set.imf_count(); ++m) {
        const double f = band(set.imf(m, noisiest).samples(), 10.0, kFastBandLow, kFastBandHigh) / total_fast;
        const double s = band(set.imf(m, noisiest).samples(), 10.0, kSlowBandLow, kSlowBandHigh) / total_slow;
        if (f > fast) {
            fast = f;
            fast_imf = m;
        }
        if (s > slow) {
            slow = s;
            slow_imf = m;
        }
    }
    const bool ok = mixed > kMixingShare && fast > kSeparationShare && slow > kSeparationShare && fast_imf != slow_imf;
    return {ok, fmt("channel %s: EMD IMF %zu holds >= %.2f of both bands; MEMD IMF %zu holds %.2f of 0.30 Hz, "
                    "IMF %zu holds %.2f of 0.15 Hz",
                    run.gen.record.ids()[noisiest].c_str(), mixed_imf, mixed, fast_imf, fast, slow_imf, slow)};
}

/// 8. FFT crest of the event record.
Outcome fft_crest()
{
    const auto gen = generate(scenario("ei"));
    const auto s = settings();
    const auto spec = run_spectrum(gen.record, s);
    const double bin = gen.record.sample_rate() / static_cast<double>(gen.record.length());
    int hits = 0;
    for (const auto& c : spec.crests)
        if (std::abs(c.crest.frequency - 0.20) <= bin + 1e-12)
            ++hits;
    return {hits >= kMinCrestChannels, fmt("%d of %zu channels within one bin (%.4f Hz) of 0.20 Hz", hits,
                                           spec.crests.size(), bin)};
}

/// 9. IMF energy against a scalar loop; ranking under channel permutation.
Outcome energy_oracle()
{
    double worst = 0.0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        std::mt19937_64 rng(77 + seed);
        std::normal_distribution<double> g(0.0, 1.0 + static_cast<double>(seed));
        const std::size_t n = 1 + seed % 12, T = 200 + 37 * seed;
        std::vector<TimeSeries> imf, residue;
        std::vector<std::vector<double>> raw(n, std::vector<double>(T));
        for (std::size_t c = 0; c < n; ++c) {
            for (auto& v : raw[c])
                v = g(rng);
            imf.emplace_back(raw[c], 10.0);
            residue.emplace_back(std::vector<double>(T, 0.0), 10.0);
        }
        const ImfSet set({imf}, residue, std::vector<std::string>(n, "c"));
        double loop = 0.0;
        for (std::size_t t = 0; t < T; ++t)
            for (std::size_t c = 0; c < n; ++c)
                loop += raw[c][t] * raw[c][t];
        worst = std::max(worst, std::abs(imf_energy(0, set) - loop) / loop);
    }

    const auto& set = european().result.imfs;
    const std::vector<std::size_t> perm = {2, 0, 1};
    std::vector<std::vector<TimeSeries>> rows;
    for (std::size_t m = 0; m < set.imf_count(); ++m) {
        std::vector<TimeSeries> row;
        for (auto p : perm)
            row.push_back(set.imf(m, p));
        rows.push_back(std::move(row));
    }
    std::vector<TimeSeries> residue;
    std::vector<std::string> ids;
    for (auto p : perm) {
        residue.push_back(set.residue(p));
        ids.push_back(set.channel_ids()[p]);
    }
    const ImfSet permuted(std::move(rows), std::move(residue), ids);
    const auto th = settings().thresholds;
    const auto before = rank_modes(set, all_imf_traces(set), th);
    const auto after = rank_modes(permuted, all_imf_traces(permuted), th);
    bool same = before.ranked.size() == after.ranked.size();
    for (std::size_t i = 0; same && i < before.ranked.size(); ++i)
        same = before.ranked[i].imf_index == after.ranked[i].imf_index &&
               before.ranked[i].classification == after.ranked[i].classification;
    return {worst <= kEnergyRel && same,
            fmt("worst relative energy error %.3g; ranking %s under channel permutation", worst,
                same ? "unchanged" : "changed")};
}

int run_cli(const std::string& args)
{
    const int status = std::system((kCli + " " + args + " > /dev/null 2>&1").c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/// 10. Two end-to-end analyze runs give byte-identical reports.
Outcome determinism()
{
    const auto dir = fs::temp_directory_path() / "memd_acceptance_determinism";
    fs::remove_all(dir);
    fs::create_directories(dir);
    const auto csv = (dir / "european.csv").string();
    const auto cfg = kScenarios + "/analysis.cfg";
    int rc = run_cli("generate --config " + kScenarios + "/european.cfg --output " + csv);
    rc |= run_cli("analyze --input " + csv + " --config " + cfg + " --emit-traces --out-dir " + (dir / "a").string());
    rc |= run_cli("analyze --input " + csv + " --config " + cfg + " --emit-traces --out-dir " + (dir / "b").string());
    const auto a = slurp(dir / "a" / "report.json");
    const auto b = slurp(dir / "b" / "report.json");
    fs::remove_all(dir);
    return {rc == 0 && !a.empty() && a == b,
            fmt("exit status %d, report %zu bytes, %s", rc, a.size(), a == b ? "identical" : "different")};
}

} // namespace

int main()
{
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
        {"reconstruction identity", reconstruction},
        {"single-channel equivalence", single_channel_equivalence},
        {"bivariate procedure equivalence", bivariate_equivalence},
        {"pure-tone analytic signal", pure_tone},
        {"three-area mode identification", european_modes},
        {"ambient and event segments", event_segments},
        {"mode mixing contrast", mode_mixing},
        {"FFT baseline crest", fft_crest},
        {"IMF energy oracle", energy_oracle},
        {"report determinism", determinism},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (secs > kTimeBudgetSeconds) {
            o.pass = false;
            o.detail += fmt("; over the %.0f s budget", kTimeBudgetSeconds);
        }
        std::printf("%s criterion %zu: %s: %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", i + 1,
                    criteria[i].first.c_str(), o.detail.c_str(), secs);
        std::fflush(stdout);
        failed += o.pass ? 0 : 1;
    }
    return failed;
}
