#include "memd/config_file.hpp"
#include "memd/csv.hpp"
#include "memd/error.hpp"
#include "memd/report.hpp"
#include "memd/synth.hpp"

#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

namespace fs = std::filesystem;

namespace
{

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitDegenerate = 3;
constexpr int kExitWrite = 4;

struct Options
{
    std::string input;
    std::string config;
    std::string out_dir = ".";
    std::string output;
    bool emit_traces = false;
    std::optional<std::int64_t> seed_override;
    std::optional<std::string> window;
};

memd::AnalysisSettings load_settings(const Options& o)
{
    memd::AnalysisSettings s;
    if (!o.config.empty())
        memd::apply(s, memd::read_key_values(o.config));
    if (o.seed_override)
        s.decomposition.rng_seed = static_cast<std::uint64_t>(*o.seed_override);
    if (o.window)
        s.window = memd::parse_window(*o.window);
    return s;
}

std::string record_id(const std::string& path)
{
    return fs::path(path).stem().string();
}

void ensure_dir(const std::string& dir)
{
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec)
        throw memd::Error(memd::ErrorCode::WriteError, "cannot create '" + dir + "': " + ec.message());
}

std::string in_dir(const std::string& dir, const std::string& name)
{
    return (fs::path(dir) / name).string();
}

int analyze(const Options& o)
{
    const auto settings = load_settings(o);
    const auto record = memd::read_csv_record(o.input);
    const auto result = memd::run_analysis(record, settings);
    ensure_dir(o.out_dir);
    const auto report = memd::analysis_report_json(result, record, settings, record_id(o.input), o.emit_traces);
    memd::write_text_file(in_dir(o.out_dir, "report.json"), memd::canonical_dump(report));
    if (o.emit_traces) {
        for (std::size_t m = 0; m < result.imfs.imf_count(); ++m)
            memd::write_text_file(in_dir(o.out_dir, "imf_" + std::to_string(m) + ".csv"),
                                  memd::format_imf_csv(result.imfs, m, result.traces[m]));
    }
    std::cout << "analyze: " << result.imfs.imf_count() << " IMFs, " << result.modes.ranked.size()
              << " ranked candidates -> " << in_dir(o.out_dir, "report.json") << '\n';
    return result.degenerate() ? kExitDegenerate : kExitOk;
}

int generate(const Options& o)
{
    auto scenario = memd::parse_scenario(memd::read_key_values(o.config));
    if (o.seed_override)
        scenario.seed = static_cast<std::uint64_t>(*o.seed_override);
    const auto generated = memd::generate(scenario);
    memd::write_csv_record(generated.record, o.output);
    std::cout << "generate: " << generated.record.channel_count() << " channels x " << generated.record.length()
              << " samples -> " << o.output << '\n';
    return kExitOk;
}

int compare(const Options& o)
{
    const auto settings = load_settings(o);
    const auto record = memd::read_csv_record(o.input);
    const auto cmp = memd::run_compare(record, settings);
    ensure_dir(o.out_dir);
    const auto report = memd::compare_report_json(cmp, record, settings, record_id(o.input));
    memd::write_text_file(in_dir(o.out_dir, "compare.json"), memd::canonical_dump(report));
    std::cout << "channel,memd_hz,fft_hz\n";
    for (std::size_t n = 0; n < record.channel_count(); ++n) {
        std::cout << record.ids()[n] << ',';
        if (cmp.dominant)
            std::cout << cmp.channel_frequencies[n];
        else
            std::cout << "none";
        std::cout << ',' << cmp.spectrum.crests[n].crest.frequency << '\n';
    }
    std::cout << "pooled,";
    if (cmp.dominant)
        std::cout << cmp.dominant->median_joint_frequency;
    else
        std::cout << "none";
    std::cout << ',' << cmp.spectrum.pooled_crest.frequency << '\n';
    return cmp.analysis.degenerate() ? kExitDegenerate : kExitOk;
}

int spectrum(const Options& o)
{
    const auto settings = load_settings(o);
    const auto record = memd::read_csv_record(o.input);
    const auto s = memd::run_spectrum(record, settings);
    ensure_dir(o.out_dir);
    memd::write_text_file(in_dir(o.out_dir, "spectrum.csv"), memd::format_spectrum_csv(s, record));
    memd::write_text_file(in_dir(o.out_dir, "spectrum.json"),
                          memd::canonical_dump(memd::spectrum_report_json(s, record, settings, record_id(o.input))));
    std::cout << "spectrum: pooled crest " << s.pooled_crest.frequency << " Hz -> "
              << in_dir(o.out_dir, "spectrum.csv") << '\n';
    return kExitOk;
}

int exit_code_for(memd::ErrorCode code)
{
    return code == memd::ErrorCode::WriteError ? kExitWrite : kExitInput;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Multivariate EMD oscillation mode analysis"};
    app.require_subcommand(1);
    Options o;

    const auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--config", o.config, "Key = value analysis config")->check(CLI::ExistingFile);
        cmd->add_option("--out-dir", o.out_dir, "Directory for reports");
        cmd->add_option("--seed-override", o.seed_override, "Replace the direction-set seed");
        cmd->add_option("--window", o.window, "Spectrum window")->check(CLI::IsMember({"rect", "hann"}));
    };

    auto* analyze_cmd = app.add_subcommand("analyze", "Decompose a CSV record and classify its modes");
    analyze_cmd->add_option("--input", o.input, "Input CSV")->required();
    analyze_cmd->add_flag("--emit-traces", o.emit_traces, "Write per-IMF plot data and traces");
    add_common(analyze_cmd);

    auto* generate_cmd = app.add_subcommand("generate", "Synthesize a record from a scenario file");
    generate_cmd->add_option("--config", o.config, "Scenario file")->required()->check(CLI::ExistingFile);
    generate_cmd->add_option("--output", o.output, "Output CSV")->required();
    generate_cmd->add_option("--seed-override", o.seed_override, "Replace the scenario seed");

    auto* compare_cmd = app.add_subcommand("compare", "MEMD dominant mode against FFT spectral crests");
    compare_cmd->add_option("--input", o.input, "Input CSV")->required();
    add_common(compare_cmd);

    auto* spectrum_cmd = app.add_subcommand("spectrum", "FFT amplitude spectra and crests");
    spectrum_cmd->add_option("--input", o.input, "Input CSV")->required();
    add_common(spectrum_cmd);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitInput;
    }

    try {
        if (analyze_cmd->parsed())
            return analyze(o);
        if (generate_cmd->parsed())
            return generate(o);
        if (compare_cmd->parsed())
            return compare(o);
        return spectrum(o);
    } catch (const memd::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_code_for(e.code());
    }
}
