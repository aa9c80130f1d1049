#include "cloudneg/cli.hpp"

#include <fstream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "cloudneg/scenario.hpp"
#include "cloudneg/simulation.hpp"
#include "cloudneg/transcript_io.hpp"

namespace cloudneg {

Command parse_args(const std::vector<std::string>& args) {
    Command cmd;
    CLI::App app{"Deterministic marketplace negotiation simulator", "cloudneg"};
    app.require_subcommand(1);

    std::uint64_t seed = 0;
    std::filesystem::path validate_scenario;
    int run_verbosity = 0;
    int validate_verbosity = 0;
    int report_verbosity = 0;
    auto* run = app.add_subcommand("run", "Run a scenario and write transcript and report");
    run->add_option("--scenario", cmd.scenario, "Scenario file")->required();
    auto* seed_opt = run->add_option("--seed", seed, "Seed (default 0)");
    run->add_option("--out", cmd.out, "Output directory");
    run->add_flag("-v,--verbose", run_verbosity, "Print the full report");

    auto* validate = app.add_subcommand("validate", "Check a scenario file");
    validate->add_option("--scenario", validate_scenario, "Scenario file")->required();
    validate->add_flag("-v,--verbose", validate_verbosity, "More output");

    auto* report = app.add_subcommand("report", "Summarize a transcript file");
    report->add_option("--transcript", cmd.transcript, "Transcript JSONL file")->required();
    report->add_flag("-v,--verbose", report_verbosity, "More output");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        throw UsageError(app.help(), true);
    } catch (const CLI::CallForAllHelp&) {
        throw UsageError(app.help("", CLI::AppFormatMode::All), true);
    } catch (const CLI::ParseError& e) {
        throw UsageError(e.what(), false);
    }

    if (run->parsed()) {
        cmd.verb = Verb::Run;
        cmd.verbosity = run_verbosity;
        if (seed_opt->count() > 0) cmd.seed = seed;
    } else if (validate->parsed()) {
        cmd.verb = Verb::Validate;
        cmd.scenario = validate_scenario;
        cmd.verbosity = validate_verbosity;
    } else {
        cmd.verb = Verb::Report;
        cmd.verbosity = report_verbosity;
    }
    return cmd;
}

namespace {

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error(fmt::format("cannot write {}", path.string()));
    f << content;
    if (!f) throw std::runtime_error(fmt::format("write failed for {}", path.string()));
}

int run(const Command& cmd, std::ostream& out, std::ostream& err) {
    const Scenario scenario = load_scenario_file(cmd.scenario);
    const SimulationResult result = run_simulation(scenario, cmd.seed);

    std::filesystem::create_directories(cmd.out);
    std::ostringstream transcript;
    write_transcript(transcript, result.transcript);
    std::ostringstream trust;
    write_trust_archive(trust, result.trust);
    const std::string report = emit_report(result.report);
    write_file(cmd.out / "transcript.jsonl", transcript.str());
    write_file(cmd.out / "trust.jsonl", trust.str());
    write_file(cmd.out / "report.txt", report);

    std::size_t agreed = 0;
    for (const auto& s : result.report.sessions) agreed += s.outcome == "agreed";
    if (cmd.verbosity > 0) {
        out << report.substr(0, report.find("\n--- records ---"));
    } else {
        out << fmt::format("ticks: {}  sessions: {}  agreed: {}\n", result.report.ticks,
                           result.report.sessions.size(), agreed);
    }
    if (cmd.verbosity > 1) err << fmt::format("wrote {}\n", cmd.out.string());
    return kExitOk;
}

int validate(const Command& cmd, std::ostream& out) {
    const Scenario scenario = load_scenario_file(cmd.scenario);
    out << "OK\n";
    if (cmd.verbosity > 0) {
        out << fmt::format("agents: {}  advertisements: {}  rfqs: {}  t_end: {}\n",
                           scenario.agents.size(), scenario.advertisements.size(),
                           scenario.rfqs.size(), scenario.t_end);
    }
    return kExitOk;
}

int report(const Command& cmd, std::ostream& out) {
    std::ifstream f(cmd.transcript);
    if (!f) throw std::runtime_error(fmt::format("cannot read {}", cmd.transcript.string()));
    out << summarize_transcript(read_transcript(f));
    return kExitOk;
}

}  // namespace

int execute(const Command& cmd, std::ostream& out, std::ostream& err) {
    try {
        switch (cmd.verb) {
            case Verb::Run: return run(cmd, out, err);
            case Verb::Validate: return validate(cmd, out);
            case Verb::Report: return report(cmd, out);
        }
    } catch (const ScenarioError& e) {
        err << fmt::format("{}: {}\n", cmd.scenario.string(), e.what());
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
    }
    return kExitFailure;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    Command cmd;
    try {
        cmd = parse_args(args);
    } catch (const UsageError& e) {
        if (e.help()) {
            out << e.what();
            return kExitOk;
        }
        err << e.what() << "\nRun with --help for usage.\n";
        return kExitUsage;
    }
    return execute(cmd, out, err);
}

}  // namespace cloudneg
