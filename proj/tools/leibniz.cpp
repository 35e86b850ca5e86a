#include "leibniz/scenario.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using leibniz::Scenario;
using nlohmann::json;

namespace
{

constexpr int kParseError = 2;

json read_document(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw leibniz::io::ParseError("cannot open " + path);
    try
    {
        return json::parse(in);
    }
    catch (const json::parse_error& e)
    {
        throw leibniz::io::ParseError(path + ": " + e.what());
    }
}

void write_file(const fs::path& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary);
    out << text;
    if (!out)
        throw std::runtime_error("cannot write " + path.string());
}

std::string utc_now()
{
    const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::ostringstream os;
    os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return os.str();
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Verification runner for nonsmooth Leibniz rules and stochastic dynamic programming"};
    app.require_subcommand(1);

    auto* list = app.add_subcommand("list", "Print the builtin scenario catalogue");

    std::string validate_file;
    auto* validate = app.add_subcommand("validate", "Parse and validate a scenario file");
    validate->add_option("file", validate_file, "Scenario file")->required();

    std::string run_file;
    std::string out_dir;
    std::optional<std::uint64_t> seed;
    std::size_t jobs = 1;
    bool strict = false;
    double tol_scale = 1;
    std::vector<std::string> builtins;
    bool all_builtins = false;
    auto* run = app.add_subcommand("run", "Run scenarios and write report.json, metadata.json and tables/");
    run->add_option("file", run_file, "Scenario file");
    run->add_option("--out", out_dir, "Output directory")->required();
    run->add_option("--seed", seed, "Seed overriding every scenario seed");
    run->add_option("--jobs", jobs, "Scenarios run concurrently")->check(CLI::PositiveNumber);
    run->add_flag("--strict", strict, "Hypothesis violations fail the run");
    run->add_option("--tol-scale", tol_scale, "Multiplier for scenario tolerances")->check(CLI::PositiveNumber);
    run->add_option("--builtin", builtins, "Builtin scenario to run (repeatable)");
    run->add_flag("--all-builtins", all_builtins, "Run the whole builtin catalogue");

    CLI11_PARSE(app, argc, argv);

    if (list->parsed())
    {
        const auto& all = leibniz::builtin_scenarios();
        std::size_t width = 0;
        for (const auto& s : all)
            width = std::max(width, s.name.size());
        for (const auto& s : all)
            std::cout << std::left << std::setw(static_cast<int>(width + 2)) << s.name << std::setw(10) << s.kind
                      << s.description << "\n";
        return 0;
    }

    if (validate->parsed())
    {
        try
        {
            const auto scenarios = leibniz::load_scenarios(read_document(validate_file));
            std::cout << "ok: " << scenarios.size() << " scenario(s)\n";
            return 0;
        }
        catch (const leibniz::io::ParseError& e)
        {
            std::cerr << "parse error: " << e.what() << "\n";
            return kParseError;
        }
    }

    std::vector<Scenario> scenarios;
    try
    {
        if (!run_file.empty())
            scenarios = leibniz::load_scenarios(read_document(run_file), seed);
        json extra = json::array();
        if (all_builtins)
            for (const auto& s : leibniz::builtin_scenarios())
                extra.push_back({{"builtin", s.name}});
        for (const auto& b : builtins)
            extra.push_back({{"builtin", b}});
        for (auto& s : leibniz::load_scenarios(extra, seed))
        {
            if (std::any_of(scenarios.begin(), scenarios.end(), [&](const auto& t) { return t.name == s.name; }))
                throw leibniz::io::ParseError("duplicate scenario name \"" + s.name + "\"");
            scenarios.push_back(std::move(s));
        }
    }
    catch (const leibniz::io::ParseError& e)
    {
        std::cerr << "parse error: " << e.what() << "\n";
        return kParseError;
    }

    leibniz::RunOptions opt;
    opt.seed = seed;
    opt.strict = strict;
    opt.tol_scale = tol_scale;
    const auto results = leibniz::run_all(scenarios, opt, jobs);

    try
    {
        const fs::path out(out_dir);
        fs::create_directories(out / "tables");
        write_file(out / "report.json", leibniz::render_report(results));
        for (const auto& r : results)
            for (const auto& [name, csv] : r.tables)
                write_file(out / "tables" / name, csv);
        json meta = {{"timestamp", utc_now()},
                     {"scenario_file", run_file},
                     {"scenarios", scenarios.size()},
                     {"seed", seed ? json(*seed) : json(nullptr)},
                     {"jobs", jobs},
                     {"strict", strict},
                     {"tol_scale", tol_scale}};
        write_file(out / "metadata.json", meta.dump(2) + "\n");
    }
    catch (const std::exception& e)
    {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }

    for (const auto& r : results)
    {
        std::size_t failed = 0;
        for (const auto& c : r.checks)
            failed += leibniz::fails_run(c, r.strict) ? 1 : 0;
        std::cout << (r.capacity_exceeded ? "CAPACITY " : failed ? "FAIL     " : "PASS     ") << r.name << " ("
                  << r.checks.size() << " checks, " << failed << " failing)\n";
    }
    return leibniz::exit_status(results);
}
