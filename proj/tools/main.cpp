// vcachesim command-line front end: scenario runs, paired peering
// comparisons, offline rule derivation, validation, and report formatting.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "vcachesim/errors.hpp"
#include "vcachesim/interception.hpp"
#include "vcachesim/scenario.hpp"
#include "vcachesim/sim.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitConfig = 2;
constexpr int kExitIo = 3;

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

bool verbose() {
    const char* v = std::getenv("VCSIM_VERBOSE");
    return v != nullptr && *v != '\0' && std::string(v) != "0";
}

void note(const std::string& msg) {
    if (verbose()) std::cerr << "vcachesim: " << msg << "\n";
}

std::string readFile(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void writeFile(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out << content;
    if (!out) throw IoError("write failed for " + path.string());
}

void flattenJson(const json& node, const std::string& prefix, std::ostream& out) {
    if (node.is_object()) {
        for (auto it = node.begin(); it != node.end(); ++it)
            flattenJson(it.value(), prefix.empty() ? it.key() : prefix + "." + it.key(), out);
    } else if (node.is_array()) {
        for (std::size_t i = 0; i < node.size(); ++i)
            flattenJson(node[i], prefix + "[" + std::to_string(i) + "]", out);
    } else {
        out << prefix << ',' << node.dump() << '\n';
    }
}

std::string reportToCsv(const std::string& reportJson) {
    json root = json::parse(reportJson);
    std::ostringstream out;
    out << "key,value\n";
    flattenJson(root, "", out);
    return out.str();
}

void writeRunOutputs(const vcsim::SimResult& result, const fs::path& outDir,
                     const std::string& format) {
    fs::create_directories(outDir);
    if (format == "csv")
        writeFile(outDir / "report.csv", reportToCsv(result.report.toJsonString()));
    else
        writeFile(outDir / "report.json", result.report.toJsonString());
    {
        std::ostringstream trace;
        result.writeTraceCsv(trace);
        writeFile(outDir / "trace.csv", trace.str());
    }
    for (const auto& [tenant, log] : result.accessLogs) {
        std::ostringstream csv;
        log.writeCsv(csv);
        writeFile(outDir / ("accesslog_" + tenant + ".csv"), csv.str());
    }
    for (const auto& [tenant, rules] : result.finalRules) {
        std::ostringstream csv;
        rules.writeCsv(csv);
        writeFile(outDir / ("rules_" + tenant + ".csv"), csv.str());
    }
    if (!result.icpTrace.empty()) {
        std::ostringstream csv;
        result.writeIcpTraceCsv(csv);
        writeFile(outDir / "icp_trace.csv", csv.str());
    }
}

int cmdRun(const std::string& scenarioPath, std::uint64_t* seedOverride,
           const std::string& outDir, const std::string& format) {
    vcsim::ScenarioConfig cfg = vcsim::loadScenario(readFile(scenarioPath));
    if (seedOverride != nullptr) cfg.seed = *seedOverride;
    auto violations = vcsim::validateConfig(cfg);
    bool bad = false;
    for (const auto& v : violations) {
        std::cerr << (v.warning ? "warning: " : "error: ") << v.path << ": " << v.message << "\n";
        bad = bad || !v.warning;
    }
    if (bad) return kExitConfig;
    note("running scenario " + cfg.name);
    vcsim::SimResult result = vcsim::runScenario(cfg);
    writeRunOutputs(result, outDir, format);
    std::cout << result.report.toJsonString();
    return kExitOk;
}

int cmdCompare(const std::string& scenarioPath, std::uint64_t* seedOverride,
               const std::string& outDir) {
    vcsim::ScenarioConfig cfg = vcsim::loadScenario(readFile(scenarioPath));
    if (seedOverride != nullptr) cfg.seed = *seedOverride;
    auto violations = vcsim::validateConfig(cfg);
    bool bad = false;
    for (const auto& v : violations) {
        std::cerr << (v.warning ? "warning: " : "error: ") << v.path << ": " << v.message << "\n";
        bad = bad || !v.warning;
    }
    if (bad) return kExitConfig;
    vcsim::CompareResult result = vcsim::runCompare(cfg);
    writeRunOutputs(result.peeringOn, fs::path(outDir) / "peering-on", "json");
    writeRunOutputs(result.peeringOff, fs::path(outDir) / "peering-off", "json");
    writeFile(fs::path(outDir) / "compare.json", result.toJsonString());
    std::cout << result.toJsonString();
    return kExitOk;
}

int cmdDeriveRules(const std::string& logPath, double windowS, double threshold,
                   std::uint64_t minSamples, std::uint32_t tenant, double* nowOverride,
                   const std::string& outPath) {
    std::ifstream in(logPath);
    if (!in) throw IoError("cannot open " + logPath);
    vcsim::AccessLog log = vcsim::AccessLog::readCsv(in);
    double now = nowOverride != nullptr
                     ? *nowOverride
                     : (log.empty() ? 0.0 : log.records().back().time);
    vcsim::MissPredictorConfig cfg{windowS, minSamples, threshold};
    vcsim::RuleTable table = vcsim::deriveRules(log, cfg, now, tenant);
    std::ostringstream csv;
    table.writeCsv(csv);
    writeFile(outPath, csv.str());
    std::cout << "derived " << table.ruleCount() << " bypass rule(s) from " << log.size()
              << " record(s)\n";
    return kExitOk;
}

int cmdValidate(const std::string& scenarioPath) {
    vcsim::ScenarioConfig cfg = vcsim::loadScenario(readFile(scenarioPath));
    auto violations = vcsim::validateConfig(cfg);
    bool bad = false;
    for (const auto& v : violations) {
        std::cout << (v.warning ? "warning: " : "error: ") << v.path << ": " << v.message << "\n";
        bad = bad || !v.warning;
    }
    if (bad) return kExitConfig;
    std::cout << "ok: " << cfg.name << " (" << cfg.tenants.size() << " tenant(s), "
              << cfg.peeringLinks.size() << " peering link(s))\n";
    return kExitOk;
}

int cmdReport(const std::string& inPath, const std::string& format) {
    std::string text = readFile(inPath);
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        throw vcsim::ParseError(std::string("report parse error: ") + e.what());
    }
    if (format == "csv") {
        std::ostringstream out;
        out << "key,value\n";
        flattenJson(root, "", out);
        std::cout << out.str();
        return kExitOk;
    }
    std::cout << "scenario: " << root.value("scenario", std::string("?")) << "  seed "
              << root.value("seed", 0) << "\n";
    const json& g = root.at("global");
    std::cout << "requests: " << g.value("requests", 0) << "\n";
    if (g.contains("servedBy")) {
        const json& s = g["servedBy"];
        std::cout << "served by: local " << s.value("local", 0) << ", peer " << s.value("peer", 0)
                  << ", origin " << s.value("origin", 0) << ", bypassed "
                  << s.value("originBypassed", 0) << "\n";
    }
    if (g.contains("latencyMs"))
        std::cout << "latency ms: mean " << g["latencyMs"].value("mean", 0.0) << ", median "
                  << g["latencyMs"].value("median", 0.0) << ", p95 "
                  << g["latencyMs"].value("p95", 0.0) << "\n";
    std::cout << "vi traversals mean: " << g.value("viTraversalsMean", 0.0) << "\n";
    std::cout << "wan bytes: " << g.value("wanBytes", 0) << ", peering bytes served: "
              << g.value("peeringBytesServed", 0) << "\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"deterministic cache-peering simulator for co-located virtual operators"};
    app.require_subcommand(1);

    std::string scenarioPath, outDir = "out", format = "json", logPath, outPath, inPath;
    std::uint64_t seed = 0;
    bool seedSet = false;
    double windowS = 300.0, threshold = 0.8, now = 0.0;
    bool nowSet = false;
    std::uint64_t minSamples = 10;
    std::uint32_t tenant = 0;

    CLI::App* run = app.add_subcommand("run", "run a scenario and write report + traces");
    run->add_option("--scenario", scenarioPath, "scenario file")->required();
    run->add_option("--seed", seed, "override the scenario seed")->each([&](const std::string&) {
        seedSet = true;
    });
    run->add_option("--out", outDir, "output directory (default: out)");
    run->add_option("--format", format, "report format: json|csv")
        ->check(CLI::IsMember({"json", "csv"}));

    CLI::App* compare =
        app.add_subcommand("compare", "paired runs: peering as configured vs disabled");
    compare->add_option("--scenario", scenarioPath, "scenario file")->required();
    compare->add_option("--seed", seed, "override the scenario seed")
        ->each([&](const std::string&) { seedSet = true; });
    compare->add_option("--out", outDir, "output directory (default: out)");

    CLI::App* derive = app.add_subcommand("derive-rules", "derive bypass rules from an access log");
    derive->add_option("--log", logPath, "access log CSV")->required();
    derive->add_option("--out", outPath, "rule table CSV to write")->required();
    derive->add_option("--window", windowS, "derivation window in seconds (default 300)");
    derive->add_option("--threshold", threshold, "miss-ratio threshold (default 0.8)");
    derive->add_option("--min-samples", minSamples, "minimum samples per destination (default 10)");
    derive->add_option("--tenant", tenant, "tenant id stamped into the table (default 0)");
    derive->add_option("--now", now, "derivation time (default: last log record)")
        ->each([&](const std::string&) { nowSet = true; });

    CLI::App* validate = app.add_subcommand("validate", "check a scenario file");
    validate->add_option("--scenario", scenarioPath, "scenario file")->required();

    CLI::App* report = app.add_subcommand("report", "pretty-print or flatten a report file");
    report->add_option("--in", inPath, "report.json produced by run")->required();
    report->add_option("--format", format, "table|csv")->check(CLI::IsMember({"table", "csv"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (run->parsed())
            return cmdRun(scenarioPath, seedSet ? &seed : nullptr, outDir, format);
        if (compare->parsed())
            return cmdCompare(scenarioPath, seedSet ? &seed : nullptr, outDir);
        if (derive->parsed())
            return cmdDeriveRules(logPath, windowS, threshold, minSamples, tenant,
                                  nowSet ? &now : nullptr, outPath);
        if (validate->parsed()) return cmdValidate(scenarioPath);
        if (report->parsed()) return cmdReport(inPath, format == "csv" ? "csv" : "table");
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const vcsim::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const vcsim::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const vcsim::NoPeeringDefinedError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const vcsim::SimError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    }
    return kExitUsage;
}
