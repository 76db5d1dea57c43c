#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "doctest.h"

namespace {

const std::string kCli = TSCUBE_CLI_PATH;

struct RunResult {
    int status = -1;
    std::string output;  // stdout and stderr interleaved
};

RunResult run(const std::string& command) {
    RunResult result;
    FILE* pipe = popen((command + " 2>&1").c_str(), "r");
    if (!pipe) return result;
    char buffer[4096];
    std::size_t n;
    while ((n = std::fread(buffer, 1, sizeof buffer, pipe)) > 0) result.output.append(buffer, n);
    const int rc = pclose(pipe);
    if (WIFEXITED(rc)) result.status = WEXITSTATUS(rc);
    return result;
}

std::string cli() { return "'" + kCli + "'"; }

std::string temp_path(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path();
    return (dir / ("tscube_cli_" + std::to_string(::getpid()) + "_" + name)).string();
}

std::vector<std::string> lines_of(const std::string& text) {
    std::vector<std::string> lines;
    std::string current;
    for (char c : text) {
        if (c == '\n') {
            lines.push_back(current);
            current.clear();
        } else {
            current += c;
        }
    }
    if (!current.empty()) lines.push_back(current);
    return lines;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("a generated document validates cleanly through a pipe") {
    const RunResult result =
        run(cli() + " generate simple --seed 3 --rows 5 | " + cli() + " validate -");
    CHECK(result.status == 0);
    CHECK(result.output.empty());
}

TEST_CASE("generate writes files and parse canonicalizes aliases") {
    const std::string path = temp_path("gen.xml");
    CHECK(run(cli() + " generate hardness --seed 2 --rows 4 --out '" + path + "'").status == 0);
    std::ifstream stream(path);
    REQUIRE(stream);
    std::string first;
    std::getline(stream, first);
    CHECK(first == "<?xml version=\"1.0\" encoding=\"UTF-8\"?>");
    std::filesystem::remove(path);

    const RunResult canon = run(
        "printf '%s' '<VOTABLE><RESOURCE><TABLE>"
        "<FIELD ID=\"x\" datatype=\"double\"/>"
        "</TABLE></RESOURCE></VOTABLE>' | " +
        cli() + " parse -");
    CHECK(canon.status == 0);
    CHECK(canon.output.find("datatype=\"float64\"") != std::string::npos);
    CHECK(canon.output.find("double") == std::string::npos);
}

TEST_CASE("validate flags a broken product type and honors --format") {
    const std::string path = temp_path("broken.xml");
    const RunResult gen = run(cli() + " generate simple --seed 5 --rows 6");
    REQUIRE(gen.status == 0);
    std::string xml = gen.output;
    const std::string needle = "value=\"timeseries\"";
    const std::size_t at = xml.find(needle);
    REQUIRE(at != std::string::npos);
    xml.replace(at, needle.size(), "value=\"image\"");
    std::ofstream(path) << xml;

    RunResult result = run(cli() + " validate '" + path + "'");
    CHECK(result.status == 1);
    CHECK(result.output.find("ERROR TSC-001") == 0);
    CHECK(result.output.find("dataProductType is 'image'") != std::string::npos);

    result = run(cli() + " validate --format records '" + path + "'");
    CHECK(result.status == 1);
    CHECK(result.output.find("error\tTSC-001\t") == 0);
    std::filesystem::remove(path);
}

TEST_CASE("usage and IO failures exit 2") {
    CHECK(run(cli() + " validate /no/such/file.xml").status == 2);
    CHECK(run("printf 'not xml' | " + cli() + " parse -").status == 2);
    CHECK(run(cli() + " nonsense").status == 2);
    CHECK(run(cli() + " generate simple --rows 0").status == 2);
    CHECK(run("true | " + cli() + " stats -").status == 2);
    CHECK(run("true | " + cli() + " validate - --format json").status == 2);
    CHECK(run(cli() + " generate unknown-case").status == 2);
}

TEST_CASE("help exits zero") {
    CHECK(run(cli() + " --help").status == 0);
    CHECK(run(cli() + " slice --help").status == 0);
}

TEST_CASE("stats prints count, moments and quantile lines") {
    const RunResult result = run(cli() + " generate simple --seed 3 --rows 5 | " + cli() +
                                 " stats - --column mag");
    CHECK(result.status == 0);
    const std::vector<std::string> lines = lines_of(result.output);
    REQUIRE(lines.size() == 8);
    CHECK(lines[0] == "count\t5");
    CHECK(lines[1].find("mean\t") == 0);
    CHECK(lines[2].find("sigma\t") == 0);
    CHECK(lines[3].find("min\t") == 0);
    CHECK(lines[4].find("max\t") == 0);
    CHECK(lines[5].find("quantile.p25\t") == 0);
    CHECK(lines[6].find("quantile.p50\t") == 0);
    CHECK(lines[7].find("quantile.p75\t") == 0);
}

TEST_CASE("custom quantile probabilities change the roster") {
    const RunResult result = run(cli() + " generate simple --seed 3 --rows 9 | " + cli() +
                                 " stats - --column flux --quantiles 0.1,0.9");
    CHECK(result.status == 0);
    CHECK(result.output.find("quantile.p10\t") != std::string::npos);
    CHECK(result.output.find("quantile.p90\t") != std::string::npos);
    CHECK(result.output.find("quantile.p25\t") == std::string::npos);
}

TEST_CASE("the slice pipeline closes over valid documents") {
    const RunResult result = run(cli() + " generate simple --seed 4 --rows 20 | " + cli() +
                                 " slice - --where hjd:: --sigma mag:0:1 | " + cli() +
                                 " validate -");
    CHECK(result.status == 0);
    CHECK(result.output.empty());
}

TEST_CASE("an all-pass slice reproduces the canonical bytes") {
    const std::string source = run(cli() + " generate simple --seed 6 --rows 8").output;
    const RunResult kept = run(cli() + " generate simple --seed 6 --rows 8 | " + cli() +
                               " slice - --where flux:0: --keep-stats");
    const RunResult rewritten =
        run(cli() + " generate simple --seed 6 --rows 8 | " + cli() + " slice - --where flux:0:");
    CHECK(kept.output == source);
    CHECK(rewritten.output == source);
}

TEST_CASE("slicing with kept statistics goes stale, loosening the tolerance hides it") {
    const std::string base = cli() + " generate simple --seed 7 --rows 20 | " + cli() +
                             " slice - --where hjd:2455199: --keep-stats | " + cli();
    const RunResult strict = run(base + " validate -");
    CHECK(strict.status == 1);
    CHECK(strict.output.find("TSC-020") != std::string::npos);
    CHECK(run(base + " validate - --stats-tol 1e9").status == 0);
}

TEST_CASE("export writes CRLF CSV for the primary table") {
    const RunResult result =
        run(cli() + " generate hardness --seed 2 --rows 4 | " + cli() + " export - --csv -");
    CHECK(result.status == 0);
    REQUIRE(result.output.size() > 2);
    CHECK(result.output.find("time,hardnessRatio,hr_error\r\n") == 0);
    std::size_t crlf = 0, pos = 0;
    while ((pos = result.output.find("\r\n", pos)) != std::string::npos) {
        ++crlf;
        pos += 2;
    }
    CHECK(crlf == 5);
}

TEST_CASE("links lists one row per URL") {
    const RunResult result = run(cli() + " generate provenance --seed 9 --rows 6 | " + cli() +
                                 " links - --column siap_link");
    CHECK(result.status == 0);
    const std::vector<std::string> lines = lines_of(result.output);
    REQUIRE(lines.size() == 6);
    CHECK(lines[0].find("0\thttps://siap.example.org/cutout?POS=") == 0);
    CHECK(lines[5].find("5\t") == 0);
}

TEST_CASE("obscore prints the single discovery line") {
    RunResult result = run(cli() + " generate filters --rows 4 | " + cli() + " obscore -");
    CHECK(result.status == 0);
    const std::vector<std::string> lines = lines_of(result.output);
    REQUIRE(lines.size() == 1);
    CHECK(lines[0].find("timeseries\t") == 0);
    CHECK(lines[0].find("filter-groups-42") != std::string::npos);
    CHECK(std::count(lines[0].begin(), lines[0].end(), '\t') == 6);
    CHECK(lines[0].ends_with("\t4\t1\t5"));

    result = run(cli() + " generate gravwave --rows 4 --samplings 8,16 | " + cli() + " obscore -");
    CHECK(result.status == 0);
    CHECK(result.output.find("\t4\t0\t0\n") != std::string::npos);
}

TEST_CASE("inspect names the dataset, axes and quantities") {
    const RunResult result =
        run(cli() + " generate simple --seed 3 --rows 6 | " + cli() + " inspect -");
    CHECK(result.status == 0);
    CHECK(result.output.find("dataset\n") == 0);
    CHECK(result.output.find("  creator\tTime Series Cube Corpus\n") != std::string::npos);
    CHECK(result.output.find("cube\tdataProductType=timeseries\n") != std::string::npos);
    CHECK(result.output.find("  independent\thjd\tmodel=time_frame\n") != std::string::npos);
    CHECK(result.output.find("  independent\tra,dec\tmodel=space_frame\n") != std::string::npos);
    CHECK(result.output.find("  dependent\tflux\n") != std::string::npos);
    CHECK(result.output.find("  mag\terror=mag_error\tstats=yes\n") != std::string::npos);
    CHECK(result.output.find("rows\t6\n") != std::string::npos);
}

}  // TEST_SUITE
