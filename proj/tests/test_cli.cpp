// Black-box tests of the command-line surface: exit-code contract, JSON
// shape, cache byte-identity, scan determinism under parallelism.

#include <doctest.h>

#include <json.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct RunResult {
    int exit_code = -1;
    std::string out;
    std::string err;
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

fs::path test_dir() {
    fs::path d = fs::temp_directory_path() / "lowdisc_cli_tests";
    fs::create_directories(d);
    return d;
}

RunResult run_cli(const std::string& args, const std::string& env = "") {
    static int counter = 0;
    fs::path out = test_dir() / ("out" + std::to_string(counter) + ".txt");
    fs::path err = test_dir() / ("err" + std::to_string(counter) + ".txt");
    ++counter;
    std::string cmd = env + (env.empty() ? "" : " ") + std::string(LOWDISC_CLI_PATH) + " " +
                      args + " > " + out.string() + " 2> " + err.string();
    int rc = std::system(cmd.c_str());
    RunResult r;
    r.exit_code = WEXITSTATUS(rc);
    r.out = slurp(out);
    r.err = slurp(err);
    return r;
}

std::vector<std::string> lines_of(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream in(s);
    std::string line;
    while (std::getline(in, line)) out.push_back(line);
    return out;
}

}  // namespace

TEST_CASE("analyze: report JSON and exit 0 for -115147") {
    RunResult r = run_cli("analyze --disc -115147");
    REQUIRE(r.exit_code == 0);
    json j = json::parse(r.out);
    CHECK(j["disc"] == -115147);
    CHECK(j["satisfies_lowdef"] == true);
    CHECK(j["is_low"] == true);
    CHECK(j["lambda"].is_string());
    double lam = std::stod(j["lambda"].get<std::string>());
    CHECK(lam == doctest::Approx(-4.98563e-6).epsilon(1e-4));
    CHECK(j["stage_error"] == "");
}

TEST_CASE("analyze: -163 satisfies Lowdef but fails the Low criterion") {
    RunResult r = run_cli("analyze --disc -163");
    REQUIRE(r.exit_code == 0);
    json j = json::parse(r.out);
    CHECK(j["satisfies_lowdef"] == true);
    CHECK(j["is_low"] == false);
}

TEST_CASE("usage errors exit 1") {
    CHECK(run_cli("analyze --disc -10").exit_code == 1);       // not fundamental
    CHECK(run_cli("analyze").exit_code == 1);                  // missing --disc
    CHECK(run_cli("analyze --disc -163 --eps 1e-60").exit_code == 1);
    CHECK(run_cli("bogus-subcommand").exit_code == 1);
    CHECK(run_cli("scan --lo -5 --hi 5").exit_code == 1);      // nonnegative hi
    CHECK(run_cli("flow --disc -163 --m 0").exit_code == 1);
    CHECK(run_cli("flow --disc -163 --t-end 0.4 --m 60").exit_code == 2);  // beyond floor
}

TEST_CASE("numerical failures exit 2") {
    // 50 zeros of -163 need a lower noise floor than eps = 5e-16 allows
    RunResult r = run_cli("analyze --disc -163 --zeros 50");
    CHECK(r.exit_code == 2);
}

TEST_CASE("cache: second run returns byte-identical output") {
    fs::path cache = test_dir() / "cache_a";
    fs::remove_all(cache);
    std::string args = "analyze --disc -115147 --cache-dir " + cache.string();
    RunResult first = run_cli(args);
    REQUIRE(first.exit_code == 0);
    CHECK(fs::exists(cache));
    bool has_file = false;
    for (const auto& e : fs::directory_iterator(cache)) has_file |= e.is_regular_file();
    CHECK(has_file);
    RunResult second = run_cli(args);
    CHECK(second.exit_code == 0);
    CHECK(second.out == first.out);
}

TEST_CASE("cache honors the environment default directory") {
    fs::path cache = test_dir() / "cache_env";
    fs::remove_all(cache);
    std::string env = "LOWDISC_CACHE_DIR=" + cache.string();
    RunResult first = run_cli("analyze --disc -115147", env);
    REQUIRE(first.exit_code == 0);
    CHECK(fs::exists(cache));
    RunResult second = run_cli("analyze --disc -115147", env);
    CHECK(second.out == first.out);
}

TEST_CASE("scan: tiny ranges, counts, determinism across worker counts") {
    RunResult r = run_cli("scan --lo -10 --hi -3");
    REQUIRE(r.exit_code == 0);
    json j = json::parse(r.out);
    CHECK(j["fundamental_count"] == 4);
    CHECK(j["counts"]["positive-local-min"] == 4);
    CHECK(j["discriminants"].size() == 4);
    CHECK(j["discriminants"][0]["disc"] == -3);

    RunResult empty = run_cli("scan --lo -3 --hi -5");  // empty range
    CHECK(empty.exit_code == 0);
    json je = json::parse(empty.out);
    CHECK(je["fundamental_count"] == 0);

    RunResult j1 = run_cli("scan --lo -30 --hi -3 --jobs 1");
    RunResult j2 = run_cli("scan --lo -30 --hi -3 --jobs 3");
    CHECK(j1.exit_code == 0);
    CHECK(j1.out == j2.out);

    RunResult text = run_cli("scan --lo -10 --hi -3 --format csv");
    CHECK(text.exit_code == 0);
    CHECK(text.out.find("positive-local-min: 4") != std::string::npos);
}

TEST_CASE("flow: trajectory CSV shape, monotone mirror pair, t-end 0 identity") {
    RunResult r = run_cli("flow --disc -163 --m 4 --t-end 0.1 --samples 3");
    REQUIRE(r.exit_code == 0);
    auto ls = lines_of(r.out);
    REQUIRE(ls.size() == 4);
    CHECK(ls[0] == "t,x_1,x_2,x_3,x_4");
    // x_1 column strictly increasing
    double prev = -1;
    for (size_t i = 1; i < ls.size(); ++i) {
        auto comma = ls[i].find(',');
        double x1 = std::stod(ls[i].substr(comma + 1));
        CHECK(x1 > prev);
        prev = x1;
    }

    RunResult zero = run_cli("flow --disc -163 --m 3 --t-end 0");
    REQUIRE(zero.exit_code == 0);
    auto zl = lines_of(zero.out);
    REQUIRE(zl.size() == 2);  // header + the seed row
    CHECK(zl[1].substr(0, 2) == "0,");
}

TEST_CASE("flow: collision stop exits 2 and reports the stop time") {
    fs::path diag = test_dir() / "diag_collision.json";
    RunResult r = run_cli("flow --disc -115147 --m 6 --t-end -4.99e-6 --samples 2 --diag-out " +
                          diag.string());
    CHECK(r.exit_code == 2);
    json j = json::parse(slurp(diag));
    CHECK(j["status"] == "collision_stop");
    double stop = std::stod(j["stop_time"].get<std::string>());
    CHECK(stop < -4.5e-6);
    CHECK(stop > -4.99e-6);
}

TEST_CASE("flow: oracle check passes and lands in the diagnostics JSON") {
    fs::path diag = test_dir() / "diag_oracle.json";
    RunResult r = run_cli("flow --disc -163 --m 4 --t-end 0.1 --samples 2 --oracle-check "
                          "--diag-out " + diag.string());
    REQUIRE(r.exit_code == 0);
    json j = json::parse(slurp(diag));
    CHECK(j["lemma25_ok"] == true);
    CHECK(j["oracle_all_ok"] == true);
    REQUIRE(j["oracle"].size() == 4);
    for (const auto& e : j["oracle"]) CHECK(e["ok"] == true);
}

TEST_CASE("plotdata: Z(0) value, first sign change, evenness over a symmetric range") {
    RunResult r = run_cli("plotdata --disc -115147 --t-min 0 --t-max 0.01 --samples 5");
    REQUIRE(r.exit_code == 0);
    auto ls = lines_of(r.out);
    REQUIRE(ls.size() == 6);
    CHECK(ls[0] == "t,Z");
    double z0 = std::stod(ls[1].substr(ls[1].find(',') + 1));
    CHECK(z0 == doctest::Approx(6.03627e-5).epsilon(1e-5));
    // zero at 0.0031576: sign change between the 0.0025 and 0.005 rows
    double z1 = std::stod(ls[2].substr(ls[2].find(',') + 1));
    double z2 = std::stod(ls[3].substr(ls[3].find(',') + 1));
    CHECK(z1 > 0);
    CHECK(z2 < 0);

    RunResult sym = run_cli("plotdata --disc -163 --t-min -0.5 --t-max 0.5 --samples 5");
    REQUIRE(sym.exit_code == 0);
    auto sl = lines_of(sym.out);
    REQUIRE(sl.size() == 6);
    double a = std::stod(sl[1].substr(sl[1].find(',') + 1));
    double b = std::stod(sl[5].substr(sl[5].find(',') + 1));
    CHECK(a == doctest::Approx(b).epsilon(1e-12));
}

TEST_CASE("analyze with an imported zero list reproduces the scan-based report") {
    RunResult scan_based = run_cli("analyze --disc -163");
    REQUIRE(scan_based.exit_code == 0);
    json j = json::parse(scan_based.out);

    // hand the CLI the zeros it found, via the import path
    fs::path zf = test_dir() / "zeros_163.txt";
    {
        std::ofstream out(zf);
        out << "0.202901337774769812216\n2.368533946573102111286\n";
    }
    RunResult imported = run_cli("analyze --disc -163 --zeros-file " + zf.string());
    REQUIRE(imported.exit_code == 0);
    json ji = json::parse(imported.out);
    double lam_a = std::stod(j["lambda"].get<std::string>());
    double lam_b = std::stod(ji["lambda"].get<std::string>());
    CHECK(lam_a == doctest::Approx(lam_b).epsilon(1e-9));
}
