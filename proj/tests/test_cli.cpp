#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

namespace fs = std::filesystem;

namespace {

const std::string kCli = GWMA_CLI_PATH;

struct RunResult {
    int exit_code = 0;
    std::string out;
};

// Run the CLI, capturing stdout to a file.
RunResult run_cli(const std::string& args) {
    static int counter = 0;
    const fs::path tmp = fs::temp_directory_path() /
                         ("gwma_cli_stdout_" + std::to_string(counter++) + ".txt");
    const std::string cmd = kCli + " " + args + " > " + tmp.string() + " 2>/dev/null";
    const int rc = std::system(cmd.c_str());
    RunResult r;
    r.exit_code = rc == -1 ? -1 : WEXITSTATUS(rc);
    std::ifstream in(tmp);
    std::stringstream ss;
    ss << in.rdbuf();
    r.out = ss.str();
    fs::remove(tmp);
    return r;
}

fs::path temp_file(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / "gwma_cli_tests";
    fs::create_directories(dir);
    return dir / name;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    REQUIRE(in.good());
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Payload = everything after the '#' metadata block.
std::vector<std::string> payload_lines(const std::string& text) {
    std::vector<std::string> out;
    std::stringstream ss(text);
    std::string line;
    while (std::getline(ss, line)) {
        if (line.empty() || line[0] == '#') continue;
        out.push_back(line);
    }
    return out;
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string tok;
    while (std::getline(ss, tok, ',')) out.push_back(tok);
    return out;
}

} // namespace

TEST_CASE("cli: weights") {
    const auto out = temp_file("weights.csv");
    const auto r = run_cli("weights --q 0.75 --alpha 1.75 --t 20 --out " + out.string());
    REQUIRE(r.exit_code == 0);
    const auto lines = payload_lines(slurp(out));
    REQUIRE(lines.size() == 22); // header + 20 weights + head
    CHECK(lines[0] == "index_from_newest,weight");
    double sum = 0.0;
    std::vector<double> w;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const auto f = split_csv(lines[i]);
        REQUIRE(f.size() == 2);
        sum += std::stod(f[1]);
        if (f[0] != "head") w.push_back(std::stod(f[1]));
    }
    CHECK(sum == Catch::Approx(1.0).margin(1e-12));
    REQUIRE(split_csv(lines.back())[0] == "head");
    bool nonmonotone = false;
    for (std::size_t i = 0; i + 1 < w.size(); ++i)
        if (w[i + 1] > w[i]) nonmonotone = true;
    CHECK(nonmonotone);
}

TEST_CASE("cli: variance series") {
    SECTION("alpha = 1 carries the closed-form column") {
        const auto out = temp_file("var.csv");
        REQUIRE(run_cli("variance --q 0.75 --alpha 1 --t-max 100 --out " + out.string())
                    .exit_code == 0);
        const auto lines = payload_lines(slurp(out));
        REQUIRE(lines.size() == 101);
        CHECK(lines[0] == "t,q_t,ewma_variance_factor");
        for (std::size_t i = 1; i < lines.size(); ++i) {
            const auto f = split_csv(lines[i]);
            REQUIRE(f.size() == 3);
            CHECK(std::stod(f[1]) == Catch::Approx(std::stod(f[2])).margin(1e-12));
        }
        CHECK(std::stod(split_csv(lines.back())[1]) ==
              Catch::Approx(1.0 / 7.0).margin(1e-10));
    }
    SECTION("t_max = 1") {
        const auto out = temp_file("var1.csv");
        REQUIRE(run_cli("variance --q 0.6 --alpha 0.8 --t-max 1 --out " + out.string())
                    .exit_code == 0);
        const auto lines = payload_lines(slurp(out));
        REQUIRE(lines.size() == 2);
        CHECK(std::stod(split_csv(lines[1])[1]) ==
              Catch::Approx(0.4 * 0.4).margin(1e-14));
    }
}

TEST_CASE("cli: match") {
    const auto out = temp_file("match.csv");
    REQUIRE(run_cli("match --q 0.75 --alpha-range 0.5 1.5 --steps 101 --out " +
                    out.string()).exit_code == 0);
    const auto lines = payload_lines(slurp(out));
    REQUIRE(lines.size() == 102);
    const auto mid = split_csv(lines[51]);
    CHECK(std::stod(mid[0]) == Catch::Approx(1.0).margin(1e-9));
    CHECK(std::stod(mid[2]) == Catch::Approx(0.25).margin(1e-9));
}

TEST_CASE("cli: arl analytic equals the shewhart value") {
    const auto out = temp_file("arl.csv");
    REQUIRE(run_cli("arl --scheme ewma --lambda 1 --limit 3 --delta-list 0 "
                    "--engine analytic --out " + out.string()).exit_code == 0);
    const auto lines = payload_lines(slurp(out));
    REQUIRE(lines.size() == 2);
    CHECK(std::stod(split_csv(lines[1])[1]) == Catch::Approx(370.398).epsilon(0.005));
}

TEST_CASE("cli: arl usage errors") {
    CHECK(run_cli("arl --scheme gwma --q 0.75 --alpha 0.8 --limit 3 "
                  "--delta-list 0 --reps 100").exit_code != 0); // mc without seed
    CHECK(run_cli("arl --scheme gwma --q 0.75 --alpha 0.8 --limit 3 "
                  "--delta-list 0 --engine analytic").exit_code != 0);
    CHECK(run_cli("arl --scheme ewma --lambda 2 --limit 3 --delta-list 0 "
                  "--engine analytic").exit_code != 0);
}

TEST_CASE("cli: arl monte carlo runs are reproducible") {
    const auto out1 = temp_file("arl_mc1.csv");
    const auto out2 = temp_file("arl_mc2.csv");
    const std::string args = "arl --scheme gwma --q 0.75 --alpha 0.8 --limit 3.021 "
                             "--delta-list 0.5,1 --reps 2000 --seed 77 ";
    REQUIRE(run_cli(args + "--workers 1 --out " + out1.string()).exit_code == 0);
    REQUIRE(run_cli(args + "--workers 4 --out " + out2.string()).exit_code == 0);
    const auto p1 = payload_lines(slurp(out1));
    const auto p2 = payload_lines(slurp(out2));
    REQUIRE(p1.size() == p2.size());
    for (std::size_t i = 0; i < p1.size(); ++i) REQUIRE(p1[i] == p2[i]);
}

TEST_CASE("cli: ced first row equals the arl at the same seed") {
    const auto arl_out = temp_file("ced_arl.csv");
    const auto ced_out = temp_file("ced.csv");
    REQUIRE(run_cli("arl --scheme ewma --lambda 0.25 --limit 3.002 --delta-list 1 "
                    "--engine mc --reps 3000 --seed 11 --out " + arl_out.string())
                .exit_code == 0);
    REQUIRE(run_cli("ced --scheme ewma --lambda 0.25 --limit 3.002 --delta 1 "
                    "--tau-max 5 --reps 3000 --seed 11 --out " + ced_out.string())
                .exit_code == 0);
    const auto arl_row = split_csv(payload_lines(slurp(arl_out))[1]);
    const auto ced_row = split_csv(payload_lines(slurp(ced_out))[1]);
    CHECK(ced_row[0] == "1");
    CHECK(ced_row[1] == arl_row[1]); // byte-identical estimate
}

TEST_CASE("cli: calibrate json") {
    const auto out = temp_file("cal.json");
    REQUIRE(run_cli("calibrate --scheme ewma --lambda 1 --target 370.4 "
                    "--engine analytic --out " + out.string()).exit_code == 0);
    const auto j = nlohmann::json::parse(slurp(out));
    CHECK(j["limit_const"].get<double>() == Catch::Approx(3.0).margin(0.01));
    CHECK(j["engine"] == "analytic");
    CHECK(j["achieved_std_error"].get<double>() == 0.0);
    CHECK(j["iterations"].get<int>() >= 1);
}

TEST_CASE("cli: monitor") {
    const auto data = temp_file("obs.txt");
    SECTION("in-control file exits 0") {
        std::ofstream(data) << "5.0\n5.0\n5.0\n5.0\n";
        const auto r = run_cli("monitor --scheme ewma --lambda 0.25 --limit 3 "
                               "--mu0 5 --sigma0 1 --input " + data.string() +
                               " --out " + temp_file("trace0.csv").string());
        CHECK(r.exit_code == 0);
        CHECK(r.out.empty());
    }
    SECTION("10-sigma first observation signals at t = 1, exit 2") {
        std::ofstream(data) << "15.0\n5.0\n";
        const auto r = run_cli("monitor --scheme ewma --lambda 1 --limit 3 "
                               "--mu0 5 --sigma0 1 --input " + data.string() +
                               " --out " + temp_file("trace1.csv").string());
        CHECK(r.exit_code == 2);
        CHECK(r.out == "1\n");
    }
    SECTION("reduction: gwma alpha = 1 trace equals ewma trace") {
        std::ofstream(data) << "5.2\n4.7\n5.9\n4.1\n5.5\n6.2\n3.9\n";
        const auto tg = temp_file("trace_g.csv");
        const auto te = temp_file("trace_e.csv");
        REQUIRE(run_cli("monitor --scheme gwma --q 0.75 --alpha 1 --limit 2.5 "
                        "--mu0 5 --sigma0 0.8 --input " + data.string() +
                        " --out " + tg.string()).exit_code == 0);
        REQUIRE(run_cli("monitor --scheme ewma --lambda 0.25 --limit 2.5 "
                        "--mu0 5 --sigma0 0.8 --input " + data.string() +
                        " --out " + te.string()).exit_code == 0);
        const auto lg = payload_lines(slurp(tg));
        const auto le = payload_lines(slurp(te));
        REQUIRE(lg.size() == le.size());
        for (std::size_t i = 1; i < lg.size(); ++i) {
            const auto fg = split_csv(lg[i]);
            const auto fe = split_csv(le[i]);
            REQUIRE(std::stod(fg[1]) == Catch::Approx(std::stod(fe[1])).margin(1e-12));
            REQUIRE(fg[4] == fe[4]);
        }
    }
    SECTION("csv column selection") {
        std::ofstream(data) << "time,value\n1,5.0\n2,5.1\n3,4.9\n";
        const auto r = run_cli("monitor --scheme ewma --lambda 0.25 --limit 3 "
                               "--mu0 5 --sigma0 1 --csv-column 2 --skip-lines 1 "
                               "--input " + data.string() + " --out " +
                               temp_file("trace2.csv").string());
        CHECK(r.exit_code == 0);
    }
    SECTION("bad line reports its number and exits 1") {
        std::ofstream(data) << "5.0\nnot-a-number\n";
        const auto r = run_cli("monitor --scheme ewma --lambda 0.25 --limit 3 "
                               "--input " + data.string());
        CHECK(r.exit_code == 1);
    }
}

TEST_CASE("cli: presets") {
    SECTION("figure presets without randomness") {
        for (const std::string name : {"figure-1", "figure-2", "figure-3"}) {
            const auto out = temp_file(name + ".csv");
            REQUIRE(run_cli("preset " + name + " --out " + out.string()).exit_code == 0);
            CHECK(payload_lines(slurp(out)).size() > 3);
        }
        // figure-1 has 5 alphas x (20 weights + head)
        const auto f1 = payload_lines(slurp(temp_file("figure-1.csv")));
        CHECK(f1.size() == 1 + 5 * 21);
    }
    SECTION("randomized presets demand a seed") {
        CHECK(run_cli("preset table-1 --reps 100").exit_code != 0);
        CHECK(run_cli("preset figure-4 --reps 100").exit_code != 0);
    }
    SECTION("table-1 smoke run") {
        const auto out = temp_file("table1.csv");
        REQUIRE(run_cli("preset table-1 --reps 1500 --seed 4 --out " + out.string())
                    .exit_code == 0);
        const auto lines = payload_lines(slurp(out));
        REQUIRE(lines.size() == 1 + 5 * 9);
        int analytic_rows = 0;
        for (std::size_t i = 1; i < lines.size(); ++i) {
            const auto f = split_csv(lines[i]);
            REQUIRE(f.size() == 7);
            if (f[1] == "analytic") ++analytic_rows;
        }
        CHECK(analytic_rows == 9);
    }
    SECTION("table-2 smoke run") {
        const auto out = temp_file("table2.csv");
        REQUIRE(run_cli("preset table-2 --reps 1000 --seed 5 --out " + out.string())
                    .exit_code == 0);
        const auto lines = payload_lines(slurp(out));
        REQUIRE(lines.size() == 1 + 6 * 9); // 4 gwma + 2 matched ewma designs
    }
    SECTION("figure-6 smoke run") {
        const auto out = temp_file("figure6.csv");
        REQUIRE(run_cli("preset figure-6 --reps 300 --seed 8 --out " + out.string())
                    .exit_code == 0);
        const auto lines = payload_lines(slurp(out));
        REQUIRE(lines.size() == 1 + 2 * 17); // 2 designs x 17 grid shifts
        for (std::size_t i = 1; i < lines.size(); ++i)
            REQUIRE(split_csv(lines[i]).size() == 7);
    }
    SECTION("figure-5 smoke run") {
        const auto out = temp_file("figure5.csv");
        REQUIRE(run_cli("preset figure-5 --reps 400 --seed 6 --out " + out.string())
                    .exit_code == 0);
        // 5 designs x 2 shifts x 100 tau rows
        CHECK(payload_lines(slurp(out)).size() == 1 + 5 * 2 * 100);
    }
    SECTION("unknown preset") {
        CHECK(run_cli("preset table-9").exit_code != 0);
    }
}
