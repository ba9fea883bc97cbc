#include <doctest.h>

#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

#include "json.hpp"
#include "skegtd/distribution.hpp"

namespace fs = std::filesystem;

namespace {

struct Run {
    int code;
    std::string out;
};

Run run(const std::string& args) {
    const std::string cmd = std::string(SKEGTD_CLI_PATH) + " " + args + " 2>/dev/null";
    FILE* p = popen(cmd.c_str(), "r");
    REQUIRE(p != nullptr);
    std::string out;
    std::array<char, 4096> buf;
    std::size_t k;
    while ((k = fread(buf.data(), 1, buf.size(), p)) > 0) out.append(buf.data(), k);
    const int status = pclose(p);
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

std::vector<std::vector<double>> csv_rows(const std::string& text) {
    std::vector<std::vector<double>> rows;
    std::istringstream in(text);
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) {
        std::vector<double> r;
        std::istringstream ls(line);
        std::string f;
        while (std::getline(ls, f, ',')) r.push_back(std::stod(f));
        rows.push_back(r);
    }
    return rows;
}

fs::path tmp(const std::string& name) {
    const auto d = fs::temp_directory_path() / "skegtd_cli_test";
    fs::create_directories(d);
    return d / name;
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("eval") {
    auto r = run("eval --r 0 --alpha 0.5 --beta 2 --x 0");
    REQUIRE(r.code == 0);
    auto rows = csv_rows(r.out);
    CHECK(rows.at(0)[1] == doctest::Approx(0.31831).epsilon(1e-5));

    r = run("eval --mu 1.5 --r 0.4 --x 1.5");
    CHECK(csv_rows(r.out).at(0)[3] == doctest::Approx(0.3).epsilon(1e-14));

    for (double a : {1.0, 3.0}) {
        r = run("eval --sigma 2 --r -0.3 --beta 1.5 --alpha " + std::to_string(a));
        rows = csv_rows(r.out);
        REQUIRE(rows.size() == 512);
        double mass = 0;
        for (std::size_t i = 1; i < rows.size(); ++i) mass += 0.5 * (rows[i][1] + rows[i - 1][1]) * (rows[i][0] - rows[i - 1][0]);
        // heavy tails leave mass outside the grid; compare with the cdf span it covers
        CHECK(mass == doctest::Approx(rows.back()[3] - rows.front()[3]).epsilon(1e-3));
    }
    r = run("eval --x 0 --format json");
    const auto j = nlohmann::json::parse(r.out);
    CHECK(j["schema"] == "skegtd.report/1");
    CHECK(j["result"]["rows"].size() == 1);
}

TEST_CASE("usage and domain errors map to exit code 2") {
    CHECK(run("").code == 2);
    CHECK(run("frobnicate").code == 2);
    CHECK(run("eval --format xml").code == 2);
    const auto r = run("eval --alpha -1 --x 0");
    CHECK(r.code == 2);
    const std::string cmd = std::string(SKEGTD_CLI_PATH) + " eval --alpha -1 --x 0 2>&1";
    FILE* p = popen(cmd.c_str(), "r");
    std::array<char, 512> buf{};
    const std::size_t k = fread(buf.data(), 1, buf.size() - 1, p);
    pclose(p);
    CHECK(std::string(buf.data(), k).find("--alpha") != std::string::npos);
}

TEST_CASE("sample") {
    const auto e = tmp("empty.txt");
    CHECK(run("sample --n 0 --out " + e.string()).code == 0);
    CHECK(fs::exists(e));
    CHECK(fs::file_size(e) == 0);
    const auto a = tmp("a.txt"), b = tmp("b.txt");
    CHECK(run("sample --n 1000 --seed 9 --r 0.3 --out " + a.string()).code == 0);
    CHECK(run("sample --n 1000 --seed 9 --r 0.3 --out " + b.string()).code == 0);
    CHECK(slurp(a) == slurp(b));
    CHECK(run("sample --n 5 --out /nonexistent/dir/x.txt").code == 3);

    const auto big = run("sample --n 100000 --seed 4 --r 0.7 --alpha 3 --beta 2.5");
    std::istringstream in(big.out);
    double v, s = 0, s2 = 0;
    int n = 0;
    while (in >> v) s += v, s2 += v * v, ++n;
    CHECK(n == 100000);
    const double m = s / n, se = std::sqrt((s2 / n - m * m) / n);
    CHECK(std::fabs(m - skegtd::skegtd_moment({0, 1, 0.7, 3, 2.5}, 1)) < 5 * se);
}

TEST_CASE("fit, compare and regress") {
    const auto data = tmp("data.csv");
    REQUIRE(run("sample --n 400 --seed 3 --mu 2 --sigma 0.5 --r -0.3 --alpha 4 --beta 2 --out " + data.string()).code == 0);
    {
        std::ofstream f(data, std::ios::app);
        f << "\nnot-a-number\n";
    }
    auto r = run("fit --data " + data.string() + " --method tse --format json");
    REQUIRE(r.code == 0);
    auto j = nlohmann::json::parse(r.out);
    CHECK(j["result"]["fit"]["method"] == "tse");
    CHECK(j["result"]["data"]["rows_skipped"] == 2);
    CHECK(j["result"]["fit"]["criteria"]["rho"] == 5);

    r = run("fit --data " + data.string() + " --method mle --known-mu 2 --known-sigma 0.5 --boot 20 --format json --seed 3");
    REQUIRE(r.code == 0);
    j = nlohmann::json::parse(r.out);
    CHECK(j["result"]["bootstrap"]["replicates"] == 20);
    const auto again = nlohmann::json::parse(run("fit --data " + data.string() +
                                                 " --method mle --known-mu 2 --known-sigma 0.5 --boot 20 --format json --seed 3 --threads 2")
                                                 .out);
    CHECK(again["result"]["bootstrap"] == j["result"]["bootstrap"]);

    r = run("compare --data " + data.string());
    REQUIRE(r.code == 0);
    CHECK(r.out.find("SkeGTD,5,") != std::string::npos);
    CHECK(r.out.find("SC,3,") != std::string::npos);

    const auto small = tmp("small.csv");
    {
        std::ofstream f(small);
        f << "1\n2\n3\n";
    }
    CHECK(run("fit --data " + small.string() + " --method mle").code == 3);
    CHECK(run("fit --data /nonexistent.csv").code == 3);
    const auto spiky = tmp("spiky.csv");
    {
        std::ofstream f(spiky);
        for (int i = 0; i < 40; ++i) f << "0\n";
        f << "1e6\n-1e6\n0.001\n-0.001\n";
    }
    CHECK(run("fit --data " + spiky.string() + " --method lme").code == 4);

    const auto reg = tmp("reg.csv");
    {
        std::ofstream f(reg);
        f << "x,y\n";
        skegtd::RngStream rng(5);
        for (int i = 0; i < 60; ++i) {
            const double x = 0.05 * rng.normal();
            f << x << ',' << 0.01 + 1.1 * x + 0.02 * rng.normal() << '\n';
        }
    }
    r = run("regress --data " + reg.string() + " --format json");
    REQUIRE(r.code == 0);
    j = nlohmann::json::parse(r.out);
    CHECK(j["result"]["density_grid"]["x"].size() == 512);
    CHECK(j["result"]["fit"]["estimates"]["beta1"].get<double>() == doctest::Approx(1.1).epsilon(0.1));
}

TEST_CASE("experiment smoke run") {
    const auto spec = tmp("smoke.spec");
    {
        std::ofstream f(spec);
        f << "kind = recovery\nn = 100\nreplicates = 1\nestimators = mle, lme, tse\nseed = 3\n";
    }
    const auto t0 = std::chrono::steady_clock::now();
    const auto r = run("experiment " + spec.string());
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    CHECK(r.code == 0);
    CHECK(secs < 5.0);
    CHECK(r.out.starts_with("n,estimator,parameter"));
    const auto r2 = run("experiment " + spec.string() + " --threads 3");
    CHECK(r2.out == r.out);
    CHECK(run("experiment /nonexistent.spec").code == 2);
}
