#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

using nlohmann::json;

namespace {

struct Run {
  int code = -1;
  std::string out;
};

std::string binary() {
  const char* env = std::getenv("OPILAB_CLI");
  REQUIRE_MESSAGE(env != nullptr, "OPILAB_CLI must point at the opilab binary");
  return env;
}

Run run(const std::string& args, const std::string& env = {}) {
  const std::string cmd = env + (env.empty() ? "" : " ") + binary() + " " + args + " 2>/dev/null";
  Run r;
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  char buf[4096];
  std::size_t got;
  while ((got = fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, got);
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

json run_json(const std::string& args, int expect_code = 0) {
  auto r = run(args);
  CHECK(r.code == expect_code);
  return json::parse(r.out);
}

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

std::filesystem::path scratch(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / "opilab_cli_test";
  std::filesystem::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST_CASE("thresholds") {
  auto best = run_json("thresholds --rho 0.5 --bound best");
  CHECK(std::abs(best["two_mu0"].get<double>() - 0.6225) < 5e-4);
  CHECK(std::abs(best["two_mu1"].get<double>() - 0.7496) < 5e-4);
  CHECK(best["bound"] == "best");
  CHECK(best["witness"]["two_mu1"].contains("delta"));
  auto green = run_json("thresholds --rho 0.5 --bound green");
  CHECK(std::abs(green["two_mu1"].get<double>() - 0.78) < 1e-3);
  auto biased = run_json("thresholds --rho 0.7 --bound biased");
  CHECK(biased["status"] == "no finite threshold");
  CHECK(biased["two_mu1"].is_null());
  CHECK(run("thresholds --rho 1.5").code == 2);
  CHECK(run("thresholds --bound sharp").code == 2);
  CHECK(run("").code == 2);
  CHECK(run("frobnicate").code == 2);
  CHECK(run("--help").code == 0);
}

TEST_CASE("curve output") {
  auto r1 = run("curve --figure 1 --grid 400");
  REQUIRE(r1.code == 0);
  auto rows = parse_csv(r1.out);
  REQUIRE(rows.size() == 401);
  CHECK(rows[0] == std::vector<std::string>{"two_mu", "scl", "green", "avg", "best"});
  for (std::size_t i = 1; i < rows.size(); ++i) {
    REQUIRE(rows[i].size() == 5);
    for (const auto& cell : rows[i]) CHECK(std::isfinite(std::stod(cell)));
  }

  auto r2 = parse_csv(run("curve --figure 2 --grid 200").out);
  REQUIRE(r2.size() == 201);
  const auto& head = r2[0];
  const auto raw = std::find(head.begin(), head.end(), "two_mu1_biased_raw") - head.begin();
  const auto rep = std::find(head.begin(), head.end(), "two_mu1_biased_repaired") - head.begin();
  REQUIRE(raw < static_cast<long>(head.size()));
  REQUIRE(rep < static_cast<long>(head.size()));
  for (std::size_t i = 2; i < r2.size(); ++i) CHECK(std::stod(r2[i][rep]) <= std::stod(r2[i - 1][rep]) + 1e-15);

  auto r4 = parse_csv(run("curve --figure 4 --grid 200").out);
  REQUIRE(r4.size() == 201);
  double best = -1, arg = 0;
  for (std::size_t i = 1; i < r4.size(); ++i) {
    const double v = std::stod(r4[i][1]);
    if (v > best) best = v, arg = std::stod(r4[i][0]);
  }
  CHECK(std::abs(best - 0.9927) < 5e-4);
  CHECK(std::abs(arg - 0.56) < 0.01);
  CHECK(run("curve --figure 5").code == 2);
  CHECK(run("curve --figure 1 --out /nonexistent-dir/x.csv").code == 2);
}

TEST_CASE("determinism") {
  const auto a = scratch("a.csv"), b = scratch("b.csv");
  REQUIRE(run("curve --figure 3 --grid 50 --out " + a.string()).code == 0);
  REQUIRE(run("curve --figure 3 --grid 50 --out " + b.string()).code == 0);
  CHECK(slurp(a) == slurp(b));
  CHECK(!slurp(a).empty());
  CHECK(run("verify --suite all --seed 9").out == run("verify --suite all --seed 9").out);
  CHECK(run("oracle --search 200 --seed 4").out == run("oracle --search 200 --seed 4").out);
  CHECK(run("oracle --search 200 --seed 4").out != run("oracle --search 200 --seed 5").out);
}

TEST_CASE("verify suites") {
  auto d = run_json("verify --suite discrepancy --p 7 --m 6 --n 3 --seed 42");
  CHECK(d["pass"] == true);
  CHECK(d["failed"] == 0);
  for (const auto& c : d["checks"]) CHECK(c["status"] == "pass");

  auto mo = run_json("verify --suite moments --p 7 --m 6 --n 3");
  CHECK(mo["pass"] == true);
  int seen_moments = 0, seen_interlacing = 0;
  for (const auto& c : mo["checks"]) {
    seen_moments += c["identity"] == "moments_match_order_n";
    seen_interlacing += c["identity"] == "cms_interlacing";
  }
  CHECK(seen_moments == 4);
  CHECK(seen_interlacing == 4);

  CHECK(run_json("verify --suite fourier --p 11 --m 6 --n 4 --instances 2")["pass"] == true);
  CHECK(run_json("verify --suite leakage --p 11 --m 8 --n 6 --instances 2")["pass"] == true);
  CHECK(run_json("verify --suite kravchuk --m 8")["pass"] == true);

  const auto t0 = std::chrono::steady_clock::now();
  auto all = run_json("verify --suite all");
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  CHECK(all["pass"] == true);
  CHECK(secs < 600);

  CHECK(run("verify --suite everything").code == 2);
  CHECK(run("verify --suite moments --p 9").code == 2);
  CHECK(run("verify --suite moments --budget 10").code == 2);
  CHECK(run("verify --suite moments", "OPILAB_BUDGET=10").code == 2);
}

TEST_CASE("verify failure writes a replay that reproduces it") {
  for (const char* suite : {"fourier", "discrepancy", "kravchuk"}) {
    const auto replay = scratch(std::string("replay-") + suite + ".json");
    std::filesystem::remove(replay);
    auto r = run(std::string("verify --suite ") + suite + " --inject-fault --seed 3 --replay " + replay.string());
    CHECK(r.code == 1);
    auto report = json::parse(r.out);
    CHECK(report["pass"] == false);
    CHECK(report["failed"] == 1);
    REQUIRE(std::filesystem::exists(replay));
    auto file = json::parse(slurp(replay));
    CHECK(file["identity"] == report["checks"][0]["identity"]);
    if (std::string(suite) == "fourier") {
      CHECK(file.contains("code"));
      CHECK(file.contains("lists"));
    }
    auto again = run("oracle --lists " + replay.string());
    CHECK(again.code == 1);
    auto rj = json::parse(again.out);
    CHECK(rj["pass"] == false);
    CHECK(rj["identity"] == file["identity"]);
    CHECK(rj["checks"][0]["identity"] == file["identity"]);
  }
  const auto clean = scratch("replay-clean.json");
  std::filesystem::remove(clean);
  CHECK(run("verify --suite fourier --replay " + clean.string()).code == 0);
  CHECK(!std::filesystem::exists(clean));
}

TEST_CASE("oracle") {
  const auto lists = scratch("interval.json");
  {
    std::ofstream f(lists);
    f << R"({"p": 7, "sets": [[0,1,2],[0,1,2],[0,1,2],[0,1,2],[0,1,2],[0,1,2]]})";
  }
  auto one = run_json("oracle --p 7 --m 6 --n 3 --lists " + lists.string());
  CHECK(one["s_max"] == "1");
  CHECK(one["histogram"].size() == 7);
  CHECK(one.contains("scl"));

  auto search = run_json("oracle --search 10000 --p 7 --m 6 --n 3");
  CHECK(search["families"] == 10000);
  CHECK(search["min_s_max_value"].get<double>() <= search["mean_s_max"].get<double>());
  CHECK(search["scl"].is_number());

  const auto bad = scratch("bad.json");
  {
    std::ofstream f(bad);
    f << R"({"p": 7, "sets": [[0, 9]]})";
  }
  CHECK(run("oracle --lists " + bad.string()).code == 2);
  {
    std::ofstream f(bad);
    f << "{not json";
  }
  CHECK(run("oracle --lists " + bad.string()).code == 2);
  CHECK(run("oracle --lists /nonexistent.json").code == 2);
}

TEST_CASE("leakage command") {
  for (int seed = 1; seed <= 5; ++seed) {
    auto cyc = run_json("leakage --p 11 --m 8 --n 6 --t 7 --buckets cyclic --seed " + std::to_string(seed));
    CHECK(cyc["ratio"].get<double>() <= 1.0);
    CHECK(cyc["within_slack"] == true);
    CHECK(cyc["certified"] == true);
    auto single = run_json("leakage --p 11 --m 8 --n 6 --t 7 --buckets single --seed " + std::to_string(seed));
    CHECK(cyc["lhs_abs"] == single["lhs_abs"]);
    CHECK(cyc["lambda"].get<double>() >= single["lambda"].get<double>());
  }
  auto low = run_json("leakage --p 11 --m 8 --n 6 --t 3");
  CHECK(low["lhs_abs"].get<double>() == 0.0);
  auto rnd = run_json("leakage --p 11 --m 8 --n 6 --t 7 --buckets random --lambda 0.3");
  CHECK(rnd["certified"] == true);
  CHECK(rnd.contains("J_union"));
  CHECK(run("leakage --p 11 --m 8 --n 6 --buckets random").code == 2);
  CHECK(run("leakage --p 43 --m 40 --n 30 --buckets random --lambda 0.3").code == 2);
  CHECK(run("leakage --p 11 --m 8 --n 3").code == 2);
}
