#include <doctest.h>
#include <json.hpp>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "pspin/cli.hpp"

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result call(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = pspin::cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::filesystem::path tmp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("pspin_cli_" + name);
}

std::vector<std::string> lines(const std::string& s) {
  std::vector<std::string> v;
  std::istringstream in(s);
  for (std::string l; std::getline(in, l);) v.push_back(l);
  return v;
}

std::size_t columns(const std::string& line) {
  return static_cast<std::size_t>(std::count(line.begin(), line.end(), ',')) + 1;
}

}  // namespace

TEST_CASE("usage errors exit 1") {
  CHECK(call({}).code == pspin::cli::usage);
  CHECK(call({"bogus"}).code == pspin::cli::usage);
  CHECK(call({"enumerate", "--n", "10", "--beta", "0.5"}).code == pspin::cli::usage);
  CHECK(call({"thresholds", "--nope", "1"}).code == pspin::cli::usage);
  CHECK(call({"ogp", "--mode", "weird", "--n", "8", "--seed", "1"}).code == pspin::cli::usage);

  const auto r = call({"enumerate", "--n", "10", "--beta", "0.5"});
  CHECK(r.err.find("--seed") != std::string::npos);
}

TEST_CASE("validation errors exit 2") {
  CHECK(call({"thresholds", "--mixture", "pure:1"}).code == pspin::cli::validation);
  CHECK(call({"shatter", "--n", "12", "--beta", "0.9", "--band", "0.06,0.3", "--seed", "1"}).code ==
        pspin::cli::validation);

  const auto r = call({"shatter", "--n", "12", "--beta", "0.9", "--auto-band", "3,0.5", "--seed", "1"});
  CHECK(r.code == pspin::cli::validation);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j["status"] == "band_infeasible");
  CHECK(j["band"]["feasible"] == false);
  CHECK(r.err.find("infeasible") != std::string::npos);
}

TEST_CASE("resource errors exit 3") {
  const auto r = call({"enumerate", "--n", "40", "--beta", "0.5", "--seed", "1"});
  CHECK(r.code == pspin::cli::resource);
  CHECK(r.err.find("26") != std::string::npos);

  const auto d = call({"disorder", "dump", "--n", "50", "--mixture", "pure:6", "--seed", "1", "--out",
                       tmp_file("big.bin").string()});
  CHECK(d.code == pspin::cli::resource);
  CHECK(d.err.find("50^6") != std::string::npos);
}

TEST_CASE("thresholds json") {
  const auto r = call({"thresholds", "--mixture", "pure:3", "--which", "beta_d"});
  REQUIRE(r.code == 0);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j["version"] == pspin::cli::kVersion);
  const auto& t = j["result"]["thresholds"][0];
  CHECK(t["name"] == "beta_d");
  const double v = t["value"];
  CHECK(v == doctest::Approx(1.0374).epsilon(1e-3));
  CHECK(t["interval"][0].get<double>() <= v);
  CHECK(v <= t["interval"][1].get<double>());
  CHECK(r.err.find("wall_time_s=") != std::string::npos);
}

TEST_CASE("csv format") {
  const auto r = call({"ogp", "--mode", "sf", "--n", "16", "--q", "0.5", "--replicas", "100", "--seed", "3",
                       "--format", "csv"});
  REQUIRE(r.code == 0);
  CHECK(r.out.find('\r') == std::string::npos);
  REQUIRE(!r.out.empty());
  CHECK(r.out.back() == '\n');
  const auto ls = lines(r.out);
  REQUIRE(ls.size() == 2);
  CHECK(ls[0] == "q,mean,std_error,bound,replicas");
  CHECK(columns(ls[1]) == 5);

  std::istringstream row(ls[1]);
  std::string f;
  std::vector<double> vals;
  while (std::getline(row, f, ',')) vals.push_back(std::stod(f));
  CHECK(vals[0] == 0.5);
  CHECK(vals[1] <= vals[3]);
  CHECK(vals[4] == 100);
}

TEST_CASE("shatter output is reproducible across runs and worker counts") {
  const std::vector<std::string> base = {"shatter", "--n",   "14",         "--beta", "0.95", "--band",
                                         "0.06,0.3", "--eps", "0.1",       "--seed", "11"};
  auto with_threads = [&](const std::string& t) {
    std::vector<std::string> a = {"--threads", t};
    a.insert(a.end(), base.begin(), base.end());
    return call(a);
  };
  const auto a = call(base);
  const auto b = call(base);
  const auto c = with_threads("1");
  const auto d = with_threads("4");
  REQUIRE(a.code == 0);
  CHECK(a.out == b.out);
  CHECK(c.out == d.out);
  CHECK(a.out == c.out);
}

TEST_CASE("config file") {
  const auto path = tmp_file("cfg.ini");
  {
    std::ofstream f(path);
    f << "n=10\nbeta=0.5\nseed=7\n";
  }
  const auto flags = call({"enumerate", "--n", "10", "--beta", "0.5", "--seed", "7"});
  const auto file = call({"enumerate", "--config", path.string()});
  REQUIRE(flags.code == 0);
  CHECK(file.code == 0);
  const auto jf = nlohmann::json::parse(flags.out);
  const auto jc = nlohmann::json::parse(file.out);
  CHECK(jf["result"] == jc["result"]);

  const auto over = call({"enumerate", "--config", path.string(), "--seed", "8"});
  REQUIRE(over.code == 0);
  CHECK(nlohmann::json::parse(over.out)["seed"] == 8);

  {
    std::ofstream f(path);
    f << "[enumerate]\nn=10\n";
  }
  CHECK(call({"enumerate", "--config", path.string()}).code == pspin::cli::usage);
  CHECK(call({"enumerate", "--config", tmp_file("missing.ini").string()}).code == pspin::cli::usage);
  std::filesystem::remove(path);
}

TEST_CASE("disorder dump and load agree") {
  const auto path = tmp_file("t.bin");
  const auto d = call({"disorder", "dump", "--n", "6", "--mixture", "pure:3", "--seed", "4", "--out", path.string()});
  REQUIRE(d.code == 0);
  const auto l = call({"disorder", "load", "--in", path.string()});
  REQUIRE(l.code == 0);
  const auto jd = nlohmann::json::parse(d.out)["result"];
  const auto jl = nlohmann::json::parse(l.out)["result"];
  CHECK(jd["energy_all_ones"] == jl["energy_all_ones"]);
  CHECK(jd["coupling_count"] == 216);
  CHECK(jl["mixture"] == "pure:3");
  std::filesystem::remove(path);

  CHECK(call({"disorder", "load", "--in", tmp_file("absent.bin").string()}).code != 0);
}

TEST_CASE("worker count from environment") {
  const char* prev = std::getenv(pspin::cli::kThreadsEnv);
  const std::string saved = prev ? prev : "";

  ::setenv(pspin::cli::kThreadsEnv, "abc", 1);
  CHECK(call({"thresholds", "--which", "e_alg"}).code == pspin::cli::usage);
  ::setenv(pspin::cli::kThreadsEnv, "0", 1);
  CHECK(call({"thresholds", "--which", "e_alg"}).code == pspin::cli::usage);
  ::setenv(pspin::cli::kThreadsEnv, "2", 1);
  CHECK(call({"thresholds", "--which", "e_alg"}).code == 0);
  CHECK(call({"--threads", "1", "thresholds", "--which", "e_alg"}).code == 0);

  if (prev)
    ::setenv(pspin::cli::kThreadsEnv, saved.c_str(), 1);
  else
    ::unsetenv(pspin::cli::kThreadsEnv);
}

TEST_CASE("out flag writes the report to a file") {
  const auto path = tmp_file("th.json");
  const auto r = call({"thresholds", "--which", "e_alg", "--out", path.string()});
  REQUIRE(r.code == 0);
  CHECK(r.out.empty());
  std::ifstream f(path);
  const auto j = nlohmann::json::parse(f);
  CHECK(j["result"]["thresholds"][0]["name"] == "e_alg");
  std::filesystem::remove(path);
}
