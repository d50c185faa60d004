#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "qobs/cli.hpp"
#include "qobs/scenario.hpp"
#include "support.hpp"

namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = qobs::cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string scenario_file(const std::string& name) { return qobs::scenario_directory() + "/" + name + ".qnet"; }

fs::path temp_path(const std::string& name) { return fs::temp_directory_path() / ("qobs_cli_test_" + name); }

struct Table {
  std::map<std::string, std::size_t> columns;
  std::vector<std::vector<double>> rows;

  std::vector<double> column(const std::string& name) const {
    std::vector<double> out;
    const std::size_t c = columns.at(name);
    for (const auto& r : rows) out.push_back(r[c]);
    return out;
  }
};

Table parse_csv(const std::string& text) {
  Table t;
  std::istringstream in(text);
  std::string line;
  std::getline(in, line);
  std::istringstream header(line);
  std::string cell;
  for (std::size_t i = 0; std::getline(header, cell, ','); ++i) t.columns[cell] = i;
  while (std::getline(in, line)) {
    std::vector<double> row;
    std::istringstream fields(line);
    while (std::getline(fields, cell, ',')) row.push_back(std::stod(cell));
    t.rows.push_back(row);
  }
  return t;
}

}  // namespace

TEST_CASE("compile prints the reduced model") {
  const Result r = run({"compile", scenario_file("oneway")});
  REQUIRE(r.code == 0);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j.at("a_minus")[1][0][0].get<double>() == doctest::Approx(-0.5));
  CHECK(j.at("a_minus")[0][0][0].get<double>() == doctest::Approx(-0.25));
  CHECK(j.at("a_minus")[0][0][1].get<double>() == doctest::Approx(-1.0));
}

TEST_CASE("compile errors carry positions") {
  const fs::path bad = temp_path("bad.qnet");
  std::ofstream(bad) << "bs J\nconnect J.out[0] -> K.in[0]\n";
  const Result r = run({"compile", bad.string()});
  CHECK(r.code == 1);
  CHECK(r.err.find(":2:21: unknown-component") != std::string::npos);
  CHECK(r.out.empty());

  const fs::path loop = temp_path("loop.qnet");
  std::ofstream(loop) << "bs J\nconnect J.out[0] -> J.in[0]\nconnect J.out[1] -> J.in[1]\n";
  CHECK(run({"compile", loop.string()}).code == 1);
  CHECK(run({"compile", temp_path("missing.qnet").string()}).code == 2);
}

TEST_CASE("compile --out writes a file and keeps stdout quiet") {
  const fs::path out = temp_path("model.json");
  fs::remove(out);
  const Result r = run({"compile", scenario_file("twoway"), "--out", out.string()});
  CHECK(r.code == 0);
  CHECK(r.out.empty());
  CHECK(fs::exists(out));
  CHECK(nlohmann::json::parse(testing::read_file(out.string())).at("a_minus").size() == 2);
}

TEST_CASE("analyze the two-way network") {
  const Result r = run({"analyze", "--scenario", "twoway", "--gamma", "0.5", "--omega", "1"});
  REQUIRE(r.code == 0);
  const auto j = nlohmann::json::parse(r.out);
  int marginal = 0;
  for (const auto& l : j.at("mode_eigenvalues"))
    if (std::abs(l[0].get<double>()) < 1e-9) ++marginal;
  CHECK(marginal == 1);
  CHECK(j.at("report").at("decoherence_free_basis").size() == 2);
  CHECK(j.at("report").at("is_hurwitz") == false);
}

TEST_CASE("analyze observer decay rates") {
  const auto rate = [](const std::string& gl) {
    const Result r = run({"analyze", "--scenario", "observer", "--gamma-l", gl});
    REQUIRE(r.code == 0);
    return nlohmann::json::parse(r.out).at("report").at("decay").at("rate").get<double>();
  };
  CHECK(rate("0") == doctest::Approx(0.25).epsilon(0.01));
  CHECK(rate("2") == doctest::Approx(0.95711).epsilon(0.01));
}

TEST_CASE("simulate: drive leaves the error column untouched") {
  const Result plain = run({"simulate", "--scenario", "observer"});
  const Result driven = run({"simulate", "--scenario", "observer", "--drive", "sin:amp=1,freq=2"});
  REQUIRE(plain.code == 0);
  REQUIRE(driven.code == 0);
  const Table a = parse_csv(plain.out);
  const Table b = parse_csv(driven.out);
  CHECK(a.rows.size() == 10001);
  double diff = 0.0;
  for (const char* col : {"re(e)", "im(e)"}) {
    const auto x = a.column(col);
    const auto y = b.column(col);
    for (std::size_t i = 0; i < x.size(); ++i) diff = std::max(diff, std::abs(x[i] - y[i]));
  }
  CHECK(diff <= 1e-9);
  // The drive does reach the plant.
  CHECK(std::abs(a.column("re(x1)").back() - b.column("re(x1)").back()) > 1e-3);
}

TEST_CASE("simulate: two-way decoherence-free magnitude is constant") {
  const Result r = run({"simulate", "--scenario", "twoway"});
  REQUIRE(r.code == 0);
  const auto mag = parse_csv(r.out).column("abs(df)");
  const auto [lo, hi] = std::minmax_element(mag.begin(), mag.end());
  CHECK(*hi - *lo <= 1e-9);
}

TEST_CASE("simulate grid, covariance and plot script") {
  const fs::path csv = temp_path("traj.csv");
  const fs::path plot = temp_path("traj.gp");
  const Result r = run({"simulate", "--scenario", "oneway", "--step", "1e-3", "--horizon", "10", "--out",
                        csv.string(), "--plot", plot.string(), "--covariance"});
  REQUIRE(r.code == 0);
  CHECK(r.out.empty());
  const Table t = parse_csv(testing::read_file(csv.string()));
  CHECK(t.rows.size() == 10001);
  CHECK(t.columns.count("re(S4_4)") == 1);
  CHECK(t.rows.back()[t.columns.at("re(S1_1)")] == doctest::Approx(0.5).epsilon(1e-6));
  const std::string script = testing::read_file(plot.string());
  CHECK(script.find(csv.string()) != std::string::npos);
  CHECK(script.find("plot ") != std::string::npos);
}

TEST_CASE("outputs are deterministic") {
  const std::vector<std::string> args{"simulate", "--scenario", "observer-verified", "--horizon", "2",
                                      "--drive", "pulse:amp=1,start=0.5,stop=1"};
  CHECK(run(args).out == run(args).out);
  const std::vector<std::string> sweep{"sweep", "--scenario", "observer", "--sweep", "gamma-l=0:2:3", "--horizon", "4"};
  CHECK(run(sweep).out == run(sweep).out);
}

TEST_CASE("sweep command") {
  const Result r = run({"sweep", "--scenario", "observer", "--gamma", "0.5", "--sweep", "gamma-l=0,0.5,1,2"});
  REQUIRE(r.code == 0);
  const Table t = parse_csv(r.out);
  const double expected[] = {0.25, 0.60355, 0.75, 0.95711};
  REQUIRE(t.rows.size() == 4);
  for (std::size_t i = 0; i < 4; ++i) CHECK(t.rows[i][1] == doctest::Approx(expected[i]).epsilon(0.01));

  const Result single = run({"sweep", "--scenario", "observer", "--sweep", "gamma-l=2"});
  const Result analyzed = run({"analyze", "--scenario", "observer", "--gamma-l", "2"});
  const double rate = nlohmann::json::parse(analyzed.out).at("report").at("decay").at("rate").get<double>();
  CHECK(parse_csv(single.out).rows[0][1] == rate);

  CHECK(run({"sweep", "--scenario", "observer", "--sweep", "gamma-l="}).code == 2);
  CHECK(run({"sweep", "--scenario", "observer", "--sweep", "gamma-l=0:1:0"}).code == 2);
}

TEST_CASE("configuration errors exit 2") {
  CHECK(run({"simulate", "--scenario", "oneway", "--step", "-1"}).code == 2);
  CHECK(run({"simulate", "--scenario", "oneway", "--gamma", "0"}).code == 2);
  CHECK(run({"simulate", "--scenario", "nowhere"}).code == 2);
  CHECK(run({"simulate", "--scenario", "observer", "--drive", "saw:amp=1"}).code == 2);
  CHECK(run({"simulate", "--scenario", "oneway", "--plot", "x.gp"}).code == 2);
  CHECK(run({"simulate", "--omega", "abc"}).code == 2);
  CHECK(run({"frobnicate"}).code == 2);
  CHECK(run({}).code == 2);
  CHECK(run({"--help"}).code == 0);
}

TEST_CASE("file scenarios and classical observer") {
  const Result f = run({"analyze", "--scenario", "file:" + scenario_file("observer"), "--horizon", "4"});
  REQUIRE(f.code == 0);
  const Result c = run({"analyze", "--scenario", "classical"});
  REQUIRE(c.code == 0);
  const auto j = nlohmann::json::parse(c.out);
  CHECK(j.at("error_a")[0][0][0].get<double>() == doctest::Approx(-0.5));
  const Result g = run({"analyze", "--scenario", "classical", "--gain", "0"});
  CHECK(nlohmann::json::parse(g.out).at("error_a")[0][0][0].get<double>() == doctest::Approx(-0.25));
}
