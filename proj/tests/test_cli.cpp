#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "doctest.h"

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = treejac::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::vector<std::vector<std::string>> split_rows(const std::string& text, bool csv) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream lines(text);
  std::string line;
  while (std::getline(lines, line)) {
    std::vector<std::string> cells;
    if (csv) {
      std::string cell;
      std::istringstream fields(line);
      while (std::getline(fields, cell, ',')) cells.push_back(cell);
      if (!line.empty() && line.back() == ',') cells.emplace_back();
    } else {
      std::istringstream fields(line);
      std::string cell;
      while (fields >> cell) cells.push_back(cell);
    }
    rows.push_back(cells);
  }
  return rows;
}

double value_of(const std::string& table, const std::string& quantity, std::size_t column = 1) {
  for (const auto& row : split_rows(table, false))
    if (!row.empty() && row[0] == quantity) return std::stod(row.at(column));
  FAIL("missing row " << quantity);
  return 0.0;
}

std::filesystem::path write_temp(const std::string& name, const std::string& text) {
  const auto path = std::filesystem::temp_directory_path() / name;
  std::ofstream(path) << text;
  return path;
}

}  // namespace

TEST_CASE("spectrum of the degree-3 free tree") {
  const auto r = run({"spectrum", "--model", "free:3"});
  REQUIRE(r.code == 0);
  const auto rows = split_rows(r.out, false);
  REQUIRE(rows.size() == 4);
  CHECK(rows[0] == std::vector<std::string>{"kind", "lo", "hi", "weight"});
  CHECK(rows[1][0] == "band");
  CHECK(std::abs(std::stod(rows[1][1]) + 2.0 * std::sqrt(2.0)) < 1e-5);
  CHECK(std::abs(std::stod(rows[1][2]) - 2.0 * std::sqrt(2.0)) < 1e-5);
  CHECK(std::abs(value_of(r.out, "Sigma") - 2.0 * std::sqrt(2.0)) < 1e-5);
}

TEST_CASE("rg-verify table") {
  const auto r = run({"rg-verify", "3", "2"});
  REQUIRE(r.code == 0);
  CHECK(value_of(r.out, "norm_sq") == doctest::Approx(2.875).epsilon(1e-9));
  CHECK(value_of(r.out, "norm_sq", 2) == 3.0);
  CHECK(value_of(r.out, "Hu_residual") < 1e-14);
  CHECK(value_of(r.out, "residue_red") == doctest::Approx(-1.0 / 3.0).epsilon(1e-8));
  CHECK(value_of(r.out, "dos_weight") == doctest::Approx(0.2).epsilon(1e-8));
  CHECK(run({"rg-verify", "2", "3"}).code == 1);
  CHECK(run({"rg-verify", "3", "2", "--depth", "41"}).code == 1);
}

TEST_CASE("validate reports the violated invariant") {
  const auto leaf = write_temp("treejac_leaf.graph",
                               "vertex a b=0\nvertex b b=0\nvertex c b=0\n"
                               "edge e a b a=1\nedge f a b a=1\nedge g b c a=1\n");
  const auto r = run({"validate", leaf.string()});
  CHECK(r.code == 1);
  CHECK(r.err.find("'c'") != std::string::npos);
  CHECK(r.out.empty());

  const auto good = write_temp("treejac_good.graph", "vertex p b=1\nvertex m b=-1\n"
                                                     "edge e1 p m a=1\nedge e2 p m a=1\nedge e3 p m a=1\n");
  const auto ok = run({"validate", good.string()});
  CHECK(ok.code == 0);
  CHECK(ok.out.find("bipartite  yes") != std::string::npos);

  const auto syntax = write_temp("treejac_syntax.graph", "vertex a b=0\nvertx b b=0\n");
  const auto bad = run({"validate", syntax.string()});
  CHECK(bad.code == 1);
  CHECK(bad.err.find("treejac_syntax.graph") != std::string::npos);
  CHECK(run({"validate", "/nonexistent/file.graph"}).code == 1);
}

TEST_CASE("every subcommand has help") {
  for (const char* sub : {"validate", "perron", "spectrum", "gap-report", "gap-bounds", "green", "dos",
                          "rg-verify", "ball-eig"}) {
    const auto r = run({sub, "--help"});
    CHECK(r.code == 0);
    CHECK(r.out.find("Usage") != std::string::npos);
  }
  CHECK(run({"--help"}).code == 0);
}

TEST_CASE("usage errors exit with 1") {
  CHECK(run({}).code == 1);
  CHECK(run({"nosuch"}).code == 1);
  CHECK(run({"spectrum", "--model", "free:3", "--bogus"}).code == 1);
  CHECK(run({"spectrum", "--model", "free:3", "--resolution", "5"}).code == 1);
  CHECK(run({"spectrum", "--model", "free:3", "--eps", "-1"}).code == 1);
  CHECK(run({"spectrum", "--model", "nosuch:3"}).code == 1);
  CHECK(run({"spectrum", "--model", "free:3", "--range", "-1,1"}).code == 1);
  CHECK(run({"ball-eig", "--model", "free:3", "--radius", "30", "--node-budget", "1000"}).code == 1);
  CHECK(run({"gap-bounds", "--model", "petersen", "--minus", "--reference", "1"}).code == 1);
}

TEST_CASE("a pole of the closed form exits with 2") {
  const auto r = run({"green", "--model", "rg:3,2", "--z=0,0"});
  CHECK(r.code == 2);
  CHECK(r.err.find("pole") != std::string::npos);
}

TEST_CASE("green and audits") {
  const auto r = run({"green", "--model", "free:3", "--z=4,0"});
  REQUIRE(r.code == 0);
  CHECK(value_of(r.out, "G.re") == doctest::Approx(-0.3203772).epsilon(1e-7));
  const auto audit = run({"green", "--model", "free:3", "--audit", "3"});
  REQUIRE(audit.code == 0);
  CHECK(audit.out.find("removable-on-I, pole-on-II") != std::string::npos);
  CHECK(value_of(audit.out, "sheet_II.residue.re") == doctest::Approx(0.5).epsilon(1e-6));
  const auto red = run({"green", "--model", "rg:3,2", "--audit", "0"});
  CHECK(red.out.find("pole-on-I") != std::string::npos);
}

TEST_CASE("csv output parses back to the table values") {
  const auto table = run({"spectrum", "--model", "rg:3,2"});
  const auto csv = run({"spectrum", "--model", "rg:3,2", "--format", "csv"});
  REQUIRE(table.code == 0);
  REQUIRE(csv.code == 0);
  const auto t = split_rows(table.out, false);
  const auto c = split_rows(csv.out, true);
  REQUIRE(t.size() == c.size());
  CHECK(c[0] == std::vector<std::string>{"kind", "lo", "hi", "weight"});
  for (std::size_t i = 1; i < t.size(); ++i) {
    CHECK(t[i][0] == c[i][0]);
    for (std::size_t j = 1; j < t[i].size(); ++j) {
      const double x = std::stod(t[i][j]), y = std::stod(c[i][j]);
      CHECK(std::abs(x - y) <= 1e-8 * std::max(1.0, std::abs(y)));
    }
  }
  const auto dos = run({"dos", "--model", "free:3", "--resolution", "10"});
  REQUIRE(dos.code == 0);
  const auto rows = split_rows(dos.out, true);
  CHECK(rows[0] == std::vector<std::string>{"x", "density", "eps_used"});
  CHECK(rows.size() == 1 + 10 * 4);
}

TEST_CASE("output is deterministic and independent of the thread count") {
  const std::vector<std::string> base = {"spectrum", "--model", "petersen", "--resolution", "201", "--format", "csv"};
  auto one = base, many = base;
  one.insert(one.end(), {"--threads", "1"});
  many.insert(many.end(), {"--threads", "3"});
  const auto a = run(one), b = run(many), c = run(one);
  REQUIRE(a.code == 0);
  CHECK(a.out == b.out);
  CHECK(a.out == c.out);
}

TEST_CASE("gap commands") {
  const auto report = run({"gap-report", "--model", "altb:1"});
  REQUIRE(report.code == 0);
  CHECK(std::abs(value_of(report.out, "gap") - (std::sqrt(10.0) - 3.0)) < 1e-5);

  const auto bounds = run({"gap-bounds", "--model", "altb:1", "--reference", "0.1715728752538097"});
  REQUIRE(bounds.code == 0);
  CHECK(value_of(bounds.out, "lower") <= value_of(bounds.out, "gap") + 1e-6);
  CHECK(value_of(bounds.out, "gap") <= value_of(bounds.out, "upper") + 1e-6);
}

TEST_CASE("ball-eig rows") {
  const auto r = run({"ball-eig", "--model", "free:3", "--radius", "3", "--format", "csv"});
  REQUIRE(r.code == 0);
  const auto rows = split_rows(r.out, true);
  REQUIRE(rows.size() == 5);
  CHECK(rows[0] == std::vector<std::string>{"radius", "nodes", "lanczos_top"});
  CHECK(rows[4][1] == "22");
  CHECK(std::stod(rows[4][2]) == doctest::Approx(std::sqrt(6.0)).epsilon(1e-12));
}

TEST_CASE("the installed binary forwards exit codes") {
  const std::string bin = TREEJAC_BINARY;
  const auto out = std::filesystem::temp_directory_path() / "treejac_out.txt";
  CHECK(std::system((bin + " perron --model cube --out " + out.string()).c_str()) == 0);
  std::ifstream in(out);
  std::stringstream text;
  text << in.rdbuf();
  CHECK(value_of(text.str(), "sigma") == 3.0);
  CHECK(std::system((bin + " nosuch > /dev/null 2>&1").c_str()) != 0);
}
