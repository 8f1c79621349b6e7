// End-to-end tests that drive the installed CLI binary (path in argv[1]).
#define DOCTEST_CONFIG_IMPLEMENT
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

namespace {

using nlohmann::json;

std::string g_cli;
std::filesystem::path g_dir;

int run(const std::string& args) {
  std::string cmd = g_cli + " " + args + " > " + (g_dir / "stdout.txt").string() +
                    " 2> " + (g_dir / "stderr.txt").string();
  int rc = std::system(cmd.c_str());
  return WEXITSTATUS(rc);
}

std::string stdout_text() {
  std::ifstream in(g_dir / "stdout.txt");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string path(const std::string& name) { return (g_dir / name).string(); }

void write_text(const std::string& p, const std::string& text) {
  std::ofstream out(p);
  out << text;
}

std::string read_text(const std::string& p) {
  std::ifstream in(p);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("simulate then fit completes and converges") {
  write_text(path("gen.json"),
             json{{"preset", "table1"}, {"group_sizes", {8, 8}}, {"T", 20}}
                 .dump());
  CHECK(run("simulate --config " + path("gen.json") + " --seed 7 --out " +
            path("panel.csv") + " --truth-out " + path("truth.csv") +
            " --theta-out " + path("theta.json")) == 0);
  CHECK(std::filesystem::exists(path("panel.csv")));
  CHECK(read_text(path("truth.csv")).substr(0, 9) == "id,group\n");
  CHECK(json::parse(read_text(path("theta.json"))).at("L") == 2);

  CHECK(run("fit --input " + path("panel.csv") +
            " --K 3 --L 2 --restarts 2 --seed 5 --out " + path("fit.json")) ==
        0);
  json fit = json::parse(read_text(path("fit.json")));
  CHECK(fit.at("converged") == true);
  CHECK(fit.at("spec").at("K") == 3);
}

TEST_CASE("identical seeds give bit-identical fit JSON") {
  CHECK(run("fit --input " + path("panel.csv") +
            " --K 3 --L 2 --restarts 2 --seed 5 --out " + path("fit2.json")) ==
        0);
  CHECK(read_text(path("fit.json")) == read_text(path("fit2.json")));
}

TEST_CASE("cluster writes one assignment per individual") {
  CHECK(run("cluster --input " + path("panel.csv") + " --model " +
            path("fit.json") + " --out " + path("assign.csv")) == 0);
  std::istringstream lines(read_text(path("assign.csv")));
  std::string line;
  int rows = 0;
  std::getline(lines, line);
  CHECK(line.substr(0, 8) == "id,group");
  while (std::getline(lines, line))
    if (!line.empty()) ++rows;
  CHECK(rows == 16);
}

TEST_CASE("select on an intercept-only panel returns {1}") {
  std::ostringstream csv;
  csv << "id,t,y,x1\n";
  for (int i = 1; i <= 6; ++i)
    for (int t = 1; t <= 6; ++t)
      csv << i << ',' << t << ',' << ((i + t) % 2 + 1) << ",1\n";
  write_text(path("p1.csv"), csv.str());
  CHECK(run("select --input " + path("p1.csv") +
            " --K 2 --L 1 --T1 4 --restarts 1 --out " + path("trace.json")) ==
        0);
  json trace = json::parse(read_text(path("trace.json")));
  CHECK(trace.at("final_set") == json::array({1}));
  CHECK(trace.at("stop_reason") == "exhausted-candidates");
  CHECK(stdout_text().find("selected variables: 1") != std::string::npos);
}

TEST_CASE("reproduce-sim emits counts that sum to the replicate total") {
  write_text(path("gen_small.json"),
             json{{"preset", "table1"}, {"group_sizes", {8, 8}}, {"T", 16}}
                 .dump());
  CHECK(run("reproduce-sim --replicates 2 --T1 10 --seed 1 --restarts 1 "
            "--config " +
            path("gen_small.json") + " --out " + path("summary.json")) == 0);
  json s = json::parse(read_text(path("summary.json")));
  int total = s.at("exact").get<int>() + s.at("one_extra").get<int>() +
              s.at("two_extra").get<int>() + s.at("more_extra").get<int>() +
              s.at("missed").get<int>();
  CHECK(total == 2);
  CHECK(s.at("replicates") == 2);
}

TEST_CASE("usage and input errors set the documented exit codes") {
  CHECK(run("fit --no-such-flag") == 2);
  CHECK(run("definitely-not-a-subcommand") == 2);
  CHECK(run("fit --input /nonexistent.csv --K 2 --L 1 --out " +
            path("x.json")) == 2);
  CHECK(run("select --input " + path("panel.csv") +
            " --K 3 --L 2 --T1 99 --out " + path("x.json")) == 2);
}

int main(int argc, char** argv) {
  if (argc < 2) {
    std::fprintf(stderr, "usage: test_cli <path-to-cli-binary>\n");
    return 1;
  }
  g_cli = argv[1];
  g_dir = std::filesystem::temp_directory_path() / "mmlogit_cli_tests";
  std::filesystem::create_directories(g_dir);
  doctest::Context context;
  int rc = context.run();
  std::filesystem::remove_all(g_dir);
  return rc;
}
