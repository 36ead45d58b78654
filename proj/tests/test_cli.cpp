#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"

#include "cli.hpp"
#include "crowdsel/serialize.hpp"

using namespace crowdsel;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code = 0;
  std::string out;
  std::string err;
};

Outcome invoke(std::vector<std::string> args) {
  std::ostringstream out, err;
  Outcome o;
  o.code = cli::run(args, out, err);
  o.out = out.str();
  o.err = err.str();
  return o;
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("crowdsel_cli_" + std::to_string(reinterpret_cast<std::uintptr_t>(this)));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

std::string make_pool(const TempDir& dir, const std::string& name = "pool.json") {
  const auto f = dir.file(name);
  REQUIRE(invoke({"generate", "--workers", "40", "--domains", "3", "--seed", "1", "--out", f, "--preset", "s1"}).code ==
          0);
  return f;
}

}  // namespace

TEST_SUITE("cli-harness") {
  TEST_CASE("parse_int_list accepts ranges") {
    CHECK(cli::parse_int_list("1-3,7") == std::vector<long long>{1, 2, 3, 7});
    CHECK(cli::parse_int_list("5") == std::vector<long long>{5});
    CHECK_THROWS(cli::parse_int_list("3-1"));
    CHECK_THROWS(cli::parse_int_list("a"));
    CHECK(cli::parse_double_list("0.2,0.5") == std::vector<double>{0.2, 0.5});
  }

  TEST_CASE("generate writes a pool and prints a summary") {
    TempDir dir;
    const auto f = dir.file("s1.json");
    const Outcome o = invoke({"generate", "--workers", "40", "--domains", "3", "--seed", "1", "--out", f});
    CHECK(o.code == 0);
    const auto ls = lines(o.out);
    REQUIRE(ls.size() == 5);
    CHECK(ls[0] == "domain,mean,stddev");
    CHECK(ls[1].rfind("d0,", 0) == 0);
    CHECK(ls[4].rfind("target,", 0) == 0);
    CHECK(parse_dataset(read_text_file(f)).workers.size() == 40);
  }

  TEST_CASE("generate is byte-identical across invocations") {
    TempDir dir;
    const auto a = dir.file("a.json");
    const auto b = dir.file("b.json");
    CHECK(invoke({"generate", "--workers", "30", "--domains", "2", "--seed", "4", "--out", a, "--moments",
                  "0.7,0.2,0.8,0.1,0.5,0.2"})
              .code == 0);
    CHECK(invoke({"generate", "--workers", "30", "--domains", "2", "--seed", "4", "--out", b, "--moments",
                  "0.7,0.2,0.8,0.1,0.5,0.2"})
              .code == 0);
    CHECK(read_text_file(a) == read_text_file(b));
  }

  TEST_CASE("usage and data errors map to exit codes") {
    TempDir dir;
    const auto pool = make_pool(dir);
    CHECK(invoke({"generate", "--workers", "0", "--domains", "3", "--seed", "1", "--out", dir.file("x.json")}).code ==
          cli::kExitUsage);
    CHECK(invoke({"run", "--data", pool, "--method", "nope", "--k", "5", "--q", "20", "--seed", "1"}).code ==
          cli::kExitUsage);
    CHECK(invoke({"frobnicate"}).code == cli::kExitUsage);
    CHECK(invoke({}).code == cli::kExitUsage);
    const Outcome infeasible = invoke({"run", "--data", pool, "--method", "me", "--k", "41", "--q", "20", "--seed", "1",
                                       "--out", dir.file("r.json")});
    CHECK(infeasible.code == cli::kExitDataError);
    CHECK(infeasible.err.find("error:") != std::string::npos);
    CHECK(invoke({"run", "--data", dir.file("missing.json"), "--method", "me", "--k", "5", "--q", "20", "--seed", "1"})
              .code == cli::kExitDataError);
    CHECK(invoke({"generate", "--workers", "5", "--domains", "1", "--seed", "1", "--out", dir.file("m.json"),
                  "--moments", "0.7,0.2,1.5,0.1"})
              .code != 0);
    CHECK(invoke({"--help"}).code == cli::kExitOk);
  }

  TEST_CASE("run prints one row and writes an identical file twice") {
    TempDir dir;
    const auto pool = make_pool(dir);
    const std::vector<std::string> base = {"run", "--data", pool, "--method", "ours", "--k", "5", "--q", "20", "--seed",
                                           "7"};
    auto a = base;
    a.insert(a.end(), {"--out", dir.file("a.json")});
    auto b = base;
    b.insert(b.end(), {"--out", dir.file("b.json")});
    const Outcome oa = invoke(a);
    const Outcome ob = invoke(b);
    REQUIRE(oa.code == 0);
    REQUIRE(ob.code == 0);
    const auto ls = lines(oa.out);
    REQUIRE(ls.size() == 2);
    CHECK(ls[0] == "method,dataset,k,Q,seed,selected_accuracy,budget_spent");
    const auto row = split(ls[1]);
    REQUIRE(row.size() == 7);
    CHECK(row[0] == "ours");
    CHECK(std::stoll(row[6]) <= 2400);
    CHECK(read_text_file(dir.file("a.json")) == read_text_file(dir.file("b.json")));
  }

  TEST_CASE("run writes a default output name next to the dataset") {
    TempDir dir;
    const auto pool = make_pool(dir);
    CHECK(invoke({"run", "--data", pool, "--method", "us", "--k", "5", "--q", "20", "--seed", "3"}).code == 0);
    CHECK(fs::exists(dir.file("pool-us-s3.json")));
  }

  TEST_CASE("closed and sampled evaluation agree with many working tasks") {
    TempDir dir;
    const auto pool = make_pool(dir);
    auto run_with = [&](const std::string& mode) {
      const Outcome o = invoke({"run", "--data", pool, "--method", "me", "--k", "5", "--q", "20", "--seed", "2",
                                "--eval-mode", mode, "--eval-tasks", "20000", "--out", dir.file(mode + ".json")});
      REQUIRE(o.code == 0);
      return std::stod(split(lines(o.out)[1])[5]);
    };
    CHECK(std::abs(run_with("closed") - run_with("sampled")) < 0.02);
  }

  TEST_CASE("compare emits one sorted row per method") {
    const Outcome o = invoke({"compare", "--workers", "24", "--seeds", "1-2", "--k", "3", "--epochs", "5"});
    REQUIRE(o.code == 0);
    const auto ls = lines(o.out);
    REQUIRE(ls.size() == 6);
    CHECK(ls[0] == "method,runs,mean_accuracy,stddev_accuracy,ours_uplift_pct,ours_win_rate");
    const std::vector<std::string> names = {"li", "me", "me-cpe", "ours", "us"};
    for (std::size_t i = 0; i < names.size(); ++i) {
      const auto row = split(ls[i + 1]);
      REQUIRE(row.size() == 6);
      CHECK(row[0] == names[i]);
      CHECK(row[1] == "2");
      CHECK_FALSE(row[3].empty());
    }
  }

  TEST_CASE("compare with one seed leaves stddev empty") {
    const Outcome o = invoke({"compare", "--workers", "20", "--seeds", "3", "--methods", "me,us", "--k", "5"});
    REQUIRE(o.code == 0);
    const auto ls = lines(o.out);
    REQUIRE(ls.size() == 3);
    CHECK(split(ls[1])[3].empty());
    CHECK(split(ls[1])[0] == "me");
  }

  TEST_CASE("compare output does not depend on the number of jobs") {
    const std::vector<std::string> base = {"compare", "--workers", "20", "--seeds", "1-3", "--methods", "me,us,li"};
    auto one = base;
    one.insert(one.end(), {"--jobs", "1"});
    auto three = base;
    three.insert(three.end(), {"--jobs", "3"});
    CHECK(invoke(one).out == invoke(three).out);
  }

  TEST_CASE("sweep over k recomputes the number of rounds") {
    const Outcome o = invoke({"sweep", "--param", "k", "--values", "5,10,20", "--workers", "40", "--methods", "me",
                              "--seeds", "1"});
    REQUIRE(o.code == 0);
    const auto ls = lines(o.out);
    REQUIRE(ls.size() == 4);
    CHECK(ls[0] == "param,value,method,n_rounds,B,runs,mean_accuracy,stddev_accuracy");
    CHECK(split(ls[1])[3] == "3");
    CHECK(split(ls[2])[3] == "2");
    CHECK(split(ls[3])[3] == "1");
  }

  TEST_CASE("sweep over Q recomputes the budget") {
    const Outcome o = invoke({"sweep", "--param", "Q", "--values", "10,20", "--workers", "40", "--methods", "us",
                              "--seeds", "1"});
    REQUIRE(o.code == 0);
    const auto ls = lines(o.out);
    REQUIRE(ls.size() == 3);
    CHECK(split(ls[1])[4] == "1200");
    CHECK(split(ls[2])[4] == "2400");
  }

  TEST_CASE("sweep over a_T gives one row per value and method") {
    const Outcome o = invoke({"sweep", "--param", "a_T", "--values", "0.2,0.35,0.5,0.65,0.8", "--workers", "20",
                              "--methods", "me,us", "--seeds", "1"});
    REQUIRE(o.code == 0);
    CHECK(lines(o.out).size() == 11);
  }

  TEST_CASE("probe-bound prints the allotment") {
    const Outcome o = invoke({"probe-bound", "--trials", "50"});
    REQUIRE(o.code == 0);
    const auto ls = lines(o.out);
    REQUIRE(ls.size() == 2);
    CHECK(ls[0] == "epsilon,delta,W0,trials,tasks_per_worker,failures,failure_rate");
    const auto row = split(ls[1]);
    CHECK(row[2] == "20");
    CHECK(row[3] == "50");
    CHECK(row[4] == "681");
  }

  TEST_CASE("config files fill in flags and lose to the command line") {
    const std::string config = "# defaults\nk = 7\nseed = \"3\"\nli-single-fit = true\neval-mode = closed\nverbose = false\n";
    const auto merged = cli::merge_config({"run", "--data", "x.json", "--k", "5"}, config);
    const std::vector<std::string> expected = {"run",    "--data", "x.json",         "--k",         "5",
                                               "--seed", "3",      "--li-single-fit", "--eval-mode", "closed"};
    CHECK(merged == expected);
  }

  TEST_CASE("--config is applied by the command") {
    TempDir dir;
    const auto pool = make_pool(dir);
    const auto cfg = dir.file("run.cfg");
    write_text_file(cfg, "method = me\nk = 5\nq = 20\nseed = 4\n");
    const Outcome o = invoke({"run", "--config", cfg, "--data", pool, "--out", dir.file("c.json")});
    CHECK(o.code == 0);
    CHECK(split(lines(o.out)[1])[0] == "me");
    CHECK(invoke({"run", "--config", dir.file("nope.cfg"), "--data", pool}).code != 0);
  }
}
