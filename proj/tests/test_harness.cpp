#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "natab/harness.hpp"

using namespace natab;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run cli(std::vector<std::string> args) {
  args.insert(args.begin(), "natab");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  auto dir = fs::temp_directory_path() / ("natab_harness_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

const std::string kData = NATAB_DATA_DIR;
const std::string kDesk = kData + "/problems/desk.jsonl";
const std::string kSeed = kData + "/kb/seed.kb";
const std::string kPaper = kData + "/kb/paper.kb";

CorpusError corpus_error(const std::string& text) {
  try {
    parse_problems(text);
  } catch (const CorpusError& e) {
    return e;
  }
  FAIL("expected CorpusError");
  return CorpusError("");
}

}  // namespace

TEST_CASE("problem records") {
  Problem p = parse_problem(
      R"j({"id": "x", "premises": ["(a.det dog.n run.v)"], "hypothesis": "(a.det animal.n run.v)", "gold": "entailment", "text": "A dog runs", "solvable": false})j");
  CHECK(p.id == "x");
  CHECK(p.premises.size() == 1);
  CHECK(p.gold == Label::entailment);
  CHECK(p.raw_text == std::vector<std::string>{"A dog runs"});
  CHECK_FALSE(p.solvable);
  auto all = load_problems(kDesk);
  CHECK(all.size() == 30);
  CHECK(load_problem_file(kData + "/problems/hedgehog.json").size() == 1);
}

TEST_CASE("corpus errors name the line and problem") {
  const char* good = R"j({"id": "a", "premises": ["(a.det dog.n run.v)"], "hypothesis": "(a.det dog.n run.v)", "gold": "neutral"})j";
  auto dup = corpus_error(std::string(good) + "\n\n" + good + "\n");
  CHECK(dup.line() == 3);
  CHECK(dup.id() == "a");
  CHECK(std::string(dup.what()).find("duplicate") != std::string::npos);

  auto bad_llf = corpus_error(R"j({"id": "b", "premises": ["(a.det dog.x run.v)"], "hypothesis": "dog.n", "gold": "neutral"})j");
  CHECK(bad_llf.line() == 1);
  CHECK(bad_llf.id() == "b");

  auto free_var = corpus_error(R"j({"id": "f", "premises": ["(run.v x)"], "hypothesis": "dog.n", "gold": "neutral"})j");
  CHECK(std::string(free_var.what()).find("free variable") != std::string::npos);

  CHECK(corpus_error("# comment\n{not json}\n").line() == 2);
  CHECK(corpus_error(R"j({"id": "g", "premises": [], "hypothesis": "dog.n", "gold": "neutral"})j").id() == "g");
  CHECK(corpus_error(R"j({"id": "g", "premises": ["dog.n"], "hypothesis": "dog.n", "gold": "maybe"})j").id() == "g");
  CHECK(corpus_error(R"j({"premises": ["dog.n"], "hypothesis": "dog.n", "gold": "neutral"})j").line() == 1);
  CHECK(corpus_error(R"j({"id": "s", "premises": ["dog.n"], "hypothesis": "dog.n", "gold": "neutral", "solvable": 1})j").id() == "s");
  CHECK_THROWS_AS(load_problems("/nonexistent/corpus.jsonl"), CorpusError);
}

TEST_CASE("cli prove with proof export") {
  auto dir = scratch("prove");
  auto r = cli({"--problem", kData + "/problems/hedgehog.json", "--kb", kPaper, "--export", "text", "--out",
                dir.string(), "prove"});
  REQUIRE(r.code == 0);
  auto j = nlohmann::json::parse(r.out);
  CHECK(j["label"] == "entailment");
  CHECK(j["entailment_closed"] == true);
  CHECK(j["both_closed"] == false);
  REQUIRE(j["files"].size() == 2);
  std::string proof = slurp(j["files"][0].get<std::string>());
  CHECK(proof.rfind("# tableau: closed, 3 branches (0 open)", 0) == 0);

  auto d = cli({"--problem", kData + "/problems/hedgehog_variant.json", "--kb", kPaper, "--export", "dot", "--out",
                dir.string(), "prove"});
  REQUIRE(d.code == 0);
  auto dj = nlohmann::json::parse(d.out);
  CHECK(dj["label"] == "neutral");
  CHECK(slurp(dj["files"][0].get<std::string>()).rfind("digraph", 0) == 0);
  fs::remove_all(dir);
}

TEST_CASE("cli prove selects by id from a corpus") {
  auto r = cli({"--corpus", kDesk, "--id", "e02-puppy-run", "--kb", kSeed, "prove"});
  REQUIRE(r.code == 0);
  CHECK(nlohmann::json::parse(r.out)["id"] == "e02-puppy-run");
  auto missing = cli({"--corpus", kDesk, "--id", "nope", "prove"});
  CHECK(missing.code == 2);
  auto ambiguous = cli({"--corpus", kDesk, "prove"});
  CHECK(ambiguous.code == 2);
}

TEST_CASE("cli eval writes a report") {
  auto dir = scratch("eval");
  auto r = cli({"--corpus", kDesk, "--kb", kData + "/kb/reference.kb", "--out", dir.string(), "eval"});
  REQUIRE(r.code == 0);
  auto j = nlohmann::json::parse(r.out);
  CHECK(j["total"] == 30);
  CHECK(slurp(dir / "reports" / "eval.json") == r.out);
  fs::remove_all(dir);
}

TEST_CASE("cli abduce lists T-sets") {
  auto r = cli({"--problem", kData + "/problems/hedgehog_variant.json", "--kb", kPaper, "--mode", "hitting",
                "--filters", "all,-comparable", "abduce"});
  REQUIRE(r.code == 0);
  CHECK(r.out.rfind("# problem=", 0) == 0);
  CHECK(r.out.find("tsets=4") != std::string::npos);
  CHECK(r.out.find("sub boy.n young.adj  # tset=1 minimal=true terms=4") != std::string::npos);
  auto shared = cli({"--problem", kData + "/problems/hedgehog_variant.json", "--kb", kPaper, "--mode", "shared",
                     "--filters", "all,-comparable", "abduce"});
  REQUIRE(shared.code == 0);
  CHECK(shared.out.find("tsets=0") != std::string::npos);
}

TEST_CASE("cli learn and cv") {
  auto dir = scratch("learn");
  auto r = cli({"--corpus", kDesk, "--kb", kSeed, "--out", dir.string(), "learn"});
  REQUIRE(r.code == 0);
  auto j = nlohmann::json::parse(r.out);
  CHECK(j["converged"] == true);
  CHECK(j["learned"].get<int>() > 0);
  KB learned = load_kb(dir / "kb" / "learned.kb");
  CHECK(learned.size() > load_kb(kSeed).size());
  CHECK(slurp(dir / "kb" / "learned.kb").find("# learned problem=") != std::string::npos);

  auto cv = cli({"--corpus", kDesk, "--kb", kSeed, "--k", "3", "--seed", "7", "--out", dir.string(), "cv"});
  REQUIRE(cv.code == 0);
  CHECK(nlohmann::json::parse(cv.out)["folds"].size() == 3);
  CHECK(slurp(dir / "reports" / "cv.json") == cv.out);
  fs::remove_all(dir);
}

TEST_CASE("cli kb check and config print") {
  auto r = cli({"--kb", kData + "/kb/reference.kb", "kb", "check"});
  REQUIRE(r.code == 0);
  CHECK(nlohmann::json::parse(r.out)["consistent"] == true);
  auto c = cli({"--budget", "77", "--filters", "all,-comparable", "config", "print"});
  REQUIRE(c.code == 0);
  auto j = nlohmann::json::parse(c.out);
  CHECK(j["budget"] == 77);
  CHECK(j["abduction"]["filters"] == "shape,lexicalized,kb_consistent,drop_B_dis_AB,sentence_consistent");
}

TEST_CASE("cli errors are one JSON line with an exit status") {
  auto usage = cli({"--bogus", "eval"});
  CHECK(usage.code == 2);
  CHECK(nlohmann::json::parse(usage.err)["error"] == "usage");
  CHECK(cli({}).code == 2);
  CHECK(cli({"--mode", "greedy", "--corpus", kDesk, "eval"}).code == 2);
  CHECK(cli({"--filters", "all,-bogus", "--corpus", kDesk, "eval"}).code == 2);
  CHECK(cli({"--jobs", "0", "--corpus", kDesk, "eval"}).code == 2);
  CHECK(cli({"eval"}).code == 2);

  auto missing_kb = cli({"--corpus", kDesk, "--kb", "/nonexistent.kb", "eval"});
  CHECK(missing_kb.code == 1);
  CHECK(nlohmann::json::parse(missing_kb.err)["error"] == "kb");

  auto dir = scratch("errors");
  std::ofstream(dir / "bad.jsonl") << "{\"id\": \"x\"}\n";
  auto bad_corpus = cli({"--corpus", (dir / "bad.jsonl").string(), "eval"});
  CHECK(bad_corpus.code == 1);
  CHECK(nlohmann::json::parse(bad_corpus.err)["error"] == "corpus");

  auto folds = cli({"--corpus", kDesk, "--k", "1", "cv"});
  CHECK(folds.code == 1);
  CHECK(nlohmann::json::parse(folds.err)["error"] == "folds");
  fs::remove_all(dir);
}

TEST_CASE("cli help exits cleanly") {
  auto r = cli({"--help"});
  CHECK(r.code == 0);
  CHECK(r.out.find("learn") != std::string::npos);
}

TEST_CASE("repeated learn and eval runs are byte-identical") {
  auto a = scratch("det_a"), b = scratch("det_b");
  for (const auto& dir : {a, b}) {
    REQUIRE(cli({"--corpus", kDesk, "--kb", kSeed, "--out", dir.string(), "learn"}).code == 0);
    REQUIRE(cli({"--corpus", kDesk, "--kb", (dir / "kb" / "learned.kb").string(), "--out", dir.string(), "eval"})
                .code == 0);
  }
  for (const char* f : {"kb/learned.kb", "reports/learn.jsonl", "reports/eval.json"}) CHECK(slurp(a / f) == slurp(b / f));
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST_CASE("installed binary runs") {
  std::string cmd = std::string("\"") + NATAB_CLI + "\" --kb " + kPaper + " kb check > /dev/null";
  CHECK(std::system(cmd.c_str()) == 0);
}
