// Corpus files, run configuration and the command-line entry point.

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "natab/abduction.hpp"
#include "natab/learner.hpp"
#include "natab/problem.hpp"

namespace natab {

struct Config {
  std::size_t budget = kDefaultBudget;
  AbductionConfig abduction;
  std::size_t cv_k = 3;
  std::uint64_t seed = 0;
  std::size_t max_epochs = 10;
  std::size_t jobs = 1;
  std::filesystem::path kb_path;
  std::filesystem::path corpus_path;
  std::filesystem::path out_dir = "out";

  LearnConfig learn_config() const;
  // Pretty-printed JSON of every field.
  std::string json() const;
};

class CorpusError : public std::runtime_error {
 public:
  CorpusError(const std::string& msg, std::size_t line = 0, std::string id = {})
      : std::runtime_error(msg), line_(line), id_(std::move(id)) {}
  std::size_t line() const { return line_; }
  const std::string& id() const { return id_; }

 private:
  std::size_t line_;
  std::string id_;
};

// One record: {"id", "premises": [LLF...], "hypothesis": LLF, "gold",
// optional "text" (string or list) and "solvable" (bool).
Problem parse_problem(std::string_view json_text, std::size_t line = 0);

// Line-delimited records; blank lines and lines starting with '#' are skipped.
std::vector<Problem> parse_problems(std::string_view text);
std::vector<Problem> load_problems(const std::filesystem::path& path);

// A file holding either one record or several (line-delimited).
std::vector<Problem> load_problem_file(const std::filesystem::path& path);

// Returns the process exit status. Output goes to `out`; failures produce one
// JSON line on `err`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace natab
