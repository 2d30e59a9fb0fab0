// Learning loop: evaluate, abduce on failures, commit the most useful
// explanations, repeat until nothing new is learned. Also metrics and
// stratified cross-validation.

#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "natab/abduction.hpp"
#include "natab/kb.hpp"
#include "natab/problem.hpp"

namespace natab {

struct Metrics {
  std::size_t total = 0;
  std::size_t correct = 0;
  double accuracy = 1.0;
  double precision = 1.0;
  double recall = 1.0;
  bool empty_corpus = false;
  bool precision_undefined = false;
  bool recall_undefined = false;
  // confusion[gold][predicted], indexed by Label.
  std::array<std::array<std::size_t, 3>, 3> confusion{};

  // One-line JSON object.
  std::string json() const;
};

Metrics compute_metrics(const std::vector<Label>& gold, const std::vector<Label>& predicted);

std::vector<Label> predict_all(const std::vector<Problem>& corpus, const KB& kb,
                               std::size_t budget = kDefaultBudget, std::size_t jobs = 1);

Metrics evaluate(const std::vector<Problem>& corpus, const KB& kb,
                 std::size_t budget = kDefaultBudget, std::size_t jobs = 1);

// Correct under kb extended with ts minus correct under kb, over the corpus.
int accuracy_impact(const TSet& ts, const KB& kb, const std::vector<Problem>& corpus,
                    std::size_t budget = kDefaultBudget, std::size_t jobs = 1);

struct LearnConfig {
  AbductionConfig abduction;
  std::size_t budget = kDefaultBudget;
  std::size_t max_epochs = 10;
  std::size_t jobs = 1;
  // Re-check only problems sharing a lemma with the T-set when scoring.
  bool lemma_prefilter = false;
};

struct LearnedRelation {
  Relation relation;
  std::string problem_id;
  int epoch;
  int impact;
};

struct EpochStats {
  int epoch;
  std::size_t commits;
  double accuracy_before;
  double accuracy_after;
};

struct CommitRecord {
  int epoch;
  std::string problem_id;
  std::vector<Relation> relations;
  int impact;
  std::size_t candidates;
};

struct LearnResult {
  KB kb;
  std::vector<LearnedRelation> learned;
  std::vector<EpochStats> epochs;
  std::vector<CommitRecord> commits;
  bool converged = false;

  // Line-delimited JSON: commit records and one record per epoch.
  std::string report() const;
};

// Storage options the learner needs for a given filter set.
KB prepare_kb(const KB& kb, const AbductionConfig& cfg);

LearnResult learn(const std::vector<Problem>& corpus, const KB& kb0, const LearnConfig& cfg);

class FoldError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// k disjoint, sorted index sets covering the corpus, with each label spread
// evenly. Deterministic for a given seed.
std::vector<std::vector<std::size_t>> stratified_folds(const std::vector<Problem>& corpus,
                                                       std::size_t k, std::uint64_t seed);

struct FoldResult {
  std::vector<std::size_t> test_indices;
  std::array<std::size_t, 3> test_label_counts{};
  Metrics train;
  Metrics test;
  Metrics baseline_train;
  Metrics baseline_test;
  std::size_t learned = 0;
  bool converged = false;
};

struct CvResult {
  std::vector<FoldResult> folds;
  double avg_train_accuracy = 0;
  double avg_test_accuracy = 0;
  double avg_baseline_train_accuracy = 0;
  double avg_baseline_test_accuracy = 0;

  std::string json() const;
};

CvResult cross_validate(const std::vector<Problem>& corpus, const KB& kb0, std::size_t k,
                        std::uint64_t seed, const LearnConfig& cfg);

}  // namespace natab
