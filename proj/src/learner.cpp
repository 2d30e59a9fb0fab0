#include "natab/learner.hpp"

#include <algorithm>
#include <limits>
#include <random>
#include <set>

#include "json.hpp"
#include "parallel.hpp"

namespace natab {

using ojson = nlohmann::ordered_json;

namespace {

std::size_t index_of(Label l) { return static_cast<std::size_t>(l); }

ojson metrics_json(const Metrics& m) {
  ojson j;
  j["total"] = m.total;
  j["correct"] = m.correct;
  j["accuracy"] = m.accuracy;
  j["precision"] = m.precision;
  j["recall"] = m.recall;
  if (m.empty_corpus) j["empty_corpus"] = true;
  if (m.precision_undefined) j["precision_undefined"] = true;
  if (m.recall_undefined) j["recall_undefined"] = true;
  ojson conf;
  for (Label g : {Label::entailment, Label::contradiction, Label::neutral}) {
    ojson row;
    for (Label p : {Label::entailment, Label::contradiction, Label::neutral})
      row[std::string(label_name(p))] = m.confusion[index_of(g)][index_of(p)];
    conf[std::string(label_name(g))] = row;
  }
  j["confusion"] = conf;
  return j;
}

ojson relations_json(const std::vector<Relation>& rels) {
  ojson arr = ojson::array();
  for (const auto& r : rels) arr.push_back(r.text());
  return arr;
}

}  // namespace

std::string Metrics::json() const { return metrics_json(*this).dump(); }

Metrics compute_metrics(const std::vector<Label>& gold, const std::vector<Label>& predicted) {
  if (gold.size() != predicted.size())
    throw std::invalid_argument("gold and predicted label counts differ");
  Metrics m;
  m.total = gold.size();
  std::size_t predicted_ec = 0, gold_ec = 0, right_ec = 0;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    ++m.confusion[index_of(gold[i])][index_of(predicted[i])];
    if (gold[i] == predicted[i]) ++m.correct;
    bool pred_ec = predicted[i] != Label::neutral;
    if (pred_ec) ++predicted_ec;
    if (gold[i] != Label::neutral) ++gold_ec;
    if (pred_ec && predicted[i] == gold[i]) ++right_ec;
  }
  if (m.total == 0) {
    m.empty_corpus = true;
  } else {
    m.accuracy = static_cast<double>(m.correct) / static_cast<double>(m.total);
  }
  if (predicted_ec == 0) {
    m.precision_undefined = true;
  } else {
    m.precision = static_cast<double>(right_ec) / static_cast<double>(predicted_ec);
  }
  if (gold_ec == 0) {
    m.recall_undefined = true;
  } else {
    m.recall = static_cast<double>(right_ec) / static_cast<double>(gold_ec);
  }
  return m;
}

std::vector<Label> predict_all(const std::vector<Problem>& corpus, const KB& kb,
                               std::size_t budget, std::size_t jobs) {
  std::vector<Label> out(corpus.size(), Label::neutral);
  detail::parallel_for(corpus.size(), jobs, [&](std::size_t i) {
    out[i] = classify(corpus[i].premises, corpus[i].hypothesis, kb, budget).label;
  });
  return out;
}

Metrics evaluate(const std::vector<Problem>& corpus, const KB& kb, std::size_t budget,
                 std::size_t jobs) {
  std::vector<Label> gold;
  for (const auto& p : corpus) gold.push_back(p.gold);
  return compute_metrics(gold, predict_all(corpus, kb, budget, jobs));
}

namespace {

std::size_t count_correct(const std::vector<Problem>& corpus, const std::vector<Label>& preds) {
  std::size_t n = 0;
  for (std::size_t i = 0; i < corpus.size(); ++i)
    if (preds[i] == corpus[i].gold) ++n;
  return n;
}

bool shares_lemma(const Problem& p, const std::set<std::string>& lemma_set) {
  auto hit = [&](const Term& t) {
    for (const auto& l : lemmas(t))
      if (lemma_set.count(l)) return true;
    return false;
  };
  if (hit(p.hypothesis)) return true;
  return std::any_of(p.premises.begin(), p.premises.end(), hit);
}

int impact_against(const TSet& ts, const KB& kb, const std::vector<Problem>& corpus,
                   const std::vector<Label>& baseline, std::size_t budget, std::size_t jobs,
                   bool prefilter) {
  KB ext = kb.assume(ts.relations);
  std::set<std::string> lemma_set;
  for (const auto& r : ts.relations) {
    for (const auto& l : lemmas(r.left)) lemma_set.insert(l);
    for (const auto& l : lemmas(r.right)) lemma_set.insert(l);
  }
  std::vector<Label> preds = baseline;
  detail::parallel_for(corpus.size(), jobs, [&](std::size_t i) {
    if (prefilter && !shares_lemma(corpus[i], lemma_set)) return;
    preds[i] = classify(corpus[i].premises, corpus[i].hypothesis, ext, budget).label;
  });
  return static_cast<int>(count_correct(corpus, preds)) -
         static_cast<int>(count_correct(corpus, baseline));
}

}  // namespace

int accuracy_impact(const TSet& ts, const KB& kb, const std::vector<Problem>& corpus,
                    std::size_t budget, std::size_t jobs) {
  auto baseline = predict_all(corpus, kb, budget, jobs);
  return impact_against(ts, kb, corpus, baseline, budget, jobs, false);
}

KB prepare_kb(const KB& kb, const AbductionConfig& cfg) {
  KbOptions opts = kb.options();
  if (!cfg.filters.comparable) opts.allow_cross_category = true;
  return kb.with_options(opts);
}

LearnResult learn(const std::vector<Problem>& corpus, const KB& kb0, const LearnConfig& cfg) {
  LearnResult res;
  KB kb = prepare_kb(kb0, cfg.abduction);
  for (int epoch = 1; epoch <= static_cast<int>(cfg.max_epochs); ++epoch) {
    std::vector<Label> preds = predict_all(corpus, kb, cfg.budget, cfg.jobs);
    const double before = compute_metrics([&] {
      std::vector<Label> g;
      for (const auto& p : corpus) g.push_back(p.gold);
      return g;
    }(), preds).accuracy;
    std::size_t commits = 0;

    for (std::size_t i = 0; i < corpus.size(); ++i) {
      const Problem& p = corpus[i];
      if (p.gold == Label::neutral || preds[i] == p.gold) continue;
      ProverVerdict v = classify(p.premises, p.hypothesis, kb, cfg.budget);
      if (gold_tableau(v, p.gold).closed()) continue;
      std::vector<TSet> cands;
      try {
        cands = abduce(p, v, kb, cfg.abduction);
      } catch (const CombinatorialLimitError&) {
        continue;
      }
      // Sets that cannot be stored as-is are not candidates.
      cands.erase(std::remove_if(cands.begin(), cands.end(),
                                 [&](const TSet& ts) {
                                   return std::any_of(ts.relations.begin(), ts.relations.end(),
                                                      [&](const Relation& r) {
                                                        return !kb.storable(r) ||
                                                               kb.conflicts_with(r);
                                                      });
                                 }),
                  cands.end());
      const TSet* best = nullptr;
      for (auto& ts : cands) {
        ts.impact = impact_against(ts, kb, corpus, preds, cfg.budget, cfg.jobs,
                                   cfg.lemma_prefilter);
        if (*ts.impact > 0 && (!best || *ts.impact > *best->impact)) best = &ts;
      }
      if (!best) continue;

      for (const auto& r : best->relations) {
        if (kb.contains(r)) continue;
        kb = add_relation(kb, r, Provenance::learned(p.id, epoch));
        res.learned.push_back({r, p.id, epoch, *best->impact});
      }
      res.commits.push_back({epoch, p.id, best->relations, *best->impact, cands.size()});
      ++commits;
      preds = predict_all(corpus, kb, cfg.budget, cfg.jobs);
    }

    const double after = evaluate(corpus, kb, cfg.budget, cfg.jobs).accuracy;
    res.epochs.push_back({epoch, commits, before, after});
    if (commits == 0) {
      res.converged = true;
      break;
    }
  }
  res.kb = kb;
  return res;
}

std::string LearnResult::report() const {
  std::string out;
  std::size_t c = 0;
  for (const auto& e : epochs) {
    for (; c < commits.size() && commits[c].epoch == e.epoch; ++c) {
      const auto& cm = commits[c];
      ojson j;
      j["record"] = "commit";
      j["epoch"] = cm.epoch;
      j["problem"] = cm.problem_id;
      j["relations"] = relations_json(cm.relations);
      j["impact"] = cm.impact;
      j["candidates"] = cm.candidates;
      out += j.dump() + "\n";
    }
    ojson j;
    j["record"] = "epoch";
    j["epoch"] = e.epoch;
    j["commits"] = e.commits;
    j["accuracy_before"] = e.accuracy_before;
    j["accuracy_after"] = e.accuracy_after;
    out += j.dump() + "\n";
  }
  ojson j;
  j["record"] = "summary";
  j["converged"] = converged;
  j["learned"] = learned.size();
  j["kb_size"] = kb.size();
  out += j.dump() + "\n";
  return out;
}

// ---------------------------------------------------------------------------
// Cross-validation

namespace {

// Uniform draw in [0, bound] without modulo bias.
std::uint64_t draw(std::mt19937_64& rng, std::uint64_t bound) {
  if (bound == 0) return 0;
  const std::uint64_t range = bound + 1;
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % range;
  for (;;) {
    std::uint64_t x = rng();
    if (x < limit) return x % range;
  }
}

}  // namespace

std::vector<std::vector<std::size_t>> stratified_folds(const std::vector<Problem>& corpus,
                                                       std::size_t k, std::uint64_t seed) {
  if (k < 2) throw FoldError("cross-validation needs k >= 2");
  if (corpus.size() < k)
    throw FoldError("corpus has " + std::to_string(corpus.size()) + " problems, fewer than k=" +
                    std::to_string(k));
  std::array<std::vector<std::size_t>, 3> groups;
  for (std::size_t i = 0; i < corpus.size(); ++i) groups[index_of(corpus[i].gold)].push_back(i);
  for (Label l : {Label::entailment, Label::contradiction, Label::neutral}) {
    const auto n = groups[index_of(l)].size();
    if (n > 0 && n < k)
      throw FoldError("label " + std::string(label_name(l)) + " has " + std::to_string(n) +
                      " problems, fewer than k=" + std::to_string(k));
  }
  std::mt19937_64 rng(seed);
  std::vector<std::vector<std::size_t>> folds(k);
  std::size_t offset = 0;
  for (auto& g : groups) {
    for (std::size_t i = g.size(); i > 1; --i) std::swap(g[i - 1], g[draw(rng, i - 1)]);
    for (std::size_t idx : g) folds[offset++ % k].push_back(idx);
  }
  for (auto& f : folds) std::sort(f.begin(), f.end());
  return folds;
}

CvResult cross_validate(const std::vector<Problem>& corpus, const KB& kb0, std::size_t k,
                        std::uint64_t seed, const LearnConfig& cfg) {
  auto folds = stratified_folds(corpus, k, seed);
  CvResult res;
  for (const auto& fold : folds) {
    std::vector<Problem> train, test;
    FoldResult fr;
    fr.test_indices = fold;
    for (std::size_t i = 0; i < corpus.size(); ++i) {
      if (std::binary_search(fold.begin(), fold.end(), i)) {
        test.push_back(corpus[i]);
        ++fr.test_label_counts[index_of(corpus[i].gold)];
      } else {
        train.push_back(corpus[i]);
      }
    }
    LearnResult lr = learn(train, kb0, cfg);
    fr.learned = lr.learned.size();
    fr.converged = lr.converged;
    fr.train = evaluate(train, lr.kb, cfg.budget, cfg.jobs);
    fr.test = evaluate(test, lr.kb, cfg.budget, cfg.jobs);
    fr.baseline_train = evaluate(train, kb0, cfg.budget, cfg.jobs);
    fr.baseline_test = evaluate(test, kb0, cfg.budget, cfg.jobs);
    res.folds.push_back(std::move(fr));
  }
  const double n = static_cast<double>(res.folds.size());
  for (const auto& f : res.folds) {
    res.avg_train_accuracy += f.train.accuracy / n;
    res.avg_test_accuracy += f.test.accuracy / n;
    res.avg_baseline_train_accuracy += f.baseline_train.accuracy / n;
    res.avg_baseline_test_accuracy += f.baseline_test.accuracy / n;
  }
  return res;
}

std::string CvResult::json() const {
  ojson j;
  j["k"] = folds.size();
  ojson arr = ojson::array();
  for (std::size_t i = 0; i < folds.size(); ++i) {
    const auto& f = folds[i];
    ojson fj;
    fj["fold"] = i + 1;
    fj["test_size"] = f.test_indices.size();
    fj["test_labels"] = {{"entailment", f.test_label_counts[0]},
                         {"contradiction", f.test_label_counts[1]},
                         {"neutral", f.test_label_counts[2]}};
    fj["learned"] = f.learned;
    fj["converged"] = f.converged;
    fj["train"] = metrics_json(f.train);
    fj["test"] = metrics_json(f.test);
    fj["baseline_train"] = metrics_json(f.baseline_train);
    fj["baseline_test"] = metrics_json(f.baseline_test);
    arr.push_back(fj);
  }
  j["folds"] = arr;
  j["average"] = {{"train_accuracy", avg_train_accuracy},
                  {"test_accuracy", avg_test_accuracy},
                  {"baseline_train_accuracy", avg_baseline_train_accuracy},
                  {"baseline_test_accuracy", avg_baseline_test_accuracy}};
  return j.dump(2) + "\n";
}

}  // namespace natab
