#include "natab/harness.hpp"

#include <fstream>
#include <ostream>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

namespace natab {

using ojson = nlohmann::ordered_json;

LearnConfig Config::learn_config() const {
  LearnConfig lc;
  lc.abduction = abduction;
  lc.budget = budget;
  lc.max_epochs = max_epochs;
  lc.jobs = jobs;
  return lc;
}

std::string Config::json() const {
  ojson j;
  j["budget"] = budget;
  j["abduction"] = {{"mode", std::string(mode_name(abduction.mode))},
                    {"filters", abduction.filters.text()},
                    {"sentence_check_budget", abduction.sentence_check_budget},
                    {"max_tsets", abduction.max_tsets},
                    {"hard_ceiling", abduction.hard_ceiling}};
  j["cv_k"] = cv_k;
  j["seed"] = seed;
  j["max_epochs"] = max_epochs;
  j["jobs"] = jobs;
  j["paths"] = {{"kb", kb_path.string()},
                {"corpus", corpus_path.string()},
                {"out", out_dir.string()}};
  return j.dump(2) + "\n";
}

// ---------------------------------------------------------------------------
// Corpus

namespace {

std::string where(std::size_t line, const std::string& id) {
  std::string out;
  if (line) out += "line " + std::to_string(line);
  if (!id.empty()) out += std::string(out.empty() ? "" : ", ") + "problem " + id;
  return out.empty() ? "" : out + ": ";
}

Term parse_sentence(const std::string& text, const std::string& field, std::size_t line,
                    const std::string& id) {
  Term t;
  try {
    t = parse_llf(text, ParseOptions{false, false});
  } catch (const ParseError& e) {
    throw CorpusError(where(line, id) + field + ": " + e.what(), line, id);
  }
  auto fv = free_vars(t);
  if (!fv.empty())
    throw CorpusError(where(line, id) + field + ": free variable '" + *fv.begin() + "'", line, id);
  return t;
}

}  // namespace

Problem parse_problem(std::string_view json_text, std::size_t line) {
  ojson j;
  try {
    j = ojson::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw CorpusError(where(line, "") + "malformed record: " + e.what(), line);
  }
  if (!j.is_object()) throw CorpusError(where(line, "") + "record is not an object", line);
  Problem p;
  if (!j.contains("id") || !j["id"].is_string())
    throw CorpusError(where(line, "") + "missing string field 'id'", line);
  p.id = j["id"].get<std::string>();
  if (p.id.empty()) throw CorpusError(where(line, "") + "empty id", line);
  if (!j.contains("premises") || !j["premises"].is_array() || j["premises"].empty())
    throw CorpusError(where(line, p.id) + "'premises' must be a non-empty list", line, p.id);
  for (const auto& s : j["premises"]) {
    if (!s.is_string())
      throw CorpusError(where(line, p.id) + "premise is not a string", line, p.id);
    p.premises.push_back(parse_sentence(s.get<std::string>(), "premise", line, p.id));
  }
  if (!j.contains("hypothesis") || !j["hypothesis"].is_string())
    throw CorpusError(where(line, p.id) + "missing string field 'hypothesis'", line, p.id);
  p.hypothesis = parse_sentence(j["hypothesis"].get<std::string>(), "hypothesis", line, p.id);
  if (!j.contains("gold") || !j["gold"].is_string())
    throw CorpusError(where(line, p.id) + "missing string field 'gold'", line, p.id);
  auto gold = parse_label(j["gold"].get<std::string>());
  if (!gold)
    throw CorpusError(where(line, p.id) + "unknown gold label '" + j["gold"].get<std::string>() +
                          "'",
                      line, p.id);
  p.gold = *gold;
  if (j.contains("text")) {
    if (j["text"].is_string()) {
      p.raw_text.push_back(j["text"].get<std::string>());
    } else if (j["text"].is_array()) {
      for (const auto& s : j["text"])
        if (s.is_string()) p.raw_text.push_back(s.get<std::string>());
    }
  }
  if (j.contains("solvable")) {
    if (!j["solvable"].is_boolean())
      throw CorpusError(where(line, p.id) + "'solvable' must be a boolean", line, p.id);
    p.solvable = j["solvable"].get<bool>();
  }
  return p;
}

std::vector<Problem> parse_problems(std::string_view text) {
  std::vector<Problem> out;
  std::set<std::string> ids;
  std::size_t line_no = 0, start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    start = end + 1;
    ++line_no;
    auto first = line.find_first_not_of(" \t\r");
    if (first == std::string_view::npos || line[first] == '#') continue;
    Problem p = parse_problem(line, line_no);
    if (!ids.insert(p.id).second)
      throw CorpusError(where(line_no, p.id) + "duplicate id", line_no, p.id);
    out.push_back(std::move(p));
  }
  return out;
}

namespace {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CorpusError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

std::vector<Problem> load_problems(const std::filesystem::path& path) {
  return parse_problems(read_file(path));
}

std::vector<Problem> load_problem_file(const std::filesystem::path& path) {
  std::string text = read_file(path);
  // A single record may span several lines.
  try {
    auto j = ojson::parse(text);
    if (j.is_object()) return {parse_problem(text)};
  } catch (const nlohmann::json::exception&) {
  }
  return parse_problems(text);
}

// ---------------------------------------------------------------------------
// CLI

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void write_file(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw KbError(KbError::Kind::io, "cannot write " + path.string());
  f << content;
}

std::string error_line(std::string_view kind, const std::string& message) {
  ojson j;
  j["error"] = kind;
  j["message"] = message;
  return j.dump();
}

struct Cli {
  Config cfg;
  std::string mode = "shared";
  std::string filters = "all";
  std::string export_format;
  std::string problem_path;
  std::string problem_id;
  std::ostream& out;

  KB kb() const {
    if (cfg.kb_path.empty()) return KB{};
    return load_kb(cfg.kb_path);
  }

  std::vector<Problem> corpus() const {
    if (cfg.corpus_path.empty()) throw UsageError("--corpus is required");
    return load_problems(cfg.corpus_path);
  }

  Problem problem() const {
    std::vector<Problem> pool;
    if (!problem_path.empty()) {
      pool = load_problem_file(problem_path);
    } else if (!cfg.corpus_path.empty()) {
      pool = load_problems(cfg.corpus_path);
    } else {
      throw UsageError("--problem or --corpus is required");
    }
    if (!problem_id.empty()) {
      for (auto& p : pool)
        if (p.id == problem_id) return p;
      throw UsageError("no problem with id '" + problem_id + "'");
    }
    if (pool.size() != 1) throw UsageError("several problems found; select one with --id");
    return pool.front();
  }

  void finish_config() {
    auto m = parse_mode(mode);
    if (!m) throw UsageError("unknown mode '" + mode + "'");
    cfg.abduction.mode = *m;
    try {
      cfg.abduction.filters = FilterSet::parse(filters);
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
    if (!export_format.empty() && !parse_export_format(export_format))
      throw UsageError("unknown export format '" + export_format + "'");
  }

  int prove() {
    Problem p = problem();
    KB k = kb();
    ProverVerdict v = classify(p.premises, p.hypothesis, k, cfg.budget);
    ojson j;
    j["id"] = p.id;
    j["label"] = label_name(v.label);
    j["gold"] = label_name(p.gold);
    j["entailment_closed"] = v.entail_tableau.closed();
    j["contradiction_closed"] = v.contra_tableau.closed();
    j["both_closed"] = v.both_closed;
    j["budget_exhausted"] = v.budget_exhausted;
    if (!export_format.empty()) {
      auto fmt = *parse_export_format(export_format);
      std::string ext = fmt == ExportFormat::dot ? ".dot" : ".txt";
      ojson files = ojson::array();
      for (const auto& [name, t] : {std::pair<std::string, const Tableau*>{"entailment", &v.entail_tableau},
                                    {"contradiction", &v.contra_tableau}}) {
        auto path = cfg.out_dir / "proofs" / (p.id + "." + name + ext);
        write_file(path, export_proof(*t, fmt));
        files.push_back(path.string());
      }
      j["files"] = files;
    }
    out << j.dump() << "\n";
    return 0;
  }

  int eval() {
    auto c = corpus();
    Metrics m = evaluate(c, kb(), cfg.budget, cfg.jobs);
    write_file(cfg.out_dir / "reports" / "eval.json", m.json() + "\n");
    out << m.json() << "\n";
    return 0;
  }

  int abduce_cmd() {
    Problem p = problem();
    KB k = prepare_kb(kb(), cfg.abduction);
    ProverVerdict v = classify(p.premises, p.hypothesis, k, cfg.budget);
    auto sets = abduce(p, v, k, cfg.abduction);
    out << "# problem=" << p.id << " mode=" << mode_name(cfg.abduction.mode)
        << " filters=" << cfg.abduction.filters.text() << " tsets=" << sets.size() << "\n";
    for (std::size_t i = 0; i < sets.size(); ++i) {
      for (const auto& r : sets[i].relations)
        out << r.text() << "  # tset=" << i + 1 << " minimal=" << (sets[i].minimal ? "true" : "false")
            << " terms=" << sets[i].atomic_term_count << "\n";
    }
    return 0;
  }

  int learn_cmd() {
    auto c = corpus();
    LearnResult r = learn(c, kb(), cfg.learn_config());
    auto kb_file = cfg.out_dir / "kb" / "learned.kb";
    auto report_file = cfg.out_dir / "reports" / "learn.jsonl";
    save_kb(r.kb, kb_file);
    write_file(report_file, r.report());
    ojson j;
    j["converged"] = r.converged;
    j["epochs"] = r.epochs.size();
    j["learned"] = r.learned.size();
    j["kb"] = kb_file.string();
    j["report"] = report_file.string();
    out << j.dump() << "\n";
    return 0;
  }

  int cv() {
    auto c = corpus();
    CvResult r = cross_validate(c, kb(), cfg.cv_k, cfg.seed, cfg.learn_config());
    std::string text = r.json();
    write_file(cfg.out_dir / "reports" / "cv.json", text);
    out << text;
    return 0;
  }

  int kb_check() {
    if (cfg.kb_path.empty()) throw UsageError("--kb is required");
    KB k = kb();
    auto findings = kb_consistency_report(k);
    ojson j;
    j["kb"] = cfg.kb_path.string();
    j["relations"] = k.size();
    j["consistent"] = findings.empty();
    j["findings"] = findings;
    out << j.dump() << "\n";
    return 0;
  }
};

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  Cli cli{Config{}, "shared", "all", "", "", "", out};
  Config& cfg = cli.cfg;

  CLI::App app{"Natural-logic tableau prover with abductive knowledge learning", "natab"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string kb_path, corpus_path, out_dir = cfg.out_dir.string();
  app.add_option("--kb", kb_path, "KB file");
  app.add_option("--corpus", corpus_path, "Corpus file (one JSON record per line)");
  app.add_option("--problem", cli.problem_path, "Problem file");
  app.add_option("--id", cli.problem_id, "Problem id within the problem file or corpus");
  app.add_option("--budget", cfg.budget, "Rule applications per tableau")->capture_default_str();
  app.add_option("--mode", cli.mode, "T-set construction: shared|hitting")->capture_default_str();
  app.add_option("--filters", cli.filters,
                 "Abduction filters: all, none, or a list such as all,-comparable")
      ->capture_default_str();
  app.add_option("--k", cfg.cv_k, "Cross-validation folds")->capture_default_str();
  app.add_option("--seed", cfg.seed, "Seed for fold assignment")->capture_default_str();
  app.add_option("--max-epochs", cfg.max_epochs, "Learning epoch cap")->capture_default_str();
  app.add_option("--export", cli.export_format, "Proof export format: text|dot");
  app.add_option("--jobs", cfg.jobs, "Worker threads")->capture_default_str();
  app.add_option("--out", out_dir, "Output directory")->capture_default_str();

  auto* prove = app.add_subcommand("prove", "Classify one problem");
  auto* eval = app.add_subcommand("eval", "Evaluate a corpus against a KB");
  auto* abd = app.add_subcommand("abduce", "Candidate T-sets for one failed problem");
  auto* lrn = app.add_subcommand("learn", "Learn relations from a corpus");
  auto* cv = app.add_subcommand("cv", "Stratified cross-validation");
  auto* kb = app.add_subcommand("kb", "KB utilities");
  auto* kb_check = kb->add_subcommand("check", "Consistency scan");
  kb->require_subcommand(1);
  auto* config = app.add_subcommand("config", "Configuration");
  auto* config_print = config->add_subcommand("print", "Print the effective configuration");
  config->require_subcommand(1);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << error_line("usage", e.what()) << "\n";
    return 2;
  }

  try {
    cfg.kb_path = kb_path;
    cfg.corpus_path = corpus_path;
    cfg.out_dir = out_dir;
    if (cfg.jobs == 0) throw UsageError("--jobs must be at least 1");
    cli.finish_config();
    if (prove->parsed()) return cli.prove();
    if (eval->parsed()) return cli.eval();
    if (abd->parsed()) return cli.abduce_cmd();
    if (lrn->parsed()) return cli.learn_cmd();
    if (cv->parsed()) return cli.cv();
    if (kb_check->parsed()) return cli.kb_check();
    if (config_print->parsed()) {
      out << cfg.json();
      return 0;
    }
    throw UsageError("no subcommand");
  } catch (const UsageError& e) {
    err << error_line("usage", e.what()) << "\n";
    return 2;
  } catch (const CorpusError& e) {
    err << error_line("corpus", e.what()) << "\n";
  } catch (const KbError& e) {
    err << error_line("kb", e.what()) << "\n";
  } catch (const ParseError& e) {
    err << error_line("parse", e.what()) << "\n";
  } catch (const AbductionError& e) {
    err << error_line("abduction", e.what()) << "\n";
  } catch (const CombinatorialLimitError& e) {
    err << error_line("limit", e.what()) << "\n";
  } catch (const FoldError& e) {
    err << error_line("folds", e.what()) << "\n";
  } catch (const std::exception& e) {
    err << error_line("internal", e.what()) << "\n";
  }
  return 1;
}

}  // namespace natab
