#include "spatter/cli/commands.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#include "spatter/error.hpp"
#include "spatter/model_io.hpp"
#include "spatter/models.hpp"
#include "spatter/parseval.hpp"
#include "spatter/search.hpp"

namespace spatter::cli {

namespace {

std::vector<RawTree> read_treebank(const std::string& path, const std::string& format) {
  const auto fmt = parse_tree_format(format);
  const auto text = read_text(path);
  try {
    return parse_treebank(text, fmt);
  } catch (const Error& e) {
    throw Error(e.code(), path + ": " + e.what());
  }
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::Io, "cannot create " + path.string());
  out << text;
  if (!out) throw Error(Errc::Io, "cannot write " + path.string());
}

std::vector<std::string> split_words(const std::string& line) {
  std::istringstream in(line);
  std::vector<std::string> words;
  for (std::string w; in >> w;) words.push_back(w);
  return words;
}

std::string exact(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string_view kind_label(int k) { return model_kind_name(static_cast<ModelKind>(k)); }

struct Scored {
  std::vector<SentenceScore> scores;
  std::size_t skipped = 0;
};

Scored score_files(const EvalOptions& opt, std::ostream& log) {
  const auto gold = read_treebank(opt.gold, opt.common.format);
  const auto test_fmt = parse_tree_format(opt.test_format);
  std::vector<std::string> lines;
  {
    std::istringstream in(read_text(opt.test));
    for (std::string line; std::getline(in, line);) lines.push_back(line);
    while (!lines.empty() && lines.back().find_first_not_of(" \t\r") == std::string::npos) lines.pop_back();
  }
  if (lines.size() != gold.size())
    throw Error(Errc::AlignmentMismatch, "gold has " + std::to_string(gold.size()) + " trees but test has " +
                                             std::to_string(lines.size()) + " lines");

  ScoreOptions so;
  so.include_root = !opt.exclude_root;
  so.count_unary_levels = !opt.collapse_unary;
  Scored result;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto field = lines[i].substr(0, lines[i].find('\t'));
    if (field == "SKIP" || field == "NOPARSE") {
      ++result.skipped;
      continue;
    }
    try {
      result.scores.push_back(score_pair(gold[i], parse_tree(field, test_fmt), so));
    } catch (const Error& e) {
      throw Error(Errc::AlignmentMismatch, opt.test + " line " + std::to_string(i + 1) + ": " + e.what());
    }
  }
  log << "scored " << result.scores.size() << " of " << lines.size() << " sentences";
  if (result.skipped) log << " (" << result.skipped << " skipped or unparsed)";
  log << '\n';
  return result;
}

Report make_report(const EvalOptions& opt, const Scored& s, std::ostream& log) {
  const auto ranges = opt.ranges.empty() ? default_ranges() : parse_ranges(opt.ranges);
  auto report = aggregate(s.scores, ranges);
  for (const auto& w : report.warnings) log << "warning: " << w << '\n';
  return report;
}

}  // namespace

std::string read_text(const std::string& path) {
  if (path == "-") {
    std::ostringstream ss;
    ss << std::cin.rdbuf();
    return ss.str();
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::Io, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

RunConfig resolve_config(const Common& common) {
  RunConfig c;
  if (!common.config_path.empty()) {
    try {
      c = parse_config(read_text(common.config_path));
    } catch (const Error& e) {
      throw Error(e.code(), common.config_path + ": " + e.what());
    }
  }
  if (common.seed) c.seed = *common.seed;
  return c;
}

void cmd_classes(const ClassesOptions& opt, std::ostream& log) {
  const auto config = resolve_config(opt.common);
  const auto trees = read_treebank(opt.treebank, opt.common.format);
  const auto classes = build_classes(trees, config.train);
  save_classes(classes, opt.out);
  write_text(opt.out + ".words", classes.word_tree().export_text());
  write_text(opt.out + ".tags", classes.tag_tree().export_text());
  write_text(opt.out + ".labels", classes.label_tree().export_text());

  auto line = [&](const char* name, const ClassTree& t) {
    log << name << ": " << t.size() << " items, depth " << t.depth() << " (budget " << t.budget() << ")";
    if (t.has_collisions()) log << ", truncated codes collide";
    log << '\n';
  };
  log << "trees: " << trees.size() << '\n';
  line("words", classes.word_tree());
  line("tags", classes.tag_tree());
  line("labels", classes.label_tree());
}

void cmd_train(const TrainOptions& opt, std::ostream& log) {
  auto config = resolve_config(opt.common);
  if (opt.grow_fraction) config.grow_fraction = *opt.grow_fraction;
  const auto trees = read_treebank(opt.treebank, opt.common.format);
  const auto classes = load_classes(opt.classes);
  HeadRuleTable heads;
  if (!opt.heads.empty()) {
    std::vector<std::string> warnings;
    try {
      heads = HeadRuleTable::load(read_text(opt.heads), &warnings);
    } catch (const Error& e) {
      throw Error(e.code(), opt.heads + ": " + e.what());
    }
    for (const auto& w : warnings) log << "warning: " << opt.heads << ": " << w << '\n';
  }

  const auto split = split_corpus(trees.size(), config.grow_fraction, config.seed);
  std::vector<RawTree> grow, smooth;
  for (auto i : split.grow) grow.push_back(trees[i]);
  for (auto i : split.smooth) smooth.push_back(trees[i]);
  if (split.smooth_empty) log << "warning: no trees left for smoothing; using the fixed weight schedule\n";

  TrainingReport report;
  const auto models = train(grow, smooth, classes, heads, config.train, &report);
  save_model(models, opt.out);

  log << "split: " << grow.size() << " growing, " << smooth.size() << " smoothing (seed " << config.seed << ")\n";
  for (int k = 0; k < kModelKinds; ++k) {
    const auto& m = models.model(static_cast<ModelKind>(k));
    log << kind_label(k) << " events: " << report.grow_events[static_cast<std::size_t>(k)] << " growing, "
        << report.smooth_events[static_cast<std::size_t>(k)] << " smoothing; tree " << m.tree().size()
        << " nodes, " << m.tree().leaf_count() << " leaves\n";
  }
  log << "unary chain cap: " << models.max_unary_chain() << '\n';
}

void cmd_parse(const ParseOptions& opt, std::ostream& out, std::ostream& log) {
  auto config = resolve_config(opt.common);
  if (opt.max_length) config.search.max_length = *opt.max_length;
  if (opt.threads) config.threads = *opt.threads;
  if (opt.beam_width) config.search.beam_width = *opt.beam_width;
  if (opt.max_hypotheses) config.search.max_hypotheses = *opt.max_hypotheses;
  const auto models = load_model(opt.model);

  std::vector<std::vector<std::string>> sentences;
  {
    std::istringstream in(read_text(opt.input));
    for (std::string line; std::getline(in, line);) sentences.push_back(split_words(line));
  }

  std::vector<std::string> results(sentences.size());
  std::atomic<std::size_t> next{0};
  std::mutex failure_mutex;
  std::exception_ptr failure;
  auto work = [&] {
    for (std::size_t i; (i = next++) < sentences.size();) {
      const auto& words = sentences[i];
      if (words.empty()) {
        results[i] = "SKIP\t-\tempty";
      } else if (words.size() > config.search.max_length) {
        results[i] = "SKIP\t-\ttoo-long";
      } else {
        const auto r = parse(models, words, config.search);
        if (!r.tree)
          results[i] = std::string("NOPARSE\t-\t") + std::string(search_status_name(r.status));
        else
          results[i] = to_string(*r.tree) + '\t' + exact(r.logprob) + '\t' +
                       std::string(search_status_name(r.status));
      }
    }
  };
  auto worker = [&] {
    try {
      work();
    } catch (...) {
      std::lock_guard lock(failure_mutex);
      if (!failure) failure = std::current_exception();
      next = sentences.size();
    }
  };
  const auto n = std::max<std::size_t>(1, std::min(config.threads, sentences.size()));
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < n; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);

  std::size_t optimal = 0, skipped = 0;
  for (const auto& r : results) {
    out << r << '\n';
    skipped += r.rfind("SKIP", 0) == 0;
    optimal += r.ends_with("\toptimal");
  }
  log << "parsed " << sentences.size() << " sentences: " << optimal << " optimal, " << skipped << " skipped\n";
}

void cmd_eval(const EvalOptions& opt, std::ostream& out, std::ostream& log) {
  const auto scored = score_files(opt, log);
  write_report_csv(out, make_report(opt, scored, log));
  if (!opt.sentences.empty()) {
    std::ostringstream tsv;
    write_sentence_tsv(tsv, scored.scores);
    write_text(opt.sentences, tsv.str());
  }
}

void cmd_report(const EvalOptions& opt, const std::string& dir, std::ostream& log) {
  const auto scored = score_files(opt, log);
  std::filesystem::create_directories(dir);
  std::ostringstream table, sentences, lengths;
  write_report_csv(table, make_report(opt, scored, log));
  write_sentence_tsv(sentences, scored.scores);
  write_length_csv(lengths, scored.scores);
  const std::filesystem::path d(dir);
  write_text(d / "table.csv", table.str());
  write_text(d / "sentences.tsv", sentences.str());
  write_text(d / "lengths.csv", lengths.str());
  log << "wrote " << (d / "table.csv").string() << ", sentences.tsv, lengths.csv\n";
}

}  // namespace spatter::cli
