#include "spatter/parseval.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <ostream>
#include <sstream>

#include "spatter/error.hpp"

namespace spatter {

namespace {

double ratio(std::size_t a, std::size_t b) { return b == 0 ? 0.0 : static_cast<double>(a) / static_cast<double>(b); }

bool preterminal(const RawTree& t) { return t.children.empty(); }

// Returns the span end; appends constituents of t in post-order.
std::size_t collect(const RawTree& t, std::size_t begin, bool is_root, const ScoreOptions& opt,
                    std::vector<Constituent>& out) {
  if (preterminal(t)) return begin + 1;
  std::size_t end = begin;
  for (const auto& c : t.children) end = collect(c, end, false, opt, out);
  if (is_root && !opt.include_root) return end;
  if (!opt.count_unary_levels && t.children.size() == 1 && !preterminal(t.children[0]) && !out.empty() &&
      out.back().begin == begin && out.back().end == end) {
    out.back().label = t.label;
    return end;
  }
  out.push_back({begin, end, t.label});
  return end;
}

bool crosses(const Constituent& a, const Constituent& b) {
  return (a.begin < b.begin && b.begin < a.end && a.end < b.end) ||
         (b.begin < a.begin && a.begin < b.end && b.end < a.end);
}

std::size_t multiset_overlap(std::vector<std::pair<std::size_t, std::size_t>> a,
                             std::vector<std::pair<std::size_t, std::size_t>> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  std::size_t n = 0;
  for (std::size_t i = 0, j = 0; i < a.size() && j < b.size();) {
    if (a[i] < b[j]) ++i;
    else if (b[j] < a[i]) ++j;
    else { ++n; ++i; ++j; }
  }
  return n;
}

void check_words(const RawTree& gold, const RawTree& test) {
  const auto gw = gold.words();
  const auto tw = test.words();
  if (gw != tw) {
    std::size_t i = 0;
    while (i < gw.size() && i < tw.size() && gw[i] == tw[i]) ++i;
    throw Error(Errc::WordMismatch, "word sequences differ at position " + std::to_string(i));
  }
}

std::string fmt(double v, int precision) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", precision, v);
  return buf;
}

}  // namespace

double SentenceScore::precision() const noexcept { return ratio(correct_unlabelled, test_constituents); }
double SentenceScore::recall() const noexcept { return ratio(correct_unlabelled, gold_constituents); }
double SentenceScore::labelled_precision() const noexcept { return ratio(correct_labelled, test_constituents); }
double SentenceScore::labelled_recall() const noexcept { return ratio(correct_labelled, gold_constituents); }

std::vector<Constituent> constituents(const RawTree& tree, const ScoreOptions& options) {
  std::vector<Constituent> out;
  collect(tree, 0, true, options, out);
  std::sort(out.begin(), out.end());
  return out;
}

SentenceScore score_pair(const RawTree& gold, const RawTree& test, const ScoreOptions& options) {
  check_words(gold, test);
  const auto g = constituents(gold, options);
  const auto t = constituents(test, options);

  SentenceScore s;
  s.length = gold.leaf_count();
  s.gold_constituents = g.size();
  s.test_constituents = t.size();

  std::vector<std::pair<std::size_t, std::size_t>> gs, ts;
  for (const auto& c : g) gs.emplace_back(c.begin, c.end);
  for (const auto& c : t) ts.emplace_back(c.begin, c.end);
  s.correct_unlabelled = multiset_overlap(gs, ts);

  std::vector<Constituent> common;
  std::set_intersection(g.begin(), g.end(), t.begin(), t.end(), std::back_inserter(common));
  s.correct_labelled = common.size();

  for (const auto& c : t)
    if (std::any_of(g.begin(), g.end(), [&](const Constituent& x) { return crosses(c, x); })) ++s.crossings;

  const auto gt = gold.tags();
  const auto tt = test.tags();
  for (std::size_t i = 0; i < gt.size(); ++i) s.tags_correct += gt[i] == tt[i];
  return s;
}

double tagging_accuracy(const RawTree& gold, const RawTree& test) {
  check_words(gold, test);
  const auto gt = gold.tags();
  const auto tt = test.tags();
  std::size_t ok = 0;
  for (std::size_t i = 0; i < gt.size(); ++i) ok += gt[i] == tt[i];
  return ratio(ok, gt.size());
}

std::vector<LengthRange> default_ranges() { return {{4, 40}, {4, 25}, {10, 20}}; }

std::vector<LengthRange> parse_ranges(const std::string& text) {
  std::vector<LengthRange> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto colon = item.find(':');
    try {
      if (colon == std::string::npos) throw std::invalid_argument("no colon");
      std::size_t pos = 0;
      LengthRange r;
      r.min = std::stoul(item.substr(0, colon), &pos);
      const auto rest = item.substr(colon + 1);
      r.max = std::stoul(rest, &pos);
      if (pos != rest.size() || r.min > r.max) throw std::invalid_argument("bad range");
      out.push_back(r);
    } catch (const std::exception&) {
      throw Error(Errc::BadConfig, "bad length range '" + item + "' (want MIN:MAX)");
    }
  }
  if (out.empty()) throw Error(Errc::BadConfig, "no length ranges given");
  return out;
}

Report aggregate(std::span<const SentenceScore> scores, std::span<const LengthRange> ranges) {
  Report report;
  for (const auto& range : ranges) {
    RangeReport col;
    col.range = range;
    std::size_t words = 0, gold = 0, test = 0, tags = 0, crossings = 0, c0 = 0, c1 = 0, c2 = 0;
    std::size_t cu = 0, cl = 0;
    for (const auto& s : scores) {
      if (s.length < range.min || s.length > range.max) continue;
      ++col.comparisons;
      words += s.length;
      gold += s.gold_constituents;
      test += s.test_constituents;
      tags += s.tags_correct;
      crossings += s.crossings;
      c0 += s.crossings == 0;
      c1 += s.crossings <= 1;
      c2 += s.crossings <= 2;
      cu += s.correct_unlabelled;
      cl += s.correct_labelled;
    }
    if (col.comparisons == 0) {
      report.warnings.push_back("no sentences in range " + range.name());
      continue;
    }
    const auto n = col.comparisons;
    col.avg_length = ratio(words, n);
    col.gold_constituents = ratio(gold, n);
    col.test_constituents = ratio(test, n);
    col.tagging_accuracy = 100.0 * ratio(tags, words);
    col.crossings_per_sentence = ratio(crossings, n);
    col.zero_crossings = 100.0 * ratio(c0, n);
    col.le_one_crossing = 100.0 * ratio(c1, n);
    col.le_two_crossings = 100.0 * ratio(c2, n);
    col.precision = 100.0 * ratio(cu, test);
    col.recall = 100.0 * ratio(cu, gold);
    col.labelled_precision = 100.0 * ratio(cl, test);
    col.labelled_recall = 100.0 * ratio(cl, gold);
    report.columns.push_back(col);
  }
  return report;
}

const std::vector<std::string> kReportRows = {
    "Comparisons",           "Avg. Sent. Length",       "Treebank Constituents",
    "Parse Constituents",    "Tagging Accuracy",        "Crossings Per Sentence",
    "Sent. with 0 Crossings", "Sent. with 1 Crossing",  "Sent. with 2 Crossings",
    "Precision",             "Recall",                  "Labelled Precision",
    "Labelled Recall"};

void write_report_csv(std::ostream& os, const Report& report) {
  os << "Sent. Length Range";
  for (const auto& c : report.columns) os << ',' << c.range.name();
  os << '\n';
  for (std::size_t row = 0; row < kReportRows.size(); ++row) {
    os << '"' << kReportRows[row] << '"';
    for (const auto& c : report.columns) {
      os << ',';
      switch (row) {
        case 0: os << c.comparisons; break;
        case 1: os << fmt(c.avg_length, 2); break;
        case 2: os << fmt(c.gold_constituents, 2); break;
        case 3: os << fmt(c.test_constituents, 2); break;
        case 4: os << fmt(c.tagging_accuracy, 2); break;
        case 5: os << fmt(c.crossings_per_sentence, 2); break;
        case 6: os << fmt(c.zero_crossings, 2); break;
        case 7: os << fmt(c.le_one_crossing, 2); break;
        case 8: os << fmt(c.le_two_crossings, 2); break;
        case 9: os << fmt(c.precision, 2); break;
        case 10: os << fmt(c.recall, 2); break;
        case 11: os << fmt(c.labelled_precision, 2); break;
        case 12: os << fmt(c.labelled_recall, 2); break;
      }
    }
    os << '\n';
  }
}

void write_sentence_tsv(std::ostream& os, std::span<const SentenceScore> scores) {
  os << "sentence\tlength\tgold\ttest\tcorrect\tcorrect_labelled\tcrossings\ttags_correct\n";
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const auto& s = scores[i];
    os << i + 1 << '\t' << s.length << '\t' << s.gold_constituents << '\t' << s.test_constituents << '\t'
       << s.correct_unlabelled << '\t' << s.correct_labelled << '\t' << s.crossings << '\t' << s.tags_correct
       << '\n';
  }
}

void write_length_csv(std::ostream& os, std::span<const SentenceScore> scores) {
  struct Acc { std::size_t n = 0, crossings = 0, cu = 0, test = 0, gold = 0; };
  std::map<std::size_t, Acc> by_length;
  for (const auto& s : scores) {
    auto& a = by_length[s.length];
    ++a.n;
    a.crossings += s.crossings;
    a.cu += s.correct_unlabelled;
    a.test += s.test_constituents;
    a.gold += s.gold_constituents;
  }
  os << "length,crossings,precision,recall,frequency\n";
  for (const auto& [len, a] : by_length)
    os << len << ',' << fmt(ratio(a.crossings, a.n), 4) << ',' << fmt(100.0 * ratio(a.cu, a.test), 2) << ','
       << fmt(100.0 * ratio(a.cu, a.gold), 2) << ',' << a.n << '\n';
}

}  // namespace spatter
