#include "spatter/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <random>

#include "spatter/error.hpp"

namespace spatter {

RawTree RawTree::leaf(std::string word, std::string tag) {
  RawTree t;
  t.word = std::move(word);
  t.tag = std::move(tag);
  return t;
}

RawTree RawTree::node(std::string label, std::vector<RawTree> children) {
  RawTree t;
  t.label = std::move(label);
  t.children = std::move(children);
  return t;
}

std::size_t RawTree::leaf_count() const noexcept {
  if (is_leaf()) return 1;
  std::size_t n = 0;
  for (const auto& c : children) n += c.leaf_count();
  return n;
}

std::size_t RawTree::internal_count() const noexcept {
  if (is_leaf()) return 0;
  std::size_t n = 1;
  for (const auto& c : children) n += c.internal_count();
  return n;
}

namespace {

void collect_leaves(const RawTree& t, std::vector<std::string>& out, bool want_tags) {
  if (t.is_leaf()) {
    out.push_back(want_tags ? t.tag : t.word);
    return;
  }
  for (const auto& c : t.children) collect_leaves(c, out, want_tags);
}

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

struct Token {
  enum Kind { Open, Close, Symbol, End } kind;
  std::string_view text;
  std::size_t pos;
};

class Lexer {
 public:
  explicit Lexer(std::string_view text) : text_(text) {}

  Token peek() {
    if (!lookahead_) lookahead_ = scan();
    return *lookahead_;
  }
  Token next() {
    Token t = peek();
    lookahead_.reset();
    return t;
  }

  std::string where(std::size_t pos) const {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i < pos && i < text_.size(); ++i) {
      if (text_[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    return "line " + std::to_string(line) + ", column " + std::to_string(col);
  }

 private:
  Token scan() {
    while (pos_ < text_.size() && is_space(text_[pos_])) ++pos_;
    if (pos_ >= text_.size()) return {Token::End, {}, pos_};
    const std::size_t start = pos_;
    if (text_[pos_] == '(') return {Token::Open, text_.substr(pos_++, 1), start};
    if (text_[pos_] == ')') return {Token::Close, text_.substr(pos_++, 1), start};
    while (pos_ < text_.size() && !is_space(text_[pos_]) && text_[pos_] != '(' &&
           text_[pos_] != ')')
      ++pos_;
    return {Token::Symbol, text_.substr(start, pos_ - start), start};
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  std::optional<Token> lookahead_;
};

RawTree underscore_leaf(const Token& tok, const Lexer& lex) {
  const auto cut = tok.text.rfind('_');
  if (cut == std::string_view::npos || cut == 0 || cut + 1 == tok.text.size())
    throw Error(Errc::MissingTag, "no tag on '" + std::string(tok.text) + "' at " + lex.where(tok.pos));
  return RawTree::leaf(std::string(tok.text.substr(0, cut)), std::string(tok.text.substr(cut + 1)));
}

class Reader {
 public:
  Reader(std::string_view text, TreeFormat format) : lex_(text), format_(format) {}

  std::vector<RawTree> read_all() {
    std::vector<RawTree> out;
    for (;;) {
      Token t = lex_.peek();
      if (t.kind == Token::End) break;
      if (t.kind != Token::Open)
        throw Error(Errc::UnbalancedBrackets,
                    "expected '(' at " + lex_.where(t.pos));
      out.push_back(unwrap(read_bracket()));
    }
    return out;
  }

 private:
  // `( (S ...) )` wrappers: an unlabelled bracket around exactly one tree.
  static RawTree unwrap(RawTree t) {
    while (t.label.empty() && !t.is_leaf() && t.children.size() == 1 && !t.children[0].is_leaf()) {
      RawTree inner = std::move(t.children[0]);
      t = std::move(inner);
    }
    if (t.label.empty() && !t.is_leaf())
      throw Error(Errc::EmptyConstituent, "unlabelled bracket at top level");
    if (t.is_leaf())
      throw Error(Errc::EmptyConstituent, "top-level expression is a bare pre-terminal");
    return t;
  }

  RawTree read_bracket() {
    const Token open = lex_.next();
    std::string label;
    if (lex_.peek().kind == Token::Symbol) label = std::string(lex_.next().text);

    std::vector<RawTree> children;
    std::vector<Token> bare;
    for (;;) {
      Token t = lex_.peek();
      if (t.kind == Token::End)
        throw Error(Errc::UnbalancedBrackets,
                    "unclosed '(' opened at " + lex_.where(open.pos));
      if (t.kind == Token::Close) {
        lex_.next();
        break;
      }
      if (t.kind == Token::Open) {
        children.push_back(read_bracket());
        continue;
      }
      lex_.next();
      if (format_ == TreeFormat::UnderscoreSuffix) {
        children.push_back(underscore_leaf(t, lex_));
      } else {
        bare.push_back(t);
        children.emplace_back();  // placeholder, resolved below
      }
    }

    if (children.empty())
      throw Error(Errc::EmptyConstituent, "empty bracket at " + lex_.where(open.pos));

    if (format_ == TreeFormat::Penn && !bare.empty()) {
      // (TAG word) is a pre-terminal; any other bare token has no tag.
      if (children.size() == 1 && bare.size() == 1 && !label.empty())
        return RawTree::leaf(std::string(bare[0].text), std::move(label));
      throw Error(Errc::MissingTag,
                  "no tag on '" + std::string(bare[0].text) + "' at " + lex_.where(bare[0].pos));
    }
    return RawTree::node(std::move(label), std::move(children));
  }

  Lexer lex_;
  TreeFormat format_;
};

void write_tree(const RawTree& t, TreeFormat format, std::string& out) {
  if (t.is_leaf()) {
    if (format == TreeFormat::UnderscoreSuffix) {
      out += t.word;
      out += '_';
      out += t.tag;
    } else {
      out += '(';
      out += t.tag;
      out += ' ';
      out += t.word;
      out += ')';
    }
    return;
  }
  out += '(';
  out += t.label;
  for (const auto& c : t.children) {
    out += ' ';
    write_tree(c, format, out);
  }
  out += ')';
}

}  // namespace

std::vector<std::string> RawTree::words() const {
  std::vector<std::string> out;
  collect_leaves(*this, out, false);
  return out;
}

std::vector<std::string> RawTree::tags() const {
  std::vector<std::string> out;
  collect_leaves(*this, out, true);
  return out;
}

TreeFormat parse_tree_format(std::string_view name) {
  if (name == "underscore" || name == "underscore-suffix") return TreeFormat::UnderscoreSuffix;
  if (name == "penn" || name == "penn-paren") return TreeFormat::Penn;
  throw Error(Errc::BadConfig, "unknown tree format '" + std::string(name) + "'");
}

std::vector<RawTree> parse_treebank(std::string_view text, TreeFormat format) {
  return Reader(text, format).read_all();
}

RawTree parse_tree(std::string_view text, TreeFormat format) {
  auto trees = parse_treebank(text, format);
  if (trees.size() != 1)
    throw Error(Errc::UnbalancedBrackets,
                "expected one tree, found " + std::to_string(trees.size()));
  return std::move(trees.front());
}

std::string to_string(const RawTree& tree, TreeFormat format) {
  std::string out;
  write_tree(tree, format, out);
  return out;
}

int SymbolTable::intern(std::string_view symbol, std::uint64_t count) {
  auto it = index_.find(std::string(symbol));
  if (it != index_.end()) {
    counts_[static_cast<std::size_t>(it->second)] += count;
    return it->second;
  }
  const int id = static_cast<int>(symbols_.size());
  symbols_.emplace_back(symbol);
  counts_.push_back(count);
  index_.emplace(std::string(symbol), id);
  return id;
}

std::optional<int> SymbolTable::find(std::string_view symbol) const {
  auto it = index_.find(std::string(symbol));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

int Vocabularies::word_id(std::string_view surface) const {
  return words.find(surface).value_or(kUnk);
}

int Vocabularies::tag_id(std::string_view tag) const {
  if (auto id = tags.find(tag)) return *id;
  throw Error(Errc::UnknownSymbol, "tag '" + std::string(tag) + "'");
}

int Vocabularies::label_id(std::string_view label) const {
  if (auto id = labels.find(label)) return *id;
  throw Error(Errc::UnknownSymbol, "label '" + std::string(label) + "'");
}

namespace {

void count_symbols(const RawTree& t, std::vector<std::string>& word_order,
                   std::unordered_map<std::string, std::uint64_t>& word_counts,
                   Vocabularies& v) {
  if (t.is_leaf()) {
    auto [it, fresh] = word_counts.try_emplace(t.word, 0);
    if (fresh) word_order.push_back(t.word);
    ++it->second;
    v.tags.intern(t.tag, 1);
    return;
  }
  v.labels.intern(t.label, 1);
  for (const auto& c : t.children) count_symbols(c, word_order, word_counts, v);
}

}  // namespace

Vocabularies build_vocabularies(std::span<const RawTree> trees, std::size_t unk_threshold) {
  if (trees.empty()) throw Error(Errc::EmptyCorpus, "no trees to build vocabularies from");
  Vocabularies v;
  v.unk_threshold = unk_threshold;
  v.words.intern(Vocabularies::kUnkSymbol);

  std::vector<std::string> order;
  std::unordered_map<std::string, std::uint64_t> counts;
  for (const auto& t : trees) count_symbols(t, order, counts, v);

  for (const auto& w : order) {
    const auto n = counts[w];
    if (n < unk_threshold || w == Vocabularies::kUnkSymbol)
      v.words.add_count(Vocabularies::kUnk, n);
    else
      v.words.intern(w, n);
  }
  return v;
}

CorpusSplit split_corpus(std::size_t count, double grow_fraction, std::uint64_t seed) {
  if (!(grow_fraction > 0.0 && grow_fraction < 1.0))
    throw Error(Errc::FractionOutOfRange,
                "grow fraction must lie in (0, 1), got " + std::to_string(grow_fraction));
  if (count == 0) throw Error(Errc::EmptyCorpus, "nothing to split");

  std::vector<std::size_t> order(count);
  for (std::size_t i = 0; i < count; ++i) order[i] = i;
  // Fisher-Yates driven directly by mt19937_64, whose output sequence is
  // fixed by the standard; std::shuffle's is not.
  std::mt19937_64 rng(seed);
  for (std::size_t i = count - 1; i > 0; --i) {
    const std::size_t j = static_cast<std::size_t>(rng() % (i + 1));
    std::swap(order[i], order[j]);
  }

  auto n_grow = static_cast<std::size_t>(std::llround(static_cast<double>(count) * grow_fraction));
  n_grow = std::clamp<std::size_t>(n_grow, 1, count);

  CorpusSplit split;
  split.grow.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_grow));
  split.smooth.assign(order.begin() + static_cast<std::ptrdiff_t>(n_grow), order.end());
  std::sort(split.grow.begin(), split.grow.end());
  std::sort(split.smooth.begin(), split.smooth.end());
  split.smooth_empty = split.smooth.empty();
  return split;
}

}  // namespace spatter
