#include "spatter/model_io.hpp"

#include <zlib.h>

#include <bit>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

#include "spatter/config.hpp"
#include "spatter/error.hpp"

namespace spatter {

namespace {

constexpr char kModelMagic[8] = {'S', 'P', 'A', 'T', 'M', 'O', 'D', 'L'};
constexpr char kClassMagic[8] = {'S', 'P', 'A', 'T', 'C', 'L', 'A', 'S'};

class Writer {
 public:
  void u8(std::uint8_t v) { buf_.push_back(static_cast<char>(v)); }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) u8(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) u8(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void i32(std::int32_t v) { u32(static_cast<std::uint32_t>(v)); }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void str(std::string_view s) {
    u64(s.size());
    buf_.append(s);
  }
  void raw(std::string_view s) { buf_.append(s); }
  std::string& bytes() { return buf_; }

 private:
  std::string buf_;
};

class Reader {
 public:
  Reader(std::string_view data, std::string what) : data_(data), what_(std::move(what)) {}

  std::uint8_t u8() {
    need(1);
    return static_cast<std::uint8_t>(data_[pos_++]);
  }
  std::uint32_t u32() {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(u8()) << (8 * i);
    return v;
  }
  std::uint64_t u64() {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(u8()) << (8 * i);
    return v;
  }
  std::int32_t i32() { return static_cast<std::int32_t>(u32()); }
  double f64() { return std::bit_cast<double>(u64()); }
  std::string_view raw(std::size_t n) {
    need(n);
    auto s = data_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  std::string str() { return std::string(raw(count())); }
  // A length prefix, checked against what is left so corrupt files fail fast.
  std::size_t count(std::size_t unit = 1) {
    const auto n = u64();
    if (n > (data_.size() - pos_) / unit) fail("length field out of range");
    return static_cast<std::size_t>(n);
  }
  bool done() const { return pos_ == data_.size(); }
  [[noreturn]] void fail(const std::string& msg) const {
    throw Error(Errc::BadModelFile, what_ + ": " + msg);
  }

 private:
  void need(std::size_t n) {
    if (data_.size() - pos_ < n) fail("truncated");
  }
  std::string_view data_;
  std::size_t pos_ = 0;
  std::string what_;
};

std::uint32_t crc(std::string_view s) {
  return static_cast<std::uint32_t>(
      ::crc32(0L, reinterpret_cast<const Bytef*>(s.data()), static_cast<uInt>(s.size())));
}

using Sections = std::map<std::string, std::string>;

std::string container(const char (&magic)[8], const std::vector<std::pair<std::string, std::string>>& sections) {
  Writer w;
  w.raw(std::string_view(magic, 8));
  w.u32(kModelFormatVersion);
  w.u32(static_cast<std::uint32_t>(sections.size()));
  for (const auto& [tag, body] : sections) {
    w.raw(tag);
    w.u64(body.size());
    w.u32(crc(body));
    w.raw(body);
  }
  return std::move(w.bytes());
}

Sections open_container(const char (&magic)[8], std::string_view bytes, const char* kind) {
  Reader r(bytes, kind);
  if (bytes.size() < 8 || std::memcmp(bytes.data(), magic, 8) != 0)
    throw Error(Errc::BadModelFile, std::string("not a spatter ") + kind + " file");
  r.raw(8);
  const auto version = r.u32();
  if (version != kModelFormatVersion)
    throw Error(Errc::VersionMismatch, std::string(kind) + " file has format version " +
                                           std::to_string(version) + ", expected " +
                                           std::to_string(kModelFormatVersion));
  const auto n = r.u32();
  Sections out;
  for (std::uint32_t i = 0; i < n; ++i) {
    std::string tag(r.raw(4));
    const auto size = r.count();
    const auto sum = r.u32();
    const auto body = r.raw(size);
    if (crc(body) != sum) throw Error(Errc::ChecksumMismatch, "section " + tag + " fails its checksum");
    out[tag] = std::string(body);
  }
  if (!r.done()) r.fail("trailing bytes");
  return out;
}

const std::string& section(const Sections& s, const std::string& tag) {
  const auto it = s.find(tag);
  if (it == s.end()) throw Error(Errc::BadModelFile, "missing section " + tag);
  return it->second;
}

void put(Writer& w, const SymbolTable& t) {
  w.u64(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) {
    w.str(t.symbol(static_cast<int>(i)));
    w.u64(t.count(static_cast<int>(i)));
  }
}

SymbolTable get_symbols(Reader& r) {
  SymbolTable t;
  const auto n = r.count(16);
  for (std::size_t i = 0; i < n; ++i) {
    auto s = r.str();
    const auto c = r.u64();
    if (t.intern(s, c) != static_cast<int>(i)) r.fail("duplicate symbol '" + s + "'");
  }
  return t;
}

std::string put_vocab(const Vocabularies& v) {
  Writer w;
  w.u64(v.unk_threshold);
  put(w, v.words);
  put(w, v.tags);
  put(w, v.labels);
  return std::move(w.bytes());
}

Vocabularies get_vocab(std::string_view body) {
  Reader r(body, "VOCB");
  Vocabularies v;
  v.unk_threshold = r.u64();
  v.words = get_symbols(r);
  v.tags = get_symbols(r);
  v.labels = get_symbols(r);
  if (!r.done()) r.fail("trailing bytes");
  if (v.words.size() == 0 || v.words.symbol(Vocabularies::kUnk) != Vocabularies::kUnkSymbol)
    r.fail("word table lacks the unknown-word entry");
  return v;
}

std::string put_classes(const Schema::ClassTrees& trees) {
  Writer w;
  for (const auto& t : trees) {
    w.i32(t->budget());
    w.u64(t->size());
    for (std::size_t i = 0; i < t->size(); ++i) {
      w.u64(t->codes()[i]);
      w.i32(t->depths()[i]);
    }
  }
  return std::move(w.bytes());
}

Schema::ClassTrees get_classes(std::string_view body) {
  Reader r(body, "CLAS");
  Schema::ClassTrees trees;
  for (auto& t : trees) {
    const int budget = r.i32();
    const auto n = r.count(12);
    std::vector<std::uint64_t> codes(n);
    std::vector<int> depths(n);
    for (std::size_t i = 0; i < n; ++i) {
      codes[i] = r.u64();
      depths[i] = r.i32();
    }
    t = std::make_shared<const ClassTree>(ClassTree::from_codes(std::move(codes), std::move(depths), budget));
  }
  if (!r.done()) r.fail("trailing bytes");
  return trees;
}

std::string put_model(const SmoothedModel& m) {
  Writer w;
  const auto& tree = m.tree();
  w.u64(tree.future_count());
  w.u64(tree.slot_count());
  w.u64(tree.size());
  for (const auto& n : tree.nodes()) {
    w.u8(n.is_leaf ? 1 : 0);
    w.u32(n.question.slot);
    w.u8(static_cast<std::uint8_t>(n.question.kind));
    w.i32(n.question.param);
    w.i32(n.yes);
    w.i32(n.no);
    w.i32(n.parent);
    w.i32(n.depth);
    w.u64(n.total);
    w.f64(n.gain);
    std::size_t nonzero = 0;
    for (auto c : n.counts) nonzero += c != 0;
    w.u64(nonzero);
    for (std::size_t f = 0; f < n.counts.size(); ++f)
      if (n.counts[f] != 0) {
        w.u32(static_cast<std::uint32_t>(f));
        w.u64(n.counts[f]);
      }
  }
  w.u64(m.lambdas().size());
  for (double l : m.lambdas()) w.f64(l);
  return std::move(w.bytes());
}

SmoothedModel get_model(std::string_view body, const char* tag) {
  Reader r(body, tag);
  const auto futures = r.count();
  const auto slots = r.count();
  const auto n = r.count(30);
  std::vector<DTNode> nodes(n);
  for (auto& node : nodes) {
    node.is_leaf = r.u8() != 0;
    const auto slot = r.u32();
    if (slot >= slots && !node.is_leaf) r.fail("question slot out of range");
    node.question.slot = static_cast<std::uint16_t>(slot);
    const auto kind = r.u8();
    if (kind > 2) r.fail("unknown question kind");
    node.question.kind = static_cast<QuestionKind>(kind);
    node.question.param = r.i32();
    node.yes = r.i32();
    node.no = r.i32();
    node.parent = r.i32();
    node.depth = r.i32();
    node.total = r.u64();
    node.gain = r.f64();
    node.counts.assign(futures, 0);
    const auto nonzero = r.count(12);
    for (std::size_t k = 0; k < nonzero; ++k) {
      const auto f = r.u32();
      if (f >= futures) r.fail("future out of range");
      node.counts[f] = r.u64();
    }
    const auto in_range = [&](int id) { return id >= 0 && static_cast<std::size_t>(id) < n; };
    if (!node.is_leaf && (!in_range(node.yes) || !in_range(node.no))) r.fail("child index out of range");
    if (node.parent != -1 && !in_range(node.parent)) r.fail("parent index out of range");
  }
  std::vector<double> lambdas(r.count(8));
  for (auto& l : lambdas) l = r.f64();
  if (!r.done()) r.fail("trailing bytes");
  if (nodes.empty()) r.fail("empty tree");
  DecisionTree tree(std::move(nodes), futures, slots);
  if (lambdas.size() < bucket_count(tree)) r.fail("too few interpolation weights");
  return SmoothedModel::with_lambdas(std::move(tree), std::move(lambdas));
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::Io, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw Error(Errc::Io, "cannot read " + path.string());
  return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::Io, "cannot create " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(Errc::Io, "cannot write " + path.string());
}

constexpr const char* kModelTags[kModelKinds] = {"TAGM", "EXTM", "LABM"};

}  // namespace

std::string serialize(const ModelSet& m) {
  Writer head;
  head.str(m.head_rules().to_text());
  Writer conf;
  conf.i32(m.max_unary_chain());
  conf.str(to_text(m.config()));
  std::vector<std::pair<std::string, std::string>> sections = {
      {"VOCB", put_vocab(m.vocab())},
      {"CLAS", put_classes(m.classes().trees)},
      {"HEAD", std::move(head.bytes())},
  };
  for (int k = 0; k < kModelKinds; ++k)
    sections.emplace_back(kModelTags[k], put_model(m.model(static_cast<ModelKind>(k))));
  sections.emplace_back("CONF", std::move(conf.bytes()));
  return container(kModelMagic, sections);
}

ModelSet deserialize_model(const std::string& bytes) {
  const auto s = open_container(kModelMagic, bytes, "model");
  ClassSet classes{get_vocab(section(s, "VOCB")), get_classes(section(s, "CLAS"))};

  Reader hr(section(s, "HEAD"), "HEAD");
  auto head_text = hr.str();
  if (!hr.done()) hr.fail("trailing bytes");
  auto heads = HeadRuleTable::load(head_text);

  std::array<SmoothedModel, kModelKinds> models;
  for (int k = 0; k < kModelKinds; ++k) models[k] = get_model(section(s, kModelTags[k]), kModelTags[k]);

  Reader cr(section(s, "CONF"), "CONF");
  const int umax = cr.i32();
  auto config = parse_train_config(cr.str());
  if (!cr.done()) cr.fail("trailing bytes");

  try {
    return ModelSet(std::move(classes), std::move(heads), umax, std::move(models), config);
  } catch (const Error& e) {
    throw Error(Errc::BadModelFile, std::string("inconsistent model: ") + e.what());
  }
}

std::string serialize(const ClassSet& c) {
  return container(kClassMagic, {{"VOCB", put_vocab(c.vocab)}, {"CLAS", put_classes(c.trees)}});
}

ClassSet deserialize_classes(const std::string& bytes) {
  const auto s = open_container(kClassMagic, bytes, "classes");
  ClassSet c{get_vocab(section(s, "VOCB")), get_classes(section(s, "CLAS"))};
  if (c.trees[0]->size() != c.vocab.words.size() || c.trees[1]->size() != c.vocab.tags.size() ||
      c.trees[2]->size() != c.vocab.labels.size() + 1)
    throw Error(Errc::BadModelFile, "class trees do not match the vocabularies");
  return c;
}

void save_model(const ModelSet& models, const std::filesystem::path& path) { write_file(path, serialize(models)); }
ModelSet load_model(const std::filesystem::path& path) { return deserialize_model(read_file(path)); }
void save_classes(const ClassSet& classes, const std::filesystem::path& path) {
  write_file(path, serialize(classes));
}
ClassSet load_classes(const std::filesystem::path& path) { return deserialize_classes(read_file(path)); }

}  // namespace spatter
