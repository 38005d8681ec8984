#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "spatter/cli/commands.hpp"
#include "spatter/error.hpp"
#include "spatter/model_io.hpp"
#include "spatter/search.hpp"

using namespace spatter;
namespace fs = std::filesystem;

namespace {

const std::string kData = SPATTER_TEST_DATA_DIR;

struct Workdir {
  fs::path dir;
  Workdir() {
    static int n = 0;
    dir = fs::temp_directory_path() / ("spatter_cli_test_" + std::to_string(::getpid()) + "_" + std::to_string(n++));
    fs::create_directories(dir);
    std::ofstream(dir / "toy.conf") << "unk_threshold = 1\ngrow.min_events = 2\ngrow.min_gain = 0.001\nword_bits = 12\n";
  }
  ~Workdir() { fs::remove_all(dir); }
  std::string operator/(const std::string& f) const { return (dir / f).string(); }
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

cli::Common common(const Workdir& w) {
  cli::Common c;
  c.config_path = w / "toy.conf";
  c.seed = 7;
  return c;
}

std::string build_model(const Workdir& w, std::string* train_log = nullptr) {
  std::ostringstream log;
  cli::cmd_classes({common(w), kData + "/toy.trees", w / "toy.classes"}, log);
  cli::TrainOptions t;
  t.common = common(w);
  t.treebank = kData + "/toy.trees";
  t.classes = w / "toy.classes";
  t.out = w / "toy.model";
  t.heads = kData + "/toy.heads";
  std::ostringstream tlog;
  cli::cmd_train(t, tlog);
  if (train_log) *train_log = tlog.str();
  return t.out;
}

std::string parse_lines(const Workdir& w, const std::string& model, const std::string& text,
                        std::size_t threads = 1) {
  std::ofstream(w / "in.txt") << text;
  cli::ParseOptions p;
  p.common = common(w);
  p.model = model;
  p.input = w / "in.txt";
  p.threads = threads;
  std::ostringstream out, log;
  cli::cmd_parse(p, out, log);
  return out.str();
}

Errc code_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return Errc::Io;
}

}  // namespace

TEST_CASE("classes writes trees within the bit budget and is reproducible") {
  Workdir w;
  std::ostringstream log;
  cli::cmd_classes({common(w), kData + "/toy.trees", w / "a.classes"}, log);
  cli::cmd_classes({common(w), kData + "/toy.trees", w / "b.classes"}, log);
  CHECK(slurp(w / "a.classes") == slurp(w / "b.classes"));
  CHECK(slurp(w / "a.classes.words") == slurp(w / "b.classes.words"));
  const auto c = load_classes(w / "a.classes");
  CHECK(c.word_tree().depth() <= 30);
  CHECK(log.str().find("words: 24 items") != std::string::npos);
  CHECK(slurp(w / "a.classes.words").rfind("0\t", 0) == 0);

  std::ofstream(w / "empty.trees") << "";
  CHECK(code_of([&] { cli::cmd_classes({common(w), w / "empty.trees", w / "e.classes"}, log); }) ==
        Errc::EmptyCorpus);
  CHECK(code_of([&] { cli::cmd_classes({common(w), w / "missing.trees", w / "e.classes"}, log); }) == Errc::Io);
}

TEST_CASE("train reports tag events equal to the corpus leaf count") {
  Workdir w;
  std::string log;
  build_model(w, &log);
  std::size_t leaves = 0;
  for (const auto& t : parse_treebank(slurp(kData + "/toy.trees"), TreeFormat::UnderscoreSuffix))
    leaves += t.leaf_count();
  std::size_t grow = 0, smooth = 0;
  const auto pos = log.find("tag events: ");
  REQUIRE(pos != std::string::npos);
  std::istringstream line(log.substr(pos + 12));
  std::string word;
  line >> grow >> word >> smooth;
  CHECK(grow + smooth == leaves);
  CHECK(log.find("split: 45 growing, 5 smoothing") != std::string::npos);

  cli::TrainOptions bad;
  bad.common = common(w);
  bad.treebank = kData + "/toy.trees";
  bad.classes = w / "toy.classes";
  bad.out = w / "x.model";
  bad.grow_fraction = 1.5;
  std::ostringstream sink;
  CHECK(code_of([&] { cli::cmd_train(bad, sink); }) == Errc::FractionOutOfRange);
}

TEST_CASE("parse output matches the exhaustive oracle and keeps input order") {
  Workdir w;
  const auto model_path = build_model(w);
  const auto models = load_model(model_path);
  const std::string input =
      "john sees the big dog\n"
      "the cat slept\n"
      "a man has every old cat with mary\n"
      "the zebra slept\n"
      "\n"
      "the dog sees the cat with the man near the park in paris\n";
  const auto one = parse_lines(w, model_path, input, 1);
  CHECK(parse_lines(w, model_path, input, 3) == one);

  std::istringstream lines(one);
  std::vector<std::string> rows;
  for (std::string l; std::getline(lines, l);) rows.push_back(l);
  REQUIRE(rows.size() == 6);

  const std::vector<std::string> words = {"john", "sees", "the", "big", "dog"};
  const auto oracle = exhaustive_parse(models, words);
  REQUIRE(oracle.tree);
  CHECK(rows[0].substr(0, rows[0].find('\t')) == to_string(*oracle.tree));
  CHECK(rows[0].ends_with("\toptimal"));
  CHECK(rows[1].rfind("(S (NP the_DT cat_NN) (VP slept_VBD))\t", 0) == 0);
  // No tag dictionary: an unseen word still gets a parse.
  CHECK(rows[3].find("zebra_") != std::string::npos);
  CHECK(rows[4] == "SKIP\t-\tempty");

  std::ofstream(w / "long.txt") << input;
  cli::ParseOptions p;
  p.common = common(w);
  p.model = model_path;
  p.input = w / "long.txt";
  p.max_length = 8;
  std::ostringstream out, log;
  cli::cmd_parse(p, out, log);
  CHECK(out.str().find("SKIP\t-\ttoo-long") != std::string::npos);
}

TEST_CASE("pipeline is deterministic end to end") {
  Workdir a, b;
  const auto ma = build_model(a);
  const auto mb = build_model(b);
  CHECK(slurp(ma) == slurp(mb));
  const std::string input = "mary likes the red cat\njohn left\n";
  CHECK(parse_lines(a, ma, input) == parse_lines(b, mb, input));
}

TEST_CASE("eval of a treebank against itself is perfect") {
  Workdir w;
  cli::EvalOptions e;
  e.gold = kData + "/toy.trees";
  e.test = kData + "/toy.trees";
  e.sentences = w / "s.tsv";
  std::ostringstream out, log;
  cli::cmd_eval(e, out, log);
  const auto csv = out.str();
  CHECK(csv.rfind("Sent. Length Range,4-40,4-25,10-20\n", 0) == 0);
  CHECK(csv.find("\"Precision\",100.00,100.00,100.00") != std::string::npos);
  CHECK(csv.find("\"Crossings Per Sentence\",0.00,0.00,0.00") != std::string::npos);
  CHECK(slurp(w / "s.tsv").rfind("sentence\tlength", 0) == 0);

  e.ranges = "3:30";
  std::ostringstream single;
  cli::cmd_eval(e, single, log);
  CHECK(single.str().rfind("Sent. Length Range,3-30\n", 0) == 0);
}

TEST_CASE("report writes all three files") {
  Workdir w;
  cli::EvalOptions e;
  e.gold = kData + "/toy.trees";
  e.test = kData + "/toy.trees";
  std::ostringstream log;
  cli::cmd_report(e, w / "rep", log);
  CHECK(slurp(w / "rep/table.csv").find("\"Labelled Recall\"") != std::string::npos);
  CHECK(slurp(w / "rep/lengths.csv").rfind("length,crossings,precision,recall,frequency\n", 0) == 0);
  CHECK(fs::exists(w / "rep/sentences.tsv"));
}

TEST_CASE("misaligned evaluation input") {
  Workdir w;
  std::ofstream(w / "short.txt") << "(S (NP john_NNP) (VP ran_VBD))\n";
  cli::EvalOptions e;
  e.gold = kData + "/toy.trees";
  e.test = w / "short.txt";
  std::ostringstream out, log;
  CHECK(code_of([&] { cli::cmd_eval(e, out, log); }) == Errc::AlignmentMismatch);

  std::ofstream(w / "one.trees") << "(S (NP john_NNP) (VP ran_VBD))\n";
  std::ofstream(w / "other.txt") << "(S (NP mary_NNP) (VP ran_VBD))\n";
  e.gold = w / "one.trees";
  e.test = w / "other.txt";
  try {
    cli::cmd_eval(e, out, log);
    FAIL("expected AlignmentMismatch");
  } catch (const Error& err) {
    CHECK(err.code() == Errc::AlignmentMismatch);
    CHECK(std::string(err.what()).find("line 1") != std::string::npos);
  }
}

TEST_CASE("configuration file and flag precedence") {
  Workdir w;
  std::ofstream(w / "c.conf") << "seed = 3\nsearch.beam_width = 2\n";
  cli::Common c;
  c.config_path = w / "c.conf";
  CHECK(cli::resolve_config(c).seed == 3);
  c.seed = 9;
  CHECK(cli::resolve_config(c).seed == 9);
  CHECK(cli::resolve_config(c).search.beam_width == 2);
}
