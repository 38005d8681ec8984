#include <iostream>
#include <new>

#include "CLI11.hpp"
#include "spatter/cli/commands.hpp"
#include "spatter/error.hpp"

namespace {

constexpr int kUsage = 1;
constexpr int kDataError = 2;
constexpr int kInternal = 3;

void add_common(CLI::App* cmd, spatter::cli::Common& c) {
  cmd->add_option("--format", c.format, "Treebank format: underscore or penn")
      ->check(CLI::IsMember({"underscore", "penn"}))
      ->capture_default_str();
  cmd->add_option("--seed", c.seed, "Seed for the grow/smooth split");
  cmd->add_option("--config", c.config_path, "key = value settings file")->check(CLI::ExistingFile);
}

}  // namespace

int main(int argc, char** argv) {
  namespace cli = spatter::cli;
  CLI::App app{"spatter: decision-tree statistical parser"};
  app.require_subcommand(1);

  cli::ClassesOptions classes;
  auto* c = app.add_subcommand("classes", "Build word, tag and label class trees from a treebank");
  add_common(c, classes.common);
  c->add_option("treebank", classes.treebank, "Treebank file")->required();
  c->add_option("-o,--out", classes.out, "Output class file")->required();

  cli::TrainOptions train;
  auto* t = app.add_subcommand("train", "Train the tagging, extension and labelling models");
  add_common(t, train.common);
  t->add_option("treebank", train.treebank, "Treebank file")->required();
  t->add_option("--classes", train.classes, "Class file from `spatter classes`")->required();
  t->add_option("-o,--out", train.out, "Output model file")->required();
  t->add_option("--heads", train.heads, "Head rule file")->check(CLI::ExistingFile);
  t->add_option("--grow-fraction", train.grow_fraction, "Share of trees used for growing (default 0.9)");

  cli::ParseOptions parse;
  auto* p = app.add_subcommand("parse", "Parse sentences, one per line");
  add_common(p, parse.common);
  p->add_option("model", parse.model, "Model file")->required();
  p->add_option("input", parse.input, "Input file, - for stdin")->capture_default_str();
  p->add_option("--max-length", parse.max_length, "Skip sentences longer than this (default 40)");
  p->add_option("--threads", parse.threads, "Worker threads (default 1)");
  p->add_option("--beam-width", parse.beam_width, "Phase-1 expansions per decision depth");
  p->add_option("--max-hypotheses", parse.max_hypotheses, "Live hypothesis cap");

  cli::EvalOptions eval;
  std::string report_dir;
  auto add_eval = [&](CLI::App* cmd) {
    add_common(cmd, eval.common);
    cmd->add_option("gold", eval.gold, "Reference treebank")->required();
    cmd->add_option("test", eval.test, "Parser output or treebank, one tree per line")->required();
    cmd->add_option("--test-format", eval.test_format, "Format of the test trees")
        ->check(CLI::IsMember({"underscore", "penn"}))
        ->capture_default_str();
    cmd->add_option("--ranges", eval.ranges, "Length ranges, e.g. 4:40,4:25,10:20");
    cmd->add_flag("--exclude-root", eval.exclude_root, "Do not count the root bracket");
    cmd->add_flag("--collapse-unary", eval.collapse_unary, "Count a unary chain over one span once");
  };
  auto* e = app.add_subcommand("eval", "Score parses against a treebank (table CSV on stdout)");
  add_eval(e);
  e->add_option("--sentences", eval.sentences, "Also write per-sentence TSV here");
  auto* r = app.add_subcommand("report", "Write table, per-sentence and per-length reports");
  add_eval(r);
  r->add_option("--out-dir", report_dir, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int code = app.exit(err);
    return code == 0 ? 0 : kUsage;
  }

  try {
    if (*c) cli::cmd_classes(classes, std::cout);
    else if (*t) cli::cmd_train(train, std::cout);
    else if (*p) cli::cmd_parse(parse, std::cout, std::cerr);
    else if (*e) cli::cmd_eval(eval, std::cout, std::cerr);
    else if (*r) cli::cmd_report(eval, report_dir, std::cerr);
  } catch (const spatter::Error& err) {
    std::cerr << "error: " << err.what() << '\n';
    return kDataError;
  } catch (const std::exception& err) {
    std::cerr << "internal error: " << err.what() << '\n';
    return kInternal;
  }
  return 0;
}
