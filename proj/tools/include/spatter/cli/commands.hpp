#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

#include "spatter/config.hpp"
#include "spatter/corpus.hpp"

namespace spatter::cli {

struct Common {
  std::string format = "underscore";
  std::optional<std::uint64_t> seed;
  std::string config_path;  // key = value file, optional
};

// Config file first, then command-line overrides.
RunConfig resolve_config(const Common& common);

std::string read_text(const std::string& path);  // "-" reads stdin

struct ClassesOptions {
  Common common;
  std::string treebank;
  std::string out;
};

// Writes the binary class set to `out` and `id TAB bits` exports to
// out.words, out.tags and out.labels.
void cmd_classes(const ClassesOptions& opt, std::ostream& log);

struct TrainOptions {
  Common common;
  std::string treebank;
  std::string classes;
  std::string out;
  std::string heads;  // head rule file; empty uses the built-in default
  std::optional<double> grow_fraction;
};

void cmd_train(const TrainOptions& opt, std::ostream& log);

struct ParseOptions {
  Common common;
  std::string model;
  std::string input = "-";
  std::optional<std::size_t> max_length;
  std::optional<std::size_t> threads;
  std::optional<std::size_t> beam_width;
  std::optional<std::size_t> max_hypotheses;
};

// One output line per input line: `tree TAB logprob TAB status`, or a
// SKIP / NOPARSE marker in the tree column.
void cmd_parse(const ParseOptions& opt, std::ostream& out, std::ostream& log);

struct EvalOptions {
  Common common;
  std::string gold;
  std::string test;
  std::string test_format = "underscore";
  std::string ranges;  // "4:40,4:25,10:20" when empty
  bool exclude_root = false;
  bool collapse_unary = false;
  std::string sentences;  // per-sentence TSV path, optional
};

void cmd_eval(const EvalOptions& opt, std::ostream& out, std::ostream& log);

// Table CSV, per-sentence TSV and per-length CSV into `dir`.
void cmd_report(const EvalOptions& opt, const std::string& dir, std::ostream& log);

}  // namespace spatter::cli
