#include "spatter/config.hpp"

#include <cctype>
#include <charconv>
#include <cstdio>
#include <sstream>
#include <string>

#include "spatter/error.hpp"

namespace spatter {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

template <typename T>
T number(std::string_view key, std::string_view v) {
  T out{};
  const auto [end, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || end != v.data() + v.size())
    throw Error(Errc::BadConfig, "bad value '" + std::string(v) + "' for " + std::string(key));
  return out;
}

bool boolean(std::string_view key, std::string_view v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw Error(Errc::BadConfig, "bad value '" + std::string(v) + "' for " + std::string(key));
}

std::string exact(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void train_lines(std::ostringstream& os, const TrainConfig& c) {
  os << "grow.min_events = " << c.grow.min_events << '\n'
     << "grow.min_gain = " << exact(c.grow.min_gain) << '\n'
     << "grow.max_depth = " << c.grow.max_depth << '\n'
     << "smooth.max_iterations = " << c.smooth.max_iterations << '\n'
     << "smooth.tolerance = " << exact(c.smooth.tolerance) << '\n'
     << "smooth.lambda_max = " << exact(c.smooth.lambda_max) << '\n'
     << "unk_threshold = " << c.unk_threshold << '\n'
     << "word_bits = " << c.word_bits << '\n'
     << "tag_bits = " << c.tag_bits << '\n'
     << "label_bits = " << c.label_bits << '\n'
     << "class_window = " << c.class_window << '\n'
     << "max_unary_chain = " << c.max_unary_chain << '\n'
     << "renormalize = " << (c.renormalize ? "true" : "false") << '\n';
}

}  // namespace

void set_config_value(RunConfig& c, std::string_view key, std::string_view v) {
  auto& t = c.train;
  if (key == "grow.min_events") t.grow.min_events = number<std::size_t>(key, v);
  else if (key == "grow.min_gain") t.grow.min_gain = number<double>(key, v);
  else if (key == "grow.max_depth") t.grow.max_depth = number<int>(key, v);
  else if (key == "smooth.max_iterations") t.smooth.max_iterations = number<int>(key, v);
  else if (key == "smooth.tolerance") t.smooth.tolerance = number<double>(key, v);
  else if (key == "smooth.lambda_max") t.smooth.lambda_max = number<double>(key, v);
  else if (key == "unk_threshold") t.unk_threshold = number<std::size_t>(key, v);
  else if (key == "word_bits") t.word_bits = number<int>(key, v);
  else if (key == "tag_bits") t.tag_bits = number<int>(key, v);
  else if (key == "label_bits") t.label_bits = number<int>(key, v);
  else if (key == "class_window") t.class_window = number<std::size_t>(key, v);
  else if (key == "max_unary_chain") t.max_unary_chain = number<int>(key, v);
  else if (key == "renormalize") t.renormalize = boolean(key, v);
  else if (key == "search.beam_width") c.search.beam_width = number<std::size_t>(key, v);
  else if (key == "search.switch_threshold") c.search.switch_threshold = number<double>(key, v);
  else if (key == "search.max_hypotheses") c.search.max_hypotheses = number<std::size_t>(key, v);
  else if (key == "search.max_length") c.search.max_length = number<std::size_t>(key, v);
  else if (key == "grow_fraction") c.grow_fraction = number<double>(key, v);
  else if (key == "seed") c.seed = number<std::uint64_t>(key, v);
  else if (key == "threads") c.threads = number<std::size_t>(key, v);
  else throw Error(Errc::BadConfig, "unknown key '" + std::string(key) + "'");

  if (t.word_bits < 1 || t.word_bits > 63 || t.tag_bits < 1 || t.tag_bits > 63 || t.label_bits < 1 ||
      t.label_bits > 63)
    throw Error(Errc::BadConfig, "class bit budgets must be in 1..63");
  if (t.smooth.lambda_max <= 0.0 || t.smooth.lambda_max > 1.0)
    throw Error(Errc::BadConfig, "smooth.lambda_max must be in (0, 1]");
  if (c.search.beam_width == 0) throw Error(Errc::BadConfig, "search.beam_width must be positive");
}

RunConfig parse_config(std::string_view text, RunConfig base) {
  std::size_t line_no = 0;
  while (!text.empty()) {
    ++line_no;
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw Error(Errc::BadConfig, "line " + std::to_string(line_no) + ": expected key = value");
    try {
      set_config_value(base, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    } catch (const Error& e) {
      throw Error(Errc::BadConfig, "line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return base;
}

std::string to_text(const TrainConfig& config) {
  std::ostringstream os;
  train_lines(os, config);
  return os.str();
}

std::string to_text(const RunConfig& c) {
  std::ostringstream os;
  train_lines(os, c.train);
  os << "search.beam_width = " << c.search.beam_width << '\n'
     << "search.switch_threshold = " << exact(c.search.switch_threshold) << '\n'
     << "search.max_hypotheses = " << c.search.max_hypotheses << '\n'
     << "search.max_length = " << c.search.max_length << '\n'
     << "grow_fraction = " << exact(c.grow_fraction) << '\n'
     << "seed = " << c.seed << '\n'
     << "threads = " << c.threads << '\n';
  return os.str();
}

TrainConfig parse_train_config(std::string_view text) { return parse_config(text).train; }

}  // namespace spatter
