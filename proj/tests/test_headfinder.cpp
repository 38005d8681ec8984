#include "doctest.h"
#include "spatter/error.hpp"
#include "spatter/headfinder.hpp"

using namespace spatter;

TEST_CASE("default table picks the rightmost child") {
  HeadRuleTable t;
  CHECK(t.size() == 1);
  const std::vector<std::string> kids = {"DT", "JJ", "NN"};
  CHECK(t.head_child("NP", kids) == 2);
}

TEST_CASE("priority symbols are tried before positions") {
  const auto t = HeadRuleTable::load("VP left VB VBZ\nNP right NN NNS\n");
  CHECK(t.size() == 3);
  CHECK(t.head_child("VP", std::vector<std::string>{"RB", "VBZ", "VB", "NP"}) == 2);
  CHECK(t.head_child("VP", std::vector<std::string>{"RB", "NP"}) == 0);
  CHECK(t.head_child("NP", std::vector<std::string>{"NN", "NNS", "NN"}) == 2);
  CHECK(t.head_child("PP", std::vector<std::string>{"IN", "NP"}) == 1);
}

TEST_CASE("wildcard rules and comments") {
  const auto t = HeadRuleTable::load("# comment\n* left\n\nS right VP  # trailing\n");
  CHECK(t.head_child("X", std::vector<std::string>{"A", "B"}) == 0);
  CHECK(t.head_child("S", std::vector<std::string>{"VP", "NP"}) == 0);
  CHECK(t.rule_for("S").priorities == std::vector<std::string>{"VP"});
}

TEST_CASE("duplicate parents warn and the later rule wins") {
  std::vector<std::string> warnings;
  const auto t = HeadRuleTable::load("S left\nS right\n", &warnings);
  CHECK(warnings.size() == 1);
  CHECK(t.head_child("S", std::vector<std::string>{"A", "B"}) == 1);
}

TEST_CASE("bad rule lines name their line") {
  try {
    HeadRuleTable::load("S left\nNP sideways NN\n");
    FAIL("expected BadRuleSyntax");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::BadRuleSyntax);
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
  CHECK_THROWS_AS(HeadRuleTable::load("S\n"), Error);
}

TEST_CASE("text form reloads to the same table") {
  const auto t = HeadRuleTable::load("VP left VB VBZ\nNP right NN\n* left\n");
  CHECK(HeadRuleTable::load(t.to_text()) == t);
}
