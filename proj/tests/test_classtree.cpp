#include <cmath>
#include <map>
#include <random>
#include <set>

#include "doctest.h"
#include "spatter/classtree.hpp"
#include "spatter/error.hpp"

using namespace spatter;

namespace {

using Partition = std::vector<std::set<int>>;

// Average mutual information between adjacent classes, from scratch.
double ami(const Partition& part, const BigramCounts& bigrams) {
  std::map<int, int> cls;
  for (std::size_t c = 0; c < part.size(); ++c)
    for (int item : part[c]) cls[item] = static_cast<int>(c);
  const double total = static_cast<double>(bigrams.total());
  std::map<std::pair<int, int>, double> joint;
  std::map<int, double> left, right;
  for (const auto& [k, n] : bigrams.entries()) {
    const int a = cls.at(k.first), b = cls.at(k.second);
    const double p = static_cast<double>(n) / total;
    joint[{a, b}] += p;
    left[a] += p;
    right[b] += p;
  }
  double s = 0.0;
  for (const auto& [k, p] : joint)
    if (p > 0) s += p * std::log(p / (left[k.first] * right[k.second]));
  return s;
}

Partition merged(const Partition& p, std::size_t i, std::size_t j) {
  Partition out;
  std::set<int> u = p[i];
  u.insert(p[j].begin(), p[j].end());
  for (std::size_t k = 0; k < p.size(); ++k)
    if (k != i && k != j) out.push_back(p[k]);
  out.push_back(u);
  return out;
}

BigramCounts random_bigrams(std::mt19937_64& rng, int n) {
  BigramCounts b;
  std::uniform_int_distribution<int> item(0, n - 1);
  std::uniform_int_distribution<int> count(1, 9);
  for (int k = 0; k < 4 * n; ++k) b.add(item(rng), item(rng), static_cast<std::uint64_t>(count(rng)));
  for (int i = 0; i < n; ++i) b.add(i, (i + 1) % n);  // every item occurs
  return b;
}

// Replays the recorded merges and checks each against every alternative.
void check_greedy(int n, const BigramCounts& bigrams) {
  const auto tree = ClassTree::build(static_cast<std::size_t>(n), bigrams, 30);
  REQUIRE(tree.merges().size() == static_cast<std::size_t>(n - 1));
  std::map<int, std::set<int>> node_items;
  Partition part;
  for (int i = 0; i < n; ++i) {
    node_items[i] = {i};
    part.push_back({i});
  }
  int next = n;
  for (const auto& m : tree.merges()) {
    const double before = ami(part, bigrams);
    double best = 1e300;
    std::size_t li = 0, ri = 0;
    for (std::size_t i = 0; i < part.size(); ++i) {
      for (std::size_t j = i + 1; j < part.size(); ++j)
        best = std::min(best, before - ami(merged(part, i, j), bigrams));
      if (part[i] == node_items.at(m.left)) li = i;
      if (part[i] == node_items.at(m.right)) ri = i;
    }
    const double chosen = before - ami(merged(part, li, ri), bigrams);
    CHECK(chosen == doctest::Approx(best).epsilon(1e-9));
    CHECK(m.loss == doctest::Approx(chosen).epsilon(1e-9));
    part = merged(part, li, ri);
    node_items[next] = part.back();
    ++next;
  }
}

}  // namespace

TEST_CASE("two items split at bit 0") {
  BigramCounts b;
  b.add(0, 1, 3);
  b.add(1, 0, 1);
  const auto t = ClassTree::build(2, b, 30);
  CHECK(t.depth() == 1);
  CHECK(t.bit(0, 0) != t.bit(1, 0));
  CHECK(t.bit_string(0).size() == 30);
  CHECK(t.bit_string(0).substr(1) == std::string(29, '0'));
}

TEST_CASE("four items pair up by shared contexts") {
  // a=0 and b=1 always neighbour c=2 or d=3 and vice versa; a and b have
  // identical context distributions, as do c and d.
  BigramCounts bg;
  for (int x : {0, 1})
    for (int y : {2, 3}) {
      bg.add(x, y, 10);
      bg.add(y, x, 10);
    }
  bg.add(0, 2, 5);
  bg.add(1, 2, 5);
  bg.add(2, 0, 3);
  bg.add(3, 0, 3);
  const auto t = ClassTree::build(4, bg, 30);
  REQUIRE(t.merges().size() == 3);
  std::set<std::set<int>> first_two;
  for (int k = 0; k < 2; ++k) first_two.insert({t.merges()[k].left, t.merges()[k].right});
  CHECK(first_two == std::set<std::set<int>>{{0, 1}, {2, 3}});
  CHECK(t.bit(0, 0) == t.bit(1, 0));
  CHECK(t.bit(2, 0) == t.bit(3, 0));
  CHECK(t.bit(0, 0) != t.bit(2, 0));
  check_greedy(4, bg);
}

TEST_CASE("property: greedy merges match the brute-force loss on small vocabularies") {
  std::mt19937_64 rng(5);
  for (int n = 2; n <= 6; ++n)
    for (int rep = 0; rep < 10; ++rep) {
      CAPTURE(n);
      check_greedy(n, random_bigrams(rng, n));
    }
}

TEST_CASE("property: codes are prefix-free paths of the merge tree") {
  std::mt19937_64 rng(11);
  for (int n : {3, 7, 20, 50}) {
    const auto t = ClassTree::build(static_cast<std::size_t>(n), random_bigrams(rng, n), 30);
    std::set<std::uint64_t> codes(t.codes().begin(), t.codes().end());
    CHECK(codes.size() == static_cast<std::size_t>(n));
    CHECK_FALSE(t.has_collisions());
    CHECK(t.depth() <= n - 1);
  }
}

TEST_CASE("a small window still yields a full binary tree") {
  std::mt19937_64 rng(3);
  const auto t = ClassTree::build(30, random_bigrams(rng, 30), 30, 4);
  CHECK(t.merges().size() == 29);
  std::set<std::uint64_t> codes(t.codes().begin(), t.codes().end());
  CHECK(codes.size() == 30);
}

TEST_CASE("balanced trees and truncation") {
  const auto t = ClassTree::balanced(8, 3);
  CHECK(t.depth() == 3);
  for (int i = 0; i < 8; ++i) CHECK(t.item_depth(i) == 3);
  std::set<std::uint64_t> codes(t.codes().begin(), t.codes().end());
  CHECK(codes.size() == 8);

  const auto small = ClassTree::balanced(8, 2);
  CHECK(small.truncated());
  CHECK(small.has_collisions());
  CHECK(small.usable_bits() == 2);

  const auto five = ClassTree::balanced(5, 3);
  CHECK(five.depth() == 3);
  CHECK_FALSE(five.has_collisions());
}

TEST_CASE("lookups and rebuild from codes") {
  const auto t = ClassTree::balanced(5, 8);
  CHECK_THROWS_AS(t.code(5), Error);
  CHECK_THROWS_AS(t.code(-1), Error);
  CHECK(ClassTree::from_codes(t.codes(), t.depths(), t.budget()) == t);
  CHECK(t.export_text().find("0\t") == 0);
  CHECK_THROWS_AS(ClassTree::build(0, BigramCounts{}, 30), Error);
}

TEST_CASE("one item") {
  const auto t = ClassTree::build(1, BigramCounts{}, 30);
  CHECK(t.depth() == 0);
  CHECK(t.code(0) == 0);
}
