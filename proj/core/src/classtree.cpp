#include "spatter/classtree.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>

#include "spatter/error.hpp"

namespace spatter {

std::uint64_t BigramCounts::total() const noexcept {
  std::uint64_t n = 0;
  for (const auto& [k, v] : counts_) n += v;
  return n;
}

namespace {

double plogp_ratio(double p, double left, double right) {
  return p > 0.0 ? p * std::log(p / (left * right)) : 0.0;
}

// Agglomerative clusterer over a window of active slots. All quantities are
// probabilities (counts / total bigrams). Loss(i,j) is the drop in average
// mutual information when slots i and j are merged.
class Clusterer {
 public:
  Clusterer(std::size_t n, const BigramCounts& bigrams, std::size_t window)
      : n_(n), capacity_(std::max<std::size_t>(std::min(window, n), 2) + 1) {
    const double total = static_cast<double>(bigrams.total());
    item_left_.assign(n, 0.0);
    item_right_.assign(n, 0.0);
    out_.resize(n);
    in_.resize(n);
    for (const auto& [key, c] : bigrams.entries()) {
      const auto [l, r] = key;
      if (l < 0 || r < 0 || static_cast<std::size_t>(l) >= n || static_cast<std::size_t>(r) >= n)
        throw Error(Errc::UnknownId, "bigram references id outside vocabulary");
      const double p = total > 0 ? static_cast<double>(c) / total : 0.0;
      item_left_[static_cast<std::size_t>(l)] += p;
      item_right_[static_cast<std::size_t>(r)] += p;
      out_[static_cast<std::size_t>(l)].push_back({r, p});
      if (l != r) in_[static_cast<std::size_t>(r)].push_back({l, p});
    }
    const std::size_t k = capacity_;
    joint_.assign(k * k, 0.0);
    q_.assign(k * k, 0.0);
    loss_.assign(k * k, 0.0);
    left_.assign(k, 0.0);
    right_.assign(k, 0.0);
    node_.assign(k, -1);
    members_.resize(k);
    slot_of_.assign(n, -1);
  }

  std::vector<ClassTree::Merge> run() {
    std::vector<int> order(n_);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
      return item_left_[static_cast<std::size_t>(a)] + item_right_[static_cast<std::size_t>(a)] >
             item_left_[static_cast<std::size_t>(b)] + item_right_[static_cast<std::size_t>(b)];
    });
    next_node_ = static_cast<int>(n_);
    for (int item : order) {
      add_item(item);
      if (active_count() == capacity_) merge_best();
    }
    while (active_count() > 1) merge_best();
    return std::move(merges_);
  }

 private:
  struct Edge {
    int other;
    double p;
  };

  double& J(std::size_t a, std::size_t b) { return joint_[a * capacity_ + b]; }
  double& Q(std::size_t a, std::size_t b) { return q_[a * capacity_ + b]; }
  double& L(std::size_t a, std::size_t b) { return loss_[std::min(a, b) * capacity_ + std::max(a, b)]; }

  std::size_t active_count() const { return active_.size(); }

  double q(std::size_t a, std::size_t b) { return plogp_ratio(J(a, b), left_[a], right_[b]); }

  // Terms of the objective touching slot x.
  double own_terms(std::size_t x) {
    double s = 0.0;
    for (auto m : active_) s += Q(x, m) + Q(m, x);
    return s - Q(x, x);
  }

  // Loss of merging i and j, computed from scratch in O(active).
  double fresh_loss(std::size_t i, std::size_t j) {
    const double kl = left_[i] + left_[j];
    const double kr = right_[i] + right_[j];
    double merged = plogp_ratio(J(i, i) + J(i, j) + J(j, i) + J(j, j), kl, kr);
    for (auto m : active_) {
      if (m == i || m == j) continue;
      merged += plogp_ratio(J(i, m) + J(j, m), kl, right_[m]);
      merged += plogp_ratio(J(m, i) + J(m, j), left_[m], kr);
    }
    return own_terms(i) + own_terms(j) - Q(i, j) - Q(j, i) - merged;
  }

  void add_item(int item) {
    std::size_t w = 0;
    while (node_[w] != -1) ++w;
    const auto it = static_cast<std::size_t>(item);
    node_[w] = item;
    members_[w].assign(1, item);
    left_[w] = item_left_[it];
    right_[w] = item_right_[it];
    slot_of_[it] = static_cast<int>(w);
    for (std::size_t m = 0; m < capacity_; ++m) J(w, m) = J(m, w) = 0.0;
    for (const auto& e : out_[it]) {
      const int s = slot_of_[static_cast<std::size_t>(e.other)];
      if (s >= 0) J(w, static_cast<std::size_t>(s)) += e.p;
    }
    for (const auto& e : in_[it]) {
      const int s = slot_of_[static_cast<std::size_t>(e.other)];
      if (s >= 0) J(static_cast<std::size_t>(s), w) += e.p;
    }
    for (auto m : active_) {
      Q(w, m) = q(w, m);
      Q(m, w) = q(m, w);
    }
    Q(w, w) = q(w, w);

    // Existing pairs gain the terms against the newcomer.
    for (std::size_t a = 0; a < active_.size(); ++a) {
      for (std::size_t b = a + 1; b < active_.size(); ++b) {
        const auto i = active_[a], j = active_[b];
        const double kl = left_[i] + left_[j], kr = right_[i] + right_[j];
        L(i, j) += Q(i, w) + Q(w, i) + Q(j, w) + Q(w, j) -
                   plogp_ratio(J(i, w) + J(j, w), kl, right_[w]) -
                   plogp_ratio(J(w, i) + J(w, j), left_[w], kr);
      }
    }
    active_.push_back(w);
    std::sort(active_.begin(), active_.end());
    for (auto m : active_)
      if (m != w) L(w, m) = fresh_loss(w, m);
  }

  void merge_best() {
    std::size_t best_i = 0, best_j = 0;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < active_.size(); ++a)
      for (std::size_t b = a + 1; b < active_.size(); ++b) {
        const double l = L(active_[a], active_[b]);
        if (l < best) {
          best = l;
          best_i = active_[a];
          best_j = active_[b];
        }
      }
    merge(best_i, best_j, best);
  }

  // Merges slot b into slot a (a < b).
  void merge(std::size_t a, std::size_t b, double loss) {
    merges_.push_back({node_[a], node_[b], loss});
    const double cl = left_[a] + left_[b], cr = right_[a] + right_[b];

    // Incremental update of every pair not involving a or b.
    for (std::size_t x = 0; x < active_.size(); ++x) {
      const auto i = active_[x];
      if (i == a || i == b) continue;
      for (std::size_t y = x + 1; y < active_.size(); ++y) {
        const auto j = active_[y];
        if (j == a || j == b) continue;
        auto delta_own = [&](std::size_t s) {
          return plogp_ratio(J(s, a) + J(s, b), left_[s], cr) +
                 plogp_ratio(J(a, s) + J(b, s), cl, right_[s]) - Q(s, a) - Q(a, s) - Q(s, b) -
                 Q(b, s);
        };
        const double kl = left_[i] + left_[j], kr = right_[i] + right_[j];
        const double ka = J(i, a) + J(j, a), kb = J(i, b) + J(j, b);
        const double ak = J(a, i) + J(a, j), bk = J(b, i) + J(b, j);
        const double delta_merged =
            plogp_ratio(ka + kb, kl, cr) + plogp_ratio(ak + bk, cl, kr) -
            plogp_ratio(ka, kl, right_[a]) - plogp_ratio(ak, left_[a], kr) -
            plogp_ratio(kb, kl, right_[b]) - plogp_ratio(bk, left_[b], kr);
        L(i, j) += delta_own(i) + delta_own(j) - delta_merged;
      }
    }

    const double self = J(a, a) + J(a, b) + J(b, a) + J(b, b);
    for (auto m : active_) {
      if (m == a || m == b) continue;
      J(a, m) += J(b, m);
      J(m, a) += J(m, b);
    }
    J(a, a) = self;
    left_[a] = cl;
    right_[a] = cr;
    for (std::size_t m = 0; m < capacity_; ++m) J(b, m) = J(m, b) = Q(b, m) = Q(m, b) = 0.0;
    node_[a] = next_node_++;
    node_[b] = -1;
    for (int item : members_[b]) slot_of_[static_cast<std::size_t>(item)] = static_cast<int>(a);
    members_[a].insert(members_[a].end(), members_[b].begin(), members_[b].end());
    members_[b].clear();
    active_.erase(std::find(active_.begin(), active_.end(), b));
    for (auto m : active_) {
      Q(a, m) = q(a, m);
      Q(m, a) = q(m, a);
    }
    for (auto m : active_)
      if (m != a) L(a, m) = fresh_loss(a, m);
  }

  std::size_t n_;
  std::size_t capacity_;
  std::vector<double> item_left_, item_right_;
  std::vector<std::vector<Edge>> out_, in_;
  std::vector<double> joint_, q_, loss_;
  std::vector<double> left_, right_;
  std::vector<int> node_;       // tree node held by each slot, -1 if free
  std::vector<std::vector<int>> members_;
  std::vector<int> slot_of_;    // slot holding each added item
  std::vector<std::size_t> active_;
  std::vector<ClassTree::Merge> merges_;
  int next_node_ = 0;
};

}  // namespace

ClassTree ClassTree::build(std::size_t item_count, const BigramCounts& bigrams, int bit_budget,
                           std::size_t window) {
  if (item_count == 0) throw Error(Errc::EmptyVocabulary, "cannot cluster an empty vocabulary");
  if (bit_budget < 1 || bit_budget > 64)
    throw Error(Errc::BadConfig, "bit budget must lie in [1, 64]");
  ClassTree tree;
  tree.budget_ = bit_budget;
  tree.merges_ = Clusterer(item_count, bigrams, window).run();
  std::vector<std::pair<int, int>> children;
  children.reserve(tree.merges_.size());
  for (const auto& m : tree.merges_) children.emplace_back(m.left, m.right);
  tree.assign_codes(children, item_count == 1 ? 0 : static_cast<int>(item_count + children.size() - 1));
  return tree;
}

ClassTree ClassTree::balanced(std::size_t item_count, int bit_budget) {
  if (item_count == 0) throw Error(Errc::EmptyVocabulary, "cannot build an empty class tree");
  ClassTree tree;
  tree.budget_ = bit_budget;
  std::vector<std::pair<int, int>> children;
  const int n = static_cast<int>(item_count);
  // Returns the node id for items [lo, hi).
  auto build = [&](auto&& self, int lo, int hi) -> int {
    if (hi - lo == 1) return lo;
    const int mid = lo + (hi - lo + 1) / 2;
    const int l = self(self, lo, mid);
    const int r = self(self, mid, hi);
    children.emplace_back(l, r);
    return n + static_cast<int>(children.size()) - 1;
  };
  const int root = build(build, 0, n);
  tree.assign_codes(children, root);
  return tree;
}

void ClassTree::assign_codes(const std::vector<std::pair<int, int>>& children, int root) {
  const std::size_t n = children.size() + 1;
  codes_.assign(n, 0);
  depths_.assign(n, 0);
  depth_ = 0;
  struct Frame {
    int node;
    int depth;
    std::uint64_t path;
  };
  std::vector<Frame> stack{{root, 0, 0}};
  while (!stack.empty()) {
    const Frame f = stack.back();
    stack.pop_back();
    if (f.node < static_cast<int>(n)) {
      codes_[static_cast<std::size_t>(f.node)] = f.path;
      depths_[static_cast<std::size_t>(f.node)] = f.depth;
      depth_ = std::max(depth_, f.depth);
      continue;
    }
    const auto& [l, r] = children[static_cast<std::size_t>(f.node) - n];
    std::uint64_t right_path = f.path;
    if (f.depth < budget_) right_path |= std::uint64_t{1} << f.depth;
    stack.push_back({r, f.depth + 1, right_path});
    stack.push_back({l, f.depth + 1, f.path});
  }
  collisions_ = false;
  if (truncated()) {
    std::set<std::uint64_t> seen;
    for (auto c : codes_)
      if (!seen.insert(c).second) collisions_ = true;
  }
}

ClassTree ClassTree::from_codes(std::vector<std::uint64_t> codes, std::vector<int> depths,
                                int bit_budget) {
  if (codes.empty() || codes.size() != depths.size())
    throw Error(Errc::BadModelFile, "class tree codes and depths disagree");
  ClassTree tree;
  tree.budget_ = bit_budget;
  tree.codes_ = std::move(codes);
  tree.depths_ = std::move(depths);
  tree.depth_ = *std::max_element(tree.depths_.begin(), tree.depths_.end());
  if (tree.truncated()) {
    std::set<std::uint64_t> seen;
    for (auto c : tree.codes_)
      if (!seen.insert(c).second) tree.collisions_ = true;
  }
  return tree;
}

std::uint64_t ClassTree::code(int id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= codes_.size())
    throw Error(Errc::UnknownId, "id " + std::to_string(id) + " not in class tree");
  return codes_[static_cast<std::size_t>(id)];
}

int ClassTree::item_depth(int id) const {
  code(id);
  return depths_[static_cast<std::size_t>(id)];
}

std::string ClassTree::bit_string(int id) const {
  const auto c = code(id);
  std::string s(static_cast<std::size_t>(budget_), '0');
  for (int b = 0; b < budget_; ++b)
    if ((c >> b) & 1u) s[static_cast<std::size_t>(b)] = '1';
  return s;
}

std::string ClassTree::export_text() const {
  std::string out;
  for (std::size_t i = 0; i < codes_.size(); ++i) {
    out += std::to_string(i);
    out += '\t';
    out += bit_string(static_cast<int>(i));
    out += '\n';
  }
  return out;
}

}  // namespace spatter
