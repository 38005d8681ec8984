#include "spatter/dtm.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "spatter/error.hpp"

namespace spatter {

// ---------------------------------------------------------------------------
// Schema

const std::vector<int>& Schema::default_thresholds() {
  static const std::vector<int> t = {1, 2, 3, 4, 6, 8, 12, 16, 24, 32, 40};
  return t;
}

Schema::Schema(std::vector<SlotType> slots, ClassTrees trees, std::vector<int> thresholds)
    : slots_(std::move(slots)), trees_(std::move(trees)), thresholds_(std::move(thresholds)) {
  std::sort(thresholds_.begin(), thresholds_.end());
  for (auto t : slots_)
    if (t != SlotType::Count && !tree(t))
      throw Error(Errc::BadConfig,
                  "schema has a " + std::string(slot_type_name(t)) + " slot but no class tree");
}

const ClassTree* Schema::tree(SlotType type) const {
  if (type == SlotType::Count) return nullptr;
  return trees_[static_cast<std::size_t>(type)].get();
}

bool Schema::answer(const Question& q, std::span<const int> history) const {
  const int v = history[q.slot];
  switch (q.kind) {
    case QuestionKind::IsNull: return v == kNull;
    case QuestionKind::Bit: return v != kNull && tree(slots_[q.slot])->bit(v, q.param);
    case QuestionKind::Threshold: return v != kNull && v <= q.param;
  }
  return false;
}

std::vector<Question> Schema::questions_for(std::size_t slot) const {
  std::vector<Question> out;
  const auto s = static_cast<std::uint16_t>(slot);
  out.push_back({s, QuestionKind::IsNull, 0});
  if (slots_[slot] == SlotType::Count) {
    for (int t : thresholds_) out.push_back({s, QuestionKind::Threshold, t});
  } else {
    const int bits = tree(slots_[slot])->usable_bits();
    for (int b = 0; b < bits; ++b) out.push_back({s, QuestionKind::Bit, b});
  }
  return out;
}

std::vector<Question> Schema::questions() const {
  std::vector<Question> out;
  for (std::size_t s = 0; s < slots_.size(); ++s) {
    auto qs = questions_for(s);
    out.insert(out.end(), qs.begin(), qs.end());
  }
  return out;
}

// ---------------------------------------------------------------------------
// EventSet

void EventSet::add(std::span<const int> history, int future) {
  if (history.size() != slots_)
    throw Error(Errc::SlotLayoutMismatch, "event has " + std::to_string(history.size()) +
                                              " slots, expected " + std::to_string(slots_));
  data_.insert(data_.end(), history.begin(), history.end());
  futures_.push_back(future);
}

// ---------------------------------------------------------------------------
// Growing

namespace {

double xlog2x(double x) { return x > 0.0 ? x * std::log2(x) : 0.0; }

// Entropy in bits of a count vector with the given total.
double entropy(std::span<const std::uint64_t> counts, std::uint64_t total) {
  if (total == 0) return 0.0;
  double s = 0.0;
  for (auto c : counts) s += xlog2x(static_cast<double>(c));
  const double n = static_cast<double>(total);
  return std::log2(n) - s / n;
}

struct SplitChoice {
  Question question{};
  double gain = -1.0;
};

class Grower {
 public:
  Grower(const EventSet& events, const Schema& schema, std::size_t futures,
         const GrowConfig& config)
      : events_(events), schema_(schema), futures_(futures), config_(config) {
    for (std::size_t s = 0; s < schema.slot_count(); ++s) questions_.push_back(schema.questions_for(s));
  }

  std::vector<DTNode> run() {
    std::vector<std::size_t> idx(events_.size());
    std::iota(idx.begin(), idx.end(), 0);
    build(idx, 0, idx.size(), -1, 0);
    return std::move(nodes_);
  }

  // Used by forced_order: always splits on the given order.
  std::vector<DTNode> run_forced(std::span<const Question> order) {
    std::vector<std::size_t> idx(events_.size());
    std::iota(idx.begin(), idx.end(), 0);
    build_forced(idx, 0, idx.size(), -1, 0, order, 0);
    return std::move(nodes_);
  }

 private:
  int new_node(std::span<const std::size_t> idx, int parent, int depth) {
    DTNode n;
    n.parent = parent;
    n.depth = depth;
    n.counts.assign(futures_, 0);
    for (auto i : idx) {
      const int f = events_.future(i);
      if (f < 0 || static_cast<std::size_t>(f) >= futures_)
        throw Error(Errc::UnknownId, "future value " + std::to_string(f) + " out of range");
      ++n.counts[static_cast<std::size_t>(f)];
    }
    n.total = idx.size();
    nodes_.push_back(std::move(n));
    return static_cast<int>(nodes_.size()) - 1;
  }

  // Moves events answering yes to the front; returns the split point.
  std::size_t partition(std::vector<std::size_t>& idx, std::size_t lo, std::size_t hi,
                        const Question& q) const {
    auto mid = std::stable_partition(idx.begin() + static_cast<std::ptrdiff_t>(lo),
                                     idx.begin() + static_cast<std::ptrdiff_t>(hi),
                                     [&](std::size_t i) { return schema_.answer(q, events_.history(i)); });
    return static_cast<std::size_t>(mid - idx.begin());
  }

  SplitChoice best_split(std::span<const std::size_t> idx, const DTNode& node) const {
    const double parent_h = entropy(node.counts, node.total);
    const double n = static_cast<double>(node.total);
    SplitChoice best;
    std::vector<std::uint64_t> yes;
    std::vector<std::uint64_t> no(futures_);
    for (std::size_t s = 0; s < questions_.size(); ++s) {
      const auto& qs = questions_[s];
      // yes-counts for every question of this slot in one pass
      yes.assign(qs.size() * futures_, 0);
      std::vector<std::uint64_t> yes_total(qs.size(), 0);
      for (auto i : idx) {
        const auto h = events_.history(i);
        const auto f = static_cast<std::size_t>(events_.future(i));
        for (std::size_t k = 0; k < qs.size(); ++k)
          if (schema_.answer(qs[k], h)) {
            ++yes[k * futures_ + f];
            ++yes_total[k];
          }
      }
      for (std::size_t k = 0; k < qs.size(); ++k) {
        const auto ny = yes_total[k];
        if (ny == 0 || ny == node.total) continue;
        const std::span<const std::uint64_t> y(yes.data() + k * futures_, futures_);
        for (std::size_t f = 0; f < futures_; ++f) no[f] = node.counts[f] - y[f];
        const double gain = parent_h - (static_cast<double>(ny) / n) * entropy(y, ny) -
                            (static_cast<double>(node.total - ny) / n) * entropy(no, node.total - ny);
        if (gain > best.gain) {
          best.gain = gain;
          best.question = qs[k];
        }
      }
    }
    return best;
  }

  int build(std::vector<std::size_t>& idx, std::size_t lo, std::size_t hi, int parent, int depth) {
    const std::span<const std::size_t> here(idx.data() + lo, hi - lo);
    const int id = new_node(here, parent, depth);
    if (here.size() < config_.min_events || depth >= config_.max_depth) return id;
    if (entropy(nodes_[static_cast<std::size_t>(id)].counts, nodes_[static_cast<std::size_t>(id)].total) <= 0.0)
      return id;
    const SplitChoice split = best_split(here, nodes_[static_cast<std::size_t>(id)]);
    if (split.gain < config_.min_gain) return id;

    const std::size_t mid = partition(idx, lo, hi, split.question);
    {
      auto& n = nodes_[static_cast<std::size_t>(id)];
      n.is_leaf = false;
      n.question = split.question;
      n.gain = split.gain;
    }
    const int yes = build(idx, lo, mid, id, depth + 1);
    const int no = build(idx, mid, hi, id, depth + 1);
    nodes_[static_cast<std::size_t>(id)].yes = yes;
    nodes_[static_cast<std::size_t>(id)].no = no;
    return id;
  }

  int build_forced(std::vector<std::size_t>& idx, std::size_t lo, std::size_t hi, int parent,
                   int depth, std::span<const Question> order, std::size_t next) {
    const std::span<const std::size_t> here(idx.data() + lo, hi - lo);
    const int id = new_node(here, parent, depth);
    for (; next < order.size(); ++next) {
      const std::size_t mid = partition(idx, lo, hi, order[next]);
      if (mid == lo || mid == hi) continue;
      {
        auto& n = nodes_[static_cast<std::size_t>(id)];
        n.is_leaf = false;
        n.question = order[next];
      }
      const int yes = build_forced(idx, lo, mid, id, depth + 1, order, next + 1);
      const int no = build_forced(idx, mid, hi, id, depth + 1, order, next + 1);
      nodes_[static_cast<std::size_t>(id)].yes = yes;
      nodes_[static_cast<std::size_t>(id)].no = no;
      break;
    }
    return id;
  }

  const EventSet& events_;
  const Schema& schema_;
  std::size_t futures_;
  GrowConfig config_;
  std::vector<std::vector<Question>> questions_;
  std::vector<DTNode> nodes_;
};

}  // namespace

DecisionTree::DecisionTree(std::vector<DTNode> nodes, std::size_t future_count,
                           std::size_t slot_count)
    : nodes_(std::move(nodes)), future_count_(future_count), slot_count_(slot_count) {}

DecisionTree DecisionTree::grow(const EventSet& events, const Schema& schema,
                                std::size_t future_count, const GrowConfig& config) {
  if (events.empty()) throw Error(Errc::NoEvents, "cannot grow a tree from no events");
  if (events.slot_count() != schema.slot_count())
    throw Error(Errc::SlotLayoutMismatch, "events and schema disagree on slot count");
  return DecisionTree(Grower(events, schema, future_count, config).run(), future_count,
                      schema.slot_count());
}

DecisionTree DecisionTree::forced_order(const EventSet& events, const Schema& schema,
                                        std::span<const Question> order,
                                        std::size_t future_count) {
  if (events.empty()) throw Error(Errc::NoEvents, "cannot build a tree from no events");
  if (events.slot_count() != schema.slot_count())
    throw Error(Errc::SlotLayoutMismatch, "events and schema disagree on slot count");
  return DecisionTree(Grower(events, schema, future_count, {}).run_forced(order), future_count,
                      schema.slot_count());
}

std::size_t DecisionTree::leaf_count() const {
  return static_cast<std::size_t>(
      std::count_if(nodes_.begin(), nodes_.end(), [](const DTNode& n) { return n.is_leaf; }));
}

int DecisionTree::leaf_for(const Schema& schema, std::span<const int> history) const {
  if (history.size() != slot_count_)
    throw Error(Errc::SlotLayoutMismatch, "history has " + std::to_string(history.size()) +
                                              " slots, model expects " + std::to_string(slot_count_));
  int id = 0;
  while (!nodes_[static_cast<std::size_t>(id)].is_leaf) {
    const auto& n = nodes_[static_cast<std::size_t>(id)];
    id = schema.answer(n.question, history) ? n.yes : n.no;
  }
  return id;
}

std::vector<double> DecisionTree::empirical(int id) const {
  const auto& n = node(id);
  std::vector<double> p(future_count_, 0.0);
  if (n.total == 0) return p;
  for (std::size_t f = 0; f < future_count_; ++f)
    p[f] = static_cast<double>(n.counts[f]) / static_cast<double>(n.total);
  return p;
}

namespace {

std::string question_text(const Question& q, const DecisionTree::SlotNamer& namer) {
  std::string out = namer ? namer(q.slot) : "s" + std::to_string(q.slot);
  switch (q.kind) {
    case QuestionKind::IsNull: return out + "/null";
    case QuestionKind::Bit: return out + "/bit" + std::to_string(q.param);
    case QuestionKind::Threshold: return out + "/le" + std::to_string(q.param);
  }
  return out;
}

void dump_node(const DecisionTree& t, int id, const DecisionTree::SlotNamer& namer,
               std::string& out) {
  const auto& n = t.node(id);
  out += std::to_string(id);
  out += ' ';
  out += n.is_leaf ? std::string("LEAF") : question_text(n.question, namer);
  out += ' ';
  out += std::to_string(lambda_bucket(n.total));
  out += ' ';
  bool first = true;
  for (std::size_t f = 0; f < n.counts.size(); ++f) {
    if (!n.counts[f]) continue;
    if (!first) out += ',';
    first = false;
    out += std::to_string(f) + ":" + std::to_string(n.counts[f]);
  }
  out += '\n';
  if (!n.is_leaf) {
    dump_node(t, n.yes, namer, out);
    dump_node(t, n.no, namer, out);
  }
}

}  // namespace

std::string DecisionTree::dump(const SlotNamer& namer) const {
  std::string out;
  if (!nodes_.empty()) dump_node(*this, 0, namer, out);
  return out;
}

std::size_t bucket_count(const DecisionTree& tree) {
  int top = 0;
  for (const auto& n : tree.nodes()) top = std::max(top, lambda_bucket(n.total));
  return static_cast<std::size_t>(top) + 1;
}

// ---------------------------------------------------------------------------
// Smoothing

std::vector<double> SmoothedModel::fixed_schedule(std::size_t buckets, double lambda_max) {
  std::vector<double> l(buckets);
  for (std::size_t b = 0; b < buckets; ++b) {
    const double c = std::ldexp(1.0, static_cast<int>(b));
    l[b] = std::min(lambda_max, c / (c + 2.0));
  }
  return l;
}

SmoothedModel SmoothedModel::with_lambdas(DecisionTree tree, std::vector<double> bucket_lambdas) {
  if (bucket_lambdas.size() < bucket_count(tree))
    throw Error(Errc::BadConfig, "too few interpolation weights for tree");
  SmoothedModel m;
  m.tree_ = std::move(tree);
  m.lambdas_ = std::move(bucket_lambdas);
  m.recompute();
  return m;
}

void SmoothedModel::recompute() {
  const std::size_t F = tree_.future_count();
  smoothed_.assign(tree_.size() * F, 0.0);
  const double uniform = 1.0 / static_cast<double>(F);
  // Pre-order ids: a parent always precedes its children.
  for (std::size_t id = 0; id < tree_.size(); ++id) {
    const auto& n = tree_.nodes()[id];
    const double lambda = lambdas_[static_cast<std::size_t>(lambda_bucket(n.total))];
    const double* up = n.parent >= 0 ? &smoothed_[static_cast<std::size_t>(n.parent) * F] : nullptr;
    double* out = &smoothed_[id * F];
    for (std::size_t f = 0; f < F; ++f) {
      const double emp =
          n.total ? static_cast<double>(n.counts[f]) / static_cast<double>(n.total) : 0.0;
      out[f] = lambda * emp + (1.0 - lambda) * (up ? up[f] : uniform);
    }
  }
}

namespace {

// Root-to-leaf path for a leaf id.
std::vector<int> path_to(const DecisionTree& t, int leaf) {
  std::vector<int> path;
  for (int id = leaf; id >= 0; id = t.node(id).parent) path.push_back(id);
  std::reverse(path.begin(), path.end());
  return path;
}

}  // namespace

SmoothedModel SmoothedModel::smooth(DecisionTree tree, const EventSet& heldout,
                                    const Schema& schema, const SmoothConfig& config,
                                    SmoothingReport* report) {
  const std::size_t B = bucket_count(tree);
  auto lambdas = fixed_schedule(B, config.lambda_max);
  SmoothingReport local;
  SmoothingReport& rep = report ? *report : local;
  rep = {};

  if (heldout.empty()) {
    return with_lambdas(std::move(tree), std::move(lambdas));
  }
  rep.used_heldout = true;

  // Group heldout events by (leaf, future); the EM statistics only depend
  // on those pairs.
  struct Item {
    std::vector<int> path;
    int future;
    double weight;
  };
  std::vector<Item> items;
  {
    std::vector<std::pair<int, int>> keys;
    keys.reserve(heldout.size());
    for (std::size_t i = 0; i < heldout.size(); ++i)
      keys.emplace_back(tree.leaf_for(schema, heldout.history(i)), heldout.future(i));
    std::sort(keys.begin(), keys.end());
    for (std::size_t i = 0; i < keys.size();) {
      std::size_t j = i;
      while (j < keys.size() && keys[j] == keys[i]) ++j;
      items.push_back({path_to(tree, keys[i].first), keys[i].second, static_cast<double>(j - i)});
      i = j;
    }
  }

  const double uniform = 1.0 / static_cast<double>(tree.future_count());
  std::vector<double> stop(B), reach(B);
  std::vector<double> w;
  double prev_ll = 0.0;
  for (int iter = 0;; ++iter) {
    std::fill(stop.begin(), stop.end(), 0.0);
    std::fill(reach.begin(), reach.end(), 0.0);
    double ll = 0.0;
    for (const auto& it : items) {
      const std::size_t d = it.path.size();
      // w[k]: mass that stops at path node k, w[d]: mass reaching uniform.
      w.assign(d + 1, 0.0);
      double carry = 1.0;
      for (std::size_t k = d; k-- > 0;) {
        const auto& n = tree.node(it.path[k]);
        const double lambda = lambdas[static_cast<std::size_t>(lambda_bucket(n.total))];
        const double emp = static_cast<double>(n.counts[static_cast<std::size_t>(it.future)]) /
                           static_cast<double>(n.total);
        w[k] = carry * lambda * emp;
        carry *= 1.0 - lambda;
      }
      w[d] = carry * uniform;
      double p = 0.0;
      for (double x : w) p += x;
      ll += it.weight * std::log(p);
      // Mass reaching node k = everything not absorbed by a deeper node.
      double remaining = p;
      for (std::size_t k = d; k-- > 0;) {
        const auto b = static_cast<std::size_t>(lambda_bucket(tree.node(it.path[k]).total));
        stop[b] += it.weight * w[k] / p;
        reach[b] += it.weight * remaining / p;
        remaining -= w[k];
      }
    }
    rep.log_likelihood.push_back(ll);
    if (iter > 0 && std::abs(ll - prev_ll) <= config.tolerance * std::abs(prev_ll)) break;
    if (iter >= config.max_iterations) break;
    prev_ll = ll;
    for (std::size_t b = 0; b < B; ++b)
      if (reach[b] > 0.0) lambdas[b] = std::clamp(stop[b] / reach[b], 0.0, config.lambda_max);
    rep.iterations = iter + 1;
  }
  return with_lambdas(std::move(tree), std::move(lambdas));
}

std::span<const double> SmoothedModel::distribution(int node) const {
  const std::size_t F = tree_.future_count();
  return {smoothed_.data() + static_cast<std::size_t>(node) * F, F};
}

std::span<const double> SmoothedModel::predict(const Schema& schema,
                                               std::span<const int> history) const {
  return distribution(tree_.leaf_for(schema, history));
}

double SmoothedModel::log_likelihood(const Schema& schema, const EventSet& events) const {
  double ll = 0.0;
  for (std::size_t i = 0; i < events.size(); ++i)
    ll += std::log(predict(schema, events.history(i))[static_cast<std::size_t>(events.future(i))]);
  return ll;
}

std::string SmoothedModel::dump(const DecisionTree::SlotNamer& namer) const {
  std::string out = tree_.dump(namer);
  out += "# lambdas";
  for (double l : lambdas_) out += " " + std::to_string(l);
  out += '\n';
  return out;
}

}  // namespace spatter
