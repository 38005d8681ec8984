#include "spatter/search.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <deque>
#include <memory>
#include <queue>

#include "spatter/error.hpp"
#include "spatter/models.hpp"

namespace spatter {

std::string_view search_status_name(SearchStatus status) noexcept {
  switch (status) {
    case SearchStatus::Optimal: return "optimal";
    case SearchStatus::SearchErrorMemory: return "search-error-memory";
    case SearchStatus::NoParse: return "no-parse";
  }
  return "?";
}

namespace {

struct Trail {
  Action action;
  std::shared_ptr<const Trail> prev;
};
using TrailPtr = std::shared_ptr<const Trail>;

std::vector<Action> unwind(const TrailPtr& t) {
  std::vector<Action> out;
  for (const Trail* p = t.get(); p; p = p->prev.get()) out.push_back(p->action);
  std::reverse(out.begin(), out.end());
  return out;
}

struct Hypothesis {
  DerivationState state;
  double logprob = 0.0;
  std::size_t depth = 0;
  std::uint64_t serial = 0;  // creation order, for deterministic queue ties
  TrailPtr trail;
};

// Orders the phase-1 heap: highest logprob first, then oldest.
struct LessPromising {
  bool operator()(const Hypothesis& a, const Hypothesis& b) const {
    if (a.logprob != b.logprob) return a.logprob < b.logprob;
    return a.serial > b.serial;
  }
};

void check_input(std::span<const std::string> words, std::size_t max_length) {
  if (words.empty()) throw Error(Errc::EmptyInput, "no words to parse");
  if (words.size() > max_length)
    throw Error(Errc::SentenceTooLong, std::to_string(words.size()) + " words exceeds limit of " +
                                           std::to_string(max_length));
}

class Searcher {
 public:
  Searcher(const ModelSet& models, const SearchConfig& config)
      : models_(models), rules_(models.rules()), config_(config) {}

  SearchResult run(std::span<const std::string> words) {
    std::priority_queue<Hypothesis, std::vector<Hypothesis>, LessPromising> open;
    std::vector<Hypothesis> deferred;
    std::vector<std::size_t> expanded_at_depth;
    bool beam_active = true;
    bool over_budget = false;
    const double switch_log = std::log(config_.switch_threshold);

    open.push(make_root(words));
    std::vector<Hypothesis> children;

    // Phase 1: stack decoder.
    for (;;) {
      if (open.empty()) {
        if (best_ || deferred.empty()) break;
        for (auto& h : deferred) open.push(std::move(h));
        deferred.clear();
        beam_active = false;
        continue;
      }
      Hypothesis h = open.top();
      open.pop();
      if (best_ && h.logprob < best_logprob_) continue;
      if (beam_active) {
        if (expanded_at_depth.size() <= h.depth) expanded_at_depth.resize(h.depth + 1, 0);
        if (expanded_at_depth[h.depth] >= config_.beam_width) {
          deferred.push_back(std::move(h));
          continue;
        }
        ++expanded_at_depth[h.depth];
      }
      expand(h, children);
      for (auto& c : children) open.push(std::move(c));
      if (open.size() + deferred.size() > config_.max_hypotheses) {
        over_budget = true;
        if (!best_) complete_greedily(open.top());
        break;
      }
      if (best_ && best_logprob_ > switch_log) break;
    }

    // Phase 2: breadth-first exhaustion against the best complete parse.
    if (!over_budget) {
      std::deque<Hypothesis> frontier;
      while (!open.empty()) {
        frontier.push_back(open.top());
        open.pop();
      }
      for (auto& h : deferred) frontier.push_back(std::move(h));
      deferred.clear();
      std::stable_sort(frontier.begin(), frontier.end(),
                       [](const Hypothesis& a, const Hypothesis& b) { return a.depth < b.depth; });
      while (!frontier.empty()) {
        Hypothesis h = std::move(frontier.front());
        frontier.pop_front();
        if (best_ && h.logprob < best_logprob_) continue;
        expand(h, children);
        for (auto& c : children) {
          assert(c.logprob <= h.logprob);
          frontier.push_back(std::move(c));
        }
        if (frontier.size() > config_.max_hypotheses) {
          over_budget = true;
          break;
        }
      }
    }

    SearchResult result;
    result.expanded = expanded_;
    if (!best_) {
      result.status = over_budget ? SearchStatus::SearchErrorMemory : SearchStatus::NoParse;
      return result;
    }
    result.status = over_budget ? SearchStatus::SearchErrorMemory : SearchStatus::Optimal;
    result.logprob = best_logprob_;
    result.decisions = unwind(best_->trail);
    result.tree = best_->state.to_tree(models_.vocab());
    return result;
  }

 private:
  Hypothesis make_root(std::span<const std::string> words) {
    Hypothesis h{DerivationState::initial(models_.sentence(words)), 0.0, 0, serial_++, nullptr};
    return h;
  }

  // Children of h; complete ones go straight to the best-parse record.
  void expand(const Hypothesis& h, std::vector<Hypothesis>& out) {
    out.clear();
    ++expanded_;
    const auto legal = h.state.legal_actions(rules_);
    if (legal.dead_end()) return;
    const auto dist = models_.distribution(h.state, legal.kind, scratch_);
    double norm = 1.0;
    if (models_.config().renormalize) {
      norm = 0.0;
      for (int v : legal.values) norm += dist[static_cast<std::size_t>(v)];
    }
    for (int v : legal.values) {
      const Action a{legal.kind, v};
      const double lp = h.logprob + std::log(dist[static_cast<std::size_t>(v)] / norm);
      if (best_ && lp < best_logprob_) continue;
      Hypothesis c{h.state.apply_legal(rules_, a), lp, h.depth + 1, serial_++,
                   std::make_shared<const Trail>(Trail{a, h.trail})};
      if (c.state.complete())
        offer(std::move(c));
      else
        out.push_back(std::move(c));
    }
  }

  void offer(Hypothesis c) {
    if (best_) {
      if (c.logprob < best_logprob_) return;
      if (c.logprob == best_logprob_ && !(unwind(c.trail) < unwind(best_->trail))) return;
    }
    best_logprob_ = c.logprob;
    best_ = std::make_unique<Hypothesis>(std::move(c));
  }

  // Memory fallback: follow the most probable legal action, backtracking on
  // dead ends, until something completes.
  bool complete_greedily(const Hypothesis& h) {
    const auto legal = h.state.legal_actions(rules_);
    if (legal.dead_end()) return false;
    const auto dist = models_.distribution(h.state, legal.kind, scratch_);
    std::vector<int> order = legal.values;
    std::vector<double> p(order.size());
    for (std::size_t i = 0; i < order.size(); ++i) p[i] = dist[static_cast<std::size_t>(order[i])];
    std::vector<std::size_t> rank(order.size());
    for (std::size_t i = 0; i < rank.size(); ++i) rank[i] = i;
    std::stable_sort(rank.begin(), rank.end(), [&](std::size_t a, std::size_t b) { return p[a] > p[b]; });
    for (auto i : rank) {
      const Action a{legal.kind, order[i]};
      Hypothesis c{h.state.apply_legal(rules_, a), h.logprob + std::log(p[i]), h.depth + 1,
                   serial_++, std::make_shared<const Trail>(Trail{a, h.trail})};
      if (c.state.complete()) {
        offer(std::move(c));
        return true;
      }
      if (complete_greedily(c)) return true;
    }
    return false;
  }

  const ModelSet& models_;
  const DerivationRules& rules_;
  SearchConfig config_;
  std::vector<int> scratch_;
  std::unique_ptr<Hypothesis> best_;
  double best_logprob_ = -std::numeric_limits<double>::infinity();
  std::uint64_t serial_ = 0;
  std::size_t expanded_ = 0;
};

class Enumerator {
 public:
  Enumerator(const ModelSet& models, const EnumerationLimits& limits)
      : models_(models), rules_(models.rules()), limits_(limits) {}

  SearchResult run(std::span<const std::string> words) {
    visit(DerivationState::initial(models_.sentence(words)), 0.0);
    SearchResult r;
    r.expanded = visited_;
    if (!found_) return r;
    r.status = SearchStatus::Optimal;
    r.logprob = best_logprob_;
    r.decisions = best_decisions_;
    r.tree = best_state_->to_tree(models_.vocab());
    return r;
  }

 private:
  void visit(const DerivationState& state, double logprob) {
    if (++visited_ > limits_.max_states)
      throw Error(Errc::EnumerationBudgetExceeded,
                  "more than " + std::to_string(limits_.max_states) + " states");
    if (state.complete()) {
      if (!found_ || logprob > best_logprob_ ||
          (logprob == best_logprob_ && path_ < best_decisions_)) {
        found_ = true;
        best_logprob_ = logprob;
        best_decisions_ = path_;
        best_state_ = std::make_unique<DerivationState>(state);
      }
      return;
    }
    if (limits_.bound_pruning && found_ && logprob < best_logprob_) return;
    const auto legal = state.legal_actions(rules_);
    if (legal.dead_end()) return;
    std::vector<int> scratch;
    const auto dist = models_.distribution(state, legal.kind, scratch);
    const std::vector<double> p(dist.begin(), dist.end());
    double norm = 1.0;
    if (models_.config().renormalize) {
      norm = 0.0;
      for (int v : legal.values) norm += p[static_cast<std::size_t>(v)];
    }
    // Most probable first, so the bound tightens early.
    std::vector<int> order = legal.values;
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
      return p[static_cast<std::size_t>(a)] > p[static_cast<std::size_t>(b)];
    });
    for (int v : order) {
      const Action a{legal.kind, v};
      const double lp = logprob + std::log(p[static_cast<std::size_t>(v)] / norm);
      if (limits_.bound_pruning && found_ && lp < best_logprob_) continue;
      path_.push_back(a);
      visit(state.apply_legal(rules_, a), lp);
      path_.pop_back();
    }
  }

  const ModelSet& models_;
  const DerivationRules& rules_;
  EnumerationLimits limits_;
  std::size_t visited_ = 0;
  bool found_ = false;
  double best_logprob_ = -std::numeric_limits<double>::infinity();
  std::vector<Action> path_;
  std::vector<Action> best_decisions_;
  std::unique_ptr<DerivationState> best_state_;
};

}  // namespace

SearchResult parse(const ModelSet& models, std::span<const std::string> words,
                   const SearchConfig& config) {
  check_input(words, config.max_length);
  return Searcher(models, config).run(words);
}

SearchResult exhaustive_parse(const ModelSet& models, std::span<const std::string> words,
                              const EnumerationLimits& limits) {
  if (words.empty()) throw Error(Errc::EmptyInput, "no words to parse");
  return Enumerator(models, limits).run(words);
}

}  // namespace spatter
