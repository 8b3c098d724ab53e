#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "rspr/ops.hpp"

namespace rspr {

enum class CherryPolicy {
  // Sibling-leaf pair whose parent is deepest in T, lowest parent id first.
  DeepestFirst,
  // Shallowest parent, highest parent id first. Used to cross-check policies.
  ShallowestFirst,
};

enum class LowerBound { None, Approx3, Approx2 };

struct ExactOptions {
  std::optional<int> budget;
  bool prune = true;
  LowerBound bound = LowerBound::Approx2;
  bool seed_incumbent = true;
  CherryPolicy policy = CherryPolicy::DeepestFirst;
};

struct ExactResult {
  int distance = 0;
  // Cut over the vertices that P.F's origins refer to.
  EdgeSet cut;
  std::size_t nodes = 0;
};

// Minimum agreement cut by branch and bound; absent when d exceeds the budget.
std::optional<ExactResult> exact_distance(const TFPair& P, const ExactOptions& opts = {});

// Tries every edge subset of P.F in order of size. Throws ResourceError when
// the instance is outside the enumeration guard.
std::optional<ExactResult> brute_force_distance(const TFPair& P, int k_max);

// Agreement test by restriction and disjoint spanning subtrees in T, sharing
// no code with the forced-cut machinery.
bool agreement_by_restriction(const TFPair& P, const EdgeSet& CF);

// Sibling-leaf pairs (vertex ids in T) in the order a policy would pick them.
std::vector<std::pair<VertexId, VertexId>> sibling_leaf_pairs(const Forest& T, CherryPolicy policy);

struct Branch {
  int way = 0;
  EdgeSet local;   // over Q.F
  EdgeSet lifted;  // over the vertices Q.F's origins refer to
  TFPair child;
};

// The two or three children of a search-tree node for the T-cherry (t1, t2).
std::vector<Branch> branches(const TFPair& Q, VertexId t1, VertexId t2);

struct Cherry {
  LabelSet Y1, Y2;
};

struct SearchStep {
  Cherry cherry;
  int way = 0;
  EdgeSet added;
};

struct SearchPath {
  std::vector<SearchStep> steps;
  EdgeSet cut;
  // True when the path ends at a node whose pair is (⊥,⊥).
  bool agreement = false;
};

// Root-leaf paths of the (Z-)search tree built with `policy`. With Z given,
// only cherries inside Z are picked. depth_cap bounds the number of steps.
void for_each_search_path(const TFPair& P, const LabelSet* Z, int depth_cap, CherryPolicy policy,
                          const std::function<void(const SearchPath&)>& visit);
std::vector<SearchPath> enumerate_search_tree(const TFPair& P, const LabelSet* Z, int depth_cap,
                                              CherryPolicy policy = CherryPolicy::DeepestFirst);

// Labels of P (expanded through composites created below P) under T-vertex t.
LabelSet cherry_side(const TFPair& Q, VertexId t, std::size_t bound);

// The precondition of Z-search trees: each component of T restricted to Z is
// a dangling subtree of T.
bool restriction_is_dangling(const Forest& T, const LabelSet& Z);

}  // namespace rspr
