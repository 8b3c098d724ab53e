#pragma once

#include <string>
#include <vector>

#include "rspr/approx.hpp"
#include "rspr/exact.hpp"

namespace rspr {

struct KeyCheck {
  bool ok = true;
  std::string reason;
  explicit operator bool() const { return ok; }
};

// Checks the three key conditions, and for abnormal keys that the two kept
// leaves are siblings in T once the other X leaves are cut off. With a scope
// Y containing X, the dangling-subtree condition is checked on Y instead.
KeyCheck validate_key(const TFPair& P, const Key& k, const LabelSet* scope = nullptr);

struct KeyBound {
  EdgeSet free_edges;
  // Root vertices of the label-free components of F - ((C(P) \ R) ∪ B).
  std::vector<VertexId> free_components;
  int bound = 0;
};

// f_e, f_c and b of a key for a root-leaf path with cut C(P) over P.F.
KeyBound bound_for_path(const TFPair& P, const Key& k, const EdgeSet& path_cut);

// Minimum of b over the root-leaf paths of the one Y-search tree built with
// `policy`.
int key_lower_bound_tree(const TFPair& P, const Key& k, const LabelSet& Y,
                         CherryPolicy policy = CherryPolicy::DeepestFirst);

inline constexpr int kKeyLeafLimit = 10;

// Exact b_Y: max over Y-search trees of min over their root-leaf paths.
// Throws ResourceError when Y has more than leaf_limit leaves of T.
int key_lower_bound(const TFPair& P, const Key& k, const LabelSet& Y, int leaf_limit = kKeyLeafLimit);

// good: |B| <= 2 b_Y, fair: |B| <= 2 b_Y + 1. Y defaults to X; when that
// fails and T is small enough, Y = L(T) is tried as well.
bool certify(const TFPair& P, const Key& k, Grade grade, const LabelSet* Y = nullptr,
             int leaf_limit = kKeyLeafLimit);

// Labels of all leaves of T.
LabelSet tree_labels(const TFPair& P);

}  // namespace rspr
