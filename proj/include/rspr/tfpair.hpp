#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "rspr/forest.hpp"
#include "rspr/labels.hpp"

namespace rspr {

// A tree T and a forest F over one label set. Both empty encodes (⊥,⊥).
// Labels absent from `composite` are base labels; a composite label maps to
// the ordered base labels it absorbed.
struct TFPair {
  Forest T;
  Forest F;
  std::map<LabelId, std::vector<LabelId>> composite;
  LabelId next_label = 0;
  std::shared_ptr<const LabelNames> names;
  // Base label of the dummy leaf, if one was added.
  LabelId dummy = kNoLabel;

  bool is_empty() const { return T.empty() && F.empty(); }
  LabelId new_label(std::vector<LabelId> parts);
  std::vector<LabelId> expand(LabelId label) const;
  std::string label_name(LabelId label) const;
  // Label set sized for this pair.
  LabelSet make_set() const { return LabelSet(static_cast<std::size_t>(next_label)); }
};

// Builds a pair from two sealed forests over the same names. T must be a tree.
TFPair make_pair(Forest T, Forest F, std::shared_ptr<const LabelNames> names);

// Copy of P whose current labels are the base labels and whose F origins are
// the identity, so later cuts are expressed over P itself.
TFPair rebase(const TFPair& P);

}  // namespace rspr
