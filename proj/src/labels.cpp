#include "rspr/labels.hpp"

#include "rspr/tfpair.hpp"

namespace rspr {

LabelId LabelNames::intern(const std::string& name) {
  auto it = ids_.find(name);
  if (it != ids_.end()) return it->second;
  LabelId id = static_cast<LabelId>(names_.size());
  names_.push_back(name);
  ids_.emplace(name, id);
  return id;
}

LabelId LabelNames::find(const std::string& name) const {
  auto it = ids_.find(name);
  return it == ids_.end() ? kNoLabel : it->second;
}

LabelId TFPair::new_label(std::vector<LabelId> parts) {
  std::vector<LabelId> flat;
  for (LabelId p : parts) {
    auto e = expand(p);
    flat.insert(flat.end(), e.begin(), e.end());
  }
  LabelId id = next_label++;
  composite.emplace(id, std::move(flat));
  return id;
}

std::vector<LabelId> TFPair::expand(LabelId label) const {
  auto it = composite.find(label);
  if (it == composite.end()) return {label};
  return it->second;
}

std::string TFPair::label_name(LabelId label) const {
  std::string out;
  for (LabelId b : expand(label)) {
    if (names && b < names->size()) {
      out += names->name(b);
    } else {
      out += "#" + std::to_string(b);
    }
  }
  return out;
}

TFPair make_pair(Forest T, Forest F, std::shared_ptr<const LabelNames> names) {
  if (!T.sealed()) T.seal();
  if (!F.sealed()) F.seal();
  if (T.labels() != F.labels()) throw UsageError("T and F have different label sets");
  if (!T.empty() && T.num_components() != 1) throw UsageError("T must be a tree");
  TFPair P;
  P.T = std::move(T);
  P.F = std::move(F);
  P.names = std::move(names);
  LabelId bound = std::max(P.T.label_bound(), P.F.label_bound());
  if (P.names) bound = std::max(bound, P.names->size());
  P.next_label = bound;
  return P;
}

TFPair rebase(const TFPair& P) {
  TFPair Q;
  Q.T = P.T;
  Q.F = P.F;
  Q.F.reset_origin();
  Q.T.reset_origin();
  Q.next_label = P.next_label;
  Q.dummy = P.dummy;
  return Q;
}

}  // namespace rspr
