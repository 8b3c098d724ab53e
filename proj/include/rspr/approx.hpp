#pragma once

#include <optional>
#include <string>
#include <vector>

#include "rspr/ops.hpp"

namespace rspr {

enum class StopperKind { SemiClose, Close, Root, Disconnected, Overlapping };

const char* to_string(StopperKind kind);

struct Stopper {
  VertexId vertex = kNoVertex;
  StopperKind kind = StopperKind::SemiClose;
};

// (X, B, R) over one pair; R empty means the key is normal.
struct Key {
  LabelSet X;
  EdgeSet B;
  EdgeSet R;
  bool abnormal() const { return !R.empty(); }
};

struct RobustKey {
  Key key;
  bool robust = false;
  bool super_robust = false;
};

enum class Grade { Good, Fair };

// Precomputed per-vertex facts about one TF pair.
class Analysis {
 public:
  explicit Analysis(const TFPair& P);

  const TFPair& pair() const { return *P_; }
  const Forest& T() const { return P_->T; }
  const Forest& F() const { return P_->F; }
  std::size_t bound() const { return bound_; }

  // L_alpha.
  const LabelSet& leaves(VertexId alpha) const { return leaves_[alpha]; }
  // l_F(L_alpha), or kNoVertex when the leaves span several components.
  VertexId lca_f(VertexId alpha) const { return lca_f_[alpha]; }
  bool consistent(VertexId alpha) const { return consistent_[alpha]; }
  VertexId f_leaf(LabelId l) const { return P_->F.leaf_of(l); }
  VertexId t_leaf(LabelId l) const { return P_->T.leaf_of(l); }
  // l_T(X) for a nonempty X.
  VertexId t_lca(const LabelSet& X) const;
  // Number of labels of X.
  int size(VertexId alpha) const { return static_cast<int>(leaves_[alpha].count()); }

 private:
  const TFPair* P_;
  std::size_t bound_;
  std::vector<LabelSet> leaves_;
  std::vector<VertexId> lca_f_;
  std::vector<char> consistent_;
};

bool is_consistent(const TFPair& P, VertexId alpha);

// Robust and super-robust flags of a normal key, by their definitions.
void classify_robust(const Analysis& A, RobustKey& k);

// Definition-following stopper test; SemiClose is reported when a vertex is
// semi-close (Close when it is also close).
std::optional<StopperKind> classify_stopper(const TFPair& P, VertexId alpha);

struct StopperScan {
  std::vector<Stopper> stoppers;  // every stopper, postorder
};
// Postorder scan using the incremental semi-close test.
StopperScan scan_stoppers(const Analysis& A);
Stopper find_stopper(const TFPair& P);

// Choice of the extra edge when two keys are combined.
struct Steer {
  VertexId edge = kNoVertex;
  // Take the edge whenever it is admissible; otherwise only when it lies in
  // the first applicable class of the robust way.
  bool force = false;
};

RobustKey leaf_key(const Analysis& A, VertexId t_leaf);
RobustKey combine_keys(const Analysis& A, const RobustKey& k1, const RobustKey& k2, VertexId alpha,
                       const Steer& steer = {});
RobustKey build_fair_key(const Analysis& A, VertexId alpha);
RobustKey build_fair_robust_key(const Analysis& A, VertexId beta, const Steer& steer = {});

// Witness leaves (F vertices) of a semi-close stopper, or absent.
std::optional<std::pair<VertexId, VertexId>> semi_close_witnesses(const Analysis& A, VertexId alpha);

Key key_close_stopper(const Analysis& A, VertexId alpha);
Key key_close_stopper(const Analysis& A, VertexId alpha, VertexId x1, VertexId x2);
Key key_semiclose_stopper(const Analysis& A, VertexId alpha);
Key key_root_or_disconnected(const Analysis& A, VertexId alpha);

struct Port {
  int side = 0;  // 1 or 2: the child cluster the port vertex belongs to
  VertexId vertex = kNoVertex;
};
std::optional<Port> detect_port(const Analysis& A, VertexId alpha);
Key key_overlapping_port(const Analysis& A, VertexId alpha, const Port& port);

// Side h (1 or 2) whose cluster hangs below the other cluster's LCA, if any.
std::optional<int> detect_dangle(const Analysis& A, VertexId alpha);
EdgeSet cut_overlapping_dangle(const Analysis& A, VertexId alpha, int h);

// Fair normal key over the side-`side` cluster keeping at most one path per
// vertex into the other cluster.
RobustKey key_X1_with_path_budget(const Analysis& A, VertexId alpha, int side);
EdgeSet cut_overlapping_general(const Analysis& A, VertexId alpha);

// Good cut for pairwise F-disconnected clusters alphas (T vertices).
EdgeSet keys_across_components(const Analysis& A, const std::vector<VertexId>& alphas);

struct GoodCutResult {
  EdgeSet cut;
  int step = 0;
  std::string construction;
  VertexId stopper = kNoVertex;
  // Key backing the cut, when the construction produces one, and the label
  // scope of the search tree that certifies it.
  std::optional<Key> key;
  LabelSet scope;
};

GoodCutResult find_good_cut(const TFPair& P);

struct StageRecord {
  int step = 0;
  std::string construction;
  EdgeSet cut;     // over the stage pair
  EdgeSet lifted;  // over the vertices the input F's origins refer to
  TFPair before;   // stage pair the cut was found on
};

struct ApproxResult {
  EdgeSet cut;
  std::vector<StageRecord> stages;
};

// 2-approximate agreement cut.
ApproxResult approx2(const TFPair& P, bool keep_stage_pairs = false);
// 3-approximate baseline.
EdgeSet approx3(const TFPair& P);

}  // namespace rspr
