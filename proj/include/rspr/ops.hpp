#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "rspr/forest.hpp"
#include "rspr/tfpair.hpp"

namespace rspr {

inline bool contains(const LabelSet& X, LabelId l) {
  return l >= 0 && static_cast<std::size_t>(l) < X.size() && X.test(static_cast<std::size_t>(l));
}
inline bool contains(const EdgeSet& C, VertexId v) { return C.count(v) != 0; }

// Lowest common ancestor; absent when the vertices span several components.
std::optional<VertexId> lca(const Forest& F, std::span<const VertexId> U);
// Two-vertex form; kNoVertex when a and b lie in different components.
VertexId lca(const Forest& F, VertexId a, VertexId b);
// LCA of the leaves carrying labels of X; kNoVertex if undefined or X empty.
VertexId lca_of_labels(const Forest& F, const LabelSet& X);

// Vertices of u~v from u to v.
std::vector<VertexId> path_vertices(const Forest& F, VertexId u, VertexId v);
EdgeSet path_edges(const Forest& F, VertexId u, VertexId v);
EdgeSet d_edges(const Forest& F, VertexId u, VertexId v);
EdgeSet d_plus_edges(const Forest& F, VertexId u, VertexId v);

// Result of deleting edges and cleaning up. to_source maps each new vertex to
// the input vertex whose entering edge its entering edge corresponds to (the
// top of a contracted unifurcate chain).
struct Reduction {
  Forest forest;
  std::vector<VertexId> to_source;
};

struct ReduceSpec {
  const EdgeSet* cut = nullptr;
  // Labels treated as absent.
  const LabelSet* drop = nullptr;
  // Vertices whose subtree collapses into a leaf with the given label.
  const std::map<VertexId, LabelId>* collapse = nullptr;
};

Reduction reduce(const Forest& F, const ReduceSpec& spec);
Reduction ominus(const Forest& F, const EdgeSet& C);

// Forest F restricted to X. Labels in X must occur in F.
Forest restrict_to(const Forest& F, const LabelSet& X);
// Vertices of F that survive restriction to X before binarization.
std::vector<VertexId> restricted_vertices(const Forest& F, const LabelSet& X);

// Per-vertex flags: at least one leaf below carries a label in X.
std::vector<char> inclusive_flags(const Forest& F, const LabelSet& X);
// Labels in X below v.
LabelSet descendants_in(const Forest& F, VertexId v, const LabelSet& X);
// Labels below v; the result grows past bound when a label needs it.
LabelSet leaf_set(const Forest& F, VertexId v, std::size_t bound);
// Subset test tolerant of differing set sizes.
bool subset_of(const LabelSet& a, const LabelSet& b);

// Number of X-paths starting at each vertex of F - A.
std::vector<int> n_paths_all(const Forest& F, const EdgeSet& A, const LabelSet& X);
int n_paths(const Forest& F, const EdgeSet& A, const LabelSet& X, VertexId v);

// Every component of F - C has a labeled leaf.
bool is_cut(const Forest& F, const EdgeSet& C);
// Drops edges of C until it is a cut, without changing F minus C.
EdgeSet trim_to_cut(const Forest& F, EdgeSet C);
// Every leaf of F - C is labeled.
bool is_canonical_cut(const Forest& F, const EdgeSet& C);

struct Fingerprint {
  std::uint64_t a = 0, b = 0;
  friend bool operator==(const Fingerprint&, const Fingerprint&) = default;
  friend auto operator<=>(const Fingerprint&, const Fingerprint&) = default;
};
struct FingerprintHash {
  std::size_t operator()(const Fingerprint& f) const { return static_cast<std::size_t>(f.a ^ (f.b * 0x9e3779b97f4a7c15ULL)); }
};

// Unordered-children subtree fingerprints over shared label ids.
std::vector<Fingerprint> subtree_fingerprints(const Forest& F);
bool isomorphic(const Forest& F1, const Forest& F2);

EdgeSet forced_cut(const TFPair& P, const EdgeSet& CF);
TFPair induced_subpair(const TFPair& P, const EdgeSet& CF);
bool is_agreement_cut(const TFPair& P, const EdgeSet& CF);

// Hangs a fresh dummy leaf and the old root under a new root, in T and in the
// first component of F. Origins of the result are the identity.
TFPair add_dummy(const TFPair& P);

// Leaf-root removal and common-cherry contraction, after add_dummy if asked.
TFPair preprocess(const TFPair& P, bool with_dummy);

}  // namespace rspr
