#pragma once

#include <array>
#include <span>
#include <vector>

#include "rspr/types.hpp"

namespace rspr {

struct Vertex {
  VertexId parent = kNoVertex;
  std::array<VertexId, 2> child{kNoVertex, kNoVertex};
  LabelId label = kNoLabel;
  // Vertex of the originating forest whose entering edge this vertex's
  // entering edge stands for. Identity for freshly built forests.
  VertexId origin = kNoVertex;

  int num_children() const {
    return (child[0] != kNoVertex ? 1 : 0) + (child[1] != kNoVertex ? 1 : 0);
  }
};

// Rooted forest in which every vertex has at most two children. Built through
// add_vertex/attach and then sealed; all queries require a sealed forest.
class Forest {
 public:
  Forest() = default;

  VertexId add_vertex(LabelId label = kNoLabel, VertexId origin = kNoVertex);
  void attach(VertexId parent, VertexId child);
  void seal();

  bool sealed() const { return sealed_; }
  bool empty() const { return vertices_.empty(); }
  VertexId size() const { return static_cast<VertexId>(vertices_.size()); }

  const Vertex& vertex(VertexId v) const { return vertices_[check(v)]; }
  VertexId parent(VertexId v) const { return vertices_[check(v)].parent; }
  LabelId label(VertexId v) const { return vertices_[check(v)].label; }
  VertexId origin(VertexId v) const { return vertices_[check(v)].origin; }
  std::span<const VertexId> children(VertexId v) const;
  int num_children(VertexId v) const { return vertices_[check(v)].num_children(); }
  bool is_leaf(VertexId v) const { return num_children(v) == 0; }
  bool is_root(VertexId v) const { return parent(v) == kNoVertex; }
  VertexId sibling(VertexId v) const;

  const std::vector<VertexId>& roots() const { return roots_; }
  int num_components() const { return static_cast<int>(roots_.size()); }
  VertexId leaf_of(LabelId label) const;
  bool has_label(LabelId label) const { return leaf_of(label) != kNoVertex; }
  // Labels present in the forest, ascending.
  const std::vector<LabelId>& labels() const { return labels_; }
  LabelId label_bound() const { return static_cast<LabelId>(label_index_.size()); }

  int depth(VertexId v) const { return depth_[check(v)]; }
  VertexId component_root(VertexId v) const { return comp_[check(v)]; }
  bool same_component(VertexId a, VertexId b) const {
    return component_root(a) == component_root(b);
  }
  // True when a is an ancestor of b (every vertex is its own ancestor).
  bool is_ancestor(VertexId a, VertexId b) const {
    return tin_[check(a)] <= tin_[check(b)] && tin_[b] < tout_[a];
  }
  bool comparable(VertexId a, VertexId b) const {
    return is_ancestor(a, b) || is_ancestor(b, a);
  }
  // Vertices in postorder; components in root order, children in stored order.
  const std::vector<VertexId>& postorder() const { return postorder_; }
  int leaf_count(VertexId v) const { return leaf_count_[check(v)]; }

  // Rewrites origin so that every vertex stands for itself.
  void reset_origin();

 private:
  VertexId check(VertexId v) const;
  void require_sealed() const;

  std::vector<Vertex> vertices_;
  bool sealed_ = false;
  std::vector<VertexId> roots_;
  std::vector<VertexId> label_index_;
  std::vector<LabelId> labels_;
  std::vector<int> depth_;
  std::vector<VertexId> comp_;
  std::vector<int> tin_, tout_;
  std::vector<VertexId> postorder_;
  std::vector<int> leaf_count_;
};

}  // namespace rspr
