#include "rspr/forest.hpp"

#include <algorithm>
#include <utility>

namespace rspr {

EdgeSet set_union(const EdgeSet& a, const EdgeSet& b) {
  EdgeSet out = a;
  out.insert(b.begin(), b.end());
  return out;
}

EdgeSet set_intersection(const EdgeSet& a, const EdgeSet& b) {
  EdgeSet out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(),
                        std::inserter(out, out.end()));
  return out;
}

EdgeSet set_difference(const EdgeSet& a, const EdgeSet& b) {
  EdgeSet out;
  std::set_difference(a.begin(), a.end(), b.begin(), b.end(),
                      std::inserter(out, out.end()));
  return out;
}

VertexId Forest::add_vertex(LabelId label, VertexId origin) {
  sealed_ = false;
  Vertex v;
  v.label = label;
  v.origin = origin == kNoVertex ? static_cast<VertexId>(vertices_.size()) : origin;
  vertices_.push_back(v);
  return static_cast<VertexId>(vertices_.size() - 1);
}

void Forest::attach(VertexId parent, VertexId child) {
  check(parent);
  check(child);
  if (parent == child) throw UsageError("vertex cannot be its own parent");
  Vertex& p = vertices_[parent];
  Vertex& c = vertices_[child];
  if (c.parent != kNoVertex) throw UsageError("vertex already has a parent");
  if (p.label != kNoLabel) throw UsageError("labeled vertex cannot have children");
  if (p.child[0] == kNoVertex) {
    p.child[0] = child;
  } else if (p.child[1] == kNoVertex) {
    p.child[1] = child;
  } else {
    throw UsageError("vertex already has two children");
  }
  c.parent = parent;
  sealed_ = false;
}

std::span<const VertexId> Forest::children(VertexId v) const {
  const Vertex& x = vertices_[check(v)];
  return {x.child.data(), static_cast<std::size_t>(x.num_children())};
}

VertexId Forest::sibling(VertexId v) const {
  VertexId p = parent(v);
  if (p == kNoVertex) return kNoVertex;
  const Vertex& x = vertices_[p];
  return x.child[0] == v ? x.child[1] : x.child[0];
}

VertexId Forest::leaf_of(LabelId label) const {
  require_sealed();
  if (label < 0 || label >= static_cast<LabelId>(label_index_.size())) return kNoVertex;
  return label_index_[label];
}

VertexId Forest::check(VertexId v) const {
  if (v < 0 || v >= static_cast<VertexId>(vertices_.size())) {
    throw UsageError("invalid vertex id " + std::to_string(v));
  }
  return v;
}

void Forest::require_sealed() const {
  if (!sealed_) throw InvariantError("forest queried before seal()");
}

void Forest::reset_origin() {
  for (VertexId v = 0; v < size(); ++v) vertices_[v].origin = v;
}

void Forest::seal() {
  const VertexId n = size();
  roots_.clear();
  labels_.clear();
  LabelId max_label = -1;
  for (VertexId v = 0; v < n; ++v) {
    const Vertex& x = vertices_[v];
    if (x.child[0] == kNoVertex && x.child[1] != kNoVertex) {
      throw InvariantError("malformed child slots");
    }
    if (x.parent == kNoVertex) roots_.push_back(v);
    if (x.label != kNoLabel) {
      if (x.num_children() != 0) throw InvariantError("labeled vertex with children");
      max_label = std::max(max_label, x.label);
    }
  }
  label_index_.assign(static_cast<std::size_t>(max_label + 1), kNoVertex);
  for (VertexId v = 0; v < n; ++v) {
    LabelId l = vertices_[v].label;
    if (l == kNoLabel) continue;
    if (l < 0) throw InvariantError("negative label");
    if (label_index_[l] != kNoVertex) {
      throw UsageError("duplicate leaf label " + std::to_string(l));
    }
    label_index_[l] = v;
  }
  for (LabelId l = 0; l <= max_label; ++l) {
    if (label_index_[l] != kNoVertex) labels_.push_back(l);
  }

  depth_.assign(n, 0);
  comp_.assign(n, kNoVertex);
  tin_.assign(n, 0);
  tout_.assign(n, 0);
  leaf_count_.assign(n, 0);
  postorder_.clear();
  postorder_.reserve(n);
  int clock = 0;
  std::vector<std::pair<VertexId, int>> stack;
  for (VertexId r : roots_) {
    stack.push_back({r, 0});
    depth_[r] = 0;
    comp_[r] = r;
    tin_[r] = clock++;
    while (!stack.empty()) {
      auto& [v, next] = stack.back();
      const Vertex& x = vertices_[v];
      if (next < x.num_children()) {
        VertexId c = x.child[next++];
        depth_[c] = depth_[v] + 1;
        comp_[c] = r;
        tin_[c] = clock++;
        stack.push_back({c, 0});
      } else {
        tout_[v] = clock;
        leaf_count_[v] = x.num_children() == 0 && x.label != kNoLabel ? 1 : 0;
        for (int i = 0; i < x.num_children(); ++i) leaf_count_[v] += leaf_count_[x.child[i]];
        postorder_.push_back(v);
        stack.pop_back();
      }
    }
  }
  if (static_cast<VertexId>(postorder_.size()) != n) {
    throw InvariantError("forest contains a cycle");
  }
  sealed_ = true;
}

}  // namespace rspr
