#include "rspr/generate.hpp"

#include <array>
#include <vector>

namespace rspr {

namespace {

struct Draft {
  std::vector<int> parent;
  std::vector<std::array<int, 2>> child;
  std::vector<LabelId> label;
  int root = -1;

  int add(LabelId l) {
    parent.push_back(-1);
    child.push_back({-1, -1});
    label.push_back(l);
    return static_cast<int>(parent.size()) - 1;
  }
  void set_child(int p, int slot, int c) {
    child[p][slot] = c;
    if (c >= 0) parent[c] = p;
  }
  int slot_of(int p, int c) const { return child[p][0] == c ? 0 : 1; }

  // New vertex above w whose other child is x.
  void subdivide(int w, int x, int mid) {
    int p = parent[w];
    if (p < 0) {
      root = mid;
      parent[mid] = -1;
    } else {
      set_child(p, slot_of(p, w), mid);
    }
    set_child(mid, 0, w);
    set_child(mid, 1, x);
  }

  bool in_subtree(int top, int v) const {
    for (; v >= 0; v = parent[v]) {
      if (v == top) return true;
    }
    return false;
  }

  Forest build() const {
    Forest F;
    for (std::size_t v = 0; v < parent.size(); ++v) F.add_vertex(label[v]);
    for (std::size_t v = 0; v < parent.size(); ++v) {
      for (int c : child[v]) {
        if (c >= 0) F.attach(static_cast<VertexId>(v), c);
      }
    }
    F.seal();
    return F;
  }
};

int pick(std::mt19937_64& rng, int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng); }

Draft draft_tree(int n, Shape shape, std::mt19937_64& rng) {
  Draft d;
  d.root = d.add(0);
  std::vector<int> leaves{d.root};
  for (LabelId l = 1; l < n; ++l) {
    int w;
    if (shape == Shape::Yule) {
      w = leaves[pick(rng, static_cast<int>(leaves.size()))];
    } else {
      w = pick(rng, static_cast<int>(d.parent.size()));
    }
    int x = d.add(l);
    int mid = d.add(kNoLabel);
    d.subdivide(w, x, mid);
    leaves.push_back(x);
  }
  return d;
}

void random_move(Draft& d, std::mt19937_64& rng) {
  const int n = static_cast<int>(d.parent.size());
  if (n < 3) return;
  std::vector<int> movable;
  for (int v = 0; v < n; ++v) {
    if (d.parent[v] >= 0) movable.push_back(v);
  }
  int v = movable[pick(rng, static_cast<int>(movable.size()))];
  int p = d.parent[v];
  int s = d.child[p][1 - d.slot_of(p, v)];
  int g = d.parent[p];
  if (g < 0) {
    d.root = s;
    d.parent[s] = -1;
  } else {
    d.set_child(g, d.slot_of(g, p), s);
  }
  d.parent[p] = -1;
  d.child[p] = {-1, -1};
  std::vector<int> targets;
  for (int w = 0; w < n; ++w) {
    if (w == p || d.in_subtree(v, w)) continue;
    targets.push_back(w);
  }
  int w = targets[pick(rng, static_cast<int>(targets.size()))];
  d.subdivide(w, v, p);
}

LabelId intern_names(int n, LabelNames& names) {
  for (int i = 0; i < n; ++i) {
    LabelId id = names.intern("x" + std::to_string(i + 1));
    if (id != i) throw UsageError("label names do not match the generated labels");
  }
  return n;
}

}  // namespace

Shape parse_shape(const std::string& text) {
  if (text == "yule") return Shape::Yule;
  if (text == "uniform") return Shape::Uniform;
  throw UsageError("unknown tree shape: " + text);
}

Forest random_tree(int n, Shape shape, std::mt19937_64& rng, LabelNames& names) {
  if (n < 1) throw UsageError("a tree needs at least one leaf");
  intern_names(n, names);
  return draft_tree(n, shape, rng).build();
}

TFPair gen_pair(const GenSpec& spec) {
  if (spec.n_leaves < 2) throw UsageError("n_leaves must be at least 2");
  if (spec.n_moves < 0) throw UsageError("n_moves must be non-negative");
  std::mt19937_64 rng(spec.seed);
  auto names = std::make_shared<LabelNames>();
  intern_names(spec.n_leaves, *names);
  Draft t = draft_tree(spec.n_leaves, spec.shape, rng);
  Draft f = t;
  for (int i = 0; i < spec.n_moves; ++i) random_move(f, rng);
  return make_pair(t.build(), f.build(), names);
}

}  // namespace rspr
