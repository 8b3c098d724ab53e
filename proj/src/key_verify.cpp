#include "rspr/key_verify.hpp"

#include <algorithm>
#include <limits>
#include <map>

namespace rspr {

namespace {

KeyCheck fail(std::string reason) { return KeyCheck{false, std::move(reason)}; }

// Vertices of F restricted upward to X: X-inclusive vertices with an
// X-bifurcate ancestor (or self), plus the X leaves themselves.
std::vector<char> upward_vertices(const Forest& F, const LabelSet& X) {
  auto inc = inclusive_flags(F, X);
  std::vector<char> in(F.size(), 0);
  std::vector<char> bif_above(F.size(), 0);
  const auto& post = F.postorder();
  for (auto it = post.rbegin(); it != post.rend(); ++it) {
    VertexId v = *it;
    bool bif = F.num_children(v) == 2 && inc[F.children(v)[0]] && inc[F.children(v)[1]];
    VertexId p = F.parent(v);
    bif_above[v] = bif || (p != kNoVertex && bif_above[p]);
    in[v] = inc[v] && bif_above[v];
    if (F.is_leaf(v) && contains(X, F.label(v))) in[v] = 1;
  }
  return in;
}

bool siblings_after(const Forest& F, const EdgeSet& C, LabelId a, LabelId b) {
  Reduction R = ominus(F, C);
  VertexId u = R.forest.leaf_of(a), w = R.forest.leaf_of(b);
  if (u == kNoVertex || w == kNoVertex) return false;
  VertexId p = R.forest.parent(u);
  return p != kNoVertex && p == R.forest.parent(w);
}

struct BoundSearch {
  const TFPair& P;
  const Key& k;
  const LabelSet& Y;
  std::size_t bound;
  std::map<std::vector<VertexId>, int> memo;

  int leaf_value(const EdgeSet& cut) { return bound_for_path(P, k, cut).bound; }

  int run(const TFPair& Q, const EdgeSet& cut) {
    std::vector<VertexId> key(cut.begin(), cut.end());
    if (auto it = memo.find(key); it != memo.end()) return it->second;
    int best = kNoValue;
    if (!Q.is_empty()) {
      for (auto [a, b] : sibling_leaf_pairs(Q.T, CherryPolicy::DeepestFirst)) {
        if (!subset_of(cherry_side(Q, a, bound), Y) || !subset_of(cherry_side(Q, b, bound), Y)) continue;
        int worst = std::numeric_limits<int>::max();
        for (Branch& br : branches(Q, a, b)) {
          worst = std::min(worst, run(br.child, set_union(cut, br.lifted)));
          if (best != kNoValue && worst <= best) break;
        }
        best = std::max(best, worst);
      }
    }
    if (best == kNoValue) best = leaf_value(cut);
    memo.emplace(std::move(key), best);
    return best;
  }

  static constexpr int kNoValue = std::numeric_limits<int>::min();
};

}  // namespace

LabelSet tree_labels(const TFPair& P) {
  LabelSet out = P.make_set();
  for (LabelId l : P.T.labels()) {
    if (static_cast<std::size_t>(l) >= out.size()) out.resize(static_cast<std::size_t>(l) + 1);
    out.set(static_cast<std::size_t>(l));
  }
  return out;
}

KeyCheck validate_key(const TFPair& P, const Key& k, const LabelSet* scope) {
  const Forest& T = P.T;
  const Forest& F = P.F;
  if (k.X.none()) return fail("X is empty");
  if (!subset_of(k.X, tree_labels(P))) return fail("X contains labels outside T");
  if (scope && !subset_of(k.X, *scope)) return fail("scope does not contain X");
  if (!restriction_is_dangling(T, scope ? *scope : k.X)) {
    return fail("T restricted to X is not a union of dangling subtrees");
  }
  if (!is_cut(F, k.B)) return fail("B is not a cut of F");
  auto up = upward_vertices(F, k.X);
  for (VertexId h : k.B) {
    if (h < 0 || h >= F.size() || F.is_root(h)) return fail("B names a vertex without an entering edge");
    if (!up[h] && !up[F.parent(h)]) return fail("B has an edge outside the X-part of F");
  }
  std::vector<VertexId> kept;
  for (std::size_t l = k.X.find_first(); l != LabelSet::npos; l = k.X.find_next(l)) {
    VertexId x = F.leaf_of(static_cast<LabelId>(l));
    if (x == kNoVertex) return fail("X label missing from F");
    if (!F.is_root(x) && !k.B.count(x)) kept.push_back(x);
  }
  if (kept.empty()) {
    if (!k.R.empty()) return fail("R must be empty when every X leaf edge is in B");
    return {};
  }
  if (kept.size() != 2) return fail("exactly zero or two X leaf edges may stay outside B");
  LabelId a = F.label(kept[0]), b = F.label(kept[1]);
  if (!siblings_after(F, k.B, a, b)) return fail("the two kept leaves are not siblings in F minus B");
  if (k.R != path_edges(F, kept[0], kept[1])) return fail("R is not the path between the kept leaves");
  if (!set_intersection(k.B, k.R).empty()) return fail("B and R intersect");
  EdgeSet others;
  for (std::size_t l = k.X.find_first(); l != LabelSet::npos; l = k.X.find_next(l)) {
    auto id = static_cast<LabelId>(l);
    if (id == a || id == b) continue;
    VertexId t = T.leaf_of(id);
    if (!T.is_root(t)) others.insert(t);
  }
  if (!siblings_after(T, others, a, b)) return fail("the two kept leaves are not siblings in T");
  return {};
}

KeyBound bound_for_path(const TFPair& P, const Key& k, const EdgeSet& path_cut) {
  const Forest& F = P.F;
  KeyBound out;
  for (VertexId h : path_cut) {
    if (k.B.count(h) || k.R.count(h)) out.free_edges.insert(h);
  }
  EdgeSet M = set_union(set_difference(path_cut, k.R), k.B);
  std::vector<VertexId> top(F.size(), kNoVertex);
  std::vector<char> labeled(F.size(), 0);
  const auto& post = F.postorder();
  for (auto it = post.rbegin(); it != post.rend(); ++it) {
    VertexId v = *it;
    VertexId p = F.parent(v);
    top[v] = (p == kNoVertex || M.count(v)) ? v : top[p];
  }
  for (VertexId v : post) {
    if (F.is_leaf(v) && F.label(v) != kNoLabel) labeled[top[v]] = 1;
  }
  for (VertexId v : post) {
    if (top[v] == v && !labeled[v]) out.free_components.push_back(v);
  }
  out.bound = static_cast<int>(out.free_edges.size() + out.free_components.size());
  return out;
}

int key_lower_bound_tree(const TFPair& P, const Key& k, const LabelSet& Y, CherryPolicy policy) {
  int best = std::numeric_limits<int>::max();
  TFPair Q = rebase(P);
  Q.names = P.names;
  for_each_search_path(Q, &Y, std::numeric_limits<int>::max(), policy,
                       [&](const SearchPath& p) { best = std::min(best, bound_for_path(P, k, p.cut).bound); });
  return best;
}

int key_lower_bound(const TFPair& P, const Key& k, const LabelSet& Y, int leaf_limit) {
  if (!subset_of(k.X, Y)) throw UsageError("Y must contain X");
  if (!restriction_is_dangling(P.T, Y)) throw UsageError("Y does not restrict T to dangling subtrees");
  LabelSet inT = tree_labels(P);
  LabelSet y = Y;
  y.resize(std::max(y.size(), inT.size()));
  inT.resize(y.size());
  if (static_cast<int>((y & inT).count()) > leaf_limit) throw ResourceError("too many leaves for exact key bounds");
  TFPair Q = rebase(P);
  Q.names = P.names;
  BoundSearch s{P, k, Y, static_cast<std::size_t>(P.next_label), {}};
  return s.run(Q, {});
}

bool certify(const TFPair& P, const Key& k, Grade grade, const LabelSet* Y, int leaf_limit) {
  int slack = grade == Grade::Good ? 0 : 1;
  auto meets = [&](int b) { return static_cast<int>(k.B.size()) <= 2 * b + slack; };
  if (Y) return meets(key_lower_bound(P, k, *Y, leaf_limit));
  if (meets(key_lower_bound(P, k, k.X, leaf_limit))) return true;
  LabelSet all = tree_labels(P);
  if (static_cast<int>(all.count()) > leaf_limit) return false;
  return meets(key_lower_bound(P, k, all, leaf_limit));
}

}  // namespace rspr
