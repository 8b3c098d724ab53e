#include "rspr/exact.hpp"

#include <algorithm>
#include <limits>

#include "rspr/approx.hpp"

namespace rspr {

std::vector<std::pair<VertexId, VertexId>> sibling_leaf_pairs(const Forest& T, CherryPolicy policy) {
  std::vector<VertexId> parents;
  for (VertexId p = 0; p < T.size(); ++p) {
    if (T.num_children(p) == 2 && T.is_leaf(T.children(p)[0]) && T.is_leaf(T.children(p)[1])) {
      parents.push_back(p);
    }
  }
  if (policy == CherryPolicy::DeepestFirst) {
    std::stable_sort(parents.begin(), parents.end(),
                     [&](VertexId a, VertexId b) { return T.depth(a) > T.depth(b); });
  } else {
    std::reverse(parents.begin(), parents.end());
    std::stable_sort(parents.begin(), parents.end(),
                     [&](VertexId a, VertexId b) { return T.depth(a) < T.depth(b); });
  }
  std::vector<std::pair<VertexId, VertexId>> out;
  for (VertexId p : parents) out.emplace_back(T.children(p)[0], T.children(p)[1]);
  return out;
}

std::vector<Branch> branches(const TFPair& Q, VertexId t1, VertexId t2) {
  VertexId x1 = Q.F.leaf_of(Q.T.label(t1));
  VertexId x2 = Q.F.leaf_of(Q.T.label(t2));
  std::vector<Branch> out;
  auto add = [&](int way, EdgeSet local) {
    Branch b;
    b.way = way;
    for (VertexId h : local) b.lifted.insert(Q.F.origin(h));
    b.local = std::move(local);
    b.child = induced_subpair(Q, b.local);
    out.push_back(std::move(b));
  };
  add(1, {x1});
  add(2, {x2});
  if (Q.F.same_component(x1, x2)) add(3, d_edges(Q.F, x1, x2));
  return out;
}

LabelSet cherry_side(const TFPair& Q, VertexId t, std::size_t bound) {
  LabelSet out(bound);
  std::vector<VertexId> stack{t};
  while (!stack.empty()) {
    VertexId v = stack.back();
    stack.pop_back();
    if (Q.T.label(v) != kNoLabel) {
      for (LabelId b : Q.expand(Q.T.label(v))) {
        if (static_cast<std::size_t>(b) < bound) out.set(static_cast<std::size_t>(b));
      }
    }
    for (VertexId c : Q.T.children(v)) stack.push_back(c);
  }
  return out;
}

namespace {

int ceil_div(int a, int b) { return (a + b - 1) / b; }

int lower_bound_of(const TFPair& Q, LowerBound kind) {
  if (kind == LowerBound::None || Q.is_empty()) return 0;
  int lb = ceil_div(static_cast<int>(approx3(Q).size()), 3);
  if (kind == LowerBound::Approx2) {
    lb = std::max(lb, ceil_div(static_cast<int>(approx2(Q).cut.size()), 2));
  }
  return lb;
}

struct Search {
  const ExactOptions& opts;
  int best;
  std::optional<EdgeSet> witness;
  std::size_t nodes = 0;

  void run(const TFPair& Q, EdgeSet& acc) {
    ++nodes;
    int size = static_cast<int>(acc.size());
    if (Q.is_empty()) {
      if (size < best) {
        best = size;
        witness = acc;
      }
      return;
    }
    if (opts.prune) {
      int lb = std::max(1, lower_bound_of(Q, opts.bound));
      if (size + lb >= best) return;
    } else if (opts.budget && size + 1 > *opts.budget) {
      return;
    }
    auto pairs = sibling_leaf_pairs(Q.T, opts.policy);
    if (pairs.empty()) throw InvariantError("non-empty pair without a T cherry");
    for (Branch& b : branches(Q, pairs.front().first, pairs.front().second)) {
      EdgeSet next = set_union(acc, b.lifted);
      run(b.child, next);
    }
  }
};

}  // namespace

std::optional<ExactResult> exact_distance(const TFPair& P0, const ExactOptions& opts) {
  TFPair P = preprocess(P0, false);
  int cap = opts.budget ? *opts.budget + 1 : std::numeric_limits<int>::max();
  Search s{opts, cap, std::nullopt};
  if (opts.seed_incumbent && opts.prune && !P.is_empty()) {
    EdgeSet inc = approx2(P).cut;
    if (static_cast<int>(inc.size()) < s.best) {
      s.best = static_cast<int>(inc.size());
      s.witness = inc;
    }
  }
  EdgeSet acc;
  s.run(P, acc);
  if (!s.witness) return std::nullopt;
  ExactResult r;
  r.distance = s.best;
  r.cut = std::move(*s.witness);
  r.nodes = s.nodes;
  return r;
}

bool agreement_by_restriction(const TFPair& P, const EdgeSet& CF) {
  if (P.is_empty()) return true;
  Reduction R = ominus(P.F, CF);
  const Forest& K = R.forest;
  auto hk = subtree_fingerprints(K);
  const Forest& T = P.T;
  std::vector<int> owner(T.size(), -1);
  std::size_t bound = static_cast<std::size_t>(std::max(P.next_label, T.label_bound()));
  for (std::size_t i = 0; i < K.roots().size(); ++i) {
    VertexId r = K.roots()[i];
    LabelSet L = leaf_set(K, r, bound);
    Forest TL = restrict_to(T, L);
    if (TL.num_components() != 1) return false;
    if (subtree_fingerprints(TL)[TL.roots()[0]] != hk[r]) return false;
    VertexId top = lca_of_labels(T, L);
    auto inc = inclusive_flags(T, L);
    for (VertexId v = 0; v < T.size(); ++v) {
      if (!inc[v] || !T.is_ancestor(top, v)) continue;
      if (owner[v] != -1) return false;
      owner[v] = static_cast<int>(i);
    }
  }
  return true;
}

std::optional<ExactResult> brute_force_distance(const TFPair& P0, int k_max) {
  TFPair P = preprocess(P0, false);
  std::vector<VertexId> edges;
  for (VertexId v = 0; v < P.F.size(); ++v) {
    if (!P.F.is_root(v)) edges.push_back(v);
  }
  const int m = static_cast<int>(edges.size());
  if (m > 25 && k_max > 5) throw ResourceError("instance too large for brute force");
  ExactResult r;
  for (int k = 0; k <= std::min(k_max, m); ++k) {
    std::vector<int> idx(k);
    for (int i = 0; i < k; ++i) idx[i] = i;
    while (true) {
      ++r.nodes;
      EdgeSet C;
      for (int i : idx) C.insert(edges[i]);
      if (agreement_by_restriction(P, C)) {
        r.distance = k;
        for (VertexId h : C) r.cut.insert(P.F.origin(h));
        return r;
      }
      int i = k - 1;
      while (i >= 0 && idx[i] == m - k + i) --i;
      if (i < 0) break;
      ++idx[i];
      for (int j = i + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
    }
  }
  return std::nullopt;
}

bool restriction_is_dangling(const Forest& T, const LabelSet& Z) {
  if (Z.none()) return true;
  auto keep = restricted_vertices(T, Z);
  std::vector<char> kept(T.size(), 0);
  for (VertexId v : keep) kept[v] = 1;
  for (VertexId v : keep) {
    VertexId p = T.parent(v);
    if (p != kNoVertex && kept[p]) continue;
    LabelSet all = leaf_set(T, v, Z.size());
    if (!subset_of(all, Z)) return false;
    if (static_cast<int>(all.count()) != T.leaf_count(v)) return false;
  }
  return true;
}

namespace {

void walk_paths(const TFPair& Q, const LabelSet* Z, int depth_left, CherryPolicy policy, SearchPath& path,
                std::size_t bound, const std::function<void(const SearchPath&)>& visit) {
  if (Q.is_empty()) {
    path.agreement = true;
    visit(path);
    path.agreement = false;
    return;
  }
  std::optional<std::pair<VertexId, VertexId>> pick;
  Cherry ch;
  if (depth_left > 0) {
    for (auto [a, b] : sibling_leaf_pairs(Q.T, policy)) {
      LabelSet y1 = cherry_side(Q, a, bound), y2 = cherry_side(Q, b, bound);
      if (Z && !(subset_of(y1, *Z) && subset_of(y2, *Z))) continue;
      pick = std::make_pair(a, b);
      ch.Y1 = std::move(y1);
      ch.Y2 = std::move(y2);
      break;
    }
  }
  if (!pick) {
    visit(path);
    return;
  }
  for (Branch& b : branches(Q, pick->first, pick->second)) {
    EdgeSet saved = path.cut;
    path.steps.push_back({ch, b.way, b.lifted});
    path.cut = set_union(path.cut, b.lifted);
    walk_paths(b.child, Z, depth_left - 1, policy, path, bound, visit);
    path.steps.pop_back();
    path.cut = std::move(saved);
  }
}

}  // namespace

void for_each_search_path(const TFPair& P, const LabelSet* Z, int depth_cap, CherryPolicy policy,
                          const std::function<void(const SearchPath&)>& visit) {
  if (Z && !restriction_is_dangling(P.T, *Z)) {
    throw UsageError("Z does not restrict T to dangling subtrees");
  }
  SearchPath path;
  walk_paths(P, Z, depth_cap, policy, path, static_cast<std::size_t>(P.next_label), visit);
}

std::vector<SearchPath> enumerate_search_tree(const TFPair& P, const LabelSet* Z, int depth_cap,
                                              CherryPolicy policy) {
  std::vector<SearchPath> out;
  for_each_search_path(P, Z, depth_cap, policy, [&](const SearchPath& p) { out.push_back(p); });
  return out;
}

}  // namespace rspr
