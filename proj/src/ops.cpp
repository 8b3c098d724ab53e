#include "rspr/ops.hpp"

#include <algorithm>
#include <unordered_map>
#include <unordered_set>

namespace rspr {

namespace {

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

Fingerprint leaf_print(LabelId l) {
  auto u = static_cast<std::uint64_t>(l);
  return {mix64(2 * u + 1), mix64((u << 32) ^ 0x5bd1e9955bd1e995ULL)};
}

Fingerprint join_print(Fingerprint x, Fingerprint y) {
  if (y < x) std::swap(x, y);
  return {mix64(x.a * 0x100000001b3ULL ^ mix64(y.a + 0x27d4eb2f165667c5ULL)),
          mix64(x.b + mix64(y.b ^ 0x165667b19e3779f9ULL) * 31)};
}

Fingerprint unary_print(Fingerprint x) { return {mix64(x.a ^ 0xabcdef12ULL), mix64(x.b + 0x1234567ULL)}; }

const Fingerprint kBlankLeaf{0x1111111111111111ULL, 0x2222222222222222ULL};

}  // namespace

std::optional<VertexId> lca(const Forest& F, std::span<const VertexId> U) {
  if (U.empty()) return std::nullopt;
  VertexId w = U[0];
  F.vertex(w);
  for (std::size_t i = 1; i < U.size(); ++i) {
    F.vertex(U[i]);
    w = lca(F, w, U[i]);
    if (w == kNoVertex) return std::nullopt;
  }
  return w;
}

VertexId lca(const Forest& F, VertexId a, VertexId b) {
  if (!F.same_component(a, b)) return kNoVertex;
  while (F.depth(a) > F.depth(b)) a = F.parent(a);
  while (F.depth(b) > F.depth(a)) b = F.parent(b);
  while (a != b) {
    a = F.parent(a);
    b = F.parent(b);
  }
  return a;
}

VertexId lca_of_labels(const Forest& F, const LabelSet& X) {
  VertexId w = kNoVertex;
  for (std::size_t l = X.find_first(); l != LabelSet::npos; l = X.find_next(l)) {
    VertexId x = F.leaf_of(static_cast<LabelId>(l));
    if (x == kNoVertex) throw UsageError("label not present in forest");
    if (w == kNoVertex) {
      w = x;
    } else {
      w = lca(F, w, x);
      if (w == kNoVertex) return kNoVertex;
    }
  }
  return w;
}

std::vector<VertexId> path_vertices(const Forest& F, VertexId u, VertexId v) {
  VertexId w = lca(F, u, v);
  if (w == kNoVertex) throw DomainError("path endpoints lie in different components");
  std::vector<VertexId> up, down;
  for (VertexId x = u; x != w; x = F.parent(x)) up.push_back(x);
  up.push_back(w);
  for (VertexId x = v; x != w; x = F.parent(x)) down.push_back(x);
  up.insert(up.end(), down.rbegin(), down.rend());
  return up;
}

EdgeSet path_edges(const Forest& F, VertexId u, VertexId v) {
  VertexId w = lca(F, u, v);
  if (w == kNoVertex) throw DomainError("path endpoints lie in different components");
  EdgeSet out;
  for (VertexId x = u; x != w; x = F.parent(x)) out.insert(x);
  for (VertexId x = v; x != w; x = F.parent(x)) out.insert(x);
  return out;
}

EdgeSet d_edges(const Forest& F, VertexId u, VertexId v) {
  EdgeSet out;
  if (!F.same_component(u, v)) return out;
  auto path = path_vertices(F, u, v);
  std::unordered_set<VertexId> on(path.begin(), path.end());
  for (std::size_t i = 1; i + 1 < path.size(); ++i) {
    for (VertexId c : F.children(path[i])) {
      if (!on.count(c)) out.insert(c);
    }
  }
  return out;
}

EdgeSet d_plus_edges(const Forest& F, VertexId u, VertexId v) {
  if (!F.same_component(u, v) || F.comparable(u, v)) return {};
  EdgeSet out = d_edges(F, u, v);
  for (VertexId w : path_vertices(F, u, v)) {
    if (F.is_root(w)) continue;
    if ((w == u || w == v) && F.is_leaf(w)) continue;
    out.insert(w);
  }
  return out;
}

Reduction reduce(const Forest& F, const ReduceSpec& spec) {
  const VertexId n = F.size();
  auto cut = [&](VertexId v) { return spec.cut && spec.cut->count(v); };
  std::vector<char> collapsed(n, 0), buried(n, 0);
  std::vector<LabelId> eff(n, kNoLabel);
  for (VertexId v = 0; v < n; ++v) {
    LabelId l = F.label(v);
    if (l != kNoLabel && !(spec.drop && contains(*spec.drop, l))) eff[v] = l;
  }
  if (spec.collapse) {
    for (auto [v, l] : *spec.collapse) {
      collapsed[v] = 1;
      eff[v] = l;
    }
    for (auto it = F.postorder().rbegin(); it != F.postorder().rend(); ++it) {
      VertexId v = *it;
      VertexId p = F.parent(v);
      if (p != kNoVertex && (collapsed[p] || buried[p])) buried[v] = 1;
    }
  }
  std::vector<char> live(n, 0);
  std::vector<int> kids(n, 0);
  for (VertexId v : F.postorder()) {
    if (buried[v]) continue;
    if (collapsed[v]) {
      live[v] = 1;
      continue;
    }
    bool any = eff[v] != kNoLabel;
    for (VertexId c : F.children(v)) {
      if (!cut(c) && live[c]) {
        any = true;
        ++kids[v];
      }
    }
    live[v] = any;
  }
  auto kept = [&](VertexId v) { return live[v] && !buried[v] && kids[v] != 1; };

  Reduction out;
  std::vector<VertexId> id(n, kNoVertex);
  std::vector<VertexId> kept_parent(n, kNoVertex);
  for (VertexId v = 0; v < n; ++v) {
    if (!kept(v)) continue;
    VertexId u = v;
    VertexId par = kNoVertex;
    while (true) {
      VertexId p = F.parent(u);
      if (p == kNoVertex || cut(u)) break;
      if (kids[p] >= 2) {
        par = p;
        break;
      }
      u = p;
    }
    kept_parent[v] = par;
    id[v] = out.forest.add_vertex(eff[v], F.origin(u));
    out.to_source.push_back(u);
  }
  for (VertexId v = 0; v < n; ++v) {
    if (id[v] != kNoVertex && kept_parent[v] != kNoVertex) {
      out.forest.attach(id[kept_parent[v]], id[v]);
    }
  }
  out.forest.seal();
  return out;
}

Reduction ominus(const Forest& F, const EdgeSet& C) {
  ReduceSpec spec;
  spec.cut = &C;
  return reduce(F, spec);
}

std::vector<char> inclusive_flags(const Forest& F, const LabelSet& X) {
  std::vector<char> inc(F.size(), 0);
  for (VertexId v : F.postorder()) {
    if (F.is_leaf(v)) {
      inc[v] = contains(X, F.label(v));
    } else {
      for (VertexId c : F.children(v)) inc[v] = inc[v] || inc[c];
    }
  }
  return inc;
}

LabelSet descendants_in(const Forest& F, VertexId v, const LabelSet& X) {
  LabelSet out(X.size());
  std::vector<VertexId> stack{v};
  while (!stack.empty()) {
    VertexId x = stack.back();
    stack.pop_back();
    if (F.is_leaf(x)) {
      if (contains(X, F.label(x))) out.set(static_cast<std::size_t>(F.label(x)));
    } else {
      for (VertexId c : F.children(x)) stack.push_back(c);
    }
  }
  return out;
}

LabelSet leaf_set(const Forest& F, VertexId v, std::size_t bound) {
  LabelSet out(bound);
  std::vector<VertexId> stack{v};
  while (!stack.empty()) {
    VertexId x = stack.back();
    stack.pop_back();
    if (F.label(x) != kNoLabel) {
      auto l = static_cast<std::size_t>(F.label(x));
      if (l >= out.size()) out.resize(l + 1);
      out.set(l);
    }
    for (VertexId c : F.children(x)) stack.push_back(c);
  }
  return out;
}

bool subset_of(const LabelSet& a, const LabelSet& b) {
  for (std::size_t l = a.find_first(); l != LabelSet::npos; l = a.find_next(l)) {
    if (l >= b.size() || !b.test(l)) return false;
  }
  return true;
}

std::vector<VertexId> restricted_vertices(const Forest& F, const LabelSet& X) {
  for (std::size_t l = X.find_first(); l != LabelSet::npos; l = X.find_next(l)) {
    if (!F.has_label(static_cast<LabelId>(l))) throw UsageError("restriction label not in forest");
  }
  auto inc = inclusive_flags(F, X);
  std::vector<char> anc(F.size(), 0);
  const auto& post = F.postorder();
  for (auto it = post.rbegin(); it != post.rend(); ++it) {
    VertexId v = *it;
    bool bif = F.num_children(v) == 2 && inc[F.children(v)[0]] && inc[F.children(v)[1]];
    VertexId p = F.parent(v);
    anc[v] = bif || (p != kNoVertex && anc[p]);
  }
  std::vector<VertexId> out;
  for (VertexId v = 0; v < F.size(); ++v) {
    bool in_x = F.is_leaf(v) && contains(X, F.label(v));
    if (inc[v] && (anc[v] || in_x)) out.push_back(v);
  }
  return out;
}

Forest restrict_to(const Forest& F, const LabelSet& X) {
  auto keep = restricted_vertices(F, X);
  std::vector<char> kept(F.size(), 0);
  for (VertexId v : keep) kept[v] = 1;
  EdgeSet tops;
  for (VertexId v : keep) {
    VertexId p = F.parent(v);
    if (p != kNoVertex && !kept[p]) tops.insert(v);
  }
  LabelSet drop(std::max<std::size_t>(X.size(), static_cast<std::size_t>(F.label_bound())));
  for (LabelId l : F.labels()) {
    if (!contains(X, l)) drop.set(static_cast<std::size_t>(l));
  }
  ReduceSpec spec;
  spec.cut = &tops;
  spec.drop = &drop;
  return reduce(F, spec).forest;
}

std::vector<int> n_paths_all(const Forest& F, const EdgeSet& A, const LabelSet& X) {
  const VertexId n = F.size();
  std::vector<char> inc(n, 0);
  std::vector<int> N(n, 0);
  for (VertexId v : F.postorder()) {
    if (F.is_leaf(v)) {
      inc[v] = contains(X, F.label(v));
      N[v] = inc[v] ? 1 : 0;
      continue;
    }
    VertexId live[2];
    int k = 0;
    for (VertexId c : F.children(v)) {
      if (!A.count(c)) live[k++] = c;
    }
    if (k == 2) {
      inc[v] = inc[live[0]] || inc[live[1]];
      N[v] = inc[live[0]] && inc[live[1]] ? N[live[0]] + N[live[1]] : 0;
    } else if (k == 1) {
      inc[v] = inc[live[0]];
      N[v] = N[live[0]];
    }
  }
  return N;
}

int n_paths(const Forest& F, const EdgeSet& A, const LabelSet& X, VertexId v) {
  F.vertex(v);
  return n_paths_all(F, A, X)[v];
}

bool is_cut(const Forest& F, const EdgeSet& C) {
  std::vector<int> live(F.size(), 0);
  for (VertexId v : F.postorder()) {
    live[v] = F.label(v) != kNoLabel ? 1 : 0;
    for (VertexId c : F.children(v)) {
      if (!C.count(c)) live[v] += live[c];
    }
  }
  for (VertexId r : F.roots()) {
    if (!live[r]) return false;
  }
  for (VertexId h : C) {
    if (h < 0 || h >= F.size() || F.is_root(h)) return false;
    if (!live[h]) return false;
  }
  return true;
}

EdgeSet trim_to_cut(const Forest& F, EdgeSet C) {
  for (VertexId h : std::vector<VertexId>(C.begin(), C.end())) {
    if (h < 0 || h >= F.size() || F.is_root(h)) C.erase(h);
  }
  while (!is_cut(F, C)) {
    std::vector<VertexId> top(F.size(), kNoVertex);
    std::vector<char> labeled(F.size(), 0);
    const auto& post = F.postorder();
    for (auto it = post.rbegin(); it != post.rend(); ++it) {
      VertexId v = *it;
      VertexId p = F.parent(v);
      top[v] = (p == kNoVertex || C.count(v)) ? v : top[p];
    }
    for (VertexId v : post) {
      if (F.label(v) != kNoLabel) labeled[top[v]] = 1;
    }
    VertexId drop = kNoVertex;
    for (VertexId v : post) {
      if (top[v] != v || labeled[v]) continue;
      if (!F.is_root(v)) {
        drop = v;
        break;
      }
      // Prefer an edge that does not end at a labeled leaf.
      for (VertexId h : C) {
        if (top[F.parent(h)] != v) continue;
        auto rank = [&](VertexId x) { return std::pair(F.label(x) != kNoLabel, x); };
        if (drop == kNoVertex || rank(h) < rank(drop)) drop = h;
      }
      if (drop != kNoVertex) break;
    }
    if (drop == kNoVertex) break;
    C.erase(drop);
  }
  return C;
}

bool is_canonical_cut(const Forest& F, const EdgeSet& C) {
  if (!is_cut(F, C)) return false;
  for (VertexId v = 0; v < F.size(); ++v) {
    if (F.label(v) != kNoLabel) continue;
    bool any = false;
    for (VertexId c : F.children(v)) any = any || !C.count(c);
    if (!any) return false;
  }
  return true;
}

std::vector<Fingerprint> subtree_fingerprints(const Forest& F) {
  std::vector<Fingerprint> h(F.size());
  for (VertexId v : F.postorder()) {
    auto ch = F.children(v);
    if (ch.empty()) {
      h[v] = F.label(v) == kNoLabel ? kBlankLeaf : leaf_print(F.label(v));
    } else if (ch.size() == 1) {
      h[v] = unary_print(h[ch[0]]);
    } else {
      h[v] = join_print(h[ch[0]], h[ch[1]]);
    }
  }
  return h;
}

namespace {

std::vector<Fingerprint> component_prints(const Forest& F) {
  auto h = subtree_fingerprints(F);
  std::vector<Fingerprint> out;
  for (VertexId r : F.roots()) out.push_back(h[r]);
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

bool isomorphic(const Forest& F1, const Forest& F2) {
  if (F1.size() != F2.size()) return false;
  return component_prints(F1) == component_prints(F2);
}

EdgeSet forced_cut(const TFPair& P, const EdgeSet& CF) {
  const Forest& T = P.T;
  EdgeSet CT;
  if (T.empty()) return CT;
  Reduction R = ominus(P.F, CF);
  std::unordered_set<Fingerprint, FingerprintHash> comps;
  {
    auto h = subtree_fingerprints(R.forest);
    for (VertexId r : R.forest.roots()) comps.insert(h[r]);
  }
  const VertexId n = T.size();
  std::vector<int> live(n, 0);
  for (VertexId v = 0; v < n; ++v) live[v] = T.leaf_count(v);
  std::vector<Fingerprint> h(n);
  for (VertexId v : T.postorder()) {
    VertexId kid[2];
    int k = 0;
    for (VertexId c : T.children(v)) {
      if (!CT.count(c) && live[c] > 0) kid[k++] = c;
    }
    bool kept;
    if (T.is_leaf(v)) {
      if (T.label(v) == kNoLabel) continue;
      h[v] = leaf_print(T.label(v));
      kept = true;
    } else if (k == 2) {
      h[v] = join_print(h[kid[0]], h[kid[1]]);
      kept = true;
    } else if (k == 1) {
      h[v] = h[kid[0]];
      kept = false;
    } else {
      continue;
    }
    if (!kept || !comps.count(h[v])) continue;
    VertexId cur = v;
    VertexId head = kNoVertex;
    while (true) {
      VertexId p = T.parent(cur);
      if (p == kNoVertex || CT.count(cur)) break;
      VertexId s = T.sibling(cur);
      if (s != kNoVertex && !CT.count(s) && live[s] > 0) {
        head = cur;
        break;
      }
      cur = p;
    }
    if (head == kNoVertex) continue;
    CT.insert(head);
    int lost = live[head];
    for (VertexId a = T.parent(head); a != kNoVertex; a = T.parent(a)) live[a] -= lost;
  }
  return CT;
}

TFPair induced_subpair(const TFPair& P, const EdgeSet& CF) {
  TFPair Q;
  Q.names = P.names;
  Q.composite = P.composite;
  Q.next_label = P.next_label;
  Q.dummy = P.dummy;
  if (P.is_empty()) return Q;
  EdgeSet CT = forced_cut(P, CF);
  Reduction RT = ominus(P.T, CT);
  Reduction RF = ominus(P.F, CF);

  // Step 2: drop matching component pairs.
  LabelSet drop(static_cast<std::size_t>(Q.next_label));
  {
    auto ht = subtree_fingerprints(RT.forest);
    auto hf = subtree_fingerprints(RF.forest);
    std::unordered_set<Fingerprint, FingerprintHash> fr;
    for (VertexId r : RF.forest.roots()) fr.insert(hf[r]);
    for (VertexId r : RT.forest.roots()) {
      if (!fr.count(ht[r])) continue;
      LabelSet s = leaf_set(RT.forest, r, drop.size());
      drop |= s;
    }
  }
  Forest T2, F2;
  {
    ReduceSpec st;
    st.drop = &drop;
    T2 = reduce(RT.forest, st).forest;
    Reduction r = reduce(RF.forest, st);
    F2 = std::move(r.forest);
  }
  if (T2.empty() && F2.empty()) return Q;

  // Steps 3-4: collapse maximal agreeing non-leaf pairs.
  auto ht = subtree_fingerprints(T2);
  auto hf = subtree_fingerprints(F2);
  std::unordered_map<Fingerprint, VertexId, FingerprintHash> fidx;
  for (VertexId v = 0; v < F2.size(); ++v) fidx.emplace(hf[v], v);
  std::map<VertexId, LabelId> ct, cf;
  for (VertexId a : T2.postorder()) {
    if (T2.is_leaf(a)) continue;
    auto it = fidx.find(ht[a]);
    if (it == fidx.end()) continue;
    VertexId v = it->second;
    if (F2.is_leaf(v)) continue;
    VertexId pa = T2.parent(a), pv = F2.parent(v);
    if (pa != kNoVertex && pv != kNoVertex && ht[pa] == hf[pv]) continue;
    LabelSet s = leaf_set(T2, a, static_cast<std::size_t>(Q.next_label));
    std::vector<LabelId> parts;
    for (std::size_t l = s.find_first(); l != LabelSet::npos; l = s.find_next(l)) {
      parts.push_back(static_cast<LabelId>(l));
    }
    LabelId nl = Q.new_label(parts);
    ct.emplace(a, nl);
    cf.emplace(v, nl);
  }
  if (ct.empty()) {
    Q.T = std::move(T2);
    Q.F = std::move(F2);
  } else {
    ReduceSpec st;
    st.collapse = &ct;
    Q.T = reduce(T2, st).forest;
    ReduceSpec sf;
    sf.collapse = &cf;
    Q.F = reduce(F2, sf).forest;
  }
  return Q;
}

bool is_agreement_cut(const TFPair& P, const EdgeSet& CF) { return induced_subpair(P, CF).is_empty(); }

TFPair add_dummy(const TFPair& P) {
  TFPair Q = P;
  LabelId d = Q.next_label++;
  Q.dummy = d;
  auto augment = [d](const Forest& src) {
    Forest out;
    for (VertexId v = 0; v < src.size(); ++v) out.add_vertex(src.label(v));
    for (VertexId v = 0; v < src.size(); ++v) {
      for (VertexId c : src.children(v)) out.attach(v, c);
    }
    VertexId leaf = out.add_vertex(d);
    if (!src.empty()) {
      VertexId top = out.add_vertex();
      out.attach(top, src.roots().front());
      out.attach(top, leaf);
    }
    out.seal();
    return out;
  };
  Q.T = augment(P.T);
  Q.F = augment(P.F);
  return Q;
}

TFPair preprocess(const TFPair& P, bool add) {
  TFPair Q = add ? add_dummy(P) : P;
  if (Q.T.labels() != Q.F.labels()) throw UsageError("T and F have different label sets");
  while (!Q.is_empty()) {
    bool changed = false;
    LabelSet drop(static_cast<std::size_t>(Q.next_label));
    for (VertexId r : Q.F.roots()) {
      if (Q.F.is_leaf(r) && Q.F.label(r) != kNoLabel) drop.set(static_cast<std::size_t>(Q.F.label(r)));
    }
    if (drop.any()) {
      ReduceSpec s;
      s.drop = &drop;
      Q.T = reduce(Q.T, s).forest;
      Q.F = reduce(Q.F, s).forest;
      changed = true;
    }
    std::map<VertexId, LabelId> ct, cf;
    for (VertexId p = 0; p < Q.T.size(); ++p) {
      if (Q.T.num_children(p) != 2) continue;
      VertexId a = Q.T.children(p)[0], b = Q.T.children(p)[1];
      if (!Q.T.is_leaf(a) || !Q.T.is_leaf(b)) continue;
      LabelId la = Q.T.label(a), lb = Q.T.label(b);
      VertexId fa = Q.F.leaf_of(la), fb = Q.F.leaf_of(lb);
      if (Q.F.parent(fa) == kNoVertex || Q.F.parent(fa) != Q.F.parent(fb)) continue;
      LabelId nl = Q.new_label({std::min(la, lb), std::max(la, lb)});
      ct.emplace(p, nl);
      cf.emplace(Q.F.parent(fa), nl);
    }
    if (!ct.empty()) {
      ReduceSpec st;
      st.collapse = &ct;
      Q.T = reduce(Q.T, st).forest;
      ReduceSpec sf;
      sf.collapse = &cf;
      Q.F = reduce(Q.F, sf).forest;
      changed = true;
    }
    if (!changed) break;
  }
  return Q;
}

}  // namespace rspr
