#include "rspr/approx.hpp"

#include <algorithm>
#include <functional>
#include <unordered_map>

#include "rspr/exact.hpp"

namespace rspr {

const char* to_string(StopperKind kind) {
  switch (kind) {
    case StopperKind::SemiClose: return "semi-close";
    case StopperKind::Close: return "close";
    case StopperKind::Root: return "root";
    case StopperKind::Disconnected: return "disconnected";
    case StopperKind::Overlapping: return "overlapping";
  }
  return "?";
}

Analysis::Analysis(const TFPair& P) : P_(&P) {
  bound_ = static_cast<std::size_t>(std::max({P.next_label, P.T.label_bound(), P.F.label_bound()}));
  const Forest& T = P.T;
  const Forest& F = P.F;
  const VertexId n = T.size();
  leaves_.assign(n, LabelSet(bound_));
  lca_f_.assign(n, kNoVertex);
  consistent_.assign(n, 0);
  for (VertexId a : T.postorder()) {
    if (T.is_leaf(a)) {
      if (T.label(a) == kNoLabel) continue;
      leaves_[a].set(static_cast<std::size_t>(T.label(a)));
      lca_f_[a] = F.leaf_of(T.label(a));
      consistent_[a] = 1;
      continue;
    }
    auto ch = T.children(a);
    if (ch.size() != 2) throw InvariantError("T is not binary");
    VertexId b0 = ch[0], b1 = ch[1];
    leaves_[a] = leaves_[b0] | leaves_[b1];
    VertexId l0 = lca_f_[b0], l1 = lca_f_[b1];
    if (l0 != kNoVertex && l1 != kNoVertex) lca_f_[a] = lca(F, l0, l1);
    consistent_[a] = consistent_[b0] && consistent_[b1] && lca_f_[a] != kNoVertex && !F.comparable(l0, l1);
  }
}

VertexId Analysis::t_lca(const LabelSet& X) const { return lca_of_labels(P_->T, X); }

namespace {

bool alive_below(const Forest& F, const EdgeSet& B, VertexId v) {
  std::vector<VertexId> stack{v};
  while (!stack.empty()) {
    VertexId x = stack.back();
    stack.pop_back();
    if (F.label(x) != kNoLabel) return true;
    for (VertexId c : F.children(x)) {
      if (!B.count(c)) stack.push_back(c);
    }
  }
  return false;
}

// N_{A,X}(v) computed over the subtree of v only.
int n_paths_sub(const Forest& F, const EdgeSet& A, const LabelSet& X, VertexId v) {
  std::vector<VertexId> order;
  std::vector<VertexId> stack{v};
  while (!stack.empty()) {
    VertexId x = stack.back();
    stack.pop_back();
    order.push_back(x);
    for (VertexId c : F.children(x)) stack.push_back(c);
  }
  std::unordered_map<VertexId, std::pair<char, int>> st;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    VertexId x = *it;
    if (F.is_leaf(x)) {
      bool in = contains(X, F.label(x));
      st[x] = {in, in ? 1 : 0};
      continue;
    }
    VertexId live[2];
    int k = 0;
    for (VertexId c : F.children(x)) {
      if (!A.count(c)) live[k++] = c;
    }
    if (k == 2) {
      auto a = st[live[0]], b = st[live[1]];
      st[x] = {static_cast<char>(a.first || b.first), a.first && b.first ? a.second + b.second : 0};
    } else if (k == 1) {
      st[x] = st[live[0]];
    } else {
      st[x] = {0, 0};
    }
  }
  return st[v].second;
}

TFPair with_forest(const TFPair& P, Forest F) {
  TFPair Q;
  Q.T = P.T;
  Q.F = std::move(F);
  Q.composite = P.composite;
  Q.next_label = P.next_label;
  Q.names = P.names;
  Q.dummy = P.dummy;
  return Q;
}

EdgeSet lift(const Reduction& R, const EdgeSet& C) {
  EdgeSet out;
  for (VertexId h : C) out.insert(R.to_source[h]);
  return out;
}

std::pair<VertexId, VertexId> t_children(const Forest& T, VertexId a) {
  auto ch = T.children(a);
  if (ch.size() != 2) throw UsageError("vertex has no two children in T");
  return {ch[0], ch[1]};
}

// Labels of one T vertex, checked to be the given cluster.
VertexId cluster_vertex(const Analysis& A, const LabelSet& X) {
  VertexId g = A.t_lca(X);
  if (g == kNoVertex || A.leaves(g) != X) throw InvariantError("label set is not a cluster of T");
  return g;
}

// Descends from c to the first X-bifurcate vertex or X leaf.
VertexId x_child(const Forest& F, const std::vector<char>& inc, VertexId c) {
  while (!F.is_leaf(c)) {
    auto ch = F.children(c);
    bool a = inc[ch[0]], b = inc[ch[1]];
    if (a && b) break;
    c = a ? ch[0] : ch[1];
  }
  return c;
}

struct Choice {
  EdgeSet first_class;  // first applicable class of the robust way
  VertexId pick = kNoVertex;
  EdgeSet admissible;
};

Choice robust_way(const Analysis& A, const RobustKey* k[2], const VertexId l[2], VertexId la) {
  const Forest& F = A.F();
  Choice c;
  for (int i = 0; i < 2; ++i) {
    EdgeSet Di = d_edges(F, l[i], la);
    if (Di.size() >= 2 || (Di.size() == 1 && k[i]->robust)) {
      if (c.pick == kNoVertex) c.pick = *Di.begin();
      c.first_class.insert(Di.begin(), Di.end());
    }
  }
  if (c.pick == kNoVertex) {
    for (int i = 0; i < 2; ++i) {
      if (!k[i]->super_robust) continue;
      for (VertexId ch : F.children(l[i])) c.first_class.insert(ch);
      if (c.pick == kNoVertex) c.pick = *std::min_element(F.children(l[i]).begin(), F.children(l[i]).end());
    }
  }
  if (c.pick == kNoVertex) {
    EdgeSet D = d_edges(F, l[0], l[1]);
    if (!D.empty()) {
      c.first_class = D;
      c.pick = *D.begin();
    } else {
      for (int i = 0; i < 2; ++i) {
        if (!k[i]->robust) continue;
        c.first_class.insert(l[i]);
        if (c.pick == kNoVertex) c.pick = l[i];
      }
    }
  }
  c.admissible = d_plus_edges(F, l[0], l[1]);
  for (int i = 0; i < 2; ++i) {
    if (!k[i]->robust) c.admissible.erase(l[i]);
  }
  for (int i = 0; i < 2; ++i) {
    if (!k[i]->super_robust) continue;
    for (VertexId ch : F.children(l[i])) c.admissible.insert(ch);
  }
  return c;
}

}  // namespace

bool is_consistent(const TFPair& P, VertexId alpha) {
  const Forest& T = P.T;
  if (T.is_leaf(alpha)) return true;
  Analysis A(P);
  const LabelSet& X = A.leaves(alpha);
  Forest Fx = restrict_to(P.F, X);
  Forest Tx = restrict_to(T, X);
  if (Fx.num_components() != 1) return false;
  return subtree_fingerprints(Fx)[Fx.roots()[0]] == subtree_fingerprints(Tx)[Tx.roots()[0]];
}

void classify_robust(const Analysis& A, RobustKey& k) {
  const Forest& F = A.F();
  const LabelSet& X = k.key.X;
  const EdgeSet& B = k.key.B;
  k.robust = k.super_robust = false;
  if (X.none() || k.key.abnormal()) return;
  VertexId a = A.t_lca(X);
  VertexId l = lca_of_labels(F, X);
  if (l == kNoVertex || !A.consistent(a) || F.is_root(l) || B.count(l) || !alive_below(F, B, l)) return;
  k.robust = true;
  if (F.num_children(l) != 2) return;
  bool both = true;
  for (VertexId c : F.children(l)) both = both && !B.count(c) && alive_below(F, B, c);
  k.super_robust = both;
}

RobustKey leaf_key(const Analysis& A, VertexId t) {
  LabelId l = A.T().label(t);
  if (!A.T().is_leaf(t) || l == kNoLabel) throw UsageError("leaf key needs a labeled leaf of T");
  RobustKey k;
  k.key.X = LabelSet(A.bound());
  k.key.X.set(static_cast<std::size_t>(l));
  k.key.B.insert(A.f_leaf(l));
  return k;
}

RobustKey combine_keys(const Analysis& A, const RobustKey& k1, const RobustKey& k2, VertexId alpha,
                       const Steer& steer) {
  const Forest& F = A.F();
  auto [b0, b1] = t_children(A.T(), alpha);
  VertexId b[2] = {b0, b1};
  VertexId l[2];
  for (int i = 0; i < 2; ++i) {
    if (!A.consistent(b[i])) throw UsageError("child of combined vertex is not consistent");
    l[i] = A.lca_f(b[i]);
    if (F.is_root(l[i])) throw UsageError("child cluster has a root LCA");
  }
  RobustKey out;
  out.key.X = A.leaves(alpha);
  out.key.B = set_union(k1.key.B, k2.key.B);
  VertexId la = A.lca_f(alpha);
  if (la == kNoVertex || (A.consistent(alpha) && F.is_root(la))) {
    out.key.B = trim_to_cut(F, std::move(out.key.B));
    classify_robust(A, out);
    return out;
  }
  if (!A.consistent(alpha)) throw UsageError("combined vertex is not consistent");
  const RobustKey* k[2] = {&k1, &k2};
  int t = (k1.robust ? 1 : 0) + (k2.robust ? 1 : 0);
  if (d_edges(F, l[0], l[1]).empty() && t == 0) throw UsageError("no admissible extra edge");
  Choice c = robust_way(A, k, l, la);
  VertexId e = c.pick;
  if (steer.edge != kNoVertex) {
    if (c.first_class.count(steer.edge) || (steer.force && c.admissible.count(steer.edge))) e = steer.edge;
  }
  if (e == kNoVertex) throw InvariantError("robust way found no edge");
  out.key.B.insert(e);
  classify_robust(A, out);
  return out;
}

namespace {

struct FairPart {
  RobustKey key;
  int n = 0;  // N_{L_alpha}(l_F(L_alpha))
};

bool admissible_here(const Analysis& A, const RobustKey& k1, const RobustKey& k2, VertexId alpha, VertexId e) {
  if (e == kNoVertex) return false;
  auto [b0, b1] = t_children(A.T(), alpha);
  VertexId l[2] = {A.lca_f(b0), A.lca_f(b1)};
  VertexId la = A.lca_f(alpha);
  if (la == kNoVertex || l[0] == kNoVertex || l[1] == kNoVertex) return false;
  const RobustKey* k[2] = {&k1, &k2};
  return robust_way(A, k, l, la).admissible.count(e) != 0;
}

FairPart fair_rec(const Analysis& A, VertexId a, const Steer& steer) {
  const Forest& T = A.T();
  const Forest& F = A.F();
  if (T.is_leaf(a)) return {leaf_key(A, a), 1};
  auto [b0, b1] = t_children(T, a);
  FairPart p0 = fair_rec(A, b0, steer), p1 = fair_rec(A, b1, steer);
  if (p0.n > 1 || p1.n > 1) throw UsageError("more than one path below the cluster LCA");
  VertexId la = A.lca_f(a);
  int n = (F.parent(A.lca_f(b0)) == la ? p0.n : 0) + (F.parent(A.lca_f(b1)) == la ? p1.n : 0);
  Steer s;
  if (steer.edge != kNoVertex && admissible_here(A, p0.key, p1.key, a, steer.edge)) {
    s = {steer.edge, true};
  } else if (n == 1) {
    s = {la, true};
  }
  return {combine_keys(A, p0.key, p1.key, a, s), n};
}

}  // namespace

RobustKey build_fair_key(const Analysis& A, VertexId alpha) {
  const Forest& F = A.F();
  if (!A.consistent(alpha)) throw UsageError("fair key needs a consistent vertex");
  if (F.is_root(A.lca_f(alpha))) throw UsageError("fair key needs a non-root LCA");
  FairPart p = fair_rec(A, alpha, {});
  if (p.n > 1) throw UsageError("more than one path at the cluster LCA");
  return p.key;
}

namespace {

RobustKey build_fair_key_steered(const Analysis& A, VertexId alpha, const Steer& steer) {
  if (!A.consistent(alpha)) throw UsageError("fair key needs a consistent vertex");
  if (A.F().is_root(A.lca_f(alpha))) throw UsageError("fair key needs a non-root LCA");
  FairPart p = fair_rec(A, alpha, steer);
  if (p.n > 1) throw UsageError("more than one path at the cluster LCA");
  return p.key;
}

// Smallest depth of a leaf of L_b in F; checks the far-apart condition on the way.
int far_apart_rec(const Analysis& A, VertexId b) {
  const Forest& T = A.T();
  const Forest& F = A.F();
  if (T.is_leaf(b)) return F.depth(A.lca_f(b));
  auto [c0, c1] = t_children(T, b);
  int d0 = far_apart_rec(A, c0), d1 = far_apart_rec(A, c1);
  int lb = F.depth(A.lca_f(b));
  if (d0 + d1 - 2 * lb - 2 < 3) throw UsageError("two leaves of the cluster are not far apart");
  return std::min(d0, d1);
}

RobustKey robust_rec(const Analysis& A, VertexId b, const Steer& steer) {
  const Forest& T = A.T();
  if (T.is_leaf(b)) return leaf_key(A, b);
  auto [c0, c1] = t_children(T, b);
  RobustKey k0 = robust_rec(A, c0, steer), k1 = robust_rec(A, c1, steer);
  return combine_keys(A, k0, k1, b, steer);
}

}  // namespace

RobustKey build_fair_robust_key(const Analysis& A, VertexId beta, const Steer& steer) {
  if (A.T().is_leaf(beta)) return leaf_key(A, beta);
  if (!A.consistent(beta)) throw UsageError("robust key needs a consistent vertex");
  far_apart_rec(A, beta);
  return robust_rec(A, beta, steer);
}

namespace {

// Fewest L-exclusive hanging edges from a leaf of L_b up to l_F(L_b), with
// the leaf attaining it. Valid below a consistent vertex.
std::pair<int, VertexId> best_leaf(const Analysis& A, VertexId b) {
  const Forest& T = A.T();
  const Forest& F = A.F();
  if (T.is_leaf(b)) return {0, A.lca_f(b)};
  auto [c0, c1] = t_children(T, b);
  auto r0 = best_leaf(A, c0), r1 = best_leaf(A, c1);
  int lb = F.depth(A.lca_f(b));
  int s0 = r0.first + F.depth(A.lca_f(c0)) - lb - 1;
  int s1 = r1.first + F.depth(A.lca_f(c1)) - lb - 1;
  return s1 < s0 ? std::make_pair(s1, r1.second) : std::make_pair(s0, r0.second);
}

}  // namespace

std::optional<std::pair<VertexId, VertexId>> semi_close_witnesses(const Analysis& A, VertexId alpha) {
  const Forest& T = A.T();
  const Forest& F = A.F();
  if (T.is_leaf(alpha) || !A.consistent(alpha)) return std::nullopt;
  auto [c0, c1] = t_children(T, alpha);
  int la = F.depth(A.lca_f(alpha));
  auto r0 = best_leaf(A, c0), r1 = best_leaf(A, c1);
  int s = r0.first + F.depth(A.lca_f(c0)) - la - 1 + r1.first + F.depth(A.lca_f(c1)) - la - 1;
  if (s > 2) return std::nullopt;
  return std::make_pair(r0.second, r1.second);
}

StopperScan scan_stoppers(const Analysis& A) {
  const Forest& T = A.T();
  const Forest& F = A.F();
  const VertexId n = T.size();
  std::vector<int> m(n, 0);
  std::vector<char> semi(n, 0), root(n, 0), disc(n, 0);
  StopperScan out;
  for (VertexId a : T.postorder()) {
    if (T.is_leaf(a)) continue;
    auto [c0, c1] = t_children(T, a);
    bool sd = semi[c0] || semi[c1];
    bool rd = root[c0] || root[c1];
    bool dd = disc[c0] || disc[c1];
    VertexId l = A.lca_f(a);
    bool kids = A.consistent(c0) && A.consistent(c1);
    if (A.consistent(a)) {
      int s0 = m[c0] + F.depth(A.lca_f(c0)) - F.depth(l) - 1;
      int s1 = m[c1] + F.depth(A.lca_f(c1)) - F.depth(l) - 1;
      m[a] = std::min(s0, s1);
      if (!sd && s0 + s1 <= 2) {
        out.stoppers.push_back({a, s0 + s1 == 0 ? StopperKind::Close : StopperKind::SemiClose});
        sd = true;
      } else if (!sd && F.is_root(l)) {
        out.stoppers.push_back({a, StopperKind::Root});
        rd = true;
      }
    } else if (l == kNoVertex) {
      if (!sd && !rd && kids) {
        out.stoppers.push_back({a, StopperKind::Disconnected});
        dd = true;
      }
    } else if (!sd && !rd && !dd && kids) {
      out.stoppers.push_back({a, StopperKind::Overlapping});
    }
    semi[a] = sd;
    root[a] = rd;
    disc[a] = dd;
  }
  return out;
}

Stopper find_stopper(const TFPair& P) {
  Analysis A(P);
  auto s = scan_stoppers(A);
  if (s.stoppers.empty()) throw InvariantError("no stopper found");
  return s.stoppers.front();
}

std::optional<StopperKind> classify_stopper(const TFPair& P, VertexId target) {
  const Forest& T = P.T;
  const Forest& F = P.F;
  Analysis A(P);
  const VertexId n = T.size();
  std::vector<char> cons(n, 0), semi(n, 0), close(n, 0);
  for (VertexId a = 0; a < n; ++a) cons[a] = is_consistent(P, a);
  for (VertexId a = 0; a < n; ++a) {
    if (T.is_leaf(a) || !cons[a]) continue;
    const LabelSet& X = A.leaves(a);
    VertexId v = lca_of_labels(F, X);
    auto N = n_paths_all(F, {}, X);
    auto inc = inclusive_flags(F, X);
    bool cl = N[v] >= 2;
    for (VertexId w = 0; w < F.size() && cl; ++w) {
      if (w != v && F.is_ancestor(v, w) && N[w] > 1) cl = false;
    }
    close[a] = cl;
    std::vector<LabelId> ls;
    for (std::size_t l = X.find_first(); l != LabelSet::npos; l = X.find_next(l)) ls.push_back(static_cast<LabelId>(l));
    bool found = false;
    for (std::size_t i = 0; i < ls.size() && !found; ++i) {
      for (std::size_t j = i + 1; j < ls.size() && !found; ++j) {
        VertexId x1 = F.leaf_of(ls[i]), x2 = F.leaf_of(ls[j]);
        if (lca(F, x1, x2) != v) continue;
        int excl = 0;
        bool ok = true;
        for (VertexId h : d_edges(F, x1, x2)) {
          if (!inc[h]) {
            ++excl;
            continue;
          }
          for (VertexId w = 0; w < F.size() && ok; ++w) {
            if (F.is_ancestor(h, w) && N[w] >= 2) ok = false;
          }
        }
        found = ok && excl <= 2;
      }
    }
    semi[a] = found;
  }
  std::vector<char> sd(n, 0), rd(n, 0), dd(n, 0);
  std::optional<StopperKind> result;
  for (VertexId a : T.postorder()) {
    std::optional<StopperKind> kind;
    bool below_s = false, below_r = false, below_d = false;
    for (VertexId c : T.children(a)) {
      below_s = below_s || sd[c];
      below_r = below_r || rd[c];
      below_d = below_d || dd[c];
    }
    VertexId l = A.lca_f(a);
    bool kids = !T.is_leaf(a) && cons[T.children(a)[0]] && cons[T.children(a)[1]];
    if (semi[a]) {
      kind = close[a] ? StopperKind::Close : StopperKind::SemiClose;
    } else if (!T.is_leaf(a) && cons[a] && !below_s && F.is_root(l)) {
      kind = StopperKind::Root;
    } else if (l == kNoVertex && !below_s && !below_r && kids) {
      kind = StopperKind::Disconnected;
    } else if (l != kNoVertex && !cons[a] && !below_s && !below_r && !below_d && kids) {
      kind = StopperKind::Overlapping;
    }
    sd[a] = below_s || (kind && (*kind == StopperKind::SemiClose || *kind == StopperKind::Close));
    rd[a] = below_r || (kind && *kind == StopperKind::Root);
    dd[a] = below_d || (kind && *kind == StopperKind::Disconnected);
    if (a == target) result = kind;
  }
  return result;
}

Key key_close_stopper(const Analysis& A, VertexId alpha, VertexId x1, VertexId x2) {
  const Forest& F = A.F();
  VertexId v = lca(F, x1, x2);
  if (v == kNoVertex || v != A.lca_f(alpha)) throw UsageError("witnesses do not meet at the cluster LCA");
  const LabelSet& X = A.leaves(alpha);
  Key k;
  k.X = X;
  for (VertexId x : {x1, x2}) {
    for (VertexId cur = x; F.parent(cur) != v; cur = F.parent(cur)) {
      VertexId u = F.sibling(cur);
      LabelSet Xu = descendants_in(F, u, X);
      if (Xu.none()) throw UsageError("exclusive edge on the witness path");
      RobustKey sub = build_fair_key(A, cluster_vertex(A, Xu));
      k.B.insert(sub.key.B.begin(), sub.key.B.end());
      k.B.insert(u);
    }
  }
  k.R = path_edges(F, x1, x2);
  return k;
}

Key key_close_stopper(const Analysis& A, VertexId alpha) {
  auto w = semi_close_witnesses(A, alpha);
  if (!w) throw UsageError("not a close stopper");
  auto inc = inclusive_flags(A.F(), A.leaves(alpha));
  for (VertexId h : d_edges(A.F(), w->first, w->second)) {
    if (!inc[h]) throw UsageError("not a close stopper");
  }
  return key_close_stopper(A, alpha, w->first, w->second);
}

Key key_semiclose_stopper(const Analysis& A, VertexId alpha) {
  const Forest& F = A.F();
  auto w = semi_close_witnesses(A, alpha);
  if (!w) throw UsageError("not a semi-close stopper");
  auto [x1, x2] = *w;
  const LabelSet& X = A.leaves(alpha);
  auto inc = inclusive_flags(F, X);
  EdgeSet excl;
  for (VertexId h : d_edges(F, x1, x2)) {
    if (!inc[h]) excl.insert(h);
  }
  if (excl.empty()) return key_close_stopper(A, alpha, x1, x2);
  Reduction R = ominus(F, excl);
  TFPair Q = with_forest(A.pair(), R.forest);
  Analysis AQ(Q);
  Key inner = key_close_stopper(AQ, alpha, Q.F.leaf_of(F.label(x1)), Q.F.leaf_of(F.label(x2)));
  Key k;
  k.X = X;
  k.B = set_union(lift(R, inner.B), excl);
  k.R = path_edges(F, x1, x2);
  return k;
}

Key key_root_or_disconnected(const Analysis& A, VertexId alpha) {
  auto [c0, c1] = t_children(A.T(), alpha);
  VertexId l = A.lca_f(alpha);
  if (!(l == kNoVertex || (A.consistent(alpha) && A.F().is_root(l)))) {
    throw UsageError("not a root or disconnected stopper");
  }
  Key k;
  k.X = A.leaves(alpha);
  k.B = set_union(build_fair_key(A, c0).key.B, build_fair_key(A, c1).key.B);
  return k;
}

std::optional<Port> detect_port(const Analysis& A, VertexId alpha) {
  const Forest& F = A.F();
  auto [c0, c1] = t_children(A.T(), alpha);
  const LabelSet* X[2] = {&A.leaves(c0), &A.leaves(c1)};
  std::vector<int> cnt[2];
  std::vector<char> inc[2];
  for (int s = 0; s < 2; ++s) {
    cnt[s].assign(F.size(), 0);
    for (VertexId v : F.postorder()) {
      if (F.is_leaf(v)) cnt[s][v] = contains(*X[s], F.label(v)) ? 1 : 0;
      for (VertexId c : F.children(v)) cnt[s][v] += cnt[s][c];
    }
    inc[s].assign(F.size(), 0);
    for (VertexId v = 0; v < F.size(); ++v) inc[s][v] = cnt[s][v] > 0;
  }
  for (VertexId u = 0; u < F.size(); ++u) {
    if (F.is_leaf(u) || F.is_root(u)) continue;
    VertexId p = F.parent(u), sib = F.sibling(u);
    for (int i = 0; i < 2; ++i) {
      int o = 1 - i;
      if (!inc[i][u] || inc[o][u]) continue;
      if (cnt[o][sib] >= 1 && cnt[o][F.component_root(p)] > cnt[o][p]) return Port{i + 1, u};
    }
  }
  return std::nullopt;
}

Key key_overlapping_port(const Analysis& A, VertexId alpha, const Port& port) {
  const Forest& F = A.F();
  auto [c0, c1] = t_children(A.T(), alpha);
  VertexId side[2] = {c0, c1};
  VertexId own = side[port.side - 1];    // cluster containing the port's leaves
  VertexId other = side[2 - port.side];  // cluster whose key must cut the port edge
  RobustKey k1 = build_fair_robust_key(A, other, Steer{port.vertex, true});
  if (!k1.key.B.count(port.vertex)) throw InvariantError("port edge not reached by the key");
  LabelSet Xp = descendants_in(F, port.vertex, A.leaves(own));
  RobustKey k2;
  if (Xp.count() >= 2) {
    k2 = build_fair_robust_key(A, cluster_vertex(A, Xp));
  } else {
    k2 = leaf_key(A, A.t_leaf(static_cast<LabelId>(Xp.find_first())));
  }
  if (k2.key.B.count(port.vertex)) throw InvariantError("port edge inside the port key");
  Key k;
  k.X = k1.key.X | k2.key.X;
  k.B = set_union(k1.key.B, k2.key.B);
  return k;
}

std::optional<int> detect_dangle(const Analysis& A, VertexId alpha) {
  const Forest& F = A.F();
  auto [c0, c1] = t_children(A.T(), alpha);
  VertexId side[2] = {c0, c1};
  for (int h = 0; h < 2; ++h) {
    VertexId lh = A.lca_f(side[h]), lo = A.lca_f(side[1 - h]);
    if (lh == lo || !F.is_ancestor(lo, lh)) continue;
    if (descendants_in(F, lh, A.leaves(side[1 - h])).none()) return h + 1;
  }
  return std::nullopt;
}

EdgeSet cut_overlapping_dangle(const Analysis& A, VertexId alpha, int h) {
  const Forest& F = A.F();
  auto [c0, c1] = t_children(A.T(), alpha);
  VertexId side[2] = {c0, c1};
  VertexId bd = side[h - 1], bm = side[2 - h];
  const LabelSet& Xm = A.leaves(bm);
  if (A.leaves(bd).count() != 1) throw InvariantError("dangling cluster is not a single leaf");
  VertexId x2 = A.lca_f(bd);
  VertexId u = F.parent(x2);
  auto inc = inclusive_flags(F, Xm);
  VertexId v1 = u;
  while (v1 != kNoVertex) {
    if (F.num_children(v1) == 2 && inc[F.children(v1)[0]] && inc[F.children(v1)[1]]) break;
    v1 = F.parent(v1);
  }
  if (v1 == kNoVertex) throw InvariantError("dangling leaf has no bifurcate ancestor");
  VertexId toward = x2;
  while (F.parent(toward) != v1) toward = F.parent(toward);
  VertexId v0 = x_child(F, inc, toward);
  bool sibling_case = F.is_leaf(v0) && F.parent(v0) == u;
  if (sibling_case) {
    RobustKey k = build_fair_key_steered(A, bm, Steer{x2, true});
    if (!k.key.B.count(x2) || !k.key.B.count(v0)) throw InvariantError("dangle edge not in the key");
    EdgeSet C = k.key.B;
    C.erase(x2);
    C.erase(v0);
    C.insert(u);
    return C;
  }
  RobustKey k = build_fair_robust_key(A, bm, Steer{x2, false});
  EdgeSet C = k.key.B;
  C.insert(x2);
  C.insert(u);
  return C;
}

RobustKey key_X1_with_path_budget(const Analysis& A, VertexId alpha, int side_index) {
  const Forest& F = A.F();
  auto [c0, c1] = t_children(A.T(), alpha);
  VertexId side[2] = {c0, c1};
  VertexId ba = side[side_index - 1], bb = side[2 - side_index];
  const LabelSet& Xa = A.leaves(ba);
  const LabelSet& Xb = A.leaves(bb);
  auto inc_a = inclusive_flags(F, Xa);
  auto inc_b = inclusive_flags(F, Xb);
  std::function<RobustKey(VertexId)> process = [&](VertexId v) -> RobustKey {
    if (F.is_leaf(v)) return leaf_key(A, A.t_leaf(F.label(v)));
    if (!inc_b[v]) return build_fair_robust_key(A, cluster_vertex(A, descendants_in(F, v, Xa)));
    VertexId u[2], w[2];
    RobustKey k[2];
    for (int i = 0; i < 2; ++i) {
      u[i] = F.children(v)[i];
      w[i] = x_child(F, inc_a, u[i]);
      k[i] = process(w[i]);
    }
    VertexId e = kNoVertex;
    for (int i = 0; i < 2 && e == kNoVertex; ++i) {
      if (n_paths_sub(F, k[i].key.B, Xb, u[i]) >= 1) e = u[i];
    }
    for (int i = 0; i < 2 && e == kNoVertex; ++i) {
      if (d_edges(F, w[i], v).empty() && !k[i].robust) e = u[1 - i];
    }
    if (e == kNoVertex) e = u[0];
    RobustKey out;
    out.key.X = k[0].key.X | k[1].key.X;
    out.key.B = set_union(k[0].key.B, k[1].key.B);
    out.key.B.insert(e);
    classify_robust(A, out);
    return out;
  };
  return process(A.lca_f(ba));
}

EdgeSet keys_across_components(const Analysis& A, const std::vector<VertexId>& alphas) {
  const Forest& F = A.F();
  const Forest& T = A.T();
  EdgeSet C;
  std::vector<VertexId> non_root;
  for (VertexId a : alphas) {
    VertexId l = A.lca_f(a);
    if (l == kNoVertex || !A.consistent(a)) throw UsageError("cluster is not consistent");
    if (!F.is_root(l)) {
      non_root.push_back(a);
    } else if (!T.is_leaf(a)) {
      Key k = key_root_or_disconnected(A, a);
      C.insert(k.B.begin(), k.B.end());
    }
  }
  if (non_root.size() == 1) throw UsageError("exactly one cluster has a non-root LCA");
  for (VertexId a : non_root) {
    RobustKey k = build_fair_key(A, a);
    C.insert(k.key.B.begin(), k.key.B.end());
  }
  return C;
}

namespace {

// Luck test on F minus B: every root is a leaf or has two X-inclusive
// children, or at least two roots have exactly one.
bool lucky(const Forest& F, const EdgeSet& B, const LabelSet& X) {
  Reduction R = ominus(F, B);
  const Forest& G = R.forest;
  auto inc = inclusive_flags(G, X);
  int one = 0;
  bool all = true;
  for (VertexId r : G.roots()) {
    if (G.is_leaf(r)) continue;
    int k = inc[G.children(r)[0]] + inc[G.children(r)[1]];
    if (k == 1) ++one;
    if (k != 2) all = false;
  }
  return all || one >= 2;
}

}  // namespace

EdgeSet cut_overlapping_general(const Analysis& A, VertexId alpha) {
  const Forest& F = A.F();
  auto [c0, c1] = t_children(A.T(), alpha);
  VertexId side[2] = {c0, c1};
  std::vector<char> inc[2] = {inclusive_flags(F, A.leaves(c0)), inclusive_flags(F, A.leaves(c1))};
  auto both = [&](VertexId x) { return inc[0][x] && inc[1][x]; };
  auto any = [&](VertexId x) { return inc[0][x] || inc[1][x]; };
  std::vector<char> below(F.size(), 0);
  VertexId v = kNoVertex;
  for (VertexId x : F.postorder()) {
    bool jb = false;
    for (VertexId c : F.children(x)) jb = jb || below[c];
    bool junc = false;
    if (F.num_children(x) == 2) {
      VertexId a = F.children(x)[0], b = F.children(x)[1];
      junc = (both(a) && any(b)) || (both(b) && any(a));
    }
    if (junc && !jb && v == kNoVertex) v = x;
    below[x] = jb || junc;
  }
  if (v == kNoVertex) throw InvariantError("no extreme juncture");
  VertexId ch[2] = {F.children(v)[0], F.children(v)[1]};
  int ia = (inc[0][ch[0]] && inc[0][ch[1]]) ? 0 : 1;
  if (!(inc[ia][ch[0]] && inc[ia][ch[1]])) throw InvariantError("juncture children share no cluster");
  int ib = 1 - ia;
  const LabelSet& Xa = A.leaves(side[ia]);
  const LabelSet& Xb = A.leaves(side[ib]);
  VertexId x[2];
  for (int j = 0; j < 2; ++j) {
    LabelSet d = descendants_in(F, ch[j], Xa);
    x[j] = A.f_leaf(static_cast<LabelId>(d.find_first()));
  }
  std::vector<VertexId> hang[2];
  for (VertexId h : d_edges(F, x[0], x[1])) {
    LabelSet d = descendants_in(F, h, Xb);
    for (std::size_t l = d.find_first(); l != LabelSet::npos; l = d.find_next(l)) {
      VertexId y = A.f_leaf(static_cast<LabelId>(l));
      hang[F.is_ancestor(ch[0], y) ? 0 : 1].push_back(y);
    }
  }
  std::size_t total = hang[0].size() + hang[1].size();
  if (total == 2 && hang[0].size() == 1) {
    VertexId x3 = hang[0][0], x4 = hang[1][0];
    if (F.parent(x3) != F.parent(x[0]) || F.parent(x4) != F.parent(x[1])) {
      throw InvariantError("crossing leaves are not siblings");
    }
    return {x[0], x[1], x3, x4};
  }
  if (total != 1) throw InvariantError("unexpected number of leaves hanging off the juncture path");
  int h = hang[0].empty() ? 1 : 0;
  VertexId x3 = hang[h][0];
  VertexId xa = x[h], xo = x[1 - h];
  if (F.parent(x3) != F.parent(xa) || F.parent(xo) != v) throw InvariantError("juncture layout not recognized");
  VertexId w = F.parent(xa);
  EdgeSet B = key_X1_with_path_budget(A, alpha, ia + 1).key.B;
  if (!lucky(F, B, Xb)) {
    VertexId v1 = ch[h];
    if (!B.count(v1)) throw InvariantError("unlucky key does not cut the juncture child");
    EdgeSet B1 = B;
    B1.erase(v1);
    B1.insert(x3);
    if (lucky(F, B1, Xb)) {
      B = std::move(B1);
    } else {
      VertexId t = xa;
      while (F.parent(t) != v1) t = F.parent(t);
      EdgeSet B2 = B;
      B2.erase(v1);
      B2.insert(t);
      if (!lucky(F, B2, Xb)) throw InvariantError("modified key is still unlucky");
      B = std::move(B2);
    }
  }
  Reduction R = ominus(F, B);
  TFPair Q = with_forest(A.pair(), R.forest);
  Analysis AQ(Q);
  std::vector<VertexId> alphas;
  std::vector<LabelSet> parts;
  for (VertexId r : Q.F.roots()) {
    LabelSet part = descendants_in(Q.F, r, Xb);
    if (part.any()) parts.push_back(std::move(part));
  }
  // A part that is not a cluster of T is split into its maximal subclusters.
  std::vector<VertexId> stack{side[ib]};
  while (!stack.empty()) {
    VertexId g = stack.back();
    stack.pop_back();
    const LabelSet& L = A.leaves(g);
    bool inside = std::any_of(parts.begin(), parts.end(), [&](const LabelSet& p) { return subset_of(L, p); });
    if (inside) {
      alphas.push_back(g);
    } else {
      for (VertexId c : A.T().children(g)) stack.push_back(c);
    }
  }
  EdgeSet S = set_union(B, lift(R, keys_across_components(AQ, alphas)));
  if (S.count(xa) && (S.count(x3) || S.count(w))) {
    S.erase(xa);
    S.erase(x3);
    S.insert(w);
  } else {
    throw InvariantError("merge edges missing from the combined cut");
  }
  return S;
}

GoodCutResult find_good_cut(const TFPair& P) {
  if (P.is_empty()) throw UsageError("good cut requested for an empty pair");
  const Forest& T = P.T;
  const Forest& F = P.F;
  Analysis A(P);
  GoodCutResult out;
  for (VertexId p : T.postorder()) {
    if (T.num_children(p) != 2) continue;
    VertexId a = T.children(p)[0], b = T.children(p)[1];
    if (!T.is_leaf(a) || !T.is_leaf(b)) continue;
    VertexId x1 = A.f_leaf(T.label(a)), x2 = A.f_leaf(T.label(b));
    if (!F.same_component(x1, x2)) continue;
    EdgeSet D = d_edges(F, x1, x2);
    if (D.size() != 1) continue;
    out.cut = D;
    out.step = 1;
    out.construction = "tree-cherry-single-edge";
    Key k;
    k.X = A.leaves(p);
    k.B = D;
    k.R = path_edges(F, x1, x2);
    out.scope = k.X;
    out.key = std::move(k);
    return out;
  }
  for (VertexId p : F.postorder()) {
    if (F.num_children(p) != 2) continue;
    VertexId a = F.children(p)[0], b = F.children(p)[1];
    if (!F.is_leaf(a) || !F.is_leaf(b)) continue;
    EdgeSet D = d_edges(T, A.t_leaf(F.label(a)), A.t_leaf(F.label(b)));
    if (D.size() != 1) continue;
    VertexId h = *D.begin();
    if (!T.is_leaf(h)) continue;
    out.cut = {A.f_leaf(T.label(h))};
    out.step = 2;
    out.construction = "forest-cherry-leaf";
    return out;
  }
  StopperScan S = scan_stoppers(A);
  for (const Stopper& s : S.stoppers) {
    if (s.kind != StopperKind::Root && s.kind != StopperKind::Disconnected) continue;
    Key k = key_root_or_disconnected(A, s.vertex);
    out.cut = k.B;
    out.step = 3;
    out.construction = s.kind == StopperKind::Root ? "root-stopper" : "disconnected-stopper";
    out.stopper = s.vertex;
    out.scope = k.X;
    out.key = std::move(k);
    return out;
  }
  for (const Stopper& s : S.stoppers) {
    if (s.kind != StopperKind::Overlapping) continue;
    auto port = detect_port(A, s.vertex);
    if (!port) continue;
    Key k = key_overlapping_port(A, s.vertex, *port);
    out.cut = k.B;
    out.step = 4;
    out.construction = "overlapping-port";
    out.stopper = s.vertex;
    out.scope = A.leaves(s.vertex);
    out.key = std::move(k);
    return out;
  }
  for (const Stopper& s : S.stoppers) {
    if (s.kind != StopperKind::Overlapping) continue;
    auto h = detect_dangle(A, s.vertex);
    if (!h) continue;
    out.cut = cut_overlapping_dangle(A, s.vertex, *h);
    out.step = 5;
    out.construction = "overlapping-dangle";
    out.stopper = s.vertex;
    return out;
  }
  for (const Stopper& s : S.stoppers) {
    if (s.kind != StopperKind::Overlapping) continue;
    out.cut = cut_overlapping_general(A, s.vertex);
    out.step = 6;
    out.construction = out.cut.size() == 4 ? "overlapping-juncture" : "overlapping-juncture-merge";
    out.stopper = s.vertex;
    return out;
  }
  for (const Stopper& s : S.stoppers) {
    if (s.kind != StopperKind::SemiClose && s.kind != StopperKind::Close) continue;
    Key k = key_semiclose_stopper(A, s.vertex);
    out.cut = k.B;
    out.step = 7;
    out.construction = s.kind == StopperKind::Close ? "close-stopper" : "semi-close-stopper";
    out.stopper = s.vertex;
    out.scope = k.X;
    out.key = std::move(k);
    return out;
  }
  throw InvariantError("no step of the good-cut search applies");
}

namespace {

bool identity_origins(const Forest& F) {
  for (VertexId v = 0; v < F.size(); ++v) {
    if (F.origin(v) != v) return false;
  }
  return true;
}

EdgeSet lift_origins(const Forest& F, const EdgeSet& C) {
  EdgeSet out;
  for (VertexId h : C) out.insert(F.origin(h));
  return out;
}

}  // namespace

ApproxResult approx2(const TFPair& P, bool keep_stage_pairs) {
  ApproxResult res;
  TFPair cur = preprocess(P, false);
  while (!cur.is_empty()) {
    GoodCutResult g = find_good_cut(cur);
    if (g.cut.empty()) throw InvariantError("empty good cut");
    StageRecord rec;
    rec.step = g.step;
    rec.construction = g.construction;
    rec.cut = g.cut;
    rec.lifted = lift_origins(cur.F, g.cut);
    res.cut.insert(rec.lifted.begin(), rec.lifted.end());
    TFPair next = preprocess(induced_subpair(cur, g.cut), false);
    if (keep_stage_pairs) rec.before = std::move(cur);
    res.stages.push_back(std::move(rec));
    cur = std::move(next);
  }
  if (identity_origins(P.F) && !is_agreement_cut(P, res.cut)) {
    throw InvariantError("approx2 result is not an agreement cut");
  }
  return res;
}

EdgeSet approx3(const TFPair& P) {
  EdgeSet total;
  TFPair cur = preprocess(P, false);
  while (!cur.is_empty()) {
    auto pairs = sibling_leaf_pairs(cur.T, CherryPolicy::DeepestFirst);
    if (pairs.empty()) throw InvariantError("non-empty pair without a T cherry");
    const Forest& F = cur.F;
    VertexId x1 = F.leaf_of(cur.T.label(pairs.front().first));
    VertexId x2 = F.leaf_of(cur.T.label(pairs.front().second));
    EdgeSet C{x1, x2};
    if (F.same_component(x1, x2)) {
      EdgeSet D = d_edges(F, x1, x2);
      VertexId best = kNoVertex;
      for (VertexId h : D) {
        if (best == kNoVertex || F.depth(F.parent(h)) < F.depth(F.parent(best))) best = h;
      }
      if (best != kNoVertex) C.insert(best);
    }
    EdgeSet lifted = lift_origins(F, C);
    total.insert(lifted.begin(), lifted.end());
    cur = preprocess(induced_subpair(cur, C), false);
  }
  return total;
}

}  // namespace rspr
