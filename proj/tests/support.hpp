#pragma once

#include <functional>
#include <string>
#include <vector>

#include "rspr/approx.hpp"
#include "rspr/exact.hpp"
#include "rspr/generate.hpp"
#include "rspr/key_verify.hpp"

namespace rspr::testing {

inline ExactOptions oracle_options() {
  ExactOptions o;
  o.bound = LowerBound::Approx3;
  o.seed_incumbent = false;
  return o;
}

// Exact distance without using approx2 for pruning.
inline int oracle_distance(const TFPair& P) {
  if (P.is_empty()) return 0;
  return exact_distance(P, oracle_options())->distance;
}

// Drop in exact distance caused by cutting C on P.
inline int distance_drop(const TFPair& P, const EdgeSet& C) {
  return oracle_distance(P) - oracle_distance(preprocess(induced_subpair(P, C), false));
}

inline TFPair random_pair(int n, int k, std::uint64_t seed, Shape shape = Shape::Yule) {
  GenSpec g;
  g.n_leaves = n;
  g.n_moves = k;
  g.seed = seed;
  g.shape = shape;
  return preprocess(gen_pair(g), true);
}

struct EmittedKey {
  std::string source;
  const Key* key = nullptr;
  Grade grade = Grade::Fair;
  const LabelSet* scope = nullptr;
  const RobustKey* flags = nullptr;
};

using KeyVisitor = std::function<void(const EmittedKey&)>;

inline bool path_budget_holds(const Forest& F, VertexId top, const EdgeSet& A, const LabelSet& X, int cap) {
  auto N = n_paths_all(F, A, X);
  for (VertexId v = 0; v < F.size(); ++v) {
    if (F.is_ancestor(top, v) && N[v] > cap) return false;
  }
  return true;
}

// Hypotheses of the bottom-up fair-key construction at alpha.
inline bool fair_key_applies(const Analysis& A, VertexId alpha) {
  if (!A.consistent(alpha)) return false;
  VertexId l = A.lca_f(alpha);
  if (l == kNoVertex) return false;
  if (A.T().is_leaf(alpha)) return !A.F().is_root(l);
  return !A.F().is_root(l) && path_budget_holds(A.F(), l, {}, A.leaves(alpha), 1);
}

// Calls visit for every key the constructors produce on P whose hypotheses
// hold, tagged with the grade the construction claims.
inline void for_each_emitted_key(const TFPair& P, const KeyVisitor& visit) {
  if (P.is_empty()) return;
  Analysis A(P);
  const Forest& T = P.T;
  GoodCutResult g = find_good_cut(P);
  if (g.key) {
    const LabelSet* scope = g.scope.any() && g.scope != g.key->X ? &g.scope : nullptr;
    visit({"step-" + g.construction, &*g.key, Grade::Good, scope, nullptr});
  }
  for (VertexId a = 0; a < T.size(); ++a) {
    if (T.is_leaf(a)) {
      if (!fair_key_applies(A, a)) continue;
      RobustKey k = leaf_key(A, a);
      visit({"leaf", &k.key, Grade::Fair, nullptr, &k});
      continue;
    }
    if (fair_key_applies(A, a)) {
      RobustKey k = build_fair_key(A, a);
      visit({"fair-key", &k.key, Grade::Fair, nullptr, &k});
    }
    VertexId b1 = T.children(a)[0], b2 = T.children(a)[1];
    if (!fair_key_applies(A, b1) || !fair_key_applies(A, b2)) continue;
    VertexId l = A.lca_f(a);
    bool joined = l == kNoVertex || (A.consistent(a) && P.F.is_root(l));
    if (!joined && !A.consistent(a)) continue;
    RobustKey k1 = T.is_leaf(b1) ? leaf_key(A, b1) : build_fair_key(A, b1);
    RobustKey k2 = T.is_leaf(b2) ? leaf_key(A, b2) : build_fair_key(A, b2);
    RobustKey k;
    try {
      k = combine_keys(A, k1, k2, a);
    } catch (const UsageError&) {
      continue;
    }
    // A union that is not a cut is trimmed to one, which costs at most one
    // from the bound, so it is only claimed fair.
    bool whole = is_cut(P.F, set_union(k1.key.B, k2.key.B));
    const char* src = !joined ? "combine-extra-edge" : whole ? "combine-union" : "combine-union-trimmed";
    visit({src, &k.key, joined && whole ? Grade::Good : Grade::Fair, nullptr, joined ? nullptr : &k});
    if (l == kNoVertex && (P.F.is_root(A.lca_f(b1)) == P.F.is_root(A.lca_f(b2)))) {
      Key across;
      across.X = A.leaves(a);
      across.B = keys_across_components(A, {b1, b2});
      visit({"across-components", &across, Grade::Good, nullptr, nullptr});
    }
  }
  for (const Stopper& s : scan_stoppers(A).stoppers) {
    VertexId a = s.vertex;
    switch (s.kind) {
      case StopperKind::Close: {
        Key k = key_close_stopper(A, a);
        visit({"close-stopper", &k, Grade::Good, nullptr, nullptr});
        break;
      }
      case StopperKind::SemiClose: {
        Key k = key_semiclose_stopper(A, a);
        visit({"semi-close-stopper", &k, Grade::Good, nullptr, nullptr});
        break;
      }
      case StopperKind::Root:
      case StopperKind::Disconnected: {
        Key k = key_root_or_disconnected(A, a);
        visit({"root-or-disconnected", &k, Grade::Good, nullptr, nullptr});
        break;
      }
      case StopperKind::Overlapping: {
        std::vector<VertexId> stack{T.children(a)[0], T.children(a)[1]};
        while (!stack.empty()) {
          VertexId b = stack.back();
          stack.pop_back();
          if (T.is_leaf(b)) continue;
          RobustKey k = build_fair_robust_key(A, b);
          visit({"fair-robust-key", &k.key, Grade::Fair, nullptr, &k});
          for (VertexId c : T.children(b)) stack.push_back(c);
        }
        if (auto port = detect_port(A, a)) {
          Key k = key_overlapping_port(A, a, *port);
          const LabelSet& scope = A.leaves(a);
          visit({"overlapping-port", &k, Grade::Good, &scope, nullptr});
        } else if (!detect_dangle(A, a)) {
          for (int side = 1; side <= 2; ++side) {
            RobustKey k;
            try {
              k = key_X1_with_path_budget(A, a, side);
            } catch (const UsageError&) {
              continue;
            }
            visit({"path-budget-key", &k.key, Grade::Fair, nullptr, &k});
          }
        }
        break;
      }
    }
  }
}

// Certifies one emitted key: validity, claimed grade, and the robustness
// flags against their definitions. Returns an empty string on success.
inline std::string check_emitted(const TFPair& P, const EmittedKey& e) {
  KeyCheck v = validate_key(P, *e.key, e.scope);
  if (!v) return e.source + ": invalid key: " + v.reason;
  if (!certify(P, *e.key, e.grade, e.scope)) return e.source + ": does not certify at its grade";
  if (e.flags) {
    Analysis A(P);
    RobustKey r;
    r.key = *e.key;
    classify_robust(A, r);
    if (e.flags->robust && !r.robust) return e.source + ": robust flag not backed by the definition";
    if (e.flags->super_robust && !r.super_robust) return e.source + ": super-robust flag not backed";
  }
  return {};
}

}  // namespace rspr::testing
