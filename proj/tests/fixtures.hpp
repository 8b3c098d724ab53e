#pragma once

#include <memory>
#include <string>
#include <vector>

#include "rspr/newick.hpp"
#include "rspr/ops.hpp"
#include "rspr/tfpair.hpp"

namespace rspr::fixtures {

inline TFPair pair_from(const std::string& t, const std::string& f) {
  auto names = std::make_shared<LabelNames>();
  Forest T = parse_tree(t, *names);
  Forest F = parse_forest(f, *names);
  return make_pair(std::move(T), std::move(F), names);
}

inline LabelSet labels(const TFPair& P, const std::vector<std::string>& xs) {
  LabelSet X = P.make_set();
  for (const auto& x : xs) X.set(static_cast<std::size_t>(P.names->find(x)));
  return X;
}

inline VertexId f_leaf(const TFPair& P, const std::string& x) { return P.F.leaf_of(P.names->find(x)); }
inline VertexId t_leaf(const TFPair& P, const std::string& x) { return P.T.leaf_of(P.names->find(x)); }

inline VertexId f_lca(const TFPair& P, const std::vector<std::string>& xs) {
  return lca_of_labels(P.F, labels(P, xs));
}
inline VertexId t_lca(const TFPair& P, const std::vector<std::string>& xs) {
  return lca_of_labels(P.T, labels(P, xs));
}

// Tree-forest pair with the named vertices of the configuration figure:
// in F, u = (x5,x6), z = (x1,x3), v = parent of z, w = parent of v and x4,
// s = root of the (x9,x11,x12) part; in T, lambda is the parent of the
// (x11,x9) and (x12,x10) cherries.
struct ConfigFigure {
  TFPair P;
  VertexId u, z, v, w, s, lambda;
  // The four cut edges of F drawn dashed.
  EdgeSet dashed;
};

inline ConfigFigure config_figure() {
  ConfigFigure c;
  c.P = pair_from("((((x2,x3),x4),((x5,x1),x6)),((((x11,x9),(x12,x10)),x7),x8));",
                  "(((((x2,(x5,x6)),(x1,x3)),x4),((x11,x9),x12)),(x7,(x8,x10)));");
  const TFPair& P = c.P;
  c.u = f_lca(P, {"x5", "x6"});
  c.z = f_lca(P, {"x1", "x3"});
  c.v = P.F.parent(c.z);
  c.w = f_lca(P, {"x2", "x3", "x4"});
  c.s = f_lca(P, {"x9", "x11", "x12"});
  c.lambda = t_lca(P, {"x9", "x10", "x11", "x12"});
  c.dashed = {f_leaf(P, "x1"), f_leaf(P, "x2"), f_leaf(P, "x10"), c.s};
  return c;
}

}  // namespace rspr::fixtures
