#include <random>

#include "doctest.h"
#include "fixtures.hpp"
#include "support.hpp"

using namespace rspr;
using namespace rspr::fixtures;

namespace {

std::string show(const Forest& F, const TFPair& P) {
  return serialize(F, [&](LabelId l) { return P.label_name(l); });
}

}  // namespace

TEST_CASE("lca within and across components") {
  TFPair P = pair_from("(((a,b),e),(c,d));", "((a,b),e);(c,d);");
  VertexId a = f_leaf(P, "a"), b = f_leaf(P, "b"), c = f_leaf(P, "c"), e = f_leaf(P, "e");
  CHECK(lca(P.F, a, b) == P.F.parent(a));
  CHECK(lca(P.F, a, e) == P.F.component_root(a));
  CHECK(lca(P.F, a, c) == kNoVertex);
  CHECK_THROWS_AS(lca(P.F, a, 1000), UsageError);
}

TEST_CASE("path edges and pendant edges") {
  TFPair P = pair_from("((a,b),c);", "((a,b),c);");
  VertexId a = f_leaf(P, "a"), b = f_leaf(P, "b"), c = f_leaf(P, "c");
  VertexId ab = P.F.parent(a);
  CHECK(path_edges(P.F, a, b) == EdgeSet{a, b});
  CHECK(path_edges(P.F, a, c) == EdgeSet{a, ab, c});
  CHECK(path_edges(P.F, a, a).empty());
  CHECK(d_edges(P.F, a, c) == EdgeSet{b});
  CHECK(d_edges(P.F, a, b).empty());
  TFPair Q = pair_from("((a,b),(c,d));", "(a,b);(c,d);");
  CHECK(d_edges(Q.F, f_leaf(Q, "a"), f_leaf(Q, "c")).empty());
  CHECK_THROWS_AS(path_edges(Q.F, f_leaf(Q, "a"), f_leaf(Q, "c")), DomainError);
}

TEST_CASE("ominus removes label-free vertices and contracts chains") {
  TFPair P = pair_from("((a,b),c);", "((a,b),c);");
  Reduction R = ominus(P.F, {f_leaf(P, "b")});
  CHECK(show(R.forest, P) == "(a,c);\nb;\n");
  CHECK(show(ominus(P.F, {}).forest, P) == show(P.F, P));
}

TEST_CASE("forced cut follows the matched components") {
  TFPair P = pair_from("((a,b),c);", "((a,c),b);");
  EdgeSet CT = forced_cut(P, {f_leaf(P, "c")});
  CHECK(CT.size() == 1);
  CHECK(isomorphic(ominus(P.T, CT).forest, ominus(P.F, {f_leaf(P, "c")}).forest));
}

TEST_CASE("preprocess contracts common cherries and removes isolated leaves") {
  TFPair P = pair_from("(((a,b),c),(d,e));", "(((a,b),d),(c,e));");
  TFPair Q = preprocess(P, false);
  CHECK(Q.T.labels().size() == 4);
  bool merged = false;
  for (LabelId l : Q.T.labels()) merged = merged || Q.expand(l).size() == 2;
  CHECK(merged);
  TFPair R = preprocess(pair_from("((a,b),c);", "(a,b);c;"), false);
  CHECK(R.is_empty());
  TFPair S = preprocess(pair_from("((a,b),c);", "((a,b),c);"), true);
  CHECK(S.is_empty());
}

TEST_CASE("dummy leaf is shared by T and the first component of F") {
  TFPair P = add_dummy(pair_from("((a,b),c);", "((a,c),b);"));
  REQUIRE(P.dummy != kNoLabel);
  CHECK(P.T.is_root(P.T.parent(P.T.leaf_of(P.dummy))));
  CHECK(P.F.is_root(P.F.parent(P.F.leaf_of(P.dummy))));
}

TEST_CASE("restriction keeps X-bifurcate structure") {
  TFPair P = pair_from("(((a,b),c),(d,e));", "(((a,b),c),(d,e));");
  Forest R = restrict_to(P.T, labels(P, {"a", "c", "d"}));
  CHECK(show(R, P) == "((a,c),d);\n");
}

TEST_CASE("canonical cuts add one component per edge") {
  std::mt19937_64 rng(9);
  int checked = 0;
  for (int t = 0; t < 200; ++t) {
    TFPair P = testing::random_pair(6 + t % 10, 2 + t % 4, 300 + t);
    if (P.is_empty()) continue;
    std::vector<VertexId> heads;
    for (VertexId v = 0; v < P.F.size(); ++v) {
      if (!P.F.is_root(v)) heads.push_back(v);
    }
    std::shuffle(heads.begin(), heads.end(), rng);
    EdgeSet C(heads.begin(), heads.begin() + std::min<std::size_t>(3, heads.size()));
    if (!is_canonical_cut(P.F, C)) continue;
    ++checked;
    CHECK(ominus(P.F, C).forest.num_components() == P.F.num_components() + static_cast<int>(C.size()));
  }
  CHECK(checked > 20);
}

TEST_CASE("agreement tests agree with each other") {
  std::mt19937_64 rng(13);
  int agreements = 0;
  for (int t = 0; t < 300; ++t) {
    TFPair P = testing::random_pair(5 + t % 5, 1 + t % 3, 700 + t);
    if (P.is_empty()) continue;
    std::vector<VertexId> heads;
    for (VertexId v = 0; v < P.F.size(); ++v) {
      if (!P.F.is_root(v)) heads.push_back(v);
    }
    std::shuffle(heads.begin(), heads.end(), rng);
    EdgeSet C(heads.begin(), heads.begin() + std::min<std::size_t>(1 + t % 4, heads.size()));
    if (!is_cut(P.F, C)) continue;
    bool a = is_agreement_cut(P, C);
    CHECK(a == agreement_by_restriction(P, C));
    if (a) {
      ++agreements;
      CHECK(isomorphic(ominus(P.T, forced_cut(P, C)).forest, ominus(P.F, C).forest));
      CHECK(induced_subpair(P, C).is_empty());
    }
  }
  CHECK(agreements > 0);
}

TEST_CASE("trimming to a cut keeps the reduced forest") {
  TFPair P = pair_from("(((x1,x5),x6),x2);", "(((x1,x5),x6),x2);");
  VertexId x1 = f_leaf(P, "x1"), x5 = f_leaf(P, "x5"), x6 = f_leaf(P, "x6"), x2 = f_leaf(P, "x2");
  EdgeSet B{x5, x6, x2, P.F.parent(x1)};
  REQUIRE_FALSE(is_cut(P.F, B));
  EdgeSet C = trim_to_cut(P.F, B);
  CHECK(is_cut(P.F, C));
  CHECK(C.size() < B.size());
  CHECK(show(ominus(P.F, C).forest, P) == show(ominus(P.F, B).forest, P));
  CHECK(trim_to_cut(P.F, {x1}) == EdgeSet{x1});
}
