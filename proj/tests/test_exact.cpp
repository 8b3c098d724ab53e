#include "doctest.h"
#include "fixtures.hpp"
#include "support.hpp"

using namespace rspr;
using namespace rspr::fixtures;
using namespace rspr::testing;

namespace {

TFPair based(const TFPair& P) {
  TFPair Q = rebase(P);
  Q.names = P.names;
  return Q;
}

}  // namespace

TEST_CASE("one move apart") {
  TFPair P = preprocess(pair_from("((a,b),c);", "((a,c),b);"), true);
  CHECK(oracle_distance(P) == 1);
  CHECK(brute_force_distance(P, 3)->distance == 1);
  CHECK(exact_distance(P)->distance == 1);
}

TEST_CASE("identical trees are at distance zero") {
  TFPair P = pair_from("(((a,b),c),(d,e));", "(((a,b),c),(d,e));");
  auto r = exact_distance(P);
  REQUIRE(r);
  CHECK(r->distance == 0);
  CHECK(r->cut.empty());
}

TEST_CASE("budget below the distance gives no result") {
  TFPair P = random_pair(12, 6, 41);
  int d = oracle_distance(P);
  REQUIRE(d >= 2);
  ExactOptions o = oracle_options();
  o.budget = d - 1;
  CHECK_FALSE(exact_distance(P, o));
  o.budget = d;
  CHECK(exact_distance(P, o)->distance == d);
}

TEST_CASE("exact search matches brute force on small random pairs") {
  for (int t = 0; t < 150; ++t) {
    TFPair P = random_pair(4 + t % 6, 1 + t % 4, 900 + t, t % 2 ? Shape::Uniform : Shape::Yule);
    if (P.is_empty()) continue;
    auto b = brute_force_distance(P, 6);
    REQUIRE(b);
    CHECK(oracle_distance(P) == b->distance);
  }
}

TEST_CASE("pruning, bounds and cherry policy do not change the distance") {
  for (int t = 0; t < 60; ++t) {
    TFPair P = random_pair(6 + t % 8, 1 + t % 5, 1300 + t);
    if (P.is_empty()) continue;
    int d = oracle_distance(P);
    ExactOptions plain;
    plain.prune = false;
    plain.bound = LowerBound::None;
    plain.seed_incumbent = false;
    ExactOptions shallow = oracle_options();
    shallow.policy = CherryPolicy::ShallowestFirst;
    CHECK(exact_distance(P, plain)->distance == d);
    CHECK(exact_distance(P, shallow)->distance == d);
    CHECK(exact_distance(P)->distance == d);
  }
}

TEST_CASE("witness cut is a minimum agreement cut of the pair") {
  for (int t = 0; t < 80; ++t) {
    TFPair P = based(random_pair(5 + t % 9, 1 + t % 5, 1500 + t));
    if (P.is_empty()) continue;
    auto r = exact_distance(P, oracle_options());
    REQUIRE(r);
    CHECK(static_cast<int>(r->cut.size()) == r->distance);
    CHECK(is_agreement_cut(P, r->cut));
  }
}

TEST_CASE("search paths end in canonical agreement cuts") {
  for (int t = 0; t < 40; ++t) {
    TFPair P = based(random_pair(4 + t % 5, 1 + t % 3, 1700 + t));
    if (P.is_empty()) continue;
    int d = oracle_distance(P);
    int best = std::numeric_limits<int>::max();
    for_each_search_path(P, nullptr, std::numeric_limits<int>::max(), CherryPolicy::DeepestFirst,
                         [&](const SearchPath& p) {
                           CHECK(p.agreement);
                           CHECK(is_canonical_cut(P.F, p.cut));
                           CHECK(is_agreement_cut(P, p.cut));
                           best = std::min(best, static_cast<int>(p.cut.size()));
                         });
    CHECK(best == d);
  }
}

TEST_CASE("search tree branches have two or three ways") {
  TFPair P = based(preprocess(pair_from("(((a,b),c),d);", "(((a,c),d),b);"), true));
  auto pairs = sibling_leaf_pairs(P.T, CherryPolicy::DeepestFirst);
  REQUIRE_FALSE(pairs.empty());
  auto [t1, t2] = pairs.front();
  auto br = branches(P, t1, t2);
  CHECK(br.size() == 3);
  TFPair Q = based(preprocess(pair_from("((a,b),(c,d));", "(a,c);(b,d);"), false));
  auto qp = sibling_leaf_pairs(Q.T, CherryPolicy::DeepestFirst);
  REQUIRE_FALSE(qp.empty());
  CHECK(branches(Q, qp.front().first, qp.front().second).size() == 2);
}

TEST_CASE("brute force refuses large instances") {
  TFPair P = random_pair(40, 10, 3);
  CHECK_THROWS_AS(brute_force_distance(P, 8), ResourceError);
}
