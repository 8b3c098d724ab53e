#include "doctest.h"
#include "rspr/newick.hpp"
#include "support.hpp"

using namespace rspr;
using namespace rspr::testing;

TEST_CASE("no moves gives identical trees") {
  GenSpec g;
  g.n_leaves = 30;
  g.n_moves = 0;
  g.seed = 7;
  TFPair P = gen_pair(g);
  CHECK(serialize(P.T, *P.names) == serialize(P.F, *P.names));
}

TEST_CASE("same seed gives the same pair") {
  GenSpec g;
  g.n_leaves = 25;
  g.n_moves = 5;
  g.seed = 99;
  g.shape = Shape::Uniform;
  TFPair a = gen_pair(g), b = gen_pair(g);
  CHECK(serialize(a.T, *a.names) == serialize(b.T, *b.names));
  CHECK(serialize(a.F, *a.names) == serialize(b.F, *b.names));
}

TEST_CASE("k moves give distance at most k") {
  for (int t = 0; t < 60; ++t) {
    GenSpec g;
    g.n_leaves = 4 + t % 8;
    g.n_moves = 1 + t % 3;
    g.seed = 400 + t;
    TFPair P = preprocess(gen_pair(g), true);
    CHECK((P.is_empty() || brute_force_distance(P, g.n_moves).has_value()));
  }
}

TEST_CASE("shape names") {
  CHECK(parse_shape("yule") == Shape::Yule);
  CHECK(parse_shape("uniform") == Shape::Uniform);
  CHECK_THROWS_AS(parse_shape("star"), UsageError);
}
