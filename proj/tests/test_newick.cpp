#include <random>

#include "doctest.h"
#include "fixtures.hpp"
#include "rspr/generate.hpp"
#include "rspr/newick.hpp"

using namespace rspr;

TEST_CASE("single leaf and small trees") {
  LabelNames names;
  Forest F = parse_tree("a;", names);
  CHECK(F.size() == 1);
  CHECK(serialize(F, names) == "a;\n");
  Forest G = parse_tree("((b,a),c);", names);
  CHECK(serialize(G, names) == "((a,b),c);\n");
}

TEST_CASE("forest with two components prints one record per line") {
  LabelNames names;
  Forest F = parse_forest("(a,b);\n(c,d);\n", names);
  CHECK(F.num_components() == 2);
  CHECK(serialize(F, names) == "(a,b);\n(c,d);\n");
}

TEST_CASE("branch lengths and internal labels are dropped with warnings") {
  LabelNames names;
  std::vector<std::string> warnings;
  Forest F = parse_tree("((a:1.5,b:2)x:0.1,c);", names, &warnings);
  CHECK(serialize(F, names) == "((a,b),c);\n");
  CHECK_FALSE(warnings.empty());
}

TEST_CASE("quoted labels survive a round trip") {
  LabelNames names;
  Forest F = parse_tree("('a b',('it''s',c));", names);
  std::string out = serialize(F, names);
  LabelNames again;
  Forest G = parse_tree(out, again);
  CHECK(serialize(G, again) == out);
  CHECK(names.find("a b") != kNoLabel);
  CHECK(names.find("it's") != kNoLabel);
}

TEST_CASE("malformed input raises a parse error") {
  LabelNames names;
  CHECK_THROWS_AS(parse_tree("((a,b),c", names), ParseError);
  CHECK_THROWS_AS(parse_tree("((a,b),,c);", names), ParseError);
  CHECK_THROWS_AS(parse_tree("((a,b),a);", names), ParseError);
  CHECK_THROWS_AS(parse_tree("(a,b,c);", names), ParseError);
}

TEST_CASE("random trees round trip") {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 100; ++i) {
    LabelNames names;
    Forest F = random_tree(2 + i % 60, i % 2 ? Shape::Uniform : Shape::Yule, rng, names);
    std::string text = serialize(F, names);
    LabelNames other;
    Forest G = parse_tree(text, other);
    CHECK(serialize(G, other) == text);
  }
}
