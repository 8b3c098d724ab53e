#pragma once

#include <cstdint>
#include <memory>
#include <random>
#include <string>

#include "rspr/tfpair.hpp"

namespace rspr {

enum class Shape { Yule, Uniform };

Shape parse_shape(const std::string& text);

struct GenSpec {
  int n_leaves = 10;
  int n_moves = 1;
  std::uint64_t seed = 1;
  Shape shape = Shape::Yule;
};

// Tree over labels x1..xn interned into names (which must be empty or
// already hold exactly those names).
Forest random_tree(int n_leaves, Shape shape, std::mt19937_64& rng, LabelNames& names);

// T at random and F obtained from T by n_moves random rSPR moves.
TFPair gen_pair(const GenSpec& spec);

}  // namespace rspr
