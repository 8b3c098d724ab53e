#pragma once

#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "rspr/forest.hpp"
#include "rspr/labels.hpp"

namespace rspr {

// Parses one ';'-terminated rooted binary tree. Branch lengths and internal
// labels are dropped with a warning.
Forest parse_tree(std::string_view text, LabelNames& names, std::vector<std::string>* warnings = nullptr);

// Parses any number of ';'-terminated trees into the components of one forest.
Forest parse_forest(std::string_view text, LabelNames& names, std::vector<std::string>* warnings = nullptr);

using LabelNamer = std::function<std::string(LabelId)>;

// Canonical Newick: components and children ordered by smallest leaf name.
std::string serialize(const Forest& F, const LabelNamer& name);
std::string serialize(const Forest& F, const LabelNames& names);

std::string quote_label(const std::string& label);

}  // namespace rspr
