#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include "rspr/types.hpp"

namespace rspr {

// Interns leaf names to dense label ids shared by every forest of a pair.
class LabelNames {
 public:
  LabelId intern(const std::string& name);
  LabelId find(const std::string& name) const;
  const std::string& name(LabelId id) const { return names_.at(static_cast<std::size_t>(id)); }
  LabelId size() const { return static_cast<LabelId>(names_.size()); }

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, LabelId> ids_;
};

}  // namespace rspr
