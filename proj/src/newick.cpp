#include "rspr/newick.hpp"

#include <algorithm>
#include <unordered_set>

namespace rspr {

namespace {

constexpr std::string_view kSpecial = "()[]':;,";

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r'; }

class Parser {
 public:
  Parser(std::string_view text, LabelNames& names, std::vector<std::string>* warnings)
      : s_(text), names_(names), warnings_(warnings) {}

  Forest run(bool single) {
    skip();
    if (pos_ >= s_.size()) throw ParseError("empty input", pos_);
    int trees = 0;
    while (true) {
      skip();
      if (pos_ >= s_.size()) break;
      if (single && trees == 1) throw ParseError("more than one tree", pos_);
      if (peek() == ';') throw ParseError("empty tree", pos_);
      subtree(kNoVertex);
      skip();
      if (pos_ >= s_.size() || peek() != ';') throw ParseError("expected ';'", pos_);
      ++pos_;
      ++trees;
    }
    if (trees == 0) throw ParseError("empty input", pos_);
    if (dropped_lengths_ && warnings_) warnings_->push_back("branch lengths ignored");
    if (dropped_internal_ && warnings_) warnings_->push_back("internal node labels ignored");
    out_.seal();
    return std::move(out_);
  }

 private:
  char peek() const { return s_[pos_]; }

  void skip() {
    while (pos_ < s_.size()) {
      char c = s_[pos_];
      if (is_space(c)) {
        ++pos_;
      } else if (c == '#' && at_line_start()) {
        while (pos_ < s_.size() && s_[pos_] != '\n') ++pos_;
      } else if (c == '[') {
        std::size_t start = pos_;
        while (pos_ < s_.size() && s_[pos_] != ']') ++pos_;
        if (pos_ >= s_.size()) throw ParseError("unterminated comment", start);
        ++pos_;
      } else {
        break;
      }
    }
  }

  bool at_line_start() const {
    for (std::size_t i = pos_; i > 0; --i) {
      char c = s_[i - 1];
      if (c == '\n') return true;
      if (c != ' ' && c != '\t' && c != '\r') return false;
    }
    return true;
  }

  // Returns the label text and whether one was present.
  bool label(std::string& out) {
    skip();
    out.clear();
    if (pos_ >= s_.size()) return false;
    if (peek() == '\'') {
      std::size_t start = pos_++;
      while (true) {
        if (pos_ >= s_.size()) throw ParseError("unterminated quoted label", start);
        char c = s_[pos_++];
        if (c == '\'') {
          if (pos_ < s_.size() && s_[pos_] == '\'') {
            out.push_back('\'');
            ++pos_;
          } else {
            break;
          }
        } else {
          out.push_back(c);
        }
      }
      return true;
    }
    std::size_t start = pos_;
    while (pos_ < s_.size() && !is_space(s_[pos_]) && kSpecial.find(s_[pos_]) == std::string_view::npos) ++pos_;
    out.assign(s_.substr(start, pos_ - start));
    return pos_ > start;
  }

  void length() {
    skip();
    if (pos_ < s_.size() && peek() == ':') {
      ++pos_;
      skip();
      std::size_t start = pos_;
      while (pos_ < s_.size() && !is_space(s_[pos_]) && kSpecial.find(s_[pos_]) == std::string_view::npos) ++pos_;
      if (pos_ == start) throw ParseError("missing branch length", start);
      dropped_lengths_ = true;
    }
  }

  VertexId subtree(VertexId parent) {
    skip();
    if (pos_ >= s_.size()) throw ParseError("unexpected end of input", pos_);
    std::size_t start = pos_;
    VertexId v;
    if (peek() == '(') {
      ++pos_;
      v = out_.add_vertex();
      std::vector<VertexId> kids;
      while (true) {
        kids.push_back(subtree(kNoVertex));
        skip();
        if (pos_ >= s_.size()) throw ParseError("unexpected end of input", pos_);
        if (peek() == ',') {
          ++pos_;
          continue;
        }
        if (peek() == ')') {
          ++pos_;
          break;
        }
        throw ParseError(std::string("unexpected character '") + peek() + "'", pos_);
      }
      if (kids.size() > 2) throw ParseError("multifurcation", start);
      if (kids.size() < 2) throw ParseError("vertex with a single child", start);
      for (VertexId k : kids) out_.attach(v, k);
      std::string name;
      if (label(name)) dropped_internal_ = true;
    } else {
      std::string name;
      if (!label(name)) {
        if (pos_ < s_.size()) throw ParseError(std::string("unexpected character '") + peek() + "'", pos_);
        throw ParseError("unexpected end of input", pos_);
      }
      if (!seen_.insert(name).second) throw ParseError("duplicate leaf label '" + name + "'", start);
      v = out_.add_vertex(names_.intern(name));
    }
    length();
    if (parent != kNoVertex) out_.attach(parent, v);
    return v;
  }

  std::string_view s_;
  LabelNames& names_;
  std::vector<std::string>* warnings_;
  std::size_t pos_ = 0;
  Forest out_;
  std::unordered_set<std::string> seen_;
  bool dropped_lengths_ = false;
  bool dropped_internal_ = false;
};

}  // namespace

Forest parse_tree(std::string_view text, LabelNames& names, std::vector<std::string>* warnings) {
  return Parser(text, names, warnings).run(true);
}

Forest parse_forest(std::string_view text, LabelNames& names, std::vector<std::string>* warnings) {
  return Parser(text, names, warnings).run(false);
}

std::string quote_label(const std::string& label) {
  bool plain = !label.empty();
  for (char c : label) {
    if (is_space(c) || kSpecial.find(c) != std::string_view::npos || c == '#') plain = false;
  }
  if (plain) return label;
  std::string out = "'";
  for (char c : label) {
    out.push_back(c);
    if (c == '\'') out.push_back('\'');
  }
  out.push_back('\'');
  return out;
}

std::string serialize(const Forest& F, const LabelNamer& name) {
  std::vector<std::string> least(F.size());
  for (VertexId v : F.postorder()) {
    if (F.is_leaf(v)) {
      least[v] = F.label(v) == kNoLabel ? std::string() : name(F.label(v));
    } else {
      least[v] = least[F.children(v)[0]];
      for (VertexId c : F.children(v)) least[v] = std::min(least[v], least[c]);
    }
  }
  auto by_least = [&](VertexId a, VertexId b) { return least[a] < least[b]; };
  std::string out;
  auto emit = [&](auto&& self, VertexId v) -> void {
    if (F.is_leaf(v)) {
      if (F.label(v) != kNoLabel) out += quote_label(name(F.label(v)));
      return;
    }
    std::vector<VertexId> kids(F.children(v).begin(), F.children(v).end());
    std::sort(kids.begin(), kids.end(), by_least);
    out.push_back('(');
    for (std::size_t i = 0; i < kids.size(); ++i) {
      if (i) out.push_back(',');
      self(self, kids[i]);
    }
    out.push_back(')');
  };
  std::vector<VertexId> roots = F.roots();
  std::sort(roots.begin(), roots.end(), by_least);
  for (VertexId r : roots) {
    emit(emit, r);
    out += ";\n";
  }
  return out;
}

std::string serialize(const Forest& F, const LabelNames& names) {
  return serialize(F, [&](LabelId l) { return names.name(l); });
}

}  // namespace rspr
