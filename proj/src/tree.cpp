#include "gwldp/tree.hpp"

#include "gwldp/error.hpp"

#include <algorithm>
#include <cctype>
#include <functional>

namespace gwldp {

TypedTree::TypedTree(TypeIndex root_type) { nodes_.push_back(Node{root_type, std::nullopt, {}}); }

std::size_t TypedTree::add_child(std::size_t parent, TypeIndex type) {
  const std::size_t v = nodes_.size();
  nodes_.at(parent).children.push_back(v);
  nodes_.push_back(Node{type, parent, {}});
  return v;
}

OffspringConfig TypedTree::config(std::size_t v) const {
  OffspringConfig c;
  const auto& kids = nodes_.at(v).children;
  c.children.reserve(kids.size());
  for (std::size_t w : kids) c.children.push_back(nodes_[w].type);
  return c;
}

int TypedTree::height() const {
  std::vector<int> depth(nodes_.size(), 0);
  int h = 0;
  // children always have larger indices than their parent
  for (std::size_t v = 1; v < nodes_.size(); ++v) {
    depth[v] = depth[*nodes_[v].parent] + 1;
    h = std::max(h, depth[v]);
  }
  return h;
}

bool TypedTree::valid() const {
  if (nodes_.empty() || nodes_[0].parent) return false;
  std::size_t edges = 0;
  for (std::size_t v = 0; v < nodes_.size(); ++v) {
    if (v > 0) {
      if (!nodes_[v].parent || *nodes_[v].parent >= v) return false;
      const auto& sib = nodes_[*nodes_[v].parent].children;
      if (std::count(sib.begin(), sib.end(), v) != 1) return false;
    }
    for (std::size_t w : nodes_[v].children) {
      if (w >= nodes_.size() || nodes_[w].parent != v) return false;
      ++edges;
    }
  }
  return edges + 1 == nodes_.size();
}

bool TypedTree::operator==(const TypedTree& other) const {
  return serialize_indices(*this) == serialize_indices(other);
}

namespace {

void write(const TypedTree& t, std::size_t v, const std::function<void(TypeIndex, std::string&)>& label,
           std::string& out) {
  label(t.type(v), out);
  const auto& kids = t.node(v).children;
  if (kids.empty()) return;
  out.push_back('(');
  for (std::size_t i = 0; i < kids.size(); ++i) {
    if (i) out.push_back(',');
    write(t, kids[i], label, out);
  }
  out.push_back(')');
}

}  // namespace

std::string serialize(const TypedTree& tree, const TypeAlphabet& alphabet) {
  std::string out;
  write(tree, 0, [&](TypeIndex a, std::string& s) { s += alphabet.label(a); }, out);
  return out;
}

std::string serialize_indices(const TypedTree& tree) {
  std::string out;
  write(tree, 0, [](TypeIndex a, std::string& s) { s += std::to_string(a); }, out);
  return out;
}

namespace {

class TreeParser {
 public:
  TreeParser(std::string_view text, const TypeAlphabet& alphabet) : text_(text), alphabet_(alphabet) {}

  TypedTree parse() {
    skip_space();
    TypedTree tree(read_label());
    parse_children(tree, 0);
    skip_space();
    if (pos_ != text_.size()) fail("trailing characters");
    return tree;
  }

 private:
  void parse_children(TypedTree& tree, std::size_t v) {
    skip_space();
    if (pos_ >= text_.size() || text_[pos_] != '(') return;
    ++pos_;
    while (true) {
      skip_space();
      const std::size_t child = tree.add_child(v, read_label());
      parse_children(tree, child);
      skip_space();
      if (pos_ >= text_.size()) fail("unterminated child list");
      if (text_[pos_] == ',') {
        ++pos_;
        continue;
      }
      if (text_[pos_] == ')') {
        ++pos_;
        return;
      }
      fail("expected ',' or ')'");
    }
  }

  TypeIndex read_label() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() && text_[pos_] != '(' && text_[pos_] != ')' && text_[pos_] != ',' &&
           !std::isspace(static_cast<unsigned char>(text_[pos_])))
      ++pos_;
    if (start == pos_) fail("expected a type label");
    const auto label = text_.substr(start, pos_ - start);
    auto idx = alphabet_.find(label);
    if (!idx) fail("unknown type label '" + std::string(label) + "'");
    return *idx;
  }

  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  [[noreturn]] void fail(const std::string& msg) const {
    throw ConfigError("tree@" + std::to_string(pos_), msg);
  }

  std::string_view text_;
  const TypeAlphabet& alphabet_;
  std::size_t pos_ = 0;
};

}  // namespace

TypedTree parse_tree(std::string_view text, const TypeAlphabet& alphabet) {
  return TreeParser(text, alphabet).parse();
}

}  // namespace gwldp
