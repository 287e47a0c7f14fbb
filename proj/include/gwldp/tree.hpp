#pragma once

#include "gwldp/model.hpp"

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace gwldp {

/// Finite rooted planar tree with a type on every vertex. Vertex 0 is the
/// root; children are ordered left to right.
class TypedTree {
 public:
  struct Node {
    TypeIndex type = 0;
    std::optional<std::size_t> parent;
    std::vector<std::size_t> children;
  };

  explicit TypedTree(TypeIndex root_type);

  /// Appends a new rightmost child of `parent`, returns its index.
  std::size_t add_child(std::size_t parent, TypeIndex type);

  std::size_t size() const noexcept { return nodes_.size(); }
  std::size_t root() const noexcept { return 0; }
  const Node& node(std::size_t v) const { return nodes_.at(v); }
  const std::vector<Node>& nodes() const noexcept { return nodes_; }
  TypeIndex type(std::size_t v) const { return nodes_.at(v).type; }

  /// C(v): arity and child types left to right.
  OffspringConfig config(std::size_t v) const;
  int height() const;

  /// Parent/child links consistent, single root, every vertex reachable.
  bool valid() const;

  bool operator==(const TypedTree& other) const;

 private:
  std::vector<Node> nodes_;
};

/// Nested parenthesized labels, children left to right: `a(b,a(b,b))`.
std::string serialize(const TypedTree& tree, const TypeAlphabet& alphabet);
/// Same shape with type indices instead of labels; canonical key.
std::string serialize_indices(const TypedTree& tree);

/// Inverse of serialize(). Throws ConfigError on malformed input.
TypedTree parse_tree(std::string_view text, const TypeAlphabet& alphabet);

}  // namespace gwldp
