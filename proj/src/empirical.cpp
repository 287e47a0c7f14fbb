#include "gwldp/empirical.hpp"

#include "gwldp/error.hpp"

#include <cctype>
#include <cmath>
#include <functional>

namespace gwldp {

namespace {

void check_type(TypeIndex a, std::size_t n, const char* what) {
  if (a < 0 || static_cast<std::size_t>(a) >= n)
    throw DomainError(ErrorCode::invalid_measure, std::string(what) + ": type index out of range");
}

}  // namespace

// ---------------------------------------------------------------------------

PairMeasure::PairMeasure(Eigen::MatrixXd m, double tol) : mass(std::move(m)) {
  if (mass.rows() != mass.cols() || mass.rows() == 0)
    throw DomainError(ErrorCode::invalid_measure, "pair measure must be a nonempty square matrix");
  if ((mass.array() < 0.0).any() || !mass.allFinite())
    throw DomainError(ErrorCode::invalid_measure, "pair measure has a negative or non-finite entry");
  if (std::abs(mass.sum() - 1.0) > tol)
    throw DomainError(ErrorCode::invalid_measure, "pair measure does not sum to one");
}

PairCounts pair_counts(const TypedTree& tree, std::size_t num_types) {
  PairCounts out;
  out.num_types = num_types;
  out.cells.assign(num_types * num_types, 0);
  for (std::size_t v = 1; v < tree.size(); ++v) {
    const auto parent = *tree.node(v).parent;
    check_type(tree.type(v), num_types, "pair_counts");
    check_type(tree.type(parent), num_types, "pair_counts");
    ++out.cells[static_cast<std::size_t>(tree.type(parent)) * num_types + static_cast<std::size_t>(tree.type(v))];
    ++out.edges;
  }
  return out;
}

PairMeasure to_measure(const PairCounts& counts) {
  if (counts.edges == 0) throw DomainError(ErrorCode::no_edges, "pair measure of a tree without edges");
  const auto n = static_cast<Eigen::Index>(counts.num_types);
  Eigen::MatrixXd m(n, n);
  for (Eigen::Index a = 0; a < n; ++a)
    for (Eigen::Index b = 0; b < n; ++b)
      m(a, b) = static_cast<double>(counts.at(static_cast<TypeIndex>(a), static_cast<TypeIndex>(b))) /
                static_cast<double>(counts.edges);
  return PairMeasure(std::move(m));
}

PairMeasure pair_measure(const TypedTree& tree, std::size_t num_types) {
  return to_measure(pair_counts(tree, num_types));
}

// ---------------------------------------------------------------------------

OffspringMeasure::OffspringMeasure(std::size_t num_types, std::map<OffspringKey, double> mass, double tol)
    : num_types_(num_types), first_(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(num_types))) {
  double total = 0.0;
  for (auto& [key, w] : mass) {
    check_type(key.type, num_types, "offspring measure");
    for (TypeIndex c : key.config.children) check_type(c, num_types, "offspring measure");
    if (!(w >= 0.0) || !std::isfinite(w))
      throw DomainError(ErrorCode::invalid_measure, "offspring measure has a negative or non-finite atom");
    if (w == 0.0) continue;
    total += w;
    first_(key.type) += w;
    mass_.emplace(key, w);
  }
  if (std::abs(total - 1.0) > tol)
    throw DomainError(ErrorCode::invalid_measure, "offspring measure does not sum to one");
}

double OffspringMeasure::operator()(const OffspringKey& key) const {
  auto it = mass_.find(key);
  return it == mass_.end() ? 0.0 : it->second;
}

OffspringCounts offspring_counts(const TypedTree& tree, std::size_t num_types) {
  OffspringCounts out;
  out.num_types = num_types;
  for (std::size_t v = 0; v < tree.size(); ++v) {
    check_type(tree.type(v), num_types, "offspring_counts");
    ++out.counts[OffspringKey{tree.type(v), tree.config(v)}];
  }
  out.total = static_cast<long long>(tree.size());
  return out;
}

OffspringMeasure to_measure(const OffspringCounts& counts) {
  std::map<OffspringKey, double> m;
  for (const auto& [key, c] : counts.counts)
    m.emplace(key, static_cast<double>(c) / static_cast<double>(counts.total));
  return OffspringMeasure(counts.num_types, std::move(m));
}

OffspringMeasure offspring_measure(const TypedTree& tree, std::size_t num_types) {
  return to_measure(offspring_counts(tree, num_types));
}

std::string offspring_counts_key(const OffspringCounts& counts) {
  std::string out;
  for (const auto& [key, c] : counts.counts) {
    out += std::to_string(key.type);
    out.push_back(':');
    for (std::size_t i = 0; i < key.config.children.size(); ++i) {
      if (i) out.push_back('.');
      out += std::to_string(key.config.children[i]);
    }
    out.push_back('=');
    out += std::to_string(c);
    out.push_back(';');
  }
  return out;
}

OffspringMeasure stationary_offspring_measure(const OffspringKernel& kernel, const Eigen::VectorXd& u) {
  std::map<OffspringKey, double> m;
  for (std::size_t a = 0; a < kernel.num_types(); ++a) {
    const double ua = u(static_cast<Eigen::Index>(a));
    if (ua <= 0.0) continue;
    for (const auto& [c, q] : kernel.row(static_cast<TypeIndex>(a)))
      m.emplace(OffspringKey{static_cast<TypeIndex>(a), c}, ua * q);
  }
  return OffspringMeasure(kernel.num_types(), std::move(m));
}

Eigen::MatrixXd contraction_F(const OffspringMeasure& nu) {
  const auto n = static_cast<Eigen::Index>(nu.num_types());
  Eigen::MatrixXd f = Eigen::MatrixXd::Zero(n, n);
  for (const auto& [key, w] : nu.mass())
    for (TypeIndex b : key.config.children) f(key.type, b) += w;
  return f;
}

std::vector<long long> contraction_F(const OffspringCounts& counts) {
  const auto n = counts.num_types;
  std::vector<long long> f(n * n, 0);
  for (const auto& [key, c] : counts.counts)
    for (TypeIndex b : key.config.children)
      f[static_cast<std::size_t>(key.type) * n + static_cast<std::size_t>(b)] += c;
  return f;
}

Eigen::VectorXd shift_defect(const OffspringMeasure& nu) {
  Eigen::VectorXd d = nu.first_marginal();
  for (const auto& [key, w] : nu.mass())
    for (TypeIndex a : key.config.children) d(a) -= w;
  return d;
}

std::vector<long long> shift_defect(const OffspringCounts& counts) {
  std::vector<long long> d(counts.num_types, 0);
  for (const auto& [key, c] : counts.counts) {
    d[static_cast<std::size_t>(key.type)] += c;
    for (TypeIndex a : key.config.children) d[static_cast<std::size_t>(a)] -= c;
  }
  return d;
}

bool is_shift_invariant(const OffspringMeasure& nu, double tol) {
  return shift_defect(nu).cwiseAbs().maxCoeff() <= tol;
}

// ---------------------------------------------------------------------------

TypeAlphabet index_alphabet(std::size_t num_types) {
  std::vector<std::string> labels;
  for (std::size_t a = 0; a < num_types; ++a) labels.push_back(std::to_string(a));
  return TypeAlphabet(std::move(labels));
}

namespace {

class PatternParser {
 public:
  explicit PatternParser(const std::string& text) : text_(text) {}

  TypedTree parse() {
    TypedTree tree(read_index());
    children(tree, 0);
    if (pos_ != text_.size()) fail();
    return tree;
  }

 private:
  void children(TypedTree& tree, std::size_t v) {
    if (pos_ >= text_.size() || text_[pos_] != '(') return;
    ++pos_;
    while (true) {
      const auto w = tree.add_child(v, read_index());
      children(tree, w);
      if (pos_ >= text_.size()) fail();
      const char ch = text_[pos_++];
      if (ch == ')') return;
      if (ch != ',') fail();
    }
  }

  TypeIndex read_index() {
    const auto start = pos_;
    while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    if (start == pos_) fail();
    return std::stoi(text_.substr(start, pos_ - start));
  }

  [[noreturn]] void fail() const {
    throw ConfigError("pattern@" + std::to_string(pos_), "malformed pattern '" + text_ + "'");
  }

  const std::string& text_;
  std::size_t pos_ = 0;
};

void write_pattern(const TypedTree& t, std::size_t v, int depth_left, std::string& out) {
  out += std::to_string(t.type(v));
  const auto& kids = t.node(v).children;
  if (depth_left == 0 || kids.empty()) return;
  out.push_back('(');
  for (std::size_t i = 0; i < kids.size(); ++i) {
    if (i) out.push_back(',');
    write_pattern(t, kids[i], depth_left - 1, out);
  }
  out.push_back(')');
}

}  // namespace

TypedTree parse_pattern(const std::string& key) { return PatternParser(key).parse(); }

std::string pattern_key(const TypedTree& tree, std::size_t v, int k) {
  std::string out;
  write_pattern(tree, v, k, out);
  return out;
}

std::string truncate_pattern(const std::string& key, int j) { return pattern_key(parse_pattern(key), 0, j); }

std::vector<int> vertex_depths(const TypedTree& tree) {
  std::vector<int> d(tree.size(), 0);
  for (std::size_t v = 1; v < tree.size(); ++v) d[v] = d[*tree.node(v).parent] + 1;
  return d;
}

double GenMeasureK::total() const {
  double s = 0.0;
  for (const auto& [key, w] : mass) s += w;
  return s;
}

GenCounts kgen_counts(const TypedTree& tree, int k) {
  if (k < 1) throw DomainError(ErrorCode::domain, "k-generation measure needs k >= 1");
  GenCounts out;
  out.k = k;
  for (std::size_t v = 0; v < tree.size(); ++v) ++out.counts[pattern_key(tree, v, k)];
  out.total = static_cast<long long>(tree.size());
  return out;
}

GenMeasureK to_measure(const GenCounts& counts) {
  GenMeasureK mu;
  mu.k = counts.k;
  for (const auto& [key, c] : counts.counts)
    mu.mass.emplace(key, static_cast<double>(c) / static_cast<double>(counts.total));
  return mu;
}

GenMeasureK kgen_measure(const TypedTree& tree, int k) { return to_measure(kgen_counts(tree, k)); }

std::string kgen_counts_key(const GenCounts& counts) {
  std::string out;
  for (const auto& [key, c] : counts.counts) out += key + "=" + std::to_string(c) + ";";
  return out;
}

GenMeasureK project(const GenMeasureK& mu, int j) {
  if (j < 0 || j > mu.k) throw DomainError(ErrorCode::domain, "projection depth out of range");
  if (j == mu.k) return mu;
  GenMeasureK out;
  out.k = j;
  for (const auto& [key, w] : mu.mass) out.mass[truncate_pattern(key, j)] += w;
  return out;
}

GenMeasureK extend_generation(const GenMeasureK& mu, const OffspringKernel& kernel) {
  GenMeasureK out;
  out.k = mu.k + 1;
  for (const auto& [key, w] : mu.mass) {
    if (w <= 0.0) continue;
    const TypedTree base = parse_pattern(key);
    const auto depth = vertex_depths(base);
    std::vector<std::size_t> frontier;
    for (std::size_t v = 0; v < base.size(); ++v)
      if (depth[v] == mu.k) frontier.push_back(v);

    std::function<void(std::size_t, const TypedTree&, double)> grow = [&](std::size_t i, const TypedTree& t,
                                                                          double p) {
      if (i == frontier.size()) {
        out.mass[serialize_indices(t)] += p;
        return;
      }
      const std::size_t v = frontier[i];
      for (const auto& [c, q] : kernel.row(t.type(v))) {
        TypedTree next = t;
        for (TypeIndex child : c.children) next.add_child(v, child);
        grow(i + 1, next, p * q);
      }
    };
    grow(0, base, w);
  }
  return out;
}

GenMeasureK stationary_gen_measure(const OffspringKernel& kernel, const Eigen::VectorXd& u, int k) {
  GenMeasureK mu;
  mu.k = 0;
  for (Eigen::Index a = 0; a < u.size(); ++a)
    if (u(a) > 0.0) mu.mass[std::to_string(a)] = u(a);
  for (int j = 0; j < k; ++j) mu = extend_generation(mu, kernel);
  return mu;
}

std::map<std::string, double> shift_defect_k(const GenMeasureK& mu) {
  if (mu.k < 1) throw DomainError(ErrorCode::domain, "shift defect needs k >= 1");
  std::map<std::string, double> d;
  for (const auto& [key, w] : mu.mass) {
    const TypedTree t = parse_pattern(key);
    d[pattern_key(t, 0, mu.k - 1)] += w;
    for (std::size_t v : t.node(0).children) d[pattern_key(t, v, mu.k - 1)] -= w;
  }
  return d;
}

bool is_shift_invariant(const GenMeasureK& mu, double tol) {
  for (const auto& [key, v] : shift_defect_k(mu))
    if (std::abs(v) > tol) return false;
  return true;
}

GenMeasureK to_gen_measure(const OffspringMeasure& nu) {
  GenMeasureK mu;
  mu.k = 1;
  for (const auto& [key, w] : nu.mass()) {
    TypedTree t(key.type);
    for (TypeIndex c : key.config.children) t.add_child(0, c);
    mu.mass[serialize_indices(t)] += w;
  }
  return mu;
}

OffspringMeasure to_offspring_measure(const GenMeasureK& mu, std::size_t num_types) {
  if (mu.k != 1) throw DomainError(ErrorCode::domain, "offspring measure needs a depth-1 pattern measure");
  std::map<OffspringKey, double> m;
  for (const auto& [key, w] : mu.mass) {
    const TypedTree t = parse_pattern(key);
    m[OffspringKey{t.type(0), t.config(0)}] += w;
  }
  return OffspringMeasure(num_types, std::move(m));
}

}  // namespace gwldp
