#include "gwldp/model_io.hpp"

#include "gwldp/error.hpp"

#include <json.hpp>

#include <fstream>
#include <set>
#include <sstream>

namespace gwldp {

using nlohmann::json;

namespace {

json parse_json(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("", std::string("invalid JSON: ") + e.what());
  }
}

void only_fields(const json& obj, const std::string& path, std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) throw ConfigError(path.empty() ? "<root>" : path, "expected an object");
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, value] : obj.items())
    if (!ok.count(key)) throw ConfigError(path.empty() ? key : path + "." + key, "unknown field");
}

const json& require(const json& obj, const char* key, const std::string& path) {
  auto it = obj.find(key);
  if (it == obj.end()) throw ConfigError(path.empty() ? key : path + "." + key, "missing field");
  return *it;
}

double number(const json& v, const std::string& path) {
  if (!v.is_number()) throw ConfigError(path, "expected a number");
  return v.get<double>();
}

int integer(const json& v, const std::string& path) {
  if (!v.is_number_integer()) throw ConfigError(path, "expected an integer");
  return v.get<int>();
}

std::string text(const json& v, const std::string& path) {
  if (!v.is_string()) throw ConfigError(path, "expected a string");
  return v.get<std::string>();
}

TypeIndex type_of(const json& v, const TypeAlphabet& alphabet, const std::string& path) {
  const auto label = text(v, path);
  auto idx = alphabet.find(label);
  if (!idx) throw ConfigError(path, "unknown type label '" + label + "'");
  return *idx;
}

/// Rethrows model-construction failures as config errors at `path`.
template <class F>
auto at_path(const std::string& path, F&& f) {
  try {
    return f();
  } catch (const DomainError& e) {
    throw ConfigError(path, e.what());
  }
}

TypeAlphabet read_alphabet(const json& root) {
  const json& a = require(root, "alphabet", "");
  if (!a.is_array()) throw ConfigError("alphabet", "expected an array of labels");
  std::vector<std::string> labels;
  for (std::size_t i = 0; i < a.size(); ++i) labels.push_back(text(a[i], "alphabet[" + std::to_string(i) + "]"));
  return at_path("alphabet", [&] { return TypeAlphabet(labels); });
}

Eigen::VectorXd read_root(const json& v, const TypeAlphabet& alphabet) {
  Eigen::VectorXd root = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(alphabet.size()));
  if (v.is_array()) {
    if (v.size() != alphabet.size()) throw ConfigError("root", "length differs from the alphabet");
    for (std::size_t i = 0; i < v.size(); ++i)
      root(static_cast<Eigen::Index>(i)) = number(v[i], "root[" + std::to_string(i) + "]");
  } else if (v.is_object()) {
    for (const auto& [label, w] : v.items()) {
      auto idx = alphabet.find(label);
      if (!idx) throw ConfigError("root." + label, "unknown type label");
      root(*idx) = number(w, "root." + label);
    }
  } else {
    throw ConfigError("root", "expected an array or an object");
  }
  return root;
}

OffspringLaw read_law(const json& v, const std::string& path) {
  only_fields(v, path, {"poisson", "nmax", "kary", "uniform", "probs"});
  int kinds = 0;
  for (const char* k : {"poisson", "kary", "uniform", "probs"}) kinds += v.contains(k) ? 1 : 0;
  if (kinds != 1) throw ConfigError(path, "exactly one of poisson, kary, uniform, probs is required");
  return at_path(path, [&] {
    if (v.contains("poisson")) {
      const int nmax = v.contains("nmax") ? integer(v["nmax"], path + ".nmax") : 40;
      return OffspringLaw::poisson(number(v["poisson"], path + ".poisson"), nmax);
    }
    if (v.contains("nmax")) throw ConfigError(path + ".nmax", "only used with poisson");
    if (v.contains("kary")) return OffspringLaw::kary(integer(v["kary"], path + ".kary"));
    if (v.contains("uniform")) return OffspringLaw::uniform(integer(v["uniform"], path + ".uniform"));
    const json& p = v["probs"];
    if (!p.is_array()) throw ConfigError(path + ".probs", "expected an array");
    std::vector<double> probs;
    for (std::size_t i = 0; i < p.size(); ++i) probs.push_back(number(p[i], path + ".probs[" + std::to_string(i) + "]"));
    return OffspringLaw::from_probs(probs);
  });
}

OffspringKernel read_kernel(const json& v, const TypeAlphabet& alphabet) {
  if (!v.is_object()) throw ConfigError("kernel", "expected an object keyed by type label");
  std::vector<OffspringKernel::Row> rows(alphabet.size());
  for (const auto& [label, entries] : v.items()) {
    const std::string path = "kernel." + label;
    auto idx = alphabet.find(label);
    if (!idx) throw ConfigError(path, "unknown type label");
    if (!entries.is_array()) throw ConfigError(path, "expected an array of configs");
    for (std::size_t i = 0; i < entries.size(); ++i) {
      const std::string ep = path + "[" + std::to_string(i) + "]";
      const json& e = entries[i];
      only_fields(e, ep, {"arity", "children", "prob"});
      const json& kids = require(e, "children", ep);
      if (!kids.is_array()) throw ConfigError(ep + ".children", "expected an array of labels");
      OffspringConfig c;
      for (std::size_t j = 0; j < kids.size(); ++j)
        c.children.push_back(type_of(kids[j], alphabet, ep + ".children[" + std::to_string(j) + "]"));
      if (e.contains("arity") && integer(e["arity"], ep + ".arity") != static_cast<int>(c.arity()))
        throw ConfigError(ep + ".arity", "does not match the number of children");
      const double prob = number(require(e, "prob", ep), ep + ".prob");
      if (!(prob >= 0.0 && prob <= 1.0)) throw ConfigError(ep + ".prob", "must lie in [0, 1]");
      auto& row = rows[static_cast<std::size_t>(*idx)];
      if (row.count(c)) throw ConfigError(ep, "duplicate config");
      row.emplace(std::move(c), prob);
    }
  }
  return at_path("kernel", [&] { return OffspringKernel(alphabet.size(), std::move(rows)); });
}

}  // namespace

OffspringLaw parse_law(const std::string& json_text) { return read_law(parse_json(json_text), "law"); }

ModelConfig parse_model_config(const std::string& json_text) {
  const json root = parse_json(json_text);
  only_fields(root, "", {"alphabet", "root", "kernel", "law", "transition", "criticality_tol", "description"});
  const TypeAlphabet alphabet = read_alphabet(root);
  const Eigen::VectorXd mu = read_root(require(root, "root", ""), alphabet);
  const double tol = root.contains("criticality_tol") ? number(root["criticality_tol"], "criticality_tol") : 1e-9;

  std::optional<OffspringKernel> kernel;
  std::optional<OffspringLaw> law_out;
  std::optional<PairKernel> transition_out;
  if (root.contains("kernel")) {
    if (root.contains("law") || root.contains("transition"))
      throw ConfigError("kernel", "give either kernel or law/transition, not both");
    kernel.emplace(read_kernel(root["kernel"], alphabet));
  } else if (root.contains("law")) {
    const OffspringLaw law = read_law(root["law"], "law");
    const auto n = static_cast<Eigen::Index>(alphabet.size());
    Eigen::MatrixXd q = Eigen::MatrixXd::Ones(1, 1);
    if (root.contains("transition")) {
      const json& t = root["transition"];
      if (!t.is_array() || t.size() != alphabet.size()) throw ConfigError("transition", "expected |X| rows");
      q.resize(n, n);
      for (Eigen::Index a = 0; a < n; ++a) {
        const json& r = t[static_cast<std::size_t>(a)];
        const std::string rp = "transition[" + std::to_string(a) + "]";
        if (!r.is_array() || r.size() != alphabet.size()) throw ConfigError(rp, "expected |X| entries");
        for (Eigen::Index b = 0; b < n; ++b)
          q(a, b) = number(r[static_cast<std::size_t>(b)], rp + "[" + std::to_string(b) + "]");
      }
    } else if (n != 1) {
      throw ConfigError("transition", "missing field (required with more than one type)");
    }
    const PairKernel pk = at_path("transition", [&] { return PairKernel(q); });
    kernel.emplace(at_path("law", [&] { return product_kernel(law, pk); }));
    law_out.emplace(law);
    transition_out.emplace(pk);
  } else {
    throw ConfigError("kernel", "missing field (or law/transition)");
  }
  GWSpec spec = at_path("root", [&] { return GWSpec(alphabet, mu, std::move(*kernel), tol); });
  std::string description;
  if (root.contains("description")) description = text(root["description"], "description");
  return {std::move(spec), std::move(law_out), std::move(transition_out), std::move(description)};
}

GWSpec parse_model(const std::string& json_text) { return parse_model_config(json_text).spec; }

std::string read_text_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path, "cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

GWSpec load_model(const std::string& path) { return parse_model(read_text_file(path)); }

ModelConfig load_model_config(const std::string& path) { return parse_model_config(read_text_file(path)); }

PairMeasure parse_pair_measure(const std::string& json_text, const TypeAlphabet& alphabet) {
  const json root = parse_json(json_text);
  only_fields(root, "", {"pair"});
  const json& m = require(root, "pair", "");
  const auto n = static_cast<Eigen::Index>(alphabet.size());
  if (!m.is_array() || m.size() != alphabet.size()) throw ConfigError("pair", "expected |X| rows");
  Eigen::MatrixXd mass(n, n);
  for (Eigen::Index a = 0; a < n; ++a) {
    const json& r = m[static_cast<std::size_t>(a)];
    const std::string rp = "pair[" + std::to_string(a) + "]";
    if (!r.is_array() || r.size() != alphabet.size()) throw ConfigError(rp, "expected |X| entries");
    for (Eigen::Index b = 0; b < n; ++b) mass(a, b) = number(r[static_cast<std::size_t>(b)], rp + "[" + std::to_string(b) + "]");
  }
  return at_path("pair", [&] { return PairMeasure(mass); });
}

OffspringMeasure parse_offspring_measure(const std::string& json_text, const TypeAlphabet& alphabet) {
  const json root = parse_json(json_text);
  only_fields(root, "", {"offspring"});
  const json& atoms = require(root, "offspring", "");
  if (!atoms.is_array()) throw ConfigError("offspring", "expected an array of atoms");
  std::map<OffspringKey, double> mass;
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    const std::string ap = "offspring[" + std::to_string(i) + "]";
    const json& e = atoms[i];
    only_fields(e, ap, {"type", "children", "mass"});
    OffspringKey key;
    key.type = type_of(require(e, "type", ap), alphabet, ap + ".type");
    const json& kids = require(e, "children", ap);
    if (!kids.is_array()) throw ConfigError(ap + ".children", "expected an array of labels");
    for (std::size_t j = 0; j < kids.size(); ++j)
      key.config.children.push_back(type_of(kids[j], alphabet, ap + ".children[" + std::to_string(j) + "]"));
    mass[key] += number(require(e, "mass", ap), ap + ".mass");
  }
  return at_path("offspring", [&] { return OffspringMeasure(alphabet.size(), std::move(mass)); });
}

GenMeasureK parse_gen_measure(const std::string& json_text, const TypeAlphabet& alphabet) {
  const json root = parse_json(json_text);
  only_fields(root, "", {"kgen"});
  const json& g = require(root, "kgen", "");
  only_fields(g, "kgen", {"k", "patterns"});
  GenMeasureK mu;
  mu.k = integer(require(g, "k", "kgen"), "kgen.k");
  if (mu.k < 1) throw ConfigError("kgen.k", "must be at least 1");
  const json& pats = require(g, "patterns", "kgen");
  if (!pats.is_object()) throw ConfigError("kgen.patterns", "expected an object pattern -> mass");
  double total = 0.0;
  for (const auto& [pattern, w] : pats.items()) {
    const std::string pp = "kgen.patterns." + pattern;
    const TypedTree t = parse_tree(pattern, alphabet);
    if (t.height() > mu.k) throw ConfigError(pp, "pattern deeper than k");
    const double m = number(w, pp);
    if (!(m >= 0.0)) throw ConfigError(pp, "mass must be nonnegative");
    mu.mass[serialize_indices(t)] += m;
    total += m;
  }
  if (std::abs(total - 1.0) > 1e-9) throw ConfigError("kgen.patterns", "masses do not sum to one");
  return mu;
}

}  // namespace gwldp
