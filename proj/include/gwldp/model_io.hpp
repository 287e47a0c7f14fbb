#pragma once

// JSON model configs and measure files. Every parse error is a ConfigError
// naming the offending field, e.g. `kernel.a[2].prob`.
//
// Model:
//   {
//     "alphabet": ["a", "b"],
//     "root": [0.5, 0.5]            or {"a": 0.5, "b": 0.5},
//     "kernel": {"a": [{"arity": 2, "children": ["a", "b"], "prob": 0.5}, ...], ...}
//   or
//     "law": {"poisson": 1.0, "nmax": 40} | {"kary": 2} | {"uniform": 3} | {"probs": [..]},
//     "transition": [[0.5, 0.5], [0.5, 0.5]],
//     "criticality_tol": 1e-9          (optional)
//   }
//
// Measures:
//   {"pair": [[..], [..]]}
//   {"offspring": [{"type": "a", "children": ["a", "b"], "mass": 0.25}, ...]}
//   {"kgen": {"k": 2, "patterns": {"a(b,a)": 0.5, ...}}}

#include "gwldp/empirical.hpp"
#include "gwldp/model.hpp"

#include <optional>
#include <string>

namespace gwldp {

/// A parsed model file. `law` and `transition` are set when the kernel was
/// given in product form.
struct ModelConfig {
  GWSpec spec;
  std::optional<OffspringLaw> law;
  std::optional<PairKernel> transition;
  std::string description;
};

ModelConfig parse_model_config(const std::string& json_text);
ModelConfig load_model_config(const std::string& path);
GWSpec parse_model(const std::string& json_text);
GWSpec load_model(const std::string& path);

/// Offspring law of an analytic "law" object.
OffspringLaw parse_law(const std::string& json_text);

PairMeasure parse_pair_measure(const std::string& json_text, const TypeAlphabet& alphabet);
OffspringMeasure parse_offspring_measure(const std::string& json_text, const TypeAlphabet& alphabet);
GenMeasureK parse_gen_measure(const std::string& json_text, const TypeAlphabet& alphabet);

std::string read_text_file(const std::string& path);

}  // namespace gwldp
