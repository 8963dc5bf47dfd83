#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace spbopt {

enum class ParamKind { kReal, kInteger, kCategorical, kBoolean };
enum class Warp { kLinear, kLog, kLogit, kBilog };

// One typed parameter. Reals and integers carry an inclusive numeric range
// and a warp; categoricals carry an ordered category list; booleans carry
// nothing extra.
struct ParamSpec {
  std::string name;
  ParamKind kind = ParamKind::kReal;
  Warp warp = Warp::kLinear;
  double lo = 0.0;
  double hi = 1.0;
  std::vector<std::string> categories;

  static ParamSpec real(std::string name, double lo, double hi,
                        Warp warp = Warp::kLinear);
  static ParamSpec integer(std::string name, std::int64_t lo, std::int64_t hi,
                           Warp warp = Warp::kLinear);
  static ParamSpec categorical(std::string name,
                               std::vector<std::string> categories);
  static ParamSpec boolean(std::string name);
};

using ParamValue = std::variant<double, std::int64_t, std::string, bool>;
using Assignment = std::map<std::string, ParamValue>;

class SpaceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Validated parameter space with a bijective encoding onto the unit
// hypercube. Reals, integers and booleans occupy one coordinate each;
// a categorical with m categories occupies an m-wide one-hot block.
// Immutable after validation; safe to share across threads.
class SpaceDefinition {
 public:
  SpaceDefinition() = default;  // empty space; populate via validate_space

  const std::vector<ParamSpec>& params() const { return params_; }
  int encoded_dim() const { return encoded_dim_; }
  // First unit-cube coordinate of parameter i.
  int offset(std::size_t i) const { return offsets_[i]; }

  // Encodes an in-bounds assignment into [0,1]^encoded_dim.
  // linear: (x-lo)/(hi-lo); log: on ln x; logit: on ln(x/(1-x));
  // bilog: on sign(x)*ln(1+|x|); categorical: one-hot; boolean: {0,1}.
  Eigen::VectorXd warp(const Assignment& x) const;

  // Inverse of warp. Integers round half away from zero then clamp;
  // booleans threshold at 0.5; categoricals decode by argmax over their
  // one-hot block with ties going to the lowest index.
  Assignment unwarp(const Eigen::VectorXd& u) const;

  friend SpaceDefinition validate_space(std::vector<ParamSpec> specs);

 private:
  std::vector<ParamSpec> params_;
  std::vector<int> offsets_;
  int encoded_dim_ = 0;
};

// Checks every spec invariant (unique names, ordered bounds, warp/bound
// compatibility, >= 2 distinct categories) and computes the encoding layout.
// Throws SpaceError on any violation.
SpaceDefinition validate_space(std::vector<ParamSpec> specs);

// Parses a space definition from JSON text of the form
//   {"x": {"type": "real", "space": "log", "range": [1, 1000]},
//    "c": {"type": "cat", "values": ["a", "b"]},
//    "b": {"type": "bool"}}
// Parameter order follows the order of keys in the file.
SpaceDefinition space_from_json_text(const std::string& text);

// One evaluated point: unit-cube coordinates, the original-space
// assignment and the observed objective value.
struct Observation {
  Eigen::VectorXd u;
  Assignment x;
  double y = 0.0;
};

}  // namespace spbopt
