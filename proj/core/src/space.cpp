#include "spbopt/space.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <nlohmann/json.hpp>

namespace spbopt {
namespace {

double forward_transform(Warp warp, double x) {
  switch (warp) {
    case Warp::kLinear:
      return x;
    case Warp::kLog:
      return std::log(x);
    case Warp::kLogit:
      return std::log(x / (1.0 - x));
    case Warp::kBilog:
      return std::copysign(std::log1p(std::abs(x)), x);
  }
  throw SpaceError("unknown warp");
}

double inverse_transform(Warp warp, double v) {
  switch (warp) {
    case Warp::kLinear:
      return v;
    case Warp::kLog:
      return std::exp(v);
    case Warp::kLogit:
      return 1.0 / (1.0 + std::exp(-v));
    case Warp::kBilog:
      return std::copysign(std::expm1(std::abs(v)), v);
  }
  throw SpaceError("unknown warp");
}

double numeric_value(const ParamSpec& spec, const ParamValue& value) {
  if (std::holds_alternative<double>(value)) return std::get<double>(value);
  if (std::holds_alternative<std::int64_t>(value)) {
    return static_cast<double>(std::get<std::int64_t>(value));
  }
  throw SpaceError("parameter '" + spec.name + "' expects a numeric value");
}

}  // namespace

ParamSpec ParamSpec::real(std::string name, double lo, double hi, Warp warp) {
  ParamSpec spec;
  spec.name = std::move(name);
  spec.kind = ParamKind::kReal;
  spec.warp = warp;
  spec.lo = lo;
  spec.hi = hi;
  return spec;
}

ParamSpec ParamSpec::integer(std::string name, std::int64_t lo, std::int64_t hi,
                             Warp warp) {
  ParamSpec spec;
  spec.name = std::move(name);
  spec.kind = ParamKind::kInteger;
  spec.warp = warp;
  spec.lo = static_cast<double>(lo);
  spec.hi = static_cast<double>(hi);
  return spec;
}

ParamSpec ParamSpec::categorical(std::string name,
                                 std::vector<std::string> categories) {
  ParamSpec spec;
  spec.name = std::move(name);
  spec.kind = ParamKind::kCategorical;
  spec.categories = std::move(categories);
  return spec;
}

ParamSpec ParamSpec::boolean(std::string name) {
  ParamSpec spec;
  spec.name = std::move(name);
  spec.kind = ParamKind::kBoolean;
  return spec;
}

SpaceDefinition validate_space(std::vector<ParamSpec> specs) {
  if (specs.empty()) throw SpaceError("space needs at least one parameter");

  std::set<std::string> names;
  int dim = 0;
  std::vector<int> offsets;
  offsets.reserve(specs.size());

  for (const ParamSpec& spec : specs) {
    if (spec.name.empty()) throw SpaceError("parameter name must be non-empty");
    if (!names.insert(spec.name).second) {
      throw SpaceError("duplicate parameter name '" + spec.name + "'");
    }
    offsets.push_back(dim);

    switch (spec.kind) {
      case ParamKind::kReal:
      case ParamKind::kInteger: {
        if (!std::isfinite(spec.lo) || !std::isfinite(spec.hi)) {
          throw SpaceError("'" + spec.name + "': bounds must be finite");
        }
        const bool integer = spec.kind == ParamKind::kInteger;
        if (integer) {
          if (spec.lo != std::floor(spec.lo) || spec.hi != std::floor(spec.hi)) {
            throw SpaceError("'" + spec.name + "': integer bounds must be integral");
          }
          if (spec.lo > spec.hi) {
            throw SpaceError("'" + spec.name + "': lo > hi");
          }
        } else if (!(spec.lo < spec.hi)) {
          throw SpaceError("'" + spec.name + "': lo must be < hi");
        }
        if (spec.warp == Warp::kLog && spec.lo <= 0.0) {
          throw SpaceError("'" + spec.name + "': log warp requires lo > 0");
        }
        if (spec.warp == Warp::kLogit &&
            !(0.0 < spec.lo && spec.hi < 1.0)) {
          throw SpaceError("'" + spec.name +
                           "': logit warp requires bounds inside (0,1)");
        }
        dim += 1;
        break;
      }
      case ParamKind::kCategorical: {
        if (spec.warp != Warp::kLinear) {
          throw SpaceError("'" + spec.name + "': categorical takes no warp");
        }
        if (spec.categories.size() < 2) {
          throw SpaceError("'" + spec.name + "': needs >= 2 categories");
        }
        std::set<std::string> unique(spec.categories.begin(),
                                     spec.categories.end());
        if (unique.size() != spec.categories.size()) {
          throw SpaceError("'" + spec.name + "': duplicate categories");
        }
        dim += static_cast<int>(spec.categories.size());
        break;
      }
      case ParamKind::kBoolean: {
        if (spec.warp != Warp::kLinear) {
          throw SpaceError("'" + spec.name + "': boolean takes no warp");
        }
        dim += 1;
        break;
      }
    }
  }

  SpaceDefinition space;
  space.params_ = std::move(specs);
  space.offsets_ = std::move(offsets);
  space.encoded_dim_ = dim;
  return space;
}

Eigen::VectorXd SpaceDefinition::warp(const Assignment& x) const {
  Eigen::VectorXd u(encoded_dim_);
  for (std::size_t i = 0; i < params_.size(); ++i) {
    const ParamSpec& spec = params_[i];
    const auto it = x.find(spec.name);
    if (it == x.end()) {
      throw SpaceError("missing value for parameter '" + spec.name + "'");
    }
    const int at = offsets_[i];

    switch (spec.kind) {
      case ParamKind::kReal:
      case ParamKind::kInteger: {
        const double v = numeric_value(spec, it->second);
        if (v < spec.lo || v > spec.hi) {
          throw SpaceError("'" + spec.name + "': value out of bounds");
        }
        const double t_lo = forward_transform(spec.warp, spec.lo);
        const double t_hi = forward_transform(spec.warp, spec.hi);
        // Degenerate single-value integer range maps to mid-cube.
        u[at] = t_hi > t_lo
                    ? (forward_transform(spec.warp, v) - t_lo) / (t_hi - t_lo)
                    : 0.5;
        u[at] = std::clamp(u[at], 0.0, 1.0);
        break;
      }
      case ParamKind::kCategorical: {
        if (!std::holds_alternative<std::string>(it->second)) {
          throw SpaceError("'" + spec.name + "' expects a category string");
        }
        const std::string& cat = std::get<std::string>(it->second);
        const auto pos = std::find(spec.categories.begin(),
                                   spec.categories.end(), cat);
        if (pos == spec.categories.end()) {
          throw SpaceError("'" + spec.name + "': unknown category '" + cat + "'");
        }
        const auto idx = pos - spec.categories.begin();
        for (std::size_t c = 0; c < spec.categories.size(); ++c) {
          u[at + static_cast<int>(c)] = (static_cast<std::ptrdiff_t>(c) == idx) ? 1.0 : 0.0;
        }
        break;
      }
      case ParamKind::kBoolean: {
        if (!std::holds_alternative<bool>(it->second)) {
          throw SpaceError("'" + spec.name + "' expects a boolean");
        }
        u[at] = std::get<bool>(it->second) ? 1.0 : 0.0;
        break;
      }
    }
  }
  return u;
}

Assignment SpaceDefinition::unwarp(const Eigen::VectorXd& u) const {
  if (u.size() != encoded_dim_) {
    throw SpaceError("unwarp: expected " + std::to_string(encoded_dim_) +
                     " coordinates, got " + std::to_string(u.size()));
  }
  Assignment x;
  for (std::size_t i = 0; i < params_.size(); ++i) {
    const ParamSpec& spec = params_[i];
    const int at = offsets_[i];

    switch (spec.kind) {
      case ParamKind::kReal: {
        const double t_lo = forward_transform(spec.warp, spec.lo);
        const double t_hi = forward_transform(spec.warp, spec.hi);
        const double v =
            inverse_transform(spec.warp, t_lo + u[at] * (t_hi - t_lo));
        x[spec.name] = std::clamp(v, spec.lo, spec.hi);
        break;
      }
      case ParamKind::kInteger: {
        const double t_lo = forward_transform(spec.warp, spec.lo);
        const double t_hi = forward_transform(spec.warp, spec.hi);
        const double v =
            t_hi > t_lo
                ? inverse_transform(spec.warp, t_lo + u[at] * (t_hi - t_lo))
                : spec.lo;
        const auto rounded = static_cast<std::int64_t>(std::llround(v));
        const auto lo_i = static_cast<std::int64_t>(spec.lo);
        const auto hi_i = static_cast<std::int64_t>(spec.hi);
        x[spec.name] = std::clamp(rounded, lo_i, hi_i);
        break;
      }
      case ParamKind::kCategorical: {
        int best = 0;
        for (int c = 1; c < static_cast<int>(spec.categories.size()); ++c) {
          if (u[at + c] > u[at + best]) best = c;  // ties keep the lowest index
        }
        x[spec.name] = spec.categories[static_cast<std::size_t>(best)];
        break;
      }
      case ParamKind::kBoolean: {
        x[spec.name] = u[at] >= 0.5;
        break;
      }
    }
  }
  return x;
}

SpaceDefinition space_from_json_text(const std::string& text) {
  nlohmann::ordered_json doc;
  try {
    doc = nlohmann::ordered_json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw SpaceError(std::string("space file is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw SpaceError("space file must be a JSON object");

  std::vector<ParamSpec> specs;
  for (const auto& [name, body] : doc.items()) {
    if (!body.is_object() || !body.contains("type")) {
      throw SpaceError("'" + name + "': expected an object with a \"type\"");
    }
    const std::string type = body.at("type").get<std::string>();

    Warp warp = Warp::kLinear;
    if (body.contains("space")) {
      const std::string s = body.at("space").get<std::string>();
      if (s == "linear") warp = Warp::kLinear;
      else if (s == "log") warp = Warp::kLog;
      else if (s == "logit") warp = Warp::kLogit;
      else if (s == "bilog") warp = Warp::kBilog;
      else throw SpaceError("'" + name + "': unknown space '" + s + "'");
    }

    if (type == "real" || type == "int") {
      if (!body.contains("range") || !body.at("range").is_array() ||
          body.at("range").size() != 2) {
        throw SpaceError("'" + name + "': needs \"range\": [lo, hi]");
      }
      const double lo = body.at("range")[0].get<double>();
      const double hi = body.at("range")[1].get<double>();
      ParamSpec spec = type == "real"
                           ? ParamSpec::real(name, lo, hi, warp)
                           : ParamSpec::integer(name,
                                                static_cast<std::int64_t>(lo),
                                                static_cast<std::int64_t>(hi),
                                                warp);
      if (type == "int" &&
          (lo != std::floor(lo) || hi != std::floor(hi))) {
        throw SpaceError("'" + name + "': integer range must be integral");
      }
      specs.push_back(std::move(spec));
    } else if (type == "cat") {
      if (!body.contains("values") || !body.at("values").is_array()) {
        throw SpaceError("'" + name + "': needs \"values\": [...]");
      }
      std::vector<std::string> values;
      for (const auto& v : body.at("values")) {
        values.push_back(v.get<std::string>());
      }
      specs.push_back(ParamSpec::categorical(name, std::move(values)));
    } else if (type == "bool") {
      specs.push_back(ParamSpec::boolean(name));
    } else {
      throw SpaceError("'" + name + "': unknown type '" + type + "'");
    }
  }
  return validate_space(std::move(specs));
}

}  // namespace spbopt
