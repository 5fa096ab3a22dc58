#pragma once

#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "epiconj/model.hpp"
#include "epiconj/problems.hpp"

namespace epiconj {

namespace detail {

inline std::vector<double> read_reals(const nlohmann::json& j, const char* key) {
  if (!j.contains(key)) throw UsageError(std::string("problem file: missing \"") + key + "\"");
  const auto& v = j.at(key);
  if (!v.is_array() || v.empty())
    throw UsageError(std::string("problem file: \"") + key + "\" must be a nonempty list");
  std::vector<double> out;
  for (const auto& e : v) {
    if (!e.is_number()) throw UsageError(std::string("problem file: non-numeric entry in \"") + key + "\"");
    const double x = e.get<double>();
    if (!std::isfinite(x)) throw UsageError(std::string("problem file: non-finite entry in \"") + key + "\"");
    out.push_back(x);
  }
  return out;
}

}  // namespace detail

/// Builds a problem from its JSON text:
///   {"type": "quad", "Q": [diag], "c": [center]}
///   {"type": "max_affine", "A": [[row], ...], "b": [offsets]}
/// with an optional "name".
inline ProblemSpec parse_problem(const std::string& text, const std::string& fallback_name = "user") {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw UsageError(std::string("problem file: invalid JSON: ") + e.what());
  }
  if (!j.is_object() || !j.contains("type") || !j.at("type").is_string())
    throw UsageError("problem file: expected an object with a string \"type\"");
  const std::string type = j.at("type").get<std::string>();
  const std::string name =
      j.contains("name") && j.at("name").is_string() ? j.at("name").get<std::string>() : fallback_name;

  if (type == "quad") {
    const auto Q = detail::read_reals(j, "Q");
    const auto c = detail::read_reals(j, "c");
    if (Q.size() != c.size()) throw UsageError("problem file: Q and c lengths differ");
    for (double q : Q)
      if (!(q > 0.0)) throw UsageError("problem file: Q entries must be positive");
    return make_quadratic(name, detail::to_vector(Q), detail::to_vector(c));
  }
  if (type == "max_affine") {
    if (!j.contains("A") || !j.at("A").is_array() || j.at("A").empty())
      throw UsageError("problem file: \"A\" must be a nonempty list of rows");
    std::vector<Vector> rows;
    for (const auto& row : j.at("A")) {
      nlohmann::json wrap = {{"row", row}};
      rows.push_back(detail::to_vector(detail::read_reals(wrap, "row")));
    }
    const auto b = detail::read_reals(j, "b");
    return make_max_affine(name, std::move(rows), b);
  }
  throw UsageError("problem file: unknown type '" + type + "' (expected quad|max_affine)");
}

inline ProblemSpec load_problem_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open problem file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  std::string stem = path;
  if (auto slash = stem.find_last_of('/'); slash != std::string::npos) stem = stem.substr(slash + 1);
  if (auto dot = stem.find_last_of('.'); dot != std::string::npos) stem = stem.substr(0, dot);
  return parse_problem(ss.str(), stem);
}

/// Catalog name or path to a problem file.
inline ProblemSpec resolve_problem(const std::string& name_or_path) {
  if (auto p = find_problem(name_or_path)) return *p;
  std::ifstream probe(name_or_path);
  if (probe) return load_problem_file(name_or_path);
  throw UsageError("unknown problem '" + name_or_path + "' (not in the catalog, not a readable file)");
}

}  // namespace epiconj
