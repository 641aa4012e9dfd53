#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "attnret/graph.hpp"

namespace attnret::detail {

using json = nlohmann::json;

inline bool is_blank(std::string_view line) {
  return line.find_first_not_of(" \t\r\n") == std::string_view::npos;
}

inline json parse_object(const std::string& text, const std::string& where) {
  json obj;
  try {
    obj = json::parse(text);
  } catch (const json::parse_error& e) {
    throw DataError(where + ": invalid JSON (" + e.what() + ")");
  }
  if (!obj.is_object()) throw DataError(where + ": expected a JSON object");
  return obj;
}

inline const json& require(const json& obj, const char* key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) throw DataError(where + ": missing field \"" + key + "\"");
  return *it;
}

inline std::string require_string(const json& obj, const char* key, const std::string& where) {
  const json& v = require(obj, key, where);
  if (!v.is_string()) throw DataError(where + ": field \"" + key + "\" must be a string");
  return v.get<std::string>();
}

inline std::int64_t require_int(const json& obj, const char* key, const std::string& where) {
  const json& v = require(obj, key, where);
  if (!v.is_number_integer()) throw DataError(where + ": field \"" + key + "\" must be an integer");
  return v.get<std::int64_t>();
}

inline std::vector<double> parse_real_array(const json& v, const char* key, std::size_t dimension,
                                            const std::string& where) {
  if (!v.is_array()) throw DataError(where + ": field \"" + key + "\" must be an array");
  if (v.size() != dimension) {
    throw DataError(where + ": dimension mismatch, \"" + key + "\" has " +
                    std::to_string(v.size()) + " components, expected " +
                    std::to_string(dimension));
  }
  std::vector<double> out;
  out.reserve(v.size());
  for (const json& x : v) {
    if (!x.is_number()) throw DataError(where + ": \"" + key + "\" holds a non-number");
    const double d = x.get<double>();
    if (!std::isfinite(d)) throw DataError(where + ": \"" + key + "\" holds a non-finite value");
    out.push_back(d);
  }
  return out;
}

inline std::vector<float> require_embedding(const json& obj, const char* key,
                                            std::size_t dimension, const std::string& where) {
  const auto values = parse_real_array(require(obj, key, where), key, dimension, where);
  std::vector<float> out;
  out.reserve(values.size());
  for (double d : values) {
    const float f = static_cast<float>(d);
    if (!std::isfinite(f)) {
      throw DataError(where + ": \"" + key + "\" holds a value outside float range");
    }
    out.push_back(f);
  }
  return out;
}

/// Double whose shortest JSON form is the shortest decimal of `f` and that
/// converts back to exactly `f`.
inline double float_for_json(float f) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof buf, f);
  *res.ptr = '\0';
  const double d = std::strtod(buf, nullptr);
  return static_cast<float>(d) == f ? d : static_cast<double>(f);
}

inline json float_array(std::span<const float> values) {
  json arr = json::array();
  for (float f : values) arr.push_back(float_for_json(f));
  return arr;
}

template <typename T>
json to_json_array(const std::vector<T>& values) {
  json arr = json::array();
  for (const auto& v : values) arr.push_back(v);
  return arr;
}

}  // namespace attnret::detail
