// Copyright 2026 The Viva Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

#include <nlohmann/json.hpp>

#include "viva/errors.hpp"

namespace viva {

using Json = nlohmann::json;

/// Strict reader over one JSON object. Every accessed key is recorded;
/// `finish()` rejects any key that was never read. Errors carry the dotted
/// path of the offending field.
class ObjectReader {
 public:
  ObjectReader(const Json& j, std::string path) : json_(j), path_(std::move(path)) {
    if (!json_.is_object()) throw SchemaError(display_path(), "expected an object");
  }
  // Holds a reference; a temporary would dangle.
  ObjectReader(Json&&, std::string) = delete;

  std::string path(std::string_view key) const {
    return path_.empty() ? std::string(key) : path_ + "." + std::string(key);
  }

  bool has(std::string_view key) const { return json_.contains(std::string(key)); }

  const Json& value(std::string_view key) {
    const std::string k(key);
    if (!json_.contains(k)) throw SchemaError(path(key), "missing required field");
    seen_.insert(k);
    return json_.at(k);
  }

  const Json* optional_value(std::string_view key) {
    const std::string k(key);
    if (!json_.contains(k) || json_.at(k).is_null()) {
      if (json_.contains(k)) seen_.insert(k);
      return nullptr;
    }
    seen_.insert(k);
    return &json_.at(k);
  }

  template <typename T>
  T get(std::string_view key) {
    return convert<T>(value(key), path(key));
  }

  template <typename T>
  std::optional<T> get_optional(std::string_view key) {
    const Json* v = optional_value(key);
    if (!v) return std::nullopt;
    return convert<T>(*v, path(key));
  }

  template <typename T>
  T get_or(std::string_view key, T fallback) {
    auto v = get_optional<T>(key);
    return v ? std::move(*v) : std::move(fallback);
  }

  /// Rejects unknown fields.
  void finish() const {
    for (auto it = json_.begin(); it != json_.end(); ++it) {
      if (!seen_.contains(it.key())) throw SchemaError(path(it.key()), "unknown field");
    }
  }

  template <typename T>
  static T convert(const Json& v, const std::string& where) {
    if constexpr (std::is_same_v<T, std::string>) {
      if (!v.is_string()) throw SchemaError(where, "expected a string");
      return v.get<std::string>();
    } else if constexpr (std::is_same_v<T, bool>) {
      if (!v.is_boolean()) throw SchemaError(where, "expected a boolean");
      return v.get<bool>();
    } else if constexpr (std::is_integral_v<T>) {
      if (!v.is_number_integer()) throw SchemaError(where, "expected an integer");
      if constexpr (std::is_unsigned_v<T>) {
        if (v.is_number_unsigned() == false && v.get<std::int64_t>() < 0) {
          throw SchemaError(where, "expected a non-negative integer");
        }
        const auto raw = v.get<std::uint64_t>();
        if (raw > std::numeric_limits<T>::max()) throw SchemaError(where, "integer out of range");
        return static_cast<T>(raw);
      } else {
        const auto raw = v.get<std::int64_t>();
        if (raw < std::numeric_limits<T>::min() || raw > std::numeric_limits<T>::max()) {
          throw SchemaError(where, "integer out of range");
        }
        return static_cast<T>(raw);
      }
    } else if constexpr (std::is_floating_point_v<T>) {
      if (!v.is_number()) throw SchemaError(where, "expected a number");
      return v.get<T>();
    } else if constexpr (std::is_same_v<T, std::vector<std::string>>) {
      if (!v.is_array()) throw SchemaError(where, "expected an array");
      std::vector<std::string> out;
      for (std::size_t i = 0; i < v.size(); ++i) {
        out.push_back(convert<std::string>(v[i], where + "[" + std::to_string(i) + "]"));
      }
      return out;
    } else {
      static_assert(sizeof(T) == 0, "unsupported field type");
    }
  }

 private:
  std::string display_path() const { return path_.empty() ? "<root>" : path_; }

  const Json& json_;
  std::string path_;
  std::set<std::string> seen_;
};

/// Iterates an array field, calling `fn(element, element_path)`.
template <typename Fn>
void for_each_element(const Json& arr, const std::string& where, Fn&& fn) {
  if (!arr.is_array()) throw SchemaError(where, "expected an array");
  for (std::size_t i = 0; i < arr.size(); ++i) {
    fn(arr[i], where + "[" + std::to_string(i) + "]");
  }
}

/// Parses text as JSON, mapping syntax errors to SchemaError at the root.
inline Json parse_json(std::string_view text, std::string_view what = "<root>") {
  try {
    return Json::parse(text.begin(), text.end());
  } catch (const Json::parse_error& e) {
    throw SchemaError(std::string(what), std::string("malformed JSON: ") + e.what());
  }
}

/// Canonical byte form: sorted keys, two-space indent, trailing newline.
inline std::string canonical_dump(const Json& j) { return j.dump(2) + "\n"; }

}  // namespace viva
