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

#include <stdexcept>
#include <string>

namespace viva {

/// Base class for every error raised by the viva library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A document or entity violates its schema or an invariant. `field()` is a
/// dotted path such as `turns[3].text` or `total`.
class SchemaError : public Error {
 public:
  SchemaError(std::string field, const std::string& message)
      : Error(field + ": " + message), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

/// A prompt template could not be rendered. `variable()` names the placeholder.
class TemplateError : public Error {
 public:
  TemplateError(std::string variable, const std::string& message)
      : Error(message), variable_(std::move(variable)) {}
  const std::string& variable() const noexcept { return variable_; }

 private:
  std::string variable_;
};

/// Missing templates, catalogs or configuration at session or tool startup.
class StartupError : public Error {
 public:
  using Error::Error;
};

/// Statistic is undefined for the given input (no pairable values, zero
/// variance, empty input).
class UndefinedStatistic : public Error {
 public:
  using Error::Error;
};

}  // namespace viva
