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

#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <string_view>

#include "viva/model.hpp"

namespace viva {

using VariableMap = std::map<std::string, std::string, std::less<>>;

/// Text with `{{name}}` placeholders. Every required variable must appear in
/// the text; by default the required set is exactly the placeholders found.
class PromptTemplate {
 public:
  PromptTemplate() = default;
  /// Throws TemplateError on malformed placeholders or a required variable
  /// missing from the text.
  PromptTemplate(std::string name, std::string text, std::set<std::string> required = {});

  static PromptTemplate load(const std::filesystem::path& file, std::string name = {});

  const std::string& name() const { return name_; }
  const std::string& text() const { return text_; }
  const std::set<std::string>& required() const { return required_; }
  const std::set<std::string>& placeholders() const { return placeholders_; }

 private:
  std::string name_;
  std::string text_;
  std::set<std::string> required_;
  std::set<std::string> placeholders_;
};

/// Substitutes every placeholder in a single pass (substituted values are not
/// rescanned). Throws TemplateError naming the first variable without a
/// value; a partially rendered prompt is never returned.
std::string render_template(const PromptTemplate& tmpl, const VariableMap& vars);

/// student_id, display_name, project_summary plus every extra var.
VariableMap student_variables(const StudentContext& student);

}  // namespace viva
