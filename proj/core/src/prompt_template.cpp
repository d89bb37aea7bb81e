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

#include "viva/prompt_template.hpp"

#include <cctype>
#include <vector>

#include "viva/errors.hpp"
#include "viva/io.hpp"

namespace viva {
namespace {

struct Placeholder {
  std::size_t begin = 0;  // offset of "{{"
  std::size_t end = 0;    // one past "}}"
  std::string name;
};

bool valid_name(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s) {
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.' || c == '-')) {
      return false;
    }
  }
  return true;
}

std::vector<Placeholder> scan(std::string_view text, std::string_view template_name) {
  std::vector<Placeholder> out;
  std::size_t pos = 0;
  while ((pos = text.find("{{", pos)) != std::string_view::npos) {
    const auto close = text.find("}}", pos + 2);
    if (close == std::string_view::npos) {
      throw TemplateError("", "unterminated placeholder in template " + std::string(template_name));
    }
    std::string_view inner = text.substr(pos + 2, close - pos - 2);
    while (!inner.empty() && inner.front() == ' ') inner.remove_prefix(1);
    while (!inner.empty() && inner.back() == ' ') inner.remove_suffix(1);
    if (!valid_name(inner)) {
      throw TemplateError(std::string(inner), "malformed placeholder '{{" + std::string(inner) +
                                                  "}}' in template " + std::string(template_name));
    }
    out.push_back({pos, close + 2, std::string(inner)});
    pos = close + 2;
  }
  return out;
}

}  // namespace

PromptTemplate::PromptTemplate(std::string name, std::string text, std::set<std::string> required)
    : name_(std::move(name)), text_(std::move(text)), required_(std::move(required)) {
  for (const auto& p : scan(text_, name_)) placeholders_.insert(p.name);
  if (required_.empty()) {
    required_ = placeholders_;
  } else {
    for (const auto& r : required_) {
      if (!placeholders_.contains(r)) {
        throw TemplateError(r, "template " + name_ + " does not use required variable " + r);
      }
    }
  }
}

PromptTemplate PromptTemplate::load(const std::filesystem::path& file, std::string name) {
  if (name.empty()) name = file.stem().string();
  auto text = try_read_file(file);
  if (!text) throw StartupError("missing prompt template " + file.string());
  return PromptTemplate(std::move(name), std::move(*text));
}

std::string render_template(const PromptTemplate& tmpl, const VariableMap& vars) {
  const auto placeholders = scan(tmpl.text(), tmpl.name());
  for (const auto& r : tmpl.required()) {
    if (!vars.contains(r)) throw TemplateError(r, "missing template variable '" + r + "'");
  }
  std::string out;
  out.reserve(tmpl.text().size());
  std::size_t cursor = 0;
  for (const auto& p : placeholders) {
    auto it = vars.find(p.name);
    if (it == vars.end()) {
      throw TemplateError(p.name, "missing template variable '" + p.name + "'");
    }
    out.append(tmpl.text(), cursor, p.begin - cursor);
    out += it->second;
    cursor = p.end;
  }
  out.append(tmpl.text(), cursor, std::string::npos);
  return out;
}

VariableMap student_variables(const StudentContext& student) {
  VariableMap vars;
  for (const auto& [k, v] : student.extra_vars) vars[k] = v;
  vars["student_id"] = student.student_id;
  vars["display_name"] = student.display_name.empty() ? student.student_id : student.display_name;
  vars["project_summary"] = student.project_summary;
  return vars;
}

}  // namespace viva
