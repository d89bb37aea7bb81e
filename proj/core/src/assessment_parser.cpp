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

#include "viva/assessment_parser.hpp"

#include <cctype>
#include <set>

#include "viva/json_reader.hpp"

namespace viva {
namespace {

std::string trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return std::string(s);
}

bool is_ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }

std::vector<EvidencedClaim> decode_claims(const Json& arr, const std::string& where) {
  std::vector<EvidencedClaim> out;
  for_each_element(arr, where, [&](const Json& e, const std::string& p) {
    ObjectReader r(e, p);
    EvidencedClaim c;
    c.claim = r.get<std::string>("claim");
    c.evidence = r.get<std::string>("evidence");
    r.finish();
    out.push_back(std::move(c));
  });
  return out;
}

FeedbackReport decode_reply_feedback(const Json& j) {
  ObjectReader r(j, "feedback");
  FeedbackReport f;
  f.strengths = decode_claims(r.value("strengths"), "feedback.strengths");
  f.weaknesses = decode_claims(r.value("weaknesses"), "feedback.weaknesses");
  f.action_items = r.get<std::vector<std::string>>("action_items");
  r.finish();
  return f;
}

}  // namespace

std::string_view to_string(ParseErrorCode c) {
  switch (c) {
    case ParseErrorCode::missing_block: return "missing_block";
    case ParseErrorCode::bad_json: return "bad_json";
    case ParseErrorCode::schema: return "schema";
    case ParseErrorCode::unknown_dimension: return "unknown_dimension";
    case ParseErrorCode::duplicate_dimension: return "duplicate_dimension";
    case ParseErrorCode::missing_dimension: return "missing_dimension";
    case ParseErrorCode::out_of_range: return "out_of_range";
    case ParseErrorCode::missing_evidence: return "missing_evidence";
  }
  return "?";
}

std::optional<FencedBlock> extract_json_block(std::string_view text) {
  std::size_t pos = 0;
  while ((pos = text.find("```", pos)) != std::string_view::npos) {
    std::size_t label_end = pos + 3;
    while (label_end < text.size() && is_ident_char(text[label_end])) ++label_end;
    const std::string label(text.substr(pos + 3, label_end - pos - 3));
    const std::size_t line_end = text.find('\n', label_end);
    if (line_end == std::string_view::npos) return std::nullopt;
    const std::size_t close = text.find("```", line_end + 1);
    if (close == std::string_view::npos) return std::nullopt;
    const std::string body(text.substr(line_end + 1, close - line_end - 1));
    std::string lowered;
    for (char c : label) lowered.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    if (lowered == "json" || (lowered.empty() && trim(body).starts_with("{"))) {
      FencedBlock block;
      block.body = body;
      const std::string before = trim(std::string(text.substr(0, pos)));
      const std::string after = trim(std::string(text.substr(close + 3)));
      block.outside = before.empty() || after.empty() ? before + after : before + "\n\n" + after;
      return block;
    }
    pos = close + 3;
  }
  return std::nullopt;
}

ParsedReply parse_assessment(std::string_view raw, const Rubric& rubric, const ParseOptions& options) {
  ParsedReply out;
  auto fail = [&](ParseErrorCode code, std::string detail) {
    out.errors.push_back({code, std::move(detail)});
  };

  const auto block = extract_json_block(raw);
  if (!block) {
    fail(ParseErrorCode::missing_block, "no fenced ```json block found");
    return out;
  }
  Json doc;
  try {
    doc = Json::parse(block->body);
  } catch (const Json::parse_error& e) {
    fail(ParseErrorCode::bad_json, e.what());
    return out;
  }

  Assessment a;
  a.rater_id = options.rater_id;
  a.round = options.round;
  a.notes = block->outside;
  std::optional<int> claimed_total;
  try {
    ObjectReader r(doc, "");
    for_each_element(r.value("scores"), "scores", [&](const Json& e, const std::string& p) {
      ObjectReader s(e, p);
      DimensionScore d;
      d.dimension_id = s.get<std::string>("dimension_id");
      d.score = s.get<int>("score");
      d.justification = s.get_or<std::string>("justification", "");
      d.evidence = s.get_or<std::vector<std::string>>("evidence", {});
      s.finish();
      a.scores.push_back(std::move(d));
    });
    claimed_total = r.get_optional<int>("total");
    if (options.chair) {
      if (const Json* f = r.optional_value("feedback")) {
        out.feedback = decode_reply_feedback(*f);
      } else {
        fail(ParseErrorCode::schema, "feedback: missing required field");
      }
    }
    r.finish();
  } catch (const SchemaError& e) {
    fail(ParseErrorCode::schema, e.what());
    return out;
  }

  std::set<std::string> seen;
  for (const auto& s : a.scores) {
    if (!rubric.find(s.dimension_id)) {
      fail(ParseErrorCode::unknown_dimension, "unknown dimension '" + s.dimension_id + "'");
      continue;
    }
    if (!seen.insert(s.dimension_id).second) {
      fail(ParseErrorCode::duplicate_dimension, "dimension '" + s.dimension_id + "' scored twice");
    }
    if (s.score < 0 || s.score > rubric.scale_max) {
      fail(ParseErrorCode::out_of_range, "dimension '" + s.dimension_id + "' score " +
                                             std::to_string(s.score) + " outside 0.." +
                                             std::to_string(rubric.scale_max));
    }
    if (options.chair && s.evidence.empty()) {
      fail(ParseErrorCode::missing_evidence, "dimension '" + s.dimension_id + "' has no evidence");
    }
  }
  for (const auto& d : rubric.dimensions) {
    if (!seen.contains(d.id)) fail(ParseErrorCode::missing_dimension, "dimension '" + d.id + "' not scored");
  }
  if (!out.errors.empty()) {
    out.feedback.reset();
    return out;
  }

  // Keep rubric order regardless of the order the model used.
  std::vector<DimensionScore> ordered;
  for (const auto& d : rubric.dimensions) ordered.push_back(*a.find(d.id));
  a.scores = std::move(ordered);
  a.total = a.score_sum();
  if (claimed_total && *claimed_total != a.total) {
    out.warnings.push_back(std::string(to_string(options.round)) + " " + options.rater_id +
                           ": reported total " + std::to_string(*claimed_total) +
                           " does not match score sum " + std::to_string(a.total) +
                           "; using the sum");
  }
  out.assessment = std::move(a);
  return out;
}

}  // namespace viva
