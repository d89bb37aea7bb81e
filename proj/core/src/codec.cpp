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

#include "viva/codec.hpp"

namespace viva {
namespace {

template <typename E, typename ParseFn>
E enum_field(ObjectReader& r, std::string_view key, ParseFn parse) {
  const auto raw = r.get<std::string>(key);
  auto v = parse(raw);
  if (!v) throw SchemaError(r.path(key), "unknown value '" + raw + "'");
  return *v;
}

template <typename T, typename Fn>
std::vector<T> decode_array(ObjectReader& r, std::string_view key, Fn decode_one) {
  std::vector<T> out;
  for_each_element(r.value(key), r.path(key),
                   [&](const Json& e, const std::string& where) {
                     out.push_back(decode_one(e, where));
                   });
  return out;
}

template <typename T, typename Fn>
Json encode_array(const std::vector<T>& v, Fn encode_one) {
  Json arr = Json::array();
  for (const auto& x : v) arr.push_back(encode_one(x));
  return arr;
}

template <typename T>
void revalidate(const T& value) {
  validate(value);
}

}  // namespace

Json encode(const ExamCase& c) {
  return {{"id", c.id}, {"title", c.title}, {"topic_tags", c.topic_tags}};
}

ExamCase decode_exam_case(const Json& j, const std::string& path) {
  ObjectReader r(j, path);
  ExamCase c;
  c.id = r.get<std::string>("id");
  c.title = r.get<std::string>("title");
  c.topic_tags = r.get_or<std::vector<std::string>>("topic_tags", {});
  r.finish();
  return c;
}

Json encode(const StudentContext& s) {
  return {{"student_id", s.student_id},
          {"display_name", s.display_name},
          {"project_summary", s.project_summary},
          {"extra_vars", s.extra_vars}};
}

StudentContext decode_student(const Json& j, const std::string& path) {
  ObjectReader r(j, path);
  StudentContext s;
  s.student_id = r.get<std::string>("student_id");
  s.display_name = r.get_or<std::string>("display_name", "");
  s.project_summary = r.get_or<std::string>("project_summary", "");
  if (const Json* vars = r.optional_value("extra_vars")) {
    ObjectReader vr(*vars, r.path("extra_vars"));
    for (auto it = vars->begin(); it != vars->end(); ++it) {
      s.extra_vars[it.key()] = vr.get<std::string>(it.key());
    }
    vr.finish();
  }
  r.finish();
  return s;
}

Json encode(const Turn& t) {
  Json annotations = Json::array();
  for (auto a : t.annotations) annotations.push_back(std::string(to_string(a)));
  return {{"index", t.index},
          {"role", std::string(to_string(t.role))},
          {"phase", std::string(to_string(t.phase))},
          {"text", t.text},
          {"timestamp", t.timestamp},
          {"annotations", annotations}};
}

Turn decode_turn(const Json& j, const std::string& path) {
  ObjectReader r(j, path);
  Turn t;
  t.index = r.get<int>("index");
  t.role = enum_field<Role>(r, "role", parse_role);
  t.phase = enum_field<Phase>(r, "phase", parse_phase);
  t.text = r.get<std::string>("text");
  t.timestamp = r.get<TimestampMs>("timestamp");
  for (const auto& name : r.get_or<std::vector<std::string>>("annotations", {})) {
    auto a = parse_annotation(name);
    if (!a) throw SchemaError(r.path("annotations"), "unknown annotation '" + name + "'");
    t.annotations.insert(*a);
  }
  r.finish();
  return t;
}

Json encode(const Transcript& t) {
  Json j = {{"session_id", t.session_id},
            {"student", encode(t.student)},
            {"case", t.exam_case ? encode(*t.exam_case) : Json(nullptr)},
            {"seed", t.seed ? Json(*t.seed) : Json(nullptr)},
            {"case_index", t.case_index ? Json(*t.case_index) : Json(nullptr)},
            {"turns", encode_array(t.turns, [](const Turn& x) { return encode(x); })},
            {"started_at", t.started_at},
            {"ended_at", t.ended_at},
            {"termination", std::string(to_string(t.termination))}};
  return j;
}

Transcript decode_transcript(const Json& j, const std::string& path) {
  ObjectReader r(j, path);
  Transcript t;
  t.session_id = r.get<std::string>("session_id");
  t.student = decode_student(r.value("student"), r.path("student"));
  if (const Json* c = r.optional_value("case")) t.exam_case = decode_exam_case(*c, r.path("case"));
  t.seed = r.get_optional<std::uint32_t>("seed");
  t.case_index = r.get_optional<int>("case_index");
  t.turns = decode_array<Turn>(r, "turns", decode_turn);
  t.started_at = r.get<TimestampMs>("started_at");
  t.ended_at = r.get<TimestampMs>("ended_at");
  t.termination = enum_field<Termination>(r, "termination", parse_termination);
  r.finish();
  return t;
}

Json encode(const RubricDimension& d) {
  Json anchors = Json::object();
  for (const auto& [score, text] : d.anchors) anchors[std::to_string(score)] = text;
  return {{"id", d.id}, {"name", d.name}, {"description", d.description}, {"anchors", anchors}};
}

namespace {
RubricDimension decode_dimension(const Json& j, const std::string& path) {
  ObjectReader r(j, path);
  RubricDimension d;
  d.id = r.get<std::string>("id");
  d.name = r.get<std::string>("name");
  d.description = r.get_or<std::string>("description", "");
  const Json& anchors = r.value("anchors");
  ObjectReader ar(anchors, r.path("anchors"));
  for (auto it = anchors.begin(); it != anchors.end(); ++it) {
    int score = -1;
    const std::string& key = it.key();
    if (key.size() == 1 && key[0] >= '0' && key[0] <= '9') score = key[0] - '0';
    if (score < 0 || score > kScaleMax) {
      throw SchemaError(ar.path(key), "anchor keys must be the integers 0-4");
    }
    d.anchors[score] = ar.get<std::string>(key);
  }
  ar.finish();
  r.finish();
  return d;
}
}  // namespace

Json encode(const Rubric& rb) {
  return {{"dimensions",
           encode_array(rb.dimensions, [](const RubricDimension& d) { return encode(d); })},
          {"interference_protocol", rb.interference_protocol},
          {"scale_max", rb.scale_max}};
}

Rubric decode_rubric(const Json& j, const std::string& path) {
  ObjectReader r(j, path);
  Rubric rb;
  rb.dimensions = decode_array<RubricDimension>(r, "dimensions", decode_dimension);
  rb.interference_protocol = r.get<std::string>("interference_protocol");
  rb.scale_max = r.get<int>("scale_max");
  r.finish();
  return rb;
}

Json encode(const DimensionScore& s) {
  return {{"dimension_id", s.dimension_id},
          {"score", s.score},
          {"justification", s.justification},
          {"evidence", s.evidence}};
}

DimensionScore decode_dimension_score(const Json& j, const std::string& path) {
  ObjectReader r(j, path);
  DimensionScore s;
  s.dimension_id = r.get<std::string>("dimension_id");
  s.score = r.get<int>("score");
  s.justification = r.get_or<std::string>("justification", "");
  s.evidence = r.get_or<std::vector<std::string>>("evidence", {});
  r.finish();
  return s;
}

Json encode(const Assessment& a) {
  return {{"rater_id", a.rater_id},
          {"round", std::string(to_string(a.round))},
          {"scores", encode_array(a.scores, [](const DimensionScore& s) { return encode(s); })},
          {"total", a.total},
          {"notes", a.notes}};
}

Assessment decode_assessment(const Json& j, const std::string& path) {
  ObjectReader r(j, path);
  Assessment a;
  a.rater_id = r.get<std::string>("rater_id");
  a.round = enum_field<Round>(r, "round", parse_round);
  a.scores = decode_array<DimensionScore>(r, "scores", decode_dimension_score);
  a.total = r.get<int>("total");
  a.notes = r.get_or<std::string>("notes", "");
  r.finish();
  return a;
}

namespace {
Json encode_claim(const EvidencedClaim& c) {
  return {{"claim", c.claim}, {"evidence", c.evidence}};
}
EvidencedClaim decode_claim(const Json& j, const std::string& path) {
  ObjectReader r(j, path);
  EvidencedClaim c;
  c.claim = r.get<std::string>("claim");
  c.evidence = r.get<std::string>("evidence");
  r.finish();
  return c;
}
}  // namespace

Json encode(const FeedbackReport& f) {
  return {{"strengths", encode_array(f.strengths, encode_claim)},
          {"weaknesses", encode_array(f.weaknesses, encode_claim)},
          {"action_items", f.action_items}};
}

FeedbackReport decode_feedback(const Json& j, const std::string& path) {
  ObjectReader r(j, path);
  FeedbackReport f;
  f.strengths = decode_array<EvidencedClaim>(r, "strengths", decode_claim);
  f.weaknesses = decode_array<EvidencedClaim>(r, "weaknesses", decode_claim);
  f.action_items = r.get_or<std::vector<std::string>>("action_items", {});
  r.finish();
  return f;
}

Json encode(const Flag& f) {
  return {{"kind", std::string(to_string(f.kind))},
          {"detail", f.detail},
          {"threshold_value", f.threshold_value}};
}

Flag decode_flag(const Json& j, const std::string& path) {
  ObjectReader r(j, path);
  Flag f;
  f.kind = enum_field<FlagKind>(r, "kind", parse_flag_kind);
  f.detail = r.get<std::string>("detail");
  f.threshold_value = r.get<double>("threshold_value");
  r.finish();
  return f;
}

Json encode(const CouncilResult& c) {
  auto assessments = [](const std::vector<Assessment>& v) {
    return encode_array(v, [](const Assessment& a) { return encode(a); });
  };
  return {{"transcript_ref", c.transcript_ref},
          {"round1", assessments(c.round1)},
          {"round2", assessments(c.round2)},
          {"chair", encode(c.chair)},
          {"feedback", encode(c.feedback)},
          {"flags", encode_array(c.flags, [](const Flag& f) { return encode(f); })},
          {"warnings", c.warnings}};
}

CouncilResult decode_council(const Json& j, const std::string& path) {
  ObjectReader r(j, path);
  CouncilResult c;
  c.transcript_ref = r.get<std::string>("transcript_ref");
  c.round1 = decode_array<Assessment>(r, "round1", decode_assessment);
  c.round2 = decode_array<Assessment>(r, "round2", decode_assessment);
  c.chair = decode_assessment(r.value("chair"), r.path("chair"));
  c.feedback = decode_feedback(r.value("feedback"), r.path("feedback"));
  c.flags = decode_array<Flag>(r, "flags", decode_flag);
  c.warnings = r.get_or<std::vector<std::string>>("warnings", {});
  r.finish();
  return c;
}

Json strip_version(const Json& doc, const std::string& what) {
  if (!doc.is_object()) throw SchemaError(what, "expected an object");
  if (!doc.contains("v")) throw SchemaError("v", "missing schema version");
  const Json& v = doc.at("v");
  if (!v.is_number_integer() || v.get<int>() != kSchemaVersion) {
    throw SchemaError("v", "unsupported schema version " + v.dump());
  }
  Json body = doc;
  body.erase("v");
  return body;
}

Json with_version(Json body) {
  body["v"] = kSchemaVersion;
  return body;
}

template <typename T>
std::string serialize(const T& value) {
  revalidate(value);
  return canonical_dump(with_version(encode(value)));
}

template <>
Transcript deserialize<Transcript>(std::string_view bytes) {
  auto t = decode_transcript(strip_version(parse_json(bytes), "transcript"));
  validate(t);
  return t;
}

template <>
Rubric deserialize<Rubric>(std::string_view bytes) {
  auto rb = decode_rubric(strip_version(parse_json(bytes), "rubric"));
  validate(rb);
  return rb;
}

template <>
Assessment deserialize<Assessment>(std::string_view bytes) {
  auto a = decode_assessment(strip_version(parse_json(bytes), "assessment"));
  validate(a);
  return a;
}

template <>
CouncilResult deserialize<CouncilResult>(std::string_view bytes) {
  auto c = decode_council(strip_version(parse_json(bytes), "council"));
  validate(c);
  return c;
}

template <>
StudentContext deserialize<StudentContext>(std::string_view bytes) {
  auto s = decode_student(strip_version(parse_json(bytes), "student"));
  validate(s);
  return s;
}

template std::string serialize<Transcript>(const Transcript&);
template std::string serialize<Rubric>(const Rubric&);
template std::string serialize<Assessment>(const Assessment&);
template std::string serialize<CouncilResult>(const CouncilResult&);
template std::string serialize<StudentContext>(const StudentContext&);

}  // namespace viva
