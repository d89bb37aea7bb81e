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

#include "viva/council.hpp"

#include <algorithm>
#include <future>
#include <sstream>

#include "viva/codec.hpp"
#include "viva/evidence.hpp"
#include "viva/turn_guard.hpp"

namespace viva {

struct GradingCouncil::Attempt {
  std::optional<Assessment> assessment;
  std::optional<FeedbackReport> feedback;
  std::vector<std::string> warnings;
  std::vector<RawModelOutput> outputs;
  std::string failure;
};

namespace {

constexpr std::string_view kInstruction =
    "[council] Return your assessment now as exactly one fenced ```json block.";

std::string describe(const std::vector<ParseError>& errors) {
  std::string out;
  for (const auto& e : errors) {
    out += (out.empty() ? "" : "; ") + std::string(to_string(e.code)) + ": " + e.detail;
  }
  return out;
}

std::string quote_list(const std::vector<std::string>& quotes) {
  std::string out;
  for (const auto& q : quotes) out += "\n    - \"" + q + "\"";
  return out;
}

template <typename T, typename Fn>
std::vector<T> fan_out(std::size_t n, bool parallel, Fn&& fn) {
  std::vector<T> out;
  out.reserve(n);
  if (!parallel) {
    for (std::size_t i = 0; i < n; ++i) out.push_back(fn(i));
    return out;
  }
  std::vector<std::future<T>> futures;
  for (std::size_t i = 0; i < n; ++i) futures.push_back(std::async(std::launch::async, fn, i));
  for (auto& f : futures) out.push_back(f.get());
  return out;
}

}  // namespace

PeerSummary compile_peer_summary(std::vector<Assessment> round1) {
  std::stable_sort(round1.begin(), round1.end(),
                   [](const Assessment& a, const Assessment& b) { return a.rater_id < b.rater_id; });
  return {std::move(round1)};
}

std::string render_transcript(const Transcript& transcript) {
  std::ostringstream out;
  if (transcript.exam_case) {
    out << "Case: " << transcript.exam_case->title << " (" << transcript.exam_case->id << ")\n";
  }
  for (const auto& t : transcript.turns) {
    if (t.role == Role::system) continue;
    out << "[" << t.index << "] " << to_string(t.role) << " (" << to_string(t.phase) << ")";
    for (auto a : t.annotations) out << " [" << to_string(a) << "]";
    out << ": " << t.text << "\n";
  }
  return out.str();
}

std::string render_rubric(const Rubric& rubric) {
  std::ostringstream out;
  for (const auto& d : rubric.dimensions) {
    out << "## " << d.id << ": " << d.name << "\n" << d.description << "\n";
    for (const auto& [score, anchor] : d.anchors) out << "  " << score << ": " << anchor << "\n";
    out << "\n";
  }
  out << "Interference protocol: " << rubric.interference_protocol << "\n";
  return out.str();
}

std::string render_assessment(const Assessment& a) {
  std::ostringstream out;
  out << "### " << to_string(a.round) << " assessment by " << a.rater_id << " (total " << a.total
      << "/" << kTotalMax << ")\n";
  for (const auto& s : a.scores) {
    out << "- " << s.dimension_id << ": " << s.score << "/" << kScaleMax << "\n"
        << "  justification: " << s.justification << "\n"
        << "  evidence:" << quote_list(s.evidence) << "\n";
  }
  return out.str();
}

std::string render_peer_summary(const PeerSummary& summary) {
  std::string out = "Round 1 assessments from " + std::to_string(summary.entries.size()) +
                    " council members, ordered by rater id:\n\n";
  for (const auto& a : summary.entries) out += render_assessment(a) + "\n";
  return out;
}

GradingPrompts GradingPrompts::load(const std::filesystem::path& dir) {
  return {PromptTemplate::load(dir / "round1.txt", "round1"),
          PromptTemplate::load(dir / "round2.txt", "round2"),
          PromptTemplate::load(dir / "chair.txt", "chair")};
}

Json encode(const CouncilPartial& p) {
  Json r1 = Json::array(), r2 = Json::array(), flags = Json::array(), outputs = Json::array();
  for (const auto& a : p.round1) r1.push_back(encode(a));
  for (const auto& a : p.round2) r2.push_back(encode(a));
  for (const auto& f : p.flags) flags.push_back(encode(f));
  for (const auto& o : p.outputs) {
    Json errors = Json::array();
    for (const auto& e : o.parse_errors) errors.push_back({{"code", to_string(e.code)}, {"detail", e.detail}});
    outputs.push_back({{"rater_id", o.rater_id},
                       {"round", to_string(o.round)},
                       {"attempt", o.attempt},
                       {"raw", o.raw},
                       {"parsed", o.parsed ? encode(*o.parsed) : Json(nullptr)},
                       {"parse_errors", errors},
                       {"backend_error", o.backend_error}});
  }
  return with_version({{"transcript_ref", p.transcript_ref},
                       {"round1", r1},
                       {"round2", r2},
                       {"flags", flags},
                       {"warnings", p.warnings},
                       {"outputs", outputs}});
}

GradingCouncil::GradingCouncil(GradingPrompts prompts, Rubric rubric, std::vector<ModelBackend*> raters,
                               CouncilOptions options)
    : prompts_(std::move(prompts)), rubric_(std::move(rubric)), raters_(std::move(raters)), options_(options) {
  validate(rubric_);
  std::vector<BackendSpec> specs;
  for (auto* r : raters_) {
    if (!r) throw ConfigError("null council backend");
    specs.push_back(r->spec());
  }
  validate_council(specs);
}

ModelBackend& GradingCouncil::chair_backend() const {
  for (auto* r : raters_) {
    if (r->spec().is_chair) return *r;
  }
  throw ConfigError("council has no chair");
}

GradingCouncil::Attempt GradingCouncil::run_rater(ModelBackend& backend, const ParseOptions& options,
                                                  const std::string& system_prompt) const {
  Attempt out;
  CompletionRequest req;
  req.messages = {{"system", system_prompt}, {"user", std::string(kInstruction)}};
  const std::string tag = std::string(to_string(options.round)) + "." + backend.spec().rater_id;
  for (int attempt = 1; attempt <= 2; ++attempt) {
    req.tag = tag + ".a" + std::to_string(attempt);
    RawModelOutput raw;
    raw.rater_id = backend.spec().rater_id;
    raw.round = options.round;
    raw.attempt = attempt;
    try {
      raw.raw = complete_with_retry(backend, req, options_.retry).text;
    } catch (const BackendError& e) {
      raw.backend_error = e.what();
      out.failure = std::string("backend error: ") + e.what();
      out.outputs.push_back(std::move(raw));
      return out;
    }
    ParsedReply parsed = parse_assessment(raw.raw, rubric_, options);
    raw.parsed = parsed.assessment;
    raw.parse_errors = parsed.errors;
    out.outputs.push_back(raw);
    if (parsed.ok()) {
      out.assessment = std::move(parsed.assessment);
      out.feedback = std::move(parsed.feedback);
      out.warnings = std::move(parsed.warnings);
      out.failure.clear();
      return out;
    }
    out.failure = "unparseable reply: " + describe(parsed.errors);
    req.messages.push_back({"assistant", raw.raw});
    req.messages.push_back(
        {"user", "[council] Your reply could not be used (" + describe(parsed.errors) +
                     "). Reply with exactly one fenced ```json block containing \"scores\" for every "
                     "rubric dimension (dimension_id, integer score 0-4, justification, evidence "
                     "quotes copied verbatim from the transcript) and \"total\"."});
  }
  return out;
}

Round1Outcome GradingCouncil::round1(const Transcript& transcript) const {
  VariableMap vars{{"transcript", render_transcript(transcript)}, {"rubric", render_rubric(rubric_)}};
  const std::string prompt = render_template(prompts_.round1, vars);
  auto attempts = fan_out<Attempt>(raters_.size(), options_.parallel, [&](std::size_t i) {
    return run_rater(*raters_[i], {raters_[i]->spec().rater_id, Round::r1, false}, prompt);
  });

  Round1Outcome out;
  for (std::size_t i = 0; i < attempts.size(); ++i) {
    auto& a = attempts[i];
    out.outputs.insert(out.outputs.end(), a.outputs.begin(), a.outputs.end());
    out.warnings.insert(out.warnings.end(), a.warnings.begin(), a.warnings.end());
    if (a.assessment) {
      out.assessments.push_back(std::move(*a.assessment));
    } else {
      out.flags.push_back({FlagKind::parse_failure,
                           "r1 " + raters_[i]->spec().rater_id + " dropped from council: " + a.failure, 0.0});
    }
  }
  if (out.assessments.size() < 2) {
    CouncilPartial partial{transcript.session_id, out.assessments, {}, out.flags, out.warnings, out.outputs};
    throw GradingAborted("round 1 produced " + std::to_string(out.assessments.size()) +
                             " usable assessments; at least 2 are required",
                         std::move(partial));
  }
  return out;
}

RaterOutcome GradingCouncil::round2(const Transcript& transcript, const Assessment& own,
                                    const PeerSummary& peers, ModelBackend& backend) const {
  if (own.round != Round::r1) throw Error("round 2 needs the rater's round 1 assessment");
  VariableMap vars{{"transcript", render_transcript(transcript)},
                   {"rubric", render_rubric(rubric_)},
                   {"own_assessment", render_assessment(own)},
                   {"peer_summary", render_peer_summary(peers)}};
  Attempt a = run_rater(backend, {backend.spec().rater_id, Round::r2, false},
                        render_template(prompts_.round2, vars));
  RaterOutcome out;
  out.outputs = std::move(a.outputs);
  out.warnings = std::move(a.warnings);
  if (a.assessment) {
    out.assessment = std::move(*a.assessment);
  } else {
    out.assessment = own;
    out.assessment.round = Round::r2;
    out.assessment.notes = "round 1 scores carried forward";
    out.flags.push_back({FlagKind::parse_failure,
                         "r2 " + backend.spec().rater_id + " carried round 1 scores forward: " + a.failure, 0.0});
  }
  return out;
}

ChairOutcome GradingCouncil::chair_synthesize(const Transcript& transcript,
                                              const std::vector<Assessment>& prior) const {
  ModelBackend& chair = chair_backend();
  std::string rendered;
  for (const auto& a : prior) rendered += render_assessment(a) + "\n";
  VariableMap vars{{"transcript", render_transcript(transcript)},
                   {"rubric", render_rubric(rubric_)},
                   {"assessments", rendered},
                   {"assessment_count", std::to_string(prior.size())}};
  Attempt a = run_rater(chair, {chair.spec().rater_id, Round::chair, true},
                        render_template(prompts_.chair, vars));
  if (!a.assessment || !a.feedback) {
    CouncilPartial partial;
    partial.transcript_ref = transcript.session_id;
    partial.outputs = std::move(a.outputs);
    partial.flags.push_back({FlagKind::parse_failure, "chair " + chair.spec().rater_id + ": " + a.failure, 0.0});
    throw GradingAborted("chair synthesis failed: " + a.failure, std::move(partial));
  }
  return {std::move(*a.assessment), std::move(*a.feedback), std::move(a.warnings), std::move(a.outputs)};
}

CouncilRun GradingCouncil::grade(const Transcript& input) const {
  const Transcript transcript = annotate_stacked_turns(input);
  CouncilRun run;
  CouncilResult& result = run.result;
  result.transcript_ref = transcript.session_id;

  Round1Outcome r1 = round1(transcript);
  result.round1 = r1.assessments;
  result.flags = r1.flags;
  result.warnings = r1.warnings;
  run.outputs = r1.outputs;

  const PeerSummary peers = compile_peer_summary(result.round1);
  auto backend_for = [&](const std::string& rater_id) -> ModelBackend& {
    for (auto* r : raters_) {
      if (r->spec().rater_id == rater_id) return *r;
    }
    throw Error("no backend for rater " + rater_id);
  };
  auto r2 = fan_out<RaterOutcome>(result.round1.size(), options_.parallel, [&](std::size_t i) {
    return round2(transcript, result.round1[i], peers, backend_for(result.round1[i].rater_id));
  });
  for (auto& o : r2) {
    result.round2.push_back(std::move(o.assessment));
    result.flags.insert(result.flags.end(), o.flags.begin(), o.flags.end());
    result.warnings.insert(result.warnings.end(), o.warnings.begin(), o.warnings.end());
    run.outputs.insert(run.outputs.end(), o.outputs.begin(), o.outputs.end());
  }
  const auto disagreement = flag_assessments(result.round2, options_.thresholds);
  result.flags.insert(result.flags.end(), disagreement.begin(), disagreement.end());

  std::vector<Assessment> prior = result.round1;
  prior.insert(prior.end(), result.round2.begin(), result.round2.end());
  ChairOutcome chair;
  try {
    chair = chair_synthesize(transcript, prior);
  } catch (const GradingAborted& e) {
    CouncilPartial partial = e.partial();
    partial.round1 = result.round1;
    partial.round2 = result.round2;
    partial.flags.insert(partial.flags.begin(), result.flags.begin(), result.flags.end());
    partial.warnings = result.warnings;
    partial.outputs.insert(partial.outputs.begin(), run.outputs.begin(), run.outputs.end());
    throw GradingAborted(e.what(), std::move(partial));
  }
  result.chair = std::move(chair.assessment);
  result.feedback = std::move(chair.feedback);
  result.warnings.insert(result.warnings.end(), chair.warnings.begin(), chair.warnings.end());
  run.outputs.insert(run.outputs.end(), chair.outputs.begin(), chair.outputs.end());

  const auto unverified = evidence_flags(result.chair, result.feedback, transcript);
  result.flags.insert(result.flags.end(), unverified.begin(), unverified.end());
  validate(result, &rubric_);
  return run;
}

}  // namespace viva
