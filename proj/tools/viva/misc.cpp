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

#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>

#include "commands.hpp"
#include "viva/backend.hpp"
#include "viva/case_selector.hpp"
#include "viva/codec.hpp"
#include "viva/io.hpp"
#include "viva/orchestrator.hpp"
#include "viva/report.hpp"
#include "viva/service.hpp"
#include "viva/storage.hpp"
#include "viva/turn_guard.hpp"

namespace viva::cli {
namespace fs = std::filesystem;

std::string storage_hint(const StorageError& e) {
  return e.kind() == StorageError::Kind::collision ? "; rerun with --force to replace it" : "";
}

int report_exception(std::ostream& err) {
  try {
    throw;
  } catch (const StorageError& e) {
    err << "error: " << e.what() << storage_hint(e) << "\n";
    return e.kind() == StorageError::Kind::corrupt ? kInternal : kUserError;
  } catch (const SchemaError& e) {
    err << "error: " << e.what() << "\n";
  } catch (const StartupError& e) {
    err << "error: " << e.what() << "\n";
  } catch (const TemplateError& e) {
    err << "error: " << e.what() << "\n";
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
  } catch (const SelectionError& e) {
    err << "error: " << e.what() << "\n";
  } catch (const UndefinedStatistic& e) {
    err << "error: " << e.what() << "\n";
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kInternal;
  }
  return kUserError;
}

int run_analyze(const AnalyzeOptions& o, std::ostream& out, std::ostream& err) {
  try {
    const auto metric = parse_metric(o.metric);
    if (!metric) throw StartupError("--metric must be ordinal, interval or nominal");
    const Cohort cohort = load_cohort(o.council_dir);
    for (const auto& e : cohort.errors) err << "warning: skipped " << e << "\n";
    if (cohort.records.empty()) throw StartupError("no council results under " + o.council_dir);
    const ReliabilityReport report = build_report(cohort.records, *metric);
    const std::string markdown = render_markdown(report);
    if (o.report.empty()) {
      out << markdown;
      return kOk;
    }
    const fs::path md(o.report);
    const fs::path json = md.parent_path() / "report.json";
    write_file_atomic(md, markdown);
    write_file_atomic(json, canonical_dump(encode(report)));
    out << "report: " << md.string() << "\n" << "report data: " << json.string() << "\n";
    return kOk;
  } catch (...) {
    return report_exception(err);
  }
}

int run_select_case(const SelectCaseOptions& o, std::ostream& out, std::ostream& err) {
  try {
    const CaseCatalog catalog = load_catalog(o.cases);
    if (o.distribution) {
      std::mt19937 prng(o.prng_seed);
      std::vector<std::uint32_t> seeds(static_cast<std::size_t>(*o.distribution));
      for (auto& s : seeds) s = static_cast<std::uint32_t>(prng());
      const auto rep = distribution_report(catalog, seeds);
      for (std::size_t i = 0; i < rep.case_ids.size(); ++i) {
        out << rep.case_ids[i] << "\t" << rep.counts[i] << "\n";
      }
      out << "draws " << rep.draws << ", chi-square " << rep.chi_square << " (dof " << rep.degrees_of_freedom
          << "), p = " << rep.p_value << "\n";
      return kOk;
    }
    std::uint32_t seed = 0;
    if (o.seed) {
      seed = *o.seed;
    } else if (!o.session_id.empty()) {
      seed = seed_from_session_id(o.session_id);
    } else {
      throw StartupError("pass --seed, --session-id or --distribution");
    }
    const auto sel = select_case(seed, catalog);
    out << "seed " << seed << " -> index " << sel.eligible_index << ": " << sel.exam_case.id << " ("
        << sel.exam_case.title << ")\n";
    return kOk;
  } catch (...) {
    return report_exception(err);
  }
}

int run_guard(const GuardOptions& o, std::istream& in, std::ostream& out, std::ostream& err) {
  try {
    std::optional<ClarificationPatterns> custom;
    if (!o.patterns.empty()) custom = ClarificationPatterns::load(o.patterns);
    const ClarificationPatterns& patterns = custom ? *custom : ClarificationPatterns::builtin();
    if (o.mode != "examiner" && o.mode != "student") throw StartupError("--mode must be examiner or student");
    int rejected = 0;
    auto check = [&](const std::string& text) {
      if (o.mode == "examiner") {
        const auto v = validate_examiner_turn(text);
        out << (v.accepted() ? "accept" : "reject") << "\tquestions=" << v.question_count;
        if (!v.accepted()) {
          out << "\treason=" << to_string(v.reason) << "\tfirst=" << first_question(text);
          ++rejected;
        }
        out << "\n";
      } else {
        out << (is_clarification_request(text, patterns) ? "clarification" : "answer") << "\n";
      }
    };
    if (o.texts.empty()) {
      std::string line;
      while (std::getline(in, line)) check(line);
    } else {
      for (const auto& t : o.texts) check(t);
    }
    return rejected ? kUserError : kOk;
  } catch (...) {
    return report_exception(err);
  }
}

int run_audit(const AuditOptions& o, std::ostream& out, std::ostream& err) {
  try {
    Store store(o.data);
    if (o.action == "list") {
      std::optional<AuditStatus> status;
      if (o.status == "open") status = AuditStatus::open;
      if (o.status == "resolved") status = AuditStatus::resolved;
      for (const auto& item : store.queue(status)) {
        out << item.id << "\t" << to_string(item.status) << "\t" << item.flags.size() << " flag(s)\n";
        for (const auto& f : item.flags) out << "    " << to_string(f.kind) << ": " << f.detail << "\n";
      }
      return kOk;
    }
    if (o.action == "show") {
      const AuditItem item = store.item(o.item_id);
      Json j{{"item", encode(item)}, {"council", encode(store.load_council(item.council_ref))}};
      out << j.dump(2) << "\n";
      return kOk;
    }
    if (o.action == "resolve") {
      AuditResolution res;
      res.auditor_id = o.auditor;
      res.note = o.note;
      if (!o.override_file.empty()) {
        res.override_scores = decode_override(parse_json(read_file(o.override_file), o.override_file));
      }
      const AuditItem item = store.resolve(o.item_id, res);
      out << item.id << " resolved by " << item.resolution->auditor_id
          << (item.resolution->affirmed() ? " (chair grade affirmed)" : " (override recorded)") << "\n";
      return kOk;
    }
    throw StartupError("audit action must be list, show or resolve");
  } catch (...) {
    return report_exception(err);
  }
}

int run_serve(const ServeOptions& o, std::ostream& out, std::ostream& err) {
  try {
    ExamPrompts prompts = ExamPrompts::load(o.paths.prompts);
    SessionConfig config;
    config.catalog = load_catalog(o.paths.cases);
    config.project_budget = o.project_budget;
    config.case_budget = o.case_budget;
    if (!o.roster.empty()) {
      for (auto& id : read_roster(o.roster)) config.roster.insert(std::move(id));
    }
    validate(config);

    std::optional<MockScripts> scripts;
    if (!o.paths.mock_script.empty()) scripts = load_mock_scripts(o.paths.mock_script);
    BackendSpec spec;
    spec.rater_id = "examiner";
    if (!o.paths.backends.empty()) {
      auto bc = load_backend_config(o.paths.backends);
      if (bc.examiner) spec = *bc.examiner;
    } else if (!scripts) {
      throw StartupError("no examiner backend: pass --backends or --mock-script");
    }
    auto backend = make_backend(spec, scripts ? &*scripts : nullptr);

    std::unique_ptr<Clock> clock;
    if (o.clock == "wall") {
      clock = std::make_unique<WallClock>();
    } else if (o.clock == "logical") {
      clock = std::make_unique<LogicalClock>(0, 1000);
    } else {
      throw StartupError("--clock must be logical or wall");
    }
    std::unique_ptr<ExamOrchestrator> orchestrator =
        o.patterns.empty()
            ? std::make_unique<ExamOrchestrator>(std::move(prompts), *backend, *clock)
            : std::make_unique<ExamOrchestrator>(std::move(prompts), *backend, *clock,
                                                 std::make_shared<ClarificationDetector>(o.patterns));
    Store store(o.paths.data);
    ExamApi api(*orchestrator, *clock, store, config);
    ApiServer server(api);
    const int port = server.bind(o.host, o.port);
    if (port < 0) throw StartupError("cannot bind " + o.host + ":" + std::to_string(o.port));
    out << "listening on http://" << o.host << ":" << port << "\n" << std::flush;
    return server.listen() ? kOk : kInternal;
  } catch (...) {
    return report_exception(err);
  }
}

int run_cost(const CostOptions& o, std::ostream& out, std::ostream& err) {
  try {
    const BackendConfig config = load_backend_config(o.backends.empty() ? "data/backends.json" : o.backends);
    std::vector<BackendSpec> specs = config.council;
    if (config.examiner) specs.push_back(*config.examiner);
    std::vector<CompletionResponse> responses;
    std::vector<fs::path> files;
    for (const auto& entry : fs::recursive_directory_iterator(o.data)) {
      if (entry.is_regular_file() && entry.path().parent_path().filename() == "captures" &&
          entry.path().extension() == ".json") {
        files.push_back(entry.path());
      }
    }
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
      const Json j = parse_json(read_file(f), f.string());
      if (!j.contains("response") || j["response"].is_null()) continue;
      CompletionResponse r;
      r.rater_id = j.at("rater_id").get<std::string>();
      r.usage.input_units = j["response"].at("input_units").get<std::int64_t>();
      r.usage.output_units = j["response"].at("output_units").get<std::int64_t>();
      responses.push_back(std::move(r));
    }
    const CostSummary summary = usage_ledger(responses, specs);
    for (const auto& [rater, cost] : summary.per_backend) {
      out << rater << "\tin=" << cost.input_units << "\tout=" << cost.output_units << "\tcost_micro=" << cost.cost_micro
          << "\n";
    }
    out << "total_micro=" << summary.total_micro << "\n";
    return kOk;
  } catch (...) {
    return report_exception(err);
  }
}

}  // namespace viva::cli
