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

#include "viva/storage.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <set>

#include "viva/codec.hpp"
#include "viva/io.hpp"

namespace viva {
namespace fs = std::filesystem;
namespace {

constexpr std::string_view kAuditDir = "audit";

template <typename T>
T load_entity(const fs::path& file) {
  auto bytes = try_read_file(file);
  if (!bytes) {
    if (!fs::exists(file)) {
      throw StorageError(StorageError::Kind::not_found, file.string(), "not found: " + file.string());
    }
    throw StorageError(StorageError::Kind::corrupt, file.string(), "unreadable file: " + file.string());
  }
  try {
    return deserialize<T>(*bytes);
  } catch (const SchemaError& e) {
    throw StorageError(StorageError::Kind::corrupt, file.string(),
                       "corrupt data in " + file.string() + ": " + e.what());
  }
}

TimestampMs wall_now() {
  return std::chrono::duration_cast<std::chrono::milliseconds>(
             std::chrono::system_clock::now().time_since_epoch())
      .count();
}

}  // namespace

std::string_view to_string(StorageError::Kind k) {
  switch (k) {
    case StorageError::Kind::not_found: return "not_found";
    case StorageError::Kind::corrupt: return "corrupt";
    case StorageError::Kind::collision: return "collision";
    case StorageError::Kind::conflict: return "conflict";
    case StorageError::Kind::invalid: return "invalid";
  }
  return "?";
}

std::string_view to_string(AuditStatus s) { return s == AuditStatus::open ? "open" : "resolved"; }

void check_session_id(const std::string& id) {
  const bool safe = !id.empty() && id.size() <= 128 && id.front() != '.' && id != kAuditDir &&
                    std::all_of(id.begin(), id.end(), [](unsigned char c) {
                      return std::isalnum(c) || c == '-' || c == '_' || c == '.';
                    });
  if (!safe) {
    throw StorageError(StorageError::Kind::invalid, id,
                       "session id '" + id + "' must be a plain name of letters, digits, '.', '_' or '-'");
  }
}

Json encode(const ScoreOverride& o) {
  Json scores = Json::array();
  for (const auto& s : o.scores) scores.push_back(encode(s));
  return {{"scores", scores}, {"total", o.total}};
}

ScoreOverride decode_override(const Json& j, const std::string& path) {
  ObjectReader r(j, path);
  ScoreOverride o;
  for_each_element(r.value("scores"), r.path("scores"), [&](const Json& e, const std::string& p) {
    o.scores.push_back(decode_dimension_score(e, p));
  });
  o.total = r.get<int>("total");
  r.finish();
  return o;
}

Json encode(const AuditResolution& r) {
  return {{"auditor_id", r.auditor_id},
          {"override", r.override_scores ? encode(*r.override_scores) : Json(nullptr)},
          {"note", r.note},
          {"timestamp", r.timestamp}};
}

AuditResolution decode_resolution(const Json& j, const std::string& path) {
  ObjectReader r(j, path);
  AuditResolution res;
  res.auditor_id = r.get<std::string>("auditor_id");
  if (res.auditor_id.empty()) throw SchemaError(r.path("auditor_id"), "must be non-empty");
  if (const Json* o = r.optional_value("override")) res.override_scores = decode_override(*o, r.path("override"));
  res.note = r.get_or<std::string>("note", "");
  res.timestamp = r.get_or<TimestampMs>("timestamp", 0);
  r.finish();
  return res;
}

Json encode(const AuditItem& item) {
  Json flags = Json::array();
  for (const auto& f : item.flags) flags.push_back(encode(f));
  return {{"id", item.id},
          {"council_ref", item.council_ref},
          {"flags", flags},
          {"status", std::string(to_string(item.status))},
          {"resolution", item.resolution ? encode(*item.resolution) : Json(nullptr)},
          {"sequence", item.sequence},
          {"created_at", item.created_at}};
}

AuditItem decode_audit_item(const Json& j, const std::string& path) {
  ObjectReader r(j, path);
  AuditItem item;
  item.id = r.get<std::string>("id");
  item.council_ref = r.get<std::string>("council_ref");
  for_each_element(r.value("flags"), r.path("flags"), [&](const Json& e, const std::string& p) {
    item.flags.push_back(decode_flag(e, p));
  });
  const auto status = r.get<std::string>("status");
  if (status == "open") {
    item.status = AuditStatus::open;
  } else if (status == "resolved") {
    item.status = AuditStatus::resolved;
  } else {
    throw SchemaError(r.path("status"), "unknown status '" + status + "'");
  }
  if (const Json* res = r.optional_value("resolution")) item.resolution = decode_resolution(*res, r.path("resolution"));
  item.sequence = r.get<std::int64_t>("sequence");
  item.created_at = r.get<TimestampMs>("created_at");
  r.finish();
  if (item.status == AuditStatus::resolved && !item.resolution) {
    throw SchemaError(r.path("resolution"), "resolved item needs a resolution");
  }
  return item;
}

void validate_override(const ScoreOverride& o, const Assessment& chair) {
  if (o.scores.size() != chair.scores.size()) {
    throw SchemaError("override.scores", "expected " + std::to_string(chair.scores.size()) +
                                             " dimension scores, got " + std::to_string(o.scores.size()));
  }
  std::set<std::string> seen;
  int sum = 0;
  for (std::size_t i = 0; i < o.scores.size(); ++i) {
    const auto& s = o.scores[i];
    const std::string where = "override.scores[" + std::to_string(i) + "]";
    if (!chair.find(s.dimension_id)) throw SchemaError(where + ".dimension_id", "unknown dimension '" + s.dimension_id + "'");
    if (!seen.insert(s.dimension_id).second) throw SchemaError(where + ".dimension_id", "duplicate dimension");
    if (s.score < 0 || s.score > kScaleMax) throw SchemaError(where + ".score", "score must be within 0..4");
    sum += s.score;
  }
  if (o.total != sum) {
    throw SchemaError("override.total", "total " + std::to_string(o.total) + " does not equal score sum " +
                                            std::to_string(sum));
  }
  if (o.total < 0 || o.total > kTotalMax) throw SchemaError("override.total", "total must be within 0..20");
}

Store::Store(fs::path root, Now now) : root_(std::move(root)), now_(now ? std::move(now) : Now(wall_now)) {}

fs::path Store::session_dir(const std::string& session_id) const {
  check_session_id(session_id);
  return root_ / session_id;
}

fs::path Store::captures_dir(const std::string& session_id) const { return session_dir(session_id) / "captures"; }

fs::path Store::queue_file() const { return root_ / kAuditDir / "queue.json"; }

fs::path Store::write_entity(const fs::path& file, const std::string& bytes, bool overwrite) const {
  if (!overwrite) {
    if (auto existing = try_read_file(file); existing && *existing != bytes) {
      throw StorageError(StorageError::Kind::collision, file.string(),
                         file.string() + " already exists with different content");
    }
  }
  write_file_atomic(file, bytes);
  return file;
}

fs::path Store::store_transcript(const Transcript& t, bool overwrite) {
  return write_entity(session_dir(t.session_id) / "transcript.json", serialize(t), overwrite);
}

Transcript Store::load_transcript(const std::string& session_id) const {
  return load_entity<Transcript>(session_dir(session_id) / "transcript.json");
}

fs::path Store::store_council(const CouncilResult& c, bool overwrite) {
  return write_entity(session_dir(c.transcript_ref) / "council.json", serialize(c), overwrite);
}

CouncilResult Store::load_council(const std::string& session_id) const {
  return load_entity<CouncilResult>(session_dir(session_id) / "council.json");
}

bool Store::has_council(const std::string& session_id) const {
  return fs::exists(session_dir(session_id) / "council.json");
}

std::vector<std::string> Store::sessions() const {
  std::vector<std::string> out;
  std::error_code ec;
  for (const auto& entry : fs::directory_iterator(root_, ec)) {
    if (!entry.is_directory()) continue;
    const std::string name = entry.path().filename().string();
    if (name == kAuditDir) continue;
    if (fs::exists(entry.path() / "transcript.json") || fs::exists(entry.path() / "council.json")) {
      out.push_back(name);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<AuditItem> Store::read_queue() const {
  const fs::path file = queue_file();
  auto bytes = try_read_file(file);
  if (!bytes) return {};
  try {
    const Json body = strip_version(parse_json(*bytes, file.string()), "queue");
    ObjectReader r(body, "");
    std::vector<AuditItem> items;
    for_each_element(r.value("items"), "items", [&](const Json& e, const std::string& p) {
      items.push_back(decode_audit_item(e, p));
    });
    r.finish();
    return items;
  } catch (const SchemaError& e) {
    throw StorageError(StorageError::Kind::corrupt, file.string(),
                       "corrupt data in " + file.string() + ": " + e.what());
  }
}

void Store::write_queue(const std::vector<AuditItem>& items) const {
  Json arr = Json::array();
  for (const auto& i : items) arr.push_back(encode(i));
  write_file_atomic(queue_file(), canonical_dump(with_version({{"items", arr}})));
}

std::optional<AuditItem> Store::enqueue_flags(const CouncilResult& council) {
  if (council.flags.empty()) return std::nullopt;
  if (!has_council(council.transcript_ref)) {
    throw StorageError(StorageError::Kind::not_found, council.transcript_ref,
                       "council for session " + council.transcript_ref + " must be stored before enqueueing");
  }
  std::lock_guard lock(queue_mu_);
  auto items = read_queue();
  const std::string id = "audit-" + council.transcript_ref;
  for (const auto& i : items) {
    if (i.id == id) return i;
  }
  AuditItem item;
  item.id = id;
  item.council_ref = council.transcript_ref;
  item.flags = council.flags;
  item.created_at = now_();
  std::int64_t seq = 0;
  for (const auto& i : items) seq = std::max(seq, i.sequence);
  item.sequence = seq + 1;
  items.push_back(item);
  write_queue(items);
  return item;
}

std::vector<AuditItem> Store::queue(std::optional<AuditStatus> status) const {
  std::vector<AuditItem> items;
  {
    std::lock_guard lock(queue_mu_);
    items = read_queue();
  }
  std::erase_if(items, [&](const AuditItem& i) { return status && i.status != *status; });
  std::stable_sort(items.begin(), items.end(),
                   [](const AuditItem& a, const AuditItem& b) { return a.sequence < b.sequence; });
  return items;
}

AuditItem Store::item(const std::string& item_id) const {
  for (auto& i : queue()) {
    if (i.id == item_id) return i;
  }
  throw StorageError(StorageError::Kind::not_found, item_id, "no audit item " + item_id);
}

AuditItem Store::resolve(const std::string& item_id, AuditResolution resolution) {
  if (resolution.auditor_id.empty()) throw SchemaError("auditor_id", "must be non-empty");
  std::lock_guard lock(queue_mu_);
  auto items = read_queue();
  auto it = std::find_if(items.begin(), items.end(), [&](const AuditItem& i) { return i.id == item_id; });
  if (it == items.end()) throw StorageError(StorageError::Kind::not_found, item_id, "no audit item " + item_id);
  if (it->status == AuditStatus::resolved) {
    throw StorageError(StorageError::Kind::conflict, item_id,
                       "audit item " + item_id + " was already resolved by " + it->resolution->auditor_id);
  }
  if (resolution.override_scores) {
    const CouncilResult council = load_council(it->council_ref);
    validate_override(*resolution.override_scores, council.chair);
  }
  if (resolution.timestamp == 0) resolution.timestamp = now_();
  it->status = AuditStatus::resolved;
  it->resolution = std::move(resolution);
  write_queue(items);
  return *it;
}

}  // namespace viva
