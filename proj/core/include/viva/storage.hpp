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
#include <filesystem>
#include <functional>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "viva/errors.hpp"
#include "viva/json_reader.hpp"
#include "viva/model.hpp"

namespace viva {

class StorageError : public Error {
 public:
  enum class Kind { not_found, corrupt, collision, conflict, invalid };

  StorageError(Kind kind, std::string subject, const std::string& message)
      : Error(message), kind_(kind), subject_(std::move(subject)) {}
  Kind kind() const noexcept { return kind_; }
  /// The file path or id the error is about.
  const std::string& subject() const noexcept { return subject_; }

 private:
  Kind kind_;
  std::string subject_;
};

std::string_view to_string(StorageError::Kind k);

/// Auditor-supplied replacement scores. Stored next to the chair assessment,
/// never in place of it.
struct ScoreOverride {
  std::vector<DimensionScore> scores;
  int total = 0;

  friend bool operator==(const ScoreOverride&, const ScoreOverride&) = default;
};

struct AuditResolution {
  std::string auditor_id;
  std::optional<ScoreOverride> override_scores;  // nullopt: chair grade affirmed
  std::string note;
  TimestampMs timestamp = 0;

  bool affirmed() const { return !override_scores.has_value(); }
  friend bool operator==(const AuditResolution&, const AuditResolution&) = default;
};

enum class AuditStatus { open, resolved };
std::string_view to_string(AuditStatus s);

struct AuditItem {
  std::string id;           // "audit-<session_id>"
  std::string council_ref;  // session id
  std::vector<Flag> flags;
  AuditStatus status = AuditStatus::open;
  std::optional<AuditResolution> resolution;
  std::int64_t sequence = 0;
  TimestampMs created_at = 0;

  friend bool operator==(const AuditItem&, const AuditItem&) = default;
};

Json encode(const ScoreOverride& o);
ScoreOverride decode_override(const Json& j, const std::string& path = "");
Json encode(const AuditResolution& r);
AuditResolution decode_resolution(const Json& j, const std::string& path = "");
Json encode(const AuditItem& item);
AuditItem decode_audit_item(const Json& j, const std::string& path = "");

/// Five distinct dimensions matching the chair's, scores 0..4, total equal
/// to the sum and within 0..20. Throws SchemaError naming the field.
void validate_override(const ScoreOverride& o, const Assessment& chair);

/// Filesystem store rooted at a data directory:
///   <root>/<session_id>/{transcript.json, council.json, captures/}
///   <root>/audit/queue.json
/// Writes are atomic. Rewriting identical bytes is always allowed; different
/// bytes need `overwrite`, else StorageError::collision.
class Store {
 public:
  using Now = std::function<TimestampMs()>;

  explicit Store(std::filesystem::path root, Now now = {});

  const std::filesystem::path& root() const { return root_; }
  std::filesystem::path session_dir(const std::string& session_id) const;
  std::filesystem::path captures_dir(const std::string& session_id) const;

  std::filesystem::path store_transcript(const Transcript& t, bool overwrite = false);
  Transcript load_transcript(const std::string& session_id) const;
  std::filesystem::path store_council(const CouncilResult& c, bool overwrite = false);
  CouncilResult load_council(const std::string& session_id) const;
  bool has_council(const std::string& session_id) const;

  /// Session directories holding a transcript or council, sorted.
  std::vector<std::string> sessions() const;

  /// Creates an open item iff the council has flags; returns the existing
  /// item when one was already created for this council.
  std::optional<AuditItem> enqueue_flags(const CouncilResult& council);

  /// Ordered by creation (sequence number).
  std::vector<AuditItem> queue(std::optional<AuditStatus> status = std::nullopt) const;
  AuditItem item(const std::string& item_id) const;

  /// Throws StorageError::conflict when the item is already resolved,
  /// not_found for unknown ids, SchemaError for invalid overrides.
  AuditItem resolve(const std::string& item_id, AuditResolution resolution);

 private:
  std::filesystem::path queue_file() const;
  std::vector<AuditItem> read_queue() const;
  void write_queue(const std::vector<AuditItem>& items) const;
  std::filesystem::path write_entity(const std::filesystem::path& file, const std::string& bytes,
                                     bool overwrite) const;

  std::filesystem::path root_;
  Now now_;
  mutable std::mutex queue_mu_;
};

/// Rejects ids that are not a single safe path component.
void check_session_id(const std::string& session_id);

}  // namespace viva
