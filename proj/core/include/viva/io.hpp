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
#include <optional>
#include <string>
#include <string_view>

namespace viva {

/// Whole-file read; nullopt when the file cannot be opened.
std::optional<std::string> try_read_file(const std::filesystem::path& file);

/// Whole-file read; throws StartupError naming the file on failure.
std::string read_file(const std::filesystem::path& file);

/// Writes via a sibling temporary and rename, creating parent directories.
void write_file_atomic(const std::filesystem::path& file, std::string_view bytes);

}  // namespace viva
