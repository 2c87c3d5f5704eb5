// Copyright 2026 The lrnkit Authors.
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


// JSON persistence for cell parameters. A cell document looks like
//
//   {"kind": "lrn", "activation": "tanh", "d_in": 4, "d": 8,
//    "W_q": {"rows": 4, "cols": 8, "data": [...]}, "b_q": {...}, ...}
//
// Reals are written in shortest round-trip form, so load(save(p)) == p bit for
// bit.

#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>

#include <nlohmann/json.hpp>

#include "lrnkit/cells.hpp"

namespace lrn {

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

nlohmann::json matrix_to_json(const Matrix& m);
/// `what` names the entry in error messages.
Matrix matrix_from_json(const nlohmann::json& doc, const std::string& what);

nlohmann::json cell_to_json(const CellParams& params);
/// Validates kind, sizes and every matrix shape.
CellParams cell_from_json(const nlohmann::json& doc);

void write_json_file(const std::filesystem::path& path, const nlohmann::json& doc);
nlohmann::json read_json_file(const std::filesystem::path& path);

void save_cell(const std::filesystem::path& path, const CellParams& params);
CellParams load_cell(const std::filesystem::path& path);

}  // namespace lrn
