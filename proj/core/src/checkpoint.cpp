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


#include "lrnkit/checkpoint.hpp"

#include <fstream>

namespace lrn {

using nlohmann::json;

json matrix_to_json(const Matrix& m) {
  return json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", m.storage()}};
}

Matrix matrix_from_json(const json& doc, const std::string& what) {
  try {
    const auto rows = doc.at("rows").get<std::size_t>();
    const auto cols = doc.at("cols").get<std::size_t>();
    auto data = doc.at("data").get<std::vector<double>>();
    if (data.size() != rows * cols) {
      throw CheckpointError(what + ": " + std::to_string(data.size()) + " values for a " + shape_string(rows, cols) +
                            " matrix");
    }
    return Matrix(rows, cols, std::move(data));
  } catch (const json::exception& e) {
    throw CheckpointError(what + ": " + e.what());
  }
}

json cell_to_json(const CellParams& params) {
  json doc;
  doc["kind"] = std::string(to_string(params.kind));
  doc["activation"] = std::string(to_string(params.activation));
  doc["d_in"] = params.input_size;
  doc["d"] = params.hidden_size;
  params.for_each([&](std::string_view name, const Matrix& m) { doc[std::string(name)] = matrix_to_json(m); });
  return doc;
}

CellParams cell_from_json(const json& doc) {
  CellParams p;
  try {
    p.kind = parse_cell_kind(doc.at("kind").get<std::string>());
    p.activation = parse_activation(doc.at("activation").get<std::string>());
    p.input_size = doc.at("d_in").get<std::size_t>();
    p.hidden_size = doc.at("d").get<std::size_t>();
  } catch (const json::exception& e) {
    throw CheckpointError(std::string("cell checkpoint: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw CheckpointError(std::string("cell checkpoint: ") + e.what());
  }
  // Start from the variant's layout so unknown or missing entries are caught.
  CellParams layout = CellParams::zeros(p.kind, p.activation, p.input_size, p.hidden_size);
  layout.activation = p.activation;
  layout.for_each([&](std::string_view name, Matrix& m) {
    const std::string key(name);
    if (!doc.contains(key)) throw CheckpointError("cell checkpoint: missing " + key);
    m = matrix_from_json(doc.at(key), key);
  });
  try {
    layout.validate();
  } catch (const ShapeError& e) {
    throw CheckpointError(std::string("cell checkpoint: ") + e.what());
  }
  return layout;
}

void write_json_file(const std::filesystem::path& path, const json& doc) {
  std::ofstream out(path);
  if (!out) throw CheckpointError("cannot open " + path.string() + " for writing");
  out << doc.dump() << '\n';
  if (!out) throw CheckpointError("failed writing " + path.string());
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw CheckpointError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw CheckpointError(path.string() + ": " + e.what());
  }
}

void save_cell(const std::filesystem::path& path, const CellParams& params) {
  params.validate();
  write_json_file(path, cell_to_json(params));
}

CellParams load_cell(const std::filesystem::path& path) { return cell_from_json(read_json_file(path)); }

}  // namespace lrn
