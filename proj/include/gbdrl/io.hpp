// Copyright 2026 The gbdrl Authors
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

// Instance files, run manifests and small file helpers.

#ifndef GBDRL_IO_HPP_
#define GBDRL_IO_HPP_

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "gbdrl/core.hpp"
#include "gbdrl/digest.hpp"
#include "gbdrl/problem.hpp"

namespace gbdrl {

inline constexpr int kInstanceSchema = 1;
inline constexpr int kManifestSchema = 1;
inline constexpr const char* kToolVersion = "0.1.0";

inline nlohmann::json instance_to_json(const CaseStudyCoefficients& c, const CaseStudyOptions& opt = {},
                                       const std::string& manifest_digest = "") {
  nlohmann::json doc;
  doc["schema_version"] = kInstanceSchema;
  doc["kind"] = "case_study1";
  doc["coefficients"] = c.c;
  doc["options"] = {{"big_u", opt.big_u}, {"box_cap", opt.box_cap}, {"x9_demand", opt.x9_demand}};
  doc["manifest"] = manifest_digest;
  return doc;
}

struct InstanceSpec {
  CaseStudyCoefficients coefficients;
  CaseStudyOptions options;
};

inline InstanceSpec instance_spec_from_json(const nlohmann::json& doc) {
  if (!doc.is_object() || doc.value("kind", "") != "case_study1") throw SchemaError("not a case_study1 instance");
  if (doc.value("schema_version", -1) != kInstanceSchema) throw SchemaError("unsupported instance schema_version");
  InstanceSpec s;
  try {
    s.coefficients.c = doc.at("coefficients").get<std::array<int, 5>>();
    const auto& o = doc.at("options");
    s.options.big_u = o.at("big_u").get<double>();
    s.options.box_cap = o.at("box_cap").get<double>();
    s.options.x9_demand = o.at("x9_demand").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("malformed instance: ") + e.what());
  }
  if (!s.coefficients.in_range()) throw SchemaError("instance coefficients out of range");
  return s;
}

inline ProblemInstance instance_from_json(const nlohmann::json& doc) {
  const InstanceSpec s = instance_spec_from_json(doc);
  return build_case_study1(s.coefficients, s.options);
}

/// Record of one command invocation; outputs carry its digest.
struct RunManifest {
  std::string command;
  std::uint64_t seed = 0;
  nlohmann::json counts = nlohmann::json::object();
  nlohmann::json config = nlohmann::json::object();
  std::vector<std::string> files;

  nlohmann::json to_json() const {
    nlohmann::json doc;
    doc["schema_version"] = kManifestSchema;
    doc["kind"] = "run_manifest";
    doc["tool_version"] = kToolVersion;
    doc["command"] = command;
    doc["seed"] = seed;
    doc["counts"] = counts;
    doc["config"] = config;
    doc["files"] = files;
    doc["schemas"] = {{"instance", kInstanceSchema}, {"manifest", kManifestSchema}};
    return doc;
  }

  /// Digest of everything except the file list, so it can be stamped into
  /// files before the list is complete.
  std::string digest() const {
    nlohmann::json d = to_json();
    d.erase("files");
    return sha256_hex(d.dump());
  }
};

inline nlohmann::json read_json_file(const std::filesystem::path& p) {
  std::ifstream in(p);
  if (!in) throw ValidationError("cannot open " + p.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw SchemaError(p.string() + ": " + e.what());
  }
}

inline void write_text_file(const std::filesystem::path& p, const std::string& text) {
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  if (!out) throw ValidationError("cannot write " + p.string());
  out << text;
  if (!out) throw ValidationError("write failed for " + p.string());
}

inline void write_json_file(const std::filesystem::path& p, const nlohmann::json& doc) {
  write_text_file(p, doc.dump(2) + "\n");
}

inline void write_manifest(const std::filesystem::path& dir, const RunManifest& m) {
  nlohmann::json doc = m.to_json();
  doc["digest"] = m.digest();
  write_json_file(dir / "manifest.json", doc);
}

}  // namespace gbdrl

#endif  // GBDRL_IO_HPP_
