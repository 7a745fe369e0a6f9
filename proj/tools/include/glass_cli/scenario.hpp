#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "glass_cli/workspace.hpp"

namespace glass::cli {

enum class ActorRole { citizen, issuer, verifier, authority };

struct Actor {
  std::string name;
  ActorRole role = ActorRole::citizen;
  std::string org;
};

struct ScenarioScript {
  std::uint64_t seed = 0;
  std::vector<Actor> actors;
  std::vector<nlohmann::json> steps;

  // Errors: Errc::config for duplicate actors, unknown roles or actions, or
  // steps naming undeclared actors.
  static ScenarioScript from_json(const nlohmann::json& j);
  const Actor& actor(const std::string& name) const;
};

struct StepResult {
  std::size_t index = 0;
  std::string action;
  std::string status;  // "ok", "expected-error" or "failed"
  nlohmann::json detail = nlohmann::json::object();
};

struct RunReport {
  std::uint64_t seed = 0;
  bool ok = true;
  std::optional<std::size_t> failed_step;
  std::vector<StepResult> steps;
  std::uint64_t final_height = 0;
  std::vector<ledger::AuditRow> audit;
  std::vector<nlohmann::json> verification_reports;

  nlohmann::json to_json() const;
};

nlohmann::json audit_json(const std::vector<ledger::AuditRow>& rows);

// Runs steps in order and stops at the first divergence. The workspace is
// left holding whatever the steps committed; the caller decides whether to
// save it.
RunReport run_scenario(Workspace& ws, const ScenarioScript& script);

}  // namespace glass::cli
