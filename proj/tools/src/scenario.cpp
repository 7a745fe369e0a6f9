#include "glass_cli/scenario.hpp"

#include <set>

#include <glass/canonical_json.hpp>
#include <glass/chaincode.hpp>
#include <glass/error.hpp>

namespace glass::cli {

using Json = nlohmann::json;

namespace {

const std::set<std::string> kActions = {"onboard",  "register_schema", "register_issuer", "register_app",
                                        "issue",    "retrieve",        "present",         "expect_error"};
const std::vector<std::string> kActorFields = {"actor", "subject", "issuer", "verifier", "app"};

ActorRole role_from_string(const std::string& text) {
  if (text == "citizen") return ActorRole::citizen;
  if (text == "issuer") return ActorRole::issuer;
  if (text == "verifier") return ActorRole::verifier;
  if (text == "authority") return ActorRole::authority;
  throw Error(Errc::config, "unknown role " + text);
}

// A step completed but its outcome differs from what the script expects.
struct Divergence {
  Json detail;
};

class Runner {
 public:
  Runner(Workspace& ws, const ScenarioScript& script) : ws_(ws), script_(script) {}

  RunReport run() {
    RunReport report;
    report.seed = ws_.seed();
    for (const auto& actor : script_.actors) ws_.ensure_wallet(actor.name);
    for (std::size_t i = 0; i < script_.steps.size(); ++i) {
      const auto& step = script_.steps[i];
      StepResult result{i, step.at("action").get<std::string>(), "ok", Json::object()};
      try {
        if (result.action == "expect_error") {
          result.detail = expect_error(step);
          result.status = "expected-error";
        } else {
          result.detail = execute(step, report);
        }
      } catch (const Divergence& d) {
        result.status = "failed";
        result.detail = d.detail;
      } catch (const Error& e) {
        result.status = "failed";
        result.detail = {{"error", std::string(to_string(e.code()))}, {"message", e.detail()}};
      }
      report.steps.push_back(std::move(result));
      if (report.steps.back().status == "failed") {
        report.ok = false;
        report.failed_step = i;
        break;
      }
    }
    auto blocks = ws_.channel().blocks();
    report.final_height = ws_.channel().height();
    report.audit = ledger::audit_rows(blocks);
    return report;
  }

 private:
  Json expect_error(const Json& step) {
    const auto expected = step.at("error").get<std::string>();
    RunReport scratch;
    try {
      execute(step.at("step"), scratch);
    } catch (const Error& e) {
      const std::string got(to_string(e.code()));
      if (got == expected) return {{"error", got}};
      throw Divergence{{{"expected_error", expected}, {"error", got}, {"message", e.detail()}}};
    }
    throw Divergence{{{"expected_error", expected}, {"error", nullptr}}};
  }

  const Actor& actor(const Json& step, const char* field = "actor") const {
    return script_.actor(step.at(field).get<std::string>());
  }

  Json execute(const Json& step, RunReport& report) {
    const auto action = step.at("action").get<std::string>();
    auto& channel = ws_.channel();
    const auto& who = actor(step);
    const auto& member = ws_.member(who.org);

    if (action == "onboard") {
      auto kind = who.role == ActorRole::citizen ? registry::PersonKind::natural_person
                                                 : registry::PersonKind::legal_person;
      if (step.contains("kind")) kind = registry::person_kind_from_string(step.at("kind").get<std::string>());
      auto did = portal::onboard(channel, member, ws_.wallet(who.name), kind);
      return {{"did", did.text()}, {"kind", to_string(kind)}};
    }
    if (action == "register_schema") {
      auto schema = registry::CredentialSchema::from_json(step.at("schema"));
      auto receipt = registry::register_schema(channel, member, schema);
      return {{"schema_id", schema.schema_id}, {"height", receipt.block_height}};
    }
    if (action == "register_issuer") {
      registry::TrustPolicyEntry entry;
      entry.issuer = ws_.wallet(actor(step, "issuer").name).did;
      entry.country_domain = step.at("domain").get<std::string>();
      entry.permitted_types = step.at("types").get<std::set<std::string>>();
      auto receipt = registry::register_trusted_issuer(channel, member, entry);
      return {{"issuer", entry.issuer.text()}, {"height", receipt.block_height}};
    }
    if (action == "register_app") {
      auto did = ws_.wallet(actor(step, "app").name).did;
      auto receipt = registry::register_trusted_app(channel, member, did);
      return {{"app", did.text()}, {"height", receipt.block_height}};
    }
    if (action == "issue") {
      const auto label = step.value("as", "credential");
      auto rng = ws_.rng("issue");
      portal::PortalSession session(channel, ws_.node_for(who.org), member, rng, ws_.chunk_size());
      auto subject = ws_.wallet(actor(step, "subject").name).did;
      auto record = portal::issue_and_distribute(session, ws_.wallet(who.name), subject,
                                                 step.at("schema_id").get<std::string>(), step.at("claims"));
      issued_.insert_or_assign(label, record);
      auto detail = record.to_json();
      detail["as"] = label;
      return detail;
    }
    if (action == "retrieve") {
      const auto label = step.value("credential", "credential");
      const auto via = step.value("via", who.org);
      auto it = issued_.find(label);
      if (it == issued_.end()) throw Error(Errc::not_found, "credential " + label);
      auto rng = ws_.rng("retrieve");
      portal::PortalSession session(channel, ws_.node_for(via), ws_.member(via), rng, ws_.chunk_size());
      auto vc = portal::retrieve_credential(session, ws_.wallet(who.name), it->second.cid);
      const bool matches = canon::serialize(vc.to_json()) == canon::serialize(it->second.credential.to_json());
      Json detail = {{"credential_id", vc.credential_id}, {"via", via}, {"matches_issued", matches}};
      if (!matches) throw Divergence{detail};
      retrieved_.insert_or_assign(label, vc);
      return detail;
    }
    if (action == "present") {
      std::vector<credential::VerifiableCredential> vcs;
      for (const auto& label : step.at("credentials")) {
        auto name = label.get<std::string>();
        if (auto r = retrieved_.find(name); r != retrieved_.end()) {
          vcs.push_back(r->second);
        } else if (auto i = issued_.find(name); i != issued_.end()) {
          vcs.push_back(i->second.credential);
        } else {
          throw Error(Errc::not_found, "credential " + name);
        }
      }
      const auto& verifier = actor(step, "verifier");
      auto rng = ws_.rng("challenge");
      auto result = portal::present_and_verify(channel, ws_.member(verifier.org), rng, ws_.wallet(who.name),
                                               std::move(vcs), ws_.wallet(verifier.name));
      auto detail = result.to_json();
      report.verification_reports.push_back(detail);
      const bool expect_overall = step.value("expect_overall", true);
      bool diverged = result.overall != expect_overall;
      if (step.contains("expect_reason") && step.at("expect_reason").get<std::string>() != result.reason) {
        diverged = true;
      }
      if (diverged) throw Divergence{detail};
      return detail;
    }
    throw Error(Errc::config, "unknown action " + action);
  }

  Workspace& ws_;
  const ScenarioScript& script_;
  std::map<std::string, portal::DistributionRecord> issued_;
  std::map<std::string, credential::VerifiableCredential> retrieved_;
};

void check_step(const ScenarioScript& script, const Json& step, std::size_t index) {
  auto where = "step " + std::to_string(index);
  if (!step.is_object() || !step.contains("action") || !step.at("action").is_string()) {
    throw Error(Errc::config, where + ": missing action");
  }
  const auto action = step.at("action").get<std::string>();
  if (!kActions.contains(action)) throw Error(Errc::config, where + ": unknown action " + action);
  if (action == "expect_error") {
    if (!step.contains("error") || !step.contains("step")) throw Error(Errc::config, where + ": needs error and step");
    Errc code;
    const auto name = step.at("error").get<std::string>();
    if (!errc_from_string(name, code)) throw Error(Errc::config, where + ": unknown error " + name);
    check_step(script, step.at("step"), index);
    return;
  }
  if (!step.contains("actor")) throw Error(Errc::config, where + ": missing actor");
  for (const auto& field : kActorFields) {
    if (step.contains(field)) script.actor(step.at(field).get<std::string>());
  }
}

}  // namespace

ScenarioScript ScenarioScript::from_json(const Json& j) {
  ScenarioScript s;
  try {
    s.seed = j.at("seed").get<std::uint64_t>();
    std::set<std::string> names;
    for (const auto& a : j.at("actors")) {
      Actor actor{a.at("name").get<std::string>(), role_from_string(a.at("role").get<std::string>()),
                  a.at("org").get<std::string>()};
      if (!names.insert(actor.name).second) throw Error(Errc::config, "duplicate actor " + actor.name);
      s.actors.push_back(std::move(actor));
    }
    for (const auto& step : j.at("steps")) s.steps.push_back(step);
    for (std::size_t i = 0; i < s.steps.size(); ++i) check_step(s, s.steps[i], i);
  } catch (const Json::exception& e) {
    throw Error(Errc::config, std::string("scenario: ") + e.what());
  } catch (const Error& e) {
    if (e.code() == Errc::config) throw;
    throw Error(Errc::config, std::string("scenario: ") + e.what());
  }
  return s;
}

const Actor& ScenarioScript::actor(const std::string& name) const {
  for (const auto& a : actors) {
    if (a.name == name) return a;
  }
  throw Error(Errc::config, "undeclared actor " + name);
}

Json audit_json(const std::vector<ledger::AuditRow>& rows) {
  Json out = Json::array();
  for (const auto& r : rows) {
    out.push_back(
        {{"height", r.height}, {"org", r.org}, {"chaincode", r.chaincode}, {"function", r.function}, {"status", r.status}});
  }
  return out;
}

Json RunReport::to_json() const {
  Json steps_json = Json::array();
  for (const auto& s : steps) {
    steps_json.push_back({{"index", s.index}, {"action", s.action}, {"status", s.status}, {"detail", s.detail}});
  }
  return {{"seed", seed},
          {"ok", ok},
          {"failed_step", failed_step ? Json(*failed_step) : Json(nullptr)},
          {"steps", steps_json},
          {"final_height", final_height},
          {"audit", audit_json(audit)},
          {"verification_reports", verification_reports}};
}

RunReport run_scenario(Workspace& ws, const ScenarioScript& script) { return Runner(ws, script).run(); }

}  // namespace glass::cli
