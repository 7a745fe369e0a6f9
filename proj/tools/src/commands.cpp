#include "glass_cli/commands.hpp"

#include <CLI11.hpp>

#include <functional>
#include <iomanip>
#include <ostream>
#include <sstream>

#include <glass/base58.hpp>
#include <glass/canonical_json.hpp>
#include <glass/chaincode.hpp>
#include <glass/credential.hpp>
#include <glass/error.hpp>
#include <glass/portal.hpp>

#include "glass_cli/scenario.hpp"
#include "glass_cli/workspace.hpp"

namespace glass::cli {

using Json = nlohmann::json;

namespace {

struct Globals {
  std::string workspace = "workspace";
  std::optional<std::uint64_t> seed;
  bool json = false;
};

class Output {
 public:
  Output(std::ostream& out, bool json) : out_(out), json_(json) {}

  // Machine form when --json is set, otherwise the human form.
  void emit(const Json& value, const std::function<void(std::ostream&)>& human) {
    if (json_) {
      out_ << canon::serialize(value) << "\n";
    } else {
      human(out_);
    }
  }
  void emit(const Json& value) {
    emit(value, [&](std::ostream& os) { os << value.dump(2) << "\n"; });
  }
  std::ostream& raw() { return out_; }

 private:
  std::ostream& out_;
  bool json_;
};

registry::PersonKind parse_kind(const std::string& text) {
  if (text == "natural") return registry::PersonKind::natural_person;
  if (text == "legal") return registry::PersonKind::legal_person;
  return registry::person_kind_from_string(text);
}

std::vector<std::string> split_types(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ',');) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

Json read_user_json(const std::string& path) { return read_json_file(path); }

void print_audit(std::ostream& os, const std::vector<ledger::AuditRow>& rows) {
  os << std::left << std::setw(8) << "height" << std::setw(20) << "org" << std::setw(16) << "chaincode"
     << std::setw(28) << "function"
     << "status\n";
  for (const auto& r : rows) {
    os << std::left << std::setw(8) << r.height << std::setw(20) << r.org << std::setw(16) << r.chaincode
       << std::setw(28) << r.function << r.status << "\n";
  }
}

void print_report(std::ostream& os, const credential::VerificationReport& report) {
  os << "overall: " << (report.overall ? "true" : "false");
  if (!report.reason.empty()) os << " (" << report.reason << ")";
  os << "\n";
  for (const auto& c : report.per_credential) {
    os << "  " << c.credential_id << " issuer_trusted=" << c.issuer_trusted << " schema_valid=" << c.schema_valid
       << " signature_valid=" << c.signature_valid << (c.reason.empty() ? "" : " reason=" + c.reason) << "\n";
  }
}

std::vector<credential::VerifiableCredential> load_vcs(const std::vector<std::string>& files) {
  std::vector<credential::VerifiableCredential> vcs;
  for (const auto& f : files) vcs.push_back(credential::VerifiableCredential::from_json(read_user_json(f)));
  return vcs;
}

int cmd_init(const Globals& g, Output& out, const std::string& config_path) {
  InitOptions options;
  if (!config_path.empty()) options = InitOptions::from_json(read_user_json(config_path));
  if (g.seed) options.seed = *g.seed;
  Workspace::init(g.workspace, options);
  auto manifest = read_json_file(fs::path(g.workspace) / "manifest.json");
  out.emit(manifest, [&](std::ostream& os) {
    os << "initialized " << g.workspace << " (seed " << options.seed << ", " << options.swarm_nodes
       << " swarm nodes)\n";
  });
  return kExitOk;
}

int cmd_audit(const Globals& g, Output& out) {
  auto blocks = ledger::parse_jsonl(read_text_file(fs::path(g.workspace) / "ledger.jsonl"));
  auto rows = ledger::audit_rows(blocks);
  out.emit(audit_json(rows), [&](std::ostream& os) { print_audit(os, rows); });
  return kExitOk;
}

int cmd_verify_chain(const Globals& g, Output& out) {
  fs::path dir(g.workspace);
  auto text = read_text_file(dir / "ledger.jsonl");
  auto private_data = read_json_file(dir / "collections.json").get<ledger::PrivateStore>();
  auto report = ledger::verify_jsonl(text, &private_data);
  Json j = {{"ok", report.ok},
            {"first_bad_height", report.first_bad_height ? Json(*report.first_bad_height) : Json(nullptr)},
            {"reason", report.reason}};
  out.emit(j, [&](std::ostream& os) {
    if (report.ok) {
      os << "chain ok\n";
    } else {
      os << "chain invalid at height " << (report.first_bad_height ? std::to_string(*report.first_bad_height) : "?")
         << ": " << report.reason << "\n";
    }
  });
  return report.ok ? kExitOk : kExitFailure;
}

int cmd_scenario_run(const Globals& g, Output& out, const std::string& script_path, const std::string& report_path) {
  auto script = ScenarioScript::from_json(read_user_json(script_path));
  if (!Workspace::exists(g.workspace)) {
    InitOptions options;
    options.seed = g.seed.value_or(script.seed);
    Workspace::init(g.workspace, options);
  }
  auto ws = Workspace::open(g.workspace);
  auto report = run_scenario(*ws, script);
  ws->save();
  auto j = report.to_json();
  if (!report_path.empty()) write_text_file(report_path, canon::serialize(j) + "\n");
  out.emit(j, [&](std::ostream& os) {
    for (const auto& s : report.steps) {
      os << "[" << s.index << "] " << s.action << ": " << s.status;
      if (s.detail.contains("error")) os << " (" << s.detail.at("error").dump() << ")";
      os << "\n";
    }
    for (const auto& v : report.verification_reports) {
      os << "verification overall: " << (v.at("overall").get<bool>() ? "true" : "false") << "\n";
    }
    os << "final height " << report.final_height << "\n";
    if (report.ok) {
      os << "scenario ok\n";
    } else {
      os << "scenario failed at step " << *report.failed_step << "\n";
    }
  });
  return report.ok ? kExitOk : kExitFailure;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out_stream, std::ostream& err) {
  Globals g;
  CLI::App app{"Encrypted credential sharing over a permissioned ledger and a private content swarm", "glass"};
  app.require_subcommand(1);
  app.add_option("--workspace", g.workspace, "Workspace directory");
  app.add_option("--seed", g.seed, "Seed for deterministic key generation");
  app.add_flag("--json", g.json, "Machine-readable output");

  std::function<int(Output&)> action;

  auto* init = app.add_subcommand("init", "Create a workspace with a fresh channel and swarm");
  std::string config_path;
  init->add_option("--config", config_path, "JSON config: seed, swarm_nodes, chunk_size")->check(CLI::ExistingFile);
  init->callback([&] { action = [&](Output& o) { return cmd_init(g, o, config_path); }; });

  auto* identity = app.add_subcommand("identity", "Manage wallets");
  identity->require_subcommand(1);
  auto* id_create = identity->add_subcommand("create", "Create a wallet and register its DID");
  std::string id_name, id_kind = "natural", id_org(registry::kOrg1);
  id_create->add_option("name", id_name)->required();
  id_create->add_option("--kind", id_kind, "natural or legal");
  id_create->add_option("--org", id_org, "Org that submits the registration");
  id_create->callback([&] {
    action = [&](Output& o) {
      auto ws = Workspace::open(g.workspace);
      auto kind = parse_kind(id_kind);
      auto& wallet = ws->create_wallet(id_name);
      portal::onboard(ws->channel(), ws->member(id_org), wallet, kind);
      ws->save();
      auto doc = wallet.document(kind).to_json();
      o.emit(doc, [&](std::ostream& os) { os << id_name << " " << wallet.did.text() << "\n"; });
      return kExitOk;
    };
  });
  auto* id_show = identity->add_subcommand("show", "Print a wallet's public details");
  id_show->add_option("name", id_name)->required();
  id_show->callback([&] {
    action = [&](Output& o) {
      auto ws = Workspace::open(g.workspace);
      const auto& wallet = ws->wallet(id_name);
      Json holdings = Json::array();
      for (const auto& h : wallet.holdings) {
        holdings.push_back({{"credential_id", h.credential_id}, {"cid", h.cid.text()}, {"uri", h.uri}});
      }
      Json j = {{"did", wallet.did.text()},
                {"signing_public", crypto::b58(wallet.signing.public_key())},
                {"agreement_public", crypto::b58(wallet.agreement.public_key())},
                {"holdings", holdings}};
      o.emit(j);
      return kExitOk;
    };
  });

  auto* reg = app.add_subcommand("registry", "Trust registry");
  reg->require_subcommand(1);
  auto* reg_dump = reg->add_subcommand("dump", "Print the registry");
  reg_dump->callback([&] {
    action = [&](Output& o) {
      o.emit(read_json_file(fs::path(g.workspace) / "registry.json"));
      return kExitOk;
    };
  });
  std::string reg_name, reg_types, reg_domain, reg_org(registry::kAuthorityOrg);
  auto* reg_issuer = reg->add_subcommand("issuer", "Add a trusted issuer");
  reg_issuer->add_option("name", reg_name, "Issuer wallet")->required();
  reg_issuer->add_option("--types", reg_types, "Comma-separated credential type codes")->required();
  reg_issuer->add_option("--domain", reg_domain, "Country domain, e.g. DE")->required();
  reg_issuer->add_option("--org", reg_org, "Submitting org");
  reg_issuer->callback([&] {
    action = [&](Output& o) {
      auto ws = Workspace::open(g.workspace);
      registry::TrustPolicyEntry entry;
      entry.issuer = ws->wallet(reg_name).did;
      entry.country_domain = reg_domain;
      for (auto& t : split_types(reg_types)) entry.permitted_types.insert(t);
      auto receipt = registry::register_trusted_issuer(ws->channel(), ws->member(reg_org), entry);
      ws->save();
      o.emit(entry.to_json(), [&](std::ostream& os) {
        os << "trusted issuer " << entry.issuer.text() << " at height " << receipt.block_height << "\n";
      });
      return kExitOk;
    };
  });
  auto* reg_app = reg->add_subcommand("app", "Add a trusted verifier app");
  reg_app->add_option("name", reg_name, "Verifier wallet")->required();
  reg_app->add_option("--org", reg_org, "Submitting org");
  reg_app->callback([&] {
    action = [&](Output& o) {
      auto ws = Workspace::open(g.workspace);
      auto did = ws->wallet(reg_name).did;
      auto receipt = registry::register_trusted_app(ws->channel(), ws->member(reg_org), did);
      ws->save();
      o.emit(Json{{"app", did.text()}, {"height", receipt.block_height}}, [&](std::ostream& os) {
        os << "trusted app " << did.text() << " at height " << receipt.block_height << "\n";
      });
      return kExitOk;
    };
  });

  auto* schema = app.add_subcommand("schema", "Credential schemas");
  schema->require_subcommand(1);
  std::string schema_arg, schema_org(registry::kAuthorityOrg);
  auto* schema_reg = schema->add_subcommand("register", "Register a schema from a JSON file");
  schema_reg->add_option("file", schema_arg)->required()->check(CLI::ExistingFile);
  schema_reg->add_option("--org", schema_org, "Submitting org");
  schema_reg->callback([&] {
    action = [&](Output& o) {
      auto s = registry::CredentialSchema::from_json(read_user_json(schema_arg));
      auto ws = Workspace::open(g.workspace);
      auto receipt = registry::register_schema(ws->channel(), ws->member(schema_org), s);
      ws->save();
      o.emit(s.to_json(), [&](std::ostream& os) {
        os << "schema " << s.schema_id << " at height " << receipt.block_height << "\n";
      });
      return kExitOk;
    };
  });
  auto* schema_show = schema->add_subcommand("show", "Print a registered schema");
  schema_show->add_option("id", schema_arg)->required();
  schema_show->callback([&] {
    action = [&](Output& o) {
      credential::DumpRegistryView view(read_json_file(fs::path(g.workspace) / "registry.json"));
      auto s = view.schema(schema_arg);
      if (!s) throw Error(Errc::not_found, "schema " + schema_arg);
      o.emit(s->to_json());
      return kExitOk;
    };
  });

  auto* issue = app.add_subcommand("issue", "Issue, encrypt and distribute a credential");
  std::string issuer_name, subject_name, schema_id, claims_path, issue_org(registry::kOrg1), out_path;
  issue->add_option("--issuer", issuer_name)->required();
  issue->add_option("--subject", subject_name)->required();
  issue->add_option("--schema", schema_id)->required();
  issue->add_option("--claims", claims_path, "Claims JSON file")->required()->check(CLI::ExistingFile);
  issue->add_option("--org", issue_org, "Portal org");
  issue->add_option("--out", out_path, "Also write the signed credential here");
  issue->callback([&] {
    action = [&](Output& o) {
      auto claims = read_user_json(claims_path);
      auto ws = Workspace::open(g.workspace);
      auto rng = ws->rng("issue");
      portal::PortalSession session(ws->channel(), ws->node_for(issue_org), ws->member(issue_org), rng,
                                    ws->chunk_size());
      auto record = portal::issue_and_distribute(session, ws->wallet(issuer_name), ws->wallet(subject_name).did,
                                                 schema_id, claims);
      ws->save();
      if (!out_path.empty()) write_text_file(out_path, canon::serialize(record.credential.to_json()) + "\n");
      o.emit(record.to_json(), [&](std::ostream& os) {
        os << record.credential_id << "\n" << record.uri << " at height " << record.receipt.block_height << "\n";
      });
      return kExitOk;
    };
  });

  auto* retrieve = app.add_subcommand("retrieve", "Fetch and decrypt a credential for its subject");
  std::string cid_text, via(registry::kOrg1);
  retrieve->add_option("--subject", subject_name)->required();
  retrieve->add_option("--cid", cid_text)->required();
  retrieve->add_option("--via", via, "Org whose portal performs the reads");
  retrieve->add_option("--out", out_path, "Write the credential here");
  retrieve->callback([&] {
    action = [&](Output& o) {
      auto ws = Workspace::open(g.workspace);
      auto rng = ws->rng("retrieve");
      portal::PortalSession session(ws->channel(), ws->node_for(via), ws->member(via), rng, ws->chunk_size());
      try {
        auto vc = portal::retrieve_credential(session, ws->wallet(subject_name), ContentId::parse(cid_text));
        ws->save();
        auto j = vc.to_json();
        if (!out_path.empty()) write_text_file(out_path, canon::serialize(j) + "\n");
        o.emit(j);
      } catch (const Error&) {
        // The failed read is itself an audited transaction.
        ws->save();
        throw;
      }
      return kExitOk;
    };
  });

  auto* present = app.add_subcommand("present", "Present credentials to a verifier");
  std::string holder_name, verifier_name, verifier_org(registry::kOrg2), challenge_text;
  std::vector<std::string> vc_files;
  present->add_option("--holder", holder_name)->required();
  present->add_option("--vc", vc_files, "Credential files")->required()->check(CLI::ExistingFile);
  auto* with_verifier = present->add_option("--verifier", verifier_name, "Run the full exchange with this verifier");
  auto* with_challenge = present->add_option("--challenge", challenge_text, "Sign over this base58 challenge");
  with_verifier->excludes(with_challenge);
  present->add_option("--org", verifier_org, "Verifier's org");
  present->add_option("--out", out_path, "Write the presentation or report here");
  present->callback([&] {
    action = [&](Output& o) {
      auto ws = Workspace::open(g.workspace);
      auto vcs = load_vcs(vc_files);
      if (verifier_name.empty()) {
        if (challenge_text.empty()) throw CLI::ValidationError("present", "needs --verifier or --challenge");
        const auto& holder = ws->wallet(holder_name);
        auto vp = credential::present(holder.signing, holder.did, std::move(vcs), base58::decode(challenge_text));
        auto j = vp.to_json();
        if (!out_path.empty()) write_text_file(out_path, canon::serialize(j) + "\n");
        o.emit(j);
        return kExitOk;
      }
      auto rng = ws->rng("challenge");
      credential::VerificationReport report;
      try {
        report = portal::present_and_verify(ws->channel(), ws->member(verifier_org), rng, ws->wallet(holder_name),
                                            std::move(vcs), ws->wallet(verifier_name));
      } catch (const Error&) {
        ws->save();
        throw;
      }
      ws->save();
      auto j = report.to_json();
      if (!out_path.empty()) write_text_file(out_path, canon::serialize(j) + "\n");
      o.emit(j, [&](std::ostream& os) { print_report(os, report); });
      return report.overall ? kExitOk : kExitFailure;
    };
  });

  auto* verify = app.add_subcommand("verify", "Verify a presentation file");
  std::string vp_path;
  verify->add_option("--vp", vp_path)->required()->check(CLI::ExistingFile);
  verify->add_option("--challenge", challenge_text, "Expected base58 challenge")->required();
  verify->add_option("--verifier", verifier_name, "Query the ledger as this trusted app (default: registry.json)");
  verify->add_option("--org", verifier_org, "Verifier's org");
  verify->callback([&] {
    action = [&](Output& o) {
      auto vp = credential::VerifiablePresentation::from_json(read_user_json(vp_path));
      auto challenge = base58::decode(challenge_text);
      credential::VerificationReport report;
      if (verifier_name.empty()) {
        credential::DumpRegistryView view(read_json_file(fs::path(g.workspace) / "registry.json"));
        report = credential::verify_presentation(vp, challenge, view);
      } else {
        auto ws = Workspace::open(g.workspace);
        const auto& member = ws->member(verifier_org);
        if (!registry::is_trusted_app(ws->channel(), member, ws->wallet(verifier_name).did)) {
          ws->save();
          throw Error(Errc::access_denied, "trusted apps registry: " + verifier_name);
        }
        portal::LedgerRegistryView view(ws->channel(), member);
        report = credential::verify_presentation(vp, challenge, view);
        ws->save();
      }
      o.emit(report.to_json(), [&](std::ostream& os) { print_report(os, report); });
      return report.overall ? kExitOk : kExitFailure;
    };
  });

  auto* scenario = app.add_subcommand("scenario", "Scripted end-to-end runs");
  scenario->require_subcommand(1);
  auto* scenario_run = scenario->add_subcommand("run", "Run a scenario script");
  std::string script_path, report_path;
  scenario_run->add_option("script", script_path)->required()->check(CLI::ExistingFile);
  scenario_run->add_option("--report", report_path, "Write the run report here");
  scenario_run->callback([&] {
    action = [&](Output& o) { return cmd_scenario_run(g, o, script_path, report_path); };
  });

  app.add_subcommand("audit", "Print every ledger transaction")->callback([&] {
    action = [&](Output& o) { return cmd_audit(g, o); };
  });
  app.add_subcommand("verify-chain", "Verify the ledger hash chain and private data")->callback([&] {
    action = [&](Output& o) { return cmd_verify_chain(g, o); };
  });

  std::vector<const char*> argv;
  argv.push_back("glass");
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out_stream, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  Output out(out_stream, g.json);
  try {
    return action ? action(out) : kExitUsage;
  } catch (const CLI::Error& e) {
    err << "glass: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    err << "glass: " << e.what() << "\n";
    return e.code() == Errc::config ? kExitUsage : kExitFailure;
  } catch (const std::exception& e) {
    err << "glass: " << e.what() << "\n";
    return kExitFailure;
  }
}

}  // namespace glass::cli
