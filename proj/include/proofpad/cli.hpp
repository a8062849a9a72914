#pragma once

#include <csignal>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <pthread.h>
#include <unistd.h>

#include "CLI11.hpp"
#include "proofpad/api.hpp"
#include "proofpad/server.hpp"

namespace proofpad::cli {

/// Exit codes: findings (lint errors, counterexamples, failed admissions)
/// are 1; anything that kept the command from running is 2.
inline constexpr int kOk = 0;
inline constexpr int kFindings = 1;
inline constexpr int kUsage = 2;

inline constexpr const char* kAcl2Names[] = {"acl2", "saved_acl2"};

/// First of: the --acl2 flag, PROOFPAD_ACL2, an executable named acl2 or
/// saved_acl2 on `path_var`. The flag and variable are taken as given.
inline std::optional<std::string> discover_acl2(const std::optional<std::string>& flag, const char* env_value,
                                                const char* path_var) {
  if (flag && !flag->empty()) return flag;
  if (env_value && *env_value) return std::string(env_value);
  if (!path_var) return std::nullopt;
  std::string_view path(path_var);
  for (const char* name : kAcl2Names) {
    std::size_t pos = 0;
    while (pos <= path.size()) {
      std::size_t colon = path.find(':', pos);
      std::string_view dir = path.substr(pos, colon == std::string_view::npos ? std::string_view::npos : colon - pos);
      std::filesystem::path candidate = std::filesystem::path(dir.empty() ? "." : std::string(dir)) / name;
      if (::access(candidate.c_str(), X_OK) == 0 && std::filesystem::is_regular_file(candidate)) return candidate.string();
      if (colon == std::string_view::npos) break;
      pos = colon + 1;
    }
  }
  return std::nullopt;
}

/// 1-based line and column (in bytes) of `offset`.
inline std::pair<std::size_t, std::size_t> line_column(std::string_view text, std::size_t offset) {
  offset = std::min(offset, text.size());
  std::size_t line = 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(offset), '\n'));
  std::size_t last_nl = text.rfind('\n', offset == 0 ? 0 : offset - 1);
  std::size_t col = (last_nl == std::string_view::npos || offset == 0) ? offset + 1 : offset - last_nl;
  return {line, col};
}

struct BackendOptions {
  bool fake = false;
  std::optional<std::string> acl2;
};

inline BackendFactory backend_factory(const BackendOptions& opts) {
  if (opts.fake) return [] { return fake_backend(); };
  auto exe = discover_acl2(opts.acl2, std::getenv("PROOFPAD_ACL2"), std::getenv("PATH"));
  if (!exe) {
    throw Error(ErrorCode::SpawnFailure,
                "no ACL2 executable found; pass --acl2 PATH, set PROOFPAD_ACL2, or use --fake-backend");
  }
  BackendConfig config;
  config.executable = *exe;
  return [config] { return start(config); };
}

/// Reads a document: `.proofpad` files with regions, anything else as plain text.
inline Document read_document(const std::string& path) { return load(path); }

inline int lint_command(const std::string& file, bool as_json, std::ostream& out) {
  Document doc = read_document(file);
  auto diags = lint_source(doc.text);
  if (as_json) {
    json items = api::diagnostics_json(diags);
    for (std::size_t i = 0; i < diags.size(); ++i) {
      auto [line, col] = line_column(doc.text, diags[i].span.start);
      items[i]["line"] = line;
      items[i]["column"] = col;
    }
    out << json{{"file", file}, {"diagnostics", items}}.dump() << "\n";
  } else {
    for (const auto& d : diags) {
      auto [line, col] = line_column(doc.text, d.span.start);
      out << file << ":" << line << ":" << col << ": " << to_string(d.severity) << ": " << d.message << " [" << d.code
          << "]\n";
    }
  }
  return has_errors(diags) ? kFindings : kOk;
}

/// Reindents writable text only; read-only regions keep their bytes.
inline std::string reindent_document(const Document& doc) {
  std::string text = doc.text;
  for (std::size_t i = doc.regions.size(); i-- > 0;) {
    const Region& r = doc.regions[i];
    if (r.access != Access::ReadWrite) continue;
    std::string whole = reindent(text, r.span);
    // Only this region changed; splice it into the current text.
    std::size_t tail = text.size() - r.span.end;
    text = text.substr(0, r.span.start) + whole.substr(r.span.start, whole.size() - tail - r.span.start) + text.substr(r.span.end);
  }
  return text;
}

inline int indent_command(const std::string& file, bool write, std::ostream& out) {
  Document doc = read_document(file);
  std::string text = reindent_document(doc);
  Document next = doc;
  next.text = text;
  // Writable regions may change length; rebuild the layout from the bytes.
  next = doc.origin == Origin::Proofpad ? parse_proofpad(serialize(next)) : plain_document(text);
  if (!write) out << serialize(next);
  else if (next != doc) save(next, file);
  return kOk;
}

inline int admit_command(const std::string& file, const BackendOptions& opts, std::ostream& out, std::ostream& err) {
  Document doc = read_document(file);
  Session session(doc.text);
  if (!session.forms().empty()) {
    auto backend = backend_factory(opts)();
    session.execute(session.plan_click(session.forms().size() - 1), *backend);
  }
  std::string line;
  for (const auto& f : session.forms()) {
    if (!line.empty()) line += ',';
    line += status_letter(f.status);
  }
  out << line << "\n";
  bool all_admitted = true;
  for (std::size_t i = 0; i < session.forms().size(); ++i) {
    const SessionForm& f = session.forms()[i];
    if (f.status == ProofStatus::Admitted) continue;
    all_admitted = false;
    if (f.status != ProofStatus::Failed) continue;
    auto [ln, col] = line_column(doc.text, f.form.span.start);
    err << file << ":" << ln << ":" << col << ": form " << i << " failed\n";
    if (!f.error.empty()) err << "  " << f.error << "\n";
    if (f.submission) {
      for (const auto& m : summarize_output(f.submission->result).items) {
        if (m.severity != MessageSeverity::Error && m.severity != MessageSeverity::Warning) continue;
        err << "  " << to_string(m.severity) << ": " << m.headline << "\n";
      }
    }
  }
  return all_admitted ? kOk : kFindings;
}

/// Admits every non-property event so properties can call the file's
/// functions, then runs each defproperty in file order.
inline int check_command(const std::string& file, std::size_t trials, std::uint64_t seed, bool as_json,
                         const BackendOptions& opts, std::ostream& out, std::ostream& err) {
  Document doc = read_document(file);
  auto forms = parse_source(doc.text);
  auto backend = backend_factory(opts)();
  json reports = json::array();
  bool ok = true;
  for (const auto& form : forms) {
    if (!form.complete) {
      err << file << ": skipping incomplete form at byte " << form.span.start << "\n";
      continue;
    }
    if (form.head == "defproperty") {
      PropertySpec spec = parse_property(form);
      TestReport report = run_property(spec, trials, seed, *backend);
      ok = ok && report.passed();
      if (as_json) reports.push_back(api::report_json(report, spec));
      else out << render_report(report);
      continue;
    }
    if (form.kind != FormKind::Event) continue;
    Submission s = backend->submit(form.text);
    if (s.outcome != Outcome::Success) {
      Summary sum = summarize_output(s.result);
      err << file << ": not admitted: " << (sum.items.empty() ? form.head : sum.items.front().headline) << "\n";
    }
  }
  if (as_json) out << json{{"file", file}, {"trials", trials}, {"seed", seed}, {"reports", reports}}.dump() << "\n";
  return ok ? kOk : kFindings;
}

/// Line-oriented REPL over stdin; input accumulates until it forms complete
/// forms. Events are moved into an in-memory definitions buffer.
inline int repl_command(const BackendOptions& opts, std::istream& in, std::ostream& out, bool interactive) {
  Session session;
  auto backend = backend_factory(opts)();
  Repl repl(session, *backend);
  std::string pending;
  std::string line;
  if (interactive) out << "pp> " << std::flush;
  while (std::getline(in, line)) {
    pending += line;
    pending += '\n';
    auto forms = parse_source(pending);
    if (!forms.empty() && !forms.back().complete && !forms.back().stray_close) {
      if (interactive) out << "..> " << std::flush;
      continue;
    }
    ReplBatch batch = repl.submit(pending);
    pending.clear();
    for (const auto& r : batch.results) out << render(r);
    if (batch.error) out << "error: " << batch.error->what() << "\n";
    if (interactive) out << "pp> " << std::flush;
  }
  if (!parse_source(pending).empty()) {
    out << "error: input ended inside a form\n";
    return kFindings;
  }
  return kOk;
}

inline int serve_command(std::uint16_t port, std::uint16_t http_port, const std::optional<std::string>& static_dir,
                         const std::optional<std::string>& file, const BackendOptions& opts, std::ostream& out,
                         std::ostream& err) {
  Controller controller(backend_factory(opts));
  if (file) {
    auto reply = controller.handle({{"id", 0}, {"kind", "open"}, {"path", *file}}).back();
    if (!reply["ok"].get<bool>()) {
      err << "proofpad: " << reply["error"]["message"].get<std::string>() << "\n";
      return kUsage;
    }
  }
  // Signals are taken synchronously by this thread only.
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);
  Server server(controller, ServerConfig{port, static_dir, http_port});
  server.start();
  out << "listening on 127.0.0.1:" << server.port() << "\n";
  if (static_dir) out << "static assets on http://127.0.0.1:" << server.http_port() << "/\n";
  out << std::flush;
  int sig = 0;
  sigwait(&signals, &sig);
  server.stop();
  return kOk;
}

inline int run(int argc, const char* const* argv, std::istream& in, std::ostream& out, std::ostream& err,
               bool interactive = false) {
  CLI::App app{"Proof Pad: editing, proof-bar sessions and property checks for ACL2"};
  app.set_version_flag("--version", "proofpad " PROOFPAD_VERSION);
  app.require_subcommand(1);

  std::string file;
  std::string format = "text";
  bool write = false;
  std::size_t trials = 100;
  std::uint64_t seed = 0;
  std::uint16_t port = 0;
  std::uint16_t http_port = 0;
  std::optional<std::string> static_dir;
  std::optional<std::string> serve_file;
  BackendOptions backend;

  auto add_backend = [&](CLI::App* sub) {
    sub->add_flag("--fake-backend", backend.fake, "Use the built-in fake backend instead of ACL2");
    sub->add_option("--acl2", backend.acl2, "Path to the ACL2 executable");
  };
  auto add_format = [&](CLI::App* sub) {
    sub->add_option("--format", format, "Output format")->check(CLI::IsMember({"text", "json"}));
  };

  auto* lint_cmd = app.add_subcommand("lint", "Report static errors in a file");
  lint_cmd->add_option("file", file, "Source or .proofpad file")->required();
  add_format(lint_cmd);

  auto* indent_cmd = app.add_subcommand("indent", "Reindent a file");
  indent_cmd->add_option("file", file, "Source or .proofpad file")->required();
  indent_cmd->add_flag("--write", write, "Rewrite the file in place");

  auto* repl_cmd = app.add_subcommand("repl", "Read-eval-print loop; events move to the definitions");
  add_backend(repl_cmd);

  auto* check_cmd = app.add_subcommand("check", "Run the defproperty forms of a file");
  check_cmd->add_option("file", file, "Source or .proofpad file")->required();
  check_cmd->add_option("--trials", trials, "Trials per property")->check(CLI::PositiveNumber);
  check_cmd->add_option("--seed", seed, "Random seed");
  add_format(check_cmd);
  add_backend(check_cmd);

  auto* admit_cmd = app.add_subcommand("admit", "Admit every form and print the statuses");
  admit_cmd->add_option("file", file, "Source or .proofpad file")->required();
  add_backend(admit_cmd);

  auto* serve_cmd = app.add_subcommand("serve", "Serve the message protocol on localhost");
  serve_cmd->add_option("--port", port, "TCP port for the framed protocol (0 picks one)");
  serve_cmd->add_option("--static", static_dir, "Directory of UI assets to serve over HTTP");
  serve_cmd->add_option("--http-port", http_port, "HTTP port for --static (0 picks one)");
  serve_cmd->add_option("--file", serve_file, "Document to open at start");
  add_backend(serve_cmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kUsage;
  }

  try {
    bool as_json = format == "json";
    if (*lint_cmd) return lint_command(file, as_json, out);
    if (*indent_cmd) return indent_command(file, write, out);
    if (*admit_cmd) return admit_command(file, backend, out, err);
    if (*check_cmd) return check_command(file, trials, seed, as_json, backend, out, err);
    if (*repl_cmd) return repl_command(backend, in, out, interactive);
    if (*serve_cmd) return serve_command(port, http_port, static_dir, serve_file, backend, out, err);
  } catch (const Error& e) {
    err << "proofpad: " << to_string(e.code()) << ": " << e.what() << "\n";
    return kUsage;
  }
  return kUsage;
}

}  // namespace proofpad::cli
