#pragma once

#include <chrono>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "proofpad/backend.hpp"
#include "proofpad/docmodel.hpp"
#include "proofpad/doublecheck.hpp"
#include "proofpad/indent.hpp"
#include "proofpad/lint.hpp"
#include "proofpad/output.hpp"
#include "proofpad/repl.hpp"
#include "proofpad/session.hpp"

namespace proofpad {

using json = nlohmann::json;

using Clock = std::function<std::chrono::steady_clock::time_point()>;
using BackendFactory = std::function<std::unique_ptr<Backend>()>;

struct ControllerConfig {
  std::chrono::milliseconds lint_debounce{2000};
  Clock clock = [] { return std::chrono::steady_clock::now(); };
  SessionConfig session;
  std::size_t default_trials = 100;
};

namespace api {

inline constexpr std::string_view kRequestKinds[] = {"open",         "edit",          "admit-through", "undo-through",
                                                     "hover-preview", "repl-submit",  "run-property",  "lint",
                                                     "indent",       "get-raw-output"};

inline json error_json(const Error& e) { return {{"code", to_string(e.code())}, {"message", e.what()}}; }

inline json reply_ok(const json& id, json result) {
  return {{"type", "reply"}, {"id", id}, {"ok", true}, {"result", std::move(result)}};
}

inline json reply_error(const json& id, const Error& e) {
  return {{"type", "reply"}, {"id", id}, {"ok", false}, {"error", error_json(e)}};
}

inline json span_json(Span s) { return {{"start", s.start}, {"end", s.end}}; }

inline json regions_json(const Document& doc) {
  json out = json::array();
  for (const auto& r : doc.regions) out.push_back({{"start", r.span.start}, {"end", r.span.end}, {"access", to_string(r.access)}});
  return out;
}

inline json forms_json(const Session& session) {
  json out = json::array();
  for (const auto& f : session.forms()) {
    out.push_back({{"start", f.form.span.start},
                   {"end", f.form.span.end},
                   {"kind", f.form.kind == FormKind::Event ? "event" : "expression"},
                   {"status", to_string(f.status)}});
  }
  return out;
}

inline json diagnostics_json(const std::vector<Diagnostic>& diags) {
  json out = json::array();
  for (const auto& d : diags) {
    out.push_back({{"start", d.span.start},
                   {"end", d.span.end},
                   {"severity", to_string(d.severity)},
                   {"code", d.code},
                   {"message", d.message}});
  }
  return out;
}

inline json items_json(const Summary& s) {
  json out = json::array();
  for (const auto& m : s.items) {
    out.push_back({{"severity", to_string(m.severity)}, {"headline", m.headline}, {"failure_marker", m.failure_marker}});
  }
  return out;
}

inline json plan_json(const Plan& p) {
  return {{"kind", p.kind == Plan::Kind::AdmitThrough ? "admit-through" : "undo-through"}, {"indices", p.indices}};
}

inline json report_json(const TestReport& r, const PropertySpec& spec) {
  json cx = nullptr;
  if (r.counterexample) {
    cx = json::array();
    for (const auto& [var, v] : *r.counterexample) cx.push_back({{"variable", ascii_lower(var)}, {"value", v}});
  }
  return {{"name", ascii_lower(r.name)},
          {"seed", r.seed},
          {"trials_run", r.trials_run},
          {"passes", r.passes},
          {"passed", r.passed()},
          {"counterexample", cx},
          {"aborted", r.aborted ? json(*r.aborted) : json(nullptr)},
          {"report", render_report(r)},
          {"theorem", to_theorem(spec)}};
}

/// Proof line of a forms array as carried in snapshots.
inline std::size_t proof_line_of(const json& forms) {
  std::size_t i = 0;
  while (i < forms.size() && forms[i]["status"] == "admitted") ++i;
  return i;
}

/// Typed accessors that turn a missing or mistyped field into malformed-request.
inline const json& field(const json& req, const char* name) {
  auto it = req.find(name);
  if (it == req.end()) throw Error(ErrorCode::MalformedRequest, std::string("missing field \"") + name + "\"");
  return *it;
}

inline std::size_t index_field(const json& req, const char* name) {
  const json& v = field(req, name);
  if (!v.is_number_integer() || v.get<std::int64_t>() < 0) throw Error(ErrorCode::MalformedRequest, std::string("field \"") + name + "\" must be a natural number");
  return v.get<std::size_t>();
}

inline std::string string_field(const json& req, const char* name) {
  const json& v = field(req, name);
  if (!v.is_string()) throw Error(ErrorCode::MalformedRequest, std::string("field \"") + name + "\" must be a string");
  return v.get<std::string>();
}

}  // namespace api

/// Serializes all document, session, REPL and property work for one document.
/// Every call returns the messages it produced: events in the order they
/// happened, then the reply. Events carry consecutive sequence numbers.
class Controller {
 public:
  explicit Controller(BackendFactory factory, ControllerConfig config = {},
                      const BuiltinTable& table = BuiltinTable::standard())
      : factory_(std::move(factory)), config_(std::move(config)), table_(&table) {}

  std::vector<json> handle_text(std::string_view text) {
    json req = json::parse(text, nullptr, false);
    if (req.is_discarded()) return {api::reply_error(nullptr, Error(ErrorCode::MalformedRequest, "request is not valid JSON"))};
    return handle(req);
  }

  std::vector<json> handle(const json& req) {
    out_.clear();
    json id = req.is_object() && req.contains("id") ? req["id"] : json(nullptr);
    try {
      if (!req.is_object()) throw Error(ErrorCode::MalformedRequest, "request must be an object");
      if (!req.contains("id") || !(id.is_number() || id.is_string())) {
        throw Error(ErrorCode::MalformedRequest, "request needs a numeric or string id");
      }
      std::string kind = api::string_field(req, "kind");
      json result = dispatch(kind, req);
      out_.push_back(api::reply_ok(id, std::move(result)));
    } catch (const Error& e) {
      out_.push_back(api::reply_error(id, e));
    }
    return std::exchange(out_, {});
  }

  /// Emits the debounced diagnostics once the document has been quiet for
  /// the configured interval.
  std::vector<json> poll() {
    out_.clear();
    if (lint_due_ && config_.clock() >= *lint_due_) run_lint();
    return std::exchange(out_, {});
  }

  /// Full client state as a snapshot event. Its seq is that of the last
  /// event it already reflects, so the next event follows it directly.
  json snapshot() const {
    json s = state();
    s["type"] = "event";
    s["kind"] = "snapshot";
    s["seq"] = seq_;
    return s;
  }

  /// Client-visible state: what a snapshot carries minus its envelope.
  json state() const {
    json s;
    if (doc_) {
      s["document"] = {{"text", doc_->text},
                       {"origin", doc_->origin == Origin::Proofpad ? "proofpad" : "plain"},
                       {"regions", api::regions_json(*doc_)}};
      s["forms"] = api::forms_json(*session_);
      s["proof_line"] = session_->proof_line();
    } else {
      s["document"] = nullptr;
      s["forms"] = json::array();
      s["proof_line"] = 0;
    }
    s["diagnostics"] = diagnostics_;
    s["repl"] = repl_;
    s["summaries"] = summaries_json_;
    return s;
  }

  bool has_document() const noexcept { return doc_.has_value(); }
  const Session* session() const noexcept { return session_ ? &*session_ : nullptr; }
  const Document* document() const noexcept { return doc_ ? &*doc_ : nullptr; }
  std::uint64_t last_seq() const noexcept { return seq_; }

 private:
  BackendFactory factory_;
  ControllerConfig config_;
  const BuiltinTable* table_;
  std::optional<Document> doc_;
  std::optional<Session> session_;
  std::unique_ptr<Backend> backend_;
  json diagnostics_ = json::array();
  json repl_ = json::array();
  json summaries_json_ = json::array();
  std::map<std::uint64_t, std::string> raw_;  // summary id -> raw backend bytes
  std::uint64_t next_summary_ = 1;
  std::optional<std::chrono::steady_clock::time_point> lint_due_;
  std::uint64_t seq_ = 0;
  std::vector<json> out_;

  void emit(std::string_view kind, json body) {
    body["type"] = "event";
    body["kind"] = kind;
    body["seq"] = ++seq_;
    out_.push_back(std::move(body));
  }

  Session& need_session() {
    if (!session_) throw Error(ErrorCode::NoDocument, "no document is open");
    return *session_;
  }

  Backend& need_backend() {
    if (!backend_) backend_ = factory_();
    return *backend_;
  }

  json dispatch(const std::string& kind, const json& req) {
    if (kind == "open") return open(req);
    if (kind == "edit") return edit(req);
    if (kind == "admit-through") return run_plan(req, Plan::Kind::AdmitThrough);
    if (kind == "undo-through") return run_plan(req, Plan::Kind::UndoThrough);
    if (kind == "hover-preview") return {{"plan", api::plan_json(need_session().hover_preview(api::index_field(req, "index")))}};
    if (kind == "repl-submit") return repl_submit(req);
    if (kind == "run-property") return run_property_request(req);
    if (kind == "lint") {
      need_session();
      return {{"diagnostics", run_lint()}};
    }
    if (kind == "indent") return indent(req);
    if (kind == "get-raw-output") {
      std::size_t sid = api::index_field(req, "summary");
      auto it = raw_.find(sid);
      if (it == raw_.end()) throw Error(ErrorCode::PreconditionViolation, "no summary with id " + std::to_string(sid));
      return {{"summary", sid}, {"raw", it->second}};
    }
    throw Error(ErrorCode::UnknownKind, "unknown request kind \"" + kind + "\"");
  }

  json open(const json& req) {
    Document doc;
    if (req.contains("path")) {
      doc = load(api::string_field(req, "path"));
    } else {
      std::string text = api::string_field(req, "text");
      std::string format = req.contains("format") ? api::string_field(req, "format") : "plain";
      if (format == "proofpad") doc = parse_proofpad(text);
      else if (format == "plain") doc = plain_document(std::move(text));
      else throw Error(ErrorCode::MalformedRequest, "format must be \"plain\" or \"proofpad\"");
    }
    doc_ = std::move(doc);
    session_.emplace(doc_->text, config_.session, *table_);
    backend_.reset();
    diagnostics_ = json::array();
    repl_ = json::array();
    summaries_json_ = json::array();
    raw_.clear();
    lint_due_ = config_.clock() + config_.lint_debounce;
    ++seq_;
    out_.push_back(snapshot());
    if (auto plan = session_->open_plan()) execute(*plan);
    return {{"forms", session_->forms().size()}, {"statuses", session_->status_string()}};
  }

  json edit(const json& req) {
    Session& session = need_session();
    std::size_t start = api::index_field(req, "start");
    std::size_t end = api::index_field(req, "end");
    std::string text = api::string_field(req, "text");
    if (start > end) throw Error(ErrorCode::MalformedRequest, "start must not exceed end");
    apply_edit_everywhere(session, Span{start, end}, text);
    return {{"forms", session.forms().size()}};
  }

  /// Region check first, then the session; both are all-or-nothing.
  void apply_edit_everywhere(Session& session, Span span, const std::string& text) {
    Document next = apply_edit(*doc_, span, text);
    session.on_edit(span, text);
    doc_ = std::move(next);
    lint_due_ = config_.clock() + config_.lint_debounce;
    emit("document-changed", {{"start", span.start},
                              {"end", span.end},
                              {"text", text},
                              {"regions", api::regions_json(*doc_)},
                              {"forms", api::forms_json(session)}});
  }

  /// A crashed or hung backend is replaced before the next backend request;
  /// status changes from replaying the admitted prefix are broadcast.
  void recover_if_needed(Session& session) {
    if (!session.needs_recovery()) return;
    backend_ = factory_();
    session.recover(*backend_, [this](const Transition& t, const Session& s) { on_transition(t, s); });
  }

  json run_plan(const json& req, Plan::Kind expected) {
    Session& session = need_session();
    std::size_t index = api::index_field(req, "index");
    recover_if_needed(session);
    Plan plan = session.plan_click(index);
    if (plan.kind != expected) {
      throw Error(ErrorCode::PreconditionViolation,
                  expected == Plan::Kind::AdmitThrough ? "form " + std::to_string(index) + " is already above the proof line"
                                                       : "form " + std::to_string(index) + " is below the proof line");
    }
    execute(plan);
    return {{"plan", api::plan_json(plan)}, {"statuses", session.status_string()}, {"proof_line", session.proof_line()}};
  }

  void execute(const Plan& plan) {
    Backend& backend = need_backend();
    session_->execute(plan, backend, [this](const Transition& t, const Session& s) { on_transition(t, s); });
  }

  void on_transition(const Transition& t, const Session& s) {
    emit("status-changed", {{"index", t.index}, {"from", to_string(t.from)}, {"to", to_string(t.to)}});
    if (t.to != ProofStatus::Admitted && t.to != ProofStatus::Failed) return;
    const SessionForm& f = s.forms()[t.index];
    Summary summary;
    if (f.submission) {
      summary = summarize_output(f.submission->result);
      if (f.submission->outcome != Outcome::Success) summary.overall = Overall::Failure;
    }
    if (!f.error.empty()) {
      summary.items.insert(summary.items.begin(), StructuredMessage{MessageSeverity::Error, f.error, f.error, {}, false});
      summary.overall = Overall::Failure;
    }
    record_summary(summary, json(t.index));
  }

  std::uint64_t record_summary(const Summary& s, json index) {
    std::uint64_t id = next_summary_++;
    raw_[id] = s.raw;
    json body = {{"id", id}, {"index", std::move(index)}, {"overall", to_string(s.overall)}, {"items", api::items_json(s)}};
    summaries_json_.push_back(body);
    emit("summary", std::move(body));
    return id;
  }

  json repl_submit(const json& req) {
    Session& session = need_session();
    std::string input = api::string_field(req, "input");
    json results = json::array();
    for (const auto& form : parse_source(input, *table_)) {
      json entry = {{"input", form.text}};
      if (classify_input(form) == InputClass::Event) {
        Session::Insertion ins = session.proof_line_insertion(form.text);
        apply_edit_everywhere(session, ins.edit, ins.text);
        entry["kind"] = "moved";
        entry["target"] = api::span_json(ins.form);
        entry["text"] = "moved to definitions at " + std::to_string(ins.form.start) + "-" + std::to_string(ins.form.end) + "\n";
      } else {
        recover_if_needed(session);
        ReplResult r = route(form, session, need_backend());
        if (r.outcome == Outcome::Timeout || r.outcome == Outcome::Crashed) backend_.reset();
        entry["kind"] = "evaluated";
        entry["summary"] = record_summary(r.summary, nullptr);
        entry["overall"] = to_string(r.summary.overall);
        entry["text"] = render(r);
      }
      repl_.push_back(entry);
      emit("repl-result", {{"entry", entry}});
      results.push_back(std::move(entry));
    }
    return {{"results", std::move(results)}};
  }

  json run_property_request(const json& req) {
    Session& session = need_session();
    PropertySpec spec;
    if (req.contains("index")) {
      std::size_t i = api::index_field(req, "index");
      if (i >= session.forms().size()) throw Error(ErrorCode::PreconditionViolation, "no form with index " + std::to_string(i));
      spec = parse_property(session.forms()[i].form);
    } else {
      spec = parse_property(api::string_field(req, "text"));
    }
    std::size_t trials = req.contains("trials") ? api::index_field(req, "trials") : config_.default_trials;
    std::uint64_t seed = req.contains("seed") ? api::index_field(req, "seed") : 0;
    recover_if_needed(session);
    TestReport report = proofpad::run_property(spec, trials, seed, need_backend());
    if (report.aborted && need_backend().poisoned()) backend_.reset();
    return api::report_json(report, spec);
  }

  json run_lint() {
    lint_due_.reset();
    diagnostics_ = api::diagnostics_json(lint_source(session_->text(), *table_));
    emit("diagnostics", {{"items", diagnostics_}});
    return diagnostics_;
  }

  json indent(const json& req) {
    Session& session = need_session();
    const std::string& text = session.text();
    if (!req.contains("start")) return {{"text", reindent(text, *table_)}};
    std::size_t start = api::index_field(req, "start");
    std::size_t end = api::index_field(req, "end");
    if (start > end || end > text.size()) throw Error(ErrorCode::PreconditionViolation, "indent range outside the document");
    return {{"text", reindent(text, Span{start, end}, *table_)}};
  }
};

/// Reference client: folds a snapshot and the events after it into the state
/// a UI would display. Equal to Controller::state() when nothing was lost.
class ClientModel {
 public:
  void apply(const json& msg) {
    if (msg.value("type", "") != "event") return;
    std::uint64_t seq = msg.at("seq").get<std::uint64_t>();
    const std::string kind = msg.at("kind").get<std::string>();
    if (kind == "snapshot") {
      state_ = msg;
      state_.erase("type");
      state_.erase("kind");
      state_.erase("seq");
      seq_ = seq;
      return;
    }
    if (!seq_) return;  // nothing to apply events to yet
    if (seq <= *seq_) return;  // already reflected in the snapshot
    if (seq != *seq_ + 1) throw Error(ErrorCode::PreconditionViolation, "event " + std::to_string(seq) + " arrived out of order");
    seq_ = seq;
    if (kind == "status-changed") {
      state_["forms"][msg.at("index").get<std::size_t>()]["status"] = msg.at("to");
      state_["proof_line"] = api::proof_line_of(state_["forms"]);
    } else if (kind == "document-changed") {
      std::string text = state_["document"]["text"].get<std::string>();
      std::size_t start = msg.at("start").get<std::size_t>();
      std::size_t end = msg.at("end").get<std::size_t>();
      text.replace(start, end - start, msg.at("text").get<std::string>());
      state_["document"]["text"] = text;
      state_["document"]["regions"] = msg.at("regions");
      state_["forms"] = msg.at("forms");
      state_["proof_line"] = api::proof_line_of(state_["forms"]);
    } else if (kind == "diagnostics") {
      state_["diagnostics"] = msg.at("items");
    } else if (kind == "repl-result") {
      state_["repl"].push_back(msg.at("entry"));
    } else if (kind == "summary") {
      json s = msg;
      s.erase("type");
      s.erase("kind");
      s.erase("seq");
      state_["summaries"].push_back(std::move(s));
    }
  }

  const json& state() const noexcept { return state_; }
  bool synced() const noexcept { return seq_.has_value(); }

 private:
  json state_;
  std::optional<std::uint64_t> seq_;
};

}  // namespace proofpad
