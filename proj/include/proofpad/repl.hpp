#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "proofpad/backend.hpp"
#include "proofpad/output.hpp"
#include "proofpad/session.hpp"

namespace proofpad {

enum class InputClass { Event, Expression };

/// Events change the world and belong in the definitions area.
inline InputClass classify_input(const TopLevelForm& form) {
  if (!form.complete) throw Error(ErrorCode::IncompleteForm, "form is not complete: " + form.text);
  return form.kind == FormKind::Event ? InputClass::Event : InputClass::Expression;
}

struct ReplResult {
  enum class Kind { Moved, Evaluated };
  Kind kind = Kind::Evaluated;
  std::string input;
  Span target;              // Moved: where the form now sits in the document
  Summary summary;          // Evaluated: summary.raw is the full backend output
  std::optional<Outcome> outcome;
};

struct ReplBatch {
  std::vector<ReplResult> results;
  std::optional<Error> error;  // stops the remainder of the input
};

/// Routes one form: events are moved into the document at the proof line and
/// never reach the backend; expressions are evaluated.
inline ReplResult route(const TopLevelForm& form, Session& session, Backend& backend) {
  ReplResult r;
  r.input = form.text;
  if (classify_input(form) == InputClass::Event) {
    r.kind = ReplResult::Kind::Moved;
    r.target = session.insert_at_proof_line(form.text);
    return r;
  }
  Submission s = backend.submit(form.text);
  r.outcome = s.outcome;
  r.summary = summarize_output(s.result);
  if (s.outcome == Outcome::Timeout || s.outcome == Outcome::Crashed) r.summary.overall = Overall::Failure;
  return r;
}

/// Value line of an evaluation: the raw output minus prompts and trailing
/// blank lines.
inline std::string result_text(const Summary& s) {
  std::string out;
  for (const auto& line : detail::split_lines(s.raw)) {
    std::string_view t = detail::strip_prompts(line.text);
    if (detail::is_prompt_line(line.text)) continue;
    out += t;
    out += '\n';
  }
  while (out.size() >= 2 && out.ends_with("\n\n")) out.pop_back();
  std::size_t lead = out.find_first_not_of('\n');
  return lead == std::string::npos ? std::string() : out.substr(lead);
}

/// Append-only REPL history over a session and a backend.
class Repl {
 public:
  Repl(Session& session, Backend& backend) : session_(&session), backend_(&backend) {}

  /// Processes every top-level form of `input` left to right; the first form
  /// that cannot be classified stops the rest.
  ReplBatch submit(std::string_view input) {
    ReplBatch batch;
    for (const auto& form : parse_source(input)) {
      try {
        batch.results.push_back(route(form, *session_, *backend_));
        history_.push_back(batch.results.back());
      } catch (const Error& e) {
        batch.error = e;
        break;
      }
    }
    return batch;
  }

  const std::vector<ReplResult>& history() const noexcept { return history_; }

 private:
  Session* session_;
  Backend* backend_;
  std::vector<ReplResult> history_;
};

/// Text rendition of one result. With `disclose`, evaluated results also show
/// the full raw output.
inline std::string render(const ReplResult& r, bool disclose = false) {
  if (r.kind == ReplResult::Kind::Moved) {
    return "moved to definitions at " + std::to_string(r.target.start) + "-" + std::to_string(r.target.end) + "\n";
  }
  std::string out;
  if (r.summary.overall == Overall::Success) {
    out = result_text(r.summary);
  } else {
    for (const auto& m : r.summary.items) {
      if (m.severity == MessageSeverity::Error || m.severity == MessageSeverity::Warning) {
        out += std::string(to_string(m.severity)) + ": " + m.headline + "\n";
      }
    }
    if (out.empty()) out = "error: the backend " + std::string(r.outcome ? to_string(*r.outcome) : "failed") + "\n";
  }
  if (disclose) out += "--- raw output ---\n" + r.summary.raw + (r.summary.raw.ends_with('\n') ? "" : "\n");
  return out;
}

/// Pure function of the result list.
inline std::string render_history(const std::vector<ReplResult>& history, bool disclose = false) {
  std::string out;
  for (const auto& r : history) out += "pp> " + r.input + "\n" + render(r, disclose);
  return out;
}

}  // namespace proofpad
