#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "proofpad/backend.hpp"
#include "proofpad/error.hpp"
#include "proofpad/sexp.hpp"

namespace proofpad {

enum class ProofStatus { Unadmitted, Queued, InProgress, Admitted, Failed };

inline std::string_view to_string(ProofStatus s) {
  switch (s) {
    case ProofStatus::Unadmitted: return "unadmitted";
    case ProofStatus::Queued: return "queued";
    case ProofStatus::InProgress: return "in-progress";
    case ProofStatus::Admitted: return "admitted";
    case ProofStatus::Failed: return "failed";
  }
  return "unadmitted";
}

/// One-letter code used in compact renderings: U Q P A F.
inline char status_letter(ProofStatus s) {
  switch (s) {
    case ProofStatus::Unadmitted: return 'U';
    case ProofStatus::Queued: return 'Q';
    case ProofStatus::InProgress: return 'P';
    case ProofStatus::Admitted: return 'A';
    case ProofStatus::Failed: return 'F';
  }
  return '?';
}

struct Plan {
  enum class Kind { AdmitThrough, UndoThrough };
  Kind kind = Kind::AdmitThrough;
  std::vector<std::size_t> indices;  // admit: ascending; undo: descending

  friend bool operator==(const Plan&, const Plan&) = default;
};

struct Transition {
  std::size_t index;
  ProofStatus from;
  ProofStatus to;

  friend bool operator==(const Transition&, const Transition&) = default;
};

struct SessionForm {
  TopLevelForm form;
  ProofStatus status = ProofStatus::Unadmitted;
  std::size_t events = 0;                 // undo ledger: events added by its admission
  std::optional<Submission> submission;   // latest backend exchange for this form
  std::string error;                      // non-backend failure reason
};

struct SessionConfig {
  /// Admit every form as soon as a document is opened.
  bool auto_admit_on_open = false;
};

/// First index whose status is not Admitted.
inline std::size_t proof_line(const std::vector<ProofStatus>& statuses) {
  std::size_t i = 0;
  while (i < statuses.size() && statuses[i] == ProofStatus::Admitted) ++i;
  return i;
}

/// What a click on `target` would do. Pure.
inline Plan plan_click(const std::vector<ProofStatus>& statuses, std::size_t target) {
  if (target >= statuses.size()) {
    throw Error(ErrorCode::PreconditionViolation, "no form at index " + std::to_string(target));
  }
  Plan plan;
  const std::size_t line = proof_line(statuses);
  if (target < line) {
    plan.kind = Plan::Kind::UndoThrough;
    for (std::size_t i = line; i-- > target;) plan.indices.push_back(i);
    return plan;
  }
  for (std::size_t i = line; i <= target; ++i) {
    if (statuses[i] == ProofStatus::Unadmitted || statuses[i] == ProofStatus::Failed) plan.indices.push_back(i);
  }
  return plan;
}

/// Identical to plan_click: hovering previews exactly what a click does.
inline Plan hover_preview(const std::vector<ProofStatus>& statuses, std::size_t target) {
  return plan_click(statuses, target);
}

/// The proof-bar state machine over one document. Admitted forms are always a
/// prefix; their text (and the gaps between them) is read-only.
class Session {
 public:
  using Observer = std::function<void(const Transition&, const Session&)>;

  explicit Session(std::string text = {}, SessionConfig config = {},
                   const BuiltinTable& table = BuiltinTable::standard())
      : text_(std::move(text)), config_(config), table_(&table) {
    for (auto& f : parse_source(text_, *table_)) forms_.push_back(SessionForm{std::move(f)});
  }

  const std::string& text() const noexcept { return text_; }
  const std::vector<SessionForm>& forms() const noexcept { return forms_; }
  const SessionConfig& config() const noexcept { return config_; }

  std::vector<ProofStatus> statuses() const {
    std::vector<ProofStatus> out;
    out.reserve(forms_.size());
    for (const auto& f : forms_) out.push_back(f.status);
    return out;
  }

  std::string status_string() const {
    std::string out;
    for (const auto& f : forms_) out += status_letter(f.status);
    return out;
  }

  std::size_t proof_line() const { return proofpad::proof_line(statuses()); }

  /// Byte offset where the admitted prefix ends.
  std::size_t locked_end() const {
    std::size_t line = proof_line();
    return line == 0 ? 0 : forms_[line - 1].form.span.end;
  }

  Plan plan_click(std::size_t target) const { return proofpad::plan_click(statuses(), target); }
  Plan hover_preview(std::size_t target) const { return proofpad::hover_preview(statuses(), target); }

  /// The plan to run right after opening, if auto-admit is configured.
  std::optional<Plan> open_plan() const {
    if (!config_.auto_admit_on_open || forms_.empty()) return std::nullopt;
    return plan_click(forms_.size() - 1);
  }

  /// True after the backend timed out or crashed; recover() with a fresh
  /// backend restores the world.
  bool needs_recovery() const noexcept { return needs_recovery_; }

  std::vector<Transition> execute(const Plan& plan, Backend& backend, const Observer& observer = {}) {
    return plan.kind == Plan::Kind::AdmitThrough ? execute_admit(plan, backend, observer)
                                                 : execute_undo(plan, backend, observer);
  }

  std::vector<Transition> execute_admit(const Plan& plan, Backend& backend, const Observer& observer = {}) {
    if (plan.kind != Plan::Kind::AdmitThrough) throw Error(ErrorCode::PreconditionViolation, "not an admit plan");
    const std::size_t line = proof_line();
    for (std::size_t k = 0; k < plan.indices.size(); ++k) {
      std::size_t i = plan.indices[k];
      if (i != line + k || i >= forms_.size() ||
          (forms_[i].status != ProofStatus::Unadmitted && forms_[i].status != ProofStatus::Failed)) {
        throw Error(ErrorCode::PreconditionViolation, "admit plan must start at the proof line and be contiguous");
      }
    }
    std::vector<Transition> log;
    auto move = [&](std::size_t i, ProofStatus to) {
      Transition t{i, forms_[i].status, to};
      forms_[i].status = to;
      log.push_back(t);
      if (observer) observer(t, *this);
    };

    for (std::size_t i : plan.indices) move(i, ProofStatus::Queued);
    for (std::size_t k = 0; k < plan.indices.size(); ++k) {
      std::size_t i = plan.indices[k];
      SessionForm& f = forms_[i];
      move(i, ProofStatus::InProgress);
      f.error.clear();
      f.submission.reset();
      bool ok = false;
      if (!f.form.complete) {
        f.error = f.form.stray_close ? "unmatched close parenthesis" : "incomplete form";
      } else {
        try {
          f.submission = backend.submit(f.form.text);
          ok = f.submission->outcome == Outcome::Success;
          if (f.submission->outcome == Outcome::Timeout || f.submission->outcome == Outcome::Crashed) {
            needs_recovery_ = true;
            f.error = "backend " + std::string(to_string(f.submission->outcome));
          }
        } catch (const Error& e) {
          if (e.code() == ErrorCode::BackendPoisoned) needs_recovery_ = true;
          f.error = std::string(to_string(e.code())) + ": " + e.what();
        }
      }
      if (ok) {
        f.events = event_units(f.form.tree, *table_);
        move(i, ProofStatus::Admitted);
        continue;
      }
      // Drain the queue first so Queued never trails a Failed form.
      for (std::size_t r = plan.indices.size(); r-- > k + 1;) move(plan.indices[r], ProofStatus::Unadmitted);
      move(i, ProofStatus::Failed);
      break;
    }
    return log;
  }

  std::vector<Transition> execute_undo(const Plan& plan, Backend& backend, const Observer& observer = {}) {
    if (plan.kind != Plan::Kind::UndoThrough) throw Error(ErrorCode::PreconditionViolation, "not an undo plan");
    const std::size_t line = proof_line();
    for (std::size_t k = 0; k < plan.indices.size(); ++k) {
      if (plan.indices[k] + k + 1 != line) {
        throw Error(ErrorCode::PreconditionViolation, "undo plan must end at the last admitted form");
      }
    }
    std::size_t events = 0;
    for (std::size_t i : plan.indices) events += forms_[i].events;
    if (events > 0 && !needs_recovery_) {
      try {
        Submission s = backend.undo_through(events);
        if (s.outcome != Outcome::Success) needs_recovery_ = true;
      } catch (const Error& e) {
        if (e.code() != ErrorCode::BackendPoisoned) throw;
        needs_recovery_ = true;
      }
    }
    std::vector<Transition> log;
    for (std::size_t i : plan.indices) {
      Transition t{i, forms_[i].status, ProofStatus::Unadmitted};
      forms_[i].status = ProofStatus::Unadmitted;
      forms_[i].events = 0;
      log.push_back(t);
      if (observer) observer(t, *this);
    }
    return log;
  }

  /// Re-admits the admitted prefix on a fresh backend. Forms that no longer
  /// admit, and everything after them, drop back to Unadmitted (the first one
  /// to Failed).
  std::vector<Transition> recover(Backend& fresh, const Observer& observer = {}) {
    needs_recovery_ = false;
    std::vector<Transition> log;
    const std::size_t line = proof_line();
    for (std::size_t i = 0; i < line; ++i) {
      SessionForm& f = forms_[i];
      f.submission = fresh.submit(f.form.text);
      if (f.submission->outcome == Outcome::Success) continue;
      if (f.submission->outcome != Outcome::Failure) needs_recovery_ = true;
      for (std::size_t j = i; j < line; ++j) {
        ProofStatus to = j == i ? ProofStatus::Failed : ProofStatus::Unadmitted;
        Transition t{j, forms_[j].status, to};
        forms_[j].status = to;
        forms_[j].events = 0;
        log.push_back(t);
        if (observer) observer(t, *this);
      }
      break;
    }
    return log;
  }

  /// Replaces `span` of the text. Rejected with read-only-violation when it
  /// touches the admitted prefix or a queued/in-progress form, or when it
  /// would change how an admitted form parses. Edited forms (including
  /// Failed ones) become Unadmitted; other statuses carry over.
  void on_edit(Span span, std::string_view replacement) {
    if (span.start > span.end || span.end > text_.size()) {
      throw Error(ErrorCode::PreconditionViolation, "edit span outside the document");
    }
    if (span.start < locked_end()) {
      throw Error(ErrorCode::ReadOnlyViolation, "edit touches admitted text");
    }
    for (const auto& f : forms_) {
      bool busy = f.status == ProofStatus::Queued || f.status == ProofStatus::InProgress;
      if (busy && touches(span, f.form.span)) {
        throw Error(ErrorCode::ReadOnlyViolation, "edit touches a form awaiting admission");
      }
    }

    std::string text = text_;
    text.replace(span.start, span.size(), replacement);
    const auto delta = static_cast<std::ptrdiff_t>(replacement.size()) - static_cast<std::ptrdiff_t>(span.size());
    auto parsed = parse_source(text, *table_);

    // Untouched old forms, keyed by where they sit after the edit.
    std::map<std::size_t, std::size_t> survivors;
    for (std::size_t i = 0; i < forms_.size(); ++i) {
      Span s = forms_[i].form.span;
      if (touches(span, s)) continue;
      survivors[s.start >= span.end ? shifted(s, delta).start : s.start] = i;
    }
    std::vector<SessionForm> next;
    for (auto& nf : parsed) {
      SessionForm sf{std::move(nf)};
      if (auto it = survivors.find(sf.form.span.start); it != survivors.end()) {
        const SessionForm& of = forms_[it->second];
        if (of.form.text == sf.form.text) {
          sf.status = of.status;
          sf.events = of.events;
          sf.submission = of.submission;
          sf.error = of.error;
        }
      }
      next.push_back(std::move(sf));
    }

    // The admitted prefix must survive unchanged.
    const std::size_t line = proof_line();
    for (std::size_t i = 0; i < line; ++i) {
      if (i >= next.size() || next[i].status != ProofStatus::Admitted) {
        throw Error(ErrorCode::ReadOnlyViolation, "edit would change an admitted form");
      }
    }
    text_ = std::move(text);
    forms_ = std::move(next);
  }

  struct Insertion {
    Span edit;         // where the insertion goes (empty span)
    std::string text;  // form text plus separating newlines
    Span form;         // where the form sits after the edit
  };

  /// The edit that places `form_text` as a new form at the proof line.
  Insertion proof_line_insertion(std::string_view form_text) const {
    std::size_t at = locked_end();
    std::string insertion;
    if (at > 0) insertion += "\n\n";
    insertion += form_text;
    if (at < text_.size()) insertion += at == 0 ? "\n\n" : "\n";
    else if (at == 0) insertion += "\n";
    std::size_t start = at + (at > 0 ? 2 : 0);
    return Insertion{Span{at, at}, std::move(insertion), Span{start, start + form_text.size()}};
  }

  /// Inserts `form_text` as a new form at the proof line and returns its span.
  Span insert_at_proof_line(std::string_view form_text) {
    Insertion ins = proof_line_insertion(form_text);
    on_edit(ins.edit, ins.text);
    return ins.form;
  }

 private:
  std::string text_;
  SessionConfig config_;
  const BuiltinTable* table_;
  std::vector<SessionForm> forms_;
  bool needs_recovery_ = false;

  /// An edit touches a span when it overlaps it or inserts strictly inside it.
  static bool touches(Span edit, Span form) {
    if (edit.size() == 0) return edit.start > form.start && edit.start < form.end;
    return edit.start < form.end && form.start < edit.end;
  }

  static Span shifted(Span s, std::ptrdiff_t delta) {
    return Span{static_cast<std::size_t>(static_cast<std::ptrdiff_t>(s.start) + delta),
                static_cast<std::size_t>(static_cast<std::ptrdiff_t>(s.end) + delta)};
  }
};

}  // namespace proofpad
