#pragma once

#include <algorithm>
#include <cstddef>
#include <regex>
#include <string>
#include <string_view>
#include <vector>

#include "proofpad/error.hpp"
#include "proofpad/lex.hpp"
#include "proofpad/rewrites_data.hpp"

namespace proofpad {

enum class MessageSeverity { Error, Warning, Success, Info };

inline std::string_view to_string(MessageSeverity s) {
  switch (s) {
    case MessageSeverity::Error: return "error";
    case MessageSeverity::Warning: return "warning";
    case MessageSeverity::Success: return "success";
    case MessageSeverity::Info: return "info";
  }
  return "info";
}

/// Lower rank sorts first.
inline int severity_rank(MessageSeverity s) { return static_cast<int>(s); }

struct StructuredMessage {
  MessageSeverity severity = MessageSeverity::Info;
  std::string headline;
  std::string detail;  // the message text verbatim
  Span raw_range;
  bool failure_marker = false;  // the ******** FAILED ******** banner

  friend bool operator==(const StructuredMessage&, const StructuredMessage&) = default;
};

enum class Overall { Success, Failure };

inline std::string_view to_string(Overall o) { return o == Overall::Success ? "success" : "failure"; }

struct Summary {
  std::vector<StructuredMessage> items;
  Overall overall = Overall::Success;
  std::string raw;

  friend bool operator==(const Summary&, const Summary&) = default;
};

inline constexpr std::string_view kFailedBanner = "******** FAILED ********";
inline constexpr std::size_t kHeadlineLimit = 120;

namespace detail {

struct Line {
  std::size_t start;
  std::size_t end;  // excludes the newline (and a preceding '\r')
  std::string_view text;
};

inline std::vector<Line> split_lines(std::string_view raw) {
  std::vector<Line> lines;
  std::size_t pos = 0;
  while (pos < raw.size()) {
    std::size_t nl = raw.find('\n', pos);
    std::size_t end = nl == std::string_view::npos ? raw.size() : nl;
    std::size_t text_end = (end > pos && raw[end - 1] == '\r') ? end - 1 : end;
    lines.push_back(Line{pos, text_end, raw.substr(pos, text_end - pos)});
    pos = nl == std::string_view::npos ? raw.size() : nl + 1;
  }
  return lines;
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

/// "ACL2 !>", "ACL2 >", "ACL2 p!>" and friends alone on a line.
inline bool is_prompt_line(std::string_view line) {
  line = trim(line);
  if (!line.starts_with("ACL2 ") || !line.ends_with(">")) return false;
  std::string_view mid = line.substr(5, line.size() - 6);
  return mid.size() <= 4 && mid.find(' ') == std::string_view::npos;
}

inline bool is_blank(std::string_view line) { return trim(line).empty() || is_prompt_line(line); }

/// Drops prompts glued to the start of a line ("ACL2 !>ACL2 Error ...").
inline std::string_view strip_prompts(std::string_view line) {
  while (true) {
    std::string_view t = trim(line);
    if (!t.starts_with("ACL2 ")) return t;
    std::size_t gt = t.find('>');
    if (gt == std::string_view::npos || !is_prompt_line(t.substr(0, gt + 1))) return t;
    line = t.substr(gt + 1);
  }
}

enum class BlockKind { Error, Warning, Summary, Failed, Text };

inline BlockKind block_kind(std::string_view first_line) {
  std::string_view t = strip_prompts(first_line);
  if (t.starts_with("ACL2 Error")) return BlockKind::Error;
  if (t.starts_with("ACL2 Warning")) return BlockKind::Warning;
  if (t == "Summary") return BlockKind::Summary;
  if (t == kFailedBanner) return BlockKind::Failed;
  return BlockKind::Text;
}

/// Joins lines with single spaces, collapsing runs of whitespace.
inline std::string collapse(std::string_view text) {
  std::string out;
  bool space = false;
  for (char c : text) {
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
      space = !out.empty();
    } else {
      if (space) out += ' ';
      space = false;
      out += c;
    }
  }
  return out;
}

/// First sentence: up to a period followed by whitespace or the end, skipping
/// periods inside double quotes (file names).
inline std::string first_sentence(std::string_view text) {
  bool quoted = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] == '"') quoted = !quoted;
    if (!quoted && text[i] == '.' && (i + 1 == text.size() || text[i + 1] == ' ')) {
      return std::string(text.substr(0, i + 1));
    }
  }
  return std::string(text);
}

inline std::string truncate_headline(std::string s) {
  if (s.size() <= kHeadlineLimit) return s;
  std::size_t cut = kHeadlineLimit - 3;
  while (cut > 0 && (static_cast<unsigned char>(s[cut]) & 0xC0) == 0x80) --cut;
  s.resize(cut);
  return s + "...";
}

/// Message body of an "ACL2 Error in (...):  text" block.
inline std::string_view after_context(std::string_view block) {
  block = strip_prompts(block);
  std::size_t first_nl = block.find('\n');
  std::string_view first = block.substr(0, first_nl);
  std::size_t colon = first.find(":  ");
  if (colon != std::string_view::npos) return block.substr(colon + 3);
  colon = first.find(':');
  if (colon != std::string_view::npos) return block.substr(colon + 1);
  return block;
}

inline std::string summary_form(std::string_view block) {
  for (const Line& l : split_lines(block)) {
    std::string_view t = trim(l.text);
    if (t.starts_with("Form:")) return std::string(trim(t.substr(5)));
  }
  return {};
}

}  // namespace detail

/// True iff the raw output carries a failure marker: the FAILED banner or an
/// "ACL2 Error" line. Shared by the backend's outcome classification.
inline bool output_indicates_failure(std::string_view raw) {
  for (const auto& l : detail::split_lines(raw)) {
    auto kind = detail::block_kind(l.text);
    if (kind == detail::BlockKind::Error || kind == detail::BlockKind::Failed) return true;
  }
  return false;
}

/// Splits one submission's raw output into messages. Blank lines delimit
/// messages; "ACL2 Error", "ACL2 Warning", "Summary" and the FAILED banner
/// also start a new one. Unrecognized text is info.
inline std::vector<StructuredMessage> parse_output(std::string_view raw) {
  using namespace detail;
  const bool failed = output_indicates_failure(raw);
  std::vector<StructuredMessage> out;
  auto lines = split_lines(raw);

  std::size_t i = 0;
  while (i < lines.size()) {
    if (is_blank(lines[i].text)) {
      ++i;
      continue;
    }
    std::size_t first = i++;
    BlockKind kind = block_kind(lines[first].text);
    while (i < lines.size() && !is_blank(lines[i].text) && block_kind(lines[i].text) == BlockKind::Text) {
      if (kind == BlockKind::Failed) break;
      ++i;
    }
    Span range{lines[first].start, lines[i - 1].end};
    std::string_view block = raw.substr(range.start, range.size());

    StructuredMessage m;
    m.raw_range = range;
    m.detail = std::string(block);
    switch (kind) {
      case BlockKind::Error:
      case BlockKind::Warning:
        m.severity = kind == BlockKind::Error ? MessageSeverity::Error : MessageSeverity::Warning;
        m.headline = first_sentence(collapse(after_context(block)));
        break;
      case BlockKind::Summary: {
        std::string form = summary_form(block);
        if (failed) {
          m.severity = MessageSeverity::Info;
          m.headline = form.empty() ? "Summary" : "Summary of " + form;
        } else {
          m.severity = MessageSeverity::Success;
          m.headline = form.empty() ? "Admitted" : "Admitted " + form;
        }
        break;
      }
      case BlockKind::Failed:
        m.severity = MessageSeverity::Error;
        m.headline = "The form failed";
        m.failure_marker = true;
        break;
      case BlockKind::Text:
        m.severity = MessageSeverity::Info;
        m.headline = first_sentence(collapse(strip_prompts(block)));
        break;
    }
    m.headline = truncate_headline(std::move(m.headline));
    out.push_back(std::move(m));
  }
  return out;
}

/// Curated headline rewrites (data/rewrites.tsv): whole-headline regex ->
/// friendlier text with $1.. substitutions.
class RewriteTable {
 public:
  struct Rule {
    std::string pattern;
    std::regex regex;
    std::string replacement;
  };

  static RewriteTable parse(std::string_view text) {
    RewriteTable t;
    std::size_t pos = 0, line_no = 0;
    while (pos < text.size()) {
      std::size_t nl = text.find('\n', pos);
      std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
      pos = nl == std::string_view::npos ? text.size() : nl + 1;
      ++line_no;
      if (line.empty() || line.front() == '#') continue;
      std::size_t tab = line.find('\t');
      if (tab == std::string_view::npos) {
        throw Error(ErrorCode::IoError, "rewrite table line " + std::to_string(line_no) + ": missing tab");
      }
      std::string pattern(line.substr(0, tab));
      try {
        t.rules_.push_back(Rule{pattern, std::regex(pattern), std::string(line.substr(tab + 1))});
      } catch (const std::regex_error& e) {
        throw Error(ErrorCode::IoError,
                    "rewrite table line " + std::to_string(line_no) + ": bad pattern: " + e.what());
      }
    }
    return t;
  }

  static const RewriteTable& standard() {
    static const RewriteTable table = parse(detail::kRewritesTsv);
    return table;
  }

  /// The rewritten headline, or the input unchanged when no rule matches.
  std::string apply(const std::string& headline) const {
    std::smatch m;
    for (const Rule& r : rules_) {
      if (std::regex_match(headline, m, r.regex)) return m.format(r.replacement);
    }
    return headline;
  }

  std::size_t size() const noexcept { return rules_.size(); }

 private:
  std::vector<Rule> rules_;
};

/// Importance-ordered view: errors, warnings, successes, info (stable within a
/// severity), headlines passed through the rewrite table, raw kept verbatim.
inline Summary summarize(std::vector<StructuredMessage> messages, std::string_view raw,
                         const RewriteTable& rewrites = RewriteTable::standard()) {
  Summary s;
  s.raw = std::string(raw);
  s.overall = output_indicates_failure(raw) ? Overall::Failure : Overall::Success;
  for (auto& m : messages) m.headline = rewrites.apply(m.headline);
  std::stable_sort(messages.begin(), messages.end(), [](const StructuredMessage& a, const StructuredMessage& b) {
    return severity_rank(a.severity) < severity_rank(b.severity);
  });
  s.items = std::move(messages);
  return s;
}

inline Summary summarize_output(std::string_view raw, const RewriteTable& rewrites = RewriteTable::standard()) {
  return summarize(parse_output(raw), raw, rewrites);
}

/// Plain-text rendition: one "severity: headline" line per item, then the
/// overall verdict.
inline std::string render_summary(const Summary& s) {
  std::string out;
  for (const auto& m : s.items) {
    out += to_string(m.severity);
    out += ": ";
    out += m.headline;
    out += '\n';
  }
  out += "overall: ";
  out += to_string(s.overall);
  out += '\n';
  return out;
}

}  // namespace proofpad
