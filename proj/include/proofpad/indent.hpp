#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "proofpad/lex.hpp"

namespace proofpad {

inline constexpr std::size_t kTabWidth = 8;

namespace detail {

/// Advances a display column over `text` (tabs to the next multiple of 8,
/// UTF-8 continuation bytes take no width).
inline std::size_t advance_column(std::size_t col, std::string_view text) {
  for (char ch : text) {
    auto c = static_cast<unsigned char>(ch);
    if (c == '\n') col = 0;
    else if (c == '\t') col = (col / kTabWidth + 1) * kTabWidth;
    else if ((c & 0xC0) != 0x80) ++col;
  }
  return col;
}

/// Paren-depth trace used by both the newline indenter and the re-indenter.
/// Columns are those of the text fed in, so re-indentation feeds it the
/// rewritten output.
class IndentTrace {
 public:
  explicit IndentTrace(const BuiltinTable& table) : table_(table) {}

  void feed(const Token& tok, std::size_t col, std::size_t line) {
    switch (tok.cls) {
      case TokenClass::Whitespace:
      case TokenClass::Comment:
        return;
      case TokenClass::LParen:
        element(tok, col, line);
        stack_.push_back(Frame{col});
        return;
      case TokenClass::RParen:
        if (!stack_.empty()) stack_.pop_back();
        return;
      default:
        if (is_quote_punctuation(tok)) {
          if (!stack_.empty() && stack_.back().in_quote) return;
          element(tok, col, line);
          if (!stack_.empty()) stack_.back().in_quote = true;
          return;
        }
        element(tok, col, line);
    }
  }

  /// Column for a line starting at the current position.
  std::size_t column() const {
    if (stack_.empty()) return 0;
    const Frame& f = stack_.back();
    if (f.elements == 0) return f.open_col + 1;
    switch (f.style) {
      case Style::Body: return f.open_col + 2;
      case Style::Call: return f.first_arg_col ? *f.first_arg_col : f.open_col + 1;
      case Style::Data: return f.open_col + 1;
    }
    return f.open_col + 1;
  }

 private:
  enum class Style { Body, Call, Data };

  struct Frame {
    std::size_t open_col = 0;
    std::size_t elements = 0;
    Style style = Style::Data;
    std::size_t head_line = 0;
    std::optional<std::size_t> first_arg_col;
    bool in_quote = false;
  };

  const BuiltinTable& table_;
  std::vector<Frame> stack_;

  Style style_for(const Token& head) const {
    if (!is_symbolic(head.cls) || is_quote_punctuation(head)) return Style::Data;
    if (const BuiltinEntry* e = table_.find(head.lexeme)) {
      return e->indent == IndentStyle::Body ? Style::Body : Style::Call;
    }
    return symbol_key(head.lexeme).starts_with("def") ? Style::Body : Style::Call;
  }

  void element(const Token& tok, std::size_t col, std::size_t line) {
    if (stack_.empty()) return;
    Frame& f = stack_.back();
    if (f.in_quote) {
      // The datum after a quote belongs to the quote's element.
      f.in_quote = false;
      return;
    }
    if (f.elements == 0) {
      f.style = tok.cls == TokenClass::LParen ? Style::Data : style_for(tok);
      f.head_line = line;
    } else if (f.elements == 1 && line == f.head_line) {
      f.first_arg_col = col;
    }
    ++f.elements;
  }
};

}  // namespace detail

/// Column for the line that follows `prefix` (the text before the caret).
inline std::size_t indent_for_newline(std::string_view prefix,
                                      const BuiltinTable& table = BuiltinTable::standard()) {
  detail::IndentTrace trace(table);
  std::size_t col = 0, line = 0;
  auto tokens = tokenize(prefix, table);
  for (const Token& t : tokens) {
    trace.feed(t, col, line);
    col = detail::advance_column(col, t.lexeme);
    for (char c : t.lexeme) line += (c == '\n');
  }
  // Inside an unterminated string or block comment there is no code indent.
  if (!tokens.empty() && tokens.back().cls == TokenClass::Error &&
      (tokens.back().lexeme.front() == '"' || tokens.back().lexeme.starts_with("#|"))) {
    return 0;
  }
  return trace.column();
}

/// Rewrites the leading whitespace of every non-blank line whose start lies in
/// `region`; everything else is copied through. Lines that begin inside a
/// multi-line string or comment are left alone. Output indentation is spaces.
inline std::string reindent(std::string_view source, Span region,
                            const BuiltinTable& table = BuiltinTable::standard()) {
  auto tokens = tokenize(source, table);
  detail::IndentTrace trace(table);
  std::string out;
  out.reserve(source.size() + source.size() / 8);
  std::size_t col = 0, line = 0;

  auto in_region = [&](std::size_t offset) { return offset >= region.start && offset < region.end; };
  auto emit = [&](std::string_view text) {
    out.append(text);
    col = detail::advance_column(col, text);
    for (char c : text) line += (c == '\n');
  };
  auto is_line_content_next = [&](std::size_t token_index) {
    return token_index + 1 < tokens.size();
  };

  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const Token& t = tokens[i];
    if (t.cls != TokenClass::Whitespace) {
      trace.feed(t, col, line);
      emit(t.lexeme);
      continue;
    }
    // Split whitespace into the tail of the current line and the leading
    // whitespace of each following line.
    std::string_view ws = t.lexeme;
    std::size_t seg_start = 0;
    bool at_line_start = (t.span.start == 0);
    while (true) {
      std::size_t nl = ws.find('\n', seg_start);
      std::string_view seg = ws.substr(seg_start, nl == std::string_view::npos ? std::string_view::npos : nl - seg_start);
      std::size_t seg_offset = t.span.start + seg_start;
      if (nl == std::string_view::npos) {
        bool rewrite = at_line_start && is_line_content_next(i) && in_region(seg_offset);
        if (rewrite) emit(std::string(trace.column(), ' '));
        else emit(seg);
        break;
      }
      emit(seg);  // trailing whitespace, or a blank line's whitespace
      emit("\n");
      seg_start = nl + 1;
      at_line_start = true;
    }
  }
  return out;
}

inline std::string reindent(std::string_view source, const BuiltinTable& table = BuiltinTable::standard()) {
  return reindent(source, Span{0, source.size() + 1}, table);
}

}  // namespace proofpad
