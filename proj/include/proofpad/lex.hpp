#pragma once

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstddef>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "proofpad/builtins_data.hpp"
#include "proofpad/error.hpp"

namespace proofpad {

/// Half-open byte range into a source buffer.
struct Span {
  std::size_t start = 0;
  std::size_t end = 0;

  std::size_t size() const noexcept { return end - start; }
  bool contains(std::size_t offset) const noexcept {
    return offset >= start && offset < end;
  }
  bool overlaps(Span other) const noexcept {
    return start < other.end && other.start < end;
  }
  friend bool operator==(const Span&, const Span&) = default;
};

enum class TokenClass {
  LParen,
  RParen,
  Event,
  BuiltinFunction,
  BuiltinMacro,
  Keyword,
  Symbol,
  Number,
  Rational,
  Character,
  String,
  Comment,
  Whitespace,
  Error,
};

inline std::string_view to_string(TokenClass c) {
  switch (c) {
    case TokenClass::LParen: return "lparen";
    case TokenClass::RParen: return "rparen";
    case TokenClass::Event: return "event";
    case TokenClass::BuiltinFunction: return "builtin-function";
    case TokenClass::BuiltinMacro: return "builtin-macro";
    case TokenClass::Keyword: return "keyword";
    case TokenClass::Symbol: return "symbol";
    case TokenClass::Number: return "number";
    case TokenClass::Rational: return "rational";
    case TokenClass::Character: return "character";
    case TokenClass::String: return "string";
    case TokenClass::Comment: return "comment";
    case TokenClass::Whitespace: return "whitespace";
    case TokenClass::Error: return "error";
  }
  return "error";
}

struct Token {
  std::string lexeme;
  Span span;
  TokenClass cls = TokenClass::Error;

  friend bool operator==(const Token&, const Token&) = default;
};

/// True for the classes that name a symbol (including table hits).
inline bool is_symbolic(TokenClass c) {
  return c == TokenClass::Event || c == TokenClass::BuiltinFunction ||
         c == TokenClass::BuiltinMacro || c == TokenClass::Symbol;
}

inline bool is_trivia(TokenClass c) {
  return c == TokenClass::Whitespace || c == TokenClass::Comment;
}

/// Quote, backquote, comma and comma-at are lexed as their own Symbol tokens.
inline bool is_quote_punctuation(const Token& t) {
  return t.cls == TokenClass::Symbol &&
         (t.lexeme == "'" || t.lexeme == "`" || t.lexeme == "," || t.lexeme == ",@");
}

inline std::string ascii_lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

/// Drops a package prefix ("acl2::foo" -> "foo") and lowercases.
inline std::string symbol_key(std::string_view name) {
  if (auto pos = name.rfind("::"); pos != std::string_view::npos) name = name.substr(pos + 2);
  else if (auto p1 = name.find(':'); p1 != std::string_view::npos && p1 > 0) name = name.substr(p1 + 1);
  return ascii_lower(name);
}

// ---------------------------------------------------------------------------
// Builtin table

enum class BuiltinKind { Event, Function, Macro };
enum class IndentStyle { Body, Call };

struct Arity {
  int min = 0;
  std::optional<int> max;  // nullopt = unbounded

  bool accepts(int n) const noexcept { return n >= min && (!max || n <= *max); }
};

struct BuiltinEntry {
  BuiltinKind kind = BuiltinKind::Function;
  Arity arity;
  IndentStyle indent = IndentStyle::Call;
};

/// Symbol name -> {kind, arity, indent style}. Names are matched
/// case-insensitively, as the ACL2 reader upcases symbols.
class BuiltinTable {
 public:
  BuiltinTable() = default;

  /// Parses the tab-separated table format (name, kind, min, max, style).
  /// Lines starting with '#' and blank lines are ignored.
  static BuiltinTable parse(std::string_view text) {
    BuiltinTable table;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
      std::size_t nl = text.find('\n', pos);
      if (nl == std::string_view::npos) nl = text.size();
      std::string_view line = text.substr(pos, nl - pos);
      pos = nl + 1;
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
      if (line.empty() || line.front() == '#') continue;

      std::vector<std::string_view> fields;
      std::size_t f = 0;
      while (true) {
        std::size_t tab = line.find('\t', f);
        fields.push_back(line.substr(f, tab == std::string_view::npos ? std::string_view::npos : tab - f));
        if (tab == std::string_view::npos) break;
        f = tab + 1;
      }
      auto fail = [&](const std::string& why) {
        throw Error(ErrorCode::IoError,
                    "builtin table line " + std::to_string(line_no) + ": " + why);
      };
      if (fields.size() != 5) fail("expected 5 tab-separated fields");

      BuiltinEntry entry;
      if (fields[1] == "event") entry.kind = BuiltinKind::Event;
      else if (fields[1] == "function") entry.kind = BuiltinKind::Function;
      else if (fields[1] == "macro") entry.kind = BuiltinKind::Macro;
      else fail("unknown kind '" + std::string(fields[1]) + "'");

      auto parse_int = [&](std::string_view s) {
        int v = 0;
        auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc() || p != s.data() + s.size() || v < 0) fail("bad arity '" + std::string(s) + "'");
        return v;
      };
      entry.arity.min = parse_int(fields[2]);
      if (fields[3] != "*") {
        entry.arity.max = parse_int(fields[3]);
        if (*entry.arity.max < entry.arity.min) fail("min arity exceeds max arity");
      }
      if (fields[4] == "body") entry.indent = IndentStyle::Body;
      else if (fields[4] == "call") entry.indent = IndentStyle::Call;
      else fail("unknown indent style '" + std::string(fields[4]) + "'");

      std::string key = ascii_lower(fields[0]);
      if (key.empty()) fail("empty name");
      if (!table.entries_.emplace(key, entry).second) fail("duplicate name '" + key + "'");
    }
    return table;
  }

  static BuiltinTable load_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot open builtin table: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
  }

  /// The table shipped with the library (data/builtins.tsv).
  static const BuiltinTable& standard() {
    static const BuiltinTable table = parse(detail::kBuiltinsTsv);
    return table;
  }

  const BuiltinEntry* find(std::string_view name) const {
    auto it = entries_.find(symbol_key(name));
    return it == entries_.end() ? nullptr : &it->second;
  }

  std::size_t size() const noexcept { return entries_.size(); }
  const std::unordered_map<std::string, BuiltinEntry>& entries() const noexcept { return entries_; }

 private:
  std::unordered_map<std::string, BuiltinEntry> entries_;
};

/// Event / BuiltinFunction / BuiltinMacro for table hits, Symbol otherwise.
inline TokenClass classify(std::string_view name, const BuiltinTable& table) {
  const BuiltinEntry* e = table.find(name);
  if (!e) return TokenClass::Symbol;
  switch (e->kind) {
    case BuiltinKind::Event: return TokenClass::Event;
    case BuiltinKind::Function: return TokenClass::BuiltinFunction;
    case BuiltinKind::Macro: return TokenClass::BuiltinMacro;
  }
  return TokenClass::Symbol;
}

// ---------------------------------------------------------------------------
// Lexer

namespace detail {

inline bool is_ws(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

inline bool is_terminator(char c) {
  return is_ws(c) || c == '(' || c == ')' || c == '"' || c == ';' || c == '\'' ||
         c == '`' || c == ',';
}

inline bool all_digits(std::string_view s, int radix) {
  if (s.empty()) return false;
  for (char c : s) {
    int v;
    if (c >= '0' && c <= '9') v = c - '0';
    else if (c >= 'a' && c <= 'z') v = c - 'a' + 10;
    else if (c >= 'A' && c <= 'Z') v = c - 'A' + 10;
    else return false;
    if (v >= radix) return false;
  }
  return true;
}

inline bool all_zero(std::string_view s) {
  return std::all_of(s.begin(), s.end(), [](char c) { return c == '0'; });
}

/// Classifies the body of a numeric literal (sign, digits, optional /digits).
inline std::optional<TokenClass> numeric_class(std::string_view s, int radix) {
  if (!s.empty() && (s.front() == '+' || s.front() == '-')) s.remove_prefix(1);
  if (auto slash = s.find('/'); slash != std::string_view::npos) {
    std::string_view num = s.substr(0, slash), den = s.substr(slash + 1);
    if (all_digits(num, radix) && all_digits(den, radix)) {
      if (all_zero(den)) return TokenClass::Error;
      return TokenClass::Rational;
    }
    return std::nullopt;
  }
  if (radix == 10 && !s.empty() && s.back() == '.') s.remove_suffix(1);
  if (all_digits(s, radix)) return TokenClass::Number;
  return std::nullopt;
}

inline bool looks_numeric(std::string_view s) {
  if (!s.empty() && (s.front() == '+' || s.front() == '-')) s.remove_prefix(1);
  return !s.empty() && (std::isdigit(static_cast<unsigned char>(s.front())) ||
                        (s.front() == '.' && s.size() > 1 &&
                         std::isdigit(static_cast<unsigned char>(s[1]))));
}

inline bool is_named_char(std::string_view name) {
  static constexpr std::string_view names[] = {"space", "newline", "tab", "page",
                                               "rubout", "linefeed", "return", "backspace"};
  std::string lower = ascii_lower(name);
  return std::find(std::begin(names), std::end(names), lower) != std::end(names);
}

/// Length of the UTF-8 sequence introduced by a lead byte (1 for invalid bytes).
inline std::size_t utf8_length(unsigned char lead) {
  if (lead < 0x80) return 1;
  if ((lead >> 5) == 0x6) return 2;
  if ((lead >> 4) == 0xE) return 3;
  if ((lead >> 3) == 0x1E) return 4;
  return 1;
}

}  // namespace detail

/// Single-pass lexer. Lossless: the lexemes of the result concatenate to
/// `source`. Never fails; malformed input becomes Error tokens.
inline std::vector<Token> tokenize(std::string_view source,
                                   const BuiltinTable& table = BuiltinTable::standard()) {
  using detail::is_terminator;
  using detail::is_ws;
  std::vector<Token> out;
  const std::size_t n = source.size();
  std::size_t i = 0;

  auto emit = [&](std::size_t start, std::size_t end, TokenClass cls) {
    out.push_back(Token{std::string(source.substr(start, end - start)), Span{start, end}, cls});
  };

  // Scans a symbol-like atom starting at i, honouring |multiple escapes|.
  // Returns the end offset and whether the escape was closed.
  auto scan_atom = [&](std::size_t from) -> std::pair<std::size_t, bool> {
    std::size_t j = from;
    bool closed = true;
    while (j < n && !is_terminator(source[j])) {
      if (source[j] == '|') {
        std::size_t close = source.find('|', j + 1);
        if (close == std::string_view::npos) return {n, false};
        j = close + 1;
      } else if (source[j] == '\\' && j + 1 < n) {
        j += 2;
      } else {
        ++j;
      }
    }
    return {j, closed};
  };

  while (i < n) {
    const char c = source[i];
    const std::size_t start = i;

    if (is_ws(c)) {
      while (i < n && is_ws(source[i])) ++i;
      emit(start, i, TokenClass::Whitespace);
    } else if (c == ';') {
      while (i < n && source[i] != '\n') ++i;
      emit(start, i, TokenClass::Comment);
    } else if (c == '(') {
      emit(start, ++i, TokenClass::LParen);
    } else if (c == ')') {
      emit(start, ++i, TokenClass::RParen);
    } else if (c == '"') {
      ++i;
      bool closed = false;
      while (i < n) {
        if (source[i] == '\\' && i + 1 < n) {
          i += 2;
        } else if (source[i] == '"') {
          ++i;
          closed = true;
          break;
        } else {
          ++i;
        }
      }
      if (!closed) i = n;
      emit(start, i, closed ? TokenClass::String : TokenClass::Error);
    } else if (c == '\'' || c == '`') {
      emit(start, ++i, TokenClass::Symbol);
    } else if (c == ',') {
      i += (i + 1 < n && source[i + 1] == '@') ? 2 : 1;
      emit(start, i, TokenClass::Symbol);
    } else if (c == '#' && i + 1 < n && source[i + 1] == '|') {
      // Block comment; nests like Common Lisp's.
      int depth = 1;
      i += 2;
      while (i < n && depth > 0) {
        if (source[i] == '|' && i + 1 < n && source[i + 1] == '#') {
          --depth;
          i += 2;
        } else if (source[i] == '#' && i + 1 < n && source[i + 1] == '|') {
          ++depth;
          i += 2;
        } else {
          ++i;
        }
      }
      emit(start, i, depth == 0 ? TokenClass::Comment : TokenClass::Error);
    } else if (c == '#' && i + 1 < n && source[i + 1] == '\\') {
      i += 2;
      if (i >= n) {
        emit(start, i, TokenClass::Error);
        continue;
      }
      // First character is always taken literally, even a delimiter.
      i += detail::utf8_length(static_cast<unsigned char>(source[i]));
      i = std::min(i, n);
      std::size_t name_start = start + 2;
      if (std::isalpha(static_cast<unsigned char>(source[name_start]))) {
        while (i < n && !is_terminator(source[i])) ++i;
      }
      std::string_view name = source.substr(name_start, i - name_start);
      bool ok = name.size() == detail::utf8_length(static_cast<unsigned char>(name.front())) ||
                detail::is_named_char(name);
      emit(start, i, ok ? TokenClass::Character : TokenClass::Error);
    } else if (c == '#') {
      auto [end, closed] = scan_atom(i + 1);
      i = std::max(end, i + 1);
      std::string_view text = source.substr(start, i - start);
      TokenClass cls = TokenClass::Error;
      if (closed && text.size() >= 3) {
        int radix = 0;
        switch (std::tolower(static_cast<unsigned char>(text[1]))) {
          case 'b': radix = 2; break;
          case 'o': radix = 8; break;
          case 'x': radix = 16; break;
          default: break;
        }
        if (radix) {
          if (auto k = detail::numeric_class(text.substr(2), radix)) cls = *k;
        }
      }
      emit(start, i, cls);
    } else if (static_cast<unsigned char>(c) < 0x20 || c == 0x7f) {
      while (i < n && (static_cast<unsigned char>(source[i]) < 0x20 || source[i] == 0x7f) &&
             !is_ws(source[i]))
        ++i;
      emit(start, i, TokenClass::Error);
    } else {
      auto [end, closed] = scan_atom(i);
      i = std::max(end, i + 1);
      std::string_view text = source.substr(start, i - start);
      TokenClass cls;
      if (!closed) {
        cls = TokenClass::Error;
      } else if (detail::looks_numeric(text)) {
        auto k = detail::numeric_class(text, 10);
        // A numeric-looking atom the reader cannot parse (e.g. 1.5): ACL2 has no floats.
        if (k) cls = *k;
        else if (text.find('.') != std::string_view::npos) cls = TokenClass::Error;
        else cls = classify(text, table);  // 1+, 1-, 2nd-arg ...

      } else if (text.front() == ':') {
        cls = text.size() > 1 ? TokenClass::Keyword : TokenClass::Error;
      } else if (text.find('|') != std::string_view::npos) {
        cls = TokenClass::Symbol;
      } else {
        cls = classify(text, table);
      }
      emit(start, i, cls);
    }
  }
  return out;
}

}  // namespace proofpad
