#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "proofpad/error.hpp"
#include "proofpad/sexp.hpp"

namespace proofpad {

using Integer = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

struct Value;
using ValuePtr = std::shared_ptr<const Value>;

/// An ACL2 object. Symbols are stored by upper-case print name; keywords keep
/// their leading colon.
struct Value {
  enum class Kind { Symbol, Number, String, Character, Cons };

  Kind kind = Kind::Symbol;
  std::string text;  // symbol name or string contents
  Rational number;
  char character = 0;
  ValuePtr car, cdr;

  bool is_symbol() const noexcept { return kind == Kind::Symbol; }
  bool is_number() const noexcept { return kind == Kind::Number; }
  bool is_cons() const noexcept { return kind == Kind::Cons; }
  bool is_nil() const noexcept { return kind == Kind::Symbol && text == "NIL"; }
  bool is_integer() const { return is_number() && boost::multiprecision::denominator(number) == 1; }
};

namespace value {

inline ValuePtr symbol(std::string name) {
  auto v = std::make_shared<Value>();
  v->text = std::move(name);
  return v;
}

inline const ValuePtr& nil() {
  static const ValuePtr v = symbol("NIL");
  return v;
}

inline const ValuePtr& t() {
  static const ValuePtr v = symbol("T");
  return v;
}

inline ValuePtr boolean(bool b) { return b ? t() : nil(); }

inline ValuePtr number(Rational n) {
  auto v = std::make_shared<Value>();
  v->kind = Value::Kind::Number;
  v->number = std::move(n);
  return v;
}

inline ValuePtr string(std::string s) {
  auto v = std::make_shared<Value>();
  v->kind = Value::Kind::String;
  v->text = std::move(s);
  return v;
}

inline ValuePtr character(char c) {
  auto v = std::make_shared<Value>();
  v->kind = Value::Kind::Character;
  v->character = c;
  return v;
}

inline ValuePtr cons(ValuePtr a, ValuePtr d) {
  auto v = std::make_shared<Value>();
  v->kind = Value::Kind::Cons;
  v->car = std::move(a);
  v->cdr = std::move(d);
  return v;
}

inline ValuePtr list(const std::vector<ValuePtr>& items, ValuePtr tail = nil()) {
  ValuePtr out = std::move(tail);
  for (auto it = items.rbegin(); it != items.rend(); ++it) out = cons(*it, out);
  return out;
}

/// Elements of a list; a non-nil final cdr is dropped.
inline std::vector<ValuePtr> elements(ValuePtr v) {
  std::vector<ValuePtr> out;
  while (v->is_cons()) {
    out.push_back(v->car);
    v = v->cdr;
  }
  return out;
}

inline bool equal(const Value& a, const Value& b) {
  const Value* x = &a;
  const Value* y = &b;
  while (true) {
    if (x == y) return true;
    if (x->kind != y->kind) return false;
    switch (x->kind) {
      case Value::Kind::Symbol:
      case Value::Kind::String: return x->text == y->text;
      case Value::Kind::Number: return x->number == y->number;
      case Value::Kind::Character: return x->character == y->character;
      case Value::Kind::Cons:
        if (!equal(*x->car, *y->car)) return false;
        x = x->cdr.get();
        y = y->cdr.get();
    }
  }
}

inline std::string upper(std::string_view s) {
  std::string out(s);
  for (char& c : out) {
    if (c >= 'a' && c <= 'z') c = static_cast<char>(c - 'a' + 'A');
  }
  return out;
}

inline std::string print_rational(const Rational& q) {
  std::string out = boost::multiprecision::numerator(q).str();
  if (boost::multiprecision::denominator(q) != 1) out += "/" + boost::multiprecision::denominator(q).str();
  return out;
}

inline std::string char_name(char c) {
  switch (c) {
    case ' ': return "Space";
    case '\n': return "Newline";
    case '\t': return "Tab";
    case '\f': return "Page";
    case '\r': return "Return";
    case '\b': return "Backspace";
    case 127: return "Rubout";
    default: return std::string(1, c);
  }
}

/// ACL2 print syntax: upper-case symbols, 'x for (quote x), dotted tails.
inline std::string print(const Value& v) {
  switch (v.kind) {
    case Value::Kind::Symbol: return v.text;
    case Value::Kind::Number: return print_rational(v.number);
    case Value::Kind::Character: return "#\\" + char_name(v.character);
    case Value::Kind::String: {
      std::string out = "\"";
      for (char c : v.text) {
        if (c == '"' || c == '\\') out += '\\';
        out += c;
      }
      return out + "\"";
    }
    case Value::Kind::Cons: break;
  }
  if (v.car->is_symbol() && v.car->text == "QUOTE" && v.cdr->is_cons() && v.cdr->cdr->is_nil()) {
    return "'" + print(*v.cdr->car);
  }
  std::string out = "(";
  const Value* p = &v;
  bool first = true;
  while (p->is_cons()) {
    if (!first) out += ' ';
    first = false;
    out += print(*p->car);
    p = p->cdr.get();
  }
  if (!p->is_nil()) out += " . " + print(*p);
  return out + ")";
}

inline std::string print(const ValuePtr& v) { return print(*v); }

inline Rational parse_number(std::string_view lexeme) {
  int radix = 10;
  if (lexeme.size() > 1 && lexeme.front() == '#') {
    char r = static_cast<char>(lexeme[1] | 0x20);
    radix = r == 'b' ? 2 : r == 'o' ? 8 : 16;
    lexeme.remove_prefix(2);
  }
  bool negative = false;
  if (!lexeme.empty() && (lexeme.front() == '+' || lexeme.front() == '-')) {
    negative = lexeme.front() == '-';
    lexeme.remove_prefix(1);
  }
  if (radix == 10 && !lexeme.empty() && lexeme.back() == '.') lexeme.remove_suffix(1);
  auto digits = [radix](std::string_view s) {
    Integer n = 0;
    for (char c : s) {
      int d = c <= '9' ? c - '0' : (c | 0x20) - 'a' + 10;
      n = n * radix + d;
    }
    return n;
  };
  std::size_t slash = lexeme.find('/');
  Rational q = slash == std::string_view::npos
                   ? Rational(digits(lexeme))
                   : Rational(digits(lexeme.substr(0, slash)), digits(lexeme.substr(slash + 1)));
  return negative ? Rational(-q) : q;
}

inline char parse_character(std::string_view lexeme) {
  std::string_view name = lexeme.substr(2);
  if (name.size() == 1) return name.front();
  std::string lower = ascii_lower(name);
  if (lower == "space") return ' ';
  if (lower == "newline" || lower == "linefeed") return '\n';
  if (lower == "tab") return '\t';
  if (lower == "page") return '\f';
  if (lower == "return") return '\r';
  if (lower == "backspace") return '\b';
  if (lower == "rubout") return 127;
  return name.empty() ? ' ' : name.front();
}

inline std::string parse_string(std::string_view lexeme) {
  std::string out;
  for (std::size_t i = 1; i + 1 < lexeme.size(); ++i) {
    if (lexeme[i] == '\\' && i + 2 < lexeme.size()) ++i;
    out += lexeme[i];
  }
  return out;
}

/// Reads a parsed node as data. Backquote is read like quote; commas are
/// transparent.
inline ValuePtr from_node(const Node& n) {
  switch (n.kind) {
    case Node::Kind::List: {
      std::vector<ValuePtr> items;
      ValuePtr tail = nil();
      for (std::size_t i = 0; i < n.children.size(); ++i) {
        const Node& c = n.children[i];
        if (c.is_atom() && c.text == "." && i + 2 == n.children.size()) {
          tail = from_node(n.children[i + 1]);
          break;
        }
        items.push_back(from_node(c));
      }
      return list(items, tail);
    }
    case Node::Kind::Quoted: {
      ValuePtr datum = n.children.empty() ? nil() : from_node(n.children.front());
      if (n.text == "'" || n.text == "`") return list({symbol("QUOTE"), datum});
      return datum;
    }
    case Node::Kind::Atom: break;
  }
  switch (n.atom_class) {
    case TokenClass::Number:
    case TokenClass::Rational: return number(parse_number(n.text));
    case TokenClass::Character: return character(parse_character(n.text));
    case TokenClass::String: return string(parse_string(n.text));
    case TokenClass::Keyword: return symbol(upper(n.text));
    default: break;
  }
  if (n.text.size() >= 2 && n.text.front() == '|' && n.text.back() == '|') {
    return symbol(n.text.substr(1, n.text.size() - 2));
  }
  return symbol(upper(symbol_key(n.text)));
}

/// Reads the first datum of `text`.
inline ValuePtr read(std::string_view text) {
  auto forms = parse_source(text);
  if (forms.empty() || !forms.front().complete) {
    throw Error(ErrorCode::IncompleteForm, "no complete datum in input");
  }
  return from_node(forms.front().tree);
}

}  // namespace value
}  // namespace proofpad
