#pragma once

#include <algorithm>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "proofpad/lex.hpp"

namespace proofpad {

/// One node of a parsed s-expression. Lists keep their children; quote
/// punctuation ('x, `x, ,x, ,@x) wraps exactly one datum.
struct Node {
  enum class Kind { List, Atom, Quoted };

  Kind kind = Kind::Atom;
  Span span;
  TokenClass atom_class = TokenClass::Symbol;  // atoms only
  std::string text;                            // atom lexeme, or the quote punctuation
  std::vector<Node> children;
  bool closed = true;  // false for a list missing ')' or a quote missing its datum

  bool is_list() const noexcept { return kind == Kind::List; }
  bool is_atom() const noexcept { return kind == Kind::Atom; }
  bool is_symbol() const noexcept { return kind == Kind::Atom && is_symbolic(atom_class); }
  bool is_keyword() const noexcept { return kind == Kind::Atom && atom_class == TokenClass::Keyword; }

  /// Lowercased, package-stripped name for symbol atoms; empty otherwise.
  std::string symbol() const { return is_symbol() ? symbol_key(text) : std::string(); }

  /// Head symbol of a list, or empty.
  std::string head() const {
    return is_list() && !children.empty() ? children.front().symbol() : std::string();
  }
};

enum class FormKind { Event, Expression };

struct TopLevelForm {
  Span span;
  std::string head;  // lowercased; empty for atoms and quoted data
  FormKind kind = FormKind::Expression;
  bool complete = true;
  bool stray_close = false;  // a ')' with no matching '('
  Node tree;
  std::string text;
};

/// Event iff the table says so, or the head is unknown and starts with "def".
inline FormKind form_kind_for_head(std::string_view head, const BuiltinTable& table) {
  if (head.empty()) return FormKind::Expression;
  if (const BuiltinEntry* e = table.find(head)) {
    return e->kind == BuiltinKind::Event ? FormKind::Event : FormKind::Expression;
  }
  return symbol_key(head).starts_with("def") ? FormKind::Event : FormKind::Expression;
}

/// Groups a lossless token stream into top-level forms. Total: an unclosed
/// trailing form comes back with complete == false, and a stray ')' becomes a
/// one-token incomplete form with stray_close set.
inline std::vector<TopLevelForm> parse_top_level(std::span<const Token> tokens, std::string_view source,
                                                 const BuiltinTable& table = BuiltinTable::standard()) {
  std::vector<TopLevelForm> forms;
  std::vector<Node> stack;

  auto finish_form = [&](Node node) {
    TopLevelForm form;
    form.span = node.span;
    form.complete = node.closed;
    form.head = node.head();
    form.kind = form_kind_for_head(form.head, table);
    form.text = std::string(source.substr(node.span.start, node.span.size()));
    form.tree = std::move(node);
    forms.push_back(std::move(form));
  };

  // Attaches a finished datum to its parent, auto-closing quote wrappers.
  auto deliver = [&](Node node) {
    while (true) {
      if (stack.empty()) {
        finish_form(std::move(node));
        return;
      }
      Node& parent = stack.back();
      parent.span.end = node.span.end;
      parent.children.push_back(std::move(node));
      if (parent.kind != Node::Kind::Quoted) return;
      parent.closed = true;
      node = std::move(parent);
      stack.pop_back();
    }
  };

  for (const Token& tok : tokens) {
    if (is_trivia(tok.cls)) continue;
    if (tok.cls == TokenClass::LParen) {
      Node list;
      list.kind = Node::Kind::List;
      list.span = tok.span;
      list.closed = false;
      stack.push_back(std::move(list));
    } else if (tok.cls == TokenClass::RParen) {
      // Quotes waiting for a datum cannot absorb ')': close them empty (lint
      // reports the childless quote).
      while (!stack.empty() && stack.back().kind == Node::Kind::Quoted) {
        Node q = std::move(stack.back());
        stack.pop_back();
        q.closed = true;
        if (stack.empty()) {
          finish_form(std::move(q));
        } else {
          stack.back().span.end = q.span.end;
          stack.back().children.push_back(std::move(q));
        }
      }
      if (stack.empty()) {
        TopLevelForm stray;
        stray.span = tok.span;
        stray.complete = false;
        stray.stray_close = true;
        stray.tree.kind = Node::Kind::Atom;
        stray.tree.span = tok.span;
        stray.tree.atom_class = TokenClass::RParen;
        stray.tree.text = tok.lexeme;
        stray.text = tok.lexeme;
        forms.push_back(std::move(stray));
        continue;
      }
      Node list = std::move(stack.back());
      stack.pop_back();
      list.closed = true;
      list.span.end = tok.span.end;
      deliver(std::move(list));
    } else if (is_quote_punctuation(tok)) {
      Node q;
      q.kind = Node::Kind::Quoted;
      q.span = tok.span;
      q.text = tok.lexeme;
      q.closed = false;
      stack.push_back(std::move(q));
    } else {
      Node atom;
      atom.kind = Node::Kind::Atom;
      atom.span = tok.span;
      atom.atom_class = tok.cls;
      atom.text = tok.lexeme;
      deliver(std::move(atom));
    }
  }

  // Unwind whatever is still open into one incomplete trailing form.
  while (!stack.empty()) {
    Node node = std::move(stack.back());
    stack.pop_back();
    node.closed = false;
    if (stack.empty()) {
      finish_form(std::move(node));
    } else {
      stack.back().span.end = node.span.end;
      stack.back().children.push_back(std::move(node));
      stack.back().closed = false;
    }
  }
  return forms;
}

inline std::vector<TopLevelForm> parse_source(std::string_view source,
                                              const BuiltinTable& table = BuiltinTable::standard()) {
  auto tokens = tokenize(source, table);
  return parse_top_level(tokens, source, table);
}

/// Index of the form whose span contains `offset`.
inline std::optional<std::size_t> form_at(std::span<const TopLevelForm> forms, std::size_t offset) {
  auto it = std::upper_bound(forms.begin(), forms.end(), offset,
                             [](std::size_t off, const TopLevelForm& f) { return off < f.span.start; });
  if (it == forms.begin()) return std::nullopt;
  --it;
  if (it->span.contains(offset)) return static_cast<std::size_t>(it - forms.begin());
  return std::nullopt;
}

}  // namespace proofpad
