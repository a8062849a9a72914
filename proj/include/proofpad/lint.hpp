#pragma once

#include <algorithm>
#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "proofpad/sexp.hpp"

namespace proofpad {

enum class Severity { Error, Warning };

inline std::string_view to_string(Severity s) { return s == Severity::Error ? "error" : "warning"; }

/// Diagnostic codes. Stable identifiers, listed in docs/lint-codes.md.
namespace lint_code {
inline constexpr std::string_view kArityMismatch = "arity-mismatch";
inline constexpr std::string_view kUndefinedFunction = "undefined-function";
inline constexpr std::string_view kUndefinedVariable = "undefined-variable";
inline constexpr std::string_view kForwardReference = "forward-reference";
inline constexpr std::string_view kMalformedMacro = "malformed-macro";
inline constexpr std::string_view kRedefinition = "redefinition";
inline constexpr std::string_view kIllegalCall = "illegal-call";
inline constexpr std::string_view kUnbalancedParens = "unbalanced-parens";
inline constexpr std::string_view kStrayCloseParen = "stray-close-paren";
inline constexpr std::string_view kInvalidToken = "invalid-token";
inline constexpr std::string_view kDanglingQuote = "dangling-quote";

inline constexpr std::string_view kAll[] = {
    kArityMismatch,     kUndefinedFunction, kUndefinedVariable, kForwardReference,
    kMalformedMacro,    kRedefinition,      kIllegalCall,       kUnbalancedParens,
    kStrayCloseParen,   kInvalidToken,      kDanglingQuote};
}  // namespace lint_code

struct Diagnostic {
  Span span;
  Severity severity = Severity::Error;
  std::string code;
  std::string message;

  friend bool operator==(const Diagnostic&, const Diagnostic&) = default;
};

namespace detail {

class Linter {
 public:
  Linter(std::span<const TopLevelForm> forms, const BuiltinTable& table) : forms_(forms), table_(table) {}

  std::vector<Diagnostic> run() {
    collect_definitions();
    for (std::size_t i = 0; i < forms_.size(); ++i) {
      current_form_ = i;
      const TopLevelForm& f = forms_[i];
      if (f.stray_close) {
        report(f.span, Severity::Error, lint_code::kStrayCloseParen, "unmatched close parenthesis");
        continue;
      }
      if (!f.complete) {
        report(f.span, Severity::Error, lint_code::kUnbalancedParens,
               "form is missing a close parenthesis");
        scan_tokens(f.tree);
        continue;
      }
      top_level(f.tree);
    }
    std::stable_sort(out_.begin(), out_.end(),
                     [](const Diagnostic& a, const Diagnostic& b) { return a.span.start < b.span.start; });
    return std::move(out_);
  }

 private:
  using Scope = std::set<std::string>;

  struct UserFn {
    Arity arity;
    bool macro = false;
  };

  std::span<const TopLevelForm> forms_;
  const BuiltinTable& table_;
  std::vector<Diagnostic> out_;
  std::map<std::string, UserFn> defined_;              // defined so far
  std::map<std::string, std::size_t> defined_anywhere_;  // name -> first defining form
  std::set<std::string> constants_;
  std::size_t current_form_ = 0;

  void report(Span span, Severity sev, std::string_view code, std::string message) {
    out_.push_back(Diagnostic{span, sev, std::string(code), std::move(message)});
  }

  static bool is_constant_name(std::string_view s) {
    return s.size() >= 3 && s.front() == '*' && s.back() == '*';
  }

  // Pre-pass: every name a definition form introduces, for forward references.
  void collect_definitions() {
    for (std::size_t i = 0; i < forms_.size(); ++i) collect_from(forms_[i].tree, i);
  }

  void collect_from(const Node& n, std::size_t index) {
    std::string head = n.head();
    if (head == "defun" || head == "defund" || head == "defmacro" || head == "defstub") {
      if (n.children.size() > 1 && n.children[1].is_symbol()) {
        defined_anywhere_.emplace(n.children[1].symbol(), index);
      }
    } else if (head == "progn" || head == "mutual-recursion" || head == "encapsulate") {
      for (std::size_t k = 1; k < n.children.size(); ++k) collect_from(n.children[k], index);
    }
  }

  // Reports Error tokens and childless quotes anywhere below `n`.
  void scan_tokens(const Node& n) {
    if (n.is_atom() && n.atom_class == TokenClass::Error) {
      report(n.span, Severity::Error, lint_code::kInvalidToken, "cannot read '" + n.text + "'");
    }
    if (n.kind == Node::Kind::Quoted && n.children.empty()) {
      report(n.span, Severity::Error, lint_code::kDanglingQuote, "'" + n.text + "' is not followed by a datum");
    }
    for (const Node& c : n.children) scan_tokens(c);
  }

  void malformed(const Node& n, const std::string& what) {
    report(n.span, Severity::Error, lint_code::kMalformedMacro, what);
  }

  static bool is_symbol_list(const Node& n) {
    return n.is_list() && std::all_of(n.children.begin(), n.children.end(),
                                      [](const Node& c) { return c.is_symbol(); });
  }

  // -- top-level events -----------------------------------------------------

  void top_level(const Node& n) {
    if (!n.is_list()) {
      expression(n, Scope{}, false);
      return;
    }
    std::string head = n.head();
    if (head == "defun" || head == "defund") return defun(n);
    if (head == "defthm" || head == "defthmd" || head == "defaxiom") return defthm(n);
    if (head == "defconst") return defconst(n);
    if (head == "defmacro") return defmacro(n);
    if (head == "defstub") return defstub(n);
    if (head == "defproperty") return defproperty(n);
    if (head == "progn") {
      for (std::size_t k = 1; k < n.children.size(); ++k) top_level(n.children[k]);
      return;
    }
    if (head == "mutual-recursion") {
      for (std::size_t k = 1; k < n.children.size(); ++k) register_defun_name(n.children[k]);
      for (std::size_t k = 1; k < n.children.size(); ++k) {
        if (n.children[k].head() != "defun" && n.children[k].head() != "defund") {
          malformed(n.children[k], "mutual-recursion expects only defun forms");
        } else {
          defun(n.children[k], /*already_registered=*/true);
        }
      }
      return;
    }
    if (head == "encapsulate") {
      for (std::size_t k = 2; k < n.children.size(); ++k) top_level(n.children[k]);
      return;
    }
    if (const BuiltinEntry* e = table_.find(head); e && e->kind == BuiltinKind::Event) {
      check_arity(n, head, e->arity, false);
      scan_tokens(n);
      return;
    }
    expression(n, Scope{}, false);
  }

  void register_defun_name(const Node& n) {
    if (n.children.size() > 2 && n.children[1].is_symbol() && is_symbol_list(n.children[2])) {
      defined_[n.children[1].symbol()] =
          UserFn{Arity{static_cast<int>(n.children[2].children.size()),
                       static_cast<int>(n.children[2].children.size())},
                 false};
    }
  }

  bool check_definable(const Node& name_node) {
    std::string name = name_node.symbol();
    if (table_.find(name) || defined_.count(name)) {
      report(name_node.span, Severity::Error, lint_code::kRedefinition,
             "the name " + name_node.text + " is already in use");
      return false;
    }
    return true;
  }

  void defun(const Node& n, bool already_registered = false) {
    // (defun name (formals) [doc-string | (declare ...)]* body)
    if (n.children.size() < 4) return malformed(n, n.children.front().text + " needs a name, formals and a body");
    const Node& name = n.children[1];
    const Node& formals = n.children[2];
    if (!name.is_symbol()) return malformed(name, "function name must be a symbol");
    if (!(formals.is_list() && is_symbol_list(formals))) {
      return malformed(formals, "formals must be a list of symbols");
    }
    Scope scope;
    for (const Node& f : formals.children) {
      if (!scope.insert(f.symbol()).second) return malformed(f, "duplicate formal " + f.text);
    }
    for (std::size_t k = 3; k + 1 < n.children.size(); ++k) {
      const Node& c = n.children[k];
      bool ok = (c.is_atom() && c.atom_class == TokenClass::String) || c.head() == "declare";
      if (!ok) return malformed(c, "expected a documentation string or declare form before the body");
    }
    if (!already_registered) {
      if (!check_definable(name)) return;
      register_defun_name(n);
    }
    expression(n.children.back(), scope, false);
  }

  void defthm(const Node& n) {
    // (defthm name term [:keyword value]*)
    if (n.children.size() < 3) return malformed(n, n.children.front().text + " needs a name and a term");
    if (!n.children[1].is_symbol()) return malformed(n.children[1], "theorem name must be a symbol");
    std::size_t rest = n.children.size() - 3;
    if (rest % 2 != 0) return malformed(n, "options after the theorem term must be keyword/value pairs");
    for (std::size_t k = 3; k < n.children.size(); k += 2) {
      if (!n.children[k].is_keyword()) return malformed(n.children[k], "expected a keyword option");
    }
    expression(n.children[2], Scope{}, true);
  }

  void defconst(const Node& n) {
    if (n.children.size() < 3 || n.children.size() > 4) return malformed(n, "defconst takes a name, a term and an optional doc string");
    const Node& name = n.children[1];
    if (!name.is_symbol() || !is_constant_name(name.symbol())) {
      return malformed(name, "constant names must be written *like-this*");
    }
    expression(n.children[2], Scope{}, false);
    constants_.insert(name.symbol());
  }

  static std::optional<Arity> lambda_list_arity(const Node& list) {
    if (!is_symbol_list(list)) return std::nullopt;
    Arity a;
    bool optional = false;
    for (const Node& c : list.children) {
      std::string s = c.symbol();
      if (s == "&rest" || s == "&body" || s == "&key") {
        a.max = std::nullopt;
        return a;
      }
      if (s == "&optional") {
        optional = true;
        a.max = a.min;
        continue;
      }
      if (s == "&whole" || s == "&environment") continue;
      if (optional) *a.max += 1;
      else a.min += 1;
    }
    if (!optional) a.max = a.min;
    return a;
  }

  void defmacro(const Node& n) {
    if (n.children.size() < 4) return malformed(n, "defmacro needs a name, a lambda list and a body");
    const Node& name = n.children[1];
    if (!name.is_symbol()) return malformed(name, "macro name must be a symbol");
    auto arity = n.children[2].is_list() ? lambda_list_arity(n.children[2]) : std::nullopt;
    if (!arity) return malformed(n.children[2], "macro lambda list must be a list of symbols");
    if (!check_definable(name)) return;
    defined_[name.symbol()] = UserFn{*arity, true};
  }

  void defstub(const Node& n) {
    if (n.children.size() != 5 || !n.children[1].is_symbol() || !is_symbol_list(n.children[2]) ||
        n.children[3].symbol() != "=>") {
      return malformed(n, "defstub expects (defstub name (formals) => result)");
    }
    if (!check_definable(n.children[1])) return;
    int k = static_cast<int>(n.children[2].children.size());
    defined_[n.children[1].symbol()] = UserFn{Arity{k, k}, false};
  }

  void defproperty(const Node& n) {
    // (defproperty name (var :value gen var :value gen ...) body)
    if (n.children.size() != 4) return malformed(n, "defproperty takes a name, a binding list and a body");
    if (!n.children[1].is_symbol()) return malformed(n.children[1], "property name must be a symbol");
    const Node& bindings = n.children[2];
    if (!bindings.is_list()) return malformed(bindings, "property bindings must be a list");
    Scope scope;
    const auto& b = bindings.children;
    for (std::size_t k = 0; k < b.size();) {
      if (!b[k].is_symbol()) return malformed(b[k], "expected a bound variable name");
      if (k + 2 >= b.size()) return malformed(b[k], "binding needs :value and a generator");
      if (!(b[k + 1].is_keyword() && symbol_key(b[k + 1].text) == ":value")) {
        return malformed(b[k + 1], "expected :value after the variable");
      }
      scope.insert(b[k].symbol());
      k += 3;
    }
    expression(n.children[3], scope, false);
  }

  // -- expressions ----------------------------------------------------------

  void check_arity(const Node& call, const std::string& name, const Arity& arity, bool macro) {
    int argc = static_cast<int>(call.children.size()) - 1;
    if (macro) {
      // Keyword arguments to builtin macros (member x l :test 'eq) are not positional.
      for (int k = 1; k <= argc; ++k) {
        if (call.children[k].is_keyword() && k - 1 >= arity.min) {
          argc = k - 1;
          break;
        }
      }
    }
    if (arity.accepts(argc)) return;
    std::string expected = std::to_string(arity.min);
    if (!arity.max) expected = "at least " + expected;
    else if (*arity.max != arity.min) expected += " to " + std::to_string(*arity.max);
    report(call.span, Severity::Error, lint_code::kArityMismatch,
           name + " expects " + expected + " argument" + (expected == "1" ? "" : "s") + ", got " +
               std::to_string(argc));
  }

  void expressions_from(const Node& n, std::size_t first, const Scope& scope, bool free_ok) {
    for (std::size_t k = first; k < n.children.size(); ++k) expression(n.children[k], scope, free_ok);
  }

  void expression(const Node& n, const Scope& scope, bool free_ok) {
    switch (n.kind) {
      case Node::Kind::Quoted:
        if (n.children.empty()) scan_tokens(n);
        return;
      case Node::Kind::Atom:
        return atom(n, scope, free_ok);
      case Node::Kind::List:
        break;
    }
    if (n.children.empty()) return;  // () is nil
    const Node& head_node = n.children.front();
    if (head_node.is_list()) {
      if (head_node.head() == "lambda") {
        lambda(head_node, scope, free_ok);
        expressions_from(n, 1, scope, free_ok);
      } else {
        report(head_node.span, Severity::Error, lint_code::kIllegalCall,
               "a function call needs a symbol in head position");
        expressions_from(n, 1, scope, free_ok);
      }
      return;
    }
    if (!head_node.is_symbol()) {
      if (head_node.kind == Node::Kind::Atom && head_node.atom_class == TokenClass::Error) return scan_tokens(n);
      report(head_node.span, Severity::Error, lint_code::kIllegalCall,
             "'" + head_node.text + "' cannot be called as a function");
      return;
    }

    const std::string head = head_node.symbol();
    if (head == "quote") {
      if (n.children.size() != 2) check_arity(n, head, Arity{1, 1}, false);
      return;
    }
    if (head == "declare") return;
    if (head == "let" || head == "let*") return let(n, scope, free_ok, head == "let*");
    if (head == "mv-let") return mv_let(n, scope, free_ok);
    if (head == "b*") return scan_tokens(n);
    if (head == "lambda") return lambda(n, scope, free_ok);
    if (head == "cond") return cond(n, scope, free_ok);
    if (head == "case") return case_(n, scope, free_ok);
    if (head == "the") {
      check_arity(n, head, Arity{2, 2}, true);
      if (n.children.size() == 3) expression(n.children[2], scope, free_ok);
      return;
    }
    if (head == "mbe") {
      for (std::size_t k = 1; k + 1 < n.children.size(); k += 2) expression(n.children[k + 1], scope, free_ok);
      return;
    }

    if (auto it = defined_.find(head); it != defined_.end()) {
      check_arity(n, head_node.text, it->second.arity, it->second.macro);
      if (!it->second.macro) expressions_from(n, 1, scope, free_ok);
      else scan_tokens(n);
      return;
    }
    if (const BuiltinEntry* e = table_.find(head)) {
      check_arity(n, head_node.text, e->arity, e->kind == BuiltinKind::Macro);
      if (e->kind == BuiltinKind::Event) return scan_tokens(n);
      if (head == "cw" || head == "er" || head == "hard-error" || head == "illegal") {
        // Format strings and contexts are data.
        std::size_t skip = head == "cw" ? 2 : 3;
        expressions_from(n, skip, scope, free_ok);
        return;
      }
      expressions_from(n, 1, scope, free_ok);
      return;
    }
    if (auto later = defined_anywhere_.find(head); later != defined_anywhere_.end() && later->second >= current_form_) {
      report(head_node.span, Severity::Warning, lint_code::kForwardReference,
             head_node.text + " is defined later in the file");
    } else {
      report(head_node.span, Severity::Error, lint_code::kUndefinedFunction,
             "the function " + head_node.text + " is not defined");
    }
    expressions_from(n, 1, scope, free_ok);
  }

  void atom(const Node& n, const Scope& scope, bool free_ok) {
    if (n.atom_class == TokenClass::Error) return scan_tokens(n);
    if (!n.is_symbol()) return;  // numbers, strings, characters, keywords
    std::string s = n.symbol();
    if (s == "t" || s == "nil" || scope.count(s)) return;
    if (is_constant_name(s)) {
      if (constants_.count(s) || s == "*standard-co*" || s == "*standard-oi*") return;
      report(n.span, Severity::Error, lint_code::kUndefinedVariable, "the constant " + n.text + " is not defined");
      return;
    }
    if (free_ok) return;
    report(n.span, Severity::Error, lint_code::kUndefinedVariable, "the variable " + n.text + " is not bound");
  }

  bool binding_list(const Node& bindings, Scope& inner, const Scope& outer, bool free_ok, bool sequential) {
    if (!bindings.is_list()) {
      malformed(bindings, "expected a list of (variable term) bindings");
      return false;
    }
    for (const Node& b : bindings.children) {
      if (!(b.is_list() && b.children.size() == 2 && b.children[0].is_symbol())) {
        malformed(b, "each binding must have the form (variable term)");
        return false;
      }
    }
    for (const Node& b : bindings.children) {
      expression(b.children[1], sequential ? inner : outer, free_ok);
      inner.insert(b.children[0].symbol());
    }
    return true;
  }

  // Body forms of let/mv-let/lambda: any declares, then exactly one term.
  void single_body(const Node& n, std::size_t first, const Scope& scope, bool free_ok) {
    if (first >= n.children.size()) return malformed(n, n.children.front().text + " is missing its body");
    for (std::size_t k = first; k + 1 < n.children.size(); ++k) {
      if (n.children[k].head() != "declare") return malformed(n.children[k], "only declare forms may precede the body");
    }
    expression(n.children.back(), scope, free_ok);
  }

  void let(const Node& n, const Scope& scope, bool free_ok, bool sequential) {
    if (n.children.size() < 3) {
      if (n.children.size() == 2 && !n.children[1].is_list()) {
        return malformed(n, n.children.front().text + " requires a binding list");
      }
      return malformed(n, n.children.front().text + " needs bindings and a body");
    }
    Scope inner = scope;
    if (!binding_list(n.children[1], inner, scope, free_ok, sequential)) return;
    single_body(n, 2, inner, free_ok);
  }

  void mv_let(const Node& n, const Scope& scope, bool free_ok) {
    if (n.children.size() < 4 || !is_symbol_list(n.children[1])) {
      return malformed(n, "mv-let expects (mv-let (vars) term body)");
    }
    expression(n.children[2], scope, free_ok);
    Scope inner = scope;
    for (const Node& v : n.children[1].children) inner.insert(v.symbol());
    single_body(n, 3, inner, free_ok);
  }

  void lambda(const Node& n, const Scope& scope, bool free_ok) {
    if (n.children.size() < 3 || !is_symbol_list(n.children[1])) {
      return malformed(n, "lambda expects (lambda (vars) body)");
    }
    Scope inner;  // ACL2 lambdas are closed
    for (const Node& v : n.children[1].children) inner.insert(v.symbol());
    (void)scope;
    single_body(n, 2, inner, free_ok);
  }

  void cond(const Node& n, const Scope& scope, bool free_ok) {
    for (std::size_t k = 1; k < n.children.size(); ++k) {
      const Node& clause = n.children[k];
      if (!clause.is_list() || clause.children.empty()) return malformed(clause, "each cond clause must be a non-empty list");
    }
    for (std::size_t k = 1; k < n.children.size(); ++k) expressions_from(n.children[k], 0, scope, free_ok);
  }

  void case_(const Node& n, const Scope& scope, bool free_ok) {
    if (n.children.size() < 2) return malformed(n, "case needs a key form");
    for (std::size_t k = 2; k < n.children.size(); ++k) {
      const Node& clause = n.children[k];
      if (!clause.is_list() || clause.children.size() < 2) return malformed(clause, "each case clause must be (keys value)");
    }
    expression(n.children[1], scope, free_ok);
    for (std::size_t k = 2; k < n.children.size(); ++k) expressions_from(n.children[k], 1, scope, free_ok);
  }
};

}  // namespace detail

/// Static checks over parsed forms. Diagnostics come back ordered by span
/// start; definitions earlier in the file are visible to later forms.
inline std::vector<Diagnostic> lint(std::span<const TopLevelForm> forms,
                                    const BuiltinTable& table = BuiltinTable::standard()) {
  return detail::Linter(forms, table).run();
}

inline std::vector<Diagnostic> lint_source(std::string_view source,
                                           const BuiltinTable& table = BuiltinTable::standard()) {
  auto forms = parse_source(source, table);
  return lint(forms, table);
}

inline bool has_errors(std::span<const Diagnostic> diags) {
  return std::any_of(diags.begin(), diags.end(), [](const Diagnostic& d) { return d.severity == Severity::Error; });
}

}  // namespace proofpad
