#pragma once

#include <functional>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "proofpad/sexp.hpp"
#include "proofpad/value.hpp"

namespace proofpad {

/// A small in-process stand-in for an ACL2 read-eval-print loop. It consumes
/// raw input bytes and produces ACL2-shaped output, including the prompt,
/// Summary blocks and the FAILED banner. Semantics are deliberately narrow:
///   - defun/defund: admitted unless the name is already in use
///   - defthm: admitted iff the body is not the literal nil
///   - progn: admits its inner events together, counting each
///   - include-book: always fails with ACL2's missing-file error
///   - (ubt! :x-K): undoes the last K+1 commands
///   - other def* events: admitted
///   - expressions: evaluated with ACL2 logic semantics over a builtin subset
/// Two hooks exist for tests: (proofpad-fake-hang) stops all output and
/// (proofpad-fake-crash) ends the stream.
class FakeAcl2 {
 public:
  static constexpr std::string_view kPrompt = "ACL2 !>";

  FakeAcl2() { install_primitives(); }

  std::string banner() const {
    return "Proof Pad fake ACL2 backend (in-process test double).\n"
           "Type (good-bye) to quit.\n\n" +
           std::string(kPrompt);
  }

  /// Feeds raw input; returns whatever output it produces. Incomplete trailing
  /// input is buffered until more arrives.
  std::string feed(std::string_view bytes) {
    if (hung_ || crashed_) return {};
    pending_ += bytes;
    std::string out;
    auto forms = parse_source(pending_);
    std::size_t consumed = 0;
    for (const auto& f : forms) {
      // A form is complete only once a delimiter follows it.
      if (f.span.end >= pending_.size()) break;
      if (f.stray_close) {
        consumed = f.span.end;
        continue;
      }
      if (!f.complete) break;
      consumed = f.span.end;
      out += process(f);
      if (hung_ || crashed_) break;
      out += kPrompt;
    }
    pending_.erase(0, consumed);
    return out;
  }

  bool hung() const noexcept { return hung_; }
  bool crashed() const noexcept { return crashed_; }

  /// Number of events in the current world.
  std::size_t world_counter() const {
    std::size_t n = 0;
    for (const auto& c : commands_) n += c.events;
    return n;
  }

  std::size_t command_count() const noexcept { return commands_.size(); }

  /// Every top-level form received, except protocol commands (sentinel prints
  /// and ubt!).
  const std::vector<std::string>& submission_log() const noexcept { return log_; }
  const std::vector<std::string>& undo_log() const noexcept { return undo_log_; }

 private:
  struct UserFunction {
    std::vector<std::string> formals;
    ValuePtr body;
  };

  struct World {
    std::map<std::string, UserFunction> functions;
    std::map<std::string, ValuePtr> constants;
    std::map<std::string, std::string> names;  // name -> kind ("function", "theorem", ...)
  };

  struct Command {
    World before;
    std::size_t events;
    std::string label;
  };

  struct EvalError {
    std::string message;
  };

  struct EventError {
    std::string message;
  };

  struct Primitive {
    int min;
    int max;  // -1 for unbounded
    std::function<ValuePtr(const std::vector<ValuePtr>&)> fn;
  };

  std::string pending_;
  World world_;
  std::vector<Command> commands_;
  std::vector<std::string> log_;
  std::vector<std::string> undo_log_;
  std::unordered_map<std::string, Primitive> primitives_;
  bool hung_ = false;
  bool crashed_ = false;
  std::size_t steps_ = 0;

  static constexpr std::size_t kStepLimit = 20'000'000;
  static constexpr std::size_t kDepthLimit = 20'000;
  static constexpr std::string_view kTime = "Time:  0.00 seconds (prove: 0.00, print: 0.00, other: 0.00)\n";

  // ---- top level ----

  std::string process(const TopLevelForm& f) {
    ValuePtr form = value::from_node(f.tree);
    std::string head = form->is_cons() && form->car->is_symbol() ? form->car->text : std::string();

    if (head == "CW" && f.text.find("PROOFPAD-SENTINEL-") != std::string::npos) return evaluate_top(form);
    if (head == "UBT!") {
      undo_log_.push_back(f.text);
      return undo(form);
    }
    log_.push_back(f.text);
    if (head == "PROOFPAD-FAKE-HANG") {
      hung_ = true;
      return {};
    }
    if (head == "PROOFPAD-FAKE-CRASH") {
      crashed_ = true;
      return {};
    }
    if (is_event_head(head)) return admit_command(form);
    return evaluate_top(form);
  }

  static bool is_event_head(const std::string& head) {
    if (head.empty()) return false;
    if (const BuiltinEntry* e = BuiltinTable::standard().find(head)) return e->kind == BuiltinKind::Event;
    return head.starts_with("DEF");
  }

  static std::string form_label(const ValuePtr& form) {
    auto items = value::elements(form);
    std::string label = "( " + items.front()->text;
    if (items.size() > 1) label += " " + value::print(items[1]);
    return label + " ...)";
  }

  static std::string summary(const std::string& label, std::string_view extra = {}) {
    return "Summary\nForm:  " + label + "\nRules: NIL\n" + std::string(kTime) + std::string(extra);
  }

  static std::string failure(const std::string& label, const std::string& message) {
    return "\n\nACL2 Error in " + label + ":  " + message + "\n\n" + summary(label) + "\nACL2 Error in " + label +
           ":  See :DOC failure.\n\n******** FAILED ********\n";
  }

  std::string evaluate_top(const ValuePtr& form) {
    steps_ = 0;
    std::string printed;
    try {
      ValuePtr v = eval(form, {}, 0, &printed);
      return printed + value::print(v) + "\n";
    } catch (const EvalError& e) {
      return printed + "\n\nACL2 Error [Translate] in TOP-LEVEL:  " + e.message + "\n\n";
    }
  }

  std::string admit_command(const ValuePtr& form) {
    World before = world_;
    std::string out;
    try {
      std::size_t events = admit_event(form, out);
      commands_.push_back(Command{std::move(before), events, value::print(form)});
      return out;
    } catch (const EventError& e) {
      world_ = std::move(before);
      return out + e.message;
    }
  }

  /// Admits one event into world_, appending its output. Returns the number
  /// of events added; throws EventError carrying the full failure output.
  std::size_t admit_event(const ValuePtr& form, std::string& out) {
    auto items = value::elements(form);
    const std::string head = items.front()->text;
    const std::string label = form_label(form);
    auto name_of = [&]() -> std::string {
      if (items.size() < 2 || !items[1]->is_symbol()) {
        throw EventError{failure(label, "The form " + value::print(form) + " is not well-formed.")};
      }
      return items[1]->text;
    };
    auto claim = [&](const std::string& name, const std::string& kind) {
      if (world_.names.contains(name) || primitives_.contains(name) || is_special(name)) {
        std::string existing = world_.names.contains(name) ? world_.names[name] : "function";
        throw EventError{failure(label, "The name " + name + " is in use as a " + existing + ".  See :DOC name.")};
      }
      world_.names[name] = kind;
    };

    if (head == "PROGN") {
      std::size_t events = 0;
      for (std::size_t i = 1; i < items.size(); ++i) {
        const ValuePtr& inner = items[i];
        std::string inner_head = inner->is_cons() && inner->car->is_symbol() ? inner->car->text : "";
        if (!is_event_head(inner_head)) {
          throw EventError{failure(label, "PROGN may only contain events, but " + value::print(inner) + " is not one.")};
        }
        events += admit_event(inner, out);
      }
      out += "\n :PROGN\n";
      return events;
    }
    if (head == "INCLUDE-BOOK") {
      std::string book = items.size() > 1 ? (items[1]->kind == Value::Kind::String ? items[1]->text : value::print(items[1])) : "";
      std::string path = "/proofpad-fake/" + book + ".lisp";
      throw EventError{"ACL2 Error in " + label + ":  There is no file named\n\"" + path +
                       "\" that can be opened for input.\n\n" + summary(label) + "\nACL2 Error in " + label +
                       ":  See :DOC failure.\n\n******** FAILED ********\n"};
    }
    if (head == "DEFUN" || head == "DEFUND") {
      std::string name = name_of();
      if (items.size() < 4 || !(items[2]->is_cons() || items[2]->is_nil())) {
        throw EventError{failure(label, "The form " + value::print(form) + " is not well-formed.")};
      }
      claim(name, "function");
      UserFunction fn;
      for (const auto& f : value::elements(items[2])) fn.formals.push_back(f->text);
      fn.body = items.back();
      bool recursive = mentions(fn.body, name);
      world_.functions[name] = fn;
      out += "\n";
      if (recursive) {
        out += "For the admission of " + name +
               " we will use the relation O< (which is known to be well-founded on the domain recognized by "
               "O-P) and the measure (ACL2-COUNT " +
               (fn.formals.empty() ? std::string("NIL") : fn.formals.front()) + ").\n\n";
      } else {
        out += "Since " + name + " is non-recursive, its admission is trivial.\n\n";
      }
      out += summary(label, " " + name + "\n");
      return 1;
    }
    if (head == "MUTUAL-RECURSION") {
      for (std::size_t i = 1; i < items.size(); ++i) {
        auto inner = value::elements(items[i]);
        if (inner.size() < 4 || !inner[1]->is_symbol()) {
          throw EventError{failure(label, "The form " + value::print(items[i]) + " is not a DEFUN.")};
        }
        claim(inner[1]->text, "function");
        UserFunction fn;
        for (const auto& f : value::elements(inner[2])) fn.formals.push_back(f->text);
        fn.body = inner.back();
        world_.functions[inner[1]->text] = fn;
      }
      out += "\n" + summary(label, " T\n");
      return 1;
    }
    if (head == "DEFTHM" || head == "DEFTHMD") {
      std::string name = name_of();
      if (items.size() < 3) throw EventError{failure(label, "The form " + value::print(form) + " is not well-formed.")};
      claim(name, "theorem");
      if (items[2]->is_nil()) {
        throw EventError{"\nThis simplifies to\n\nNIL\n\n" + summary(label, "Prover steps counted:  1\n") +
                         "\n---\nThe key checkpoint goal, below, may help you to debug this failure.\n\n"
                         "*** Key checkpoint at the top level: ***\n\nGoal\nNIL\n\n"
                         "ACL2 Error in " + label + ":  See :DOC failure.\n\n******** FAILED ********\n"};
      }
      out += "\nQ.E.D.\n\n" + summary(label, "Prover steps counted:  1\n " + name + "\n");
      return 1;
    }
    if (head == "DEFCONST") {
      std::string name = name_of();
      if (items.size() < 3) throw EventError{failure(label, "The form " + value::print(form) + " is not well-formed.")};
      ValuePtr v;
      steps_ = 0;
      try {
        v = eval(items[2], {}, 0, nullptr);
      } catch (const EvalError& e) {
        throw EventError{failure(label, e.message)};
      }
      claim(name, "constant");
      world_.constants[name] = v;
      out += "\n" + summary(label, " " + name + "\n");
      return 1;
    }
    // Any other event: record its name when it has one.
    std::string name = items.size() > 1 && items[1]->is_symbol() ? items[1]->text : head;
    if (items.size() > 1 && items[1]->is_symbol() && head != "IN-THEORY" && head != "ENCAPSULATE") {
      claim(name, "name introduced by " + head);
    }
    out += "\n" + summary(label, " " + name + "\n");
    return 1;
  }

  std::string undo(const ValuePtr& form) {
    auto items = value::elements(form);
    std::size_t count = 0;
    if (items.size() == 2 && items[1]->is_symbol()) {
      const std::string& d = items[1]->text;
      if (d == ":X") {
        count = 1;
      } else if (d.starts_with(":X-") && d.size() > 3 &&
                 d.find_first_not_of("0123456789", 3) == std::string::npos) {
        count = std::stoul(d.substr(3)) + 1;
      }
    }
    if (count == 0 || count > commands_.size()) {
      return "\n\nACL2 Error in :UBT!:  The object " + (items.size() > 1 ? value::print(items[1]) : "NIL") +
             " is not a legal command descriptor.  See :DOC command-descriptor.\n\n";
    }
    World restored = commands_[commands_.size() - count].before;
    commands_.resize(commands_.size() - count);
    world_ = std::move(restored);
    std::string current = commands_.empty() ? "(EXIT-BOOT-STRAP-MODE)" : commands_.back().label;
    if (current.size() > 60) current = current.substr(0, 57) + "...";
    return "          " + std::to_string(commands_.size()) + ":x" + current + "\n";
  }

  static bool mentions(const ValuePtr& v, const std::string& name) {
    if (v->is_symbol()) return v->text == name;
    if (!v->is_cons()) return false;
    return mentions(v->car, name) || mentions(v->cdr, name);
  }

  // ---- evaluation ----

  using Env = std::vector<std::pair<std::string, ValuePtr>>;

  static bool is_special(const std::string& name) {
    static const std::set<std::string> specials = {"QUOTE", "IF",   "COND",   "AND", "OR",     "LET", "LET*",
                                                   "CW",    "CASE", "IMPLIES", "LIST", "LIST*", "THE", "MBE"};
    return specials.contains(name);
  }

  static Rational num(const ValuePtr& v) { return v->is_number() ? v->number : Rational(0); }

  static Integer floor_of(const Rational& q) {
    Integer n = boost::multiprecision::numerator(q);
    Integer d = boost::multiprecision::denominator(q);
    Integer r = n / d;
    if (n % d != 0 && n < 0) r -= 1;
    return r;
  }

  static Integer truncate_of(const Rational& q) {
    return Integer(boost::multiprecision::numerator(q) / boost::multiprecision::denominator(q));
  }

  ValuePtr lookup(const std::string& name, const Env& env) const {
    for (auto it = env.rbegin(); it != env.rend(); ++it) {
      if (it->first == name) return it->second;
    }
    if (name == "T" || name == "NIL" || name.starts_with(":")) return value::symbol(name);
    if (auto c = world_.constants.find(name); c != world_.constants.end()) return c->second;
    if (name.starts_with("*") && name.ends_with("*") && name.size() > 2) {
      throw EvalError{"The symbol " + name + " (in package \"ACL2\") has no constant definition."};
    }
    throw EvalError{"Global variables, such as " + name + ", are not allowed.  See :DOC ASSIGN and :DOC @."};
  }

  static std::string arguments(std::size_t n) { return std::to_string(n) + (n == 1 ? " argument" : " arguments"); }

  ValuePtr eval(const ValuePtr& x, const Env& env, std::size_t depth, std::string* printed) {
    if (++steps_ > kStepLimit) throw EvalError{"Evaluation exceeded the fake backend's step limit."};
    if (depth > kDepthLimit) throw EvalError{"Evaluation exceeded the fake backend's stack depth limit."};
    if (x->is_symbol()) return lookup(x->text, env);
    if (!x->is_cons()) return x;

    auto items = value::elements(x);
    if (!items.front()->is_symbol()) {
      throw EvalError{"Function applications in ACL2 must begin with a symbol or LAMBDA expression.  " +
                      value::print(x) + " is not of this form."};
    }
    const std::string& head = items.front()->text;
    const std::size_t argc = items.size() - 1;
    auto ev = [&](const ValuePtr& e) { return eval(e, env, depth + 1, printed); };
    auto need = [&](std::size_t lo, std::size_t hi) {
      if (argc < lo || argc > hi) {
        throw EvalError{head + " takes " + arguments(lo) + " but in the call " + value::print(x) + " it is given " +
                        arguments(argc) + "."};
      }
    };

    if (head == "QUOTE") {
      need(1, 1);
      return items[1];
    }
    if (head == "IF") {
      need(3, 3);
      return !ev(items[1])->is_nil() ? ev(items[2]) : ev(items[3]);
    }
    if (head == "AND") {
      ValuePtr v = value::t();
      for (std::size_t i = 1; i < items.size(); ++i) {
        v = ev(items[i]);
        if (v->is_nil()) return v;
      }
      return v;
    }
    if (head == "OR") {
      for (std::size_t i = 1; i < items.size(); ++i) {
        ValuePtr v = ev(items[i]);
        if (!v->is_nil()) return v;
      }
      return value::nil();
    }
    if (head == "IMPLIES") {
      need(2, 2);
      return value::boolean(ev(items[1])->is_nil() || !ev(items[2])->is_nil());
    }
    if (head == "COND") {
      for (std::size_t i = 1; i < items.size(); ++i) {
        auto clause = value::elements(items[i]);
        if (clause.empty()) throw EvalError{"Each clause of COND must be a non-empty list."};
        ValuePtr test = ev(clause[0]);
        if (!test->is_nil()) return clause.size() > 1 ? ev(clause.back()) : test;
      }
      return value::nil();
    }
    if (head == "CASE") {
      if (argc < 1) need(1, 1);
      ValuePtr key = ev(items[1]);
      for (std::size_t i = 2; i < items.size(); ++i) {
        auto clause = value::elements(items[i]);
        if (clause.size() < 2) throw EvalError{"Each clause of CASE must have a key and a body."};
        const ValuePtr& keys = clause[0];
        bool hit = (keys->is_symbol() && (keys->text == "T" || keys->text == "OTHERWISE")) ||
                   value::equal(*keys, *key);
        for (const auto& k : value::elements(keys)) hit = hit || value::equal(*k, *key);
        if (hit) return ev(clause.back());
      }
      return value::nil();
    }
    if (head == "LET" || head == "LET*") {
      if (argc < 2) need(2, 2);
      Env inner = env;
      for (const auto& binding : value::elements(items[1])) {
        auto pair = value::elements(binding);
        if (pair.size() != 2 || !pair[0]->is_symbol()) {
          throw EvalError{"The bindings of " + head + " must be a list of (var term) pairs."};
        }
        ValuePtr v = eval(pair[1], head == "LET" ? env : inner, depth + 1, printed);
        inner.emplace_back(pair[0]->text, v);
      }
      return eval(items.back(), inner, depth + 1, printed);
    }
    if (head == "THE") {
      need(2, 2);
      return ev(items[2]);
    }
    if (head == "MBE") {
      for (std::size_t i = 1; i + 1 < items.size(); i += 2) {
        if (items[i]->text == ":LOGIC") return ev(items[i + 1]);
      }
      throw EvalError{"MBE requires a :LOGIC argument."};
    }
    if (head == "LIST" || head == "LIST*") {
      std::vector<ValuePtr> vals;
      for (std::size_t i = 1; i < items.size(); ++i) vals.push_back(ev(items[i]));
      if (head == "LIST" || vals.empty()) return value::list(vals);
      ValuePtr tail = vals.back();
      vals.pop_back();
      return value::list(vals, tail);
    }
    if (head == "CW") {
      if (argc < 1) need(1, 1);
      ValuePtr fmt = ev(items[1]);
      std::vector<ValuePtr> args;
      for (std::size_t i = 2; i < items.size(); ++i) args.push_back(ev(items[i]));
      if (printed) *printed += format(fmt->text, args);
      return value::nil();
    }

    if (auto fn = world_.functions.find(head); fn != world_.functions.end()) {
      const UserFunction& f = fn->second;
      if (argc != f.formals.size()) {
        throw EvalError{head + " takes " + arguments(f.formals.size()) + " but in the call " + value::print(x) +
                        " it is given " + arguments(argc) + "."};
      }
      Env frame;
      for (std::size_t i = 0; i < argc; ++i) frame.emplace_back(f.formals[i], ev(items[i + 1]));
      return eval(f.body, frame, depth + 1, printed);
    }
    if (auto p = primitives_.find(head); p != primitives_.end()) {
      const Primitive& prim = p->second;
      need(static_cast<std::size_t>(prim.min), prim.max < 0 ? SIZE_MAX : static_cast<std::size_t>(prim.max));
      std::vector<ValuePtr> args;
      args.reserve(argc);
      for (std::size_t i = 1; i < items.size(); ++i) args.push_back(ev(items[i]));
      return prim.fn(args);
    }
    throw EvalError{"The symbol " + head +
                    " (in package \"ACL2\") has neither a function nor macro definition in ACL2.  Please define "
                    "it.  Note:  this error occurred in the context " +
                    value::print(x) + "."};
  }

  static std::string format(const std::string& fmt, const std::vector<ValuePtr>& args) {
    std::string out;
    for (std::size_t i = 0; i < fmt.size(); ++i) {
      if (fmt[i] != '~' || i + 1 >= fmt.size()) {
        out += fmt[i];
        continue;
      }
      char d = fmt[++i];
      if (d == '%') {
        out += '\n';
      } else if (d == '~') {
        out += '~';
      } else if ((d == 'x' || d == 'X' || d == 's' || d == 'S') && i + 1 < fmt.size()) {
        std::size_t k = static_cast<std::size_t>(fmt[++i] - '0');
        if (k < args.size()) {
          out += (d == 's' || d == 'S') && args[k]->kind == Value::Kind::String ? args[k]->text : value::print(args[k]);
        }
      }
    }
    return out;
  }

  void install_primitives() {
    using Args = std::vector<ValuePtr>;
    auto& P = primitives_;
    auto b = value::boolean;
    P["CONS"] = {2, 2, [](const Args& a) { return value::cons(a[0], a[1]); }};
    P["CAR"] = {1, 1, [](const Args& a) { return a[0]->is_cons() ? a[0]->car : value::nil(); }};
    P["CDR"] = {1, 1, [](const Args& a) { return a[0]->is_cons() ? a[0]->cdr : value::nil(); }};
    P["FIRST"] = P["CAR"];
    P["REST"] = P["CDR"];
    P["SECOND"] = {1, 1, [](const Args& a) {
                     auto e = value::elements(a[0]);
                     return e.size() > 1 ? e[1] : value::nil();
                   }};
    P["THIRD"] = {1, 1, [](const Args& a) {
                    auto e = value::elements(a[0]);
                    return e.size() > 2 ? e[2] : value::nil();
                  }};
    P["CONSP"] = {1, 1, [b](const Args& a) { return b(a[0]->is_cons()); }};
    P["ATOM"] = {1, 1, [b](const Args& a) { return b(!a[0]->is_cons()); }};
    P["ENDP"] = P["ATOM"];
    P["NULL"] = {1, 1, [b](const Args& a) { return b(a[0]->is_nil()); }};
    P["NOT"] = P["NULL"];
    P["LISTP"] = {1, 1, [b](const Args& a) { return b(a[0]->is_cons() || a[0]->is_nil()); }};
    P["TRUE-LISTP"] = {1, 1, [b](const Args& a) {
                         ValuePtr v = a[0];
                         while (v->is_cons()) v = v->cdr;
                         return b(v->is_nil());
                       }};
    auto list_of = [b](std::function<bool(const Value&)> pred) {
      return [b, pred](const Args& a) {
        ValuePtr v = a[0];
        while (v->is_cons()) {
          if (!pred(*v->car)) return value::nil();
          v = v->cdr;
        }
        return b(v->is_nil());
      };
    };
    auto natp = [](const Value& v) { return v.is_integer() && v.number >= 0; };
    P["NAT-LISTP"] = {1, 1, list_of(natp)};
    P["INTEGER-LISTP"] = {1, 1, list_of([](const Value& v) { return v.is_integer(); })};
    P["RATIONAL-LISTP"] = {1, 1, list_of([](const Value& v) { return v.is_number(); })};
    P["SYMBOL-LISTP"] = {1, 1, list_of([](const Value& v) { return v.is_symbol(); })};
    P["BOOLEAN-LISTP"] = {1, 1, list_of([](const Value& v) { return v.is_symbol() && (v.text == "T" || v.text == "NIL"); })};
    P["CHARACTER-LISTP"] = {1, 1, list_of([](const Value& v) { return v.kind == Value::Kind::Character; })};
    P["STRING-LISTP"] = {1, 1, list_of([](const Value& v) { return v.kind == Value::Kind::String; })};
    P["NATP"] = {1, 1, [b, natp](const Args& a) { return b(natp(*a[0])); }};
    P["POSP"] = {1, 1, [b](const Args& a) { return b(a[0]->is_integer() && a[0]->number > 0); }};
    P["INTEGERP"] = {1, 1, [b](const Args& a) { return b(a[0]->is_integer()); }};
    P["RATIONALP"] = {1, 1, [b](const Args& a) { return b(a[0]->is_number()); }};
    P["ACL2-NUMBERP"] = P["RATIONALP"];
    P["SYMBOLP"] = {1, 1, [b](const Args& a) { return b(a[0]->is_symbol()); }};
    P["STRINGP"] = {1, 1, [b](const Args& a) { return b(a[0]->kind == Value::Kind::String); }};
    P["CHARACTERP"] = {1, 1, [b](const Args& a) { return b(a[0]->kind == Value::Kind::Character); }};
    P["BOOLEANP"] = {1, 1, [b](const Args& a) { return b(a[0]->is_symbol() && (a[0]->text == "T" || a[0]->is_nil())); }};
    P["KEYWORDP"] = {1, 1, [b](const Args& a) { return b(a[0]->is_symbol() && a[0]->text.starts_with(":")); }};
    P["EQUAL"] = {2, 2, [b](const Args& a) { return b(value::equal(*a[0], *a[1])); }};
    P["EQL"] = P["EQUAL"];
    P["EQ"] = P["EQUAL"];
    P["IFF"] = {2, 2, [b](const Args& a) { return b(a[0]->is_nil() == a[1]->is_nil()); }};
    P["="] = {2, 2, [b](const Args& a) { return b(num(a[0]) == num(a[1])); }};
    P["/="] = {2, 2, [b](const Args& a) { return b(num(a[0]) != num(a[1])); }};
    P["<"] = {2, 2, [b](const Args& a) { return b(num(a[0]) < num(a[1])); }};
    P[">"] = {2, 2, [b](const Args& a) { return b(num(a[0]) > num(a[1])); }};
    P["<="] = {2, 2, [b](const Args& a) { return b(num(a[0]) <= num(a[1])); }};
    P[">="] = {2, 2, [b](const Args& a) { return b(num(a[0]) >= num(a[1])); }};
    P["+"] = {0, -1, [](const Args& a) {
                Rational s = 0;
                for (const auto& v : a) s += num(v);
                return value::number(s);
              }};
    P["*"] = {0, -1, [](const Args& a) {
                Rational s = 1;
                for (const auto& v : a) s *= num(v);
                return value::number(s);
              }};
    P["-"] = {1, 2, [](const Args& a) {
                return value::number(a.size() == 1 ? Rational(-num(a[0])) : Rational(num(a[0]) - num(a[1])));
              }};
    P["/"] = {1, 2, [](const Args& a) {
                Rational n = a.size() == 1 ? Rational(1) : num(a[0]);
                Rational d = num(a.back());
                return value::number(d == 0 ? Rational(0) : Rational(n / d));
              }};
    P["1+"] = {1, 1, [](const Args& a) { return value::number(num(a[0]) + 1); }};
    P["1-"] = {1, 1, [](const Args& a) { return value::number(num(a[0]) - 1); }};
    P["ZP"] = {1, 1, [b](const Args& a) { return b(!a[0]->is_integer() || a[0]->number <= 0); }};
    P["ZIP"] = {1, 1, [b](const Args& a) { return b(!a[0]->is_integer() || a[0]->number == 0); }};
    P["ZEROP"] = {1, 1, [b](const Args& a) { return b(num(a[0]) == 0); }};
    P["NFIX"] = {1, 1, [natp](const Args& a) { return natp(*a[0]) ? a[0] : value::number(0); }};
    P["IFIX"] = {1, 1, [](const Args& a) { return a[0]->is_integer() ? a[0] : value::number(0); }};
    P["RFIX"] = {1, 1, [](const Args& a) { return a[0]->is_number() ? a[0] : value::number(0); }};
    P["ABS"] = {1, 1, [](const Args& a) { return value::number(num(a[0]) < 0 ? Rational(-num(a[0])) : num(a[0])); }};
    P["MAX"] = {2, 2, [](const Args& a) { return num(a[0]) >= num(a[1]) ? a[0] : a[1]; }};
    P["MIN"] = {2, 2, [](const Args& a) { return num(a[0]) <= num(a[1]) ? a[0] : a[1]; }};
    P["EVENP"] = {1, 1, [b](const Args& a) { return b(a[0]->is_integer() && floor_of(num(a[0])) % 2 == 0); }};
    P["ODDP"] = {1, 1, [b](const Args& a) { return b(a[0]->is_integer() && floor_of(num(a[0])) % 2 != 0); }};
    P["FLOOR"] = {2, 2, [](const Args& a) {
                    Rational d = num(a[1]);
                    return value::number(d == 0 ? Rational(0) : Rational(floor_of(num(a[0]) / d)));
                  }};
    P["TRUNCATE"] = {2, 2, [](const Args& a) {
                       Rational d = num(a[1]);
                       return value::number(d == 0 ? Rational(0) : Rational(truncate_of(num(a[0]) / d)));
                     }};
    P["MOD"] = {2, 2, [](const Args& a) {
                  Rational x = num(a[0]), d = num(a[1]);
                  return value::number(d == 0 ? x : Rational(x - d * Rational(floor_of(x / d))));
                }};
    P["REM"] = {2, 2, [](const Args& a) {
                  Rational x = num(a[0]), d = num(a[1]);
                  return value::number(d == 0 ? x : Rational(x - d * Rational(truncate_of(x / d))));
                }};
    P["EXPT"] = {2, 2, [](const Args& a) {
                   Rational base = num(a[0]);
                   Integer e = a[1]->is_integer() ? floor_of(a[1]->number) : Integer(0);
                   if (base == 0 && e < 0) return value::number(0);
                   Rational r = 1;
                   for (Integer i = 0; i < abs(e); ++i) r *= base;
                   return value::number(e < 0 ? Rational(1 / r) : r);
                 }};
    P["NUMERATOR"] = {1, 1, [](const Args& a) { return value::number(Rational(boost::multiprecision::numerator(num(a[0])))); }};
    P["DENOMINATOR"] = {1, 1, [](const Args& a) { return value::number(Rational(boost::multiprecision::denominator(num(a[0])))); }};
    P["LEN"] = {1, 1, [](const Args& a) { return value::number(Rational(value::elements(a[0]).size())); }};
    P["LENGTH"] = {1, 1, [](const Args& a) {
                     if (a[0]->kind == Value::Kind::String) return value::number(Rational(a[0]->text.size()));
                     return value::number(Rational(value::elements(a[0]).size()));
                   }};
    P["APPEND"] = {0, -1, [](const Args& a) {
                     if (a.empty()) return value::nil();
                     ValuePtr out = a.back();
                     for (auto it = a.rbegin() + 1; it != a.rend(); ++it) out = value::list(value::elements(*it), out);
                     return out;
                   }};
    P["BINARY-APPEND"] = {2, 2, P["APPEND"].fn};
    P["REV"] = {1, 1, [](const Args& a) {
                  auto e = value::elements(a[0]);
                  std::reverse(e.begin(), e.end());
                  return value::list(e);
                }};
    P["REVERSE"] = {1, 1, [](const Args& a) {
                      if (a[0]->kind == Value::Kind::String) return value::string(std::string(a[0]->text.rbegin(), a[0]->text.rend()));
                      auto e = value::elements(a[0]);
                      std::reverse(e.begin(), e.end());
                      return value::list(e);
                    }};
    P["MEMBER-EQUAL"] = {2, 2, [](const Args& a) {
                           ValuePtr v = a[1];
                           while (v->is_cons() && !value::equal(*v->car, *a[0])) v = v->cdr;
                           return v->is_cons() ? v : value::nil();
                         }};
    P["MEMBER"] = P["MEMBER-EQUAL"];
    P["ASSOC-EQUAL"] = {2, 2, [](const Args& a) {
                          for (const auto& e : value::elements(a[1])) {
                            if (e->is_cons() && value::equal(*e->car, *a[0])) return e;
                          }
                          return value::nil();
                        }};
    P["ASSOC"] = P["ASSOC-EQUAL"];
    P["NTH"] = {2, 2, [](const Args& a) {
                  auto e = value::elements(a[1]);
                  Rational n = num(a[0]);
                  return n >= 0 && n < Rational(e.size()) ? e[static_cast<std::size_t>(floor_of(n))] : value::nil();
                }};
    P["NTHCDR"] = {2, 2, [](const Args& a) {
                     ValuePtr v = a[1];
                     for (Integer n = a[0]->is_integer() ? floor_of(a[0]->number) : Integer(0); n > 0 && v->is_cons(); --n) {
                       v = v->cdr;
                     }
                     return v;
                   }};
    P["TAKE"] = {2, 2, [natp](const Args& a) {
                   auto e = value::elements(a[1]);
                   std::size_t n = natp(*a[0]) ? static_cast<std::size_t>(floor_of(a[0]->number)) : 0;
                   std::vector<ValuePtr> out;
                   for (std::size_t i = 0; i < n; ++i) out.push_back(i < e.size() ? e[i] : value::nil());
                   return value::list(out);
                 }};
    P["STRING-APPEND"] = {2, 2, [](const Args& a) { return value::string(a[0]->text + a[1]->text); }};
    P["CHAR-CODE"] = {1, 1, [](const Args& a) {
                        return value::number(static_cast<unsigned char>(a[0]->character));
                      }};
    P["CODE-CHAR"] = {1, 1, [](const Args& a) {
                        return value::character(static_cast<char>(static_cast<int>(floor_of(num(a[0])) % 256)));
                      }};
  }
};

}  // namespace proofpad
