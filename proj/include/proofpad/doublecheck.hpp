#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "proofpad/backend.hpp"
#include "proofpad/repl.hpp"
#include "proofpad/value.hpp"

namespace proofpad {

/// xorshift64* (Vigna 2014): shifts 12, 25, 27, multiplier 0x2545F4914F6CDD1D.
/// Seeds pass through one splitmix64 step so that small seeds diverge.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : state_(splitmix64(seed)) {
    if (state_ == 0) state_ = 0x9E3779B97F4A7C15ULL;
  }

  /// Starts from a raw state, bypassing seeding; the state must be nonzero.
  static Rng from_state(std::uint64_t state) {
    Rng r;
    r.state_ = state;
    return r;
  }

  std::uint64_t next() {
    state_ ^= state_ >> 12;
    state_ ^= state_ << 25;
    state_ ^= state_ >> 27;
    return state_ * 0x2545F4914F6CDD1DULL;
  }

  /// Uniform in [0, n) by modulo reduction; n must be positive.
  std::uint64_t below(std::uint64_t n) { return next() % n; }

  /// Uniform in [lo, hi].
  Integer between(const Integer& lo, const Integer& hi) {
    Integer span = hi - lo + 1;
    if (span <= 0) return lo;
    if (span <= Integer(UINT64_MAX)) return lo + Integer(below(static_cast<std::uint64_t>(span)));
    Integer r = 0;
    for (int i = 0; i < 4; ++i) r = (r << 64) + Integer(next());
    return lo + r % span;
  }

  std::uint64_t state() const noexcept { return state_; }
  friend bool operator==(const Rng&, const Rng&) = default;

 private:
  std::uint64_t state_;

  static std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
  }
};

struct GeneratorSpec {
  enum class Kind { Natural, Integer, Rational, Boolean, Character, Symbol, String, Between, ListOf, OneOf };
  Kind kind = Kind::Natural;
  proofpad::Integer lo = 0, hi = 0;            // Between
  std::shared_ptr<const GeneratorSpec> element;  // ListOf
  std::size_t max_length = 10;                   // ListOf
  std::vector<ValuePtr> constants;               // OneOf
};

/// Default ranges for the unparameterized numeric generators.
struct GeneratorRanges {
  static constexpr int kNaturalMax = 1000;
  static constexpr int kIntegerMin = -1000;
  static constexpr int kIntegerMax = 1000;
  static constexpr int kDenominatorMax = 1000;
  static constexpr std::size_t kDefaultListMax = 10;
  static constexpr std::size_t kStringMax = 10;
  static constexpr std::size_t kSymbolMax = 6;
};

struct PropertySpec {
  std::string name;
  std::vector<std::pair<std::string, GeneratorSpec>> bindings;
  ValuePtr body;
  std::string body_text;  // verbatim source of the body
};

struct TestReport {
  std::string name;
  std::uint64_t seed = 0;
  std::size_t trials_run = 0;
  std::size_t passes = 0;
  std::optional<std::vector<std::pair<std::string, std::string>>> counterexample;  // var -> printed value
  std::optional<std::string> aborted;  // backend failure; the report stops there

  bool passed() const { return !counterexample && !aborted; }
  friend bool operator==(const TestReport&, const TestReport&) = default;
};

namespace detail {

[[noreturn]] inline void malformed_property(const std::string& why) {
  throw Error(ErrorCode::MalformedProperty, why);
}

inline std::string sym(const ValuePtr& v) { return v->is_symbol() ? v->text : std::string(); }

inline GeneratorSpec parse_generator(const ValuePtr& g) {
  if (!g->is_cons() || !g->car->is_symbol()) malformed_property("generator must be a call such as (random-natural)");
  auto items = value::elements(g);
  const std::string head = items[0]->text;
  GeneratorSpec spec;
  auto nullary = [&](GeneratorSpec::Kind k) {
    if (items.size() != 1) malformed_property(head + " takes no arguments");
    spec.kind = k;
    return spec;
  };
  if (head == "RANDOM-NATURAL") return nullary(GeneratorSpec::Kind::Natural);
  if (head == "RANDOM-INTEGER") return nullary(GeneratorSpec::Kind::Integer);
  if (head == "RANDOM-RATIONAL") return nullary(GeneratorSpec::Kind::Rational);
  if (head == "RANDOM-BOOLEAN") return nullary(GeneratorSpec::Kind::Boolean);
  if (head == "RANDOM-CHAR") return nullary(GeneratorSpec::Kind::Character);
  if (head == "RANDOM-SYMBOL") return nullary(GeneratorSpec::Kind::Symbol);
  if (head == "RANDOM-STRING") return nullary(GeneratorSpec::Kind::String);
  if (head == "RANDOM-BETWEEN") {
    if (items.size() != 3 || !items[1]->is_integer() || !items[2]->is_integer()) {
      malformed_property("random-between takes two integer literals");
    }
    spec.kind = GeneratorSpec::Kind::Between;
    spec.lo = boost::multiprecision::numerator(items[1]->number);
    spec.hi = boost::multiprecision::numerator(items[2]->number);
    if (spec.lo > spec.hi) malformed_property("random-between needs lo <= hi");
    return spec;
  }
  if (head == "RANDOM-LIST-OF") {
    if (items.size() != 2 && items.size() != 4) malformed_property("random-list-of takes a generator and optional :size N");
    spec.kind = GeneratorSpec::Kind::ListOf;
    spec.element = std::make_shared<const GeneratorSpec>(parse_generator(items[1]));
    spec.max_length = GeneratorRanges::kDefaultListMax;
    if (items.size() == 4) {
      if (sym(items[2]) != ":SIZE" || !items[3]->is_integer() || items[3]->number < 0) {
        malformed_property("random-list-of expects :size followed by a natural");
      }
      spec.max_length = static_cast<std::size_t>(boost::multiprecision::numerator(items[3]->number));
    }
    return spec;
  }
  if (head == "RANDOM-ONE-OF") {
    if (items.size() < 2) malformed_property("random-one-of needs at least one choice");
    spec.kind = GeneratorSpec::Kind::OneOf;
    for (std::size_t i = 1; i < items.size(); ++i) {
      const ValuePtr& c = items[i];
      bool quoted = c->is_cons() && sym(c->car) == "QUOTE";
      if (c->is_cons() && !quoted) malformed_property("random-one-of choices must be constants");
      if (c->is_symbol() && c->text != "T" && c->text != "NIL" && !c->text.starts_with(":")) {
        malformed_property("random-one-of choices must be constants");
      }
      spec.constants.push_back(quoted ? c->cdr->car : c);
    }
    return spec;
  }
  malformed_property("unknown generator " + head);
}

/// Variables of `term` in evaluation position that are not in `bound`.
inline void free_variables(const ValuePtr& term, std::set<std::string> bound, std::set<std::string>& out) {
  if (term->is_symbol()) {
    const std::string& s = term->text;
    bool constant = s == "T" || s == "NIL" || s.starts_with(":") || (s.size() > 2 && s.front() == '*' && s.back() == '*');
    if (!constant && !bound.contains(s)) out.insert(s);
    return;
  }
  if (!term->is_cons()) return;
  auto items = value::elements(term);
  const std::string head = sym(items[0]);
  if (head == "QUOTE") return;
  if ((head == "LET" || head == "LET*") && items.size() >= 3) {
    std::set<std::string> inner = bound;
    for (const auto& b : value::elements(items[1])) {
      auto pair = value::elements(b);
      if (pair.size() == 2) {
        free_variables(pair[1], head == "LET" ? bound : inner, out);
        inner.insert(sym(pair[0]));
      }
    }
    free_variables(items.back(), inner, out);
    return;
  }
  if (head == "COND") {
    for (std::size_t i = 1; i < items.size(); ++i) {
      for (const auto& t : value::elements(items[i])) free_variables(t, bound, out);
    }
    return;
  }
  if (head == "CASE" && items.size() >= 2) {
    free_variables(items[1], bound, out);
    for (std::size_t i = 2; i < items.size(); ++i) {
      auto clause = value::elements(items[i]);
      for (std::size_t j = 1; j < clause.size(); ++j) free_variables(clause[j], bound, out);
    }
    return;
  }
  for (std::size_t i = 1; i < items.size(); ++i) free_variables(items[i], bound, out);
}

inline std::string random_name(Rng& rng, std::size_t max_len, bool symbol) {
  std::size_t len = symbol ? 1 + rng.below(max_len) : rng.below(max_len + 1);
  std::string s;
  for (std::size_t i = 0; i < len; ++i) {
    s += symbol ? static_cast<char>('A' + rng.below(26)) : static_cast<char>(32 + rng.below(95));
  }
  return s;
}

}  // namespace detail

/// Parses (defproperty name (var :value (generator ...) ...) body).
inline PropertySpec parse_property(const Node& form) {
  using detail::malformed_property;
  if (form.head() != "defproperty") malformed_property("not a defproperty form");
  if (form.children.size() != 4) malformed_property("defproperty takes a name, a binding list and a body");
  ValuePtr whole = value::from_node(form);
  auto items = value::elements(whole);
  PropertySpec spec;
  if (!items[1]->is_symbol() || items[1]->is_nil() || items[1]->text.starts_with(":")) {
    malformed_property("property name must be a symbol");
  }
  spec.name = items[1]->text;
  if (!items[2]->is_cons() && !items[2]->is_nil()) malformed_property("property bindings must be a list");
  auto b = value::elements(items[2]);
  std::set<std::string> bound;
  for (std::size_t k = 0; k < b.size(); k += 3) {
    if (!b[k]->is_symbol() || b[k]->text.starts_with(":")) malformed_property("expected a variable name in the bindings");
    if (k + 2 >= b.size() || detail::sym(b[k + 1]) != ":VALUE") {
      malformed_property("binding for " + b[k]->text + " needs :value and a generator");
    }
    if (!bound.insert(b[k]->text).second) malformed_property("variable " + b[k]->text + " is bound twice");
    spec.bindings.emplace_back(b[k]->text, detail::parse_generator(b[k + 2]));
  }
  spec.body = items[3];
  const Node& body = form.children[3];
  spec.body_text = body.kind == Node::Kind::Atom ? body.text : std::string();
  std::set<std::string> free;
  detail::free_variables(spec.body, bound, free);
  if (!free.empty()) malformed_property("body variable " + *free.begin() + " is not bound");
  return spec;
}

inline PropertySpec parse_property(const TopLevelForm& form) {
  PropertySpec spec = parse_property(form.tree);
  const Node& body = form.tree.children[3];
  spec.body_text = form.text.substr(body.span.start - form.span.start, body.span.size());
  return spec;
}

inline PropertySpec parse_property(std::string_view text) {
  auto forms = parse_source(text);
  if (forms.empty() || !forms.front().complete) detail::malformed_property("no complete form");
  return parse_property(forms.front());
}

/// One value of the generator's kind. Pure in (gen, rng).
inline std::pair<ValuePtr, Rng> generate(const GeneratorSpec& gen, Rng rng) {
  using K = GeneratorSpec::Kind;
  using R = GeneratorRanges;
  switch (gen.kind) {
    case K::Natural: return {value::number(Rational(rng.between(0, R::kNaturalMax))), rng};
    case K::Integer: return {value::number(Rational(rng.between(R::kIntegerMin, R::kIntegerMax))), rng};
    case K::Rational: {
      Integer n = rng.between(R::kIntegerMin, R::kIntegerMax);
      Integer d = rng.between(1, R::kDenominatorMax);
      return {value::number(Rational(n, d)), rng};
    }
    case K::Boolean: return {value::boolean(rng.below(2) == 1), rng};
    case K::Character: return {value::character(static_cast<char>(32 + rng.below(95))), rng};
    case K::Symbol: return {value::symbol(detail::random_name(rng, R::kSymbolMax, true)), rng};
    case K::String: return {value::string(detail::random_name(rng, R::kStringMax, false)), rng};
    case K::Between: return {value::number(Rational(rng.between(gen.lo, gen.hi))), rng};
    case K::ListOf: {
      std::size_t len = static_cast<std::size_t>(rng.below(gen.max_length + 1));
      std::vector<ValuePtr> items;
      for (std::size_t i = 0; i < len; ++i) {
        auto [v, next] = generate(*gen.element, rng);
        items.push_back(std::move(v));
        rng = next;
      }
      return {value::list(items), rng};
    }
    case K::OneOf: return {gen.constants[rng.below(gen.constants.size())], rng};
  }
  return {value::nil(), rng};
}

/// The body with every bound variable replaced by a quoted value.
inline std::string instantiate(const PropertySpec& spec, const std::vector<std::pair<std::string, ValuePtr>>& values) {
  std::string body = spec.body_text.empty() ? value::print(spec.body) : spec.body_text;
  if (values.empty()) return body;
  std::string out = "(let (";
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ' ';
    out += "(" + values[i].first + " '" + value::print(values[i].second) + ")";
  }
  return out + ") " + body + ")";
}

/// Runs up to `trials` random trials, stopping at the first falsifying one.
inline TestReport run_property(const PropertySpec& spec, std::size_t trials, std::uint64_t seed, Backend& backend) {
  if (trials == 0) throw Error(ErrorCode::PreconditionViolation, "trials must be at least 1");
  TestReport report;
  report.name = spec.name;
  report.seed = seed;
  Rng rng(seed);
  for (std::size_t t = 0; t < trials; ++t) {
    std::vector<std::pair<std::string, ValuePtr>> values;
    for (const auto& [var, gen] : spec.bindings) {
      auto [v, next] = generate(gen, rng);
      values.emplace_back(var, std::move(v));
      rng = next;
    }
    Submission s = backend.submit(instantiate(spec, values));
    ++report.trials_run;
    if (s.outcome != Outcome::Success) {
      Summary sum = summarize_output(s.result);
      std::string why = sum.items.empty() ? std::string(to_string(s.outcome)) : sum.items.front().headline;
      report.aborted = "trial " + std::to_string(t + 1) + ": " + why;
      return report;
    }
    std::string value = result_text(summarize_output(s.result));
    while (!value.empty() && (value.back() == '\n' || value.back() == ' ')) value.pop_back();
    if (value.substr(value.rfind('\n') == std::string::npos ? 0 : value.rfind('\n') + 1) == "NIL") {
      std::vector<std::pair<std::string, std::string>> cx;
      for (const auto& [var, v] : values) cx.emplace_back(var, value::print(v));
      report.counterexample = std::move(cx);
      return report;
    }
    ++report.passes;
  }
  return report;
}

/// Type hypothesis implied by a generator for variable `var`.
inline std::vector<std::string> hypotheses(const GeneratorSpec& gen, const std::string& var) {
  using K = GeneratorSpec::Kind;
  auto call = [&](std::string_view fn) { return "(" + std::string(fn) + " " + var + ")"; };
  switch (gen.kind) {
    case K::Natural: return {call("natp")};
    case K::Integer: return {call("integerp")};
    case K::Rational: return {call("rationalp")};
    case K::Boolean: return {call("booleanp")};
    case K::Character: return {call("characterp")};
    case K::Symbol: return {call("symbolp")};
    case K::String: return {call("stringp")};
    case K::Between:
      return {call("integerp"), "(<= " + gen.lo.str() + " " + var + ")", "(<= " + var + " " + gen.hi.str() + ")"};
    case K::ListOf:
      switch (gen.element->kind) {
        case K::Natural: return {call("nat-listp")};
        case K::Integer: return {call("integer-listp")};
        case K::Rational: return {call("rational-listp")};
        case K::Boolean: return {call("boolean-listp")};
        case K::Character: return {call("character-listp")};
        case K::Symbol: return {call("symbol-listp")};
        case K::String: return {call("string-listp")};
        default: return {call("true-listp")};
      }
    case K::OneOf: {
      std::string choices;
      for (const auto& c : gen.constants) choices += (choices.empty() ? "" : " ") + value::print(c);
      return {"(member-equal " + var + " '(" + choices + "))"};
    }
  }
  return {};
}

/// (defthm name (implies hyps body)); hypotheses in binding order, conjoined
/// with and when there is more than one.
inline std::string to_theorem(const PropertySpec& spec) {
  std::string body = spec.body_text.empty() ? value::print(spec.body) : spec.body_text;
  std::string name = ascii_lower(spec.name);
  std::vector<std::string> hyps;
  for (const auto& [var, gen] : spec.bindings) {
    for (auto& h : hypotheses(gen, ascii_lower(var))) hyps.push_back(std::move(h));
  }
  if (hyps.empty()) return "(defthm " + name + " " + body + ")";
  std::string hyp = hyps.size() == 1 ? hyps[0] : "(and";
  if (hyps.size() > 1) {
    for (const auto& h : hyps) hyp += " " + h;
    hyp += ")";
  }
  return "(defthm " + name + " (implies " + hyp + " " + body + "))";
}

/// One line per property, then counterexample bindings indented.
inline std::string render_report(const TestReport& r) {
  std::string name = ascii_lower(r.name);
  std::string trials = std::to_string(r.trials_run) + (r.trials_run == 1 ? " trial" : " trials");
  std::string out;
  if (r.aborted) {
    out = name + ": aborted after " + trials + " (seed " + std::to_string(r.seed) + "): " + *r.aborted + "\n";
  } else if (r.counterexample) {
    out = name + ": counterexample after " + trials + " (seed " + std::to_string(r.seed) + ")\n";
    for (const auto& [var, v] : *r.counterexample) out += "  " + ascii_lower(var) + " = " + v + "\n";
  } else {
    out = name + ": passed " + std::to_string(r.passes) + "/" + std::to_string(r.trials_run) + " trials (seed " +
          std::to_string(r.seed) + ")\n";
  }
  return out;
}

}  // namespace proofpad
