#include <gtest/gtest.h>

#include "proofpad/doublecheck.hpp"
#include "test_support.hpp"

namespace proofpad {
namespace {

using K = GeneratorSpec::Kind;

const char* const kProd = "(defun prod (xs) (if (endp xs) 1 (* (car xs) (prod (cdr xs)))))";

std::unique_ptr<Backend> with_prod() {
  auto b = fake_backend();
  b->submit(kProd);
  return b;
}

ErrorCode code_of(std::string_view text) {
  try {
    parse_property(text);
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::PreconditionViolation;
}

TEST(Rng, ReferenceOutputs) {
  // Independently computed: xorshift64* from raw state 1, and splitmix64(0).
  Rng r = Rng::from_state(1);
  EXPECT_EQ(r.next(), 0x47e4ce4b896cdd1dULL);
  EXPECT_EQ(r.next(), 0xabcfa6a8e079651dULL);
  EXPECT_EQ(r.next(), 0xb9d10d8feb731f57ULL);
  EXPECT_EQ(Rng(0).state(), 0xe220a8397b1dcdafULL);
  EXPECT_EQ(Rng(7), Rng(7));
  EXPECT_NE(Rng(7).state(), Rng(8).state());
}

TEST(ParseProperty, Examples) {
  auto p = parse_property("(defproperty p (xs :value (random-list-of (random-natural))) (equal (prod xs) (prod xs)))");
  EXPECT_EQ(p.name, "P");
  ASSERT_EQ(p.bindings.size(), 1u);
  EXPECT_EQ(p.bindings[0].first, "XS");
  EXPECT_EQ(p.bindings[0].second.kind, K::ListOf);
  EXPECT_EQ(p.bindings[0].second.element->kind, K::Natural);
  EXPECT_EQ(p.body_text, "(equal (prod xs) (prod xs))");

  auto q = parse_property("(defproperty q () t)");
  EXPECT_TRUE(q.bindings.empty());

  EXPECT_EQ(code_of("(defproperty r (x :value (random-between 1 0)) t)"), ErrorCode::MalformedProperty);
}

TEST(ParseProperty, Rejections) {
  EXPECT_EQ(code_of("(defproperty (x :value (random-natural)) t)"), ErrorCode::MalformedProperty);
  EXPECT_EQ(code_of("(defproperty p (x (random-natural)) t)"), ErrorCode::MalformedProperty);
  EXPECT_EQ(code_of("(defproperty p (x :value (random-natural)) (equal x y))"), ErrorCode::MalformedProperty);
  EXPECT_EQ(code_of("(defproperty p (x :value (random-natural) x :value (random-natural)) t)"),
            ErrorCode::MalformedProperty);
  EXPECT_EQ(code_of("(defproperty p (x :value (random-widget)) t)"), ErrorCode::MalformedProperty);
  EXPECT_EQ(code_of("(defproperty p (x :value (random-one-of (f 1))) t)"), ErrorCode::MalformedProperty);
}

TEST(ParseProperty, LetBoundNamesAreNotFree) {
  EXPECT_NO_THROW(parse_property("(defproperty p (x :value (random-natural)) (let ((y x)) (equal y x)))"));
  EXPECT_NO_THROW(parse_property("(defproperty p () (equal '(a b) (list 'a 'b)))"));
}

TEST(Generate, Examples) {
  GeneratorSpec nat;
  EXPECT_GE(generate(nat, Rng(0)).first->number, 0);
  GeneratorSpec five{.kind = K::Between, .lo = 5, .hi = 5};
  for (std::uint64_t s = 0; s < 20; ++s) EXPECT_EQ(generate(five, Rng(s)).first->number, 5);
  GeneratorSpec empty{.kind = K::ListOf, .element = std::make_shared<GeneratorSpec>(), .max_length = 0};
  for (std::uint64_t s = 0; s < 20; ++s) EXPECT_TRUE(generate(empty, Rng(s)).first->is_nil());
}

TEST(Generate, PinnedGoldenValues) {
  GeneratorSpec nat;
  Rng rng(0);
  std::string seq;
  for (int i = 0; i < 5; ++i) {
    auto [v, next] = generate(nat, rng);
    seq += value::print(v) + " ";
    rng = next;
  }
  // Pinned: changing the RNG or the natural distribution changes this file.
  std::string golden = testing::read_file(testing::data_path("fixtures/naturals-seed0.golden"));
  EXPECT_EQ(seq + "\n", golden);
}

TEST(Generate, PureInItsInputs) {
  GeneratorSpec list{.kind = K::ListOf, .element = std::make_shared<GeneratorSpec>(), .max_length = 7};
  for (std::uint64_t s = 0; s < 50; ++s) {
    auto a = generate(list, Rng(s));
    auto b = generate(list, Rng(s));
    EXPECT_TRUE(value::equal(*a.first, *b.first));
    EXPECT_EQ(a.second, b.second);
  }
}

// Every sample satisfies its kind's type predicate, checked by the fake's
// own evaluator.
TEST(GenerateProperty, SoundnessAgainstTypePredicates) {
  auto b = fake_backend();
  std::vector<std::pair<GeneratorSpec, std::string>> kinds = {
      {GeneratorSpec{.kind = K::Natural}, "natp"},
      {GeneratorSpec{.kind = K::Integer}, "integerp"},
      {GeneratorSpec{.kind = K::Rational}, "rationalp"},
      {GeneratorSpec{.kind = K::Boolean}, "booleanp"},
      {GeneratorSpec{.kind = K::Character}, "characterp"},
      {GeneratorSpec{.kind = K::Symbol}, "symbolp"},
      {GeneratorSpec{.kind = K::String}, "stringp"},
      {GeneratorSpec{.kind = K::ListOf, .element = std::make_shared<GeneratorSpec>(), .max_length = 5}, "nat-listp"},
  };
  for (const auto& [gen, pred] : kinds) {
    Rng rng(1234);
    std::string batch = "(and";
    for (int i = 0; i < 10000; ++i) {
      auto [v, next] = generate(gen, rng);
      rng = next;
      batch += " (" + pred + " '" + value::print(v) + ")";
      if (i % 500 == 499) {
        Submission s = b->submit(batch + ")");
        ASSERT_EQ(s.result.substr(0, 2), "T\n") << pred << ": " << s.result.substr(0, 300);
        batch = "(and";
      }
    }
  }
  GeneratorSpec between{.kind = K::Between, .lo = -3, .hi = 4};
  Rng rng(99);
  for (int i = 0; i < 10000; ++i) {
    auto [v, next] = generate(between, rng);
    rng = next;
    ASSERT_GE(v->number, -3);
    ASSERT_LE(v->number, 4);
    ASSERT_TRUE(v->is_integer());
  }
}

TEST(RunProperty, ProdAppendPasses) {
  auto b = with_prod();
  auto p = parse_property(
      "(defproperty prod-append (xs :value (random-list-of (random-natural) :size 5)"
      " ys :value (random-list-of (random-natural) :size 5))"
      " (equal (prod (append xs ys)) (* (prod xs) (prod ys))))");
  TestReport r = run_property(p, 50, 1, *b);
  EXPECT_EQ(r.trials_run, 50u);
  EXPECT_EQ(r.passes, 50u);
  EXPECT_TRUE(r.passed());
}

TEST(RunProperty, AppendCommutesIsRefuted) {
  auto b = fake_backend();
  auto p = parse_property(
      "(defproperty app-comm (xs :value (random-list-of (random-natural) :size 5)"
      " ys :value (random-list-of (random-natural) :size 5))"
      " (equal (append xs ys) (append ys xs)))");
  TestReport r = run_property(p, 200, 3, *b);
  ASSERT_TRUE(r.counterexample);
  EXPECT_EQ(r.passes + 1, r.trials_run);
  // The counterexample really falsifies the body.
  std::vector<std::pair<std::string, ValuePtr>> values;
  for (const auto& [var, v] : *r.counterexample) values.emplace_back(var, value::read(v));
  EXPECT_EQ(b->submit(instantiate(p, values)).result.substr(0, 4), "NIL\n");
}

TEST(RunProperty, TrivialAndErrors) {
  auto b = fake_backend();
  TestReport r = run_property(parse_property("(defproperty q () t)"), 1, 0, *b);
  EXPECT_EQ(r.passes, 1u);
  EXPECT_THROW(run_property(parse_property("(defproperty q () t)"), 0, 0, *b), Error);
  TestReport bad = run_property(parse_property("(defproperty u (x :value (random-natural)) (nope x))"), 5, 0, *b);
  ASSERT_TRUE(bad.aborted);
  EXPECT_FALSE(bad.passed());
}

TEST(RunProperty, DeterministicReports) {
  auto p = parse_property(
      "(defproperty app-comm (xs :value (random-list-of (random-natural) :size 5)"
      " ys :value (random-list-of (random-integer) :size 5)) (equal (append xs ys) (append ys xs)))");
  for (std::uint64_t seed : {0ULL, 7ULL, 123456789ULL}) {
    auto b1 = fake_backend();
    auto b2 = fake_backend();
    TestReport a = run_property(p, 100, seed, *b1);
    TestReport c = run_property(p, 100, seed, *b2);
    EXPECT_EQ(a, c);
    EXPECT_EQ(render_report(a), render_report(c));
  }
}

TEST(ToTheorem, Examples) {
  auto p = parse_property("(defproperty p (xs :value (random-list-of (random-natural))) (equal (prod xs) (prod xs)))");
  EXPECT_EQ(to_theorem(p), "(defthm p (implies (nat-listp xs) (equal (prod xs) (prod xs))))");
  EXPECT_EQ(to_theorem(parse_property("(defproperty q () t)")), "(defthm q t)");
  auto two = parse_property("(defproperty two (a :value (random-integer) b :value (random-between 1 10)) (integerp (+ a b)))");
  EXPECT_EQ(to_theorem(two),
            "(defthm two (implies (and (integerp a) (integerp b) (<= 1 b) (<= b 10)) (integerp (+ a b))))");
}

TEST(ToTheorem, ConclusionIsTheBodyAndTheFakeAdmitsIt) {
  auto p = parse_property(
      "(defproperty r (x :value (random-one-of 1 2 'a) s :value (random-string)) (equal  x\n x))");
  std::string thm = to_theorem(p);
  auto tree = value::read(thm);
  auto implies = value::elements(tree)[2];
  EXPECT_TRUE(value::equal(*value::elements(implies)[2], *p.body));
  EXPECT_NE(thm.find("(equal  x\n x)"), std::string::npos);
  auto b = fake_backend();
  EXPECT_EQ(b->submit(thm).outcome, Outcome::Success);
}

}  // namespace
}  // namespace proofpad
