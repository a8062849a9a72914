#include <gtest/gtest.h>

#include "proofpad/repl.hpp"

namespace proofpad {
namespace {

TopLevelForm one(std::string_view text) { return parse_source(text).at(0); }

TEST(ClassifyInput, Examples) {
  EXPECT_EQ(classify_input(one("(defun g (x) x)")), InputClass::Event);
  EXPECT_EQ(classify_input(one("(+ 1 2)")), InputClass::Expression);
  EXPECT_EQ(classify_input(one("(defthm th (equal x x))")), InputClass::Event);
  EXPECT_EQ(classify_input(one("42")), InputClass::Expression);
  try {
    classify_input(one("(defun g (x)"));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::IncompleteForm);
  }
}

TEST(Route, EventsMoveWithoutReachingTheBackend) {
  Session s;
  auto b = fake_backend();
  ReplResult r = route(one("(defun g (x) x)"), s, *b);
  EXPECT_EQ(r.kind, ReplResult::Kind::Moved);
  EXPECT_TRUE(b->fake()->submission_log().empty());
  ASSERT_EQ(s.forms().size(), 1u);
  EXPECT_EQ(s.forms()[0].status, ProofStatus::Unadmitted);
  EXPECT_EQ(s.text().substr(r.target.start, r.target.size()), "(defun g (x) x)");
}

TEST(Route, ExpressionsEvaluate) {
  Session s;
  auto b = fake_backend();
  ReplResult r = route(one("(+ 1 2)"), s, *b);
  EXPECT_EQ(r.kind, ReplResult::Kind::Evaluated);
  EXPECT_NE(r.summary.raw.find('3'), std::string::npos);
  EXPECT_EQ(result_text(r.summary), "3\n");
  EXPECT_EQ(render(r), "3\n");
}

TEST(Route, UndefinedFunctionIsAnError) {
  Session s;
  auto b = fake_backend();
  ReplResult r = route(one("(undefined-fn 1)"), s, *b);
  EXPECT_EQ(r.summary.overall, Overall::Failure);
  ASSERT_FALSE(r.summary.items.empty());
  EXPECT_EQ(r.summary.items[0].severity, MessageSeverity::Error);
  EXPECT_EQ(render(r).substr(0, 6), "error:");
  EXPECT_NE(render(r, true).find("--- raw output ---"), std::string::npos);
}

TEST(Route, MovedEventsLandAtTheProofLine) {
  Session s("(defun a (x) x)\n(defun b (x) x)\n");
  auto b = fake_backend();
  s.execute(s.plan_click(0), *b);
  route(one("(defun g (x) x)"), s, *b);
  ASSERT_EQ(s.forms().size(), 3u);
  EXPECT_EQ(s.forms()[1].form.text, "(defun g (x) x)");
  EXPECT_EQ(s.status_string(), "AUU");
}

TEST(Repl, ClassificationErrorStopsTheRemainder) {
  Session s;
  auto b = fake_backend();
  Repl repl(s, *b);
  ReplBatch batch = repl.submit("(+ 1 2) (defun g (x) x) (car");
  EXPECT_EQ(batch.results.size(), 2u);
  ASSERT_TRUE(batch.error);
  EXPECT_EQ(batch.error->code(), ErrorCode::IncompleteForm);
  EXPECT_EQ(repl.history().size(), 2u);
}

TEST(Repl, HistoryRenderingIsPure) {
  Session s;
  auto b = fake_backend();
  Repl repl(s, *b);
  repl.submit("(+ 1 2)");
  repl.submit("(defun g (x) x)");
  std::string once = render_history(repl.history());
  EXPECT_EQ(once, render_history(repl.history()));
  EXPECT_EQ(once, "pp> (+ 1 2)\n3\npp> (defun g (x) x)\nmoved to definitions at 0-15\n");
}

// Scripted mixed session: no event ever reaches the backend through the REPL,
// and each moved event sits in the document exactly once.
TEST(ReplProperty, ScriptedMixedSession) {
  const std::vector<std::string> script = {
      "(defun f1 (x) x)",       "(+ 1 2)",          "(defthm t1 (equal x x))", "(* 3 4)",
      "(defconst *c* 5)",       "(append '(1) '(2))", "(defun f2 (x) (+ x 1))", "(len '(a b c))",
      "(defmacro m (x) x)",     "(cons 1 2)",       "(defthm t2 (equal (+ a b) (+ b a)))", "(natp 3)",
      "(defstub oracle (x) => *)", "(if t 1 2)",    "(defun f3 (x) (* x x))", "(equal 1 1)",
      "(in-theory (disable f3))", "(list 1 2 3)",   "(defproperty p (x :value (random-natural)) (natp x))",
      "(undefined-fn 1)"};
  ASSERT_EQ(script.size(), 20u);
  Session s("(defun base (x) x)\n(defun later (x) x)\n");
  auto b = fake_backend();
  s.execute(s.plan_click(0), *b);
  std::size_t before = b->fake()->submission_log().size();
  Repl repl(s, *b);
  std::vector<std::string> events;
  for (const auto& line : script) {
    ReplBatch batch = repl.submit(line);
    ASSERT_FALSE(batch.error);
    if (batch.results[0].kind == ReplResult::Kind::Moved) events.push_back(line);
  }
  EXPECT_EQ(events.size(), 10u);
  const auto& log = b->fake()->submission_log();
  for (std::size_t i = before; i < log.size(); ++i) {
    EXPECT_EQ(classify_input(one(log[i])), InputClass::Expression) << log[i];
  }
  EXPECT_EQ(log.size() - before, 10u);
  for (const auto& e : events) {
    std::size_t first = s.text().find(e);
    ASSERT_NE(first, std::string::npos) << e;
    EXPECT_EQ(s.text().find(e, first + 1), std::string::npos) << e;
  }
  // All moved events sit together at the proof line, most recent first, and
  // are unadmitted.
  ASSERT_EQ(s.forms().size(), 12u);
  EXPECT_EQ(s.forms()[0].status, ProofStatus::Admitted);
  for (std::size_t k = 0; k < events.size(); ++k) {
    EXPECT_EQ(s.forms()[1 + k].form.text, events[events.size() - 1 - k]);
    EXPECT_EQ(s.forms()[1 + k].status, ProofStatus::Unadmitted);
  }
  EXPECT_EQ(s.forms().back().form.text, "(defun later (x) x)");
}

}  // namespace
}  // namespace proofpad
