#include <gtest/gtest.h>

#include <random>
#include <thread>

#include "proofpad/backend.hpp"
#include "test_support.hpp"

namespace proofpad {
namespace {

TEST(FakeBackend, StartsEmpty) {
  auto b = fake_backend();
  EXPECT_EQ(b->fake()->world_counter(), 0u);
  EXPECT_FALSE(b->poisoned());
  EXPECT_NE(b->banner().find("ACL2 !>"), std::string::npos);
}

TEST(FakeBackend, DefunAdmittedOnceThenRedefinitionFails) {
  auto b = fake_backend();
  Submission s = b->submit("(defun f (x) x)");
  EXPECT_EQ(s.outcome, Outcome::Success);
  EXPECT_NE(s.result.find("Summary"), std::string::npos);
  EXPECT_EQ(b->fake()->world_counter(), 1u);
  Submission again = b->submit("(defun f (x) x)");
  EXPECT_EQ(again.outcome, Outcome::Failure);
  EXPECT_NE(again.result.find("******** FAILED ********"), std::string::npos);
  EXPECT_EQ(b->fake()->world_counter(), 1u);
}

TEST(FakeBackend, Arithmetic) {
  auto b = fake_backend();
  Submission s = b->submit("(+ 1 2)");
  EXPECT_EQ(s.outcome, Outcome::Success);
  EXPECT_NE(s.result.find("3"), std::string::npos);
  EXPECT_EQ(b->submit("(* 6 7)").result.substr(0, 3), "42\n");
  EXPECT_EQ(b->submit("(- 10 4)").result.substr(0, 2), "6\n");
  EXPECT_EQ(b->fake()->world_counter(), 0u);
}

TEST(FakeBackend, DefthmAdmittedIffBodyIsNotNil) {
  auto b = fake_backend();
  Submission bad = b->submit("(defthm t1 nil)");
  EXPECT_EQ(bad.outcome, Outcome::Failure);
  EXPECT_NE(bad.result.find("******** FAILED ********"), std::string::npos);
  EXPECT_EQ(b->submit("(defthm t2 (equal x x))").outcome, Outcome::Success);
  EXPECT_EQ(b->fake()->world_counter(), 1u);
}

TEST(FakeBackend, UndefinedFunctionIsAnError) {
  auto b = fake_backend();
  Submission s = b->submit("(undefined-fn 1)");
  EXPECT_EQ(s.outcome, Outcome::Failure);
  EXPECT_NE(s.result.find("ACL2 Error"), std::string::npos);
  EXPECT_NE(s.result.find("UNDEFINED-FN"), std::string::npos);
}

TEST(FakeBackend, IncludeBookFailsLikeTheMissingFileTranscript) {
  auto b = fake_backend();
  Submission s = b->submit("(include-book \"book\")");
  EXPECT_EQ(s.outcome, Outcome::Failure);
  Summary sum = summarize_output(s.result);
  ASSERT_FALSE(sum.items.empty());
  EXPECT_EQ(sum.items[0].headline, "The book could not be found at /proofpad-fake/book.lisp");
}

TEST(FakeBackend, UserFunctionsEvaluate) {
  auto b = fake_backend();
  b->submit("(defun prod (xs) (if (endp xs) 1 (* (car xs) (prod (cdr xs)))))");
  EXPECT_EQ(b->submit("(prod '(2 3 4))").result.substr(0, 3), "24\n");
  EXPECT_EQ(b->submit("(append '(1 2) '(3))").result.substr(0, 8), "(1 2 3)\n");
  EXPECT_EQ(b->submit("(let ((xs '(1/2 2))) (prod xs))").result.substr(0, 2), "1\n");
}

TEST(Backend, UndoThroughCountsEvents) {
  auto b = fake_backend();
  for (auto f : {"(defun a (x) x)", "(defun b (x) x)", "(defun c (x) x)"}) b->submit(f);
  EXPECT_EQ(b->fake()->world_counter(), 3u);
  EXPECT_EQ(b->undo_through(2).outcome, Outcome::Success);
  EXPECT_EQ(b->fake()->world_counter(), 1u);
  EXPECT_EQ(b->admitted_events(), 1u);
  ASSERT_EQ(b->fake()->undo_log().size(), 1u);
  EXPECT_EQ(b->fake()->undo_log()[0], "(ubt! :x-1)");
}

TEST(Backend, UndoThroughZeroOrTooManyIsAPreconditionViolation) {
  auto b = fake_backend();
  b->submit("(defun a (x) x)");
  try {
    b->undo_through(0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::PreconditionViolation);
  }
  EXPECT_THROW(b->undo_through(2), Error);
  EXPECT_EQ(b->fake()->world_counter(), 1u);
}

TEST(Backend, ReadmitAfterUndo) {
  auto b = fake_backend();
  b->submit("(defun a (x) x)");
  b->submit("(defun b (x) x)");
  b->undo_through(2);
  EXPECT_EQ(b->submit("(defun a (x) x)").outcome, Outcome::Success);
  EXPECT_EQ(b->fake()->world_counter(), 1u);
}

TEST(Backend, PrognCountsItsEvents) {
  auto b = fake_backend();
  b->submit("(progn (defun a (x) x) (defun b (x) x))");
  EXPECT_EQ(b->fake()->world_counter(), 2u);
  EXPECT_EQ(b->admitted_events(), 2u);
  // One command of two events cannot be split.
  EXPECT_THROW(b->undo_through(1), Error);
  b->undo_through(2);
  EXPECT_EQ(b->fake()->world_counter(), 0u);
}

TEST(Backend, FailedFormsAreNotCounted) {
  auto b = fake_backend();
  b->submit("(defthm bad nil)");
  EXPECT_EQ(b->admitted_events(), 0u);
  EXPECT_THROW(b->undo_through(1), Error);
}

TEST(Backend, SentinelIdsIncrease) {
  auto b = fake_backend();
  std::uint64_t last = 0;
  for (int i = 0; i < 5; ++i) {
    Submission s = b->submit("(+ 1 " + std::to_string(i) + ")");
    EXPECT_GT(s.sentinel_id, last);
    last = s.sentinel_id;
  }
  b->submit("(defun a (x) x)");
  EXPECT_GT(b->undo_through(1).sentinel_id, last);
}

TEST(Backend, HangTimesOutAndPoisons) {
  auto b = fake_backend();
  b->submit("(defun a (x) x)");
  Submission s = b->submit("(proofpad-fake-hang)");
  EXPECT_EQ(s.outcome, Outcome::Timeout);
  EXPECT_TRUE(b->poisoned());
  try {
    b->submit("(+ 1 2)");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::BackendPoisoned);
  }
}

TEST(Backend, CrashIsReported) {
  auto b = fake_backend();
  Submission s = b->submit("(proofpad-fake-crash)");
  EXPECT_EQ(s.outcome, Outcome::Crashed);
  EXPECT_TRUE(b->poisoned());
}

TEST(Backend, SubmissionLogHoldsOnlyUserForms) {
  auto b = fake_backend();
  b->submit("(+ 1 2)");
  b->submit("(defun a (x) x)");
  b->undo_through(1);
  EXPECT_EQ(b->fake()->submission_log(), (std::vector<std::string>{"(+ 1 2)", "(defun a (x) x)"}));
}

TEST(Backend, ConcurrentSubmitsAreSerialized) {
  auto b = fake_backend();
  std::vector<std::thread> threads;
  std::atomic<int> wrong{0};
  for (int t = 0; t < 4; ++t) {
    threads.emplace_back([&, t] {
      for (int i = 0; i < 25; ++i) {
        int n = t * 100 + i;
        Submission s = b->submit("(+ " + std::to_string(n) + " 1)");
        if (s.result.substr(0, s.result.find('\n')) != std::to_string(n + 1)) ++wrong;
      }
    });
  }
  for (auto& th : threads) th.join();
  EXPECT_EQ(wrong.load(), 0);
  EXPECT_EQ(b->fake()->submission_log().size(), 100u);
}

std::string scripted_reply(const std::string& transcript, std::string_view input) {
  auto at = input.find(kSentinelPrefix);
  auto end = input.find('~', at);
  std::string id(input.substr(at + kSentinelPrefix.size(), end - at - kSentinelPrefix.size()));
  return transcript + std::string(kSentinelPrefix) + id + "\nNIL\nACL2 !>";
}

TEST(Backend, RawOutputIsVerbatim) {
  std::string transcript = testing::read_file(testing::data_path("fixtures/include-book.out"));
  Backend b(std::make_unique<ScriptedTransport>(
                "banner\nACL2 !>", [&](std::string_view in) { return scripted_reply(transcript, in); }),
            BackendConfig{});
  Submission s = b.submit("(include-book \"book\")");
  EXPECT_EQ(s.result, transcript);
  EXPECT_EQ(s.outcome, Outcome::Failure);
}

Chunker random_chunker(std::mt19937_64& rng) {
  return [&rng](std::size_t available) {
    std::uniform_int_distribution<std::size_t> len(1, std::min<std::size_t>(available, 1 + rng() % 24));
    return len(rng);
  };
}

// Any partition of the backend's bytes yields the same submissions.
TEST(BackendProperty, ChunkingRobustnessOnFixture) {
  std::string transcript = testing::read_file(testing::data_path("fixtures/include-book.out"));
  auto run = [&](Chunker chunker) {
    Backend b(std::make_unique<ScriptedTransport>(
                  "banner\nACL2 !>", [&](std::string_view in) { return scripted_reply(transcript, in); },
                  std::move(chunker)),
              BackendConfig{});
    return std::vector<Submission>{b.submit("(include-book \"book\")"), b.submit("(include-book \"book\")")};
  };
  auto reference = run({});
  std::mt19937_64 rng(2024);
  for (int i = 0; i < 1000; ++i) ASSERT_EQ(run(random_chunker(rng)), reference) << "partition " << i;
}

TEST(BackendProperty, ChunkingRobustnessOnFakeSession) {
  const std::vector<std::string> script = {"(defun f (x) x)",  "(+ 1 2)", "(defthm bad nil)",
                                           "(defun f (x) x)",  "(progn (defun g (x) x) (defun h (x) x))",
                                           "(undefined-fn 3)", "(cw \"hello~%\")"};
  auto run = [&](Chunker chunker) {
    auto b = fake_backend(std::move(chunker));
    std::vector<Submission> out;
    for (const auto& f : script) out.push_back(b->submit(f));
    out.push_back(b->undo_through(3));
    return out;
  };
  auto reference = run({});
  std::mt19937_64 rng(7);
  for (int i = 0; i < 300; ++i) ASSERT_EQ(run(random_chunker(rng)), reference) << "partition " << i;
}

TEST(EventUnits, CountsEventsInsideProgn) {
  EXPECT_EQ(event_units("(defun f (x) x)"), 1u);
  EXPECT_EQ(event_units("(+ 1 2)"), 0u);
  EXPECT_EQ(event_units("(progn (defun a (x) x) (defthm b t))"), 2u);
  EXPECT_EQ(event_units("(progn (progn (defun a (x) x)) (defun b (x) x))"), 2u);
  EXPECT_EQ(event_units("(encapsulate () (defun a (x) x))"), 1u);
}

BackendConfig process_config(std::string exe) {
  BackendConfig c;
  c.executable = std::move(exe);
  c.startup_timeout = Millis(5000);
  c.form_timeout = Millis(5000);
  return c;
}

TEST(ProcessBackend, SpawnFailureForMissingExecutable) {
  try {
    start(process_config("/nonexistent/acl2"));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::SpawnFailure);
  }
}

TEST(ProcessBackend, StartupTimeoutWhenNoPromptAppears) {
  BackendConfig c = process_config("/bin/sleep");
  c.arguments = {"10"};
  c.startup_timeout = Millis(200);
  auto t0 = std::chrono::steady_clock::now();
  try {
    start(c);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::StartupTimeout);
  }
  EXPECT_LT(std::chrono::steady_clock::now() - t0, std::chrono::seconds(3));
}

TEST(ProcessBackend, DrivesTheFakeOverPipes) {
  auto b = start(process_config(PROOFPAD_FAKE_ACL2));
  EXPECT_EQ(b->submit("(defun f (x) x)").outcome, Outcome::Success);
  EXPECT_EQ(b->submit("(defun f (x) x)").outcome, Outcome::Failure);
  EXPECT_EQ(b->submit("(+ 40 2)").result.substr(0, 3), "42\n");
  EXPECT_EQ(b->undo_through(1).outcome, Outcome::Success);
  EXPECT_EQ(b->submit("(defun f (x) x)").outcome, Outcome::Success);
}

TEST(ProcessBackend, CrashAndTimeoutPoison) {
  auto b = start(process_config(PROOFPAD_FAKE_ACL2));
  EXPECT_EQ(b->submit("(proofpad-fake-crash)").outcome, Outcome::Crashed);
  EXPECT_TRUE(b->poisoned());

  BackendConfig c = process_config(PROOFPAD_FAKE_ACL2);
  c.form_timeout = Millis(300);
  auto h = start(c);
  EXPECT_EQ(h->submit("(proofpad-fake-hang)").outcome, Outcome::Timeout);
  EXPECT_THROW(h->submit("(+ 1 2)"), Error);
}

}  // namespace
}  // namespace proofpad
