#include <gtest/gtest.h>

#include <random>

#include "proofpad/indent.hpp"
#include "test_support.hpp"

namespace proofpad {
namespace {

std::vector<std::pair<TokenClass, std::string>> significant(std::string_view s) {
  std::vector<std::pair<TokenClass, std::string>> out;
  for (const auto& t : tokenize(s)) {
    if (t.cls != TokenClass::Whitespace) out.emplace_back(t.cls, t.lexeme);
  }
  return out;
}

TEST(IndentForNewline, Examples) {
  EXPECT_EQ(indent_for_newline("(defun f (x)"), 2u);
  EXPECT_EQ(indent_for_newline("(cons 1"), 6u);
  EXPECT_EQ(indent_for_newline(""), 0u);
}

TEST(IndentForNewline, HeadAloneFallsBackToOpenPlusOne) {
  EXPECT_EQ(indent_for_newline("(cons"), 1u);
  EXPECT_EQ(indent_for_newline("  (foo\n"), 3u);
  EXPECT_EQ(indent_for_newline("("), 1u);
}

TEST(IndentForNewline, NestedAndDataLists) {
  EXPECT_EQ(indent_for_newline("(defun f (x)\n  (if (endp x)"), 6u);
  EXPECT_EQ(indent_for_newline("(let ((a 1)"), 6u);
  EXPECT_EQ(indent_for_newline("'(1 2"), 2u);
  EXPECT_EQ(indent_for_newline("(foo '(a b) c"), 5u);
  EXPECT_EQ(indent_for_newline("(defsection stuff"), 2u);
  EXPECT_EQ(indent_for_newline("(f x) ; trailing comment"), 0u);
}

TEST(IndentForNewline, TabsExpandToWidthEight) {
  EXPECT_EQ(indent_for_newline("\t(cons 1"), 14u);
}

TEST(IndentForNewline, InsideStringIsZero) {
  EXPECT_EQ(indent_for_newline("(cw \"abc"), 0u);
}

TEST(Reindent, Examples) {
  EXPECT_EQ(reindent("(defun f (x)\nx)"), "(defun f (x)\n  x)");
  EXPECT_EQ(reindent("(cons 1\n2)"), "(cons 1\n      2)");
  std::string canonical = "(defun f (x)\n  (if (endp x)\n      0\n      1))\n";
  EXPECT_EQ(reindent(canonical), canonical);
}

TEST(Reindent, OnlyLinesInRegionChange) {
  std::string src = "(a\nb\nc)";
  // Region covering only the line "b\n" (offsets 3..5).
  EXPECT_EQ(reindent(src, Span{3, 5}), "(a\n b\nc)");
}

TEST(Reindent, TabsBecomeSpacesAndMultilineStringsUntouched) {
  EXPECT_EQ(reindent("(cons 1\n\t2)"), "(cons 1\n      2)");
  std::string s = "(cw \"line one\n   line two\"\n    x)";
  EXPECT_EQ(reindent(s), "(cw \"line one\n   line two\"\n    x)");
}

TEST(Reindent, BlankLinesKeepTheirWhitespace) {
  EXPECT_EQ(reindent("(a\n   \nb)"), "(a\n   \n b)");
}

TEST(ReindentCorpus, IdempotentAndTokenPreserving) {
  for (const auto& path : testing::corpus_files("good")) {
    std::string src = testing::read_file(path);
    std::string once = reindent(src);
    EXPECT_EQ(reindent(once), once) << path;
    EXPECT_EQ(significant(once), significant(src)) << path;
  }
}

TEST(ReindentProperty, RandomSources) {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 1500; ++i) {
    std::string src = testing::random_source(rng, 1 + i % 70);
    std::string once = reindent(src);
    ASSERT_EQ(reindent(once), once) << src;
    ASSERT_EQ(significant(once), significant(src)) << src;
  }
}

// The column offered for a fresh line equals what reindent assigns it.
TEST(ReindentProperty, NewlineIndentAgreesWithReindent) {
  auto files = testing::corpus_files("good");
  std::mt19937_64 rng(12);
  for (int i = 0; i < 300; ++i) files.push_back("random:" + std::to_string(i));
  for (const auto& name : files) {
    std::string src = name.starts_with("random:") ? testing::random_source(rng, 60) : testing::read_file(name);
    std::string canon = reindent(src);
    auto tokens = tokenize(canon);
    for (std::size_t k = 0; k + 1 < tokens.size(); ++k) {
      const Token& t = tokens[k];
      if (t.cls != TokenClass::Whitespace) continue;
      auto nl = t.lexeme.rfind('\n');
      if (nl == std::string::npos) continue;
      std::size_t line_start = t.span.start + nl + 1;
      std::size_t leading = t.span.end - line_start;
      std::string prefix = canon.substr(0, t.span.start + nl);
      ASSERT_EQ(indent_for_newline(prefix), leading) << name << " @" << line_start << "\n" << canon;
    }
  }
}

}  // namespace
}  // namespace proofpad
