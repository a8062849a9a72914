#include <gtest/gtest.h>

#include <random>

#include "proofpad/lex.hpp"
#include "test_support.hpp"

namespace proofpad {
namespace {

std::vector<std::pair<TokenClass, std::string>> significant(std::string_view src) {
  std::vector<std::pair<TokenClass, std::string>> out;
  for (const auto& t : tokenize(src)) {
    if (t.cls != TokenClass::Whitespace) out.emplace_back(t.cls, t.lexeme);
  }
  return out;
}

TEST(Tokenize, DefunSequence) {
  auto toks = tokenize("(defun f (x) x)");
  std::vector<std::pair<TokenClass, std::string>> got;
  for (const auto& t : toks) got.emplace_back(t.cls, t.lexeme);
  std::vector<std::pair<TokenClass, std::string>> want = {
      {TokenClass::LParen, "("},  {TokenClass::Event, "defun"}, {TokenClass::Whitespace, " "},
      {TokenClass::Symbol, "f"},  {TokenClass::Whitespace, " "}, {TokenClass::LParen, "("},
      {TokenClass::Symbol, "x"},  {TokenClass::RParen, ")"},    {TokenClass::Whitespace, " "},
      {TokenClass::Symbol, "x"},  {TokenClass::RParen, ")"}};
  EXPECT_EQ(got, want);
}

TEST(Tokenize, LineComment) {
  auto toks = tokenize("; a comment\n");
  ASSERT_EQ(toks.size(), 2u);
  EXPECT_EQ(toks[0].cls, TokenClass::Comment);
  EXPECT_EQ(toks[0].lexeme, "; a comment");
  EXPECT_EQ(toks[1].cls, TokenClass::Whitespace);
  EXPECT_EQ(toks[1].lexeme, "\n");
}

TEST(Tokenize, Literals) {
  std::vector<std::pair<TokenClass, std::string>> want = {
      {TokenClass::LParen, "("},           {TokenClass::BuiltinFunction, "cons"},
      {TokenClass::Rational, "1/2"},       {TokenClass::Character, "#\\a"},
      {TokenClass::String, "\"s\""},       {TokenClass::RParen, ")"}};
  EXPECT_EQ(significant("(cons 1/2 #\\a \"s\")"), want);
}

TEST(Tokenize, NumberForms) {
  EXPECT_EQ(significant("42")[0].first, TokenClass::Number);
  EXPECT_EQ(significant("-42")[0].first, TokenClass::Number);
  EXPECT_EQ(significant("+7")[0].first, TokenClass::Number);
  EXPECT_EQ(significant("-3/4")[0].first, TokenClass::Rational);
  EXPECT_EQ(significant("#b101")[0].first, TokenClass::Number);
  EXPECT_EQ(significant("#o17")[0].first, TokenClass::Number);
  EXPECT_EQ(significant("#xFF")[0].first, TokenClass::Number);
  EXPECT_EQ(significant("#x-1/A")[0].first, TokenClass::Rational);
  EXPECT_EQ(significant("#b102")[0].first, TokenClass::Error);
  EXPECT_EQ(significant("1/0")[0].first, TokenClass::Error);
  EXPECT_EQ(significant("1.5")[0].first, TokenClass::Error);
}

TEST(Tokenize, SymbolsThatLookNumeric) {
  EXPECT_EQ(significant("1+")[0].first, TokenClass::BuiltinMacro);
  EXPECT_EQ(significant("1-")[0].first, TokenClass::BuiltinMacro);
  EXPECT_EQ(significant("+")[0].first, TokenClass::BuiltinMacro);
  EXPECT_EQ(significant("2nd-thing")[0].first, TokenClass::Symbol);
}

TEST(Tokenize, Characters) {
  EXPECT_EQ(significant("#\\Space")[0].first, TokenClass::Character);
  EXPECT_EQ(significant("#\\newline")[0].first, TokenClass::Character);
  EXPECT_EQ(significant("#\\(")[0].first, TokenClass::Character);
  EXPECT_EQ(significant("#\\\xc3\xa9")[0].first, TokenClass::Character);
  EXPECT_EQ(significant("#\\bogus")[0].first, TokenClass::Error);
  EXPECT_EQ(significant("#\\")[0].first, TokenClass::Error);
}

TEST(Tokenize, StringsAndEscapes) {
  auto toks = significant("\"a \\\"quoted\\\" word\"");
  ASSERT_EQ(toks.size(), 1u);
  EXPECT_EQ(toks[0].first, TokenClass::String);
  auto open = significant("(f \"never closed");
  EXPECT_EQ(open.back().first, TokenClass::Error);
}

TEST(Tokenize, QuotePunctuationIsSymbolClass) {
  auto toks = significant("'(a `(b ,c ,@d))");
  EXPECT_EQ(toks[0], (std::pair<TokenClass, std::string>{TokenClass::Symbol, "'"}));
  EXPECT_EQ(toks[3], (std::pair<TokenClass, std::string>{TokenClass::Symbol, "`"}));
  EXPECT_EQ(toks[6], (std::pair<TokenClass, std::string>{TokenClass::Symbol, ","}));
  EXPECT_EQ(toks[8], (std::pair<TokenClass, std::string>{TokenClass::Symbol, ",@"}));
}

TEST(Tokenize, KeywordsAndBlockComments) {
  auto toks = significant(":doc #| outer #| inner |# |# :u");
  ASSERT_EQ(toks.size(), 3u);
  EXPECT_EQ(toks[0].first, TokenClass::Keyword);
  EXPECT_EQ(toks[1].first, TokenClass::Comment);
  EXPECT_EQ(toks[2].first, TokenClass::Keyword);
  EXPECT_EQ(significant("#| open")[0].first, TokenClass::Error);
}

TEST(Tokenize, CaseInsensitiveTableLookup) {
  EXPECT_EQ(significant("DEFUN")[0].first, TokenClass::Event);
  EXPECT_EQ(significant("ACL2::Cons")[0].first, TokenClass::BuiltinFunction);
  EXPECT_EQ(significant("|defun|")[0].first, TokenClass::Symbol);
}

TEST(Tokenize, EmptyInput) { EXPECT_TRUE(tokenize("").empty()); }

TEST(Classify, TableKinds) {
  const auto& table = BuiltinTable::standard();
  EXPECT_EQ(classify("defthm", table), TokenClass::Event);
  EXPECT_EQ(classify("max", table), TokenClass::BuiltinFunction);
  EXPECT_EQ(classify("my-fn", table), TokenClass::Symbol);
  EXPECT_EQ(classify("let", table), TokenClass::BuiltinMacro);
}

TEST(BuiltinTable, ShippedTableIsConsistent) {
  const auto& table = BuiltinTable::standard();
  EXPECT_GT(table.size(), 100u);
  for (const auto& [name, entry] : table.entries()) {
    if (entry.arity.max) EXPECT_LE(entry.arity.min, *entry.arity.max) << name;
  }
  const BuiltinEntry* cons = table.find("cons");
  ASSERT_NE(cons, nullptr);
  EXPECT_EQ(cons->arity.min, 2);
  EXPECT_EQ(cons->arity.max, 2);
}

TEST(BuiltinTable, DataFileMatchesEmbeddedCopy) {
  auto from_file = BuiltinTable::load_file(testing::data_path("../data/builtins.tsv"));
  EXPECT_EQ(from_file.size(), BuiltinTable::standard().size());
}

TEST(BuiltinTable, RejectsDuplicatesAndBadArity) {
  EXPECT_THROW(BuiltinTable::parse("a\tevent\t1\t1\tbody\nA\tmacro\t0\t*\tcall\n"), Error);
  EXPECT_THROW(BuiltinTable::parse("a\tevent\t3\t1\tbody\n"), Error);
  EXPECT_THROW(BuiltinTable::parse("a\tthing\t1\t1\tbody\n"), Error);
  EXPECT_THROW(BuiltinTable::parse("a\tevent\t1\n"), Error);
  auto t = BuiltinTable::parse("# header\n\nfoo\tfunction\t1\t*\tcall\n");
  ASSERT_NE(t.find("FOO"), nullptr);
  EXPECT_FALSE(t.find("foo")->arity.max.has_value());
}

// Lossless, contiguous, non-empty, deterministic over random inputs.
TEST(TokenizeProperty, LosslessAndContiguous) {
  std::mt19937_64 rng(20260101);
  for (int iter = 0; iter < 2000; ++iter) {
    std::string src = testing::random_source(rng, 1 + iter % 60);
    auto toks = tokenize(src);
    std::string joined;
    std::size_t expect_start = 0;
    for (const auto& t : toks) {
      ASSERT_LT(t.span.start, t.span.end);
      ASSERT_EQ(t.span.start, expect_start);
      ASSERT_EQ(src.substr(t.span.start, t.span.size()), t.lexeme);
      expect_start = t.span.end;
      joined += t.lexeme;
    }
    ASSERT_EQ(joined, src);
    ASSERT_EQ(toks, tokenize(src));
  }
}

}  // namespace
}  // namespace proofpad
