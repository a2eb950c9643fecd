#pragma once

#include <cctype>
#include <cstdlib>
#include <string>
#include <string_view>
#include <vector>

#include "geoinf/error.hpp"

namespace geoinf {

enum class TokenKind { Number, Ident, String, Punct, End };

struct Token {
  TokenKind kind;
  std::string text;  // identifier / string body / punctuation char
  double number = 0.0;
  std::size_t offset = 0;
};

/// Splits text into tokens. `#` starts a comment that runs to end of line.
inline std::vector<Token> tokenize(std::string_view src) {
  std::vector<Token> out;
  std::size_t i = 0;
  const std::size_t n = src.size();
  while (i < n) {
    const char c = src[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    if (c == '#') {
      while (i < n && src[i] != '\n') ++i;
      continue;
    }
    const std::size_t start = i;
    if (std::isdigit(static_cast<unsigned char>(c)) ||
        (c == '.' && i + 1 < n && std::isdigit(static_cast<unsigned char>(src[i + 1])))) {
      while (i < n && std::isdigit(static_cast<unsigned char>(src[i]))) ++i;
      if (i < n && src[i] == '.') {
        ++i;
        while (i < n && std::isdigit(static_cast<unsigned char>(src[i]))) ++i;
      }
      if (i < n && (src[i] == 'e' || src[i] == 'E')) {
        std::size_t j = i + 1;
        if (j < n && (src[j] == '+' || src[j] == '-')) ++j;
        if (j < n && std::isdigit(static_cast<unsigned char>(src[j]))) {
          i = j;
          while (i < n && std::isdigit(static_cast<unsigned char>(src[i]))) ++i;
        }
      }
      Token t{TokenKind::Number, std::string(src.substr(start, i - start)), 0.0, start};
      t.number = std::strtod(t.text.c_str(), nullptr);
      out.push_back(std::move(t));
      continue;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      while (i < n && (std::isalnum(static_cast<unsigned char>(src[i])) || src[i] == '_')) ++i;
      out.push_back({TokenKind::Ident, std::string(src.substr(start, i - start)), 0.0, start});
      continue;
    }
    if (c == '"') {
      ++i;
      while (i < n && src[i] != '"') ++i;
      if (i >= n) throw ParseError(start, {"\""}, "unterminated string");
      out.push_back({TokenKind::String, std::string(src.substr(start + 1, i - start - 1)), 0.0, start});
      ++i;
      continue;
    }
    static constexpr std::string_view kPunct = "+-*/^(),;{}=";
    if (kPunct.find(c) != std::string_view::npos) {
      out.push_back({TokenKind::Punct, std::string(1, c), 0.0, start});
      ++i;
      continue;
    }
    throw ParseError(start, {}, std::string("unexpected character '") + c + "'");
  }
  out.push_back({TokenKind::End, "", 0.0, n});
  return out;
}

/// Cursor over a token vector shared by the expression and scene parsers.
class TokenStream {
 public:
  explicit TokenStream(std::vector<Token> toks) : toks_(std::move(toks)) {}

  const Token& peek(std::size_t ahead = 0) const {
    const std::size_t k = pos_ + ahead;
    return k < toks_.size() ? toks_[k] : toks_.back();
  }
  const Token& next() {
    const Token& t = peek();
    if (pos_ < toks_.size() - 1) ++pos_;
    return t;
  }
  bool at_end() const { return peek().kind == TokenKind::End; }

  bool is_punct(char c) const {
    return peek().kind == TokenKind::Punct && peek().text[0] == c;
  }
  bool is_ident(std::string_view name) const {
    return peek().kind == TokenKind::Ident && peek().text == name;
  }
  bool accept_punct(char c) {
    if (!is_punct(c)) return false;
    next();
    return true;
  }
  void expect_punct(char c) {
    if (!accept_punct(c)) fail({std::string(1, c)});
  }
  void expect_ident(std::string_view name) {
    if (!is_ident(name)) fail({std::string(name)});
    next();
  }
  std::string expect_any_ident() {
    if (peek().kind != TokenKind::Ident) fail({"identifier"});
    return next().text;
  }

  [[noreturn]] void fail(std::vector<std::string> expected) const {
    const Token& t = peek();
    const std::string got = t.kind == TokenKind::End ? "end of input" : "'" + t.text + "'";
    throw ParseError(t.offset, std::move(expected), "unexpected " + got);
  }

 private:
  std::vector<Token> toks_;
  std::size_t pos_ = 0;
};

}  // namespace geoinf
