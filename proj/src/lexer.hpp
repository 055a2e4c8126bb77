// Shared tokenizer for the DSL, information-term literals, proof files and
// table files. Internal header.

#ifndef CDL_SRC_LEXER_HPP
#define CDL_SRC_LEXER_HPP

#include <cctype>
#include <string>
#include <vector>

#include "cdl/syntax.hpp"

namespace cdl::detail {

enum class Tok {
  Ident,    // names and keywords
  Number,
  LParen,
  RParen,
  LBrace,
  RBrace,
  Colon,
  Comma,
  Dot,
  Semi,
  Arrow,    // ->
  Question, // ?
  Pipe,     // |
  Equals,   // =
  String,   // "..." (proof/composition files)
  End,
};

struct Token {
  Tok kind;
  std::string text;
  std::size_t line = 1;
  std::size_t col = 1;
};

class Lexer {
 public:
  explicit Lexer(const std::string& text) : s_(text) { next(); }

  const Token& peek() const { return tok_; }

  Token take() {
    Token t = tok_;
    next();
    return t;
  }

  bool at(Tok k) const { return tok_.kind == k; }
  bool at_ident(const char* word) const { return tok_.kind == Tok::Ident && tok_.text == word; }

  Token expect(Tok k, const char* what) {
    if (tok_.kind != k) fail(std::string("expected ") + what);
    return take();
  }

  [[noreturn]] void fail(const std::string& msg) const {
    throw parse_error(msg + ", found '" + (tok_.kind == Tok::End ? "<end>" : tok_.text) + "'",
                      tok_.line, tok_.col);
  }

 private:
  void next() {
    for (;;) {
      while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) advance();
      if (pos_ < s_.size() && s_[pos_] == '#') {
        while (pos_ < s_.size() && s_[pos_] != '\n') advance();
        continue;
      }
      break;
    }
    tok_.line = line_;
    tok_.col = col_;
    if (pos_ >= s_.size()) {
      tok_ = {Tok::End, "", line_, col_};
      return;
    }
    char c = s_[pos_];
    auto single = [this](Tok k, char ch) {
      tok_ = {k, std::string(1, ch), line_, col_};
      advance();
    };
    switch (c) {
      case '(': single(Tok::LParen, c); return;
      case ')': single(Tok::RParen, c); return;
      case '{': single(Tok::LBrace, c); return;
      case '}': single(Tok::RBrace, c); return;
      case ':': single(Tok::Colon, c); return;
      case ',': single(Tok::Comma, c); return;
      case '.': single(Tok::Dot, c); return;
      case ';': single(Tok::Semi, c); return;
      case '?': single(Tok::Question, c); return;
      case '|': single(Tok::Pipe, c); return;
      case '=': single(Tok::Equals, c); return;
      case '"': {
        std::size_t l = line_, co = col_;
        advance();
        std::string text;
        while (pos_ < s_.size() && s_[pos_] != '"') {
          text += s_[pos_];
          advance();
        }
        if (pos_ >= s_.size()) throw parse_error("unterminated string", l, co);
        advance();
        tok_ = {Tok::String, std::move(text), l, co};
        return;
      }
      case '-':
        if (pos_ + 1 < s_.size() && s_[pos_ + 1] == '>') {
          tok_ = {Tok::Arrow, "->", line_, col_};
          advance();
          advance();
          return;
        }
        throw parse_error("unexpected character '-'", line_, col_);
      default:
        break;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t l = line_, co = col_;
      std::string text;
      while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) {
        text += s_[pos_];
        advance();
      }
      tok_ = {Tok::Number, std::move(text), l, co};
      return;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t l = line_, co = col_;
      std::string text;
      while (pos_ < s_.size() &&
             (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) {
        text += s_[pos_];
        advance();
      }
      tok_ = {Tok::Ident, std::move(text), l, co};
      return;
    }
    throw parse_error(std::string("unexpected character '") + c + "'", line_, col_);
  }

  void advance() {
    if (s_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  const std::string& s_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
  std::size_t col_ = 1;
  Token tok_;
};

}  // namespace cdl::detail

#endif  // CDL_SRC_LEXER_HPP
