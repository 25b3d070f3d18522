#pragma once

#include <cctype>
#include <string>
#include <string_view>
#include <vector>

#include "tmkit/diagnostic.hpp"

namespace tmkit::dsl {

enum class Tok {
  ident,
  number,
  string,
  field,  // $name; text holds the name
  lbrace,
  rbrace,
  lparen,
  rparen,
  comma,
  colon,
  dot,
  assign,   // =
  arrow,    // ->
  squiggle, // ~>
  plus,
  minus,
  eq,
  ne,
  lt,
  le,
  gt,
  ge,
  end,
};

inline std::string_view describe(Tok t) {
  switch (t) {
    case Tok::ident: return "identifier";
    case Tok::number: return "number";
    case Tok::string: return "string";
    case Tok::field: return "$field";
    case Tok::lbrace: return "'{'";
    case Tok::rbrace: return "'}'";
    case Tok::lparen: return "'('";
    case Tok::rparen: return "')'";
    case Tok::comma: return "','";
    case Tok::colon: return "':'";
    case Tok::dot: return "'.'";
    case Tok::assign: return "'='";
    case Tok::arrow: return "'->'";
    case Tok::squiggle: return "'~>'";
    case Tok::plus: return "'+'";
    case Tok::minus: return "'-'";
    case Tok::eq: return "'=='";
    case Tok::ne: return "'!='";
    case Tok::lt: return "'<'";
    case Tok::le: return "'<='";
    case Tok::gt: return "'>'";
    case Tok::ge: return "'>='";
    case Tok::end: return "end of input";
  }
  return "?";
}

struct Token {
  Tok kind = Tok::end;
  std::string text;  // identifier, number digits, or decoded string
  SourcePos pos;
};

/// Thrown by the lexer and parsers; carries a single positioned error.
struct ParseFailure {
  Diagnostic diag;
};

/// Splits source text into tokens. `#` starts a comment running to end of
/// line. Columns count bytes. Throws ParseFailure (E001) on bad input.
class Lexer {
 public:
  Lexer(std::string_view text, std::string file) : text_(text), file_(std::move(file)) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    while (true) {
      skip_space();
      SourcePos start = here();
      if (i_ >= text_.size()) {
        out.push_back({Tok::end, {}, start});
        return out;
      }
      char c = text_[i_];
      if (std::isalpha(static_cast<unsigned char>(c))) {
        out.push_back({Tok::ident, word(), start});
      } else if (std::isdigit(static_cast<unsigned char>(c))) {
        out.push_back({Tok::number, number(start), start});
      } else if (c == '"') {
        out.push_back({Tok::string, string(start), start});
      } else if (c == '$') {
        advance();
        if (i_ >= text_.size() || !std::isalpha(static_cast<unsigned char>(text_[i_]))) {
          fail(start, "'$' must be followed by a field name");
        }
        out.push_back({Tok::field, word(), start});
      } else {
        out.push_back({punct(start), {}, start});
      }
    }
  }

 private:
  SourcePos here() const { return {file_, line_, col_}; }

  void advance() {
    if (text_[i_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++i_;
  }

  bool peek_is(std::size_t ahead, char c) const { return i_ + ahead < text_.size() && text_[i_ + ahead] == c; }

  [[noreturn]] void fail(const SourcePos& pos, std::string msg) {
    throw ParseFailure{make_error("E001", std::move(msg), pos)};
  }

  void skip_space() {
    while (i_ < text_.size()) {
      char c = text_[i_];
      if (c == '#') {
        while (i_ < text_.size() && text_[i_] != '\n') advance();
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else {
        return;
      }
    }
  }

  std::string word() {
    std::string out;
    while (i_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[i_])) || text_[i_] == '_')) {
      out += text_[i_];
      advance();
    }
    return out;
  }

  std::string number(const SourcePos& start) {
    std::string out;
    while (i_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[i_]))) {
      out += text_[i_];
      advance();
    }
    if (peek_is(0, '.') && i_ + 1 < text_.size() && std::isdigit(static_cast<unsigned char>(text_[i_ + 1]))) {
      out += '.';
      advance();
      std::size_t digits = 0;
      while (i_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[i_]))) {
        out += text_[i_];
        advance();
        ++digits;
      }
      if (digits > 2) fail(start, "number " + out + " has more than two fractional digits");
    }
    if (i_ < text_.size() && (std::isalpha(static_cast<unsigned char>(text_[i_])) || text_[i_] == '_')) {
      fail(start, "malformed number");
    }
    return out;
  }

  std::string string(const SourcePos& start) {
    advance();  // opening quote
    std::string out;
    while (true) {
      if (i_ >= text_.size() || text_[i_] == '\n') fail(start, "unterminated string");
      char c = text_[i_];
      if (c == '"') {
        advance();
        return out;
      }
      if (c == '\\') {
        SourcePos esc = here();
        advance();
        if (i_ >= text_.size()) fail(start, "unterminated string");
        switch (text_[i_]) {
          case '"': out += '"'; break;
          case '\\': out += '\\'; break;
          case 'n': out += '\n'; break;
          case 't': out += '\t'; break;
          default: fail(esc, std::string("unknown escape \\") + text_[i_]);
        }
        advance();
        continue;
      }
      out += c;
      advance();
    }
  }

  Tok punct(const SourcePos& start) {
    char c = text_[i_];
    auto two = [&](Tok t) {
      advance();
      advance();
      return t;
    };
    auto one = [&](Tok t) {
      advance();
      return t;
    };
    switch (c) {
      case '{': return one(Tok::lbrace);
      case '}': return one(Tok::rbrace);
      case '(': return one(Tok::lparen);
      case ')': return one(Tok::rparen);
      case ',': return one(Tok::comma);
      case ':': return one(Tok::colon);
      case '.': return one(Tok::dot);
      case '+': return one(Tok::plus);
      case '-': return peek_is(1, '>') ? two(Tok::arrow) : one(Tok::minus);
      case '~':
        if (peek_is(1, '>')) return two(Tok::squiggle);
        break;
      case '=': return peek_is(1, '=') ? two(Tok::eq) : one(Tok::assign);
      case '!':
        if (peek_is(1, '=')) return two(Tok::ne);
        break;
      case '<': return peek_is(1, '=') ? two(Tok::le) : one(Tok::lt);
      case '>': return peek_is(1, '=') ? two(Tok::ge) : one(Tok::gt);
      default: break;
    }
    std::string shown = std::isprint(static_cast<unsigned char>(c)) ? std::string(1, c) : "byte " + std::to_string(static_cast<unsigned char>(c));
    fail(start, "unexpected character '" + shown + "'");
  }

  std::string_view text_;
  std::string file_;
  std::size_t i_ = 0;
  int line_ = 1;
  int col_ = 1;
};

}  // namespace tmkit::dsl
