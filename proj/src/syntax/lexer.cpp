#include "slicefix/syntax.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <unordered_set>

namespace slicefix {

ParseError::ParseError(int line, int col, const std::string &message)
    : std::runtime_error(std::to_string(line) + ":" + std::to_string(col) + ": " + message),
      line_(line), col_(col), message_(message) {}

namespace {

const std::unordered_set<std::string_view> &keywords() {
  static const std::unordered_set<std::string_view> set = {
      "var",    "let",    "const",  "function", "return",     "if",     "else",   "for",
      "while",  "break",  "continue", "throw",  "import",     "export", "default", "new",
      "this",   "true",   "false",  "null",     "typeof",     "void",   "delete", "instanceof",
      "in",     "class",  "do",     "switch",   "case",       "try",    "catch",  "finally",
      "yield",  "super",  "with",   "debugger", "enum",       "await",
  };
  return set;
}

// Longest match first.
constexpr std::array<std::string_view, 52> kPunctuators = {
    ">>>=", "...", "===", "!==", "**=", "<<=", ">>=", ">>>", "&&=", "||=", "?\?=",
    "=>",   "==",  "!=",  "<=",  ">=",  "&&",  "||",  "??",  "?.",  "++",  "--",
    "+=",   "-=",  "*=",  "/=",  "%=",  "&=",  "|=",  "^=",  "**",  "<<",  ">>",
    "{",    "}",   "(",   ")",   "[",   "]",   ";",   ",",   "<",   ">",   "+",
    "-",    "*",   "/",   "%",   "&",   "|",   "^",   "!",
};
constexpr std::array<std::string_view, 5> kSinglePunctuators = {"~", "?", ":", "=", "."};

bool ident_start(unsigned char c) {
  return std::isalpha(c) || c == '_' || c == '$' || c >= 0x80;
}
bool ident_part(unsigned char c) { return ident_start(c) || std::isdigit(c); }

class Lexer {
public:
  explicit Lexer(std::string_view text) : text_(text) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    for (;;) {
      Token tok;
      bool newline = false;
      tok.leading_trivia = skip_trivia(newline);
      tok.newline_before = newline;
      tok.span.line = line_;
      tok.span.col = col_;
      if (pos_ >= text_.size()) {
        tok.type = TokenType::EndOfFile;
        tok.span.end_line = line_;
        tok.span.end_col = col_;
        out.push_back(std::move(tok));
        return out;
      }
      lex_one(tok);
      tok.span.end_line = line_;
      tok.span.end_col = col_;
      out.push_back(std::move(tok));
    }
  }

private:
  char peek(std::size_t ahead = 0) const {
    return pos_ + ahead < text_.size() ? text_[pos_ + ahead] : '\0';
  }

  void advance() {
    if (text_[pos_] == '\n') {
      ++line_;
      col_ = 0;
    } else {
      ++col_;
    }
    ++pos_;
  }

  [[noreturn]] void fail(const std::string &msg) const { throw ParseError(line_, col_, msg); }

  std::string skip_trivia(bool &newline) {
    std::size_t start = pos_;
    while (pos_ < text_.size()) {
      char c = peek();
      if (c == '\n') {
        newline = true;
        advance();
      } else if (c == ' ' || c == '\t' || c == '\r' || c == '\f' || c == '\v') {
        advance();
      } else if (c == '/' && peek(1) == '/') {
        while (pos_ < text_.size() && peek() != '\n') advance();
      } else if (c == '/' && peek(1) == '*') {
        int line = line_, col = col_;
        advance();
        advance();
        while (pos_ < text_.size() && !(peek() == '*' && peek(1) == '/')) {
          if (peek() == '\n') newline = true;
          advance();
        }
        if (pos_ >= text_.size()) throw ParseError(line, col, "unterminated comment");
        advance();
        advance();
      } else if (static_cast<unsigned char>(c) == 0xEF && peek(1) == '\xBB' && peek(2) == '\xBF') {
        advance();
        advance();
        advance();
      } else {
        break;
      }
    }
    return std::string(text_.substr(start, pos_ - start));
  }

  void lex_one(Token &tok) {
    std::size_t start = pos_;
    unsigned char c = static_cast<unsigned char>(peek());
    if (ident_start(c)) {
      while (pos_ < text_.size() && ident_part(static_cast<unsigned char>(peek()))) advance();
      tok.text = std::string(text_.substr(start, pos_ - start));
      tok.type = keywords().contains(tok.text) ? TokenType::Keyword : TokenType::Identifier;
      return;
    }
    if (std::isdigit(c) || (c == '.' && std::isdigit(static_cast<unsigned char>(peek(1))))) {
      lex_number();
      tok.type = TokenType::Number;
      tok.text = std::string(text_.substr(start, pos_ - start));
      return;
    }
    if (c == '"' || c == '\'') {
      lex_string(static_cast<char>(c));
      tok.type = TokenType::String;
      tok.text = std::string(text_.substr(start, pos_ - start));
      return;
    }
    if (c == '`') {
      lex_template();
      tok.type = TokenType::Template;
      tok.text = std::string(text_.substr(start, pos_ - start));
      return;
    }
    for (auto p : kPunctuators) {
      if (text_.substr(pos_, p.size()) == p) {
        // `?.` followed by a digit is a conditional, not optional chaining.
        if (p == "?." && std::isdigit(static_cast<unsigned char>(peek(2)))) continue;
        for (std::size_t i = 0; i < p.size(); ++i) advance();
        tok.type = TokenType::Punctuator;
        tok.text = std::string(p);
        return;
      }
    }
    for (auto p : kSinglePunctuators) {
      if (text_.substr(pos_, 1) == p) {
        advance();
        tok.type = TokenType::Punctuator;
        tok.text = std::string(p);
        return;
      }
    }
    fail(std::string("unexpected character '") + static_cast<char>(c) + "'");
  }

  void lex_number() {
    if (peek() == '0' && (peek(1) == 'x' || peek(1) == 'X' || peek(1) == 'b' || peek(1) == 'B' ||
                          peek(1) == 'o' || peek(1) == 'O')) {
      advance();
      advance();
      while (std::isxdigit(static_cast<unsigned char>(peek())) || peek() == '_') advance();
      return;
    }
    while (std::isdigit(static_cast<unsigned char>(peek())) || peek() == '_') advance();
    if (peek() == '.') {
      advance();
      while (std::isdigit(static_cast<unsigned char>(peek())) || peek() == '_') advance();
    }
    if (peek() == 'e' || peek() == 'E') {
      advance();
      if (peek() == '+' || peek() == '-') advance();
      if (!std::isdigit(static_cast<unsigned char>(peek()))) fail("malformed exponent");
      while (std::isdigit(static_cast<unsigned char>(peek()))) advance();
    }
    if (peek() == 'n') advance();
    if (ident_start(static_cast<unsigned char>(peek()))) fail("identifier directly after number");
  }

  void lex_string(char quote) {
    int line = line_, col = col_;
    advance();
    while (pos_ < text_.size() && peek() != quote) {
      if (peek() == '\n') throw ParseError(line, col, "unterminated string");
      if (peek() == '\\') {
        advance();
        if (pos_ >= text_.size()) break;
      }
      advance();
    }
    if (pos_ >= text_.size()) throw ParseError(line, col, "unterminated string");
    advance();
  }

  // Substitutions are kept raw inside the lexeme; only brace depth is tracked.
  void lex_template() {
    int line = line_, col = col_;
    advance();
    int depth = 0;
    while (pos_ < text_.size()) {
      char c = peek();
      if (c == '\\') {
        advance();
        if (pos_ < text_.size()) advance();
        continue;
      }
      if (depth == 0 && c == '`') {
        advance();
        return;
      }
      if (c == '$' && peek(1) == '{') {
        advance();
        ++depth;
      } else if (depth > 0 && c == '{') {
        ++depth;
      } else if (depth > 0 && c == '}') {
        --depth;
      }
      advance();
    }
    throw ParseError(line, col, "unterminated template literal");
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int col_ = 0;
};

} // namespace

std::vector<Token> tokenize(std::string_view text) { return Lexer(text).run(); }

} // namespace slicefix
