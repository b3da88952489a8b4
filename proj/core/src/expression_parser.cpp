#include "unitlab/expression_parser.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <optional>

namespace unitlab {

namespace {

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.'; }

enum class Tok { number, ident, lparen, rparen, plus, minus, star, at, comma, end };

struct Token {
  Tok kind = Tok::end;
  std::size_t pos = 0;  // offset into the text
  std::string_view text;
  Complex value;        // numbers; imaginary when suffixed by 'i'
};

class Lexer {
 public:
  Lexer(std::string_view text, std::size_t line, std::size_t column)
      : text_(text), line_(line), column_(column) {}

  [[noreturn]] void fail(std::size_t pos, const std::string& message) const {
    throw ParseError(message, line_, column_ + pos);
  }

  std::vector<Token> run() {
    std::vector<Token> out;
    std::size_t i = 0;
    while (i < text_.size()) {
      const char c = text_[i];
      if (std::isspace(static_cast<unsigned char>(c))) {
        ++i;
        continue;
      }
      Token t;
      t.pos = i;
      if (std::isdigit(static_cast<unsigned char>(c)) || (c == '.' && i + 1 < text_.size() &&
                                                          std::isdigit(static_cast<unsigned char>(text_[i + 1])))) {
        double v = 0.0;
        const auto [ptr, ec] = std::from_chars(text_.data() + i, text_.data() + text_.size(), v);
        if (ec != std::errc()) fail(i, "malformed number");
        std::size_t end = static_cast<std::size_t>(ptr - text_.data());
        t.value = v;
        if (end < text_.size() && text_[end] == 'i' &&
            (end + 1 == text_.size() || !ident_char(text_[end + 1]))) {
          t.value = Complex(0.0, v);
          ++end;
        }
        t.kind = Tok::number;
        t.text = text_.substr(i, end - i);
        i = end;
      } else if (ident_start(c)) {
        std::size_t end = i;
        while (end < text_.size() && ident_char(text_[end])) ++end;
        t.kind = Tok::ident;
        t.text = text_.substr(i, end - i);
        i = end;
      } else {
        switch (c) {
          case '(': t.kind = Tok::lparen; break;
          case ')': t.kind = Tok::rparen; break;
          case '+': t.kind = Tok::plus; break;
          case '-': t.kind = Tok::minus; break;
          case '*': t.kind = Tok::star; break;
          case '@': t.kind = Tok::at; break;
          case ',': t.kind = Tok::comma; break;
          default: fail(i, std::string("unexpected character '") + c + "'");
        }
        t.text = text_.substr(i, 1);
        ++i;
      }
      out.push_back(t);
    }
    Token end;
    end.kind = Tok::end;
    end.pos = text_.size();
    out.push_back(end);
    return out;
  }

 private:
  std::string_view text_;
  std::size_t line_, column_;
};

struct Factor {
  enum class Kind { scalar, matrix, unit, twist } kind;
  std::size_t pos;
  Matrix value;                    // scalar * 1, matrix, or twist generator
  std::vector<Segment> segments;   // unit
};

class Parser {
 public:
  Parser(std::string_view text, const ExpressionContext& ctx, std::size_t line, std::size_t column)
      : lexer_(text, line, column), ctx_(ctx), tokens_(lexer_.run()) {}

  UnitExpression parse() {
    UnitExpression out(ctx_.dim);
    double sign = 1.0;
    if (peek().kind == Tok::plus || peek().kind == Tok::minus) {
      sign = next().kind == Tok::minus ? -1.0 : 1.0;
    }
    for (;;) {
      out.add(term(sign));
      if (peek().kind == Tok::plus || peek().kind == Tok::minus) {
        sign = next().kind == Tok::minus ? -1.0 : 1.0;
        continue;
      }
      if (peek().kind != Tok::end) fail(peek().pos, "expected '+', '-' or end of expression");
      break;
    }
    return out;
  }

 private:
  const Token& peek() const { return tokens_[at_]; }
  const Token& next() { return tokens_[at_++]; }
  [[noreturn]] void fail(std::size_t pos, const std::string& m) const { lexer_.fail(pos, m); }

  const Token& expect(Tok kind, const char* what) {
    if (peek().kind != kind) fail(peek().pos, std::string("expected ") + what);
    return next();
  }

  bool is_label(std::string_view name) const {
    return std::find(ctx_.labels.begin(), ctx_.labels.end(), name) != ctx_.labels.end();
  }

  const Matrix& matrix(const Token& t) const {
    auto it = ctx_.matrices.find(t.text);
    if (it == ctx_.matrices.end()) fail(t.pos, "unknown matrix '" + std::string(t.text) + "'");
    if (it->second.rows() != ctx_.dim || it->second.cols() != ctx_.dim)
      fail(t.pos, "matrix '" + std::string(t.text) + "' is not " + std::to_string(ctx_.dim) + "x" +
                      std::to_string(ctx_.dim));
    return it->second;
  }

  Complex signed_number() {
    double s = 1.0;
    if (peek().kind == Tok::plus || peek().kind == Tok::minus) s = next().kind == Tok::minus ? -1.0 : 1.0;
    return s * expect(Tok::number, "a number").value;
  }

  Factor factor() {
    const Token& t = next();
    Factor f{Factor::Kind::scalar, t.pos, {}, {}};
    const Matrix one = identity_element(ctx_.dim);
    switch (t.kind) {
      case Tok::number:
        f.value = t.value * one;
        return f;
      case Tok::lparen: {
        Complex v = signed_number();
        while (peek().kind == Tok::plus || peek().kind == Tok::minus) v += signed_number();
        expect(Tok::rparen, "')'");
        f.value = v * one;
        return f;
      }
      case Tok::ident:
        break;
      default:
        fail(t.pos, "expected a factor");
    }
    if (t.text == "expm") {
      expect(Tok::lparen, "'(' after expm");
      const Token& a = expect(Tok::ident, "'t' or a matrix name");
      expect(Tok::star, "'*'");
      const Token& b = expect(Tok::ident, "'t' or a matrix name");
      expect(Tok::rparen, "')'");
      if (a.text == "t" && b.text != "t") {
        f.value = matrix(b);
      } else if (b.text == "t" && a.text != "t") {
        f.value = matrix(a);
      } else {
        fail(a.pos, "expm takes t*MATRIX");
      }
      f.kind = Factor::Kind::twist;
      return f;
    }
    if (t.text == "concat") {
      expect(Tok::lparen, "'(' after concat");
      for (;;) {
        const Token& label = expect(Tok::ident, "a unit label");
        if (!is_label(label.text)) fail(label.pos, "unknown unit label '" + std::string(label.text) + "'");
        expect(Tok::at, "'@' and a fraction");
        const Token& frac = expect(Tok::number, "a fraction");
        if (frac.value.imag() != 0.0 || !(frac.value.real() > 0.0))
          fail(frac.pos, "segment fractions must be positive reals");
        f.segments.push_back({std::string(label.text), frac.value.real()});
        if (peek().kind == Tok::comma) {
          next();
          continue;
        }
        expect(Tok::rparen, "',' or ')'");
        break;
      }
      double total = 0.0;
      for (const auto& s : f.segments) total += s.fraction;
      if (std::abs(total - 1.0) > 1e-12) fail(t.pos, "concat fractions must sum to 1");
      f.kind = Factor::Kind::unit;
      return f;
    }
    if (is_label(t.text)) {
      f.kind = Factor::Kind::unit;
      f.segments.push_back({std::string(t.text), 1.0});
      return f;
    }
    if (t.text == "t") fail(t.pos, "'t' may only appear inside expm(t*MATRIX)");
    f.kind = Factor::Kind::matrix;
    f.value = matrix(t);
    return f;
  }

  Term term(double sign) {
    const std::size_t start = peek().pos;
    std::vector<Factor> fs{factor()};
    while (peek().kind == Tok::star) {
      next();
      fs.push_back(factor());
    }
    std::optional<std::size_t> unit;
    for (std::size_t i = 0; i < fs.size(); ++i) {
      if (fs[i].kind != Factor::Kind::unit) continue;
      if (unit) fail(fs[i].pos, "a term may contain only one unit");
      unit = i;
    }
    if (!unit) fail(start, "term has no unit label");

    Term out;
    out.left = sign * identity_element(ctx_.dim);
    out.right = identity_element(ctx_.dim);
    out.twist = Matrix::Zero(ctx_.dim, ctx_.dim);
    out.segments = fs[*unit].segments;
    for (std::size_t i = 0; i < fs.size(); ++i) {
      if (i == *unit) continue;
      if (fs[i].kind == Factor::Kind::twist) {
        if (out.side != TwistSide::none) fail(fs[i].pos, "a term may contain only one expm");
        if (i + 1 == *unit) {
          out.side = TwistSide::left;
        } else if (i == *unit + 1) {
          out.side = TwistSide::right;
        } else {
          fail(fs[i].pos, "expm must be adjacent to the unit");
        }
        out.twist = fs[i].value;
        continue;
      }
      if (i < *unit)
        out.left = out.left * fs[i].value;
      else
        out.right = out.right * fs[i].value;
    }
    return out;
  }

  Lexer lexer_;
  const ExpressionContext& ctx_;
  std::vector<Token> tokens_;
  std::size_t at_ = 0;
};

}  // namespace

UnitExpression parse_expression(std::string_view text, const ExpressionContext& context,
                                std::size_t line, std::size_t column) {
  return Parser(text, context, line, column).parse();
}

bool is_identifier(std::string_view text) {
  if (text.empty() || !ident_start(text.front())) return false;
  return std::all_of(text.begin(), text.end(), ident_char);
}

Complex parse_complex(std::string_view text) {
  auto trim = [](std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
  };
  std::string_view s = trim(text);
  if (s.size() >= 2 && s.front() == '(' && s.back() == ')') s = trim(s.substr(1, s.size() - 2));
  if (s.empty()) throw ParseError("empty number");

  Complex out = 0.0;
  std::size_t i = 0;
  bool first = true;
  while (i < s.size()) {
    double sign = 1.0;
    if (s[i] == '+' || s[i] == '-') {
      sign = s[i] == '-' ? -1.0 : 1.0;
      ++i;
    } else if (!first) {
      throw ParseError("malformed complex number '" + std::string(text) + "'");
    }
    while (i < s.size() && s[i] == ' ') ++i;
    double v = 1.0;
    const auto [ptr, ec] = std::from_chars(s.data() + i, s.data() + s.size(), v);
    const bool have_digits = ec == std::errc();
    if (have_digits) i = static_cast<std::size_t>(ptr - s.data());
    if (i < s.size() && s[i] == 'i') {
      out += Complex(0.0, sign * v);
      ++i;
    } else if (have_digits) {
      out += sign * v;
    } else {
      throw ParseError("malformed complex number '" + std::string(text) + "'");
    }
    while (i < s.size() && s[i] == ' ') ++i;
    first = false;
  }
  return out;
}

std::string format_complex(Complex value) {
  char re[40], im[40];
  std::snprintf(re, sizeof re, "%.17g", value.real());
  std::snprintf(im, sizeof im, "%.17g", std::abs(value.imag()));
  if (value.imag() == 0.0 && !std::signbit(value.imag())) return re;
  return std::string(re) + (std::signbit(value.imag()) ? "-" : "+") + im + "i";
}

}  // namespace unitlab
