#include <cctype>
#include <charconv>
#include <cmath>
#include <sstream>

#include "inlite/error.hpp"
#include "inlite/model.hpp"

namespace inlite {

namespace {

enum class Tok { kIdent, kNumber, kString, kTilde, kPlus, kMinus, kLParen, kRParen, kComma, kEquals, kEnd };

struct Token {
  Tok kind;
  std::string text;
  double number = 0.0;
  int line = 1;
  int column = 1;
};

std::string describe(const Token& t) {
  switch (t.kind) {
    case Tok::kEnd:
      return "end of input";
    case Tok::kString:
      return "string \"" + t.text + "\"";
    default:
      return "'" + t.text + "'";
  }
}

class Lexer {
 public:
  explicit Lexer(std::string_view text) : text_(text) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    for (;;) {
      skip_space();
      Token t{Tok::kEnd, "", 0.0, line_, col_};
      if (pos_ >= text_.size()) {
        out.push_back(t);
        return out;
      }
      const char ch = text_[pos_];
      if (std::isalpha(static_cast<unsigned char>(ch)) || ch == '.' || ch == '_') {
        if (ch == '.' && pos_ + 1 < text_.size() &&
            std::isdigit(static_cast<unsigned char>(text_[pos_ + 1]))) {
          lex_number(t);
        } else {
          t.kind = Tok::kIdent;
          while (pos_ < text_.size() && is_ident_char(text_[pos_])) t.text += advance();
        }
      } else if (std::isdigit(static_cast<unsigned char>(ch))) {
        lex_number(t);
      } else if (ch == '"' || ch == '\'') {
        const char quote = advance();
        t.kind = Tok::kString;
        while (pos_ < text_.size() && text_[pos_] != quote && text_[pos_] != '\n') t.text += advance();
        if (pos_ >= text_.size() || text_[pos_] != quote) {
          throw ParseError("unterminated string", t.line, t.column);
        }
        advance();
      } else {
        t.text = std::string(1, advance());
        switch (ch) {
          case '~': t.kind = Tok::kTilde; break;
          case '+': t.kind = Tok::kPlus; break;
          case '-': t.kind = Tok::kMinus; break;
          case '(': t.kind = Tok::kLParen; break;
          case ')': t.kind = Tok::kRParen; break;
          case ',': t.kind = Tok::kComma; break;
          case '=': t.kind = Tok::kEquals; break;
          default:
            throw ParseError("unexpected character '" + t.text + "'", t.line, t.column);
        }
      }
      out.push_back(t);
    }
  }

 private:
  static bool is_ident_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '_';
  }

  char advance() {
    const char c = text_[pos_++];
    if (c == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    return c;
  }

  void skip_space() {
    while (pos_ < text_.size()) {
      const char c = text_[pos_];
      if (c == '#') {
        while (pos_ < text_.size() && text_[pos_] != '\n') advance();
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else {
        break;
      }
    }
  }

  void lex_number(Token& t) {
    t.kind = Tok::kNumber;
    while (pos_ < text_.size()) {
      const char c = text_[pos_];
      const bool exp_sign = (c == '+' || c == '-') && !t.text.empty() &&
                            (t.text.back() == 'e' || t.text.back() == 'E');
      if (std::isdigit(static_cast<unsigned char>(c)) || c == '.' || c == 'e' || c == 'E' || exp_sign) {
        t.text += advance();
      } else {
        break;
      }
    }
    const char* first = t.text.data();
    const char* last = first + t.text.size();
    auto [ptr, ec] = std::from_chars(first, last, t.number);
    if (ec != std::errc() || ptr != last) {
      throw ParseError("malformed number '" + t.text + "'", t.line, t.column);
    }
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
};

struct OptionValue {
  enum Kind { kWord, kNumber, kBool, kVector } kind = kWord;
  std::string word;
  double number = 0.0;
  bool flag = false;
  std::vector<double> vec;
  Token at;
  Token key;
};

class Parser {
 public:
  explicit Parser(std::vector<Token> tokens) : toks_(std::move(tokens)) {}

  ModelSpec run() {
    ModelSpec spec;
    const Token& resp = expect(Tok::kIdent, "response name");
    spec.response = resp.text;
    expect(Tok::kTilde, "'~'");
    bool intercept_seen = false;
    bool first = true;
    for (;;) {
      bool negated = false;
      if (first) {
        if (peek().kind == Tok::kMinus) {
          next();
          negated = true;
        }
      } else {
        const Token& op = next();
        if (op.kind == Tok::kMinus) {
          negated = true;
        } else if (op.kind != Tok::kPlus) {
          fail("expected '+' between terms, got " + describe(op), op);
        }
      }
      first = false;
      term(spec, negated, intercept_seen);
      if (peek().kind == Tok::kEnd) break;
    }
    return spec;
  }

 private:
  const Token& peek() const { return toks_[pos_]; }
  const Token& next() { return toks_[pos_ < toks_.size() - 1 ? pos_++ : pos_]; }

  [[noreturn]] static void fail(const std::string& msg, const Token& at) {
    throw ParseError(msg, at.line, at.column);
  }

  const Token& expect(Tok kind, const std::string& what) {
    const Token& t = next();
    if (t.kind != kind) fail("expected " + what + ", got " + describe(t), t);
    return t;
  }

  void term(ModelSpec& spec, bool negated, bool& intercept_seen) {
    const Token& t = next();
    if (t.kind == Tok::kNumber) {
      if (t.number != 1.0 && !(t.number == 0.0 && !negated)) {
        fail("only 1, -1 and 0 are allowed as numeric terms, got " + describe(t), t);
      }
      if (intercept_seen) fail("intercept specified more than once", t);
      intercept_seen = true;
      spec.intercept = !negated && t.number == 1.0;
      return;
    }
    if (negated) fail("only the intercept can be removed with '-'", t);
    if (t.kind != Tok::kIdent) fail("expected a term, got " + describe(t), t);
    if (t.text == "f" && peek().kind == Tok::kLParen) {
      fterm(spec, t);
      return;
    }
    check_new_name(spec, t);
    spec.fixed.push_back(t.text);
  }

  void check_new_name(const ModelSpec& spec, const Token& t) {
    if (t.text == spec.response) fail("response '" + t.text + "' used as a term", t);
    for (const auto& f : spec.fixed) {
      if (f == t.text) fail("duplicate term '" + t.text + "'", t);
    }
    for (const auto& c : spec.components) {
      if (c.covariate == t.text) fail("duplicate term '" + t.text + "'", t);
    }
  }

  void fterm(ModelSpec& spec, const Token& f_token) {
    expect(Tok::kLParen, "'('");
    const Token& cov = expect(Tok::kIdent, "index column name");
    check_new_name(spec, cov);
    ComponentSpec c;
    c.covariate = cov.text;
    std::map<std::string, OptionValue> opts;
    while (peek().kind == Tok::kComma) {
      next();
      const Token& key = expect(Tok::kIdent, "option name");
      expect(Tok::kEquals, "'='");
      if (opts.count(key.text)) fail("option '" + key.text + "' given twice", key);
      opts[key.text] = value();
      opts[key.text].key = key;
    }
    expect(Tok::kRParen, "')' or ','");
    if (!opts.count("model")) fail("f() term needs a model= option", f_token);
    apply_options(c, opts);
    spec.components.push_back(std::move(c));
  }

  OptionValue value() {
    OptionValue v;
    const Token& t = next();
    v.at = t;
    if (t.kind == Tok::kMinus) {
      const Token& num = expect(Tok::kNumber, "number");
      v.kind = OptionValue::kNumber;
      v.number = -num.number;
      return v;
    }
    if (t.kind == Tok::kNumber) {
      v.kind = OptionValue::kNumber;
      v.number = t.number;
      return v;
    }
    if (t.kind == Tok::kString) {
      v.word = t.text;
      return v;
    }
    if (t.kind != Tok::kIdent) fail("expected an option value, got " + describe(t), t);
    if (t.text == "TRUE" || t.text == "T" || t.text == "true") {
      v.kind = OptionValue::kBool;
      v.flag = true;
    } else if (t.text == "FALSE" || t.text == "F" || t.text == "false") {
      v.kind = OptionValue::kBool;
      v.flag = false;
    } else if (t.text == "c" && peek().kind == Tok::kLParen) {
      next();
      v.kind = OptionValue::kVector;
      for (;;) {
        bool neg = false;
        if (peek().kind == Tok::kMinus) {
          next();
          neg = true;
        }
        const Token& num = expect(Tok::kNumber, "number");
        v.vec.push_back(neg ? -num.number : num.number);
        if (peek().kind == Tok::kComma) {
          next();
          continue;
        }
        expect(Tok::kRParen, "')'");
        break;
      }
    } else {
      v.word = t.text;
    }
    return v;
  }

  static std::optional<PriorSpec> make_prior(const std::map<std::string, OptionValue>& opts,
                                             const std::string& which) {
    const auto pk = opts.find("hyper." + which + ".prior");
    const auto vk = opts.find("hyper." + which + ".param");
    if (pk == opts.end() && vk == opts.end()) return std::nullopt;
    PriorSpec::Family family = PriorSpec::Family::kGamma;
    if (pk != opts.end()) {
      if (pk->second.kind != OptionValue::kWord) fail("prior name expected", pk->second.at);
      const auto fam = prior_family_from_name(pk->second.word);
      if (!fam) fail("unknown prior '" + pk->second.word + "'", pk->second.at);
      family = *fam;
    } else if (which == "rho") {
      family = PriorSpec::Family::kGaussian;
    }
    PriorSpec prior;
    switch (family) {
      case PriorSpec::Family::kGamma: prior = {family, 1.0, 5e-5}; break;
      case PriorSpec::Family::kPcPrec: prior = {family, 1.0, 0.01}; break;
      case PriorSpec::Family::kGaussian: prior = {family, 0.0, 0.15}; break;
    }
    if (vk != opts.end()) {
      const OptionValue& v = vk->second;
      if (v.kind != OptionValue::kVector || v.vec.size() != 2) {
        fail("prior parameters must be given as c(a, b)", v.at);
      }
      prior.first = v.vec[0];
      prior.second = v.vec[1];
    }
    try {
      prior.validate();
    } catch (const std::invalid_argument& e) {
      fail(e.what(), (vk != opts.end() ? vk : pk)->second.at);
    }
    return prior;
  }

  static void apply_options(ComponentSpec& c, const std::map<std::string, OptionValue>& opts) {
    for (const auto& [key, v] : opts) {
      if (key == "model") {
        if (v.kind != OptionValue::kWord) fail("model= expects a component name", v.at);
        const auto kind = component_kind_from_name(v.word);
        if (!kind) fail("unknown model kind '" + v.word + "'", v.at);
        c.kind = *kind;
      } else if (key == "n") {
        if (v.kind != OptionValue::kNumber || v.number < 1 || v.number != std::floor(v.number)) {
          fail("n= expects a positive integer", v.at);
        }
        c.size = static_cast<int>(v.number);
      } else if (key == "scale.model") {
        if (v.kind != OptionValue::kBool) fail("scale.model= expects TRUE or FALSE", v.at);
        c.scale_model = v.flag;
      } else if (key == "constr") {
        if (v.kind != OptionValue::kBool) fail("constr= expects TRUE or FALSE", v.at);
        c.constr = v.flag;
      } else if (key != "hyper.prec.prior" && key != "hyper.prec.param" &&
                 key != "hyper.rho.prior" && key != "hyper.rho.param") {
        fail("unknown option '" + key + "'", v.key);
      }
    }
    c.prec_prior = make_prior(opts, "prec");
    c.rho_prior = make_prior(opts, "rho");
    if (c.rho_prior && c.kind != ComponentKind::kAr1) {
      fail("hyper.rho options only apply to ar1", opts.count("hyper.rho.prior")
                                                     ? opts.at("hyper.rho.prior").key
                                                     : opts.at("hyper.rho.param").key);
    }
    if (c.scale_model && c.kind != ComponentKind::kRw2) {
      fail("scale.model only applies to rw2", opts.at("scale.model").key);
    }
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
};

std::string number_text(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

ModelSpec parse_formula(std::string_view text) { return Parser(Lexer(text).run()).run(); }

std::string to_string(const ModelSpec& spec) {
  std::ostringstream os;
  os << spec.response << " ~ " << (spec.intercept ? "1" : "-1");
  for (const auto& f : spec.fixed) os << " + " << f;
  for (const auto& c : spec.components) {
    os << " + f(" << c.covariate << ", model=" << component_kind_name(c.kind);
    if (c.size) os << ", n=" << *c.size;
    if (c.scale_model) os << ", scale.model=TRUE";
    if (c.constr) os << ", constr=" << (*c.constr ? "TRUE" : "FALSE");
    auto prior = [&os](const char* which, const PriorSpec& p) {
      os << ", hyper." << which << ".prior=" << p.name() << ", hyper." << which << ".param=c("
         << number_text(p.first) << ", " << number_text(p.second) << ")";
    };
    if (c.prec_prior) prior("prec", *c.prec_prior);
    if (c.rho_prior) prior("rho", *c.rho_prior);
    os << ")";
  }
  return os.str();
}

}  // namespace inlite
