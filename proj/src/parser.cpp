#include "ewire/parser.hpp"

#include <cctype>
#include <map>
#include <set>

#include "ewire/gates.hpp"

namespace ewire {

namespace {

enum class Tok { Ident, Int, Sym, End };

struct Token {
  Tok kind = Tok::End;
  std::string text;
  std::int64_t value = 0;
  Span span;
};

const std::set<std::string>& reserved_words() {
  static const std::set<std::string> words = {
      "def",  "rec",   "circuit", "main",   "classical", "box",  "unbox", "run",    "qrun",
      "return", "let", "in",      "if",     "then",      "else", "lambda", "output", "init",
      "lift", "qlift", "gate",    "fst",    "snd",       "fix",  "Y",     "T",      "Circ",
      "I",    "bit",   "qubit",   "int",    "qlist",     "unit"};
  return words;
}

bool is_reserved(const std::string& s) { return reserved_words().count(s) > 0; }

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    for (;;) {
      skip_space();
      Token t;
      t.span = {line_, col_};
      if (pos_ >= src_.size()) {
        t.kind = Tok::End;
        out.push_back(t);
        return out;
      }
      const unsigned char c = src_[pos_];
      if (std::isalpha(c) || c == '_') {
        size_t start = pos_;
        while (pos_ < src_.size() &&
               (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_' ||
                src_[pos_] == '\''))
          advance(1);
        t.kind = Tok::Ident;
        t.text = std::string(src_.substr(start, pos_ - start));
      } else if (std::isdigit(c)) {
        size_t start = pos_;
        while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_])))
          advance(1);
        t.kind = Tok::Int;
        t.text = std::string(src_.substr(start, pos_ - start));
        try {
          t.value = std::stoll(t.text);
        } catch (const std::exception&) {
          throw ParseError(t.span, "integer literal out of range");
        }
      } else {
        t.kind = Tok::Sym;
        t.text = symbol(t.span);
      }
      out.push_back(std::move(t));
    }
  }

 private:
  void advance(size_t n) {
    for (size_t i = 0; i < n && pos_ < src_.size(); ++i) {
      const unsigned char c = src_[pos_];
      if (c == '\n') {
        ++line_;
        col_ = 1;
      } else if ((c & 0xC0) != 0x80) {
        ++col_;
      }
      ++pos_;
    }
  }

  bool starts(std::string_view s) const { return src_.substr(pos_, s.size()) == s; }

  void skip_space() {
    for (;;) {
      if (pos_ >= src_.size()) return;
      const unsigned char c = src_[pos_];
      if (std::isspace(c)) {
        advance(1);
      } else if (starts("--")) {
        while (pos_ < src_.size() && src_[pos_] != '\n') advance(1);
      } else {
        return;
      }
    }
  }

  std::string symbol(Span span) {
    static const std::vector<std::pair<std::string, std::string>> table = {
        {"->", "->"}, {"=>", "=>"}, {"<-", "<-"}, {"<=", "<="}, {"\xe2\x86\x90", "<-"},
        {"\xe2\x86\x92", "->"}, {"\xe2\x87\x92", "=>"}, {"\xe2\x87\x90", "<="},
        {"\xe2\x8a\x97", "*"}, {"\xc3\x97", "*"}, {"\xce\xbb", "\\"}, {"(", "("}, {")", ")"},
        {",", ","}, {";", ";"}, {":", ":"}, {"*", "*"}, {"#", "#"}, {"[", "["}, {"]", "]"},
        {"+", "+"}, {"-", "-"}, {"=", "="}, {"<", "<"}, {".", "."}, {"\\", "\\"}};
    for (const auto& [lexeme, canonical] : table) {
      if (starts(lexeme)) {
        advance(lexeme.size());
        return canonical;
      }
    }
    throw ParseError(span, "unexpected character '" + std::string(1, src_[pos_]) + "'");
  }

  std::string_view src_;
  size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
};

class Parser {
 public:
  Parser(std::string_view text, const Program* context) : toks_(Lexer(text).run()) {
    if (context) {
      for (const auto& c : context->classicals) classicals_[c.name] = c.cardinality;
      for (const auto& g : context->gates) gates_.insert(g.name);
      for (const auto& d : context->decls)
        if (d.kind == Declaration::Kind::Circuit) circuits_.insert(d.name);
    }
  }

  Program program() {
    Program prog;
    std::set<std::string> names;
    while (!at_end()) {
      const Token& t = peek();
      if (is_kw("classical")) {
        next();
        ClassicalDecl c;
        c.span = t.span;
        c.name = any_ident("classical base name");
        if (c.name == "bit" || c.name == "qubit" || c.name == "qlist")
          throw ParseError(c.span, "cannot redeclare built-in type '" + c.name + "'");
        const Token& n = expect_int();
        if (n.value < 1) throw ParseError(n.span, "cardinality must be >= 1");
        if (n.value > (1 << 20)) throw ParseError(n.span, "cardinality too large");
        if (classicals_.count(c.name)) throw ParseError(c.span, "duplicate classical '" + c.name + "'");
        c.cardinality = static_cast<int>(n.value);
        classicals_[c.name] = c.cardinality;
        prog.classicals.push_back(c);
      } else if (is_kw("gate")) {
        next();
        GateDecl g;
        g.span = t.span;
        g.name = any_ident("gate name");
        expect(":");
        g.in = wire_type();
        expect("->");
        g.out = wire_type();
        gates_.insert(g.name);
        prog.gates.push_back(g);
      } else if (is_kw("def") || is_kw("rec")) {
        Declaration d;
        d.span = t.span;
        d.kind = is_kw("def") ? Declaration::Kind::Def : Declaration::Kind::Rec;
        next();
        d.name = ident("declaration name");
        if (accept(":")) d.type = host_type();
        if (d.kind == Declaration::Kind::Rec && !d.type)
          throw ParseError(d.span, "rec declarations need a type annotation", {":"});
        expect("=");
        d.body = term();
        add_decl(prog, names, std::move(d));
      } else if (is_kw("circuit")) {
        Declaration d;
        d.span = t.span;
        d.kind = Declaration::Kind::Circuit;
        next();
        d.name = ident("circuit name");
        if (accept("(")) {
          if (!accept(")")) {
            do {
              std::string w = ident("wire name");
              expect(":");
              d.params.emplace_back(w, wire_type());
            } while (accept(","));
            expect(")");
          }
        }
        if (accept(":")) d.out = wire_type();
        expect("=");
        // Allow recursive references only through rec/fix; the name becomes
        // visible after its body.
        d.circuit = circuit();
        circuits_.insert(d.name);
        add_decl(prog, names, std::move(d));
      } else if (is_kw("main")) {
        next();
        prog.entry = ident("entry name");
      } else {
        throw ParseError(t.span, "unexpected '" + t.text + "' at top level",
                         {"classical", "gate", "def", "rec", "circuit", "main"});
      }
    }
    if (prog.entry && !names.count(*prog.entry))
      throw ParseError({}, "main refers to unknown declaration '" + *prog.entry + "'");
    return prog;
  }

  void finish() {
    if (!at_end())
      throw ParseError(peek().span, "unexpected '" + peek().text + "' after end of input");
  }

  // ---- wire types -------------------------------------------------------

  WireType wire_type() {
    WireType left = wire_atom();
    if (accept("*")) return WireType::tensor(left, wire_type());
    return left;
  }

  WireType wire_atom() {
    const Token& t = peek();
    if (accept("(")) {
      WireType w = wire_type();
      expect(")");
      return w;
    }
    if (t.kind == Tok::Ident) {
      next();
      if (t.text == "I") return WireType::unit();
      if (t.text == "bit") return WireType::bit();
      if (t.text == "qubit") return WireType::qubit();
      if (t.text == "qlist") return WireType::qlist();
      if (t.text == "int") return WireType::classical("int", int_cardinality());
      auto it = classicals_.find(t.text);
      if (it != classicals_.end()) return WireType::classical(t.text, it->second);
      throw ParseError(t.span, "unknown wire type '" + t.text + "'");
    }
    throw ParseError(t.span, "expected a wire type", {"I", "bit", "qubit", "int", "qlist", "("});
  }

  // ---- host types -------------------------------------------------------

  HostType host_type() {
    HostType left = host_product();
    if (accept("->")) return HostType::arrow(left, host_type());
    return left;
  }

  HostType host_product() {
    HostType left = host_atom();
    if (accept("*")) return HostType::product(left, host_product());
    return left;
  }

  HostType host_atom() {
    const Token& t = peek();
    if (t.kind == Tok::Int && t.value == 1) {
      next();
      return HostType::unit();
    }
    if (accept("(")) {
      HostType a = host_type();
      expect(")");
      return a;
    }
    if (t.kind == Tok::Ident) {
      if (t.text == "unit") return next(), HostType::unit();
      if (t.text == "int") return next(), HostType::integer();
      if (t.text == "bit") return next(), HostType::bit();
      if (t.text == "T") {
        next();
        return HostType::monadic(host_atom());
      }
      if (t.text == "Circ") {
        next();
        expect("(");
        WireType a = wire_type();
        expect(",");
        WireType b = wire_type();
        expect(")");
        return HostType::circ(a, b);
      }
      auto it = classicals_.find(t.text);
      if (it != classicals_.end()) {
        next();
        return HostType::classical(t.text, it->second);
      }
      throw ParseError(t.span, "unknown host type '" + t.text + "'");
    }
    throw ParseError(t.span, "expected a host type", {"1", "int", "bit", "T", "Circ", "("});
  }

  // ---- patterns ---------------------------------------------------------

  bool pattern_start() const {
    const Token& t = peek();
    if (t.kind == Tok::Sym) return t.text == "(";
    return t.kind == Tok::Ident && !is_reserved(t.text);
  }

  Pattern pattern() {
    const Token& t = peek();
    if (accept("(")) {
      if (accept(")")) return Pattern::unit();
      std::vector<Pattern> items{pattern()};
      while (accept(",")) items.push_back(pattern());
      expect(")");
      Pattern p = items.back();
      for (size_t i = items.size() - 1; i-- > 0;) p = Pattern::pair(items[i], p);
      return p;
    }
    if (t.kind == Tok::Ident && !is_reserved(t.text)) {
      next();
      return Pattern::wire(t.text);
    }
    throw ParseError(t.span, "expected a pattern", {"identifier", "(", "()"});
  }

  // ---- circuits ---------------------------------------------------------

  CircuitTerm circuit() {
    const Span span = peek().span;
    const size_t save = pos_;
    if (pattern_start()) {
      std::optional<Pattern> lhs;
      try {
        lhs = pattern();
      } catch (const ParseError&) {
        lhs.reset();
      }
      if (lhs && (is_sym("<-") || is_sym("<="))) return statement(*lhs, span);
      pos_ = save;
    }
    return final_circuit();
  }

  CircuitTerm statement(const Pattern& lhs, Span span) {
    const bool lift_arrow = is_sym("<=");
    next();
    auto host_binder = [&](const char* what) {
      if (lhs.kind() != Pattern::Kind::Wire)
        throw ParseError(span, std::string("the target of ") + what + " must be a variable");
      return lhs.name();
    };
    if (is_kw("lift") || is_kw("qlift")) {
      const bool q = is_kw("qlift");
      next();
      std::string x = host_binder("lift");
      Pattern p = pattern();
      expect(";");
      CircuitTerm rest = circuit();
      return q ? make::qlift(x, p, rest, span) : make::lift(x, p, rest, span);
    }
    if (lift_arrow) throw ParseError(peek().span, "expected lift after '<='", {"lift", "qlift"});
    if (is_kw("gate")) {
      next();
      GateRef g = gate_ref();
      Pattern in = pattern();
      expect(";");
      return make::gate(lhs, std::move(g), in, circuit(), span);
    }
    const Token& t = peek();
    if (t.kind == Tok::Ident && !is_reserved(t.text) && !circuits_.count(t.text) &&
        is_gate_name(t.text)) {
      GateRef g = gate_ref();
      Pattern in = pattern();
      expect(";");
      return make::gate(lhs, std::move(g), in, circuit(), span);
    }
    // Bare pattern on the right-hand side.
    if (pattern_start() && !(t.kind == Tok::Ident && circuits_.count(t.text))) {
      const size_t save = pos_;
      std::optional<Pattern> rhs;
      try {
        rhs = pattern();
      } catch (const ParseError&) {
        rhs.reset();
      }
      if (rhs && accept(";")) {
        CircuitTerm rest = circuit();
        if (lhs.kind() == Pattern::Kind::Unit) return make::unit_elim(*rhs, rest, span);
        if (lhs.kind() == Pattern::Kind::Pair && lhs.first().kind() == Pattern::Kind::Wire &&
            lhs.second().kind() == Pattern::Kind::Wire)
          return make::pair_elim(lhs.first().name(), lhs.second().name(), *rhs, rest, span);
        return make::compose(lhs, make::output(*rhs, span), rest, span);
      }
      pos_ = save;
    }
    CircuitTerm first = final_circuit();
    expect(";");
    return make::compose(lhs, first, circuit(), span);
  }

  CircuitTerm final_circuit() {
    const Token& t = peek();
    const Span span = t.span;
    if (is_kw("output")) {
      next();
      return make::output(pattern(), span);
    }
    if (is_kw("unbox")) {
      next();
      HostTerm h = atom();
      return make::unbox(h, pattern(), span);
    }
    if (is_kw("init")) {
      next();
      return make::init(atom(), span);
    }
    if (accept("(")) {
      CircuitTerm c = circuit();
      expect(")");
      return c;
    }
    if (t.kind == Tok::Ident && circuits_.count(t.text)) {
      next();
      std::optional<Pattern> arg;
      if (pattern_start()) arg = pattern();
      return make::call(t.text, arg, span);
    }
    if (t.kind == Tok::Ident && !is_reserved(t.text))
      throw ParseError(span, "'" + t.text + "' is not a declared circuit",
                       {"output", "unbox", "init", "("});
    throw ParseError(span, "expected a circuit", {"output", "unbox", "init", "pattern <-", "("});
  }

  GateRef gate_ref() {
    GateRef g;
    std::string prefix;
    for (;;) {
      if (is_kw("bit") && peek(1).kind == Tok::Sym && peek(1).text == "-" &&
          peek(2).kind == Tok::Ident && peek(2).text == "control") {
        next();
        next();
        next();
        prefix += "bit-control ";
      } else if (peek().kind == Tok::Ident && peek().text == "control" &&
                 peek(1).kind == Tok::Ident) {
        next();
        prefix += "control ";
      } else {
        break;
      }
    }
    g.name = prefix + any_ident("gate name");
    if (accept("[")) {
      bool neg = accept("-");
      std::int64_t v = expect_int().value;
      g.index = neg ? -v : v;
      expect("]");
    }
    return g;
  }

  // ---- host terms -------------------------------------------------------

  HostTerm term() {
    const Token& t = peek();
    const Span span = t.span;
    if (is_kw("lambda") || is_sym("\\")) {
      next();
      std::vector<std::pair<std::string, std::optional<HostType>>> binders;
      do {
        if (accept("(")) {
          std::string x = ident("variable");
          expect(":");
          binders.emplace_back(x, host_type());
          expect(")");
        } else {
          binders.emplace_back(ident("variable"), std::nullopt);
        }
      } while (!is_sym(".") && !is_sym("=>"));
      next();
      HostTerm body = term();
      for (size_t i = binders.size(); i-- > 0;)
        body = make::lambda(binders[i].first, binders[i].second, body, span);
      return body;
    }
    if (is_kw("if")) {
      next();
      HostTerm c = term();
      expect_kw("then");
      HostTerm a = term();
      expect_kw("else");
      HostTerm b = term();
      return make::if_(c, a, b, span);
    }
    if (is_kw("let")) {
      next();
      std::string x = ident("variable");
      expect("<-");
      HostTerm a = term();
      expect_kw("in");
      return make::let_bind(a, x, term(), span);
    }
    if (is_kw("box")) {
      next();
      Pattern p;
      std::optional<WireType> w;
      const size_t save = pos_;
      bool annotated = false;
      if (accept("(")) {
        try {
          Pattern q = pattern();
          if (accept(":")) {
            w = wire_type();
            expect(")");
            p = q;
            annotated = true;
          }
        } catch (const ParseError&) {
        }
        if (!annotated) pos_ = save;
      }
      if (!annotated) p = pattern();
      expect("=>");
      return make::box(p, w, circuit(), span);
    }
    if (is_kw("run")) {
      next();
      return make::run(circuit(), span);
    }
    if (is_kw("qrun")) {
      next();
      return make::qrun(circuit(), span);
    }
    if (is_kw("return")) {
      next();
      return make::ret(term(), span);
    }
    return comparison();
  }

  HostTerm comparison() {
    HostTerm a = arith();
    const Span span = peek().span;
    if (accept("=")) return make::binop(BinOpKind::Eq, a, arith(), span);
    if (accept("<")) return make::binop(BinOpKind::Lt, a, arith(), span);
    return a;
  }

  HostTerm arith() {
    HostTerm a = application();
    for (;;) {
      const Span span = peek().span;
      if (accept("+"))
        a = make::binop(BinOpKind::Add, a, application(), span);
      else if (accept("-"))
        a = make::binop(BinOpKind::Sub, a, application(), span);
      else
        return a;
    }
  }

  bool atom_start() const {
    const Token& t = peek();
    if (t.kind == Tok::Int) return true;
    if (t.kind == Tok::Sym) return t.text == "(";
    if (t.kind != Tok::Ident) return false;
    if (t.text == "fix" || t.text == "Y" || t.text == "bit") return true;
    return !is_reserved(t.text);
  }

  HostTerm application() {
    const Token& t = peek();
    const Span span = t.span;
    if (is_kw("fst")) {
      next();
      return make::proj1(atom(), span);
    }
    if (is_kw("snd")) {
      next();
      return make::proj2(atom(), span);
    }
    if (t.kind == Tok::Ident && (t.text == "CR" || t.text == "R") && !is_sym_at(1, "#")) {
      next();
      return make::gate_family(t.text, atom(), span);
    }
    HostTerm f = atom();
    while (atom_start()) {
      const Span s = peek().span;
      f = make::app(f, atom(), s);
    }
    return f;
  }

  HostTerm atom() {
    const Token& t = peek();
    const Span span = t.span;
    if (t.kind == Tok::Int) {
      next();
      return make::int_lit(t.value, span);
    }
    if (is_sym("-") && peek(1).kind == Tok::Int) {
      next();
      const Token& n = next();
      return make::int_lit(-n.value, span);
    }
    if (accept("(")) {
      if (accept(")")) return make::unit(span);
      std::vector<HostTerm> items{term()};
      while (accept(",")) items.push_back(term());
      expect(")");
      HostTerm r = items.back();
      for (size_t i = items.size() - 1; i-- > 0;) r = make::pair(items[i], r, span);
      return r;
    }
    if (t.kind == Tok::Ident) {
      if (t.text == "fix" || t.text == "Y") {
        next();
        std::optional<HostType> a;
        std::optional<WireType> w1, w2;
        if (accept("[")) {
          a = host_type();
          expect(",");
          w1 = wire_type();
          expect(",");
          w2 = wire_type();
          expect("]");
        }
        return make::fix(a, w1, w2, span);
      }
      if ((t.text == "meas" || t.text == "new") && is_sym_at(1, "[")) {
        next();
        next();
        WireType w = wire_type();
        expect("]");
        return t.text == "meas" ? make::meas_w(w, span) : make::new_w(w, span);
      }
      if (is_sym_at(1, "#")) {
        next();
        next();
        const Token& n = expect_int();
        int card = 0;
        if (t.text == "bit") {
          card = 2;
        } else {
          auto it = classicals_.find(t.text);
          if (it == classicals_.end())
            throw ParseError(t.span, "unknown classical base '" + t.text + "'");
          card = it->second;
        }
        if (n.value >= card)
          throw ParseError(n.span, "literal " + t.text + "#" + n.text + " exceeds cardinality " +
                                       std::to_string(card));
        return make::classical_lit(t.text, card, n.value, span);
      }
      if (!is_reserved(t.text)) {
        next();
        return make::var(t.text, span);
      }
    }
    throw ParseError(span, "expected a host term", {"identifier", "integer", "(", "fix"});
  }

 private:
  const Token& peek(size_t k = 0) const {
    const size_t i = std::min(pos_ + k, toks_.size() - 1);
    return toks_[i];
  }
  const Token& next() {
    const Token& t = toks_[pos_];
    if (pos_ + 1 < toks_.size()) ++pos_;
    return t;
  }
  bool at_end() const { return peek().kind == Tok::End; }
  bool is_sym(const char* s) const { return peek().kind == Tok::Sym && peek().text == s; }
  bool is_sym_at(size_t k, const char* s) const {
    return peek(k).kind == Tok::Sym && peek(k).text == s;
  }
  bool is_kw(const char* s) const { return peek().kind == Tok::Ident && peek().text == s; }
  bool accept(const char* s) {
    if (!is_sym(s)) return false;
    next();
    return true;
  }
  void expect(const char* s) {
    if (!accept(s)) throw ParseError(peek().span, "unexpected '" + describe(peek()) + "'", {s});
  }
  void expect_kw(const char* s) {
    if (!is_kw(s)) throw ParseError(peek().span, "unexpected '" + describe(peek()) + "'", {s});
    next();
  }
  const Token& expect_int() {
    if (peek().kind != Tok::Int)
      throw ParseError(peek().span, "unexpected '" + describe(peek()) + "'", {"integer"});
    return next();
  }
  std::string ident(const char* what) {
    const Token& t = peek();
    if (t.kind != Tok::Ident || is_reserved(t.text))
      throw ParseError(t.span, "unexpected '" + describe(t) + "'", {what});
    next();
    return t.text;
  }
  std::string any_ident(const char* what) {
    const Token& t = peek();
    if (t.kind != Tok::Ident) throw ParseError(t.span, "unexpected '" + describe(t) + "'", {what});
    next();
    return t.text;
  }
  static std::string describe(const Token& t) { return t.kind == Tok::End ? "end of input" : t.text; }

  bool is_gate_name(const std::string& name) const {
    return gates_.count(name) || is_builtin_gate(name);
  }

  int int_cardinality() const {
    auto it = classicals_.find("int");
    return it == classicals_.end() ? kDefaultIntCardinality : it->second;
  }

  void add_decl(Program& prog, std::set<std::string>& names, Declaration d) {
    if (!names.insert(d.name).second)
      throw ParseError(d.span, "duplicate declaration '" + d.name + "'");
    prog.decls.push_back(std::move(d));
  }

  std::vector<Token> toks_;
  size_t pos_ = 0;
  std::map<std::string, int> classicals_;
  std::set<std::string> gates_;
  std::set<std::string> circuits_;
};

}  // namespace

Program parse_program(std::string_view text) {
  Parser p(text, nullptr);
  return p.program();
}

CircuitTerm parse_circuit(std::string_view text, const Program* context) {
  Parser p(text, context);
  CircuitTerm c = p.circuit();
  p.finish();
  return c;
}

HostTerm parse_host_term(std::string_view text, const Program* context) {
  Parser p(text, context);
  HostTerm t = p.term();
  p.finish();
  return t;
}

WireType parse_wire_type(std::string_view text, const Program* context) {
  Parser p(text, context);
  WireType w = p.wire_type();
  p.finish();
  return w;
}

HostType parse_host_type(std::string_view text, const Program* context) {
  Parser p(text, context);
  HostType a = p.host_type();
  p.finish();
  return a;
}

Pattern parse_pattern(std::string_view text) {
  Parser p(text, nullptr);
  Pattern pat = p.pattern();
  p.finish();
  return pat;
}

}  // namespace ewire
