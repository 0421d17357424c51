#include "ctxeq/parser.hpp"

#include <cctype>
#include <sstream>

#include "ctxeq/typecheck.hpp"

namespace ctxeq {

namespace {

enum class Tok {
  End, Int, Ident, LParen, RParen, Comma, Semi, Bar, LBrace, RBrace,
  Arrow, Assign, Bang, Eq, EqEq, Ne, Lt, Le, Gt, Ge, Plus, Minus, Star, Slash,
  AndAnd, OrOr,
  // keywords
  Fun, Let, Rec, In, If, Then, Else, Ref, As, Not, Mod, True, False, Bot, Unit
};

struct Token {
  Tok t;
  std::string text;
  Span span;
};

class Lexer {
public:
  explicit Lexer(const std::string& src) : src_(src) { advance(); }

  const Token& peek() const { return cur_; }
  Token next() {
    Token t = cur_;
    advance();
    return t;
  }

  struct State {
    size_t pos;
    int line, col;
    Token cur;
  };
  State save() const { return {pos_, line_, col_, cur_}; }
  void restore(const State& s) {
    pos_ = s.pos;
    line_ = s.line;
    col_ = s.col;
    cur_ = s.cur;
  }

private:
  void advance() {
    skip_ws();
    cur_.span = {line_, col_};
    if (pos_ >= src_.size()) {
      cur_.t = Tok::End;
      cur_.text = "<eof>";
      return;
    }
    char c = src_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c))) {
      size_t start = pos_;
      while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) bump();
      cur_.t = Tok::Int;
      cur_.text = src_.substr(start, pos_ - start);
      return;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      size_t start = pos_;
      while (pos_ < src_.size() && (std::isalnum(static_cast<unsigned char>(src_[pos_])) ||
                                    src_[pos_] == '_' || src_[pos_] == '\''))
        bump();
      cur_.text = src_.substr(start, pos_ - start);
      cur_.t = keyword(cur_.text);
      return;
    }
    auto two = [&](char a, char b) {
      return c == a && pos_ + 1 < src_.size() && src_[pos_ + 1] == b;
    };
    if (two('-', '>')) { bump(); bump(); cur_.t = Tok::Arrow; cur_.text = "->"; return; }
    if (two(':', '=')) { bump(); bump(); cur_.t = Tok::Assign; cur_.text = ":="; return; }
    if (two('=', '=')) { bump(); bump(); cur_.t = Tok::EqEq; cur_.text = "=="; return; }
    if (two('<', '>')) { bump(); bump(); cur_.t = Tok::Ne; cur_.text = "<>"; return; }
    if (two('<', '=')) { bump(); bump(); cur_.t = Tok::Le; cur_.text = "<="; return; }
    if (two('>', '=')) { bump(); bump(); cur_.t = Tok::Ge; cur_.text = ">="; return; }
    if (two('&', '&')) { bump(); bump(); cur_.t = Tok::AndAnd; cur_.text = "&&"; return; }
    if (two('|', '|')) { bump(); bump(); cur_.t = Tok::OrOr; cur_.text = "||"; return; }
    if (two('(', ')')) { bump(); bump(); cur_.t = Tok::Unit; cur_.text = "()"; return; }
    bump();
    switch (c) {
      case '(': cur_.t = Tok::LParen; break;
      case ')': cur_.t = Tok::RParen; break;
      case ',': cur_.t = Tok::Comma; break;
      case ';': cur_.t = Tok::Semi; break;
      case '|': cur_.t = Tok::Bar; break;
      case '{': cur_.t = Tok::LBrace; break;
      case '}': cur_.t = Tok::RBrace; break;
      case '!': cur_.t = Tok::Bang; break;
      case '=': cur_.t = Tok::Eq; break;
      case '<': cur_.t = Tok::Lt; break;
      case '>': cur_.t = Tok::Gt; break;
      case '+': cur_.t = Tok::Plus; break;
      case '-': cur_.t = Tok::Minus; break;
      case '*': cur_.t = Tok::Star; break;
      case '/': cur_.t = Tok::Slash; break;
      default: parse_error(cur_.span, std::string("unexpected character '") + c + "'");
    }
    cur_.text = std::string(1, c);
  }

  static Tok keyword(const std::string& s) {
    if (s == "fun") return Tok::Fun;
    if (s == "let") return Tok::Let;
    if (s == "rec") return Tok::Rec;
    if (s == "in") return Tok::In;
    if (s == "if") return Tok::If;
    if (s == "then") return Tok::Then;
    if (s == "else") return Tok::Else;
    if (s == "ref") return Tok::Ref;
    if (s == "as") return Tok::As;
    if (s == "not") return Tok::Not;
    if (s == "mod") return Tok::Mod;
    if (s == "true") return Tok::True;
    if (s == "false") return Tok::False;
    if (s == "_bot_") return Tok::Bot;
    return Tok::Ident;
  }

  void skip_ws() {
    int depth = 0;
    while (pos_ < src_.size()) {
      char c = src_[pos_];
      if (depth > 0) {
        if (c == '(' && pos_ + 1 < src_.size() && src_[pos_ + 1] == '*') { bump(); bump(); ++depth; }
        else if (c == '*' && pos_ + 1 < src_.size() && src_[pos_ + 1] == ')') { bump(); bump(); --depth; }
        else bump();
        continue;
      }
      if (c == '(' && pos_ + 1 < src_.size() && src_[pos_ + 1] == '*') { bump(); bump(); depth = 1; continue; }
      if (c == ' ' || c == '\t' || c == '\r' || c == '\n') { bump(); continue; }
      break;
    }
    if (depth > 0) parse_error({line_, col_}, "unterminated comment");
  }

  void bump() {
    if (src_[pos_] == '\n') { ++line_; col_ = 1; } else { ++col_; }
    ++pos_;
  }

  const std::string& src_;
  size_t pos_ = 0;
  int line_ = 1, col_ = 1;
  Token cur_;
};

// Scopes: term variables and locations are separate namespaces; `!x` and
// `x := e` resolve x against locations, a bare `x` against variables.
struct Scope {
  std::map<std::string, std::vector<LocId>> locs;
  // variables need no ids; the parser only tracks them for error reporting of
  // annotation kappas, so plain Var nodes are emitted as written.
};

class Parser {
public:
  Parser(const std::string& src, NameGen& gen) : lex_(src), gen_(gen) {}

  ExprPtr parse_whole() {
    ExprPtr e = parse_expr();
    if (lex_.peek().t != Tok::End) parse_error(lex_.peek().span, "trailing input after expression");
    return e;
  }

  AnnotPtr parse_annotation_public(Scope& sc) {
    scope_ = &sc;
    expect(Tok::LBrace, "'{'");
    return parse_annotation_body();
  }

  Scope* scope_ = nullptr;

  ExprPtr parse_expr() {
    Scope sc;
    scope_ = &sc;
    return parse_seq();
  }

private:
  Token expect(Tok t, const char* what) {
    if (lex_.peek().t != t)
      parse_error(lex_.peek().span, std::string("expected ") + what + ", found '" + lex_.peek().text + "'");
    return lex_.next();
  }

  bool accept(Tok t) {
    if (lex_.peek().t == t) {
      lex_.next();
      return true;
    }
    return false;
  }

  // e1 ; e2  desugars to  let _ = e1 in e2  (and `_` constrains e1 to unit)
  ExprPtr parse_seq() {
    ExprPtr e = parse_item();
    if (lex_.peek().t == Tok::Semi) {
      Span sp = lex_.next().span;
      ExprPtr rest = parse_seq();
      return mk_lettuple({"_"}, e, rest, sp);
    }
    return e;
  }

  ExprPtr parse_item() {
    switch (lex_.peek().t) {
      case Tok::Fun: return parse_fun();
      case Tok::Let: return parse_let();
      case Tok::If: return parse_if();
      case Tok::Ref: return parse_ref();
      default: return parse_tuple();
    }
  }

  // bare tuples: e , e , ...  (binds looser than operators, tighter than ;)
  ExprPtr parse_tuple() {
    ExprPtr e = parse_assign();
    if (lex_.peek().t != Tok::Comma) return e;
    std::vector<ExprPtr> elems{e};
    Span sp = lex_.peek().span;
    while (accept(Tok::Comma)) {
      if (lex_.peek().t == Tok::Fun || lex_.peek().t == Tok::If)
        elems.push_back(parse_item());
      else
        elems.push_back(parse_assign());
    }
    return mk_tuple(std::move(elems), sp);
  }

  // fun p [{A}] -> e     (p is an identifier or the unit pattern)
  ExprPtr parse_fun() {
    Span sp = expect(Tok::Fun, "'fun'").span;
    return parse_fun_tail(std::nullopt, sp);
  }

  ExprPtr parse_fun_tail(std::optional<std::string> self, Span sp) {
    auto [param, unit_param] = parse_param();
    AnnotPtr annot;
    if (lex_.peek().t == Tok::LBrace) {
      lex_.next();
      annot = parse_annotation_body();
    }
    expect(Tok::Arrow, "'->'");
    ExprPtr body = parse_seq();
    return finish_lambda(self, param, unit_param, annot, body, sp);
  }

  std::pair<std::string, bool> parse_param() {
    if (lex_.peek().t == Tok::Unit) {
      lex_.next();
      return {fresh_unit_param(), true};
    }
    Token p = expect(Tok::Ident, "parameter");
    return {p.text, false};
  }

  std::string fresh_unit_param() { return "_u" + std::to_string(unit_param_counter_++); }

  ExprPtr finish_lambda(const std::optional<std::string>& self, const std::string& param,
                        bool unit_param, AnnotPtr annot, ExprPtr body, Span sp) {
    if (unit_param) {
      // `fun () -> e` pins the domain to unit through the wildcard let.
      body = mk_lettuple({"_"}, mk_var(param, sp), body, sp);
    }
    return mk_lambda(self, param, std::move(annot), std::move(body), sp);
  }

  // let (x,y) = e in e' | let x = e in e'
  // let [rec] f p1 .. pn [{A}] = e in e'
  // let f p = {A} -> e in e'
  ExprPtr parse_let() {
    Span sp = expect(Tok::Let, "'let'").span;
    bool is_rec = accept(Tok::Rec);
    if (lex_.peek().t == Tok::LParen) {
      if (is_rec) parse_error(sp, "let rec requires a function binding");
      lex_.next();
      std::vector<std::string> binders;
      binders.push_back(expect(Tok::Ident, "identifier").text);
      while (accept(Tok::Comma)) binders.push_back(expect(Tok::Ident, "identifier").text);
      expect(Tok::RParen, "')'");
      if (binders.size() < 2) parse_error(sp, "tuple pattern needs at least two names");
      expect(Tok::Eq, "'='");
      ExprPtr rhs = parse_item();
      expect(Tok::In, "'in'");
      ExprPtr body = parse_seq();
      return mk_lettuple(std::move(binders), rhs, body, sp);
    }
    Token name = expect(Tok::Ident, "identifier");
    // parameters (function definition sugar)
    std::vector<std::pair<std::string, bool>> params;
    AnnotPtr annot;
    while (lex_.peek().t == Tok::Ident || lex_.peek().t == Tok::Unit) params.push_back(parse_param());
    if (lex_.peek().t == Tok::LBrace) {
      lex_.next();
      annot = parse_annotation_body();
    }
    expect(Tok::Eq, "'='");
    ExprPtr rhs;
    if (!params.empty() && lex_.peek().t == Tok::LBrace) {
      // `let f x = {A} -> e` places the annotation after '='
      lex_.next();
      annot = parse_annotation_body();
      expect(Tok::Arrow, "'->'");
      rhs = parse_seq();
    } else {
      rhs = parse_item();
    }
    if (params.empty()) {
      if (is_rec) parse_error(sp, "let rec requires parameters");
      if (annot) parse_error(sp, "annotation requires a function binding");
      expect(Tok::In, "'in'");
      ExprPtr body = parse_seq();
      return mk_lettuple({name.text}, rhs, body, sp);
    }
    // build nested lambdas inside-out; the annotation sits on the innermost
    ExprPtr fn = rhs;
    for (size_t i = params.size(); i-- > 0;) {
      AnnotPtr a = (i + 1 == params.size()) ? annot : nullptr;
      std::optional<std::string> self =
          (i == 0 && is_rec) ? std::optional<std::string>(name.text) : std::nullopt;
      if (params[i].second)
        fn = mk_lettuple({"_"}, mk_var(params[i].first, sp), fn, sp);
      fn = mk_lambda(self, params[i].first, a, fn, sp);
    }
    expect(Tok::In, "'in'");
    ExprPtr body = parse_seq();
    return mk_lettuple({name.text}, fn, body, sp);
  }

  ExprPtr parse_if() {
    Span sp = expect(Tok::If, "'if'").span;
    ExprPtr g = parse_item();
    expect(Tok::Then, "'then'");
    ExprPtr t = parse_item();
    expect(Tok::Else, "'else'");
    ExprPtr e = parse_item();
    return mk_cond(g, t, e, sp);
  }

  // ref x = v in e ; non-value initializers are let-bound first
  ExprPtr parse_ref() {
    Span sp = expect(Tok::Ref, "'ref'").span;
    Token name = expect(Tok::Ident, "location name");
    expect(Tok::Eq, "'='");
    ExprPtr init = parse_item();
    expect(Tok::In, "'in'");
    LocId loc = gen_.fresh_loc();
    scope_->locs[name.text].push_back(loc);
    loc_display_.emplace(loc, name.text);
    ExprPtr body = parse_seq();
    scope_->locs[name.text].pop_back();
    if (is_value(init)) return mk_newref(loc, init, body, sp);
    std::string tmp = "_r" + std::to_string(unit_param_counter_++);
    return mk_lettuple({tmp}, init, mk_newref(loc, mk_var(tmp, sp), body, sp), sp);
  }

  ExprPtr parse_assign() {
    // lookahead: Ident ':='
    if (lex_.peek().t == Tok::Ident) {
      Token id = lex_.peek();
      // two-token lookahead for `x :=`
      auto save = lex_.save();
      lex_.next();
      if (lex_.peek().t == Tok::Assign) {
        lex_.next();
        LocId loc = resolve_loc(id);
        ExprPtr rhs = parse_item();
        return mk_assign(loc, rhs, id.span);
      }
      lex_.restore(save);
    }
    return parse_or();
  }

  LocId resolve_loc(const Token& id) {
    auto it = scope_->locs.find(id.text);
    if (it == scope_->locs.end() || it->second.empty())
      parse_error(id.span, "unknown location '" + id.text + "'");
    return it->second.back();
  }

  ExprPtr parse_or() {
    ExprPtr e = parse_and();
    while (lex_.peek().t == Tok::OrOr) {
      Span sp = lex_.next().span;
      e = mk_arith(ArithOp::Or, {e, parse_and()}, sp);
    }
    return e;
  }

  ExprPtr parse_and() {
    ExprPtr e = parse_cmp();
    while (lex_.peek().t == Tok::AndAnd) {
      Span sp = lex_.next().span;
      e = mk_arith(ArithOp::And, {e, parse_cmp()}, sp);
    }
    return e;
  }

  ExprPtr parse_cmp() {
    ExprPtr e = parse_add();
    ArithOp op;
    switch (lex_.peek().t) {
      case Tok::Eq:
      case Tok::EqEq: op = ArithOp::Eq; break;
      case Tok::Ne: op = ArithOp::Ne; break;
      case Tok::Lt: op = ArithOp::Lt; break;
      case Tok::Le: op = ArithOp::Le; break;
      case Tok::Gt: op = ArithOp::Gt; break;
      case Tok::Ge: op = ArithOp::Ge; break;
      default: return e;
    }
    Span sp = lex_.next().span;
    return mk_arith(op, {e, parse_add()}, sp);
  }

  ExprPtr parse_add() {
    ExprPtr e = parse_mul();
    while (lex_.peek().t == Tok::Plus || lex_.peek().t == Tok::Minus) {
      Token t = lex_.next();
      e = mk_arith(t.t == Tok::Plus ? ArithOp::Add : ArithOp::Sub, {e, parse_mul()}, t.span);
    }
    return e;
  }

  ExprPtr parse_mul() {
    ExprPtr e = parse_unary();
    while (lex_.peek().t == Tok::Star || lex_.peek().t == Tok::Slash || lex_.peek().t == Tok::Mod) {
      Token t = lex_.next();
      ArithOp op = t.t == Tok::Star ? ArithOp::Mul : t.t == Tok::Slash ? ArithOp::Div : ArithOp::Mod;
      e = mk_arith(op, {e, parse_unary()}, t.span);
    }
    return e;
  }

  ExprPtr parse_unary() {
    if (lex_.peek().t == Tok::Minus) {
      Span sp = lex_.next().span;
      return mk_arith(ArithOp::Sub, {mk_int(0), parse_unary()}, sp);
    }
    if (lex_.peek().t == Tok::Not) {
      Span sp = lex_.next().span;
      return mk_arith(ArithOp::Not, {parse_unary()}, sp);
    }
    return parse_app();
  }

  bool starts_atom(Tok t) const {
    switch (t) {
      case Tok::Int:
      case Tok::Ident:
      case Tok::LParen:
      case Tok::Unit:
      case Tok::Bang:
      case Tok::True:
      case Tok::False:
      case Tok::Bot: return true;
      default: return false;
    }
  }

  ExprPtr parse_app() {
    ExprPtr e = parse_atom();
    while (starts_atom(lex_.peek().t)) e = mk_app(e, parse_atom(), lex_.peek().span);
    return e;
  }

  ExprPtr parse_atom() {
    Token t = lex_.next();
    switch (t.t) {
      case Tok::Int: return mk_const(const_int(BigInt::from_string(t.text)), t.span);
      case Tok::True: return mk_const(const_bool(true), t.span);
      case Tok::False: return mk_const(const_bool(false), t.span);
      case Tok::Unit: return mk_const(const_unit(), t.span);
      case Tok::Bot: return mk_bot(t.span);
      case Tok::Ident: return mk_var(t.text, t.span);
      case Tok::Bang: {
        Token id = expect(Tok::Ident, "location name after '!'");
        return mk_deref(resolve_loc(id), t.span);
      }
      case Tok::LParen: {
        ExprPtr e = parse_seq();
        if (accept(Tok::Comma)) {
          std::vector<ExprPtr> elems{e};
          elems.push_back(parse_seq());
          while (accept(Tok::Comma)) elems.push_back(parse_seq());
          expect(Tok::RParen, "')'");
          return mk_tuple(std::move(elems), t.span);
        }
        expect(Tok::RParen, "')'");
        return e;
      }
      default: parse_error(t.span, "expected an expression, found '" + t.text + "'");
    }
  }

  // {k1, .. | l1 as C1, .. | phi}   or   {}
  AnnotPtr parse_annotation_body() {
    auto a = std::make_shared<Annot>();
    a->formula = mk_bool(true);
    if (accept(Tok::RBrace)) return a;  // `{}`: pure re-entry flag
    a->sym_names.push_back(expect(Tok::Ident, "symbolic constant name").text);
    while (accept(Tok::Comma)) a->sym_names.push_back(expect(Tok::Ident, "symbolic constant name").text);
    expect(Tok::Bar, "'|'");
    std::set<std::string> declared(a->sym_names.begin(), a->sym_names.end());
    std::set<LocId> seen_locs;
    if (lex_.peek().t != Tok::Bar) {
      for (;;) {
        Token loc_tok = expect(Tok::Ident, "location name");
        LocId loc = resolve_loc(loc_tok);
        if (!seen_locs.insert(loc).second) parse_error(loc_tok.span, "duplicate location in annotation");
        expect(Tok::As, "'as'");
        ExprPtr pat = parse_atom();
        check_annot_vars(pat, declared);
        a->loc_patterns.emplace_back(loc, pat);
        if (!accept(Tok::Comma) && !accept(Tok::Semi)) break;
      }
    }
    expect(Tok::Bar, "'|'");
    a->formula = parse_seq();
    check_annot_vars(a->formula, declared);
    expect(Tok::RBrace, "'}'");
    return a;
  }

  void check_annot_vars(const ExprPtr& e, const std::set<std::string>& declared) {
    for (auto& v : free_vars(e))
      if (!declared.count(v))
        parse_error(e->span, "unknown symbolic constant '" + v + "' in annotation");
  }

  Lexer lex_;
  NameGen& gen_;
  std::map<LocId, std::string> loc_display_;
  int unit_param_counter_ = 0;
};

void require_closed(const ExprPtr& e, const char* which) {
  auto fv = free_vars(e);
  if (!fv.empty())
    type_error(e->span, std::string(which) + " program has unbound variable '" + *fv.begin() + "'");
}

}  // namespace

ProgramPair parse_program_pair(const std::string& text, NameGen& gen) {
  // Split on the first line that is exactly `|||`.
  std::istringstream in(text);
  std::string line, left_src, right_src;
  bool seen_sep = false;
  while (std::getline(in, line)) {
    std::string trimmed = line;
    if (!trimmed.empty() && trimmed.back() == '\r') trimmed.pop_back();
    if (!seen_sep && trimmed == "|||") {
      seen_sep = true;
      continue;
    }
    (seen_sep ? right_src : left_src) += line + "\n";
  }
  if (!seen_sep) parse_error(Span{1, 1}, "missing `|||` separator line between the two programs");

  ProgramPair pair;
  {
    Parser p(left_src, gen);
    pair.left = p.parse_whole();
  }
  {
    Parser p(right_src, gen);
    pair.right = p.parse_whole();
  }
  require_closed(pair.left, "left");
  require_closed(pair.right, "right");
  TypeChecker tc;
  pair.type = tc.typecheck_pair(pair.left, pair.right);
  return pair;
}

ExprPtr parse_expr_string(const std::string& text, NameGen& gen) {
  Parser p(text, gen);
  return p.parse_whole();
}

std::pair<AnnotPtr, std::map<std::string, LocId>> parse_annotation_string(
    const std::string& text, const std::vector<std::string>& locs_in_scope, NameGen& gen) {
  Parser p(text, gen);
  Scope sc;
  std::map<std::string, LocId> locs;
  for (auto& name : locs_in_scope) {
    LocId id = gen.fresh_loc();
    sc.locs[name].push_back(id);
    locs[name] = id;
  }
  return {p.parse_annotation_public(sc), locs};
}

}  // namespace ctxeq
