#include "ctxeq/smtlib.hpp"

#include <cctype>

namespace ctxeq {

namespace {
template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;
}  // namespace

std::string smtlib_kappa_name(KappaId k) { return "k" + std::to_string(k); }

std::string smtlib_term(const ExprPtr& e) {
  return std::visit(
      overloaded{
          [&](const Expr::Const& c) -> std::string {
            if (c.c.is_bool()) return c.c.as_bool() ? "true" : "false";
            if (c.c.is_int()) {
              const BigInt& n = c.c.as_int();
              if (n.is_negative()) return "(- " + (-n).to_string() + ")";
              return n.to_string();
            }
            internal_error("unit constant in SMT term");
          },
          [&](const Expr::SymConst& k) -> std::string { return smtlib_kappa_name(k.id); },
          [&](const Expr::Arith& a) -> std::string {
            auto bin = [&](const char* op) {
              return std::string("(") + op + " " + smtlib_term(a.args[0]) + " " +
                     smtlib_term(a.args[1]) + ")";
            };
            switch (a.op) {
              case ArithOp::Add: return bin("+");
              case ArithOp::Sub: return bin("-");
              case ArithOp::Mul: return bin("*");
              case ArithOp::Div: return bin("div");
              case ArithOp::Mod: return bin("mod");
              case ArithOp::Eq: return bin("=");
              case ArithOp::Ne: return "(not " + bin("=") + ")";
              case ArithOp::Lt: return bin("<");
              case ArithOp::Le: return bin("<=");
              case ArithOp::Gt: return bin(">");
              case ArithOp::Ge: return bin(">=");
              case ArithOp::And: return bin("and");
              case ArithOp::Or: return bin("or");
              case ArithOp::Not: return "(not " + smtlib_term(a.args[0]) + ")";
            }
            internal_error("smtlib_term op");
          },
          [&](const Expr::Cond& c) -> std::string {
            return "(ite " + smtlib_term(c.guard) + " " + smtlib_term(c.then_e) + " " +
                   smtlib_term(c.else_e) + ")";
          },
          [&](const auto&) -> std::string { internal_error("higher-order term in SMT query"); },
      },
      e->node);
}

std::string smtlib_query_text(const SymEnv& sigma, const std::vector<ExprPtr>& extra) {
  std::string out;
  for (auto& [k, ty] : sigma.decls) {
    if (ty == BaseTy::Unit) continue;  // unit carries no information
    out += "(declare-const " + smtlib_kappa_name(k) + (ty == BaseTy::Int ? " Int" : " Bool") + ")\n";
  }
  for (auto& atom : sigma.atoms) {
    auto it = sigma.decls.find(atom.lhs);
    if (it != sigma.decls.end() && it->second == BaseTy::Unit) continue;
    std::string eq = "(= " + smtlib_kappa_name(atom.lhs) + " " + smtlib_term(atom.rhs) + ")";
    out += "(assert " + (atom.equal ? eq : "(not " + eq + ")") + ")\n";
  }
  for (auto& e : extra) out += "(assert " + smtlib_term(e) + ")\n";
  return out;
}

bool parse_sexp(const std::string& src, size_t& pos, Sexp& out) {
  auto skip = [&] {
    while (pos < src.size()) {
      if (std::isspace(static_cast<unsigned char>(src[pos]))) {
        ++pos;
      } else if (src[pos] == ';') {
        while (pos < src.size() && src[pos] != '\n') ++pos;
      } else {
        break;
      }
    }
  };
  skip();
  if (pos >= src.size()) return false;
  if (src[pos] == '(') {
    ++pos;
    out = Sexp{};
    for (;;) {
      skip();
      if (pos >= src.size()) return false;  // unbalanced
      if (src[pos] == ')') {
        ++pos;
        return true;
      }
      Sexp child;
      if (!parse_sexp(src, pos, child)) return false;
      out.children.push_back(std::move(child));
    }
  }
  if (src[pos] == ')') return false;
  size_t start = pos;
  if (src[pos] == '|') {  // quoted symbol
    ++pos;
    while (pos < src.size() && src[pos] != '|') ++pos;
    if (pos < src.size()) ++pos;
  } else if (src[pos] == '"') {
    ++pos;
    while (pos < src.size() && src[pos] != '"') ++pos;
    if (pos < src.size()) ++pos;
  } else {
    while (pos < src.size() && !std::isspace(static_cast<unsigned char>(src[pos])) &&
           src[pos] != '(' && src[pos] != ')')
      ++pos;
  }
  out = Sexp{};
  out.atom = true;
  out.text = src.substr(start, pos - start);
  return true;
}

namespace {
// Parses a value sexp: numeral | (- numeral) | true | false.
std::optional<Constant> parse_value(const Sexp& v) {
  if (v.atom) {
    if (v.text == "true") return const_bool(true);
    if (v.text == "false") return const_bool(false);
    if (!v.text.empty() && (std::isdigit(static_cast<unsigned char>(v.text[0])) || v.text[0] == '-'))
      return const_int(BigInt::from_string(v.text));
    return std::nullopt;
  }
  if (v.children.size() == 2 && v.children[0].atom && v.children[0].text == "-" &&
      v.children[1].atom)
    return const_int(-BigInt::from_string(v.children[1].text));
  return std::nullopt;
}
}  // namespace

Assignment parse_model_sexp(const Sexp& s) {
  Assignment a;
  // accept both (model (define-fun ..)..) and ((define-fun ..)..)
  const std::vector<Sexp>* entries = &s.children;
  std::function<void(const Sexp&)> visit_entry = [&](const Sexp& e) {
    if (e.atom || e.children.size() < 5) return;
    if (!e.children[0].atom || e.children[0].text != "define-fun") return;
    const std::string& name = e.children[1].text;
    if (name.size() < 2 || name[0] != 'k') return;
    KappaId id = 0;
    for (size_t i = 1; i < name.size(); ++i) {
      if (!std::isdigit(static_cast<unsigned char>(name[i]))) return;
      id = id * 10 + static_cast<KappaId>(name[i] - '0');
    }
    auto v = parse_value(e.children[4]);
    if (v) a.values[id] = *v;
  };
  for (auto& e : *entries) {
    if (e.atom && e.text == "model") continue;
    visit_entry(e);
  }
  return a;
}

}  // namespace ctxeq
