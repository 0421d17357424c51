// lia-smt: a minimal SMT-LIB v2 front end over the built-in linear integer
// arithmetic procedure. Speaks just enough of the protocol to serve as a
// --solver backend for ctxeq on machines without z3:
//
//   ctxeq check file.prog --solver "path/to/lia-smt"

#include <cctype>
#include <iostream>
#include <string>
#include <vector>

#include "ctxeq/lia.hpp"
#include "ctxeq/smtlib.hpp"

using namespace ctxeq;

namespace {

struct Ctx {
  // assertion stack: frames of (asserts, decls)
  struct LevelState {
    std::vector<ExprPtr> asserts;
    std::map<std::string, BaseTy> decls;
  };
  std::vector<LevelState> stack{LevelState{}};
  std::optional<Assignment> last_model;

  LevelState& top() { return stack.back(); }

  std::map<std::string, BaseTy> all_decls() {
    std::map<std::string, BaseTy> out;
    for (auto& l : stack) out.insert(l.decls.begin(), l.decls.end());
    return out;
  }
  std::vector<ExprPtr> all_asserts() {
    std::vector<ExprPtr> out;
    for (auto& l : stack) out.insert(out.end(), l.asserts.begin(), l.asserts.end());
    return out;
  }
};

KappaId kappa_of_name(const std::string& name) {
  // names of the form k<N> map to kappa N; anything else gets hashed into a
  // disjoint range so foreign names still work
  if (name.size() > 1 && name[0] == 'k') {
    bool digits = true;
    for (size_t i = 1; i < name.size(); ++i)
      digits &= std::isdigit(static_cast<unsigned char>(name[i])) != 0;
    if (digits) return static_cast<KappaId>(std::stoul(name.substr(1)));
  }
  return static_cast<KappaId>((std::hash<std::string>{}(name) % 0x0fffffff) + 0x40000000);
}

ExprPtr term_of_sexp(const Sexp& s, Ctx& ctx) {
  if (s.atom) {
    if (s.text == "true") return mk_bool(true);
    if (s.text == "false") return mk_bool(false);
    if (std::isdigit(static_cast<unsigned char>(s.text[0])))
      return mk_const(const_int(BigInt::from_string(s.text)));
    auto decls = ctx.all_decls();
    auto it = decls.find(s.text);
    if (it == decls.end()) throw std::runtime_error("undeclared constant " + s.text);
    return mk_symconst(kappa_of_name(s.text), it->second);
  }
  if (s.children.empty() || !s.children[0].atom) throw std::runtime_error("bad term");
  const std::string& op = s.children[0].text;
  auto arg = [&](size_t i) { return term_of_sexp(s.children[i], ctx); };
  auto nary = [&](ArithOp o, ExprPtr unit) {
    if (s.children.size() == 2) return arg(1);
    ExprPtr acc = arg(1);
    for (size_t i = 2; i < s.children.size(); ++i) acc = mk_arith(o, {acc, arg(i)});
    (void)unit;
    return acc;
  };
  if (op == "+") return nary(ArithOp::Add, mk_int(0));
  if (op == "*") return nary(ArithOp::Mul, mk_int(1));
  if (op == "-") {
    if (s.children.size() == 2) return mk_arith(ArithOp::Sub, {mk_int(0), arg(1)});
    return nary(ArithOp::Sub, mk_int(0));
  }
  if (op == "div") return mk_arith(ArithOp::Div, {arg(1), arg(2)});
  if (op == "mod") return mk_arith(ArithOp::Mod, {arg(1), arg(2)});
  if (op == "=") return mk_arith(ArithOp::Eq, {arg(1), arg(2)});
  if (op == "distinct") return mk_arith(ArithOp::Ne, {arg(1), arg(2)});
  if (op == "<") return mk_arith(ArithOp::Lt, {arg(1), arg(2)});
  if (op == "<=") return mk_arith(ArithOp::Le, {arg(1), arg(2)});
  if (op == ">") return mk_arith(ArithOp::Gt, {arg(1), arg(2)});
  if (op == ">=") return mk_arith(ArithOp::Ge, {arg(1), arg(2)});
  if (op == "and") return nary(ArithOp::And, mk_bool(true));
  if (op == "or") return nary(ArithOp::Or, mk_bool(false));
  if (op == "not") return mk_arith(ArithOp::Not, {arg(1)});
  if (op == "ite")
    return std::make_shared<Expr>(Expr{Expr::Cond{arg(1), arg(2), arg(3)}, Span{}});
  throw std::runtime_error("unsupported operator " + op);
}

void run_check(Ctx& ctx, bool produce_model) {
  SymEnv sigma;
  for (auto& [name, ty] : ctx.all_decls()) sigma.declare_existing(kappa_of_name(name), ty);
  lia::Solver solver;
  lia::Compilation q;
  try {
    q = lia::compile_query(sigma, ctx.all_asserts(), solver);
  } catch (const lia::Unsupported&) {
    std::cout << "unknown\n" << std::flush;
    return;
  }
  lia::Result r = solver.check(q.formula);
  if (r == lia::Result::Unknown) {
    std::cout << "unknown\n" << std::flush;
    return;
  }
  if (r == lia::Result::Unsat) {
    ctx.last_model.reset();
    std::cout << "unsat\n" << std::flush;
    return;
  }
  if (produce_model) {
    auto m = solver.get_model(q.formula);
    Assignment a;
    if (m) {
      for (auto& [name, ty] : ctx.all_decls()) {
        KappaId k = kappa_of_name(name);
        if (ty == BaseTy::Int) {
          auto it = m->ints.find(k);
          a.values[k] = const_int(it != m->ints.end() ? it->second : BigInt(0));
        } else {
          auto it = m->bools.find(k);
          a.values[k] = const_bool(it != m->bools.end() && it->second);
        }
      }
    }
    ctx.last_model = a;
  }
  std::cout << "sat\n" << std::flush;
}

void print_model(Ctx& ctx) {
  std::cout << "(\n";
  if (ctx.last_model) {
    auto decls = ctx.all_decls();
    for (auto& [name, ty] : decls) {
      auto it = ctx.last_model->values.find(kappa_of_name(name));
      if (it == ctx.last_model->values.end()) continue;
      std::cout << "  (define-fun " << name << " () " << (ty == BaseTy::Int ? "Int" : "Bool") << " ";
      const Constant& c = it->second;
      if (c.is_bool()) {
        std::cout << (c.as_bool() ? "true" : "false");
      } else if (c.as_int().is_negative()) {
        std::cout << "(- " << (-c.as_int()).to_string() << ")";
      } else {
        std::cout << c.as_int().to_string();
      }
      std::cout << ")\n";
    }
  }
  std::cout << ")\n" << std::flush;
}

}  // namespace

// Processes one complete command s-expression. Returns false on (exit).
bool process_command(const Sexp& s, Ctx& ctx) {
  try {
    if (s.atom || s.children.empty() || !s.children[0].atom) return true;
    const std::string& cmd = s.children[0].text;
    if (cmd == "set-logic" || cmd == "set-option" || cmd == "set-info") {
      // accepted silently
    } else if (cmd == "echo") {
      std::string t = s.children.size() > 1 ? s.children[1].text : "";
      if (t.size() >= 2 && t.front() == '"' && t.back() == '"') t = t.substr(1, t.size() - 2);
      std::cout << t << "\n" << std::flush;
    } else if (cmd == "declare-const") {
      BaseTy ty = s.children[2].text == "Bool" ? BaseTy::Bool : BaseTy::Int;
      ctx.top().decls[s.children[1].text] = ty;
    } else if (cmd == "declare-fun") {
      // zero-arity functions only, i.e. constants
      BaseTy ty = s.children[3].text == "Bool" ? BaseTy::Bool : BaseTy::Int;
      ctx.top().decls[s.children[1].text] = ty;
    } else if (cmd == "assert") {
      ctx.top().asserts.push_back(term_of_sexp(s.children[1], ctx));
    } else if (cmd == "push") {
      size_t n = s.children.size() > 1 ? std::stoul(s.children[1].text) : 1;
      for (size_t i = 0; i < n; ++i) ctx.stack.push_back({});
    } else if (cmd == "pop") {
      size_t n = s.children.size() > 1 ? std::stoul(s.children[1].text) : 1;
      for (size_t i = 0; i < n && ctx.stack.size() > 1; ++i) ctx.stack.pop_back();
    } else if (cmd == "check-sat") {
      run_check(ctx, true);
    } else if (cmd == "get-model") {
      print_model(ctx);
    } else if (cmd == "reset") {
      ctx = Ctx{};
    } else if (cmd == "exit") {
      return false;
    } else {
      std::cout << "(error \"unsupported command " << cmd << "\")\n" << std::flush;
    }
  } catch (const std::exception& e) {
    std::cout << "(error \"" << e.what() << "\")\n" << std::flush;
  }
  return true;
}

int main() {
  // Commands are answered as soon as their closing parenthesis arrives, so
  // the tool works on an interactive pipe.
  Ctx ctx;
  std::string buffer;
  int depth = 0;
  bool in_sexpr = false;
  int ch;
  while ((ch = std::cin.get()) != EOF) {
    char c = static_cast<char>(ch);
    if (!in_sexpr && (c == ' ' || c == '\t' || c == '\n' || c == '\r')) continue;
    buffer.push_back(c);
    if (c == '(') {
      ++depth;
      in_sexpr = true;
    } else if (c == ')') {
      --depth;
    }
    if (in_sexpr && depth == 0) {
      size_t pos = 0;
      Sexp s;
      if (parse_sexp(buffer, pos, s)) {
        if (!process_command(s, ctx)) return 0;
      }
      buffer.clear();
      in_sexpr = false;
    }
  }
  return 0;
}
