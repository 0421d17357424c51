#include "ctxeq/lia.hpp"

#include <algorithm>

namespace ctxeq {
namespace lia {

namespace {
template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

const BigInt kZero(0), kOne(1);
}  // namespace

void LinTerm::add_var(Var v, const BigInt& c) {
  if (c.is_zero()) return;
  auto it = coef.find(v);
  if (it == coef.end()) {
    coef.emplace(v, c);
    return;
  }
  it->second = it->second + c;
  if (it->second.is_zero()) coef.erase(it);
}

LinTerm LinTerm::scaled(const BigInt& m) const {
  LinTerm r;
  if (m.is_zero()) return r;
  for (auto& [v, c] : coef) r.coef.emplace(v, c * m);
  r.k = k * m;
  return r;
}

LinTerm LinTerm::plus(const LinTerm& o) const {
  LinTerm r = *this;
  for (auto& [v, c] : o.coef) r.add_var(v, c);
  r.k = r.k + o.k;
  return r;
}

LinTerm LinTerm::minus(const LinTerm& o) const { return plus(o.scaled(BigInt(-1))); }

FormulaPtr f_true() {
  static FormulaPtr f = std::make_shared<Formula>(Formula{Formula::K::True, {}, {}, false, 0, {}});
  return f;
}
FormulaPtr f_false() {
  static FormulaPtr f = std::make_shared<Formula>(Formula{Formula::K::False, {}, {}, false, 0, {}});
  return f;
}
FormulaPtr f_lt0(LinTerm t) {
  if (t.ground()) return t.k < kZero ? f_true() : f_false();
  return std::make_shared<Formula>(Formula{Formula::K::Lt0, std::move(t), {}, false, 0, {}});
}
FormulaPtr f_eq0(LinTerm t) {
  if (t.ground()) return t.k.is_zero() ? f_true() : f_false();
  return std::make_shared<Formula>(Formula{Formula::K::Eq0, std::move(t), {}, false, 0, {}});
}
FormulaPtr f_ne0(LinTerm t) {
  if (t.ground()) return t.k.is_zero() ? f_false() : f_true();
  return std::make_shared<Formula>(Formula{Formula::K::Ne0, std::move(t), {}, false, 0, {}});
}
FormulaPtr f_dvd(BigInt d, LinTerm t, bool neg) {
  d = d.abs();
  if (d.is_zero()) internal_error("dvd by zero");
  if (d == kOne) return neg ? f_false() : f_true();
  // reduce coefficients mod d
  LinTerm r;
  for (auto& [v, c] : t.coef) r.add_var(v, c.mod_euclid(d));
  r.k = t.k.mod_euclid(d);
  if (r.ground()) {
    bool holds = r.k.is_zero();
    return holds != neg ? f_true() : f_false();
  }
  return std::make_shared<Formula>(Formula{Formula::K::Dvd, std::move(r), std::move(d), neg, 0, {}});
}
FormulaPtr f_bvar(Var b, bool neg) {
  return std::make_shared<Formula>(Formula{Formula::K::BVar, {}, {}, neg, b, {}});
}

FormulaPtr f_and(std::vector<FormulaPtr> kids) {
  std::vector<FormulaPtr> out;
  for (auto& kf : kids) {
    if (kf->k == Formula::K::False) return f_false();
    if (kf->k == Formula::K::True) continue;
    if (kf->k == Formula::K::And) {
      out.insert(out.end(), kf->kids.begin(), kf->kids.end());
      continue;
    }
    out.push_back(kf);
  }
  if (out.empty()) return f_true();
  if (out.size() == 1) return out[0];
  return std::make_shared<Formula>(Formula{Formula::K::And, {}, {}, false, 0, std::move(out)});
}

FormulaPtr f_or(std::vector<FormulaPtr> kids) {
  std::vector<FormulaPtr> out;
  for (auto& kf : kids) {
    if (kf->k == Formula::K::True) return f_true();
    if (kf->k == Formula::K::False) continue;
    if (kf->k == Formula::K::Or) {
      out.insert(out.end(), kf->kids.begin(), kf->kids.end());
      continue;
    }
    out.push_back(kf);
  }
  if (out.empty()) return f_false();
  if (out.size() == 1) return out[0];
  return std::make_shared<Formula>(Formula{Formula::K::Or, {}, {}, false, 0, std::move(out)});
}

FormulaPtr f_not(const FormulaPtr& f) {
  switch (f->k) {
    case Formula::K::True: return f_false();
    case Formula::K::False: return f_true();
    case Formula::K::Lt0: {
      // not (t < 0)  <=>  -t - 1 < 0
      LinTerm t = f->t.scaled(BigInt(-1));
      t.k = t.k - kOne;
      return f_lt0(std::move(t));
    }
    case Formula::K::Eq0: return f_ne0(f->t);
    case Formula::K::Ne0: return f_eq0(f->t);
    case Formula::K::Dvd: return f_dvd(f->d, f->t, !f->neg);
    case Formula::K::BVar: return f_bvar(f->bvar, !f->neg);
    case Formula::K::And: {
      std::vector<FormulaPtr> kids;
      for (auto& kf : f->kids) kids.push_back(f_not(kf));
      return f_or(std::move(kids));
    }
    case Formula::K::Or: {
      std::vector<FormulaPtr> kids;
      for (auto& kf : f->kids) kids.push_back(f_not(kf));
      return f_and(std::move(kids));
    }
  }
  internal_error("f_not");
}

namespace {

bool contains_var(const FormulaPtr& f, Var x, bool boolean) {
  switch (f->k) {
    case Formula::K::BVar: return boolean && f->bvar == x;
    case Formula::K::Lt0:
    case Formula::K::Eq0:
    case Formula::K::Ne0:
    case Formula::K::Dvd: return !boolean && f->t.coef.count(x) > 0;
    case Formula::K::And:
    case Formula::K::Or:
      for (auto& kf : f->kids)
        if (contains_var(kf, x, boolean)) return true;
      return false;
    default: return false;
  }
}

FormulaPtr subst_bool(const FormulaPtr& f, Var b, bool val) {
  switch (f->k) {
    case Formula::K::BVar:
      if (f->bvar != b) return f;
      return (val != f->neg) ? f_true() : f_false();
    case Formula::K::And: {
      std::vector<FormulaPtr> kids;
      for (auto& kf : f->kids) kids.push_back(subst_bool(kf, b, val));
      return f_and(std::move(kids));
    }
    case Formula::K::Or: {
      std::vector<FormulaPtr> kids;
      for (auto& kf : f->kids) kids.push_back(subst_bool(kf, b, val));
      return f_or(std::move(kids));
    }
    default: return f;
  }
}

// Substitutes x := t (an x-free term) throughout.
FormulaPtr subst_int(const FormulaPtr& f, Var x, const LinTerm& t) {
  switch (f->k) {
    case Formula::K::Lt0:
    case Formula::K::Eq0:
    case Formula::K::Ne0:
    case Formula::K::Dvd: {
      auto it = f->t.coef.find(x);
      if (it == f->t.coef.end()) return f;
      BigInt c = it->second;
      LinTerm nt = f->t;
      nt.coef.erase(x);
      nt = nt.plus(t.scaled(c));
      switch (f->k) {
        case Formula::K::Lt0: return f_lt0(std::move(nt));
        case Formula::K::Eq0: return f_eq0(std::move(nt));
        case Formula::K::Ne0: return f_ne0(std::move(nt));
        default: return f_dvd(f->d, nt, f->neg);
      }
    }
    case Formula::K::And: {
      std::vector<FormulaPtr> kids;
      for (auto& kf : f->kids) kids.push_back(subst_int(kf, x, t));
      return f_and(std::move(kids));
    }
    case Formula::K::Or: {
      std::vector<FormulaPtr> kids;
      for (auto& kf : f->kids) kids.push_back(subst_int(kf, x, t));
      return f_or(std::move(kids));
    }
    default: return f;
  }
}

// Looks for a top-level conjunct x = t with |coef(x)| = 1 and x not in t;
// returns the substitution that removes x without full elimination.
bool find_definition(const FormulaPtr& f, Var x, LinTerm& out) {
  if (f->k == Formula::K::Eq0) {
    auto it = f->t.coef.find(x);
    if (it == f->t.coef.end()) return false;
    if (!(it->second == kOne || it->second == BigInt(-1))) return false;
    // c*x + r = 0  =>  x = -r/c
    LinTerm r = f->t;
    r.coef.erase(x);
    out = r.scaled(it->second == kOne ? BigInt(-1) : kOne);
    return true;
  }
  if (f->k == Formula::K::And) {
    for (auto& kf : f->kids)
      if (find_definition(kf, x, out)) return true;
  }
  return false;
}

// Rewrites =/<> atoms over x into </dvd form so Cooper sees only Lt0 and Dvd.
FormulaPtr expand_eq_over(const FormulaPtr& f, Var x) {
  switch (f->k) {
    case Formula::K::Eq0: {
      if (!f->t.coef.count(x)) return f;
      LinTerm m1 = f->t;
      m1.k = m1.k - kOne;  // t - 1 < 0
      LinTerm m2 = f->t.scaled(BigInt(-1));
      m2.k = m2.k - kOne;  // -t - 1 < 0
      return f_and({f_lt0(std::move(m1)), f_lt0(std::move(m2))});
    }
    case Formula::K::Ne0: {
      if (!f->t.coef.count(x)) return f;
      return f_or({f_lt0(f->t), f_lt0(f->t.scaled(BigInt(-1)))});
    }
    case Formula::K::And: {
      std::vector<FormulaPtr> kids;
      for (auto& kf : f->kids) kids.push_back(expand_eq_over(kf, x));
      return f_and(std::move(kids));
    }
    case Formula::K::Or: {
      std::vector<FormulaPtr> kids;
      for (auto& kf : f->kids) kids.push_back(expand_eq_over(kf, x));
      return f_or(std::move(kids));
    }
    default: return f;
  }
}

void lcm_coeffs(const FormulaPtr& f, Var x, BigInt& delta) {
  switch (f->k) {
    case Formula::K::Lt0:
    case Formula::K::Dvd: {
      auto it = f->t.coef.find(x);
      if (it != f->t.coef.end()) delta = BigInt::lcm(delta, it->second.abs());
      break;
    }
    case Formula::K::And:
    case Formula::K::Or:
      for (auto& kf : f->kids) lcm_coeffs(kf, x, delta);
      break;
    default: break;
  }
}

// Scales atoms so x's coefficient is +/-delta, then renames delta*x to a unit
// variable (conceptually y); the divisibility delta | y is added by caller.
FormulaPtr unitize(const FormulaPtr& f, Var x, const BigInt& delta) {
  switch (f->k) {
    case Formula::K::Lt0: {
      auto it = f->t.coef.find(x);
      if (it == f->t.coef.end()) return f;
      BigInt c = it->second;
      BigInt m = delta.div_euclid(c.abs());
      LinTerm t = f->t.scaled(m);  // m > 0 keeps the inequality direction
      // now coefficient of x is +/-delta; normalize it to +/-1
      BigInt cx = t.coef[x];
      t.coef[x] = cx.is_negative() ? BigInt(-1) : kOne;
      return f_lt0(std::move(t));
    }
    case Formula::K::Dvd: {
      auto it = f->t.coef.find(x);
      if (it == f->t.coef.end()) return f;
      BigInt c = it->second;
      BigInt m = delta.div_euclid(c.abs());
      LinTerm t = f->t.scaled(m);
      BigInt nd = f->d * m;
      BigInt cx = t.coef[x];
      t.coef[x] = cx.is_negative() ? BigInt(-1) : kOne;
      return f_dvd(nd, t, f->neg);
    }
    case Formula::K::And:
    case Formula::K::Or: {
      std::vector<FormulaPtr> kids;
      for (auto& kf : f->kids) kids.push_back(unitize(kf, x, delta));
      return f->k == Formula::K::And ? f_and(std::move(kids)) : f_or(std::move(kids));
    }
    default: return f;
  }
}

void lcm_divisors(const FormulaPtr& f, Var x, BigInt& dd) {
  switch (f->k) {
    case Formula::K::Dvd:
      if (f->t.coef.count(x)) dd = BigInt::lcm(dd, f->d);
      break;
    case Formula::K::And:
    case Formula::K::Or:
      for (auto& kf : f->kids) lcm_divisors(kf, x, dd);
      break;
    default: break;
  }
}

// Minus-infinity projection: x's upper bounds hold, lower bounds fail.
FormulaPtr proj_minf(const FormulaPtr& f, Var x) {
  switch (f->k) {
    case Formula::K::Lt0: {
      auto it = f->t.coef.find(x);
      if (it == f->t.coef.end()) return f;
      return it->second == kOne ? f_true() : f_false();
    }
    case Formula::K::And:
    case Formula::K::Or: {
      std::vector<FormulaPtr> kids;
      for (auto& kf : f->kids) kids.push_back(proj_minf(kf, x));
      return f->k == Formula::K::And ? f_and(std::move(kids)) : f_or(std::move(kids));
    }
    default: return f;  // Dvd over x is kept; substitution happens later
  }
}

void lower_bound_terms(const FormulaPtr& f, Var x, std::vector<LinTerm>& out) {
  switch (f->k) {
    case Formula::K::Lt0: {
      auto it = f->t.coef.find(x);
      // -x + r < 0 gives the lower bound x > r
      if (it != f->t.coef.end() && it->second == BigInt(-1)) {
        LinTerm r = f->t;
        r.coef.erase(x);
        out.push_back(std::move(r));
      }
      break;
    }
    case Formula::K::And:
    case Formula::K::Or:
      for (auto& kf : f->kids) lower_bound_terms(kf, x, out);
      break;
    default: break;
  }
}

size_t formula_size(const FormulaPtr& f) {
  size_t n = 1;
  for (auto& kf : f->kids) n += formula_size(kf);
  return n;
}

bool eval_ground_formula(const FormulaPtr& f) {
  switch (f->k) {
    case Formula::K::True: return true;
    case Formula::K::False: return false;
    case Formula::K::And:
      for (auto& kf : f->kids)
        if (!eval_ground_formula(kf)) return false;
      return true;
    case Formula::K::Or:
      for (auto& kf : f->kids)
        if (eval_ground_formula(kf)) return true;
      return false;
    default: internal_error("eval_ground_formula: free variable remains");
  }
}

}  // namespace

Var Solver::fresh_aux_int() {
  Var v = next_aux_++;
  int_vars_.push_back(v);
  return v;
}

// Cooper's elimination of one existential integer variable.
FormulaPtr Solver::eliminate_int(Var x, const FormulaPtr& f0) {
  if (!contains_var(f0, x, false)) return f0;

  // Fast path: a defining top-level equation lets us substitute x away.
  LinTerm def;
  if (find_definition(f0, x, def)) return subst_int(f0, x, def);

  // Existentials commute with x-free context: pull out kids that do not
  // mention x so the quantifier duplication below stays local.
  if (f0->k == Formula::K::And || f0->k == Formula::K::Or) {
    std::vector<FormulaPtr> with_x, without_x;
    for (auto& kf : f0->kids)
      (contains_var(kf, x, false) ? with_x : without_x).push_back(kf);
    if (!without_x.empty()) {
      FormulaPtr inner = f0->k == Formula::K::And ? f_and(std::move(with_x)) : f_or(std::move(with_x));
      without_x.push_back(eliminate_int(x, inner));
      return f0->k == Formula::K::And ? f_and(std::move(without_x)) : f_or(std::move(without_x));
    }
    if (f0->k == Formula::K::Or) {
      // disjunction distributes over the existential outright
      std::vector<FormulaPtr> kids;
      for (auto& kf : f0->kids) kids.push_back(eliminate_int(x, kf));
      return f_or(std::move(kids));
    }
  }

  FormulaPtr f = expand_eq_over(f0, x);
  BigInt delta = kOne;
  lcm_coeffs(f, x, delta);
  f = unitize(f, x, delta);
  {
    LinTerm xt;
    xt.add_var(x, kOne);
    f = f_and({f, f_dvd(delta, xt, false)});
  }
  BigInt period = kOne;
  lcm_divisors(f, x, period);
  if (!period.fits_int64() || period.to_int64() > 65536) throw Unsupported{};

  std::vector<LinTerm> lows;
  lower_bound_terms(f, x, lows);
  // dedupe identical bound terms
  std::sort(lows.begin(), lows.end(), [](const LinTerm& a, const LinTerm& b) {
    if (a.k.compare(b.k) != 0) return a.k < b.k;
    auto ia = a.coef.begin();
    auto ib = b.coef.begin();
    for (; ia != a.coef.end() && ib != b.coef.end(); ++ia, ++ib) {
      if (ia->first != ib->first) return ia->first < ib->first;
      if (ia->second.compare(ib->second) != 0) return ia->second < ib->second;
    }
    return a.coef.size() < b.coef.size();
  });
  lows.erase(std::unique(lows.begin(), lows.end(),
                         [](const LinTerm& a, const LinTerm& b) {
                           return a.k == b.k && a.coef.size() == b.coef.size() &&
                                  std::equal(a.coef.begin(), a.coef.end(), b.coef.begin(),
                                             [](auto& p, auto& q) {
                                               return p.first == q.first && p.second == q.second;
                                             });
                         }),
             lows.end());

  FormulaPtr minf = proj_minf(f, x);
  std::vector<FormulaPtr> disj;
  int64_t p = period.to_int64();
  for (int64_t j = 1; j <= p; ++j) {
    LinTerm tj;
    tj.k = BigInt(j);
    disj.push_back(subst_int(minf, x, tj));
    for (auto& b : lows) {
      LinTerm t = b;
      t.k = t.k + BigInt(j);
      disj.push_back(subst_int(f, x, t));
    }
    budget_ -= static_cast<int64_t>(lows.size()) + 1;
    if (budget_ < 0) throw Unsupported{};
  }
  FormulaPtr r = f_or(std::move(disj));
  budget_ -= static_cast<int64_t>(formula_size(r));
  if (budget_ < 0) throw Unsupported{};
  return r;
}

Result Solver::check(const FormulaPtr& f0) {
  try {
    budget_ = 2'000'000;
    FormulaPtr f = f0;
    for (Var b : bool_vars_) {
      if (!contains_var(f, b, true)) continue;
      f = f_or({subst_bool(f, b, true), subst_bool(f, b, false)});
      budget_ -= static_cast<int64_t>(formula_size(f));
      if (budget_ < 0) throw Unsupported{};
    }
    // Eliminate defined variables first to keep Cooper's disjunctions small.
    std::vector<Var> order = int_vars_;
    std::stable_sort(order.begin(), order.end(), [&](Var a, Var b) {
      LinTerm t;
      bool da = find_definition(f, a, t), db = find_definition(f, b, t);
      return da > db;
    });
    for (Var x : order) f = eliminate_int(x, f);
    // Auxiliary vars introduced by mod/div compilation may appear after the
    // declared ones; eliminate until none remain.
    for (int guard = 0; guard < 1000; ++guard) {
      Var remaining = 0;
      bool found = false;
      for (Var v : int_vars_) {
        if (contains_var(f, v, false)) {
          remaining = v;
          found = true;
          break;
        }
      }
      if (!found) break;
      f = eliminate_int(remaining, f);
    }
    return eval_ground_formula(f) ? Result::Sat : Result::Unsat;
  } catch (const Unsupported&) {
    return Result::Unknown;
  }
}

std::optional<Model> Solver::get_model(const FormulaPtr& f0, int search_radius) {
  if (check(f0) != Result::Sat) return std::nullopt;
  Model m;
  FormulaPtr f = f0;
  for (Var b : bool_vars_) {
    if (b >= (1u << 30)) continue;
    FormulaPtr ft = subst_bool(f, b, true);
    if (check(ft) == Result::Sat) {
      m.bools[b] = true;
      f = ft;
    } else {
      m.bools[b] = false;
      f = subst_bool(f, b, false);
    }
  }
  for (Var x : int_vars_) {
    if (x >= (1u << 30)) continue;  // aux vars are not part of the model
    bool fixed = false;
    for (int i = 0; i <= search_radius && !fixed; ++i) {
      for (int sign = 0; sign < (i == 0 ? 1 : 2) && !fixed; ++sign) {
        BigInt v(sign == 0 ? i : -i);
        LinTerm t;
        t.add_var(x, kOne);
        t.k = -v;
        FormulaPtr fx = f_and({f, f_eq0(t)});
        if (check(fx) == Result::Sat) {
          m.ints[x] = v;
          f = fx;
          fixed = true;
        }
      }
    }
    if (!fixed) return std::nullopt;  // model exists but lies outside the search radius
  }
  return m;
}

// --- compilation from expressions -------------------------------------------

namespace {

struct Compiler {
  Solver& solver;
  std::vector<FormulaPtr> side;  // constraints from mod/div expansion

  LinTerm int_term(const ExprPtr& e) {
    return std::visit(
        overloaded{
            [&](const Expr::Const& c) -> LinTerm {
              if (!c.c.is_int()) throw Unsupported{};
              LinTerm t;
              t.k = c.c.as_int();
              return t;
            },
            [&](const Expr::SymConst& k) -> LinTerm {
              if (k.ty != BaseTy::Int) throw Unsupported{};
              LinTerm t;
              t.add_var(k.id, kOne);
              return t;
            },
            [&](const Expr::Arith& a) -> LinTerm {
              switch (a.op) {
                case ArithOp::Add: return int_term(a.args[0]).plus(int_term(a.args[1]));
                case ArithOp::Sub: return int_term(a.args[0]).minus(int_term(a.args[1]));
                case ArithOp::Mul: {
                  LinTerm l = int_term(a.args[0]);
                  LinTerm r = int_term(a.args[1]);
                  if (l.ground()) return r.scaled(l.k);
                  if (r.ground()) return l.scaled(r.k);
                  throw Unsupported{};  // nonlinear
                }
                case ArithOp::Div:
                case ArithOp::Mod: {
                  LinTerm l = int_term(a.args[0]);
                  LinTerm r = int_term(a.args[1]);
                  if (!r.ground() || r.k.is_zero()) throw Unsupported{};
                  BigInt c = r.k;
                  // Euclidean division: l = c*q + rem, 0 <= rem < |c|
                  Var q = solver.fresh_aux_int();
                  Var rem = solver.fresh_aux_int();
                  LinTerm eq = l;
                  eq.add_var(q, -c);
                  eq.add_var(rem, BigInt(-1));
                  side.push_back(f_eq0(std::move(eq)));
                  LinTerm lo;  // -rem - 1 < 0  (rem >= 0)
                  lo.add_var(rem, BigInt(-1));
                  lo.k = BigInt(-1);
                  side.push_back(f_lt0(std::move(lo)));
                  LinTerm hi;  // rem - |c| < 0
                  hi.add_var(rem, kOne);
                  hi.k = -c.abs();
                  side.push_back(f_lt0(std::move(hi)));
                  LinTerm res;
                  res.add_var(a.op == ArithOp::Div ? q : rem, kOne);
                  return res;
                }
                default: throw Unsupported{};
              }
            },
            [&](const auto&) -> LinTerm { throw Unsupported{}; },
        },
        e->node);
  }

  bool expr_is_bool(const ExprPtr& e) {
    return std::visit(
        overloaded{
            [&](const Expr::Const& c) { return c.c.is_bool() || c.c.is_unit(); },
            [&](const Expr::SymConst& k) { return k.ty != BaseTy::Int; },
            [&](const Expr::Arith& a) {
              switch (a.op) {
                case ArithOp::Add:
                case ArithOp::Sub:
                case ArithOp::Mul:
                case ArithOp::Div:
                case ArithOp::Mod: return false;
                default: return true;
              }
            },
            [&](const Expr::Cond& c) { return expr_is_bool(c.then_e); },
            [&](const auto&) -> bool { throw Unsupported{}; },
        },
        e->node);
  }

  FormulaPtr boolean(const ExprPtr& e) {
    return std::visit(
        overloaded{
            [&](const Expr::Const& c) -> FormulaPtr {
              if (c.c.is_bool()) return c.c.as_bool() ? f_true() : f_false();
              if (c.c.is_unit()) return f_true();  // only for unit equalities
              throw Unsupported{};
            },
            [&](const Expr::SymConst& k) -> FormulaPtr {
              if (k.ty == BaseTy::Bool) return f_bvar(k.id);
              if (k.ty == BaseTy::Unit) return f_true();
              throw Unsupported{};
            },
            [&](const Expr::Arith& a) -> FormulaPtr {
              switch (a.op) {
                case ArithOp::And: return f_and({boolean(a.args[0]), boolean(a.args[1])});
                case ArithOp::Or: return f_or({boolean(a.args[0]), boolean(a.args[1])});
                case ArithOp::Not: return f_not(boolean(a.args[0]));
                case ArithOp::Eq:
                case ArithOp::Ne: {
                  bool isb = expr_is_bool(a.args[0]) || expr_is_bool(a.args[1]);
                  FormulaPtr eq;
                  if (isb) {
                    FormulaPtr l = boolean(a.args[0]);
                    FormulaPtr r = boolean(a.args[1]);
                    eq = f_or({f_and({l, r}), f_and({f_not(l), f_not(r)})});
                  } else {
                    eq = f_eq0(int_term(a.args[0]).minus(int_term(a.args[1])));
                  }
                  return a.op == ArithOp::Eq ? eq : f_not(eq);
                }
                case ArithOp::Lt:
                  return f_lt0(int_term(a.args[0]).minus(int_term(a.args[1])));
                case ArithOp::Le: {
                  LinTerm t = int_term(a.args[0]).minus(int_term(a.args[1]));
                  t.k = t.k - kOne;
                  return f_lt0(std::move(t));
                }
                case ArithOp::Gt:
                  return f_lt0(int_term(a.args[1]).minus(int_term(a.args[0])));
                case ArithOp::Ge: {
                  LinTerm t = int_term(a.args[1]).minus(int_term(a.args[0]));
                  t.k = t.k - kOne;
                  return f_lt0(std::move(t));
                }
                default: throw Unsupported{};
              }
            },
            [&](const Expr::Cond& c) -> FormulaPtr {
              FormulaPtr g = boolean(c.guard);
              return f_or({f_and({g, boolean(c.then_e)}), f_and({f_not(g), boolean(c.else_e)})});
            },
            [&](const auto&) -> FormulaPtr { throw Unsupported{}; },
        },
        e->node);
  }
};

}  // namespace

Compilation compile_query(const SymEnv& sigma, const std::vector<ExprPtr>& extra, Solver& solver) {
  Compilation out;
  for (auto& [k, ty] : sigma.decls) {
    if (ty == BaseTy::Int) {
      out.int_vars.push_back(k);
      solver.declare_int(k);
    } else if (ty == BaseTy::Bool) {
      out.bool_vars.push_back(k);
      solver.declare_bool(k);
    }
    // unit kappas carry no information
  }
  Compiler c{solver, {}};
  std::vector<FormulaPtr> conj;
  for (auto& atom : sigma.atoms) {
    auto it = sigma.decls.find(atom.lhs);
    if (it == sigma.decls.end()) internal_error("atom over undeclared kappa");
    FormulaPtr eq;
    if (it->second == BaseTy::Int) {
      LinTerm t;
      t.add_var(atom.lhs, kOne);
      eq = f_eq0(t.minus(c.int_term(atom.rhs)));
    } else if (it->second == BaseTy::Bool) {
      FormulaPtr l = f_bvar(atom.lhs);
      FormulaPtr r = c.boolean(atom.rhs);
      eq = f_or({f_and({l, r}), f_and({f_not(l), f_not(r)})});
    } else {
      eq = f_true();  // unit: always equal
    }
    conj.push_back(atom.equal ? eq : f_not(eq));
  }
  for (auto& e : extra) conj.push_back(c.boolean(e));
  conj.insert(conj.end(), c.side.begin(), c.side.end());
  out.formula = f_and(std::move(conj));
  return out;
}

}  // namespace lia
}  // namespace ctxeq
