#pragma once

#include <map>
#include <memory>
#include <optional>
#include <vector>

#include "ctxeq/ast.hpp"
#include "ctxeq/symenv.hpp"

namespace ctxeq {
namespace lia {

// Decision procedure for quantifier-free linear integer arithmetic with
// divisibility (Cooper's elimination) plus boolean variables (expansion).
// Complete on the linear fragment; anything nonlinear reports Unknown.

using Var = uint32_t;

struct LinTerm {
  std::map<Var, BigInt> coef;  // no zero entries
  BigInt k;

  void add_var(Var v, const BigInt& c);
  LinTerm scaled(const BigInt& m) const;
  LinTerm plus(const LinTerm& o) const;
  LinTerm minus(const LinTerm& o) const;
  bool ground() const { return coef.empty(); }
};

struct Formula;
using FormulaPtr = std::shared_ptr<const Formula>;

struct Formula {
  enum class K { True, False, Lt0, Eq0, Ne0, Dvd, BVar, And, Or } k;
  LinTerm t;           // Lt0/Eq0/Ne0/Dvd
  BigInt d;            // Dvd
  bool neg = false;    // Dvd: not (d | t); BVar: negated literal
  Var bvar = 0;        // BVar
  std::vector<FormulaPtr> kids;  // And/Or
};

FormulaPtr f_true();
FormulaPtr f_false();
FormulaPtr f_lt0(LinTerm t);
FormulaPtr f_eq0(LinTerm t);
FormulaPtr f_ne0(LinTerm t);
FormulaPtr f_dvd(BigInt d, LinTerm t, bool neg = false);
FormulaPtr f_bvar(Var b, bool neg = false);
FormulaPtr f_and(std::vector<FormulaPtr> kids);
FormulaPtr f_or(std::vector<FormulaPtr> kids);
FormulaPtr f_not(const FormulaPtr& f);  // pushes negation inward

enum class Result { Sat, Unsat, Unknown };

struct Model {
  std::map<Var, BigInt> ints;
  std::map<Var, bool> bools;
};

// Thrown internally when a query leaves the supported fragment.
struct Unsupported {};

class Solver {
public:
  // Declares a variable of the given kind; ids are caller-chosen and must be
  // distinct between the int and bool namespaces.
  void declare_int(Var v) { int_vars_.push_back(v); }
  void declare_bool(Var v) { bool_vars_.push_back(v); }
  Var fresh_aux_int();

  Result check(const FormulaPtr& f);
  // On Sat, extracts a model over the declared (not aux) variables.
  std::optional<Model> get_model(const FormulaPtr& f, int search_radius = 2048);

private:
  FormulaPtr eliminate_int(Var x, const FormulaPtr& f);
  std::vector<Var> int_vars_, bool_vars_;
  Var next_aux_ = 1u << 30;  // auxiliary vars live in a high range
  int64_t budget_ = 0;
};

// Compiles a symbolic environment plus extra boolean formulas into a LIA
// formula. Kappa ids map onto lia vars directly (int and bool namespaces are
// distinguished by the declared base type). Throws Unsupported for nonlinear
// terms (variable divisors, variable products).
struct Compilation {
  FormulaPtr formula;
  std::vector<Var> int_vars, bool_vars;
};
Compilation compile_query(const SymEnv& sigma, const std::vector<ExprPtr>& extra, Solver& solver);

}  // namespace lia
}  // namespace ctxeq
