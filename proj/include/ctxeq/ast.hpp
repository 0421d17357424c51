#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "ctxeq/bigint.hpp"

namespace ctxeq {

// ---------------------------------------------------------------------------
// Types
// ---------------------------------------------------------------------------

enum class BaseTy { Bool, Int, Unit };

struct Type;
using TypePtr = std::shared_ptr<const Type>;

struct Type {
  struct Base {
    BaseTy b;
  };
  struct Arrow {
    TypePtr dom, cod;
  };
  struct Product {
    std::vector<TypePtr> components;  // >= 2
  };
  std::variant<Base, Arrow, Product> node;
};

TypePtr ty_bool();
TypePtr ty_int();
TypePtr ty_unit();
TypePtr ty_base(BaseTy b);
TypePtr ty_arrow(TypePtr dom, TypePtr cod);
TypePtr ty_product(std::vector<TypePtr> components);

bool type_equal(const TypePtr& a, const TypePtr& b);
bool is_base_type(const TypePtr& t);
bool is_arrow_type(const TypePtr& t);
std::string type_to_string(const TypePtr& t);

// ---------------------------------------------------------------------------
// Names
// ---------------------------------------------------------------------------

// Locations, abstract function names and symbolic constants are numeric ids
// drawn from a per-run generator; display names are derived on demand.
using LocId = uint32_t;
using AlphaId = uint32_t;
using KappaId = uint32_t;

struct Span {
  int line = 0, col = 0;
};

// ---------------------------------------------------------------------------
// Expressions
// ---------------------------------------------------------------------------

// Base-type literal: unit, boolean, or integer.
struct Constant {
  std::variant<std::monostate, bool, BigInt> v;  // monostate = unit

  bool is_unit() const { return std::holds_alternative<std::monostate>(v); }
  bool is_bool() const { return std::holds_alternative<bool>(v); }
  bool is_int() const { return std::holds_alternative<BigInt>(v); }
  BaseTy base_ty() const { return is_unit() ? BaseTy::Unit : is_bool() ? BaseTy::Bool : BaseTy::Int; }
  bool as_bool() const { return std::get<bool>(v); }
  const BigInt& as_int() const { return std::get<BigInt>(v); }
  bool operator==(const Constant& o) const;
};

Constant const_unit();
Constant const_bool(bool b);
Constant const_int(BigInt n);

enum class ArithOp {
  Add, Sub, Mul, Div, Mod,       // Int -> Int
  Eq, Ne, Lt, Le, Gt, Ge,        // comparisons (Eq/Ne also on Bool, Unit)
  And, Or, Not                   // Bool
};

const char* arith_op_name(ArithOp op);
bool op_is_comparison(ArithOp op);

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

// State-invariant / re-entry annotation attached to a lambda.
// Patterns and formula are Exprs whose Var nodes refer to the sym_names.
struct Annot {
  std::vector<std::string> sym_names;
  std::vector<std::pair<LocId, ExprPtr>> loc_patterns;
  ExprPtr formula;  // boolean expression over sym_names; never null
};
using AnnotPtr = std::shared_ptr<const Annot>;

struct Expr {
  struct Const {
    Constant c;
  };
  struct Var {
    std::string name;
  };
  struct Lambda {
    std::optional<std::string> self;  // recursion binder
    std::string param;
    AnnotPtr annot;  // may be null
    ExprPtr body;
  };
  struct Tuple {
    std::vector<ExprPtr> elems;  // >= 2
  };
  struct Arith {
    ArithOp op;
    std::vector<ExprPtr> args;
  };
  struct App {
    ExprPtr fn, arg;
  };
  struct Cond {
    ExprPtr guard, then_e, else_e;
  };
  struct NewRef {
    LocId loc;
    ExprPtr init;  // syntactic value
    ExprPtr body;
  };
  struct Deref {
    LocId loc;
  };
  struct Assign {
    LocId loc;
    ExprPtr rhs;
  };
  struct LetTuple {
    std::vector<std::string> binders;  // n == 1 is a plain let
    ExprPtr rhs, body;
  };
  struct AbsName {
    AlphaId id;
    TypePtr ty;  // always an Arrow
  };
  struct SymConst {
    KappaId id;
    BaseTy ty;
  };
  struct Bot {};

  std::variant<Const, Var, Lambda, Tuple, Arith, App, Cond, NewRef, Deref, Assign,
               LetTuple, AbsName, SymConst, Bot>
      node;
  Span span;
};

ExprPtr mk_const(Constant c, Span sp = {});
ExprPtr mk_int(int64_t v);
ExprPtr mk_bool(bool b);
ExprPtr mk_unit();
ExprPtr mk_var(std::string name, Span sp = {});
ExprPtr mk_lambda(std::optional<std::string> self, std::string param, AnnotPtr annot, ExprPtr body,
                  Span sp = {});
ExprPtr mk_tuple(std::vector<ExprPtr> elems, Span sp = {});
ExprPtr mk_arith(ArithOp op, std::vector<ExprPtr> args, Span sp = {});
ExprPtr mk_app(ExprPtr fn, ExprPtr arg, Span sp = {});
ExprPtr mk_cond(ExprPtr g, ExprPtr t, ExprPtr e, Span sp = {});
ExprPtr mk_newref(LocId loc, ExprPtr init, ExprPtr body, Span sp = {});
ExprPtr mk_deref(LocId loc, Span sp = {});
ExprPtr mk_assign(LocId loc, ExprPtr rhs, Span sp = {});
ExprPtr mk_lettuple(std::vector<std::string> binders, ExprPtr rhs, ExprPtr body, Span sp = {});
ExprPtr mk_absname(AlphaId id, TypePtr ty);
ExprPtr mk_symconst(KappaId id, BaseTy ty);
ExprPtr mk_bot(Span sp = {});

// Value classification is purely syntactic (Const | Lambda | Tuple of values
// | AbsName | SymConst).
bool is_value(const ExprPtr& e);

// Capture-avoiding substitution of term variable x by closed value v.
ExprPtr subst(const ExprPtr& e, const std::string& x, const ExprPtr& v);
// Substitution of a location id (used when a NewRef allocates a fresh cell).
ExprPtr subst_loc(const ExprPtr& e, LocId from, LocId to);

void collect_free_locations(const ExprPtr& e, std::set<LocId>& out);
std::set<LocId> free_locations(const ExprPtr& e);
void collect_abstract_names(const ExprPtr& e, std::set<AlphaId>& out);
std::set<AlphaId> abstract_names(const ExprPtr& e);
void collect_sym_consts(const ExprPtr& e, std::set<KappaId>& out);
std::set<KappaId> sym_consts(const ExprPtr& e);
std::set<std::string> free_vars(const ExprPtr& e);

// Structural equality (exact: ids, names and constants all compared).
bool expr_equal(const ExprPtr& a, const ExprPtr& b);

// Surface-syntax printer. Location/abstract/symbolic names print as
// l#N / α#N / _k#N unless a display name is provided by the caller.
std::string expr_to_string(const ExprPtr& e);
std::string constant_to_string(const Constant& c);

// Fresh-name source for one checker run.
class NameGen {
public:
  LocId fresh_loc() { return next_loc_++; }
  AlphaId fresh_alpha() { return next_alpha_++; }
  KappaId fresh_kappa() { return next_kappa_++; }
  // Keeps runtime allocation clear of statically bound location ids.
  void reserve_locs_above(LocId max_used) { next_loc_ = std::max(next_loc_, max_used + 1); }
  void reserve_kappas_above(KappaId max_used) { next_kappa_ = std::max(next_kappa_, max_used + 1); }

private:
  LocId next_loc_ = 0;
  AlphaId next_alpha_ = 0;
  KappaId next_kappa_ = 0;
};

// Largest location id mentioned anywhere in e (binders included); 0 if none.
LocId max_static_loc(const ExprPtr& e);

// Environments for the type checker.
struct TypeEnv {
  std::map<std::string, TypePtr> vars;
};
struct StoreTyping {
  std::map<LocId, TypePtr> locs;
};

// Error carrying a source position.
struct CtxeqError : std::runtime_error {
  enum class Kind { Parse, Type, Solver, Internal };
  Kind kind;
  Span span;
  CtxeqError(Kind k, Span sp, const std::string& msg) : std::runtime_error(msg), kind(k), span(sp) {}
};

[[noreturn]] void parse_error(Span sp, const std::string& msg);
[[noreturn]] void type_error(Span sp, const std::string& msg);
[[noreturn]] void internal_error(const std::string& msg);

}  // namespace ctxeq
