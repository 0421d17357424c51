#pragma once

#include "ctxeq/ast.hpp"

namespace ctxeq {

// One atom of a symbolic environment: kappa = e or kappa <> e, where e is a
// first-order expression over constants and symbolic constants.
struct Atom {
  KappaId lhs;
  bool equal;  // false means disequality
  ExprPtr rhs;
};

// The symbolic environment sigma: an ordered conjunction of atoms plus the
// declared symbolic constants with their base types. Empty means true.
struct SymEnv {
  std::vector<Atom> atoms;
  std::map<KappaId, BaseTy> decls;

  bool is_trivially_true() const { return atoms.empty(); }

  KappaId declare(NameGen& gen, BaseTy ty) {
    KappaId k = gen.fresh_kappa();
    decls.emplace(k, ty);
    return k;
  }
  void declare_existing(KappaId k, BaseTy ty) {
    auto [it, fresh] = decls.emplace(k, ty);
    if (!fresh && it->second != ty) internal_error("kappa id reused at a different type");
  }

  // sigma, (k = rhs)
  void add_eq(KappaId k, ExprPtr rhs) { atoms.push_back({k, true, std::move(rhs)}); }
  // sigma, (k <> rhs)
  void add_ne(KappaId k, ExprPtr rhs) { atoms.push_back({k, false, std::move(rhs)}); }

  // Conjoins an arbitrary boolean formula by naming it with a fresh boolean
  // kappa: (kb = phi), (kb = true). Keeps the atom grammar intact.
  KappaId assert_formula(NameGen& gen, const ExprPtr& phi) {
    KappaId kb = declare(gen, BaseTy::Bool);
    add_eq(kb, phi);
    add_eq(kb, mk_bool(true));
    return kb;
  }

  std::string to_string() const;
};

// Assignment of concrete constants to symbolic constants.
struct Assignment {
  std::map<KappaId, Constant> values;

  const Constant* lookup(KappaId k) const {
    auto it = values.find(k);
    return it == values.end() ? nullptr : &it->second;
  }
};

// Evaluates a closed first-order expression under an assignment; returns
// nullopt when a kappa is missing from the assignment or on division by zero.
std::optional<Constant> eval_ground(const ExprPtr& e, const Assignment& a);

// Checks delta |= sigma by direct evaluation of every atom.
bool satisfies(const SymEnv& sigma, const Assignment& a);

// Substitutes assignment values for symbolic constants in an expression;
// kappas absent from the assignment are left in place.
ExprPtr instantiate(const ExprPtr& e, const Assignment& a);

// Substitutes expressions for symbolic constants (first-order traversal).
ExprPtr subst_kappas(const ExprPtr& e, const std::map<KappaId, ExprPtr>& m);

}  // namespace ctxeq
