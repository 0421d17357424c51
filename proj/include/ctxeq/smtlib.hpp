#pragma once

#include <string>
#include <vector>

#include "ctxeq/symenv.hpp"

namespace ctxeq {

// SMT-LIB v2 text for one query: declarations for every declared kappa and
// one assert per atom / extra formula. Deterministic; doubles as cache key.
std::string smtlib_query_text(const SymEnv& sigma, const std::vector<ExprPtr>& extra);

// Expression to SMT-LIB term. Only first-order expressions are valid.
std::string smtlib_term(const ExprPtr& e);

// Kappa naming used on the wire: k<N>.
std::string smtlib_kappa_name(KappaId k);

// --- minimal s-expression reader (model parsing, lia-smt front end) ---------

struct Sexp {
  bool atom = false;
  std::string text;            // when atom
  std::vector<Sexp> children;  // when list
};

// Parses one s-expression starting at pos; advances pos. Returns false at
// end of input.
bool parse_sexp(const std::string& src, size_t& pos, Sexp& out);

// Extracts kappa assignments from a solver model response such as
// (model (define-fun k0 () Int 3) (define-fun k1 () Bool true)).
Assignment parse_model_sexp(const Sexp& s);

}  // namespace ctxeq
