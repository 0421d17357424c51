#pragma once

#include "ctxeq/config.hpp"

namespace ctxeq {

// An active annotated call: opponent applied index `index` at stack depth
// `depth`; the matching proponent return happens back at that depth and must
// restore knowledge and store to `snapshot` (validated dynamically).
struct PendingCall {
  int index;
  size_t depth;
  std::string snapshot;
};

// A synchronized pair of configurations under one symbolic environment.
struct PairNode {
  SymEnv sigma;
  Config left, right;
  std::vector<PendingCall> pending;  // innermost last
  // true once the node descends from a separation block: complete traces
  // found below are block-local and need re-finding without separation
  bool separated = false;

  bool left_bottom() const { return left.bottom; }
  bool right_bottom() const { return right.bottom; }
  bool both_live() const { return !left.bottom && !right.bottom; }
  const Config& live() const { return left.bottom ? right : left; }
  Config& live() { return left.bottom ? right : left; }
};

// Garbage collection: drops store entries unreachable from Gamma, K and e,
// and abstract names that no longer occur. Idempotent.
void gc_config(Config& c);
void gc_node(PairNode& n);

// Knowledge entries that are pairwise identical on both sides add no
// distinguishing power; keep the first occurrence only.
void dedup_gamma(PairNode& n);

// Weakening: removes the given indices from both knowledge environments.
PairNode weaken(const PairNode& n, const std::set<int>& drop);

// Canonical byte-string key: invariant under per-side location permutations
// and shared alpha/index/kappa permutations, after gc and sigma restriction.
std::string canonical_key(const PairNode& n);

// Canonical serialization of (sigma, Gamma, store) only: the re-entry
// snapshot compared at call entry and return.
std::string snapshot_key(const PairNode& n);

// Up to separation: partitions the knowledge indices and stack positions
// into store-disjoint blocks (on both sides at once).
struct Separation {
  bool split = false;
  std::vector<PairNode> blocks;       // blocks[0] is the focused block
  std::vector<int> frame_block;       // stack position -> block (interleaving shape)
  std::map<int, int> index_block;     // Gamma index -> block
  std::vector<bool> self_discharged;  // per block: closed by reflexivity (bottom nodes)
};
Separation separate(const PairNode& n);

// Merges separated blocks back together (property tests): disjoint union of
// stores, union of Gamma, stack re-interleaved by the recorded shape.
PairNode merge_blocks(const Separation& sep, const SymEnv& sigma);

// State-invariant annotation application (up to abstraction + tautology).
enum class InvariantPhase { OpAppEntry, PropRetExit, PropCallOut };
enum class InvariantOutcome { NoAnnotation, Applied, Failed, Unknown };

struct InvariantResult {
  InvariantOutcome outcome;
  std::string detail;  // for diagnostics on failure
};

class ConstraintEngine;
InvariantResult apply_invariant(PairNode& n, int index, InvariantPhase phase,
                                ConstraintEngine& solver, NameGen& gen);

// The annotation attached to the pair's functions at `index`, if any.
bool index_annotated(const PairNode& n, int index);

}  // namespace ctxeq
