#pragma once

#include "compatkit/catalog.hpp"
#include "compatkit/hom.hpp"
#include "compatkit/permgroup.hpp"
#include "compatkit/structure.hpp"

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace compatkit {

// Two groups are compatible when some finite group maps onto both with
// isomorphic kernels. A witness system is that data made explicit.
struct WitnessSystem {
  PermGroup g;
  Homomorphism p1, p2; // surjections g -> l1, g -> l2
  PermGroup n1, n2;    // the kernels, as subgroups of g
  Homomorphism kernel_iso; // n1 -> n2
};

// Re-derives every claim in w from scratch: domains, surjectivity,
// kernels, and the kernel isomorphism. Never throws; failures land in
// *reason.
bool verify_witness(WitnessSystem const &w, std::string *reason = nullptr);

// Smallest-order witness within the bound, by walking catalog groups of
// order |l1|*k and pairing isomorphic kernels with matching quotients.
// Exhaustive ("none" really means none) only while the bound stays within
// the catalog's completeness bound. Isomorphic inputs short-circuit to the
// identity witness without touching the catalog. UndecidedError when an
// isomorphism test inside the sweep came back undecided and no witness
// was found.
std::optional<WitnessSystem> search_witness(PermGroup const &l1,
                                            PermGroup const &l2,
                                            Catalog const &catalog,
                                            std::uint64_t max_witness_order);

enum class Verdict { Compatible, Incompatible, Unknown };

std::string verdict_str(Verdict v); // "COMPATIBLE" | "INCOMPATIBLE" | "UNKNOWN"

struct Certificate;
using CertPtr = std::shared_ptr<Certificate const>;

// One rule application. Children are certificates for the recursive
// premises; `facts` holds the rule-specific numbers a checker needs in
// order to re-derive the step without rerunning the search.
struct RefutationNode {
  std::string rule; // R-ORDER | R-FACTORS | R-SUBSERIES | R-NORMSERIES |
                    // R-SIMS | R-RADCOMP
  std::map<std::string, std::string> facts;
  std::vector<CertPtr> children;
};

struct Budget {
  std::uint64_t witness_bound = 48;
  unsigned depth = 8;
  std::uint64_t time_ms = 0; // 0: no deadline
};

struct Certificate {
  Verdict verdict = Verdict::Unknown;
  PermGroup l1, l2;
  std::optional<WitnessSystem> witness;    // Compatible
  std::optional<RefutationNode> refutation; // Incompatible
  Budget budget;    // what the run actually had available
  std::string note; // Unknown: which bound ran out
};

// Shared verdict store keyed on sorted fingerprint pairs. A hit is only
// trusted after both stored groups test isomorphic to the queried ones in
// the same orientation, so fingerprint collisions cannot leak verdicts
// across genuinely different pairs. Inserts are idempotent.
struct DecideMemo {
  std::map<std::string, std::vector<CertPtr>> buckets;
  std::mutex mu;
};

struct DecideOptions {
  Budget budget;
  Catalog const *catalog = nullptr; // no catalog: witness search is skipped
  DecideMemo *memo = nullptr;       // no memo: one is created per call
  // Order of the refutation rules after the fixed prelude (order check,
  // isomorphism, witness search). Empty means the default order
  // {R-FACTORS, R-NORMSERIES, R-SIMS, R-RADCOMP}; any permutation gives
  // the same verdicts, only different work.
  std::vector<std::string> rule_order;
};

enum class MemberStatus { ProvedCompatible, Unknown, Refuted };

// A normal-subgroup pair whose quotients are isomorphic and nontrivial.
// True Sims pairs additionally have compatible members; candidates only
// over-approximate that, which is exactly what the refutation rules need.
struct SimsPairCandidate {
  PermGroup m1, m2;
  // absent when the quotient comparison came back undecided (the candidate
  // is kept; dropping it would be unsound)
  std::optional<Homomorphism> quotient_iso;
  MemberStatus member_status = MemberStatus::Unknown;
};

// All lattice-node pairs (m1, m2) with 1 != l1/m1 isomorphic to l2/m2.
// member_status is filled from the memo only; this never recurses.
std::vector<SimsPairCandidate> candidate_sims_pairs(PermGroup const &l1,
                                                    PermGroup const &l2,
                                                    DecideMemo *knowledge);

// A factor ordering realized by composition series of both groups, or
// none. Two groups have compatible subnormal series exactly when their
// sequence sets intersect: refining both series in parallel through the
// factor isomorphisms preserves the orderings.
std::optional<FactorSequence>
compatible_subnormal_series(PermGroup const &l1, PermGroup const &l2);

// Ascending chains through both normal lattices with isomorphic sections
// at every step. Every term is normal in the whole group, not only in the
// next term.
struct PairedChains {
  std::vector<PermGroup> chain1, chain2;
};

// Joint depth-first search over lattice-node pairs from (1, 1) to
// (l1, l2). Complete: "none" is a proof, except that an undecided section
// comparison raises UndecidedError rather than pretending the search was
// exhaustive.
std::optional<PairedChains> compatible_normal_series(PermGroup const &l1,
                                                     PermGroup const &l2);

// Sound decision pipeline; never Incompatible when a witness exists at
// any budget, Unknown whenever a rule's premises could not be settled.
Certificate decide(PermGroup const &l1, PermGroup const &l2,
                   DecideOptions const &opts = {});

// Recomputes every rule node from the certificate's own groups and facts,
// trusting nothing about how it was produced. Compatible certificates go
// through verify_witness; Unknown ones are vacuously fine.
bool verify_certificate(Certificate const &cert,
                        std::string *reason = nullptr);

// Consequences that hold for a *minimal* witness: characteristic functors
// agreeing on the kernels must vanish, formation membership and radical
// triviality transfer through the projections, composition-factor sets
// match across the system, and the projected kernels form a Sims pair.
struct MinimalWitnessReport {
  struct Check {
    std::string name;
    bool pass = false;
    std::string detail;
  };
  // set when minimality could not be confirmed against the catalog; the
  // checks then describe w but prove nothing
  bool advisory_only = false;
  std::vector<Check> checks;

  bool all_pass() const;
};

MinimalWitnessReport minimal_witness_checks(WitnessSystem const &w,
                                            Catalog const &catalog);

// Canonical JSON rendering of a certificate (keys sorted, one line).
// Groups are cited by expression and fingerprint; witness maps by
// generator/image pairs.
std::string certificate_json(Certificate const &cert);

} // namespace compatkit
