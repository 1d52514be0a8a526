#pragma once

#include <optional>
#include <string>
#include <vector>

#include "chaselab/chase.h"

namespace chaselab {

/// Name of the single constant of the critical instance.
inline constexpr std::string_view kWellConstant = "w";

/// One all-w fact per relation of `sig`. Throws ModelError on an empty signature.
Instance buildCritical(const Signature& sig);

/// A non-constant term u of the chase of the critical instance such that
/// R(u,...,u) holds for every relation R used in a rule body. The map
/// w -> u, extended to commute with the Skolem functions, sends the chase
/// into itself, so the chase contains terms of unbounded depth.
struct DivergenceCertificate {
    Term witness;
    std::vector<std::string> relations;  // body relations checked
    std::size_t foundAtStep = 0;         // existential firings when found
};

/// Searches `state` (a chase state over `p.signature` grown from the critical
/// instance) for a certificate. Prefers the shallowest witness.
std::optional<DivergenceCertificate> findDivergenceCertificate(const Program& p, const Instance& state);

/// Independent check: replays the chase of the critical instance up to the
/// certificate step, validates every firing, and re-checks the fixpoint facts.
bool verifyDivergenceCertificate(const Program& p, Variant variant, const DivergenceCertificate& c,
                                 std::string* why = nullptr);

enum class ProbeVerdict { TerminatesAllInstances, DivergenceWitness, Inconclusive };
const char* probeVerdictName(ProbeVerdict v);

struct ProbeResult {
    ProbeVerdict verdict = ProbeVerdict::Inconclusive;
    ChaseResult chase;
    std::optional<DivergenceCertificate> certificate;
};

/// Runs the chase on buildCritical(p.signature). Throws std::invalid_argument
/// for the Standard variant.
ProbeResult allInstancesTerminationProbe(const Program& p, const ChaseConfig& cfg);

struct DerivationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Replays `trace` (recorded with TraceLevel::Full) over `start`, checking
/// that every body is satisfied and every added fact is the Skolemized head
/// of its firing. Returns the final instance or throws DerivationError.
Instance validateDerivation(const Program& p, Variant variant, const Instance& start,
                            const std::vector<TraceEntry>& trace);

/// Replaces every constant of `d` by w throughout `traceOnD` and validates
/// the result as a derivation over buildCritical(sig). `sig` must cover the
/// program's relations. Throws DerivationError if validation fails.
std::vector<TraceEntry> liftDerivation(const Program& p, Variant variant,
                                       const std::vector<TraceEntry>& traceOnD, const Instance& d,
                                       const Signature& sig);

std::uint32_t traceMaxDepth(const std::vector<TraceEntry>& trace);

struct Lemma1Sample {
    std::string instance;
    Verdict verdict = Verdict::Terminated;
    std::size_t steps = 0;
    std::uint32_t depth = 0;
    std::uint32_t liftedDepth = 0;
    bool liftValid = false;
    std::string error;
    bool pass = false;
};

struct Lemma1Report {
    Verdict criticalVerdict = Verdict::Terminated;
    std::size_t criticalSteps = 0;
    std::uint32_t criticalDepth = 0;
    std::size_t budget = 0;
    std::vector<Lemma1Sample> samples;
    bool pass = false;
};

/// Random instances with at most `maxConstants` constants and `maxFacts` facts.
Instance randomInstance(const Signature& sig, std::uint64_t seed, std::size_t maxConstants = 4,
                        std::size_t maxFacts = 12);

/// Oblivious chase on `samples` random instances with budget
/// `factor` x (critical step count); each run's derivation is lifted to the
/// critical instance and must keep its depth.
Lemma1Report lemma1Sample(const Program& p, std::size_t samples, std::uint64_t seed,
                          std::size_t factor = 10, std::size_t criticalBudget = 1'000'000);

}  // namespace chaselab
