#pragma once

#include <cstdint>
#include <deque>
#include <memory>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "chaselab/instance.h"
#include "chaselab/model.h"
#include "chaselab/query.h"

namespace chaselab {

enum class Variant { Oblivious, SemiOblivious, Standard };
enum class Strategy { FIFO, LIFO, Random, Exhaustive };
enum class TraceLevel { None, Existential, Full };
enum class Verdict { Terminated, BudgetExceeded };
enum class StopReason { None, Steps, Depth };

const char* variantName(Variant v);
const char* strategyName(Strategy s);
const char* verdictName(Verdict v);
std::optional<Variant> parseVariant(std::string_view s);
std::optional<Strategy> parseStrategy(std::string_view s);

struct ChaseConfig {
    Variant variant = Variant::Oblivious;
    /// Budget on existential firings. Datalog firings are not counted here.
    std::size_t maxSteps = 1'000'000;
    std::optional<std::uint32_t> maxDepth = 10'000;
    Strategy strategy = Strategy::FIFO;
    std::uint64_t seed = 0;
    TraceLevel traceLevel = TraceLevel::Existential;
    /// Keep only the last `traceSuffix` entries; 0 keeps everything.
    std::size_t traceSuffix = 0;
};

/// Body homomorphism of one rule. `binding[v]` is the image of body
/// variable v (variables 0..bodyVarCount-1 of the rule).
struct Trigger {
    std::uint32_t rule = 0;
    std::vector<TermId> binding;

    friend bool operator==(const Trigger&, const Trigger&) = default;
};

struct TraceEntry {
    std::size_t step = 0;  // existential firings before this entry
    std::uint32_t rule = 0;
    bool existential = false;
    std::vector<TermId> binding;
    std::vector<Fact> added;
    std::uint32_t depthAfter = 0;
};

struct ChaseResult {
    Verdict verdict = Verdict::Terminated;
    StopReason stopReason = StopReason::None;
    Instance finalInstance;
    std::size_t stepsUsed = 0;
    std::size_t datalogFirings = 0;
    std::uint32_t maxTermDepth = 0;
    std::vector<TraceEntry> trace;
    /// Entries dropped from the front when a trace suffix limit is set.
    std::size_t traceDropped = 0;
};

/// Skolemized form of one rule: existential k of the head is replaced by
/// fn_k(args[k]) where args are rule variables.
struct SkolemRule {
    std::uint32_t rule = 0;
    std::vector<SkolemFn> functions;
    std::vector<std::vector<VarId>> args;
};

struct SkolemProgram {
    const Program* source = nullptr;
    Variant variant = Variant::Oblivious;
    std::vector<SkolemRule> rules;

    std::string ruleString(std::size_t i) const;
};

/// Oblivious: Skolem arguments are all body variables in variable order.
/// SemiOblivious and Standard: frontier variables only (Standard adds a
/// per-firing nonce at run time).
SkolemProgram skolemize(const Program& p, Variant variant);

/// All body homomorphisms of rule `ruleIndex` into `inst`, sorted by
/// lexicographic term order of the bindings.
std::vector<Trigger> findTriggers(const Program& p, std::size_t ruleIndex, const Instance& inst);

/// Memory of fired triggers keyed per variant: full body binding for
/// Oblivious, frontier restriction otherwise.
class FiredLog {
public:
    static std::vector<TermId> key(Variant v, const TGD& rule, const Trigger& t);
    bool contains(Variant v, const TGD& rule, const Trigger& t) const;
    /// Returns false if the key was already present.
    bool record(Variant v, const TGD& rule, const Trigger& t);
    std::size_t size() const { return keys_.size(); }

private:
    std::set<std::vector<TermId>> keys_;
};

/// Head of `rule` with the frontier bound by `t` has an extension in `inst`.
bool headSatisfied(const TGD& rule, const Trigger& t, const Instance& inst);

bool stepApplicable(Variant v, const Program& p, const Instance& inst, const Trigger& t,
                    const FiredLog& fired);

/// Incremental chase state. Datalog rules are saturated semi-naively before
/// any existential trigger is considered. Copyable, so callers can branch.
class ChaseRun {
public:
    ChaseRun(const Program& p, const Instance& d, ChaseConfig cfg);

    /// Datalog fixpoint followed by discovery of new existential triggers.
    void saturate();
    /// Pending existential triggers that are applicable now, in queue order
    /// (deduplicated by firing key).
    std::vector<Trigger> applicableTriggers();
    /// Next applicable trigger under the configured strategy, removed from
    /// the queue; nullopt when none remains.
    std::optional<Trigger> nextTrigger();
    /// Fires an existential trigger. Does not saturate.
    void fire(const Trigger& t);
    /// saturate + nextTrigger + fire. Returns false when no trigger was left.
    bool step();

    /// Runs to termination or budget.
    ChaseResult run();
    ChaseResult result(Verdict v, StopReason reason) const;

    const Program& program() const { return *program_; }
    const Instance& instance() const { return inst_; }
    const ChaseConfig& config() const { return cfg_; }
    std::size_t steps() const { return steps_; }
    std::size_t datalogFirings() const { return datalogFirings_; }
    const std::deque<TraceEntry>& trace() const { return trace_; }

    /// Facts produced by firing rule `rule` with `binding` (body variables)
    /// at existential step `nonce`; Skolem arguments follow the variant.
    std::vector<Fact> headFacts(std::uint32_t rule, std::span<const TermId> binding,
                                std::uint64_t nonce) const;

private:
    struct Compiled {
        std::vector<JoinPlan> deltaPlans;  // one per body atom, that atom first
        JoinPlan headCheck;                // head atoms, frontier bound
    };

    void saturateDatalog();
    void discover();
    bool applicable(const Trigger& t) const;
    void addTrace(TraceEntry e);

    std::shared_ptr<const Program> program_;
    std::shared_ptr<const std::vector<Compiled>> compiled_;
    ChaseConfig cfg_;
    Instance inst_;
    std::vector<std::uint32_t> datalogRules_;
    std::vector<std::uint32_t> existentialRules_;
    std::vector<RowId> done_;                // per relation, Datalog watermark
    std::vector<std::vector<RowId>> seen_;   // per existential rule, per relation
    std::deque<Trigger> queue_;
    FiredLog queued_;
    std::deque<TraceEntry> trace_;
    std::size_t traceDropped_ = 0;
    std::size_t steps_ = 0;
    std::size_t datalogFirings_ = 0;
    std::mt19937_64 rng_;
};

ChaseResult runChase(const Program& p, const Instance& d, const ChaseConfig& cfg);

enum class PathsVerdict { AllTerminate, FoundDivergentPrefix, Inconclusive };
const char* pathsVerdictName(PathsVerdict v);

struct PathsResult {
    PathsVerdict verdict = PathsVerdict::AllTerminate;
    std::size_t pathsExplored = 0;
    std::size_t longestPath = 0;
    std::vector<TraceEntry> witness;  // firing sequence of the divergent prefix
};

/// Depth-first exploration of every Standard chase firing order. Datalog is
/// saturated eagerly, so branching only happens on existential triggers.
PathsResult enumerateStandardPaths(const Program& p, const Instance& d, std::size_t stepBudget,
                                   std::size_t pathBudget);

bool checkIsModel(const Program& p, const Instance& inst);

/// Homomorphism from `from` into `to` that fixes constants (relations matched
/// by name), or nullopt.
std::optional<std::unordered_map<TermId, TermId>> findHomomorphism(const Instance& from,
                                                                   const Instance& to);

/// One JSON line. With `labels`, Skolem terms are written as _<id> (see
/// Term::label) instead of in full.
std::string traceEntryJson(const TraceEntry& e, const Program& p, bool labels = false);

}  // namespace chaselab
