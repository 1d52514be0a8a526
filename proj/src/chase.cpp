#include "chaselab/chase.h"

#include <algorithm>
#include <stdexcept>

#include "json.hpp"

namespace chaselab {

const char* variantName(Variant v) {
    switch (v) {
        case Variant::Oblivious: return "oblivious";
        case Variant::SemiOblivious: return "semi-oblivious";
        case Variant::Standard: return "standard";
    }
    return "?";
}

const char* strategyName(Strategy s) {
    switch (s) {
        case Strategy::FIFO: return "fifo";
        case Strategy::LIFO: return "lifo";
        case Strategy::Random: return "random";
        case Strategy::Exhaustive: return "exhaustive";
    }
    return "?";
}

const char* verdictName(Verdict v) {
    return v == Verdict::Terminated ? "Terminated" : "BudgetExceeded";
}

const char* pathsVerdictName(PathsVerdict v) {
    switch (v) {
        case PathsVerdict::AllTerminate: return "AllTerminate";
        case PathsVerdict::FoundDivergentPrefix: return "FoundDivergentPrefix";
        case PathsVerdict::Inconclusive: return "Inconclusive";
    }
    return "?";
}

std::optional<Variant> parseVariant(std::string_view s) {
    if (s == "oblivious") return Variant::Oblivious;
    if (s == "semi-oblivious" || s == "semioblivious") return Variant::SemiOblivious;
    if (s == "standard") return Variant::Standard;
    return std::nullopt;
}

std::optional<Strategy> parseStrategy(std::string_view s) {
    if (s == "fifo") return Strategy::FIFO;
    if (s == "lifo") return Strategy::LIFO;
    if (s == "random") return Strategy::Random;
    if (s == "exhaustive") return Strategy::Exhaustive;
    return std::nullopt;
}

namespace {

std::vector<VarId> skolemArgs(const TGD& r, Variant v) {
    if (v == Variant::Oblivious) {
        std::vector<VarId> all(r.bodyVarCount());
        for (VarId i = 0; i < all.size(); ++i) all[i] = i;
        return all;
    }
    return r.frontier();
}

bool lessBinding(const std::vector<TermId>& a, const std::vector<TermId>& b) {
    const std::size_t n = std::min(a.size(), b.size());
    for (std::size_t i = 0; i < n; ++i) {
        if (a[i] == b[i]) continue;
        return compareTerms(Term::fromId(a[i]), Term::fromId(b[i])) < 0;
    }
    return a.size() < b.size();
}

bool lessTrigger(const Trigger& a, const Trigger& b) {
    if (a.rule != b.rule) return a.rule < b.rule;
    return lessBinding(a.binding, b.binding);
}

Fact instantiate(const Atom& a, std::span<const TermId> full) {
    Fact f;
    f.rel = a.rel;
    f.args.reserve(a.args.size());
    for (const Arg& x : a.args) f.args.push_back(x.isVar() ? Term::fromId(full[x.var]) : x.term);
    return f;
}

}  // namespace

std::string SkolemProgram::ruleString(std::size_t i) const {
    const SkolemRule& sr = rules.at(i);
    const TGD& r = source->rules[sr.rule];
    const Signature& sig = source->signature;
    auto argStr = [&](const Arg& x) -> std::string {
        if (!x.isVar()) return x.term.str();
        const int k = r.existentialIndex(x.var);
        if (k < 0) return r.varNames()[x.var];
        std::string s = *sr.functions[k].ruleId + "~" + std::to_string(sr.functions[k].index) + "(";
        for (std::size_t j = 0; j < sr.args[k].size(); ++j) {
            if (j) s += ",";
            s += r.varNames()[sr.args[k][j]];
        }
        return s + ")";
    };
    auto atoms = [&](const std::vector<Atom>& as) {
        std::string s;
        for (std::size_t j = 0; j < as.size(); ++j) {
            if (j) s += ", ";
            s += sig[as[j].rel].name + "(";
            for (std::size_t c = 0; c < as[j].args.size(); ++c) {
                if (c) s += ",";
                s += argStr(as[j].args[c]);
            }
            s += ")";
        }
        return s;
    };
    return atoms(r.body()) + " -> " + atoms(r.head()) + ".";
}

SkolemProgram skolemize(const Program& p, Variant variant) {
    SkolemProgram out;
    out.source = &p;
    out.variant = variant;
    for (std::uint32_t i = 0; i < p.rules.size(); ++i) {
        const TGD& r = p.rules[i];
        SkolemRule sr;
        sr.rule = i;
        for (std::uint32_t k = 0; k < r.existentials().size(); ++k) {
            sr.functions.push_back(skolemFunction(r.id(), k));
            sr.args.push_back(skolemArgs(r, variant));
        }
        out.rules.push_back(std::move(sr));
    }
    return out;
}

std::vector<Trigger> findTriggers(const Program& p, std::size_t ruleIndex, const Instance& inst) {
    const TGD& r = p.rules.at(ruleIndex);
    std::vector<Trigger> out;
    for (auto& b : allMatches(inst, r.body(), r.bodyVarCount()))
        out.push_back({static_cast<std::uint32_t>(ruleIndex), std::move(b)});
    std::sort(out.begin(), out.end(), lessTrigger);
    return out;
}

std::vector<TermId> FiredLog::key(Variant v, const TGD& rule, const Trigger& t) {
    std::vector<TermId> k;
    k.push_back(t.rule);
    if (v == Variant::Oblivious) {
        k.insert(k.end(), t.binding.begin(), t.binding.end());
    } else {
        for (VarId x : rule.frontier()) k.push_back(t.binding[x]);
    }
    return k;
}

bool FiredLog::contains(Variant v, const TGD& rule, const Trigger& t) const {
    return keys_.count(key(v, rule, t)) != 0;
}

bool FiredLog::record(Variant v, const TGD& rule, const Trigger& t) {
    return keys_.insert(key(v, rule, t)).second;
}

bool headSatisfied(const TGD& rule, const Trigger& t, const Instance& inst) {
    std::vector<bool> bound(rule.varCount(), false);
    std::vector<TermId> binding(rule.varCount(), kNoTerm);
    for (VarId x : rule.frontier()) {
        bound[x] = true;
        binding[x] = t.binding[x];
    }
    // Datalog heads may mention body variables outside the frontier only via
    // the frontier itself, so binding the frontier suffices.
    JoinPlan plan = JoinPlan::compile(rule.head(), rule.varCount(), bound);
    return plan.exists(inst, binding);
}

bool stepApplicable(Variant v, const Program& p, const Instance& inst, const Trigger& t,
                    const FiredLog& fired) {
    const TGD& rule = p.rules.at(t.rule);
    if (v == Variant::Standard) return !headSatisfied(rule, t, inst);
    return !fired.contains(v, rule, t);
}

ChaseRun::ChaseRun(const Program& p, const Instance& d, ChaseConfig cfg)
    : program_(std::make_shared<const Program>(p)), cfg_(cfg), rng_(cfg.seed) {
    if (cfg_.strategy == Strategy::Exhaustive)
        throw std::invalid_argument("exhaustive strategy is handled by enumerateStandardPaths");
    if (cfg_.maxSteps == 0) throw std::invalid_argument("maxSteps must be positive");
    if (cfg_.maxDepth && *cfg_.maxDepth == 0) throw std::invalid_argument("maxDepth must be positive");
    if (auto diags = validateProgram(*program_); !diags.empty())
        throw ModelError("invalid program: " + diags.front().str());
    inst_ = d.withSignature(program_->signature);

    auto compiled = std::make_shared<std::vector<Compiled>>();
    for (std::uint32_t i = 0; i < program_->rules.size(); ++i) {
        const TGD& r = program_->rules[i];
        Compiled c;
        for (std::size_t k = 0; k < r.body().size(); ++k)
            c.deltaPlans.push_back(JoinPlan::compile(r.body(), r.bodyVarCount(), {}, static_cast<int>(k)));
        std::vector<bool> bound(r.varCount(), false);
        for (VarId x : r.frontier()) bound[x] = true;
        c.headCheck = JoinPlan::compile(r.head(), r.varCount(), bound);
        compiled->push_back(std::move(c));
        (r.isDatalog() ? datalogRules_ : existentialRules_).push_back(i);
    }
    compiled_ = std::move(compiled);
    done_.assign(inst_.signature().size(), 0);
    seen_.assign(existentialRules_.size(), std::vector<RowId>(inst_.signature().size(), 0));
}

std::vector<Fact> ChaseRun::headFacts(std::uint32_t rule, std::span<const TermId> binding,
                                      std::uint64_t nonce) const {
    const TGD& r = program_->rules[rule];
    std::vector<TermId> full(r.varCount(), kNoTerm);
    std::copy(binding.begin(), binding.begin() + std::min(binding.size(), full.size()), full.begin());
    if (!r.isDatalog()) {
        const std::vector<VarId> argVars = skolemArgs(r, cfg_.variant);
        std::vector<Term> args;
        args.reserve(argVars.size());
        for (VarId x : argVars) args.push_back(Term::fromId(full[x]));
        const std::uint64_t n = cfg_.variant == Variant::Standard ? nonce : 0;
        for (std::uint32_t k = 0; k < r.existentials().size(); ++k)
            full[r.existentials()[k]] = Term::skolem(skolemFunction(r.id(), k), args, n).id();
    }
    std::vector<Fact> out;
    out.reserve(r.head().size());
    for (const Atom& a : r.head()) out.push_back(instantiate(a, full));
    return out;
}

void ChaseRun::addTrace(TraceEntry e) {
    trace_.push_back(std::move(e));
    if (cfg_.traceSuffix != 0 && trace_.size() > cfg_.traceSuffix) {
        trace_.pop_front();
        ++traceDropped_;
    }
}

void ChaseRun::saturateDatalog() {
    const Program& p = *program_;
    const auto& compiled = *compiled_;
    const std::size_t nrel = inst_.signature().size();
    const bool traceFull = cfg_.traceLevel == TraceLevel::Full;

    struct Pending {
        std::uint32_t rule;
        std::vector<TermId> binding;
    };
    std::vector<Pending> pending;
    std::vector<TermId> heads;  // flattened head tuples when not tracing
    std::vector<std::uint32_t> headRules;
    std::vector<RowId> hi(nrel);
    std::vector<RowRange> ranges;

    while (true) {
        bool delta = false;
        for (RelId rel = 0; rel < nrel; ++rel) {
            hi[rel] = static_cast<RowId>(inst_.size(rel));
            delta = delta || done_[rel] < hi[rel];
        }
        if (!delta) return;

        pending.clear();
        heads.clear();
        headRules.clear();
        for (std::uint32_t ri : datalogRules_) {
            const TGD& r = p.rules[ri];
            const auto& body = r.body();
            for (std::size_t k = 0; k < body.size(); ++k) {
                const RelId dr = body[k].rel;
                if (done_[dr] >= hi[dr]) continue;
                ranges.resize(body.size());
                for (std::size_t j = 0; j < body.size(); ++j) {
                    const RelId rj = body[j].rel;
                    if (j < k) ranges[j] = {0, done_[rj]};
                    else if (j == k) ranges[j] = {done_[rj], hi[rj]};
                    else ranges[j] = {0, hi[rj]};
                }
                std::vector<TermId> binding(r.varCount(), kNoTerm);
                compiled[ri].deltaPlans[k].run(inst_, binding, ranges, [&](const std::vector<TermId>& b) {
                    if (traceFull) {
                        pending.push_back({ri, std::vector<TermId>(b.begin(), b.begin() + r.bodyVarCount())});
                    } else {
                        headRules.push_back(ri);
                        for (const Atom& a : r.head())
                            for (const Arg& x : a.args) heads.push_back(x.isVar() ? b[x.var] : x.term.id());
                    }
                    return true;
                });
            }
        }
        for (RelId rel = 0; rel < nrel; ++rel) done_[rel] = hi[rel];

        if (traceFull) {
            for (Pending& pd : pending) {
                std::vector<Fact> facts = headFacts(pd.rule, pd.binding, 0);
                std::vector<Fact> added;
                for (Fact& f : facts)
                    if (inst_.insert(f)) added.push_back(std::move(f));
                if (added.empty()) continue;
                ++datalogFirings_;
                addTrace({steps_, pd.rule, false, std::move(pd.binding), std::move(added),
                          inst_.maxTermDepth()});
            }
        } else {
            std::size_t pos = 0;
            for (std::uint32_t ri : headRules) {
                bool any = false;
                for (const Atom& a : p.rules[ri].head()) {
                    const std::size_t n = a.args.size();
                    any = inst_.insert(a.rel, std::span<const TermId>(heads.data() + pos, n)) || any;
                    pos += n;
                }
                if (any) ++datalogFirings_;
            }
        }
    }
}

void ChaseRun::discover() {
    const Program& p = *program_;
    const auto& compiled = *compiled_;
    const std::size_t nrel = inst_.signature().size();
    std::vector<RowId> hi(nrel);
    for (RelId rel = 0; rel < nrel; ++rel) hi[rel] = static_cast<RowId>(inst_.size(rel));

    std::vector<Trigger> batch;
    std::vector<RowRange> ranges;
    for (std::size_t e = 0; e < existentialRules_.size(); ++e) {
        const std::uint32_t ri = existentialRules_[e];
        const TGD& r = p.rules[ri];
        const auto& body = r.body();
        std::vector<RowId>& seen = seen_[e];
        for (std::size_t k = 0; k < body.size(); ++k) {
            const RelId dr = body[k].rel;
            if (seen[dr] >= hi[dr]) continue;
            ranges.resize(body.size());
            for (std::size_t j = 0; j < body.size(); ++j) {
                const RelId rj = body[j].rel;
                if (j < k) ranges[j] = {0, seen[rj]};
                else if (j == k) ranges[j] = {seen[rj], hi[rj]};
                else ranges[j] = {0, hi[rj]};
            }
            std::vector<TermId> binding(r.varCount(), kNoTerm);
            compiled[ri].deltaPlans[k].run(inst_, binding, ranges, [&](const std::vector<TermId>& b) {
                batch.push_back({ri, std::vector<TermId>(b.begin(), b.begin() + r.bodyVarCount())});
                return true;
            });
        }
        for (const Atom& a : body) seen[a.rel] = hi[a.rel];
    }
    std::sort(batch.begin(), batch.end(), lessTrigger);
    for (Trigger& t : batch) {
        // One queue entry per firing key; later duplicates could never be
        // applicable once the first has fired.
        if (queued_.record(cfg_.variant, p.rules[t.rule], t)) queue_.push_back(std::move(t));
    }
}

void ChaseRun::saturate() {
    saturateDatalog();
    discover();
}

bool ChaseRun::applicable(const Trigger& t) const {
    if (cfg_.variant != Variant::Standard) return true;  // queue holds unfired keys only
    const TGD& r = program_->rules[t.rule];
    std::vector<TermId> binding(r.varCount(), kNoTerm);
    for (VarId x : r.frontier()) binding[x] = t.binding[x];
    return !(*compiled_)[t.rule].headCheck.exists(inst_, binding);
}

std::vector<Trigger> ChaseRun::applicableTriggers() {
    // A satisfied Standard trigger stays satisfied; drop it for good.
    std::deque<Trigger> keep;
    std::vector<Trigger> out;
    for (Trigger& t : queue_) {
        if (!applicable(t)) continue;
        out.push_back(t);
        keep.push_back(std::move(t));
    }
    queue_ = std::move(keep);
    return out;
}

std::optional<Trigger> ChaseRun::nextTrigger() {
    while (!queue_.empty()) {
        Trigger t;
        switch (cfg_.strategy) {
            case Strategy::FIFO:
            case Strategy::Exhaustive:
                t = std::move(queue_.front());
                queue_.pop_front();
                break;
            case Strategy::LIFO:
                t = std::move(queue_.back());
                queue_.pop_back();
                break;
            case Strategy::Random: {
                std::uniform_int_distribution<std::size_t> pick(0, queue_.size() - 1);
                const std::size_t i = pick(rng_);
                std::swap(queue_[i], queue_.back());
                t = std::move(queue_.back());
                queue_.pop_back();
                break;
            }
        }
        if (applicable(t)) return t;
    }
    return std::nullopt;
}

void ChaseRun::fire(const Trigger& t) {
    ++steps_;
    std::vector<Fact> facts = headFacts(t.rule, t.binding, steps_);
    std::vector<Fact> added;
    for (Fact& f : facts)
        if (inst_.insert(f)) added.push_back(std::move(f));
    if (cfg_.traceLevel != TraceLevel::None)
        addTrace({steps_ - 1, t.rule, true, t.binding, std::move(added), inst_.maxTermDepth()});
}

bool ChaseRun::step() {
    saturate();
    auto t = nextTrigger();
    if (!t) return false;
    fire(*t);
    return true;
}

ChaseResult ChaseRun::result(Verdict v, StopReason reason) const {
    ChaseResult r;
    r.verdict = v;
    r.stopReason = reason;
    r.finalInstance = inst_;
    r.stepsUsed = steps_;
    r.datalogFirings = datalogFirings_;
    r.maxTermDepth = inst_.maxTermDepth();
    r.trace.assign(trace_.begin(), trace_.end());
    r.traceDropped = traceDropped_;
    return r;
}

ChaseResult ChaseRun::run() {
    while (true) {
        saturate();
        if (cfg_.maxDepth && inst_.maxTermDepth() > *cfg_.maxDepth)
            return result(Verdict::BudgetExceeded, StopReason::Depth);
        auto t = nextTrigger();
        if (!t) return result(Verdict::Terminated, StopReason::None);
        if (steps_ >= cfg_.maxSteps) {
            queue_.push_front(std::move(*t));
            return result(Verdict::BudgetExceeded, StopReason::Steps);
        }
        fire(*t);
    }
}

ChaseResult runChase(const Program& p, const Instance& d, const ChaseConfig& cfg) {
    ChaseRun run(p, d, cfg);
    return run.run();
}

namespace {

struct PathSearch {
    std::size_t stepBudget;
    std::size_t pathBudget;
    PathsResult result;
    bool stop = false;
    bool truncated = false;

    void dfs(ChaseRun& state) {
        state.saturate();
        std::vector<Trigger> cands = state.applicableTriggers();
        if (cands.empty()) {
            ++result.pathsExplored;
            result.longestPath = std::max(result.longestPath, state.steps());
            if (result.pathsExplored >= pathBudget) {
                truncated = true;
                stop = true;
            }
            return;
        }
        if (state.steps() >= stepBudget) {
            result.verdict = PathsVerdict::FoundDivergentPrefix;
            result.witness.assign(state.trace().begin(), state.trace().end());
            result.longestPath = std::max(result.longestPath, state.steps());
            stop = true;
            return;
        }
        for (const Trigger& t : cands) {
            ChaseRun next = state;
            // Another branch may already have satisfied this head.
            next.fire(t);
            dfs(next);
            if (stop) return;
        }
    }
};

}  // namespace

PathsResult enumerateStandardPaths(const Program& p, const Instance& d, std::size_t stepBudget,
                                   std::size_t pathBudget) {
    ChaseConfig cfg;
    cfg.variant = Variant::Standard;
    cfg.maxSteps = std::max<std::size_t>(stepBudget, 1);
    cfg.maxDepth.reset();
    cfg.traceLevel = TraceLevel::Existential;
    ChaseRun root(p, d, cfg);
    PathSearch search{stepBudget, std::max<std::size_t>(pathBudget, 1), {}, false, false};
    search.dfs(root);
    if (search.result.verdict != PathsVerdict::FoundDivergentPrefix && search.truncated)
        search.result.verdict = PathsVerdict::Inconclusive;
    return search.result;
}

bool checkIsModel(const Program& p, const Instance& given) {
    const Instance inst = given.withSignature(p.signature);
    for (const TGD& r : p.rules) {
        std::vector<bool> bound(r.varCount(), false);
        for (VarId x : r.frontier()) bound[x] = true;
        const JoinPlan head = JoinPlan::compile(r.head(), r.varCount(), bound);
        const JoinPlan body = JoinPlan::compile(r.body(), r.varCount(), {});
        std::vector<TermId> binding(r.varCount(), kNoTerm);
        const bool complete = body.run(inst, binding, {}, [&](const std::vector<TermId>& b) {
            std::vector<TermId> hb(r.varCount(), kNoTerm);
            for (VarId x : r.frontier()) hb[x] = b[x];
            return head.exists(inst, hb);
        });
        if (!complete) return false;
    }
    return true;
}

std::optional<std::unordered_map<TermId, TermId>> findHomomorphism(const Instance& from,
                                                                   const Instance& to) {
    std::unordered_map<TermId, VarId> vars;
    std::vector<TermId> varTerms;
    std::vector<Atom> atoms;
    for (const Fact& f : from.facts()) {
        const RelationDecl& d = from.signature()[f.rel];
        auto rel = to.signature().find(d.name);
        if (!rel || to.signature()[*rel].arity != d.arity) return std::nullopt;
        Atom a;
        a.rel = *rel;
        for (Term t : f.args) {
            if (t.isConstant()) {
                a.args.push_back(Arg::constant(t));
                continue;
            }
            auto [it, fresh] = vars.emplace(t.id(), static_cast<VarId>(varTerms.size()));
            if (fresh) varTerms.push_back(t.id());
            a.args.push_back(Arg::variable(it->second));
        }
        atoms.push_back(std::move(a));
    }
    const JoinPlan plan = JoinPlan::compile(atoms, varTerms.size(), {});
    std::vector<TermId> binding(varTerms.size(), kNoTerm);
    std::optional<std::unordered_map<TermId, TermId>> out;
    plan.run(to, binding, {}, [&](const std::vector<TermId>& b) {
        out.emplace();
        for (std::size_t v = 0; v < varTerms.size(); ++v) (*out)[varTerms[v]] = b[v];
        return false;
    });
    return out;
}

std::string traceEntryJson(const TraceEntry& e, const Program& p, bool labels) {
    const TGD& r = p.rules.at(e.rule);
    auto term = [&](Term t) { return labels ? t.label() : t.str(); };
    nlohmann::ordered_json j;
    j["step"] = e.step;
    j["rule"] = r.id();
    j["existential"] = e.existential;
    nlohmann::ordered_json b = nlohmann::ordered_json::object();
    for (std::size_t v = 0; v < e.binding.size(); ++v) b[r.varNames()[v]] = term(Term::fromId(e.binding[v]));
    j["bindings"] = std::move(b);
    nlohmann::ordered_json added = nlohmann::ordered_json::array();
    for (const Fact& f : e.added) {
        std::string s = p.signature[f.rel].name + "(";
        for (std::size_t k = 0; k < f.args.size(); ++k) s += (k ? "," : "") + term(f.args[k]);
        added.push_back(s + ")");
    }
    j["added"] = std::move(added);
    j["depth"] = e.depthAfter;
    return j.dump();
}

}  // namespace chaselab
