#include "chaselab/critical.h"

#include <algorithm>
#include <random>
#include <set>
#include <stdexcept>
#include <unordered_map>

namespace chaselab {

Instance buildCritical(const Signature& sig) {
    if (sig.empty()) throw ModelError("critical instance of an empty signature");
    Instance inst(sig);
    const TermId w = Term::constant(kWellConstant).id();
    for (RelId rel = 0; rel < sig.size(); ++rel) {
        std::vector<TermId> tuple(sig[rel].arity, w);
        inst.insert(rel, std::span<const TermId>(tuple));
    }
    return inst;
}

const char* probeVerdictName(ProbeVerdict v) {
    switch (v) {
        case ProbeVerdict::TerminatesAllInstances: return "TerminatesAllInstances";
        case ProbeVerdict::DivergenceWitness: return "DivergenceWitness";
        case ProbeVerdict::Inconclusive: return "Inconclusive";
    }
    return "?";
}

namespace {

std::vector<std::string> bodyRelations(const Program& p) {
    std::set<std::string> names;
    for (const TGD& r : p.rules)
        for (const Atom& a : r.body()) names.insert(p.signature[a.rel].name);
    return {names.begin(), names.end()};
}

bool diagonalFact(const Instance& inst, const std::string& rel, TermId u) {
    auto id = inst.signature().find(rel);
    if (!id) return false;
    std::vector<TermId> tuple(inst.signature()[*id].arity, u);
    return inst.contains(*id, tuple);
}

}  // namespace

std::optional<DivergenceCertificate> findDivergenceCertificate(const Program& p, const Instance& state) {
    const std::vector<std::string> rels = bodyRelations(p);
    if (rels.empty()) return std::nullopt;
    const Term w = Term::constant(kWellConstant);

    // Candidates come from the smallest body relation.
    std::optional<RelId> pivot;
    for (const std::string& name : rels) {
        auto id = state.signature().find(name);
        if (!id) return std::nullopt;
        if (!pivot || state.size(*id) < state.size(*pivot)) pivot = id;
    }
    const RelationTable& table = state.table(*pivot);
    std::optional<Term> best;
    for (RowId r = 0; r < table.size(); ++r) {
        auto row = table.row(r);
        if (!std::all_of(row.begin(), row.end(), [&](TermId x) { return x == row[0]; })) continue;
        const Term u = Term::fromId(row[0]);
        if (u.isConstant() || !u.contains(w)) continue;
        if (best && (u.depth() > best->depth() ||
                     (u.depth() == best->depth() && compareTerms(u, *best) >= 0)))
            continue;
        const bool all = std::all_of(rels.begin(), rels.end(),
                                     [&](const std::string& n) { return diagonalFact(state, n, u.id()); });
        if (all) best = u;
    }
    if (!best) return std::nullopt;
    return DivergenceCertificate{*best, rels, 0};
}

bool verifyDivergenceCertificate(const Program& p, Variant variant, const DivergenceCertificate& c,
                                 std::string* why) {
    auto fail = [&](std::string msg) {
        if (why) *why = std::move(msg);
        return false;
    };
    if (variant == Variant::Standard) return fail("certificate needs an eager variant");
    if (c.witness.isConstant() || !c.witness.contains(Term::constant(kWellConstant)))
        return fail("witness " + c.witness.str() + " is not a Skolem term over w");
    ChaseConfig cfg;
    cfg.variant = variant;
    cfg.maxSteps = std::max<std::size_t>(c.foundAtStep, 1);
    cfg.maxDepth.reset();
    cfg.traceLevel = TraceLevel::Full;
    const Instance start = buildCritical(p.signature);
    ChaseResult res = runChase(p, start, cfg);
    Instance replayed;
    try {
        replayed = validateDerivation(p, variant, start, res.trace);
    } catch (const DerivationError& e) {
        return fail(std::string("replay failed: ") + e.what());
    }
    for (const std::string& rel : bodyRelations(p)) {
        if (!diagonalFact(replayed, rel, c.witness.id()))
            return fail("missing " + rel + "(" + c.witness.str() + ",...)");
    }
    return true;
}

ProbeResult allInstancesTerminationProbe(const Program& p, const ChaseConfig& cfg) {
    if (cfg.variant == Variant::Standard)
        throw std::invalid_argument("the critical-instance probe needs the oblivious or semi-oblivious chase");
    ProbeResult out;
    out.chase = runChase(p, buildCritical(p.signature), cfg);
    if (out.chase.verdict == Verdict::Terminated) {
        out.verdict = ProbeVerdict::TerminatesAllInstances;
        return out;
    }
    out.certificate = findDivergenceCertificate(p, out.chase.finalInstance);
    if (out.certificate) {
        out.certificate->foundAtStep = out.chase.stepsUsed;
        out.verdict = ProbeVerdict::DivergenceWitness;
    }
    return out;
}

Instance validateDerivation(const Program& p, Variant variant, const Instance& start,
                            const std::vector<TraceEntry>& trace) {
    Instance cur = start.withSignature(p.signature);
    for (std::size_t n = 0; n < trace.size(); ++n) {
        const TraceEntry& e = trace[n];
        auto fail = [&](const std::string& msg) {
            throw DerivationError("entry " + std::to_string(n) + ": " + msg);
        };
        if (e.rule >= p.rules.size()) fail("unknown rule");
        const TGD& r = p.rules[e.rule];
        if (e.binding.size() != r.bodyVarCount()) fail("binding size mismatch for rule " + r.id());
        if (e.existential == r.isDatalog()) fail("rule kind mismatch for rule " + r.id());

        std::vector<Term> full(r.varCount());
        for (std::size_t v = 0; v < e.binding.size(); ++v) full[v] = Term::fromId(e.binding[v]);
        auto ground = [&](const Atom& a) {
            Fact f;
            f.rel = a.rel;
            for (const Arg& x : a.args) f.args.push_back(x.isVar() ? full[x.var] : x.term);
            return f;
        };
        for (const Atom& a : r.body()) {
            Fact f = ground(a);
            if (!cur.contains(f)) fail("body fact " + factString(f, p.signature) + " missing for rule " + r.id());
        }
        if (!r.isDatalog()) {
            std::vector<Term> args;
            if (variant == Variant::Oblivious) {
                for (std::size_t v = 0; v < r.bodyVarCount(); ++v) args.push_back(full[v]);
            } else {
                for (VarId v : r.frontier()) args.push_back(full[v]);
            }
            const std::uint64_t nonce = variant == Variant::Standard ? e.step + 1 : 0;
            for (std::uint32_t k = 0; k < r.existentials().size(); ++k)
                full[r.existentials()[k]] = Term::skolem(skolemFunction(r.id(), k), args, nonce);
        }
        std::vector<Fact> head;
        for (const Atom& a : r.head()) head.push_back(ground(a));
        for (const Fact& f : e.added)
            if (std::find(head.begin(), head.end(), f) == head.end())
                fail("fact " + factString(f, p.signature) + " is not produced by rule " + r.id());
        for (const Fact& f : head) cur.insert(f);
    }
    return cur;
}

std::uint32_t traceMaxDepth(const std::vector<TraceEntry>& trace) {
    std::uint32_t d = 0;
    for (const TraceEntry& e : trace) {
        for (TermId t : e.binding) d = std::max(d, Term::fromId(t).depth());
        for (const Fact& f : e.added)
            for (Term t : f.args) d = std::max(d, t.depth());
    }
    return d;
}

std::vector<TraceEntry> liftDerivation(const Program& p, Variant variant,
                                       const std::vector<TraceEntry>& traceOnD, const Instance& d,
                                       const Signature& sig) {
    const Term w = Term::constant(kWellConstant);
    std::unordered_map<TermId, Term> memo;
    for (Term t : d.adom())
        if (t.isConstant()) memo.emplace(t.id(), w);

    auto lift = [&](auto&& self, Term t) -> Term {
        if (auto it = memo.find(t.id()); it != memo.end()) return it->second;
        Term out = t;
        if (!t.isConstant()) {
            std::vector<Term> args;
            for (Term a : t.args()) args.push_back(self(self, a));
            out = Term::skolem(t.function(), args, t.nonce());
        }
        memo.emplace(t.id(), out);
        return out;
    };

    std::vector<TraceEntry> lifted;
    lifted.reserve(traceOnD.size());
    for (const TraceEntry& e : traceOnD) {
        TraceEntry l = e;
        for (TermId& t : l.binding) t = lift(lift, Term::fromId(t)).id();
        for (Fact& f : l.added)
            for (Term& t : f.args) t = lift(lift, t);
        lifted.push_back(std::move(l));
    }
    validateDerivation(p, variant, buildCritical(sig), lifted);
    return lifted;
}

Instance randomInstance(const Signature& sig, std::uint64_t seed, std::size_t maxConstants,
                        std::size_t maxFacts) {
    std::mt19937_64 rng(seed);
    Instance inst(sig);
    if (sig.empty() || maxConstants == 0) return inst;
    const std::size_t k = std::uniform_int_distribution<std::size_t>(1, maxConstants)(rng);
    const std::size_t n = std::uniform_int_distribution<std::size_t>(1, std::max<std::size_t>(maxFacts, 1))(rng);
    std::vector<Term> consts;
    for (std::size_t i = 0; i < k; ++i) consts.push_back(Term::constant("c" + std::to_string(i)));
    std::uniform_int_distribution<RelId> pickRel(0, static_cast<RelId>(sig.size() - 1));
    std::uniform_int_distribution<std::size_t> pickConst(0, k - 1);
    for (std::size_t i = 0; i < n; ++i) {
        const RelId rel = pickRel(rng);
        std::vector<Term> args;
        for (std::uint32_t c = 0; c < sig[rel].arity; ++c) args.push_back(consts[pickConst(rng)]);
        inst.insert(rel, std::span<const Term>(args));
    }
    return inst;
}

Lemma1Report lemma1Sample(const Program& p, std::size_t samples, std::uint64_t seed, std::size_t factor,
                          std::size_t criticalBudget) {
    Lemma1Report rep;
    ChaseConfig crit;
    crit.variant = Variant::Oblivious;
    crit.maxSteps = criticalBudget;
    crit.traceLevel = TraceLevel::None;
    const ChaseResult cr = runChase(p, buildCritical(p.signature), crit);
    rep.criticalVerdict = cr.verdict;
    rep.criticalSteps = cr.stepsUsed;
    rep.criticalDepth = cr.maxTermDepth;
    if (cr.verdict != Verdict::Terminated) return rep;
    rep.budget = factor * std::max<std::size_t>(cr.stepsUsed, 1);

    std::mt19937_64 seeds(seed);
    rep.pass = true;
    for (std::size_t i = 0; i < samples; ++i) {
        const Instance d = randomInstance(p.signature, seeds());
        Lemma1Sample s;
        s.instance = d.str();
        ChaseConfig cfg;
        cfg.variant = Variant::Oblivious;
        cfg.maxSteps = rep.budget;
        cfg.traceLevel = TraceLevel::Full;
        const ChaseResult res = runChase(p, d, cfg);
        s.verdict = res.verdict;
        s.steps = res.stepsUsed;
        s.depth = res.maxTermDepth;
        try {
            const auto lifted = liftDerivation(p, Variant::Oblivious, res.trace, d, p.signature);
            s.liftValid = true;
            s.liftedDepth = traceMaxDepth(lifted);
        } catch (const DerivationError& e) {
            s.error = e.what();
        }
        s.pass = s.verdict == Verdict::Terminated && s.liftValid && s.liftedDepth == traceMaxDepth(res.trace) &&
                 s.depth <= rep.criticalDepth;
        rep.pass = rep.pass && s.pass;
        rep.samples.push_back(std::move(s));
    }
    return rep;
}

}  // namespace chaselab
