#include "chaselab/translations.h"

#include <algorithm>
#include <array>

namespace chaselab {

namespace {

std::string freshName(const std::vector<std::string>& taken, const std::string& base) {
    if (std::find(taken.begin(), taken.end(), base) == taken.end()) return base;
    for (int k = 1;; ++k) {
        std::string cand = base + std::to_string(k);
        if (std::find(taken.begin(), taken.end(), cand) == taken.end()) return cand;
    }
}

std::string freshRelation(const Signature& sig, const std::string& base) {
    if (!sig.find(base)) return base;
    for (int k = 1;; ++k) {
        std::string cand = base + "_" + std::to_string(k);
        if (!sig.find(cand)) return cand;
    }
}

// Body occurrences of `rel` become three binary atoms over a fresh name
// variable; head occurrences get one fresh existential each.
TGD splitRule(const TGD& r, RelId rel, const std::array<RelId, 3>& parts) {
    std::vector<std::string> names = r.varNames();
    std::vector<VarId> existentials = r.existentials();
    auto newVar = [&](const std::string& base) {
        names.push_back(freshName(names, base));
        return static_cast<VarId>(names.size() - 1);
    };
    auto split = [&](const Atom& a, VarId name, std::vector<Atom>& out) {
        for (std::size_t k = 0; k < 3; ++k) out.push_back({parts[k], {Arg::variable(name), a.args[k]}});
    };
    std::vector<Atom> body, head;
    for (const Atom& a : r.body()) {
        if (a.rel == rel) split(a, newVar("V"), body);
        else body.push_back(a);
    }
    for (const Atom& a : r.head()) {
        if (a.rel != rel) {
            head.push_back(a);
            continue;
        }
        const VarId w = newVar("W");
        existentials.push_back(w);
        split(a, w, head);
    }
    return TGD(r.id(), std::move(body), std::move(head), std::move(names), std::move(existentials));
}

std::array<RelId, 3> partRelations(Signature& sig, const std::string& name) {
    std::array<RelId, 3> parts{};
    for (std::size_t k = 0; k < 3; ++k) parts[k] = sig.intern(name + "_" + std::to_string(k + 1), 2);
    return parts;
}

}  // namespace

TranslationReport singleHeadTranslate(const Program& p) {
    TranslationReport rep;
    rep.original = p;
    rep.translated.signature = p.signature;
    for (const TGD& r : p.rules) {
        if (r.head().size() <= 1) {
            rep.translated.rules.push_back(r);
            continue;
        }
        std::vector<VarId> headVars;
        for (const Atom& a : r.head())
            for (const Arg& x : a.args)
                if (x.isVar() && std::find(headVars.begin(), headVars.end(), x.var) == headVars.end())
                    headVars.push_back(x.var);
        const std::string relName = freshRelation(rep.translated.signature, "Head_" + r.id());
        if (relName != "Head_" + r.id())
            rep.notes.push_back("relation Head_" + r.id() + " already exists; using " + relName);
        const RelId fresh = rep.translated.signature.intern(relName, static_cast<std::uint32_t>(headVars.size()));
        rep.freshRelations.push_back(relName);

        Atom freshAtom{fresh, {}};
        for (VarId v : headVars) freshAtom.args.push_back(Arg::variable(v));
        rep.translated.rules.emplace_back(r.id(), r.body(), std::vector<Atom>{freshAtom}, r.varNames(),
                                          r.existentials());
        // Projections only mention the head variables, renumbered 0..|V|-1.
        std::vector<std::string> names;
        std::vector<VarId> local(r.varCount(), 0);
        for (std::size_t k = 0; k < headVars.size(); ++k) {
            local[headVars[k]] = static_cast<VarId>(k);
            names.push_back(r.varNames()[headVars[k]]);
        }
        auto relocate = [&](Atom a) {
            for (Arg& x : a.args)
                if (x.isVar()) x.var = local[x.var];
            return a;
        };
        const Atom projBody = relocate(freshAtom);
        for (std::size_t k = 0; k < r.head().size(); ++k) {
            rep.translated.rules.emplace_back(r.id() + "_" + std::to_string(k + 1), std::vector<Atom>{projBody},
                                              std::vector<Atom>{relocate(r.head()[k])}, names,
                                              std::vector<VarId>{});
        }
    }
    if (!rep.freshRelations.empty())
        rep.notes.push_back("all-instances termination of the Standard chase is not preserved");
    return rep;
}

TGD ternarySplit(const TGD& rule, Signature& sig) {
    if (rule.head().size() != 1 || sig[rule.head()[0].rel].arity != 3)
        throw ModelError("rule " + rule.id() + ": ternary split needs a single ternary head atom");
    const RelId rel = rule.head()[0].rel;
    return splitRule(rule, rel, partRelations(sig, sig[rel].name));
}

Program splitRelation(const Program& p, const std::string& relation) {
    auto rel = p.signature.find(relation);
    if (!rel) throw ModelError("unknown relation " + relation);
    if (p.signature[*rel].arity != 3) throw ModelError("relation " + relation + " is not ternary");
    Program out;
    out.signature = p.signature;
    const auto parts = partRelations(out.signature, relation);
    for (const TGD& r : p.rules) out.rules.push_back(splitRule(r, *rel, parts));
    return out;
}

}  // namespace chaselab
