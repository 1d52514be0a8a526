#include "chaselab/query.h"

namespace chaselab {

JoinPlan JoinPlan::compile(std::span<const Atom> atoms, std::size_t varCount,
                           const std::vector<bool>& bound, int firstAtom) {
    JoinPlan plan;
    std::vector<bool> known(varCount, false);
    for (std::size_t v = 0; v < bound.size() && v < varCount; ++v) known[v] = bound[v];
    std::vector<bool> used(atoms.size(), false);

    auto boundPositions = [&](const Atom& a) {
        int n = 0;
        for (const Arg& x : a.args)
            if (!x.isVar() || known[x.var]) ++n;
        return n;
    };

    for (std::size_t k = 0; k < atoms.size(); ++k) {
        std::size_t pick = atoms.size();
        if (k == 0 && firstAtom >= 0) {
            pick = static_cast<std::size_t>(firstAtom);
        } else {
            int best = -1;
            for (std::size_t i = 0; i < atoms.size(); ++i) {
                if (used[i]) continue;
                const int score = boundPositions(atoms[i]);
                // Prefer fully bound atoms (pure filters), then most bound.
                const int full = score == static_cast<int>(atoms[i].args.size()) ? 1000 : 0;
                if (score + full > best) {
                    best = score + full;
                    pick = i;
                }
            }
        }
        used[pick] = true;
        const Atom& a = atoms[pick];
        Step s;
        s.atom = static_cast<std::uint32_t>(pick);
        s.rel = a.rel;
        s.arity = static_cast<std::uint32_t>(a.args.size());
        std::vector<int> firstCol(varCount, -1);
        for (std::uint32_t c = 0; c < s.arity; ++c) {
            const Arg& x = a.args[c];
            if (!x.isVar()) {
                s.columns.push_back({Op::CheckConst, x.term.id()});
                s.mask |= 1u << c;
            } else if (known[x.var]) {
                s.columns.push_back({Op::CheckVar, x.var});
                s.mask |= 1u << c;
            } else if (firstCol[x.var] >= 0) {
                s.columns.push_back({Op::CheckColumn, static_cast<std::uint32_t>(firstCol[x.var])});
            } else {
                s.columns.push_back({Op::Bind, x.var});
                firstCol[x.var] = static_cast<int>(c);
            }
        }
        for (const Arg& x : a.args)
            if (x.isVar()) known[x.var] = true;
        plan.steps_.push_back(std::move(s));
    }
    return plan;
}

std::vector<std::vector<TermId>> allMatches(const Instance& inst, std::span<const Atom> atoms,
                                            std::size_t varCount, std::vector<TermId> binding) {
    if (binding.empty()) binding.assign(varCount, kNoTerm);
    std::vector<bool> bound(varCount, false);
    for (std::size_t v = 0; v < varCount; ++v) bound[v] = binding[v] != kNoTerm;
    JoinPlan plan = JoinPlan::compile(atoms, varCount, bound);
    std::vector<std::vector<TermId>> out;
    plan.run(inst, binding, {}, [&](const std::vector<TermId>& b) {
        out.push_back(b);
        return true;
    });
    return out;
}

}  // namespace chaselab
