#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "chaselab/instance.h"
#include "chaselab/model.h"

namespace chaselab {

/// Half-open row range [lo, hi) restricting which rows of an atom's relation
/// a match may use. Semi-naive evaluation splits relations into old and delta
/// parts this way.
struct RowRange {
    RowId lo = 0;
    RowId hi = kNoRow;
};

/// Compiled evaluation order for a conjunction of atoms (a conjunctive query).
/// Atoms are joined left to right in plan order; each step probes the
/// narrowest available index.
class JoinPlan {
public:
    JoinPlan() = default;

    /// `bound[v]` marks variables already bound when the plan runs. When
    /// `firstAtom` >= 0 that atom is evaluated first (the delta atom);
    /// remaining atoms are ordered greedily by number of bound positions.
    static JoinPlan compile(std::span<const Atom> atoms, std::size_t varCount,
                            const std::vector<bool>& bound, int firstAtom = -1);

    std::size_t atomCount() const { return steps_.size(); }

    /// Enumerates every extension of `binding` (kNoTerm = unbound) that maps
    /// all atoms into `inst`. `ranges`, if non-empty, is indexed by original
    /// atom position. `onMatch(binding)` returns false to stop; run returns
    /// false iff it was stopped.
    template <class F>
    bool run(const Instance& inst, std::vector<TermId>& binding, std::span<const RowRange> ranges,
             F&& onMatch) const {
        std::vector<const HashIndex*> indexes(steps_.size(), nullptr);
        for (std::size_t i = 0; i < steps_.size(); ++i) {
            const Step& s = steps_[i];
            if (s.rel >= inst.signature().size()) return true;
            if (s.mask != 0) indexes[i] = &inst.table(s.rel).index(s.mask);
        }
        std::vector<TermId> key;
        return runStep(0, inst, indexes, binding, ranges, key, onMatch);
    }

    /// True if some extension of `binding` exists.
    bool exists(const Instance& inst, std::vector<TermId>& binding) const {
        return !run(inst, binding, {}, [](const std::vector<TermId>&) { return false; });
    }

private:
    enum class Op : std::uint8_t { CheckVar, CheckConst, Bind, CheckColumn };
    struct Column {
        Op op;
        std::uint32_t value;  // var id, term id, or earlier column
    };
    struct Step {
        std::uint32_t atom = 0;
        RelId rel = 0;
        std::uint32_t arity = 0;
        std::uint32_t mask = 0;
        std::vector<Column> columns;
    };

    template <class F>
    bool runStep(std::size_t depth, const Instance& inst, const std::vector<const HashIndex*>& indexes,
                 std::vector<TermId>& binding, std::span<const RowRange> ranges,
                 std::vector<TermId>& key, F& onMatch) const {
        if (depth == steps_.size()) return onMatch(static_cast<const std::vector<TermId>&>(binding));
        const Step& s = steps_[depth];
        const RelationTable& table = inst.table(s.rel);
        RowId lo = 0;
        RowId hi = static_cast<RowId>(table.size());
        if (!ranges.empty()) {
            lo = ranges[s.atom].lo;
            hi = std::min<RowId>(hi, ranges[s.atom].hi);
        }
        if (lo >= hi) return true;

        auto tryRow = [&](RowId r) -> bool {
            std::span<const TermId> row = table.row(r);
            std::uint32_t boundHere = 0;
            bool ok = true;
            for (std::uint32_t c = 0; c < s.arity && ok; ++c) {
                const Column& col = s.columns[c];
                switch (col.op) {
                    case Op::CheckVar: ok = binding[col.value] == row[c]; break;
                    case Op::CheckConst: ok = col.value == row[c]; break;
                    case Op::CheckColumn: ok = row[col.value] == row[c]; break;
                    case Op::Bind:
                        binding[col.value] = row[c];
                        boundHere |= 1u << c;
                        break;
                }
            }
            bool keepGoing = true;
            if (ok) keepGoing = runStep(depth + 1, inst, indexes, binding, ranges, key, onMatch);
            for (std::uint32_t c = 0; c < s.arity; ++c)
                if (boundHere & (1u << c)) binding[s.columns[c].value] = kNoTerm;
            return keepGoing;
        };

        if (s.mask == 0) {
            for (RowId r = lo; r < hi; ++r)
                if (!tryRow(r)) return false;
            return true;
        }
        key.resize(s.arity);
        for (std::uint32_t c = 0; c < s.arity; ++c) {
            if (!(s.mask & (1u << c))) continue;
            const Column& col = s.columns[c];
            key[c] = col.op == Op::CheckVar ? binding[col.value] : col.value;
        }
        const std::size_t h = RelationTable::hashKey(key.data(), s.mask, s.arity);
        const HashIndex* idx = indexes[depth];
        // Chains list rows newest first.
        for (RowId r = idx->first(h); r != kNoRow; r = idx->next(r))
            if (r >= lo && r < hi && !tryRow(r)) return false;
        return true;
    }

    std::vector<Step> steps_;
};

/// All homomorphisms from `atoms` into `inst` extending `binding`, in
/// enumeration order. Intended for small queries and tests.
std::vector<std::vector<TermId>> allMatches(const Instance& inst, std::span<const Atom> atoms,
                                            std::size_t varCount, std::vector<TermId> binding = {});

}  // namespace chaselab
