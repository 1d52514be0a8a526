#pragma once

#include <string>
#include <vector>

#include "chaselab/model.h"

namespace chaselab {

struct TranslationReport {
    Program original;
    Program translated;
    std::vector<std::string> freshRelations;
    std::vector<std::string> notes;
};

/// Each multi-head rule r: body -> exists Z: A1,...,Ak becomes
///   r: body -> exists Z: Head_r(V)        (V = head variables, first occurrence order)
///   r_1 .. r_k: Head_r(V) -> Ai
/// Single-head rules are copied unchanged.
TranslationReport singleHeadTranslate(const Program& p);

/// Rewrites a rule whose head is one ternary atom T(a,b,c): every T atom
/// T(x,y,z) in the body becomes T_1(v,x),T_2(v,y),T_3(v,z) with a fresh v per
/// atom, and the head becomes exists W: T_1(W,a),T_2(W,b),T_3(W,c). Throws
/// ModelError unless the head is a single ternary atom.
TGD ternarySplit(const TGD& rule, Signature& sig);

/// Applies the same rewriting of `relation` to every rule of `p` (rules whose
/// head is a `relation` atom, and body occurrences elsewhere). The result
/// keeps the original relations and adds <relation>_1.._3.
Program splitRelation(const Program& p, const std::string& relation);

}  // namespace chaselab
