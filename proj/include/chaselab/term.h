#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace chaselab {

using TermId = std::uint32_t;
inline constexpr TermId kNoTerm = 0xffffffffu;

/// Identity of a Skolem function: the rule that owns it plus the position of
/// the existential variable it replaces in that rule's head.
struct SkolemFn {
    const std::string* ruleId = nullptr;
    std::uint32_t index = 0;

    friend bool operator==(const SkolemFn& a, const SkolemFn& b) {
        return a.ruleId == b.ruleId && a.index == b.index;
    }
};

SkolemFn skolemFunction(std::string_view ruleId, std::uint32_t index);

/// Element of the Herbrand universe. Terms are hash-consed in a process-wide
/// pool, so two terms are structurally equal iff their ids are equal.
///
/// A Skolem application may carry a nonce. The Standard chase uses it to keep
/// nulls created by different firings apart; it does not affect depth.
class Term {
public:
    Term() = default;

    static Term constant(std::string_view name);
    static Term skolem(SkolemFn fn, std::span<const Term> args, std::uint64_t nonce = 0);
    static Term fromId(TermId id) { return Term(id); }

    TermId id() const { return id_; }
    bool valid() const { return id_ != kNoTerm; }

    bool isConstant() const;
    const std::string& name() const;     // constants only
    SkolemFn function() const;            // Skolem applications only
    std::span<const Term> args() const;   // empty for constants
    std::uint64_t nonce() const;
    std::uint32_t depth() const;
    std::size_t hash() const;

    /// True if `other` occurs in this term (including the term itself).
    bool contains(Term other) const;

    std::string str() const;
    /// Constant name, or "_<id>" for a Skolem term. Linear-size alternative to
    /// str() for terms with much sharing.
    std::string label() const;
    /// Function symbol applied to argument labels, e.g. e~0@3(a,_5).
    std::string definition() const;

    friend bool operator==(Term a, Term b) { return a.id_ == b.id_; }

private:
    explicit Term(TermId id) : id_(id) {}
    TermId id_ = kNoTerm;
};

/// Total structural order: constants before Skolem terms, constants by name,
/// Skolem terms by (rule id, existential index, nonce, arguments).
std::strong_ordering compareTerms(Term a, Term b);

struct TermLess {
    bool operator()(Term a, Term b) const { return compareTerms(a, b) < 0; }
};

std::strong_ordering compareTermSeq(std::span<const Term> a, std::span<const Term> b);

inline std::uint32_t termDepth(Term t) { return t.depth(); }

/// Number of terms interned so far in this process.
std::size_t internedTermCount();

}  // namespace chaselab

template <>
struct std::hash<chaselab::Term> {
    std::size_t operator()(chaselab::Term t) const noexcept { return t.id(); }
};
