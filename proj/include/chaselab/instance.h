#pragma once

#include <cstdint>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include "chaselab/model.h"

namespace chaselab {

using RowId = std::uint32_t;
inline constexpr RowId kNoRow = 0xffffffffu;

/// Chained hash index over the columns selected by `mask`. Heads are keyed by
/// a hash of the projected values; probes re-check the columns.
class HashIndex {
public:
    explicit HashIndex(std::uint32_t mask = 0) : mask_(mask) {}

    std::uint32_t mask() const { return mask_; }
    RowId first(std::size_t hash) const {
        return heads_.empty() ? kNoRow : heads_[hash & (heads_.size() - 1)];
    }
    RowId next(RowId row) const { return next_[row]; }

    std::size_t capacity() const { return heads_.size(); }
    /// Clears the index and sizes the head table to at least `capacity` slots.
    void reset(std::size_t capacity);
    /// Rows must be added in increasing order without gaps.
    void add(RowId row, std::size_t hash);

private:
    std::uint32_t mask_;
    std::vector<RowId> heads_;
    std::vector<RowId> next_;
};

/// Append-only table of ground tuples for one relation. Row ids are stable
/// and grow monotonically, which the semi-naive evaluator relies on.
class RelationTable {
public:
    explicit RelationTable(std::uint32_t arity = 1);
    RelationTable(const RelationTable& other);
    RelationTable& operator=(const RelationTable& other);
    RelationTable(RelationTable&&) noexcept = default;
    RelationTable& operator=(RelationTable&&) noexcept = default;

    std::uint32_t arity() const { return arity_; }
    std::size_t size() const { return arity_ == 0 ? 0 : data_.size() / arity_; }
    std::span<const TermId> row(RowId r) const { return {data_.data() + std::size_t(r) * arity_, arity_}; }

    bool insert(std::span<const TermId> tuple);
    bool contains(std::span<const TermId> tuple) const;
    RowId find(std::span<const TermId> tuple) const;

    /// Index keyed on the columns in `mask` (bit i = column i). Built lazily;
    /// safe to call concurrently on a table that is not being modified.
    const HashIndex& index(std::uint32_t mask) const;

    static std::size_t hashColumns(std::span<const TermId> values, std::uint32_t mask);
    static std::size_t hashKey(const TermId* key, std::uint32_t mask, std::uint32_t arity);

private:
    void addToIndex(HashIndex& idx, RowId row) const;
    void rebuildIndex(HashIndex& idx, std::size_t capacity) const;

    std::uint32_t arity_;
    std::vector<TermId> data_;
    HashIndex primary_;
    mutable std::vector<std::unique_ptr<HashIndex>> secondary_;
    mutable std::unique_ptr<std::mutex> mu_;
};

/// Finite set of ground atoms over a signature, with its active domain.
class Instance {
public:
    Instance() = default;
    explicit Instance(Signature sig);

    const Signature& signature() const { return sig_; }
    RelId ensureRelation(std::string_view name, std::uint32_t arity);

    bool insert(RelId rel, std::span<const TermId> args);
    bool insert(RelId rel, std::span<const Term> args);
    bool insert(const Fact& f) { return insert(f.rel, std::span<const Term>(f.args)); }
    /// Inserts a fact expressed over another signature, matching by name.
    bool insertForeign(const Fact& f, const Signature& from);

    bool contains(RelId rel, std::span<const TermId> args) const;
    bool contains(const Fact& f) const;

    std::size_t size() const { return factCount_; }
    std::size_t size(RelId rel) const { return tables_[rel].size(); }
    bool empty() const { return factCount_ == 0; }
    const RelationTable& table(RelId rel) const { return tables_[rel]; }
    Fact fact(RelId rel, RowId row) const;

    /// All facts, grouped by relation in signature order, insertion order within.
    std::vector<Fact> facts() const;
    /// Active domain in first-appearance order.
    const std::vector<Term>& adom() const { return adom_; }
    bool inAdom(Term t) const { return adomSet_.count(t.id()) != 0; }
    std::uint32_t maxTermDepth() const { return maxDepth_; }

    /// Copy with signature `sig` (which must contain every relation used here
    /// under the same arity) followed by any relation of this instance it lacks.
    Instance withSignature(const Signature& sig) const;

    /// Same set of facts, compared by relation name.
    bool sameFacts(const Instance& other) const;
    /// Every fact here is in `other`.
    bool subsetOf(const Instance& other) const;

    std::string str() const;

private:
    Signature sig_;
    std::vector<RelationTable> tables_;
    std::vector<Term> adom_;
    std::unordered_set<TermId> adomSet_;
    std::size_t factCount_ = 0;
    std::uint32_t maxDepth_ = 0;
};

}  // namespace chaselab
