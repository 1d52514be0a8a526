#include "chaselab/instance.h"

#include <algorithm>
#include <bit>
#include <cassert>

namespace chaselab {

namespace {

std::size_t fullMask(std::uint32_t arity) { return (std::size_t{1} << arity) - 1; }

inline std::size_t mixHash(std::size_t h, std::size_t v) {
    v *= 0x9e3779b97f4a7c15ULL;
    v ^= v >> 29;
    return (h ^ v) * 0xbf58476d1ce4e5b9ULL;
}

}  // namespace

void HashIndex::reset(std::size_t capacity) {
    std::size_t cap = 16;
    while (cap < capacity) cap <<= 1;
    heads_.assign(cap, kNoRow);
    next_.clear();
}

void HashIndex::add(RowId row, std::size_t hash) {
    assert(row == next_.size());
    RowId& head = heads_[hash & (heads_.size() - 1)];
    next_.push_back(head);
    head = row;
}

RelationTable::RelationTable(std::uint32_t arity)
    : arity_(arity), primary_(static_cast<std::uint32_t>(fullMask(arity))), mu_(std::make_unique<std::mutex>()) {
    primary_.reset(16);
}

RelationTable::RelationTable(const RelationTable& other)
    : arity_(other.arity_), data_(other.data_), primary_(other.primary_), mu_(std::make_unique<std::mutex>()) {}

RelationTable& RelationTable::operator=(const RelationTable& other) {
    if (this != &other) {
        arity_ = other.arity_;
        data_ = other.data_;
        primary_ = other.primary_;
        secondary_.clear();
        mu_ = std::make_unique<std::mutex>();
    }
    return *this;
}

std::size_t RelationTable::hashColumns(std::span<const TermId> values, std::uint32_t mask) {
    std::size_t h = 0x84222325cbf29ce4ULL;
    for (std::size_t i = 0; i < values.size(); ++i)
        if (mask & (1u << i)) h = mixHash(h, values[i] + 1);
    return h ^ (h >> 31);
}

std::size_t RelationTable::hashKey(const TermId* key, std::uint32_t mask, std::uint32_t arity) {
    return hashColumns(std::span<const TermId>(key, arity), mask);
}

void RelationTable::addToIndex(HashIndex& idx, RowId r) const {
    idx.add(r, hashColumns(row(r), idx.mask()));
}

void RelationTable::rebuildIndex(HashIndex& idx, std::size_t capacity) const {
    idx.reset(capacity);
    const std::size_t n = size();
    for (RowId r = 0; r < n; ++r) addToIndex(idx, r);
}

RowId RelationTable::find(std::span<const TermId> tuple) const {
    assert(tuple.size() == arity_);
    const std::size_t h = hashColumns(tuple, primary_.mask());
    for (RowId r = primary_.first(h); r != kNoRow; r = primary_.next(r)) {
        if (std::equal(tuple.begin(), tuple.end(), row(r).begin())) return r;
    }
    return kNoRow;
}

bool RelationTable::contains(std::span<const TermId> tuple) const { return find(tuple) != kNoRow; }

bool RelationTable::insert(std::span<const TermId> tuple) {
    if (find(tuple) != kNoRow) return false;
    const RowId r = static_cast<RowId>(size());
    data_.insert(data_.end(), tuple.begin(), tuple.end());
    auto grow = [&](HashIndex& idx) {
        if (size() > idx.capacity())
            rebuildIndex(idx, size() * 2);
        else
            addToIndex(idx, r);
    };
    grow(primary_);
    for (auto& idx : secondary_) grow(*idx);
    return true;
}

const HashIndex& RelationTable::index(std::uint32_t mask) const {
    if (mask == primary_.mask()) return primary_;
    std::lock_guard lock(*mu_);
    for (const auto& idx : secondary_)
        if (idx->mask() == mask) return *idx;
    auto idx = std::make_unique<HashIndex>(mask);
    rebuildIndex(*idx, size() * 2);
    secondary_.push_back(std::move(idx));
    return *secondary_.back();
}

Instance::Instance(Signature sig) : sig_(std::move(sig)) {
    for (const RelationDecl& d : sig_.relations()) tables_.emplace_back(d.arity);
}

RelId Instance::ensureRelation(std::string_view name, std::uint32_t arity) {
    const RelId id = sig_.intern(name, arity);
    if (id == tables_.size()) tables_.emplace_back(arity);
    return id;
}

bool Instance::insert(RelId rel, std::span<const TermId> args) {
    if (args.size() != sig_[rel].arity)
        throw ModelError("arity mismatch inserting into " + sig_[rel].name);
    if (!tables_[rel].insert(args)) return false;
    ++factCount_;
    for (TermId id : args) {
        if (adomSet_.insert(id).second) {
            Term t = Term::fromId(id);
            adom_.push_back(t);
            maxDepth_ = std::max(maxDepth_, t.depth());
        }
    }
    return true;
}

bool Instance::insert(RelId rel, std::span<const Term> args) {
    std::vector<TermId> ids;
    ids.reserve(args.size());
    for (Term t : args) ids.push_back(t.id());
    return insert(rel, std::span<const TermId>(ids));
}

bool Instance::insertForeign(const Fact& f, const Signature& from) {
    const RelId rel = ensureRelation(from[f.rel].name, from[f.rel].arity);
    return insert(rel, std::span<const Term>(f.args));
}

bool Instance::contains(RelId rel, std::span<const TermId> args) const {
    if (rel >= tables_.size() || args.size() != sig_[rel].arity) return false;
    return tables_[rel].contains(args);
}

bool Instance::contains(const Fact& f) const {
    std::vector<TermId> ids;
    for (Term t : f.args) ids.push_back(t.id());
    return contains(f.rel, ids);
}

Fact Instance::fact(RelId rel, RowId row) const {
    Fact f;
    f.rel = rel;
    for (TermId id : tables_[rel].row(row)) f.args.push_back(Term::fromId(id));
    return f;
}

std::vector<Fact> Instance::facts() const {
    std::vector<Fact> out;
    out.reserve(factCount_);
    for (RelId rel = 0; rel < tables_.size(); ++rel)
        for (RowId r = 0; r < tables_[rel].size(); ++r) out.push_back(fact(rel, r));
    return out;
}

Instance Instance::withSignature(const Signature& sig) const {
    Instance out(sig);
    for (RelId rel = 0; rel < tables_.size(); ++rel) {
        const RelId target = out.ensureRelation(sig_[rel].name, sig_[rel].arity);
        for (RowId r = 0; r < tables_[rel].size(); ++r) out.insert(target, tables_[rel].row(r));
    }
    return out;
}

bool Instance::subsetOf(const Instance& other) const {
    for (RelId rel = 0; rel < tables_.size(); ++rel) {
        if (tables_[rel].size() == 0) continue;
        auto target = other.sig_.find(sig_[rel].name);
        if (!target || other.sig_[*target].arity != sig_[rel].arity) return false;
        for (RowId r = 0; r < tables_[rel].size(); ++r)
            if (!other.tables_[*target].contains(tables_[rel].row(r))) return false;
    }
    return true;
}

bool Instance::sameFacts(const Instance& other) const {
    return size() == other.size() && subsetOf(other);
}

std::string Instance::str() const {
    std::string out;
    for (const Fact& f : facts()) out += factString(f, sig_) + ".\n";
    return out;
}

}  // namespace chaselab
