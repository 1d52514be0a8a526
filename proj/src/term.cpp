#include "chaselab/term.h"

#include <array>
#include <atomic>
#include <cassert>
#include <deque>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

namespace chaselab {
namespace {

struct Node {
    bool constant = true;
    std::uint32_t depth = 0;
    std::uint64_t nonce = 0;
    const std::string* name = nullptr;
    SkolemFn fn;
    std::vector<Term> args;
    std::size_t hash = 0;
};

constexpr std::size_t kChunkBits = 14;
constexpr std::size_t kChunkSize = std::size_t{1} << kChunkBits;
constexpr std::size_t kMaxChunks = std::size_t{1} << 16;

std::size_t mix(std::size_t h, std::size_t v) {
    return h ^ (v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2));
}

class Pool {
public:
    static Pool& instance() {
        static Pool pool;
        return pool;
    }

    const Node& node(TermId id) const {
        const Node* chunk = chunks_[id >> kChunkBits].load(std::memory_order_acquire);
        return chunk[id & (kChunkSize - 1)];
    }

    TermId intern(Node&& n, const std::string& key) {
        std::lock_guard lock(mu_);
        auto it = index_.find(key);
        if (it != index_.end()) return it->second;
        const std::size_t id = count_;
        if ((id >> kChunkBits) >= kMaxChunks) throw std::length_error("term pool exhausted");
        auto& slot = chunks_[id >> kChunkBits];
        Node* chunk = slot.load(std::memory_order_relaxed);
        if (chunk == nullptr) {
            owned_.push_back(std::make_unique<Node[]>(kChunkSize));
            chunk = owned_.back().get();
            slot.store(chunk, std::memory_order_release);
        }
        chunk[id & (kChunkSize - 1)] = std::move(n);
        ++count_;
        index_.emplace(key, static_cast<TermId>(id));
        return static_cast<TermId>(id);
    }

    const std::string* internString(std::string_view s) {
        std::lock_guard lock(mu_);
        return &*strings_.emplace(s).first;
    }

    std::size_t size() const {
        std::lock_guard lock(mu_);
        return count_;
    }

private:
    Pool() {
        for (auto& c : chunks_) c.store(nullptr, std::memory_order_relaxed);
    }

    mutable std::mutex mu_;
    std::array<std::atomic<Node*>, kMaxChunks> chunks_;
    std::vector<std::unique_ptr<Node[]>> owned_;
    std::unordered_map<std::string, TermId> index_;
    std::unordered_set<std::string> strings_;
    std::size_t count_ = 0;
};

void appendBytes(std::string& key, const void* p, std::size_t n) {
    key.append(static_cast<const char*>(p), n);
}

}  // namespace

SkolemFn skolemFunction(std::string_view ruleId, std::uint32_t index) {
    return SkolemFn{Pool::instance().internString(ruleId), index};
}

Term Term::constant(std::string_view name) {
    Pool& pool = Pool::instance();
    std::string key;
    key.reserve(name.size() + 1);
    key.push_back('c');
    key.append(name);
    Node n;
    n.constant = true;
    n.name = pool.internString(name);
    n.hash = std::hash<std::string_view>{}(name);
    return Term(pool.intern(std::move(n), key));
}

Term Term::skolem(SkolemFn fn, std::span<const Term> args, std::uint64_t nonce) {
    Pool& pool = Pool::instance();
    std::string key;
    key.reserve(1 + sizeof(void*) + 12 + args.size() * 4);
    key.push_back('s');
    appendBytes(key, &fn.ruleId, sizeof(fn.ruleId));
    appendBytes(key, &fn.index, sizeof(fn.index));
    appendBytes(key, &nonce, sizeof(nonce));
    Node n;
    n.constant = false;
    n.fn = fn;
    n.nonce = nonce;
    n.args.assign(args.begin(), args.end());
    std::uint32_t depth = 0;
    std::size_t h = mix(std::hash<std::string>{}(*fn.ruleId), fn.index);
    h = mix(h, nonce);
    for (Term a : args) {
        assert(a.valid());
        TermId id = a.id();
        appendBytes(key, &id, sizeof(id));
        depth = std::max(depth, a.depth());
        h = mix(h, a.hash());
    }
    n.depth = depth + 1;
    n.hash = h;
    return Term(pool.intern(std::move(n), key));
}

bool Term::isConstant() const { return Pool::instance().node(id_).constant; }
const std::string& Term::name() const { return *Pool::instance().node(id_).name; }
SkolemFn Term::function() const { return Pool::instance().node(id_).fn; }
std::span<const Term> Term::args() const { return Pool::instance().node(id_).args; }
std::uint64_t Term::nonce() const { return Pool::instance().node(id_).nonce; }
std::uint32_t Term::depth() const { return Pool::instance().node(id_).depth; }
std::size_t Term::hash() const { return Pool::instance().node(id_).hash; }

bool Term::contains(Term other) const {
    // Iterative with a visited set: terms share subterms, so plain recursion
    // can revisit exponentially many paths.
    std::vector<Term> stack{*this};
    std::unordered_set<TermId> seen{id_};
    while (!stack.empty()) {
        const Term t = stack.back();
        stack.pop_back();
        if (t == other) return true;
        if (t.depth() <= other.depth()) continue;
        for (Term a : t.args())
            if (seen.insert(a.id()).second) stack.push_back(a);
    }
    return false;
}

namespace {

bool plainIdentifier(const std::string& s) {
    if (s.empty()) return false;
    const char c0 = s[0];
    if (!((c0 >= 'a' && c0 <= 'z') || (c0 >= '0' && c0 <= '9'))) return false;
    for (char c : s) {
        const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                        (c >= '0' && c <= '9') || c == '_';
        if (!ok) return false;
    }
    return true;
}

void render(Term t, std::string& out) {
    if (t.isConstant()) {
        const std::string& n = t.name();
        if (plainIdentifier(n)) {
            out += n;
        } else {
            out.push_back('"');
            for (char c : n) {
                if (c == '"' || c == '\\') out.push_back('\\');
                out.push_back(c);
            }
            out.push_back('"');
        }
        return;
    }
    SkolemFn fn = t.function();
    out += *fn.ruleId;
    out.push_back('~');
    out += std::to_string(fn.index);
    if (t.nonce() != 0) {
        out.push_back('@');
        out += std::to_string(t.nonce());
    }
    out.push_back('(');
    bool first = true;
    for (Term a : t.args()) {
        if (!first) out.push_back(',');
        first = false;
        render(a, out);
    }
    out.push_back(')');
}

}  // namespace

std::string Term::str() const {
    std::string out;
    render(*this, out);
    return out;
}

std::string Term::label() const {
    if (isConstant()) return str();
    return "_" + std::to_string(id_);
}

std::string Term::definition() const {
    if (isConstant()) return str();
    const SkolemFn fn = function();
    std::string out = *fn.ruleId + "~" + std::to_string(fn.index);
    if (nonce() != 0) out += "@" + std::to_string(nonce());
    out.push_back('(');
    bool first = true;
    for (Term a : args()) {
        if (!first) out.push_back(',');
        first = false;
        out += a.label();
    }
    out.push_back(')');
    return out;
}

std::strong_ordering compareTerms(Term a, Term b) {
    if (a == b) return std::strong_ordering::equal;
    const bool ca = a.isConstant(), cb = b.isConstant();
    if (ca != cb) return ca ? std::strong_ordering::less : std::strong_ordering::greater;
    if (ca) return a.name() <=> b.name();
    SkolemFn fa = a.function(), fb = b.function();
    if (fa.ruleId != fb.ruleId) {
        if (auto c = *fa.ruleId <=> *fb.ruleId; c != 0) return c;
    }
    if (auto c = fa.index <=> fb.index; c != 0) return c;
    if (auto c = a.nonce() <=> b.nonce(); c != 0) return c;
    return compareTermSeq(a.args(), b.args());
}

std::strong_ordering compareTermSeq(std::span<const Term> a, std::span<const Term> b) {
    const std::size_t n = std::min(a.size(), b.size());
    for (std::size_t i = 0; i < n; ++i) {
        if (auto c = compareTerms(a[i], b[i]); c != 0) return c;
    }
    return a.size() <=> b.size();
}

std::size_t internedTermCount() { return Pool::instance().size(); }

}  // namespace chaselab
