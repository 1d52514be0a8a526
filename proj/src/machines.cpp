#include "chaselab/machines.h"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>
#include <unordered_map>

namespace chaselab {

namespace {

const char* testName(ZeroTest t) { return t == ZeroTest::Zero ? "zero" : "nonzero"; }

const char* deltaName(Delta d) {
    switch (d) {
        case Delta::Inc: return "inc";
        case Delta::Dec: return "dec";
        case Delta::Keep: return "keep";
    }
    return "?";
}

std::size_t slot(std::uint32_t state, ZeroTest t1, ZeroTest t2) {
    return state * 4 + static_cast<std::size_t>(t1) * 2 + static_cast<std::size_t>(t2);
}

}  // namespace

CounterMachine::CounterMachine(std::string name, std::vector<std::string> states,
                               std::vector<Instruction> instructions)
    : name_(std::move(name)), states_(std::move(states)), instructions_(std::move(instructions)) {
    if (states_.empty()) throw MachineError("machine " + name_ + " has no states");
    std::set<std::size_t> seen;
    for (const Instruction& in : instructions_) {
        if (in.state >= states_.size() || in.next >= states_.size())
            throw MachineError("instruction refers to an unknown state");
        if (!seen.insert(slot(in.state, in.test1, in.test2)).second)
            throw MachineError("two instructions for " + states_[in.state] + " " + testName(in.test1) + " " +
                               testName(in.test2));
        if ((in.test1 == ZeroTest::Zero && in.delta1 == Delta::Dec) ||
            (in.test2 == ZeroTest::Zero && in.delta2 == Delta::Dec))
            throw MachineError("decrement of a counter tested zero in state " + states_[in.state]);
    }
}

const Instruction* CounterMachine::find(std::uint32_t state, ZeroTest t1, ZeroTest t2) const {
    for (const Instruction& in : instructions_)
        if (in.state == state && in.test1 == t1 && in.test2 == t2) return &in;
    return nullptr;
}

std::string CounterMachine::str() const {
    std::string out = "states";
    for (const std::string& s : states_) out += " " + s;
    out += "\n";
    for (const Instruction& in : instructions_) {
        out += states_[in.state] + " " + testName(in.test1) + " " + testName(in.test2) + " -> " +
               states_[in.next] + " " + deltaName(in.delta1) + " " + deltaName(in.delta2) + "\n";
    }
    return out;
}

ParseResult<CounterMachine> parseMachine(std::string_view text, std::string name) {
    ParseResult<CounterMachine> result;
    std::vector<std::string> states;
    std::vector<Instruction> instructions;
    std::istringstream in{std::string(text)};
    std::string line;
    int lineNo = 0;
    auto fail = [&](const std::string& msg) {
        result.diagnostics.push_back({"", msg, lineNo, 1});
        return result;
    };
    auto stateIndex = [&](const std::string& s) -> std::optional<std::uint32_t> {
        auto it = std::find(states.begin(), states.end(), s);
        if (it == states.end()) return std::nullopt;
        return static_cast<std::uint32_t>(it - states.begin());
    };
    while (std::getline(in, line)) {
        ++lineNo;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        std::vector<std::string> tok;
        for (std::string t; ls >> t;) tok.push_back(t);
        if (tok.empty()) continue;
        if (tok[0] == "states") {
            if (!states.empty()) return fail("duplicate states line");
            states.assign(tok.begin() + 1, tok.end());
            if (states.empty()) return fail("no states declared");
            continue;
        }
        if (states.empty()) return fail("instruction before the states line");
        if (tok.size() != 7 || tok[3] != "->")
            return fail("expected: <state> <zero|nonzero> <zero|nonzero> -> <state> <inc|dec|keep> <inc|dec|keep>");
        Instruction ins;
        auto from = stateIndex(tok[0]);
        auto to = stateIndex(tok[4]);
        if (!from) return fail("unknown state " + tok[0]);
        if (!to) return fail("unknown state " + tok[4]);
        ins.state = *from;
        ins.next = *to;
        auto test = [&](const std::string& s, ZeroTest& t) {
            if (s == "zero") t = ZeroTest::Zero;
            else if (s == "nonzero") t = ZeroTest::NonZero;
            else return false;
            return true;
        };
        auto delta = [&](const std::string& s, Delta& d) {
            if (s == "inc") d = Delta::Inc;
            else if (s == "dec") d = Delta::Dec;
            else if (s == "keep") d = Delta::Keep;
            else return false;
            return true;
        };
        if (!test(tok[1], ins.test1) || !test(tok[2], ins.test2)) return fail("bad zero test");
        if (!delta(tok[5], ins.delta1) || !delta(tok[6], ins.delta2)) return fail("bad counter update");
        instructions.push_back(ins);
    }
    if (states.empty()) return fail("no states line");
    try {
        result.value = CounterMachine(std::move(name), std::move(states), std::move(instructions));
    } catch (const MachineError& e) {
        lineNo = 0;
        return fail(e.what());
    }
    return result;
}

SimResult simulate3CM(const CounterMachine& mach, std::size_t maxSteps) {
    SimResult res;
    Configuration c;
    res.trajectory.push_back(c);
    while (res.steps < maxSteps) {
        const Instruction* in = mach.find(c.state, c.c1 == 0 ? ZeroTest::Zero : ZeroTest::NonZero,
                                          c.c2 == 0 ? ZeroTest::Zero : ZeroTest::NonZero);
        if (!in) {
            res.halted = true;
            break;
        }
        auto apply = [](std::uint64_t& v, Delta d) {
            if (d == Delta::Inc) ++v;
            else if (d == Delta::Dec) --v;
        };
        apply(c.c1, in->delta1);
        apply(c.c2, in->delta2);
        ++c.c3;
        c.state = in->next;
        ++res.steps;
        res.trajectory.push_back(c);
    }
    if (!res.halted) {
        res.halted = mach.find(c.state, c.c1 == 0 ? ZeroTest::Zero : ZeroTest::NonZero,
                               c.c2 == 0 ? ZeroTest::Zero : ZeroTest::NonZero) == nullptr;
    }
    res.final = c;
    return res;
}

std::vector<std::uint64_t> firstPrimes(std::size_t n) {
    std::vector<std::uint64_t> out;
    for (std::uint64_t k = 2; out.size() < n; ++k) {
        bool prime = true;
        for (std::uint64_t q : out) {
            if (q * q > k) break;
            if (k % q == 0) {
                prime = false;
                break;
            }
        }
        if (prime) out.push_back(k);
    }
    return out;
}

ConwayFunction::ConwayFunction(const CounterMachine& mach) : m_(static_cast<std::uint32_t>(mach.stateCount())) {
    primes_ = firstPrimes(m_ + 3);
    for (std::uint64_t q : primes_) {
        if (modulus_ > UINT64_MAX / q) throw MachineError("modulus overflows 64 bits");
        modulus_ *= q;
    }
    const std::uint64_t c1 = primes_[m_], c2 = primes_[m_ + 1], c3 = primes_[m_ + 2];
    table_.assign(std::size_t{m_} * 4, {1, 1});
    for (std::uint32_t s = 0; s < m_; ++s) {
        for (ZeroTest t1 : {ZeroTest::Zero, ZeroTest::NonZero}) {
            for (ZeroTest t2 : {ZeroTest::Zero, ZeroTest::NonZero}) {
                const Instruction* in = mach.find(s, t1, t2);
                if (!in) continue;
                std::uint64_t q = primes_[in->next] * c3;
                std::uint64_t r = primes_[s];
                if (in->delta1 == Delta::Inc) q *= c1;
                if (in->delta1 == Delta::Dec) r *= c1;
                if (in->delta2 == Delta::Inc) q *= c2;
                if (in->delta2 == Delta::Dec) r *= c2;
                table_[slot(s, t1, t2)] = {q, r};
            }
        }
    }
}

std::pair<std::uint64_t, std::uint64_t> ConwayFunction::coefficients(std::uint64_t residue) const {
    int state = -1;
    for (std::uint32_t j = 0; j < m_; ++j) {
        if (residue % primes_[j] != 0) continue;
        if (state >= 0) return {1, 1};  // two state primes: not an encoding
        state = static_cast<int>(j);
    }
    if (state < 0) return {1, 1};
    const ZeroTest t1 = residue % primes_[m_] == 0 ? ZeroTest::NonZero : ZeroTest::Zero;
    const ZeroTest t2 = residue % primes_[m_ + 1] == 0 ? ZeroTest::NonZero : ZeroTest::Zero;
    return table_[slot(static_cast<std::uint32_t>(state), t1, t2)];
}

std::vector<std::uint64_t> ConwayFunction::coefficientValues() const {
    std::set<std::uint64_t> vals{1};
    for (auto [q, r] : table_) {
        vals.insert(q);
        vals.insert(r);
    }
    return {vals.begin(), vals.end()};
}

BigInt ConwayFunction::apply(const BigInt& n) const {
    const std::uint64_t i = static_cast<std::uint64_t>(n % modulus_);
    const auto [q, r] = coefficients(i);
    BigInt num = n * q;
    if (num % r != 0) throw MachineError("g is not integral at " + n.str());
    return num / r;
}

ConwayFunction buildConway(const CounterMachine& mach) { return ConwayFunction(mach); }

BigInt encodeConfig(const ConwayFunction& cw, const Configuration& c) {
    if (c.state >= cw.m()) throw MachineError("state index out of range");
    const auto& p = cw.primes();
    const std::uint32_t m = cw.m();
    return BigInt(p[c.state]) * boost::multiprecision::pow(BigInt(p[m]), static_cast<unsigned>(c.c1)) *
           boost::multiprecision::pow(BigInt(p[m + 1]), static_cast<unsigned>(c.c2)) *
           boost::multiprecision::pow(BigInt(p[m + 2]), static_cast<unsigned>(c.c3));
}

std::vector<BigInt> iterateG(const ConwayFunction& cw, const BigInt& start, std::size_t maxIters) {
    std::vector<BigInt> out;
    out.reserve(maxIters + 1);
    out.push_back(start);
    for (std::size_t k = 0; k < maxIters; ++k) out.push_back(cw.apply(out.back()));
    return out;
}

Program generateTM(const CounterMachine& mach, const TmOptions& options) {
    const ConwayFunction cw(mach);
    const std::vector<std::uint64_t> qr = cw.coefficientValues();
    if (qr.back() > options.maxCoefficient)
        throw MachineError("coefficient " + std::to_string(qr.back()) + " exceeds the limit " +
                           std::to_string(options.maxCoefficient) + "; E^j rule bodies would be too long");
    const std::uint64_t p = cw.modulus();

    auto E = [](std::uint64_t j) { return "E" + std::to_string(j); };
    auto T = [](std::uint64_t i) { return "T" + std::to_string(i); };
    auto R = [](std::uint64_t i) { return "R" + std::to_string(i); };

    ProgramBuilder b;
    b.relation("E", 2);
    for (std::uint64_t j : qr) b.relation(E(j), 2);
    b.relation("H", 1);
    for (std::uint64_t i = 0; i < p; ++i) b.relation(T(i), 3);
    for (std::uint64_t i = 0; i < p; ++i) b.relation(R(i), 2);
    b.relation("G", 2);
    b.relation("N", 1);

    b.rule("e", {{"G", {"X", "Y"}}, {"H", {"Y"}}}, {{"E", {"Z", "X"}}}, {"Z"});
    for (std::uint64_t j : qr) {
        std::vector<NamedAtom> body;
        std::string prev = "Y";
        for (std::uint64_t k = 1; k <= j; ++k) {
            std::string next = "Y" + std::to_string(k);
            body.push_back({"E", {prev, next}});
            prev = next;
        }
        b.rule("d0_" + std::to_string(j), body, {{E(j), {"Y", prev}}});
    }
    b.rule("d1", {{"E", {"Z", "X"}}}, {{"N", {"Z"}}});
    for (std::uint64_t i = 0; i < p; ++i) b.rule("d2_" + std::to_string(i), {{"N", {"X"}}}, {{T(i), {"X", "X", "X"}}});
    for (std::uint64_t i = 0; i < p; ++i) {
        auto [q, r] = cw.coefficients(i);
        if (options.orientation == D3Orientation::Forward) std::swap(q, r);
        b.rule("d3_" + std::to_string(i),
               {{T(i), {"X", "Y", "Z"}}, {E(q), {"Y", "Y1"}}, {E(r), {"Z", "Z1"}}},
               {{T(i), {"X", "Y1", "Z1"}}});
    }
    b.rule("d4", {{"N", {"X"}}}, {{R(0), {"X", "X"}}});
    for (std::uint64_t i = 0; i < p; ++i)
        b.rule("d5_" + std::to_string(i), {{R(i), {"X", "Y"}}, {"E", {"Y", "Y1"}}}, {{R((i + 1) % p), {"X", "Y1"}}});
    b.rule("d6", {{"E", {"X", "Y"}}, {"E", {"Y", "Z"}}}, {{"G", {"X", "Z"}}});
    for (std::uint64_t i = 0; i < p; ++i)
        b.rule("d7_" + std::to_string(i), {{R(i), {"X", "Y"}}, {"G", {"X", "Y"}}, {T(i), {"X", "Y", "Z"}}},
               {{"G", {"X", "Z"}}});
    return std::move(b).build();
}

AppendixAReport verifyAppendixA(const ChaseResult& res, const CounterMachine& mach, D3Orientation orientation,
                                std::size_t maxViolations) {
    return verifyAppendixA(res.finalInstance, mach, orientation, maxViolations);
}

AppendixAReport verifyAppendixA(const Instance& inst, const CounterMachine& mach, D3Orientation orientation,
                                std::size_t maxViolations) {
    AppendixAReport rep;
    auto violation = [&](std::string msg) {
        rep.pass = false;
        if (rep.violations.size() < maxViolations) rep.violations.push_back(std::move(msg));
    };
    const Signature& sig = inst.signature();
    const TermId w = Term::constant("w").id();
    auto rel = [&](const std::string& n) { return sig.find(n); };
    auto eRel = rel("E");
    if (!eRel) {
        violation("no relation E");
        return rep;
    }

    // E without the w loop is a descending path rooted at w.
    std::unordered_map<TermId, std::vector<TermId>> out, in;
    const RelationTable& et = inst.table(*eRel);
    for (RowId r = 0; r < et.size(); ++r) {
        const TermId a = et.row(r)[0], b = et.row(r)[1];
        if (a == w && b == w) continue;
        if (a == b) violation("self-loop E(" + Term::fromId(a).str() + "," + Term::fromId(a).str() + ")");
        out[a].push_back(b);
        in[b].push_back(a);
    }
    for (Term t : inst.adom()) {
        const std::size_t od = out.count(t.id()) ? out[t.id()].size() : 0;
        const std::size_t id = in.count(t.id()) ? in[t.id()].size() : 0;
        if (t.id() == w && od != 0) violation("w has E_0 out-degree " + std::to_string(od));
        if (t.id() != w && od != 1) violation(t.str() + " has E_0 out-degree " + std::to_string(od));
        if (id > 1) violation(t.str() + " has E_0 in-degree " + std::to_string(id));
    }
    std::unordered_map<TermId, std::size_t> dist;  // distance to w along E
    {
        TermId cur = w;
        dist[w] = 0;
        while (in.count(cur) && !in[cur].empty()) {
            const TermId prev = in[cur].front();
            if (dist.count(prev)) {
                violation("E_0 cycle through " + Term::fromId(prev).str());
                break;
            }
            dist[prev] = dist[cur] + 1;
            cur = prev;
        }
        rep.pathLength = dist.size() - 1;
    }
    for (Term t : inst.adom())
        if (!dist.count(t.id())) violation(t.str() + " is not on the E_0 path from w");
    if (!rep.pass) return rep;

    const ConwayFunction cw(mach);
    const std::uint64_t p = cw.modulus();
    // Position j of b relative to x: exact, or "any j >= dist(x)" for w.
    auto position = [&](TermId x, TermId b) -> std::optional<std::uint64_t> {
        if (b == w) return std::nullopt;
        return dist[x] - dist[b];
    };
    auto below = [&](TermId x, TermId b) { return b == w || dist[b] <= dist[x]; };

    // T facts encode multiplication by q_i/r_i.
    for (std::uint64_t i = 0; i < p; ++i) {
        auto tr = rel("T" + std::to_string(i));
        if (!tr) continue;
        auto [q, r] = cw.coefficients(i);
        // Facts T(x, a_j, a_j') satisfy j*A = j'*B.
        const std::uint64_t A = orientation == D3Orientation::Forward ? q : r;
        const std::uint64_t B = orientation == D3Orientation::Forward ? r : q;
        const RelationTable& t = inst.table(*tr);
        for (RowId row = 0; row < t.size(); ++row) {
            ++rep.checkedT;
            const TermId x = t.row(row)[0], b = t.row(row)[1], c = t.row(row)[2];
            if (!below(x, b) || !below(x, c)) {
                violation(factString(inst.fact(*tr, row), sig) + ": argument above x");
                continue;
            }
            const std::uint64_t k0 = dist[x];
            auto j = position(x, b), j2 = position(x, c);
            bool ok = true;
            if (j && j2) ok = *j * A == *j2 * B;
            else if (j) ok = (*j * A) % B == 0 && (*j * A) / B >= k0;
            else if (j2) ok = (*j2 * B) % A == 0 && (*j2 * B) / A >= k0;
            if (!ok) violation(factString(inst.fact(*tr, row), sig) + ": ratio invariant fails");
        }
    }
    // R facts count modulo p.
    for (std::uint64_t i = 0; i < p; ++i) {
        auto rr = rel("R" + std::to_string(i));
        if (!rr) continue;
        const RelationTable& t = inst.table(*rr);
        for (RowId row = 0; row < t.size(); ++row) {
            ++rep.checkedR;
            const TermId x = t.row(row)[0], b = t.row(row)[1];
            if (!below(x, b)) {
                violation(factString(inst.fact(*rr, row), sig) + ": argument above x");
                continue;
            }
            if (auto j = position(x, b); j && *j % p != i)
                violation(factString(inst.fact(*rr, row), sig) + ": residue invariant fails");
        }
    }
    // G_x follows the orbit of g until it reaches w.
    std::size_t maxDist = 0;
    for (auto& [t, d] : dist) maxDist = std::max(maxDist, d);
    std::vector<std::uint64_t> orbit;  // distinct values below maxDist, in order
    {
        BigInt n = 2;
        std::set<BigInt> seen;
        for (std::size_t k = 0; k < 100000; ++k) {
            if (!seen.insert(n).second) {
                rep.orbitBounded = true;
                break;
            }
            rep.orbitMax = std::max(rep.orbitMax, n);
            if (n > maxDist) break;
            orbit.push_back(static_cast<std::uint64_t>(n));
            n = cw.apply(n);
        }
    }
    auto gr = rel("G");
    std::unordered_map<TermId, std::set<std::uint64_t>> gset;
    std::unordered_map<TermId, bool> gw;
    if (gr) {
        const RelationTable& t = inst.table(*gr);
        for (RowId row = 0; row < t.size(); ++row) {
            ++rep.checkedG;
            const TermId x = t.row(row)[0], b = t.row(row)[1];
            if (!below(x, b)) {
                violation(factString(inst.fact(*gr, row), sig) + ": argument above x");
                continue;
            }
            if (auto j = position(x, b)) gset[x].insert(*j);
            else gw[x] = true;
        }
    }
    for (auto& [x, d] : dist) {
        std::set<std::uint64_t> expected;
        bool reachesW = !rep.orbitBounded;
        for (std::uint64_t v : orbit) {
            if (v >= d) {
                reachesW = true;
                break;
            }
            expected.insert(v);
        }
        if (rep.orbitBounded && rep.orbitMax >= d) reachesW = true;
        const std::string xs = Term::fromId(x).str();
        const auto& got = gset[x];
        if (!reachesW) {
            if (got != expected) violation("G_" + xs + " differs from the orbit");
            if (gw[x]) violation("G_" + xs + "(w) holds although the orbit stays below " + std::to_string(d));
        } else {
            for (std::uint64_t v : expected)
                if (!got.count(v)) violation("G_" + xs + " misses orbit value " + std::to_string(v));
            if (!gw[x]) violation("G_" + xs + "(w) missing although the orbit reaches w");
        }
    }
    return rep;
}

namespace zoo {

CounterMachine immediateHalt() { return CounterMachine("halt0", {"q1"}, {}); }

CounterMachine upDown(std::uint32_t k) {
    std::vector<std::string> states;
    for (std::uint32_t s = 1; s <= k + 1; ++s) states.push_back("q" + std::to_string(s));
    std::vector<Instruction> ins;
    for (std::uint32_t s = 0; s < k; ++s) {
        for (ZeroTest t1 : {ZeroTest::Zero, ZeroTest::NonZero})
            ins.push_back({s, t1, ZeroTest::Zero, s + 1, Delta::Inc, Delta::Keep});
    }
    ins.push_back({k, ZeroTest::NonZero, ZeroTest::Zero, k, Delta::Dec, Delta::Keep});
    return CounterMachine("updown" + std::to_string(k), std::move(states), std::move(ins));
}

CounterMachine upDownOne() {
    return CounterMachine("updown1", {"q1"},
                          {{0, ZeroTest::Zero, ZeroTest::Zero, 0, Delta::Inc, Delta::Inc},
                           {0, ZeroTest::NonZero, ZeroTest::NonZero, 0, Delta::Dec, Delta::Keep}});
}

CounterMachine loop1() {
    return CounterMachine("loop1", {"q1"}, {{0, ZeroTest::Zero, ZeroTest::Zero, 0, Delta::Keep, Delta::Keep}});
}

}  // namespace zoo

}  // namespace chaselab
