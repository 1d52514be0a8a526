#include <cstdlib>
#include <deque>
#include <filesystem>
#include <map>
#include <random>
#include <set>

#include "chaselab/arena.h"
#include "chaselab/critical.h"
#include "util.h"

using namespace chaselab;
using testutil::config;
using testutil::corpus;
using testutil::slurp;

namespace {

std::size_t countPrefix(const Program& p, const std::string& prefix) {
    std::size_t n = 0;
    for (const TGD& r : p.rules) n += r.id() == prefix || r.id().rfind(prefix + "_", 0) == 0;
    return n;
}

std::uint64_t fullTreeNodes(std::uint64_t p, std::uint64_t depth) {
    std::uint64_t total = 0, level = 1;
    for (std::uint64_t d = 0; d <= depth; ++d, level *= p) total += level;
    return total;
}

// Facts of C_N of arena0(m) computed over path positions 0..N by a Datalog
// fixpoint on integers.
struct IntSnapshot {
    std::set<std::pair<std::size_t, std::size_t>> T;
    std::vector<std::set<std::size_t>> C;
    std::set<std::size_t> K;
};

IntSnapshot integerSnapshot(unsigned m, std::size_t N) {
    IntSnapshot s;
    s.C.resize(m + 1);
    s.K.insert(0);
    for (unsigned i = 0; i <= m; ++i) s.C[i].insert(0);
    bool changed = true;
    while (changed) {
        changed = false;
        auto add = [&](auto& set, auto v) { changed = set.insert(v).second || changed; };
        for (std::size_t y = 1; y <= N; ++y) add(s.T, std::make_pair(y, y));
        for (auto [x, y] : std::set(s.T))
            if (x >= 2 && y >= 1) add(s.T, std::make_pair(x - 2, y - 1));
        for (unsigned i = 0; i < m; ++i)
            for (auto [x, y] : std::set(s.T))
                if (s.C[i].count(x)) add(s.C[i + 1], y);
        for (std::size_t x = 0; x < N; ++x)
            if (s.C[m].count(x)) add(s.K, x + 1);
    }
    return s;
}

ThueInstance corpusThue(const std::string& name) {
    auto r = parseThue(slurp(corpus("thue/" + name + ".thue")));
    EXPECT_TRUE(r.ok()) << r.message();
    return *r.value;
}

// Depth-first reachability over words, one target check per length.
bool referenceSolvable(const ThueInstance& t, std::uint64_t kMax) {
    const char last = static_cast<char>('0' + t.p);
    for (std::uint64_t k = 0; k <= kMax; ++k) {
        const std::string from = "1" + std::string(k, last), to = "2" + std::string(k, last);
        std::set<std::string> seen{from};
        std::vector<std::string> stack{from};
        while (!stack.empty()) {
            const std::string w = stack.back();
            stack.pop_back();
            if (w == to) return true;
            for (std::size_t i = 0; i + 1 < w.size(); ++i)
                for (const auto& [l, r] : t.productions)
                    if (w.compare(i, 2, l) == 0) {
                        std::string v = w;
                        v.replace(i, 2, r);
                        if (seen.insert(v).second) stack.push_back(v);
                    }
        }
    }
    return false;
}

}  // namespace

TEST(Arena0, RuleList) {
    for (unsigned m = 1; m <= 4; ++m) {
        const Program p = generateArena0(m);
        // (d0), (e), (d1), (d2), (d4), then (d0') and (d3) copies.
        EXPECT_EQ(p.rules.size(), 5u + (m + 1) + m) << m;
        EXPECT_EQ(countPrefix(p, "d0p"), m + 1);
        EXPECT_EQ(countPrefix(p, "d3"), m);
        EXPECT_TRUE(validateProgram(p).empty());
    }
    EXPECT_THROW(generateArena0(0), ArenaError);
}

TEST(Arena0, PathLengths) {
    for (unsigned m = 1; m <= 4; ++m) {
        const Program p = generateArena0(m);
        const ChaseResult r = runChase(p, arenaSeed(p.signature), config(Variant::Oblivious));
        ASSERT_EQ(r.verdict, Verdict::Terminated);
        const TreeShape s = analyzeTree(r.finalInstance, {"R"}, Term::constant("a"));
        EXPECT_TRUE(s.tree && s.full && s.strayEdges == 0) << m;
        const std::uint64_t M = std::uint64_t{1} << m;
        EXPECT_EQ(s.depth, M + 1);
        EXPECT_EQ(s.nodes, M + 2);
        EXPECT_EQ(r.finalInstance.size(*p.signature.find("R")), M + 1);
    }
}

TEST(Arena0Snapshots, SnapshotsMatchIntegerFixpoint) {
    for (unsigned m = 1; m <= 3; ++m) {
        const Program p = generateArena0(m);
        ChaseConfig c = config(Variant::Oblivious);
        ChaseRun run(p, arenaSeed(p.signature), c);
        std::vector<Term> elems{Term::constant("a")};
        const RelId R = *p.signature.find("R"), T = *p.signature.find("T"), K = *p.signature.find("K");
        for (std::size_t N = 0;; ++N) {
            run.saturate();
            const Instance& inst = run.instance();
            const IntSnapshot want = integerSnapshot(m, N);
            std::size_t tCount = 0;
            for (std::size_t i = 0; i <= N; ++i) {
                for (std::size_t j = 0; j <= N; ++j) {
                    const bool has = inst.contains(Fact{T, {elems[i], elems[j]}});
                    EXPECT_EQ(has, want.T.count({i, j}) == 1) << "m=" << m << " N=" << N << " T(" << i << "," << j << ")";
                    tCount += has;
                }
                EXPECT_EQ(inst.contains(Fact{K, {elems[i]}}), want.K.count(i) == 1) << "K " << i << " N=" << N;
                for (unsigned ci = 0; ci <= m; ++ci) {
                    const RelId C = *p.signature.find("C" + std::to_string(ci));
                    EXPECT_EQ(inst.contains(Fact{C, {elems[i]}}), want.C[ci].count(i) == 1)
                        << "C" << ci << " " << i << " N=" << N;
                }
            }
            EXPECT_EQ(inst.size(T), tCount);
            EXPECT_EQ(inst.size(R), N);
            auto next = run.nextTrigger();
            if (!next) {
                EXPECT_EQ(N, (std::size_t{1} << m) + 1);
                break;
            }
            run.fire(*next);
            elems.push_back(run.trace().back().added.front().args[1]);
        }
    }
}

TEST(Arena0Snapshots, StatedTBoundDisagreesWithTheChase) {
    const AppendixBReport r = verifyAppendixB(2);
    EXPECT_EQ(r.snapshots, 6u);  // C_0 .. C_{M+1}
    EXPECT_TRUE(r.pathShape);
    const LemmaCheck* l5 = r.find("T-stated");
    ASSERT_NE(l5, nullptr);
    EXPECT_FALSE(l5->pass());
    ASSERT_FALSE(l5->examples.empty());
    EXPECT_EQ(l5->examples[0], "T(a_0,a_0) expected true at N=0");
    EXPECT_FALSE(r.statedPass());
}

TEST(Arena0Snapshots, CorrectedTBoundAndOtherChecksHold) {
    for (unsigned m = 1; m <= 4; ++m) {
        const AppendixBReport r = verifyAppendixB(m);
        for (const char* name : {"T-corrected", "C-bound", "K-bound", "K-last"}) {
            const LemmaCheck* c = r.find(name);
            ASSERT_NE(c, nullptr) << name;
            EXPECT_TRUE(c->pass()) << "m=" << m << " " << name << ": "
                                   << (c->examples.empty() ? "" : c->examples[0]);
            EXPECT_GT(c->checked, 0u);
        }
    }
}

TEST(Arena0Snapshots, HandCheckedFacts) {
    // m=2, N=2: T(a_0,a_1) from T(a_2,a_2); T(a_1,a_2) and T(a_2,a_1) absent.
    const IntSnapshot s = integerSnapshot(2, 2);
    EXPECT_TRUE(s.T.count({0, 1}));
    EXPECT_FALSE(s.T.count({1, 2}));
    EXPECT_FALSE(s.T.count({2, 1}));
    // m=1, N=1: C_1(a_0) holds, C_1(a_1) does not.
    const IntSnapshot t = integerSnapshot(1, 1);
    EXPECT_TRUE(t.C[1].count(0));
    EXPECT_FALSE(t.C[1].count(1));
    // m=2, N=4: K(a_4).
    EXPECT_TRUE(integerSnapshot(2, 4).K.count(4));
}

TEST(Arena1, CloneCounts) {
    const Program p = generateArena1(1, 2);
    EXPECT_EQ(countPrefix(p, "e"), 2u);
    EXPECT_EQ(countPrefix(p, "d2"), 8u);
    EXPECT_EQ(countPrefix(p, "d1"), 2u);
    EXPECT_EQ(countPrefix(p, "d4"), 2u);
    EXPECT_EQ(countPrefix(p, "d0"), 1u);
    EXPECT_TRUE(validateProgram(p).empty());
}

TEST(Arena1, SingleChoiceMatchesArena0) {
    const Program a0 = generateArena0(2), a1 = generateArena1(2, 1);
    ASSERT_EQ(a0.rules.size(), a1.rules.size());
    const ChaseResult r0 = runChase(a0, arenaSeed(a0.signature), config(Variant::Oblivious));
    const ChaseResult r1 = runChase(a1, arenaSeed(a1.signature), config(Variant::Oblivious));
    EXPECT_EQ(r0.finalInstance.size(), r1.finalInstance.size());
    const TreeShape s = analyzeTree(r1.finalInstance, {"R1"}, Term::constant("a"));
    EXPECT_EQ(s.nodes, 6u);
}

TEST(Arena1, FullTrees) {
    for (auto [m, p] : {std::pair{1u, 2u}, {1u, 3u}, {2u, 2u}}) {
        const Program prog = generateArena1(m, p);
        const ChaseResult r = runChase(prog, arenaSeed(prog.signature), config(Variant::Oblivious));
        ASSERT_EQ(r.verdict, Verdict::Terminated);
        std::vector<std::string> rels;
        for (unsigned i = 1; i <= p; ++i) rels.push_back("R" + std::to_string(i));
        const TreeShape s = analyzeTree(r.finalInstance, rels, Term::constant("a"));
        const std::uint64_t M = std::uint64_t{1} << m;
        EXPECT_TRUE(s.tree && s.full) << m << "," << p;
        EXPECT_EQ(s.depth, M + 1);
        EXPECT_EQ(s.nodes, fullTreeNodes(p, M + 1));
        EXPECT_EQ(arenaNodeCount({m, p}), fullTreeNodes(p, M + 1));
    }
    EXPECT_EQ(fullTreeNodes(3, 3), 40u);
}

TEST(Arena1, SeedIndependence) {
    const Program prog = generateArena1(1, 2);
    const ChaseResult fromH = runChase(prog, arenaSeed(prog.signature), config(Variant::Oblivious));
    const ChaseResult fromW = runChase(prog, buildCritical(prog.signature), config(Variant::Oblivious));
    // The critical instance adds the loops R1(w,w), R2(w,w); compare without them.
    const Instance crit = buildCritical(prog.signature);
    Instance grown(prog.signature);
    for (const Fact& f : fromW.finalInstance.facts())
        if (!crit.contains(f)) grown.insert(f);
    const TreeShape a = analyzeTree(fromH.finalInstance, {"R1", "R2"}, Term::constant("a"));
    const TreeShape b = analyzeTree(grown, {"R1", "R2"}, Term::constant("w"));
    EXPECT_EQ(a.nodes, b.nodes);
    EXPECT_EQ(a.depth, b.depth);
    EXPECT_TRUE(b.full);
}

TEST(Arena, NodeBudget) {
    EXPECT_THROW(generateArena1(3, 4), ArenaError);
    ::setenv("CHASE_LAB_MAX_NODES", "10", 1);
    EXPECT_EQ(nodeBudget(), 10u);
    EXPECT_THROW(generateArena1(1, 2), ArenaError);
    ::unsetenv("CHASE_LAB_MAX_NODES");
    EXPECT_EQ(nodeBudget(), 100000u);
    EXPECT_NO_THROW(generateArena1(1, 2));
}

TEST(Arena2, AddsEdgeRules) {
    const Program p = generateArena2(1, 2);
    EXPECT_EQ(p.rules.size(), generateArena1(1, 2).rules.size() + 2);
    ASSERT_TRUE(p.findRule("dp"));
    ASSERT_TRUE(p.findRule("ep"));
    EXPECT_EQ(p.signature[*p.signature.find("E")].arity, 2u);
    EXPECT_EQ(p.signature[*p.signature.find("C")].arity, 1u);
}

TEST(Thue, ParsePrintValidate) {
    auto r = parseThue("# x\np=2, m=1\n12 -> 22\n");
    ASSERT_TRUE(r.ok()) << r.message();
    EXPECT_EQ(r.value->productions.size(), 1u);
    auto again = parseThue(printThue(*r.value));
    ASSERT_TRUE(again.ok());
    EXPECT_EQ(again.value->productions, r.value->productions);
    EXPECT_FALSE(parseThue("p=2, m=1\n13 -> 22\n").ok());
    EXPECT_FALSE(parseThue("p=2, m=1\n1 -> 22\n").ok());
    EXPECT_FALSE(parseThue("12 -> 22\n").ok());
    EXPECT_THROW(validateThue(ThueInstance{1, 1, {}}), ArenaError);
}

TEST(Thue, OracleExamples) {
    const ThueAnswer ex = thueOracle(corpusThue("ex"));
    EXPECT_TRUE(ex.solvable);
    EXPECT_EQ(ex.k, 1u);
    EXPECT_EQ(ex.trace, (std::vector<std::string>{"12", "22"}));
    EXPECT_FALSE(thueOracle(corpusThue("empty")).solvable);
    EXPECT_FALSE(thueOracle(corpusThue("swap_blocked")).solvable);
    const ThueAnswer two = thueOracle(corpusThue("two_hop"));
    EXPECT_TRUE(two.solvable);
    EXPECT_EQ(two.k, 2u);
}

TEST(Thue, OracleMatchesReferenceSearch) {
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 200; ++trial) {
        ThueInstance t;
        t.p = 2 + static_cast<unsigned>(rng() % 2);
        t.m = 1 + static_cast<unsigned>(rng() % 2);
        const int n = static_cast<int>(rng() % 4);
        for (int i = 0; i < n; ++i) {
            auto letter = [&] { return static_cast<char>('1' + rng() % t.p); };
            t.productions.push_back({{letter(), letter()}, {letter(), letter()}});
        }
        const ThueAnswer a = thueOracle(t);
        EXPECT_EQ(a.solvable, referenceSolvable(t, t.M() - 1)) << printThue(t);
        if (a.solvable) {
            // Monotone in m: a solution below M stays one below 2M.
            ThueInstance bigger = t;
            bigger.m += 1;
            EXPECT_TRUE(thueOracle(bigger).solvable);
            EXPECT_EQ(a.trace.front(), "1" + std::string(a.k, static_cast<char>('0' + t.p)));
            EXPECT_EQ(a.trace.back(), "2" + std::string(a.k, static_cast<char>('0' + t.p)));
        }
    }
}

TEST(Thue, ProgramShape) {
    const Program empty = generateThueProgram(corpusThue("empty"));
    EXPECT_EQ(countPrefix(empty, "p1"), 0u);
    EXPECT_EQ(countPrefix(empty, "p2"), 2u);
    for (const char* g : {"g1", "g2", "g3", "g4", "g5", "g6", "g7"}) EXPECT_TRUE(empty.findRule(g)) << g;
    for (const TGD& r : empty.rules) EXPECT_TRUE(r.isDatalog());
    EXPECT_EQ(countPrefix(generateThueProgram(corpusThue("two_hop")), "p1"), 2u);
}

TEST(Thue, ChaseDerivesCIffOracleSolvable) {
    for (const char* name : {"ex", "swap_blocked", "empty", "two_hop", "wrong_target", "cycle"}) {
        const ThueInstance t = corpusThue(name);
        EXPECT_EQ(thueChaseDerivesC(t), thueOracle(t).solvable) << name;
    }
}

TEST(Thue, ArenaAlsoReachesLengthMPlusOne) {
    // The arena holds words up to length M+1, so the chase also sees k = M.
    const ThueInstance t = corpusThue("two_hop_m1");
    EXPECT_FALSE(thueOracle(t).solvable);
    EXPECT_TRUE(thueOracle(t, t.M()).solvable);
    EXPECT_TRUE(thueChaseDerivesC(t));
}

TEST(Thue, NodeWords) {
    const Program p = generateArena1(1, 2);
    const ChaseResult r = runChase(p, arenaSeed(p.signature), config(Variant::Oblivious));
    const Term a = Term::constant("a");
    EXPECT_EQ(nodeWord(r.finalInstance, 2, a, a), "");
    std::set<std::string> words;
    for (Term t : r.finalInstance.adom())
        if (auto w = nodeWord(r.finalInstance, 2, a, t)) words.insert(*w);
    EXPECT_EQ(words.size(), 15u);
    EXPECT_TRUE(words.count("212"));
}

TEST(Thue, ArenaTwoDivergesOnlyWhenSolvable) {
    const ThueDivergence yes = thueArenaChase(corpusThue("ex"), 1500);
    EXPECT_EQ(yes.chase.verdict, Verdict::BudgetExceeded);
    EXPECT_GE(yes.generations, 3u);
    const ThueDivergence no = thueArenaChase(corpusThue("swap_blocked"), 1500);
    EXPECT_EQ(no.chase.verdict, Verdict::Terminated);
    EXPECT_EQ(no.generations, 1u);
}
