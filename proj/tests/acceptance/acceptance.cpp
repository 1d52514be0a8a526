// Acceptance run: one PASS/FAIL line per criterion.
//
// Exit status is 0 when the failing criteria are exactly the ones listed with
// --expect-fail (default: none), so a known failure stays visible without
// hiding a new one or a fixed one.
#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "chaselab/arena.h"
#include "chaselab/chase.h"
#include "chaselab/critical.h"
#include "chaselab/machines.h"
#include "chaselab/parser.h"
#include "chaselab/translations.h"

namespace fs = std::filesystem;
using namespace chaselab;

namespace {

// Wall-clock limits in seconds and budgets, per criterion.
constexpr double kLimit1 = 5, kLimit2 = 30, kLimit3 = 60, kLimit4 = 10, kLimit5 = 120, kLimit6 = 120,
                 kLimit7 = 300, kLimit8 = 30, kLimit9 = 300;
constexpr std::size_t kOrbitLength = 200;
constexpr std::size_t kLoopBudget = 150;         // T_M of the looping machine
constexpr std::size_t kHaltBudget = 1'000'000;   // T_M of the halting machine
constexpr std::size_t kLemma1Samples = 50;
constexpr std::size_t kLemma1Factor = 10;
constexpr std::size_t kClassifyBudget = 500;     // critical run deciding "terminating corpus program"
constexpr std::size_t kThueDivergenceBudget = 1500;
constexpr std::size_t kMinGenerations = 3;
constexpr std::size_t kPathsStepBudget = 50, kPathsPathBudget = 100'000;
constexpr std::size_t kSplitBudget = 2000;
constexpr std::size_t kSweepBudget = 100;        // for runs that do not terminate
constexpr std::size_t kRandomPrograms = 20;

std::string corpusDir;

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Program loadProgram(const fs::path& p) {
    auto r = parseProgram(slurp(p));
    if (!r.ok()) throw std::runtime_error(p.string() + ": " + r.message());
    return *r.value;
}

std::vector<fs::path> sortedFiles(const std::string& sub) {
    std::vector<fs::path> out;
    for (const auto& e : fs::directory_iterator(fs::path(corpusDir) / sub)) out.push_back(e.path());
    std::sort(out.begin(), out.end());
    return out;
}

struct Outcome {
    bool pass = true;
    std::string detail;

    void require(bool ok, const std::string& what) {
        if (ok) return;
        if (pass) detail = what;
        pass = false;
    }
};

// ---- 1 ---------------------------------------------------------------------
Outcome arenaPath() {
    Outcome o;
    std::ostringstream d;
    for (unsigned m = 1; m <= 4; ++m) {
        const Program p = generateArena0(m);
        ChaseConfig c;
        c.traceLevel = TraceLevel::None;
        const ChaseResult r = runChase(p, arenaSeed(p.signature), c);
        const std::uint64_t M = std::uint64_t{1} << m;
        const TreeShape s = analyzeTree(r.finalInstance, {"R"}, Term::constant("a"));
        const std::size_t rFacts = r.finalInstance.size(*p.signature.find("R"));
        o.require(r.verdict == Verdict::Terminated, "m=" + std::to_string(m) + " did not terminate");
        o.require(s.tree && s.full && s.strayEdges == 0 && s.nodes == M + 2 && s.depth == M + 1 && rFacts == M + 1,
                  "m=" + std::to_string(m) + " nodes=" + std::to_string(s.nodes));
        d << "m=" << m << ":" << s.nodes << " ";
    }
    if (o.pass) o.detail = d.str() + "nodes on the R-path";
    return o;
}

// ---- 2 ---------------------------------------------------------------------
Outcome arena0Snapshots() {
    Outcome o;
    std::ostringstream d;
    bool corrected = true;
    for (unsigned m = 1; m <= 4; ++m) {
        const AppendixBReport r = verifyAppendixB(m);
        o.require(r.pathShape, "m=" + std::to_string(m) + " snapshots not on a path");
        o.require(r.snapshots >= r.M + 1, "m=" + std::to_string(m) + " missing snapshots");
        for (const char* name : {"T-stated", "C-bound", "K-bound", "K-last"}) {
            const LemmaCheck* c = r.find(name);
            if (!c) {
                o.require(false, std::string(name) + " missing");
                continue;
            }
            if (!c->pass() && o.pass)
                d << "m=" << m << " " << name << " fails " << c->failures << "/" << c->checked << ", first "
                  << c->examples.front() << "; ";
            o.require(c->pass(), "");
        }
        const LemmaCheck* fix = r.find("T-corrected");
        corrected = corrected && fix && fix->pass();
    }
    o.detail = o.pass ? "all stated checks hold for m<=4" : d.str();
    o.detail += corrected ? " (T(a_i,a_j) iff i<=j, j>=1, 2j<=i+N holds everywhere)" : " (corrected form fails too)";
    return o;
}

// ---- 3 ---------------------------------------------------------------------
Outcome arenaTrees() {
    Outcome o;
    std::ostringstream d;
    for (auto [m, p] : {std::pair{1u, 2u}, {1u, 3u}, {2u, 2u}}) {
        const Program prog = generateArena1(m, p);
        ChaseConfig c;
        c.traceLevel = TraceLevel::None;
        const ChaseResult r = runChase(prog, arenaSeed(prog.signature), c);
        std::vector<std::string> rels;
        for (unsigned i = 1; i <= p; ++i) rels.push_back("R" + std::to_string(i));
        const TreeShape s = analyzeTree(r.finalInstance, rels, Term::constant("a"));
        const std::uint64_t M = std::uint64_t{1} << m;
        std::uint64_t pow = 1;
        for (std::uint64_t k = 0; k < M + 2; ++k) pow *= p;
        const std::uint64_t want = (pow - 1) / (p - 1);
        const std::string tag = "(" + std::to_string(m) + "," + std::to_string(p) + ")";
        o.require(r.verdict == Verdict::Terminated, tag + " did not terminate");
        o.require(s.tree && s.full && s.depth == M + 1 && s.nodes == want,
                  tag + " nodes=" + std::to_string(s.nodes) + " want " + std::to_string(want));
        d << tag << ":" << s.nodes << " ";
    }
    if (o.pass) o.detail = d.str() + "full trees";
    return o;
}

// ---- 4 ---------------------------------------------------------------------
Outcome conway() {
    Outcome o;
    std::ostringstream d;
    const CounterMachine zooMachines[] = {zoo::immediateHalt(), zoo::upDown(5), zoo::loop1()};
    for (const CounterMachine& m : zooMachines) {
        const ConwayFunction cw(m);
        const SimResult sim = simulate3CM(m, kOrbitLength);
        const std::vector<BigInt> orbit = iterateG(cw, 2, kOrbitLength);
        o.require(orbit.size() == kOrbitLength + 1, m.name() + " orbit length");
        for (std::size_t k = 0; k < orbit.size() && o.pass; ++k) {
            const Configuration& c = k < sim.trajectory.size() ? sim.trajectory[k] : sim.final;
            o.require(orbit[k] == encodeConfig(cw, c), m.name() + " differs at k=" + std::to_string(k));
        }
        if (sim.halted) {
            for (std::size_t k = 1; k < orbit.size(); ++k) {
                const bool constant = orbit[k] == orbit[k - 1];
                o.require(constant == (k > sim.steps), m.name() + " orbit not constant exactly from the halt step");
            }
        }
        d << m.name() << (sim.halted ? " halts@" + std::to_string(sim.steps) : " runs") << " ";
    }
    if (o.pass) o.detail = d.str() + "; orbits equal encoded runs for 200 steps";
    return o;
}

// ---- 5 ---------------------------------------------------------------------
Outcome dichotomy() {
    Outcome o;
    std::ostringstream d;
    {
        const CounterMachine m = zoo::upDownOne();
        const Program p = generateTM(m);
        ChaseConfig c;
        c.maxSteps = kHaltBudget;
        c.traceLevel = TraceLevel::None;
        const ChaseResult r = runChase(p, buildCritical(p.signature), c);
        o.require(r.verdict == Verdict::Terminated, "halting machine exceeded the budget");
        const AppendixAReport rep = verifyAppendixA(r, m);
        o.require(rep.pass, "appendixA on halting machine: " + (rep.violations.empty() ? "" : rep.violations[0]));
        d << m.name() << ": " << verdictName(r.verdict) << " steps=" << r.stepsUsed << " path=" << rep.pathLength
          << " appA=" << (rep.pass ? "pass" : "fail") << "; ";
    }
    {
        const CounterMachine m = zoo::loop1();
        const Program p = generateTM(m);
        ChaseConfig c;
        c.maxSteps = kLoopBudget;
        const ProbeResult probe = allInstancesTerminationProbe(p, c);
        o.require(probe.verdict != ProbeVerdict::TerminatesAllInstances, "looping machine terminated");
        // Each firing of (e) hangs a new element below the previous tip.
        const Term w = Term::constant("w");
        Term tip = w;
        std::set<TermId> seen{w.id()};
        std::size_t grown = 0;
        for (const TraceEntry& e : probe.chase.trace) {
            if (p.rules[e.rule].id() != "e") continue;
            const Fact& f = e.added.front();
            o.require(f.args[1] == tip && seen.insert(f.args[0].id()).second,
                      "E-path not extended at its tip at step " + std::to_string(e.step));
            tip = f.args[0];
            ++grown;
        }
        const AppendixAReport rep = verifyAppendixA(probe.chase, m);
        o.require(grown == kLoopBudget, "E-path grew " + std::to_string(grown) + " times");
        o.require(rep.pass, "appendixA on truncated chase: " + (rep.violations.empty() ? "" : rep.violations[0]));
        d << m.name() << ": " << probeVerdictName(probe.verdict) << " path=" << grown << " appA="
          << (rep.pass ? "pass" : "fail");
    }
    if (o.pass) o.detail = d.str();
    return o;
}

// ---- 6 ---------------------------------------------------------------------
Outcome criticalLifting() {
    Outcome o;
    std::ostringstream d;
    std::size_t programs = 0;
    for (const fs::path& f : sortedFiles("programs")) {
        const Program p = loadProgram(f);
        const Lemma1Report r = lemma1Sample(p, kLemma1Samples, 2024, kLemma1Factor, kClassifyBudget);
        if (r.criticalVerdict != Verdict::Terminated) continue;
        ++programs;
        std::size_t ok = 0;
        for (const Lemma1Sample& s : r.samples) ok += s.pass;
        o.require(r.pass && r.samples.size() == kLemma1Samples,
                  f.stem().string() + " " + std::to_string(ok) + "/" + std::to_string(r.samples.size()));
        d << f.stem().string() << " ";
    }
    o.require(programs >= 5, "only " + std::to_string(programs) + " terminating programs");
    if (o.pass) o.detail = "50/50 lifted with equal depth for " + d.str();
    return o;
}

// ---- 7 ---------------------------------------------------------------------
Outcome thue() {
    Outcome o;
    std::ostringstream d;
    std::size_t solvable = 0, unsolvable = 0;
    for (const char* name : {"ex", "swap_blocked", "empty", "two_hop", "wrong_target", "cycle"}) {
        auto parsed = parseThue(slurp(fs::path(corpusDir) / "thue" / (std::string(name) + ".thue")));
        if (!parsed.ok()) throw std::runtime_error(parsed.message());
        const ThueInstance t = *parsed.value;
        o.require(t.p <= 2 && t.m <= 2, std::string(name) + " outside p<=2, m<=2");
        const ThueAnswer a = thueOracle(t);
        const bool c = thueChaseDerivesC(t);
        o.require(c == a.solvable, std::string(name) + ": oracle " + (a.solvable ? "yes" : "no") + ", chase " +
                                       (c ? "yes" : "no"));
        const ThueDivergence dv = thueArenaChase(t, kThueDivergenceBudget);
        const bool diverges = dv.chase.verdict == Verdict::BudgetExceeded && dv.generations >= kMinGenerations;
        o.require(diverges == a.solvable, std::string(name) + ": generations " + std::to_string(dv.generations) +
                                              " verdict " + verdictName(dv.chase.verdict));
        (a.solvable ? solvable : unsolvable) += 1;
        d << name << (a.solvable ? "+" : "-") << dv.generations << " ";
    }
    o.require(solvable > 0 && unsolvable > 0 && solvable + unsolvable >= 4, "instance mix");
    if (o.pass) o.detail = d.str() + "(+/- solvable, arena generations)";
    return o;
}

// ---- 8 ---------------------------------------------------------------------
Outcome multiHead() {
    Outcome o;
    const Program t = loadProgram(fs::path(corpusDir) / "programs" / "appd_t.dlge");
    const Program tp = singleHeadTranslate(t).translated;
    o.require(tp == loadProgram(fs::path(corpusDir) / "programs" / "appd_tprime.dlge"), "translation differs from T'");
    auto seed = [](const Program& p) { return *parseInstance("E(a,b).", p.signature).value; };
    const PathsResult a = enumerateStandardPaths(t, seed(t), kPathsStepBudget, kPathsPathBudget);
    const PathsResult b = enumerateStandardPaths(tp, seed(tp), kPathsStepBudget, kPathsPathBudget);
    o.require(a.verdict == PathsVerdict::AllTerminate, std::string("T: ") + pathsVerdictName(a.verdict));
    o.require(b.verdict == PathsVerdict::FoundDivergentPrefix, std::string("T': ") + pathsVerdictName(b.verdict));

    const Program split = splitRelation(loadProgram(fs::path(corpusDir) / "programs" / "ternary.dlge"), "T");
    const Instance path = *parseInstance(slurp(fs::path(corpusDir) / "instances" / "path5.inst"), split.signature).value;
    ChaseConfig ob;
    ob.maxSteps = kSplitBudget;
    ob.traceLevel = TraceLevel::None;
    ChaseConfig so = ob;
    so.variant = Variant::SemiOblivious;
    const ChaseResult ro = runChase(split, path, ob);
    const ChaseResult rs = runChase(split, path, so);
    o.require(ro.verdict == Verdict::BudgetExceeded, "split Oblivious terminated");
    o.require(rs.verdict == Verdict::Terminated, "split SemiOblivious exceeded the budget");
    if (o.pass) {
        std::ostringstream d;
        d << "T " << pathsVerdictName(a.verdict) << " (" << a.pathsExplored << " paths), T' "
          << pathsVerdictName(b.verdict) << "; split: Oblivious " << verdictName(ro.verdict) << " depth "
          << ro.maxTermDepth << ", SemiOblivious " << verdictName(rs.verdict) << " in " << rs.stepsUsed << " steps";
        o.detail = d.str();
    }
    return o;
}

// ---- 9 ---------------------------------------------------------------------
std::string randomProgramText(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
    const int relCount = pick(1, 3);
    std::vector<int> arity;
    std::string text = "@signature ";
    for (int r = 0; r < relCount; ++r) {
        arity.push_back(pick(1, 2));
        text += (r ? ", R" : "R") + std::to_string(r) + "/" + std::to_string(arity.back());
    }
    text += ".\n";
    const int ruleCount = pick(1, 4);
    for (int i = 0; i < ruleCount; ++i) {
        std::vector<std::string> vars;
        auto atoms = [&](bool head, bool& usesY) {
            std::string s;
            const int n = pick(1, 2);
            for (int a = 0; a < n; ++a) {
                const int r = pick(0, relCount - 1);
                s += (a ? ", R" : "R") + std::to_string(r) + "(";
                for (int c = 0; c < arity[r]; ++c) {
                    std::string v;
                    if (!head) {
                        v = "X" + std::to_string(pick(0, 2));
                        vars.push_back(v);
                    } else if (pick(0, 3) == 0) {
                        v = "Y";
                        usesY = true;
                    } else {
                        v = vars[pick(0, static_cast<int>(vars.size()) - 1)];
                    }
                    s += (c ? "," : "") + v;
                }
                s += ")";
            }
            return s;
        };
        bool usesY = false;
        const std::string body = atoms(false, usesY);
        const std::string head = atoms(true, usesY);
        text += "[q" + std::to_string(i) + "] " + body + " -> " + (usesY ? "exists Y: " : "") + head + ".\n";
    }
    return text;
}

Outcome engineLaws() {
    Outcome o;
    std::size_t compared = 0, models = 0;
    for (const fs::path& f : sortedFiles("programs")) {
        const Program p = loadProgram(f);
        std::vector<std::pair<std::string, Instance>> inputs{{"critical", buildCritical(p.signature)}};
        for (const fs::path& i : sortedFiles("instances")) {
            auto r = parseInstance(slurp(i), p.signature);
            if (r.ok()) inputs.emplace_back(i.stem().string(), *r.value);
        }
        for (const auto& [iname, d] : inputs) {
            for (Variant v : {Variant::Oblivious, Variant::SemiOblivious}) {
                const std::string tag = f.stem().string() + "/" + iname + "/" + variantName(v);
                ChaseConfig probe;
                probe.variant = v;
                probe.maxSteps = kClassifyBudget;
                probe.traceLevel = TraceLevel::None;
                const bool terminates = runChase(p, d, probe).verdict == Verdict::Terminated;
                std::optional<Instance> first;
                std::size_t k = 0;
                for (Strategy s : {Strategy::FIFO, Strategy::LIFO, Strategy::Random, Strategy::Random}) {
                    ChaseConfig c = probe;
                    c.strategy = s;
                    c.seed = ++k;
                    c.maxSteps = terminates ? kClassifyBudget : kSweepBudget;
                    const ChaseResult r = runChase(p, d, c);
                    o.require((r.verdict == Verdict::Terminated) == terminates, tag + " verdict depends on order");
                    if (!terminates) continue;
                    o.require(checkIsModel(p, r.finalInstance), tag + " result is not a model");
                    ++models;
                    if (!first) first = r.finalInstance;
                    else o.require(first->sameFacts(r.finalInstance), tag + " facts depend on order");
                }
                compared += terminates;
            }
        }
    }
    std::size_t embedded = 0;
    for (std::uint64_t seed = 1; embedded < kRandomPrograms && seed < 5000; ++seed) {
        const Program p = *parseProgram(randomProgramText(seed)).value;
        const Instance d = randomInstance(p.signature, seed, 3, 4);
        ChaseConfig oc;
        oc.maxSteps = 500;
        oc.traceLevel = TraceLevel::None;
        const ChaseResult ob = runChase(p, d, oc);
        if (ob.verdict != Verdict::Terminated || ob.finalInstance.size() > 60) continue;
        for (std::uint64_t s = 0; s < 3; ++s) {
            ChaseConfig sc = oc;
            sc.variant = Variant::Standard;
            sc.strategy = s == 0 ? Strategy::FIFO : Strategy::Random;
            sc.seed = s;
            const ChaseResult st = runChase(p, d, sc);
            o.require(st.verdict == Verdict::Terminated, "Standard exceeded the budget, seed " + std::to_string(seed));
            o.require(checkIsModel(p, st.finalInstance), "Standard result is not a model");
            o.require(findHomomorphism(st.finalInstance, ob.finalInstance).has_value(),
                      "no homomorphism into the Oblivious result, seed " + std::to_string(seed));
        }
        ++embedded;
    }
    o.require(embedded == kRandomPrograms, "only " + std::to_string(embedded) + " random programs");
    if (o.pass)
        o.detail = std::to_string(compared) + " terminating runs order-independent, " + std::to_string(models) +
                   " models; " + std::to_string(embedded) + " random programs embed";
    return o;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"acceptance criteria"};
    std::vector<int> expectFail, only;
    corpusDir = CHASELAB_CORPUS_DIR;
    app.add_option("--expect-fail", expectFail, "criteria known to fail");
    app.add_option("--only", only, "run only these criteria");
    app.add_option("--corpus", corpusDir, "corpus directory");
    CLI11_PARSE(app, argc, argv);

    struct Criterion {
        int id;
        const char* name;
        double limit;
        std::function<Outcome()> run;
    };
    const std::vector<Criterion> criteria = {
        {1, "arena0-path", kLimit1, arenaPath},  {2, "arena0-snapshots", kLimit2, arena0Snapshots},
        {3, "arena-trees", kLimit3, arenaTrees},    {4, "conway-oracle", kLimit4, conway},
        {5, "tm-dichotomy", kLimit5, dichotomy}, {6, "critical-lifting", kLimit6, criticalLifting},
        {7, "thue-encoding", kLimit7, thue},         {8, "multihead-contrast", kLimit8, multiHead},
        {9, "engine-laws", kLimit9, engineLaws},
    };
    std::set<int> failed;
    for (const Criterion& c : criteria) {
        if (!only.empty() && std::find(only.begin(), only.end(), c.id) == only.end()) continue;
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail = std::string("exception: ") + e.what();
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (secs > c.limit) {
            o.pass = false;
            o.detail = "took " + std::to_string(secs) + "s, limit " + std::to_string(c.limit) + "s; " + o.detail;
        }
        if (!o.pass) failed.insert(c.id);
        std::printf("%d %s %s %.2fs %s\n", c.id, o.pass ? "PASS" : "FAIL", c.name, secs, o.detail.c_str());
        std::fflush(stdout);
    }
    std::set<int> expected;
    for (int id : expectFail)
        if (only.empty() || std::find(only.begin(), only.end(), id) != only.end()) expected.insert(id);
    if (failed != expected) {
        std::printf("unexpected outcome: %zu failing, %zu expected to fail\n", failed.size(), expected.size());
        return 1;
    }
    return 0;
}
