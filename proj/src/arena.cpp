#include "chaselab/arena.h"

#include <algorithm>
#include <cstdlib>
#include <deque>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <unordered_map>

#include "chaselab/critical.h"

namespace chaselab {

namespace {

struct RuleTemplate {
    std::string id;
    std::vector<NamedAtom> body;
    std::vector<NamedAtom> head;
    std::vector<std::string> existentials;
};

std::string cName(unsigned i) { return "C" + std::to_string(i); }
std::string rName(unsigned i) { return "R" + std::to_string(i); }

std::vector<RuleTemplate> arena0Rules(unsigned m) {
    std::vector<RuleTemplate> rules;
    rules.push_back({"d0", {{"H", {"X"}}}, {{"K", {"X"}}}, {}});
    for (unsigned i = 0; i <= m; ++i)
        rules.push_back({"d0p_" + std::to_string(i), {{"H", {"X"}}}, {{cName(i), {"X"}}}, {}});
    rules.push_back({"e", {{"K", {"X"}}}, {{"R", {"X", "Y"}}}, {"Y"}});
    rules.push_back({"d1", {{"R", {"X", "Y"}}}, {{"T", {"Y", "Y"}}}, {}});
    rules.push_back({"d2",
                     {{"T", {"X", "Y"}}, {"R", {"X1", "Z"}}, {"R", {"Z", "X"}}, {"R", {"Y1", "Y"}}},
                     {{"T", {"X1", "Y1"}}},
                     {}});
    for (unsigned i = 0; i < m; ++i)
        rules.push_back({"d3_" + std::to_string(i),
                         {{"T", {"X", "Y"}}, {cName(i), {"X"}}},
                         {{cName(i + 1), {"Y"}}},
                         {}});
    rules.push_back({"d4", {{"R", {"X", "Y"}}, {cName(m), {"X"}}}, {{"K", {"Y"}}}, {}});
    return rules;
}

void declareArena(ProgramBuilder& b, unsigned m, unsigned p) {
    b.relation("H", 1);
    b.relation("K", 1);
    for (unsigned i = 0; i <= m; ++i) b.relation(cName(i), 1);
    if (p == 0) {
        b.relation("R", 2);
    } else {
        for (unsigned i = 1; i <= p; ++i) b.relation(rName(i), 2);
    }
    b.relation("T", 2);
}

// Every assignment of R1..Rp to the R atoms of `r`.
void cloneRule(ProgramBuilder& b, const RuleTemplate& r, unsigned p) {
    std::vector<NamedAtom*> slots;
    RuleTemplate copy = r;
    for (auto* atoms : {&copy.body, &copy.head})
        for (NamedAtom& a : *atoms)
            if (a.relation == "R") slots.push_back(&a);
    if (slots.empty()) {
        b.rule(copy.id, copy.body, copy.head, copy.existentials);
        return;
    }
    std::vector<unsigned> choice(slots.size(), 1);
    while (true) {
        std::string id = r.id;
        for (std::size_t k = 0; k < slots.size(); ++k) {
            slots[k]->relation = rName(choice[k]);
            id += "_" + std::to_string(choice[k]);
        }
        b.rule(id, copy.body, copy.head, copy.existentials);
        std::size_t k = slots.size();
        while (k > 0 && choice[k - 1] == p) choice[--k] = 1;
        if (k == 0) break;
        ++choice[k - 1];
    }
}

void checkBudget(const ArenaParams& a) {
    if (a.m == 0) throw ArenaError("m must be at least 1");
    if (a.m >= 32) throw ArenaError("m = " + std::to_string(a.m) + " is too large");
    if (a.p == 0) throw ArenaError("p must be at least 1");
    const auto n = arenaNodeCount(a);
    const std::uint64_t budget = nodeBudget();
    if (!n || *n > budget)
        throw ArenaError("arena for m=" + std::to_string(a.m) + ", p=" + std::to_string(a.p) + " has " +
                         (n ? std::to_string(*n) : std::string("too many")) + " nodes, above the budget " +
                         std::to_string(budget) + " (CHASE_LAB_MAX_NODES)");
}

}  // namespace

std::uint64_t nodeBudget() {
    const char* env = std::getenv("CHASE_LAB_MAX_NODES");
    if (!env || !*env) return 100'000;
    char* end = nullptr;
    const unsigned long long v = std::strtoull(env, &end, 10);
    if (*end != '\0' || v == 0) throw ArenaError(std::string("bad CHASE_LAB_MAX_NODES value: ") + env);
    return v;
}

std::optional<std::uint64_t> arenaNodeCount(const ArenaParams& a) {
    if (a.m >= 63) return std::nullopt;
    const std::uint64_t levels = a.M() + 2;
    if (a.p <= 1) return levels;
    std::uint64_t total = 0, level = 1;
    for (std::uint64_t d = 0; d < levels; ++d) {
        if (total > UINT64_MAX - level) return std::nullopt;
        total += level;
        if (d + 1 < levels) {
            if (level > UINT64_MAX / a.p) return std::nullopt;
            level *= a.p;
        }
    }
    return total;
}

Program generateArena0(unsigned m) {
    checkBudget({m, 1});
    ProgramBuilder b;
    declareArena(b, m, 0);
    for (const RuleTemplate& r : arena0Rules(m)) b.rule(r.id, r.body, r.head, r.existentials);
    return std::move(b).build();
}

Program generateArena1(unsigned m, unsigned p) {
    checkBudget({m, p});
    ProgramBuilder b;
    declareArena(b, m, p);
    for (const RuleTemplate& r : arena0Rules(m)) cloneRule(b, r, p);
    return std::move(b).build();
}

Program generateArena2(unsigned m, unsigned p) {
    checkBudget({m, p});
    ProgramBuilder b;
    declareArena(b, m, p);
    b.relation("E", 2);
    b.relation("C", 1);
    for (const RuleTemplate& r : arena0Rules(m)) cloneRule(b, r, p);
    b.rule("dp", {{"E", {"X", "Y"}}}, {{"H", {"Y"}}});
    b.rule("ep", {{"C", {"X"}}}, {{"E", {"X", "Z"}}}, {"Z"});
    return std::move(b).build();
}

Instance arenaSeed(const Signature& sig, std::string_view root) {
    Instance inst(sig);
    auto h = sig.find("H");
    if (!h) throw ArenaError("signature has no relation H");
    const Term a = Term::constant(root);
    inst.insert(*h, std::span<const Term>(&a, 1));
    return inst;
}

TreeShape analyzeTree(const Instance& inst, const std::vector<std::string>& edgeRelations, Term root) {
    TreeShape s;
    const Signature& sig = inst.signature();
    // children[node][label] = targets
    std::unordered_map<TermId, std::vector<std::vector<TermId>>> children;
    std::unordered_map<TermId, std::size_t> parents;
    std::vector<std::pair<TermId, TermId>> edges;
    for (std::size_t l = 0; l < edgeRelations.size(); ++l) {
        auto rel = sig.find(edgeRelations[l]);
        if (!rel) continue;
        const RelationTable& t = inst.table(*rel);
        for (RowId r = 0; r < t.size(); ++r) {
            const TermId a = t.row(r)[0], b = t.row(r)[1];
            auto& slots = children[a];
            slots.resize(edgeRelations.size());
            slots[l].push_back(b);
            ++parents[b];
            edges.emplace_back(a, b);
        }
    }
    s.tree = true;
    s.full = true;
    auto problem = [&](std::string msg, bool breaksTree) {
        if (breaksTree) s.tree = false;
        s.full = false;
        if (s.problems.size() < 20) s.problems.push_back(std::move(msg));
    };
    if (parents.count(root.id())) problem("root " + root.str() + " has a parent", true);

    std::unordered_map<TermId, std::size_t> depth{{root.id(), 0}};
    std::deque<TermId> queue{root.id()};
    std::set<std::size_t> leafDepths;
    while (!queue.empty()) {
        const TermId x = queue.front();
        queue.pop_front();
        const std::string xs = Term::fromId(x).str();
        auto it = children.find(x);
        if (it == children.end()) {
            leafDepths.insert(depth[x]);
            continue;
        }
        for (std::size_t l = 0; l < it->second.size(); ++l) {
            const auto& targets = it->second[l];
            if (targets.size() != 1)
                problem(xs + " has " + std::to_string(targets.size()) + " " + edgeRelations[l] + "-children",
                        targets.size() > 1);
            for (TermId y : targets) {
                if (depth.count(y)) {
                    problem("node " + Term::fromId(y).str() + " reached twice", true);
                    continue;
                }
                if (parents[y] != 1) problem(Term::fromId(y).str() + " has several parents", true);
                depth[y] = depth[x] + 1;
                s.depth = std::max(s.depth, depth[y]);
                queue.push_back(y);
            }
        }
    }
    s.nodes = depth.size();
    for (auto [a, b] : edges)
        if (!depth.count(a) || !depth.count(b)) ++s.strayEdges;
    if (s.strayEdges) problem(std::to_string(s.strayEdges) + " edges outside the tree", true);
    if (leafDepths.size() > 1) problem("leaves at several depths", false);
    return s;
}

const LemmaCheck* AppendixBReport::find(std::string_view name) const {
    for (const LemmaCheck& c : checks)
        if (c.name == name) return &c;
    return nullptr;
}

bool AppendixBReport::statedPass() const {
    for (const char* n : {"T-stated", "C-bound", "K-bound", "K-last"}) {
        const LemmaCheck* c = find(n);
        if (!c || !c->pass()) return false;
    }
    return pathShape;
}

void checkAppendixBSnapshot(const Instance& cN, const std::vector<Term>& elements, unsigned m, std::size_t N,
                            AppendixBReport& report, std::size_t maxExamples) {
    auto check = [&](std::string_view name) -> LemmaCheck& {
        for (LemmaCheck& c : report.checks)
            if (c.name == name) return c;
        report.checks.push_back({std::string(name), 0, 0, {}});
        return report.checks.back();
    };
    const Signature& sig = cN.signature();
    auto holds = [&](const std::string& rel, std::initializer_list<Term> args) {
        auto id = sig.find(rel);
        if (!id) return false;
        std::vector<TermId> ids;
        for (Term t : args) ids.push_back(t.id());
        return cN.contains(*id, ids);
    };
    auto record = [&](LemmaCheck& c, bool actual, bool expected, const std::string& fact) {
        ++c.checked;
        if (actual == expected) return;
        ++c.failures;
        if (c.examples.size() < maxExamples)
            c.examples.push_back(fact + " expected " + (expected ? "true" : "false") + " at N=" + std::to_string(N));
    };
    const auto n = static_cast<std::int64_t>(N);
    auto aName = [](std::size_t k) { return "a_" + std::to_string(k); };

    for (std::size_t i = 0; i <= N; ++i) {
        for (std::size_t j = 0; j <= N; ++j) {
            const bool t = holds("T", {elements[i], elements[j]});
            const auto si = static_cast<std::int64_t>(i), sj = static_cast<std::int64_t>(j);
            const std::string f = "T(" + aName(i) + "," + aName(j) + ")";
            record(check("T-stated"), t, si + n <= 2 * sj, f);
            record(check("T-corrected"), t, si <= sj && sj >= 1 && 2 * sj <= si + n, f);
        }
    }
    for (unsigned i = 1; i <= m; ++i) {
        const std::int64_t den = std::int64_t{1} << i;
        for (std::size_t j = 0; j <= N; ++j) {
            const bool c = holds(cName(i), {elements[j]});
            record(check("C-bound"), c, static_cast<std::int64_t>(j) * den <= n * (den - 1),
                   cName(i) + "(" + aName(j) + ")");
        }
    }
    const std::int64_t bigM = std::int64_t{1} << m;
    for (std::size_t j = 0; j <= N; ++j) {
        const bool k = holds("K", {elements[j]});
        record(check("K-bound"), k, (static_cast<std::int64_t>(j) - 1) * bigM <= n * (bigM - 1),
               "K(" + aName(j) + ")");
    }
    record(check("K-last"), holds("K", {elements[N]}), n <= bigM, "K(" + aName(N) + ")");
}

AppendixBReport verifyAppendixB(unsigned m, std::size_t maxExamples) {
    AppendixBReport rep;
    rep.m = m;
    rep.M = std::uint64_t{1} << m;
    for (const char* n : {"T-stated", "C-bound", "K-bound", "K-last", "T-corrected"})
        rep.checks.push_back({n, 0, 0, {}});
    const Program p = generateArena0(m);
    ChaseConfig cfg;
    cfg.variant = Variant::Oblivious;
    cfg.traceLevel = TraceLevel::None;
    cfg.maxDepth.reset();
    ChaseRun run(p, arenaSeed(p.signature), cfg);
    const RelId r = *p.signature.find("R");
    std::vector<Term> elements{Term::constant("a")};
    run.saturate();
    checkAppendixBSnapshot(run.instance(), elements, m, 0, rep, maxExamples);
    while (auto t = run.nextTrigger()) {
        run.fire(*t);
        run.saturate();
        std::optional<Term> next;
        const RelationTable& rt = run.instance().table(r);
        for (RowId row = 0; row < rt.size(); ++row)
            if (rt.row(row)[0] == elements.back().id()) next = Term::fromId(rt.row(row)[1]);
        if (!next) break;  // the firing did not extend the path; pathShape below reports it
        elements.push_back(*next);
        checkAppendixBSnapshot(run.instance(), elements, m, elements.size() - 1, rep, maxExamples);
    }
    rep.snapshots = elements.size();
    const TreeShape shape = analyzeTree(run.instance(), {"R"}, elements.front());
    rep.pathShape = shape.tree && shape.nodes == rep.M + 2 && shape.depth == rep.M + 1 &&
                    run.instance().adom().size() == rep.M + 2 && elements.size() == rep.M + 2;
    return rep;
}

void validateThue(const ThueInstance& t) {
    if (t.p < 2 || t.p > 9) throw ArenaError("alphabet size must be between 2 and 9");
    if (t.m < 1 || t.m >= 32) throw ArenaError("m must be between 1 and 31");
    for (const auto& [l, r] : t.productions) {
        for (const std::string& w : {l, r}) {
            if (w.size() != 2) throw ArenaError("production word '" + w + "' does not have length 2");
            for (char c : w)
                if (c < '1' || c > static_cast<char>('0' + t.p))
                    throw ArenaError("production word '" + w + "' uses a letter outside 1.." + std::to_string(t.p));
        }
    }
}

ParseResult<ThueInstance> parseThue(std::string_view text) {
    ParseResult<ThueInstance> res;
    ThueInstance t;
    bool header = false;
    std::istringstream in{std::string(text)};
    std::string line;
    int lineNo = 0;
    auto fail = [&](const std::string& msg) {
        res.diagnostics.push_back({"", msg, lineNo, 1});
        return res;
    };
    while (std::getline(in, line)) {
        ++lineNo;
        if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
        line.erase(std::remove_if(line.begin(), line.end(), [](unsigned char c) { return std::isspace(c); }),
                   line.end());
        if (line.empty()) continue;
        if (!header) {
            bool seenP = false, seenM = false;
            std::istringstream fields(line);
            for (std::string f; std::getline(fields, f, ',');) {
                const auto eq = f.find('=');
                if (eq == std::string::npos) return fail("expected header p=<n>, m=<n>");
                const std::string key = f.substr(0, eq), val = f.substr(eq + 1);
                if (val.empty() || !std::all_of(val.begin(), val.end(), ::isdigit) || val.size() > 6)
                    return fail("bad value for " + key);
                const unsigned v = static_cast<unsigned>(std::stoul(val));
                if (key == "p") {
                    t.p = v;
                    seenP = true;
                } else if (key == "m") {
                    t.m = v;
                    seenM = true;
                } else {
                    return fail("unknown header field " + key);
                }
            }
            if (!seenP || !seenM) return fail("header needs both p and m");
            header = true;
            continue;
        }
        const auto arrow = line.find("->");
        if (arrow == std::string::npos) return fail("expected production like 12 -> 22");
        t.productions.emplace_back(line.substr(0, arrow), line.substr(arrow + 2));
    }
    if (!header) return fail("missing header p=<n>, m=<n>");
    try {
        validateThue(t);
    } catch (const ArenaError& e) {
        return fail(e.what());
    }
    res.value = std::move(t);
    return res;
}

std::string printThue(const ThueInstance& t) {
    std::string out = "p=" + std::to_string(t.p) + ", m=" + std::to_string(t.m) + "\n";
    for (const auto& [l, r] : t.productions) out += l + " -> " + r + "\n";
    return out;
}

ThueAnswer thueOracle(const ThueInstance& t, std::optional<std::uint64_t> kMax) {
    validateThue(t);
    const std::uint64_t last = kMax.value_or(t.M() - 1);
    const char pc = static_cast<char>('0' + t.p);
    for (std::uint64_t k = 0; k <= last; ++k) {
        const std::string start = "1" + std::string(k, pc);
        const std::string goal = "2" + std::string(k, pc);
        std::map<std::string, std::string> parent{{start, ""}};
        std::deque<std::string> queue{start};
        bool found = start == goal;
        while (!queue.empty() && !found) {
            const std::string w = queue.front();
            queue.pop_front();
            for (std::size_t pos = 0; pos + 1 < w.size() && !found; ++pos) {
                for (const auto& [l, r] : t.productions) {
                    if (w.compare(pos, 2, l) != 0) continue;
                    std::string v = w;
                    v.replace(pos, 2, r);
                    if (!parent.emplace(v, w).second) continue;
                    if (v == goal) {
                        found = true;
                        break;
                    }
                    queue.push_back(v);
                }
            }
        }
        if (!found) continue;
        ThueAnswer ans;
        ans.solvable = true;
        ans.k = k;
        for (std::string w = goal; !w.empty(); w = parent[w]) ans.trace.push_back(w);
        std::reverse(ans.trace.begin(), ans.trace.end());
        return ans;
    }
    return {};
}

Program generateThueProgram(const ThueInstance& t) {
    validateThue(t);
    ProgramBuilder b;
    b.relation("H", 1);
    for (unsigned i = 1; i <= t.p; ++i) b.relation(rName(i), 2);
    b.relation("P", 2);
    b.relation("G1", 1);
    b.relation("G", 1);
    b.relation("G2", 1);
    b.relation("C", 1);
    auto letter = [](char c) { return rName(static_cast<unsigned>(c - '0')); };
    for (std::size_t n = 0; n < t.productions.size(); ++n) {
        const auto& [l, r] = t.productions[n];
        b.rule("p1_" + std::to_string(n + 1),
               {{letter(l[0]), {"X", "Y"}}, {letter(l[1]), {"Y", "Y1"}}, {letter(r[0]), {"X", "Z"}},
                {letter(r[1]), {"Z", "Z1"}}},
               {{"P", {"Y1", "Z1"}}});
    }
    for (unsigned i = 1; i <= t.p; ++i)
        b.rule("p2_" + std::to_string(i), {{"P", {"X", "Y"}}, {rName(i), {"X", "X1"}}, {rName(i), {"Y", "Y1"}}},
               {{"P", {"X1", "Y1"}}});
    const std::string rp = rName(t.p);
    b.rule("g1", {{"H", {"X"}}, {"R1", {"X", "Y"}}}, {{"G1", {"Y"}}});
    b.rule("g2", {{"G1", {"Y"}}, {rp, {"Y", "Y1"}}}, {{"G1", {"Y1"}}});
    b.rule("g3", {{"G1", {"X"}}}, {{"G", {"X"}}});
    b.rule("g4", {{"G", {"Y"}}, {"P", {"Y", "Y1"}}}, {{"G", {"Y1"}}});
    b.rule("g5", {{"G", {"Y"}}}, {{"G2", {"Y"}}});
    b.rule("g6", {{"G2", {"Y"}}, {rp, {"Y1", "Y"}}}, {{"G2", {"Y1"}}});
    b.rule("g7", {{"H", {"X"}}, {"R2", {"X", "Y"}}, {"G2", {"Y"}}}, {{"C", {"X"}}});
    return std::move(b).build();
}

Program generateThueWithArena(const ThueInstance& t, bool divergent) {
    validateThue(t);
    const Program arena = divergent ? generateArena2(t.m, t.p) : generateArena1(t.m, t.p);
    return unionPrograms(arena, generateThueProgram(t));
}

bool thueChaseDerivesC(const ThueInstance& t, std::size_t maxSteps) {
    const Program p = generateThueWithArena(t, false);
    ChaseConfig cfg;
    cfg.variant = Variant::Oblivious;
    cfg.maxSteps = maxSteps;
    cfg.traceLevel = TraceLevel::None;
    const ChaseResult res = runChase(p, arenaSeed(p.signature), cfg);
    if (res.verdict != Verdict::Terminated) throw ArenaError("arena chase exceeded its budget");
    const Term a = Term::constant("a");
    return res.finalInstance.contains(*p.signature.find("C"), std::span<const TermId>(std::vector<TermId>{a.id()}));
}

ThueDivergence thueArenaChase(const ThueInstance& t, std::size_t maxSteps) {
    const Program p = generateThueWithArena(t, true);
    ChaseConfig cfg;
    cfg.variant = Variant::Oblivious;
    cfg.maxSteps = maxSteps;
    cfg.traceLevel = TraceLevel::None;
    ThueDivergence out;
    out.chase = runChase(p, buildCritical(p.signature), cfg);
    const RelationTable& e = out.chase.finalInstance.table(*p.signature.find("E"));
    const TermId w = Term::constant(kWellConstant).id();
    std::set<TermId> targets;
    for (RowId r = 0; r < e.size(); ++r)
        if (e.row(r)[1] != w) targets.insert(e.row(r)[1]);
    out.generations = targets.size();
    return out;
}

std::optional<std::string> nodeWord(const Instance& inst, unsigned p, Term root, Term node) {
    std::unordered_map<TermId, std::pair<TermId, unsigned>> parent;
    for (unsigned i = 1; i <= p; ++i) {
        auto rel = inst.signature().find(rName(i));
        if (!rel) continue;
        const RelationTable& t = inst.table(*rel);
        for (RowId r = 0; r < t.size(); ++r) parent.emplace(t.row(r)[1], std::pair{t.row(r)[0], i});
    }
    std::string word;
    TermId cur = node.id();
    std::size_t guard = 0;
    while (cur != root.id()) {
        auto it = parent.find(cur);
        if (it == parent.end() || ++guard > parent.size()) return std::nullopt;
        word += static_cast<char>('0' + it->second.second);
        cur = it->second.first;
    }
    std::reverse(word.begin(), word.end());
    return word;
}

}  // namespace chaselab
