#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "chaselab/chase.h"
#include "chaselab/model.h"
#include "chaselab/parser.h"

namespace chaselab {

class ArenaError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// M = 2^m; p = branching arity.
struct ArenaParams {
    unsigned m = 1;
    unsigned p = 1;

    std::uint64_t M() const { return std::uint64_t{1} << m; }
};

/// Default node budget 10^5, overridden by CHASE_LAB_MAX_NODES.
std::uint64_t nodeBudget();
/// (p^(M+2)-1)/(p-1), or M+2 for p = 1; nullopt on overflow.
std::optional<std::uint64_t> arenaNodeCount(const ArenaParams& a);

/// Relations H, K, C0..Cm, R, T. Rules d0, d0p_<i>, e, d1, d2, d3_<i>, d4.
/// Throws ArenaError for m = 0 or a path above the node budget.
Program generateArena0(unsigned m);
/// Every arena0 rule cloned once per assignment of R1..Rp to its R atoms.
/// Clone ids append the chosen indices, e.g. d2_1_2_1.
Program generateArena1(unsigned m, unsigned p);
/// generateArena1 plus dp: E(X,Y) -> H(Y) and ep: C(X) -> exists Z: E(X,Z).
Program generateArena2(unsigned m, unsigned p);

/// {H(a)} over `sig`.
Instance arenaSeed(const Signature& sig, std::string_view root = "a");

/// Shape of the graph spanned by `edgeRelations` from `root`.
struct TreeShape {
    bool tree = false;           // every reachable non-root node has one parent
    bool full = false;           // one child per relation at every inner node, leaves level
    std::size_t nodes = 0;       // nodes reachable from root
    std::size_t depth = 0;       // longest root-to-leaf path in edges
    std::size_t strayEdges = 0;  // edges not between reachable nodes
    std::vector<std::string> problems;
};

TreeShape analyzeTree(const Instance& inst, const std::vector<std::string>& edgeRelations, Term root);

struct LemmaCheck {
    std::string name;
    std::size_t checked = 0;
    std::size_t failures = 0;
    std::vector<std::string> examples;  // first failures as "<fact> expected <bool> at N=<n>"

    bool pass() const { return failures == 0; }
};

/// Checks of the partial chases C_N of arena0(m) on {H(a)}: C_N is the state
/// after N firings of e, each followed by Datalog saturation.
struct AppendixBReport {
    unsigned m = 0;
    std::uint64_t M = 0;
    std::size_t snapshots = 0;  // C_0 .. C_{snapshots-1} exist
    bool pathShape = false;
    /// T-stated, C-bound, K-bound and K-last test the biconditionals as stated;
    /// T-corrected
    /// tests T(a_i,a_j) iff i <= j, 1 <= j and 2j <= i+N.
    std::vector<LemmaCheck> checks;

    const LemmaCheck* find(std::string_view name) const;
    bool statedPass() const;  // the four stated checks and pathShape
};

/// Exhaustive checks of one snapshot. `elements[k]` is a_k.
void checkAppendixBSnapshot(const Instance& cN, const std::vector<Term>& elements, unsigned m, std::size_t N,
                            AppendixBReport& report, std::size_t maxExamples = 10);
AppendixBReport verifyAppendixB(unsigned m, std::size_t maxExamples = 10);

/// Thue process with productions between length-2 words over {1..p}.
struct ThueInstance {
    unsigned p = 2;
    unsigned m = 1;
    std::vector<std::pair<std::string, std::string>> productions;  // e.g. {"12","22"}

    std::uint64_t M() const { return std::uint64_t{1} << m; }
};

/// Throws ArenaError unless 2 <= p <= 9, m >= 1 and every production is a
/// pair of length-2 words over 1..p.
void validateThue(const ThueInstance& t);

/// Header "p=2, m=1" then one "12 -> 22" production per line; "#" comments.
ParseResult<ThueInstance> parseThue(std::string_view text);
std::string printThue(const ThueInstance& t);

struct ThueAnswer {
    bool solvable = false;
    std::uint64_t k = 0;             // smallest k with 1p^k ->* 2p^k
    std::vector<std::string> trace;  // 1p^k, ..., 2p^k
};

/// Breadth-first search over words of length k+1 for k = 0..kMax; kMax
/// defaults to M-1.
ThueAnswer thueOracle(const ThueInstance& t, std::optional<std::uint64_t> kMax = std::nullopt);

/// Datalog rules p1_<n>, p2_<i>, g1..g7 over H, R1..Rp, P, G1, G, G2, C.
Program generateThueProgram(const ThueInstance& t);
/// Arena (arena1, or arena2 when `divergent`) together with the Thue rules.
Program generateThueWithArena(const ThueInstance& t, bool divergent);

/// Chase of arena1 ∪ T on {H(a)}; true iff C(a) is derived.
bool thueChaseDerivesC(const ThueInstance& t, std::size_t maxSteps = 1'000'000);

struct ThueDivergence {
    ChaseResult chase;
    std::size_t generations = 0;  // E-path elements beyond w
};

/// Oblivious chase of arena2 ∪ T on the critical instance with `maxSteps`.
ThueDivergence thueArenaChase(const ThueInstance& t, std::size_t maxSteps);

/// Word of a tree node: labels of the child edges from `root`, or nullopt
/// if the node is not below root.
std::optional<std::string> nodeWord(const Instance& inst, unsigned p, Term root, Term node);

}  // namespace chaselab
