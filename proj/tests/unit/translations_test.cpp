#include "chaselab/critical.h"
#include "chaselab/machines.h"
#include "chaselab/translations.h"
#include "util.h"

using namespace chaselab;
using testutil::config;
using testutil::corpus;
using testutil::corpusProgram;
using testutil::instance;
using testutil::program;
using testutil::slurp;

TEST(SingleHead, HeadAtomProgram) {
    const TranslationReport r = singleHeadTranslate(corpusProgram("appd_t"));
    EXPECT_EQ(r.translated, corpusProgram("appd_tprime"));
    EXPECT_EQ(r.freshRelations, std::vector<std::string>{"Head_t"});
    EXPECT_FALSE(r.notes.empty());
    for (const TGD& rule : r.translated.rules) EXPECT_TRUE(rule.isSingleHead());
}

TEST(SingleHead, SingleHeadProgramsUnchanged) {
    const Program tm = generateTM(zoo::immediateHalt());
    const TranslationReport r = singleHeadTranslate(tm);
    EXPECT_EQ(r.translated, tm);
    EXPECT_TRUE(r.freshRelations.empty());
}

TEST(SingleHead, ThreeAtomHead) {
    const Program p = program("[r] A(X) -> exists Y: B(X,Y), C(Y), D(X).");
    const TranslationReport r = singleHeadTranslate(p);
    ASSERT_EQ(r.translated.rules.size(), 4u);
    EXPECT_EQ(printRule(r.translated.rules[0], r.translated.signature), "[r] A(X) -> exists Y: Head_r(X,Y).");
    EXPECT_EQ(printRule(r.translated.rules[3], r.translated.signature), "[r_3] Head_r(X,Y) -> D(X).");
    EXPECT_EQ(r.translated.signature[*r.translated.signature.find("Head_r")].arity, 2u);
}

TEST(SingleHead, FreshNameAvoidsClash) {
    const Program p = program("@signature Head_r/1.\n[r] A(X) -> B(X), C(X).");
    const TranslationReport r = singleHeadTranslate(p);
    EXPECT_EQ(r.freshRelations, std::vector<std::string>{"Head_r_1"});
}

TEST(SingleHead, FactsPreservedOnTerminatingChases) {
    for (const char* text : {"[r] A(X) -> exists Y: B(X,Y), C(Y).\n[s] C(Y) -> D(Y).",
                             "[r] E(X,Y) -> exists Z: F(Y,Z), F(Z,X).\n[s] F(X,Y), F(Y,Z) -> G(X,Z)."}) {
        const Program p = program(text);
        const Program t = singleHeadTranslate(p).translated;
        for (std::uint64_t seed = 0; seed < 10; ++seed) {
            const Instance d = randomInstance(p.signature, seed, 3, 5);
            const ChaseResult a = runChase(p, d, config(Variant::Oblivious));
            const ChaseResult b = runChase(t, d.withSignature(t.signature), config(Variant::Oblivious));
            ASSERT_EQ(a.verdict, Verdict::Terminated);
            ASSERT_EQ(b.verdict, Verdict::Terminated);
            Instance restricted(p.signature);
            for (const Fact& f : b.finalInstance.facts())
                if (p.signature.find(b.finalInstance.signature()[f.rel].name))
                    restricted.insertForeign(f, b.finalInstance.signature());
            EXPECT_TRUE(findHomomorphism(a.finalInstance, restricted).has_value());
            EXPECT_TRUE(findHomomorphism(restricted, a.finalInstance).has_value());
        }
    }
}

TEST(TernarySplit, RuleForm) {
    Program p = corpusProgram("ternary");
    const TGD split = ternarySplit(p.rules[1], p.signature);
    EXPECT_EQ(printRule(split, p.signature),
              "[d3] T_1(V,X), T_2(V,Y), T_3(V,Z), E(Y,Y1), E(Z,Z1) -> exists W: T_1(W,X), T_2(W,Y1), T_3(W,Z1).");
    const TGD diag = ternarySplit(p.rules[0], p.signature);
    EXPECT_EQ(printRule(diag, p.signature), "[d2] N(X) -> exists W: T_1(W,X), T_2(W,X), T_3(W,X).");
}

TEST(TernarySplit, RejectsOtherHeads) {
    Program p = program("[r] E(X,Y) -> F(X,Y).\n[s] E(X,Y) -> G(X,Y,Y), G(Y,X,X).");
    EXPECT_THROW(ternarySplit(p.rules[0], p.signature), ModelError);
    EXPECT_THROW(ternarySplit(p.rules[1], p.signature), ModelError);
    EXPECT_THROW(splitRelation(p, "F"), ModelError);
    EXPECT_THROW(splitRelation(p, "Nope"), ModelError);
}

TEST(TernarySplit, CorpusFixtureMatchesGenerator) {
    const Program split = splitRelation(corpusProgram("ternary"), "T");
    EXPECT_EQ(printProgram(split), printProgram(corpusProgram("ternary_split_T")));
}

TEST(TernarySplit, ObliviousDivergesSemiObliviousTerminates) {
    const Program split = corpusProgram("ternary_split_T");
    const Instance d = instance(slurp(corpus("instances/path5.inst")), split.signature);
    ChaseConfig ob = config(Variant::Oblivious, 2000);
    ob.traceLevel = TraceLevel::None;
    EXPECT_EQ(runChase(split, d, ob).verdict, Verdict::BudgetExceeded);
    const ChaseResult so = runChase(split, d, config(Variant::SemiOblivious));
    EXPECT_EQ(so.verdict, Verdict::Terminated);
    EXPECT_TRUE(checkIsModel(split, so.finalInstance));
    // The unsplit fragment terminates under both.
    const Program orig = corpusProgram("ternary");
    EXPECT_EQ(runChase(orig, instance(slurp(corpus("instances/path5.inst")), orig.signature),
                       config(Variant::Oblivious))
                  .verdict,
              Verdict::Terminated);
}

TEST(TernarySplit, ObliviousProbeOnCriticalInstance) {
    // The divergence on D is real but no new element satisfies every body
    // relation on its diagonal, so the probe stays Inconclusive.
    const Program split = corpusProgram("ternary_split_T");
    ChaseConfig c = config(Variant::Oblivious, 300);
    c.traceLevel = TraceLevel::None;
    const ProbeResult r = allInstancesTerminationProbe(split, c);
    EXPECT_EQ(r.chase.verdict, Verdict::BudgetExceeded);
    EXPECT_EQ(r.verdict, ProbeVerdict::Inconclusive);
    EXPECT_GE(r.chase.maxTermDepth, 100u);
}
