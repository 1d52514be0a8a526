// Batch front end: chase, generate, verify.
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "chaselab/arena.h"
#include "chaselab/chase.h"
#include "chaselab/critical.h"
#include "chaselab/machines.h"
#include "chaselab/parser.h"
#include "chaselab/translations.h"

namespace fs = std::filesystem;
using namespace chaselab;
using json = nlohmann::ordered_json;

namespace {

constexpr int kOk = 0;
constexpr int kInputError = 1;
constexpr int kBudget = 2;

struct InputError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string readFile(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void writeFile(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write " + path.string());
    out << text;
}

Program loadProgram(const std::string& path) {
    auto res = parseProgram(readFile(path));
    if (!res.ok()) throw InputError(path + ":\n" + res.message());
    return std::move(*res.value);
}

CounterMachine loadMachine(const std::string& file, const std::string& zooName) {
    if (!zooName.empty()) {
        if (zooName == "halt0") return zoo::immediateHalt();
        if (zooName == "updown1") return zoo::upDownOne();
        if (zooName == "loop1") return zoo::loop1();
        if (zooName.rfind("updown", 0) == 0 && zooName.size() > 6) {
            const std::string k = zooName.substr(6);
            if (std::all_of(k.begin(), k.end(), ::isdigit) && k.size() < 4)
                return zoo::upDown(static_cast<std::uint32_t>(std::stoul(k)));
        }
        throw InputError("unknown zoo machine " + zooName + " (halt0, updown1, updown<k>, loop1)");
    }
    if (file.empty()) throw InputError("give --machine FILE or --zoo NAME");
    auto res = parseMachine(readFile(file), fs::path(file).stem().string());
    if (!res.ok()) throw InputError(file + ":\n" + res.message());
    return std::move(*res.value);
}

ThueInstance loadThue(const std::string& path) {
    auto res = parseThue(readFile(path));
    if (!res.ok()) throw InputError(path + ":\n" + res.message());
    return std::move(*res.value);
}

D3Orientation parseOrientation(const std::string& s) {
    if (s == "forward") return D3Orientation::Forward;
    if (s == "printed") return D3Orientation::AsPrinted;
    throw InputError("orientation must be forward or printed");
}

struct Manifest {
    std::string command;
    std::vector<std::string> argv;
    json inputs = json::object();
    json config = json::object();
    json outputs = json::array();
    json verdicts = json::object();
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();

    void write(const fs::path& path) {
        json j;
        j["command"] = command;
        j["argv"] = argv;
        j["inputs"] = inputs;
        j["config"] = config;
        j["outputs"] = outputs;
        j["wall_seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        j["verdicts"] = verdicts;
        writeFile(path, j.dump(2) + "\n");
    }
};

// Facts with Skolem terms written as labels; terms.txt defines the labels.
std::string labelledFacts(const Instance& inst) {
    std::string out;
    const Signature& sig = inst.signature();
    for (RelId r = 0; r < sig.size(); ++r) {
        const RelationTable& t = inst.table(r);
        for (RowId row = 0; row < t.size(); ++row) {
            out += sig[r].name + "(";
            auto args = t.row(row);
            for (std::size_t k = 0; k < args.size(); ++k) out += (k ? "," : "") + Term::fromId(args[k]).label();
            out += ").\n";
        }
    }
    return out;
}

std::string termTable(const Instance& inst) {
    std::set<TermId> ids;
    std::vector<Term> stack;
    for (Term t : inst.adom())
        if (!t.isConstant() && ids.insert(t.id()).second) stack.push_back(t);
    while (!stack.empty()) {
        const Term t = stack.back();
        stack.pop_back();
        for (Term a : t.args())
            if (!a.isConstant() && ids.insert(a.id()).second) stack.push_back(a);
    }
    std::string out;
    for (TermId id : ids) {  // ids grow with creation, so arguments come first
        const Term t = Term::fromId(id);
        out += t.label() + " = " + t.definition() + "\n";
    }
    return out;
}

// ---- chase ----------------------------------------------------------------

struct ChaseOptions {
    std::string program, instance, out = "chase_out", variant = "oblivious", strategy = "fifo";
    std::string traceLevel = "existential";
    bool critical = false;
    std::size_t maxSteps = 1'000'000;
    std::uint32_t maxDepth = 10'000;
    std::optional<std::uint64_t> seed;
    std::size_t traceSuffix = 0;
    std::vector<std::string> exportRelations;
};

int cmdChase(const ChaseOptions& o, Manifest& man) {
    const Program p = loadProgram(o.program);
    Instance d;
    if (o.critical) {
        if (!o.instance.empty()) throw InputError("give an instance file or --critical, not both");
        d = buildCritical(p.signature);
    } else {
        if (o.instance.empty()) throw InputError("give an instance file or --critical");
        auto res = parseInstance(readFile(o.instance), p.signature);
        if (!res.ok()) throw InputError(o.instance + ":\n" + res.message());
        d = std::move(*res.value);
    }
    ChaseConfig cfg;
    auto v = parseVariant(o.variant);
    if (!v) throw InputError("unknown variant " + o.variant);
    auto s = parseStrategy(o.strategy);
    if (!s || *s == Strategy::Exhaustive) throw InputError("strategy must be fifo, lifo or random");
    if (*s == Strategy::Random && !o.seed) throw InputError("--strategy random needs --seed");
    cfg.variant = *v;
    cfg.strategy = *s;
    cfg.seed = o.seed.value_or(0);
    cfg.maxSteps = o.maxSteps;
    cfg.maxDepth = o.maxDepth;
    cfg.traceSuffix = o.traceSuffix;
    if (o.traceLevel == "none") cfg.traceLevel = TraceLevel::None;
    else if (o.traceLevel == "existential") cfg.traceLevel = TraceLevel::Existential;
    else if (o.traceLevel == "full") cfg.traceLevel = TraceLevel::Full;
    else throw InputError("trace level must be none, existential or full");
    for (const std::string& rel : o.exportRelations) {
        auto id = p.signature.find(rel);
        if (!id || p.signature[*id].arity != 2) throw InputError("--export needs a binary relation, got " + rel);
    }

    const ChaseResult res = runChase(p, d, cfg);

    const fs::path out(o.out);
    std::string trace;
    for (const TraceEntry& e : res.trace) trace += traceEntryJson(e, p, true) + "\n";
    writeFile(out / "trace.jsonl", trace);

    std::ostringstream rep;
    rep << "program " << o.program << "\n";
    rep << "instance " << (o.critical ? std::string("critical") : o.instance) << "\n";
    rep << "variant " << variantName(cfg.variant) << "\n";
    rep << "strategy " << strategyName(cfg.strategy) << "\n";
    rep << "verdict " << verdictName(res.verdict) << "\n";
    rep << "stop_reason "
        << (res.stopReason == StopReason::Steps   ? "steps"
            : res.stopReason == StopReason::Depth ? "depth"
                                                  : "none")
        << "\n";
    rep << "steps " << res.stepsUsed << "\n";
    rep << "datalog_firings " << res.datalogFirings << "\n";
    rep << "facts " << res.finalInstance.size() << "\n";
    rep << "elements " << res.finalInstance.adom().size() << "\n";
    rep << "max_depth " << res.maxTermDepth << "\n";
    for (RelId r = 0; r < p.signature.size(); ++r)
        rep << "relation " << p.signature[r].name << " " << res.finalInstance.size(r) << "\n";
    if (res.verdict == Verdict::Terminated) rep << "model " << (checkIsModel(p, res.finalInstance) ? "yes" : "no") << "\n";
    if (o.critical && cfg.variant != Variant::Standard && res.verdict == Verdict::BudgetExceeded) {
        auto cert = findDivergenceCertificate(p, res.finalInstance);
        rep << "certificate " << (cert ? cert->witness.label() : std::string("none")) << "\n";
    }
    writeFile(out / "report.txt", rep.str());
    writeFile(out / "final.inst", labelledFacts(res.finalInstance));
    writeFile(out / "terms.txt", termTable(res.finalInstance));
    man.outputs.push_back((out / "trace.jsonl").string());
    man.outputs.push_back((out / "report.txt").string());
    man.outputs.push_back((out / "final.inst").string());
    man.outputs.push_back((out / "terms.txt").string());

    if (!o.exportRelations.empty()) {
        std::string edges;
        for (const std::string& rel : o.exportRelations) {
            const RelId id = *p.signature.find(rel);
            const RelationTable& t = res.finalInstance.table(id);
            for (RowId r = 0; r < t.size(); ++r)
                edges += rel + " " + Term::fromId(t.row(r)[0]).str() + " " + Term::fromId(t.row(r)[1]).str() + "\n";
        }
        writeFile(out / "edges.txt", edges);
        man.outputs.push_back((out / "edges.txt").string());
    }

    man.inputs["program"] = o.program;
    man.inputs["instance"] = o.critical ? "critical" : o.instance;
    man.config = {{"variant", variantName(cfg.variant)},
                  {"strategy", strategyName(cfg.strategy)},
                  {"seed", cfg.seed},
                  {"max_steps", cfg.maxSteps},
                  {"max_depth", o.maxDepth}};
    man.verdicts["chase"] = verdictName(res.verdict);
    man.write(out / "manifest.json");

    std::cout << verdictName(res.verdict) << ": " << res.stepsUsed << " steps, " << res.finalInstance.size()
              << " facts, " << res.finalInstance.adom().size() << " elements, max depth " << res.maxTermDepth
              << "\nreport: " << (out / "report.txt").string() << "\n";
    return res.verdict == Verdict::Terminated ? kOk : kBudget;
}

// ---- generate -------------------------------------------------------------

struct GenerateOptions {
    std::string kind, out, machine, zooName, orientation = "forward", instance, program, split;
    unsigned m = 1, p = 2;
    std::uint64_t maxCoefficient = 10'000;
    bool withArena = false;
};

int cmdGenerate(const GenerateOptions& o, Manifest& man, const std::string& commandLine) {
    Program prog;
    std::string name;
    std::vector<std::string> notes;
    try {
        if (o.kind == "tm") {
            const CounterMachine mach = loadMachine(o.machine, o.zooName);
            TmOptions opt;
            opt.orientation = parseOrientation(o.orientation);
            opt.maxCoefficient = o.maxCoefficient;
            prog = generateTM(mach, opt);
            name = "tm_" + mach.name();
            man.inputs["machine"] = o.machine.empty() ? "zoo:" + o.zooName : o.machine;
            man.config = {{"orientation", o.orientation}, {"max_coefficient", o.maxCoefficient}};
        } else if (o.kind == "arena0") {
            prog = generateArena0(o.m);
            name = "arena0_m" + std::to_string(o.m);
            man.config = {{"m", o.m}};
        } else if (o.kind == "arena1" || o.kind == "arena2") {
            prog = o.kind == "arena1" ? generateArena1(o.m, o.p) : generateArena2(o.m, o.p);
            name = o.kind + "_m" + std::to_string(o.m) + "_p" + std::to_string(o.p);
            man.config = {{"m", o.m}, {"p", o.p}};
        } else if (o.kind == "thue") {
            if (o.instance.empty()) throw InputError("generate thue needs --instance");
            const ThueInstance t = loadThue(o.instance);
            prog = o.withArena ? generateThueWithArena(t, true) : generateThueProgram(t);
            name = "thue_" + fs::path(o.instance).stem().string() + (o.withArena ? "_arena2" : "");
            man.inputs["instance"] = o.instance;
            man.config = {{"with_arena", o.withArena}};
        } else if (o.kind == "translate") {
            if (o.program.empty()) throw InputError("generate translate needs --program");
            const Program src = loadProgram(o.program);
            const std::string stem = fs::path(o.program).stem().string();
            if (o.split.empty()) {
                TranslationReport rep = singleHeadTranslate(src);
                prog = std::move(rep.translated);
                notes = rep.notes;
                name = stem + "_single";
            } else {
                prog = splitRelation(src, o.split);
                name = stem + "_split_" + o.split;
            }
            man.inputs["program"] = o.program;
            man.config = {{"split", o.split}};
        } else {
            throw InputError("unknown kind " + o.kind);
        }
    } catch (const MachineError& e) {
        throw InputError(e.what());
    } catch (const ArenaError& e) {
        throw InputError(e.what());
    } catch (const ModelError& e) {
        throw InputError(e.what());
    }
    const fs::path out = o.out.empty() ? fs::path(name + ".dlge") : fs::path(o.out);
    std::string text = "# " + commandLine + "\n";
    for (const std::string& n : notes) text += "# note: " + n + "\n";
    text += printProgram(prog);
    writeFile(out, text);
    man.outputs.push_back(out.string());
    man.verdicts["rules"] = prog.rules.size();
    man.verdicts["relations"] = prog.signature.size();
    man.write(fs::path(out.string() + ".manifest.json"));
    std::cout << out.string() << ": " << prog.rules.size() << " rules over " << prog.signature.size()
              << " relations\n";
    return kOk;
}

// ---- verify ---------------------------------------------------------------

struct VerifyOptions {
    std::string suite, machine, zooName, orientation = "forward", instance, program;
    unsigned m = 0, p = 0;
    std::size_t maxSteps = 100'000, samples = 50, factor = 10, divergenceSteps = 5'000;
    std::uint64_t seed = 1;
};

struct CheckPrinter {
    bool allPass = true;
    json records = json::array();

    void operator()(const std::string& name, bool pass, const std::string& detail) {
        allPass = allPass && pass;
        std::cout << "check " << name << " " << (pass ? "pass" : "fail") << (detail.empty() ? "" : " ") << detail
                  << "\n";
        records.push_back({{"check", name}, {"pass", pass}, {"detail", detail}});
    }
};

int cmdVerify(const VerifyOptions& o, Manifest& man) {
    CheckPrinter check;
    if (o.suite == "appendixA") {
        const CounterMachine mach = loadMachine(o.machine, o.zooName);
        const D3Orientation orient = parseOrientation(o.orientation);
        TmOptions opt;
        opt.orientation = orient;
        Program p;
        try {
            p = generateTM(mach, opt);
        } catch (const MachineError& e) {
            throw InputError(e.what());
        }
        ChaseConfig cfg;
        cfg.maxSteps = o.maxSteps;
        cfg.traceLevel = TraceLevel::None;
        const ChaseResult res = runChase(p, buildCritical(p.signature), cfg);
        const SimResult sim = simulate3CM(mach, 10'000);
        const AppendixAReport rep = verifyAppendixA(res, mach, orient);
        std::ostringstream d;
        d << "verdict=" << verdictName(res.verdict) << " steps=" << res.stepsUsed << " path=" << rep.pathLength
          << " T=" << rep.checkedT << " R=" << rep.checkedR << " G=" << rep.checkedG
          << " orbit_bounded=" << rep.orbitBounded << " orbit_max=" << rep.orbitMax;
        check("structure", rep.pass, d.str());
        for (const std::string& v : rep.violations) std::cout << "  " << v << "\n";
        check("halting", (res.verdict == Verdict::Terminated) == sim.halted,
              std::string("machine ") + (sim.halted ? "halts" : "runs past 10000 steps") + ", chase " +
                  verdictName(res.verdict));
        man.inputs["machine"] = o.machine.empty() ? "zoo:" + o.zooName : o.machine;
    } else if (o.suite == "appendixB") {
        const unsigned lo = o.m ? o.m : 1, hi = o.m ? o.m : 4;
        for (unsigned m = lo; m <= hi; ++m) {
            AppendixBReport rep;
            try {
                rep = verifyAppendixB(m);
            } catch (const ArenaError& e) {
                throw InputError(e.what());
            }
            check("m" + std::to_string(m) + ".path", rep.pathShape,
                  "snapshots=" + std::to_string(rep.snapshots) + " M=" + std::to_string(rep.M));
            for (const LemmaCheck& c : rep.checks) {
                std::string detail = std::to_string(c.checked - c.failures) + "/" + std::to_string(c.checked);
                if (!c.examples.empty()) detail += " first: " + c.examples.front();
                check("m" + std::to_string(m) + "." + c.name, c.pass(), detail);
            }
        }
    } else if (o.suite == "thue-oracle") {
        if (o.instance.empty()) throw InputError("verify thue-oracle needs --instance");
        ThueInstance t = loadThue(o.instance);
        if (o.m) t.m = o.m;
        if (o.p) t.p = o.p;
        try {
            const ThueAnswer ans = thueOracle(t);
            const bool c = thueChaseDerivesC(t);
            std::string trace;
            for (const std::string& w : ans.trace) trace += (trace.empty() ? "" : ">") + w;
            check("oracle-vs-chase", ans.solvable == c,
                  std::string("oracle=") + (ans.solvable ? "solvable k=" + std::to_string(ans.k) + " " + trace
                                                         : std::string("unsolvable")) +
                      " chase_C(a)=" + (c ? "yes" : "no"));
            const ThueDivergence div = thueArenaChase(t, o.divergenceSteps);
            const bool diverges = div.generations >= 3;
            check("divergence", diverges == ans.solvable,
                  std::string("verdict=") + verdictName(div.chase.verdict) +
                      " generations=" + std::to_string(div.generations));
        } catch (const ArenaError& e) {
            throw InputError(e.what());
        }
        man.inputs["instance"] = o.instance;
    } else if (o.suite == "lemma1-sample") {
        if (o.program.empty()) throw InputError("verify lemma1-sample needs --program");
        const Program p = loadProgram(o.program);
        const Lemma1Report rep = lemma1Sample(p, o.samples, o.seed, o.factor);
        check("critical-terminates", rep.criticalVerdict == Verdict::Terminated,
              "steps=" + std::to_string(rep.criticalSteps) + " depth=" + std::to_string(rep.criticalDepth));
        std::size_t passed = 0;
        for (std::size_t i = 0; i < rep.samples.size(); ++i) {
            const Lemma1Sample& s = rep.samples[i];
            passed += s.pass;
            if (!s.pass)
                check("sample" + std::to_string(i), false,
                      std::string(verdictName(s.verdict)) + " steps=" + std::to_string(s.steps) +
                          " depth=" + std::to_string(s.depth) + " lifted=" + std::to_string(s.liftedDepth) + " " +
                          s.error);
        }
        check("samples", rep.pass,
              std::to_string(passed) + "/" + std::to_string(rep.samples.size()) +
                  " budget=" + std::to_string(rep.budget));
        man.inputs["program"] = o.program;
    } else {
        throw InputError("unknown suite " + o.suite);
    }
    man.verdicts["checks"] = check.records;
    man.verdicts["pass"] = check.allPass;
    std::cout << (check.allPass ? "PASS" : "FAIL") << "\n";
    return check.allPass ? kOk : 3;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"chaselab: chase engine and reduction generators"};
    app.require_subcommand(1);

    ChaseOptions co;
    auto* chase = app.add_subcommand("chase", "run the chase");
    chase->add_option("program", co.program, "program file (.dlge)")->required();
    chase->add_option("instance", co.instance, "instance file");
    chase->add_flag("--critical", co.critical, "start from the critical instance");
    chase->add_option("--variant", co.variant, "oblivious | semi-oblivious | standard");
    chase->add_option("--strategy", co.strategy, "fifo | lifo | random");
    chase->add_option("--seed", co.seed, "seed for --strategy random");
    chase->add_option("--max-steps", co.maxSteps, "existential firing budget");
    chase->add_option("--max-depth", co.maxDepth, "term depth budget");
    chase->add_option("--trace-level", co.traceLevel, "none | existential | full");
    chase->add_option("--trace-suffix", co.traceSuffix, "keep only the last N trace entries");
    chase->add_option("--export", co.exportRelations, "binary relations to export as an edge list");
    chase->add_option("--out", co.out, "output directory");

    GenerateOptions go;
    auto* gen = app.add_subcommand("generate", "write a generated program");
    gen->add_option("kind", go.kind, "tm | arena0 | arena1 | arena2 | thue | translate")->required();
    gen->add_option("--machine", go.machine, "counter machine file (.3cm)");
    gen->add_option("--zoo", go.zooName, "built-in machine: halt0, updown1, updown<k>, loop1");
    gen->add_option("--orientation", go.orientation, "d3 orientation: forward | printed");
    gen->add_option("--max-coefficient", go.maxCoefficient, "refuse larger Conway coefficients");
    gen->add_option("--m", go.m, "arena exponent (M = 2^m)");
    gen->add_option("--p", go.p, "arena branching");
    gen->add_option("--instance", go.instance, "Thue instance file (.thue)");
    gen->add_flag("--with-arena", go.withArena, "combine with arena2");
    gen->add_option("--program", go.program, "program to translate");
    gen->add_option("--split", go.split, "split this ternary relation instead of single-head translation");
    gen->add_option("-o,--out", go.out, "output file");

    VerifyOptions vo;
    auto* ver = app.add_subcommand("verify", "run a verification suite");
    ver->add_option("suite", vo.suite, "appendixA | appendixB | thue-oracle | lemma1-sample")->required();
    ver->add_option("--machine", vo.machine, "counter machine file");
    ver->add_option("--zoo", vo.zooName, "built-in machine");
    ver->add_option("--orientation", vo.orientation, "d3 orientation: forward | printed");
    ver->add_option("--max-steps", vo.maxSteps, "chase budget");
    ver->add_option("--m", vo.m, "arena exponent; appendixB checks 1..4 when omitted");
    ver->add_option("--p", vo.p, "alphabet size override");
    ver->add_option("--instance", vo.instance, "Thue instance file");
    ver->add_option("--divergence-steps", vo.divergenceSteps, "budget for the arena2 run");
    ver->add_option("--program", vo.program, "program for lemma1-sample");
    ver->add_option("--samples", vo.samples, "random instances");
    ver->add_option("--seed", vo.seed, "sampling seed");
    ver->add_option("--factor", vo.factor, "budget factor over the critical run");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kOk : kInputError;
    }

    Manifest man;
    std::string commandLine = "chaselab";
    for (int i = 1; i < argc; ++i) {
        man.argv.emplace_back(argv[i]);
        commandLine += std::string(" ") + argv[i];
    }
    try {
        if (*chase) {
            man.command = "chase";
            return cmdChase(co, man);
        }
        if (*gen) {
            man.command = "generate " + go.kind;
            return cmdGenerate(go, man, commandLine);
        }
        man.command = "verify " + vo.suite;
        const int rc = cmdVerify(vo, man);
        man.write(fs::path("verify_" + vo.suite + ".manifest.json"));
        return rc;
    } catch (const InputError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kInputError;
    } catch (const ModelError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kInputError;
    }
}
