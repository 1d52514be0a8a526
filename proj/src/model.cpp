#include "chaselab/model.h"

#include <algorithm>
#include <set>

namespace chaselab {

Signature::Signature(std::initializer_list<RelationDecl> rels) {
    for (const auto& r : rels) intern(r.name, r.arity);
}

std::optional<RelId> Signature::find(std::string_view name) const {
    auto it = index_.find(std::string(name));
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

RelId Signature::intern(std::string_view name, std::uint32_t arity) {
    if (arity == 0) throw ModelError("relation " + std::string(name) + " has arity 0");
    if (arity > 30) throw ModelError("relation " + std::string(name) + " has arity above 30");
    if (auto id = find(name)) {
        if (rels_[*id].arity != arity)
            throw ModelError("relation " + std::string(name) + " used with arity " +
                             std::to_string(arity) + " and " + std::to_string(rels_[*id].arity));
        return *id;
    }
    const RelId id = static_cast<RelId>(rels_.size());
    rels_.push_back({std::string(name), arity});
    index_.emplace(std::string(name), id);
    return id;
}

TGD::TGD(std::string id, std::vector<Atom> body, std::vector<Atom> head,
         std::vector<std::string> varNames, std::vector<VarId> existentials)
    : id_(std::move(id)),
      body_(std::move(body)),
      head_(std::move(head)),
      varNames_(std::move(varNames)),
      existentials_(std::move(existentials)) {
    // Renumber variables by first occurrence (body, then head, then any
    // declared-but-unused existential).
    constexpr VarId kUnset = 0xffffffffu;
    std::vector<VarId> renum(varNames_.size(), kUnset);
    std::vector<std::string> names;
    auto visit = [&](VarId v) {
        if (renum.at(v) == kUnset) {
            renum[v] = static_cast<VarId>(names.size());
            names.push_back(varNames_[v]);
        }
    };
    for (const Atom& a : body_)
        for (const Arg& x : a.args)
            if (x.isVar()) visit(x.var);
    for (const Atom& a : head_)
        for (const Arg& x : a.args)
            if (x.isVar()) visit(x.var);
    for (VarId v : existentials_) visit(v);
    for (VarId v = 0; v < varNames_.size(); ++v) visit(v);
    for (auto* atoms : {&body_, &head_})
        for (Atom& a : *atoms)
            for (Arg& x : a.args)
                if (x.isVar()) x.var = renum[x.var];
    for (VarId& v : existentials_) v = renum[v];
    varNames_ = std::move(names);

    std::vector<bool> inBody(varNames_.size(), false), inHead(varNames_.size(), false);
    for (const Atom& a : body_)
        for (const Arg& x : a.args)
            if (x.isVar()) inBody.at(x.var) = true;
    for (const Atom& a : head_)
        for (const Arg& x : a.args)
            if (x.isVar()) inHead.at(x.var) = true;
    for (VarId v = 0; v < varNames_.size(); ++v) {
        if (inBody[v]) bodyVars_ = std::max<std::size_t>(bodyVars_, v + 1);
        if (inBody[v] && inHead[v]) frontier_.push_back(v);
    }
}

bool TGD::isExistential(VarId v) const { return existentialIndex(v) >= 0; }

int TGD::existentialIndex(VarId v) const {
    for (std::size_t i = 0; i < existentials_.size(); ++i)
        if (existentials_[i] == v) return static_cast<int>(i);
    return -1;
}

std::optional<std::size_t> Program::findRule(std::string_view id) const {
    for (std::size_t i = 0; i < rules.size(); ++i)
        if (rules[i].id() == id) return i;
    return std::nullopt;
}

std::string Diagnostic::str() const {
    std::string out;
    if (line > 0) out += std::to_string(line) + ":" + std::to_string(column) + ": ";
    if (!ruleId.empty()) out += "rule " + ruleId + ": ";
    out += message;
    return out;
}

bool isDatalogRule(const TGD& r) { return r.isDatalog(); }

std::vector<Diagnostic> validateProgram(const Program& p) {
    std::vector<Diagnostic> out;
    std::set<std::string> ids;
    for (const TGD& r : p.rules) {
        if (!ids.insert(r.id()).second) out.push_back({r.id(), "duplicate rule id"});
        if (r.body().empty()) out.push_back({r.id(), "empty body"});
        if (r.head().empty()) out.push_back({r.id(), "empty head"});
        auto checkAtoms = [&](const std::vector<Atom>& atoms) {
            for (const Atom& a : atoms) {
                if (a.rel >= p.signature.size()) {
                    out.push_back({r.id(), "unknown relation id " + std::to_string(a.rel)});
                    continue;
                }
                const RelationDecl& d = p.signature[a.rel];
                if (d.arity != a.args.size())
                    out.push_back({r.id(), "arity mismatch: " + d.name + " expects " +
                                               std::to_string(d.arity) + " arguments, got " +
                                               std::to_string(a.args.size())});
            }
        };
        checkAtoms(r.body());
        checkAtoms(r.head());

        std::vector<bool> inBody(r.varCount(), false), inHead(r.varCount(), false);
        for (const Atom& a : r.body())
            for (const Arg& x : a.args)
                if (x.isVar()) inBody[x.var] = true;
        for (const Atom& a : r.head())
            for (const Arg& x : a.args)
                if (x.isVar()) inHead[x.var] = true;
        for (VarId v : r.existentials()) {
            if (v >= r.varCount()) {
                out.push_back({r.id(), "existential variable out of range"});
                continue;
            }
            if (inBody[v])
                out.push_back({r.id(), "existential variable " + r.varNames()[v] +
                                           " also occurs in the body"});
            if (!inHead[v])
                out.push_back({r.id(), "existential variable " + r.varNames()[v] +
                                           " does not occur in the head"});
        }
        for (VarId v = 0; v < r.varCount(); ++v) {
            if (inHead[v] && !inBody[v] && !r.isExistential(v))
                out.push_back({r.id(), "unsafe variable " + r.varNames()[v] +
                                           ": occurs in the head only and is not existential"});
        }
    }
    return out;
}

bool isVariableName(std::string_view s) { return !s.empty() && s[0] >= 'A' && s[0] <= 'Z'; }

TGD makeRule(Signature& sig, std::string id, const std::vector<NamedAtom>& body,
             const std::vector<NamedAtom>& head, const std::vector<std::string>& existentials) {
    std::vector<std::string> names;
    auto varOf = [&](const std::string& n) -> VarId {
        auto it = std::find(names.begin(), names.end(), n);
        if (it != names.end()) return static_cast<VarId>(it - names.begin());
        names.push_back(n);
        return static_cast<VarId>(names.size() - 1);
    };
    auto convert = [&](const std::vector<NamedAtom>& atoms) {
        std::vector<Atom> out;
        out.reserve(atoms.size());
        for (const NamedAtom& na : atoms) {
            Atom a;
            a.rel = sig.intern(na.relation, static_cast<std::uint32_t>(na.args.size()));
            for (const std::string& s : na.args) {
                if (isVariableName(s))
                    a.args.push_back(Arg::variable(varOf(s)));
                else
                    a.args.push_back(Arg::constant(Term::constant(s)));
            }
            out.push_back(std::move(a));
        }
        return out;
    };
    std::vector<Atom> b = convert(body);
    std::vector<Atom> h = convert(head);
    std::vector<VarId> ex;
    for (const std::string& e : existentials) ex.push_back(varOf(e));
    return TGD(std::move(id), std::move(b), std::move(h), std::move(names), std::move(ex));
}

RelId ProgramBuilder::relation(std::string_view name, std::uint32_t arity) {
    return program_.signature.intern(name, arity);
}

ProgramBuilder& ProgramBuilder::rule(std::string id, const std::vector<NamedAtom>& body,
                                     const std::vector<NamedAtom>& head,
                                     const std::vector<std::string>& existentials) {
    program_.rules.push_back(makeRule(program_.signature, std::move(id), body, head, existentials));
    return *this;
}

TGD remapRule(const TGD& rule, const Signature& from, Signature& to) {
    auto remap = [&](const std::vector<Atom>& atoms) {
        std::vector<Atom> out = atoms;
        for (Atom& a : out) a.rel = to.intern(from[a.rel].name, from[a.rel].arity);
        return out;
    };
    return TGD(rule.id(), remap(rule.body()), remap(rule.head()), rule.varNames(),
               rule.existentials());
}

ProgramBuilder& ProgramBuilder::add(const Program& other) {
    for (const RelationDecl& d : other.signature.relations()) program_.signature.intern(d.name, d.arity);
    for (const TGD& r : other.rules)
        program_.rules.push_back(remapRule(r, other.signature, program_.signature));
    return *this;
}

Program unionPrograms(const Program& a, const Program& b) {
    ProgramBuilder builder;
    builder.add(a).add(b);
    return std::move(builder).build();
}

std::string atomString(const Atom& a, const Signature& sig, const TGD& owner) {
    std::string out = sig[a.rel].name + "(";
    for (std::size_t i = 0; i < a.args.size(); ++i) {
        if (i) out += ",";
        const Arg& x = a.args[i];
        out += x.isVar() ? owner.varNames()[x.var] : x.term.str();
    }
    return out + ")";
}

std::string factString(const Fact& f, const Signature& sig) {
    std::string out = sig[f.rel].name + "(";
    for (std::size_t i = 0; i < f.args.size(); ++i) {
        if (i) out += ",";
        out += f.args[i].str();
    }
    return out + ")";
}

}  // namespace chaselab
