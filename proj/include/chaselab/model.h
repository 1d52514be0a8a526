#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "chaselab/term.h"

namespace chaselab {

using RelId = std::uint32_t;
using VarId = std::uint32_t;

class ModelError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct RelationDecl {
    std::string name;
    std::uint32_t arity = 0;

    friend bool operator==(const RelationDecl&, const RelationDecl&) = default;
};

class Signature {
public:
    Signature() = default;
    Signature(std::initializer_list<RelationDecl> rels);

    std::optional<RelId> find(std::string_view name) const;
    /// Returns the existing id when `name` is already declared with the same
    /// arity; throws ModelError on an arity conflict or arity 0.
    RelId intern(std::string_view name, std::uint32_t arity);

    const RelationDecl& operator[](RelId id) const { return rels_[id]; }
    std::size_t size() const { return rels_.size(); }
    bool empty() const { return rels_.empty(); }
    const std::vector<RelationDecl>& relations() const { return rels_; }

    friend bool operator==(const Signature& a, const Signature& b) { return a.rels_ == b.rels_; }

private:
    std::vector<RelationDecl> rels_;
    std::unordered_map<std::string, RelId> index_;
};

/// Argument of a rule atom: a rule-scoped variable or a constant term.
struct Arg {
    enum class Kind : std::uint8_t { Var, Const };
    Kind kind = Kind::Var;
    VarId var = 0;
    Term term;

    static Arg variable(VarId v) { return Arg{Kind::Var, v, Term()}; }
    static Arg constant(Term t) { return Arg{Kind::Const, 0, t}; }
    bool isVar() const { return kind == Kind::Var; }

    friend bool operator==(const Arg& a, const Arg& b) {
        if (a.kind != b.kind) return false;
        return a.isVar() ? a.var == b.var : a.term == b.term;
    }
};

struct Atom {
    RelId rel = 0;
    std::vector<Arg> args;

    friend bool operator==(const Atom&, const Atom&) = default;
};

/// Ground atom.
struct Fact {
    RelId rel = 0;
    std::vector<Term> args;

    friend bool operator==(const Fact&, const Fact&) = default;
};

/// Atom written with variable names, used to assemble rules.
struct NamedAtom {
    std::string relation;
    std::vector<std::string> args;  // uppercase initial = variable, else constant
};

/// Tuple-generating dependency  body => exists existentials: head.
///
/// Variables are numbered by first occurrence, body first then head, so the
/// body variables are exactly 0..bodyVarCount()-1.
class TGD {
public:
    TGD() = default;
    TGD(std::string id, std::vector<Atom> body, std::vector<Atom> head,
        std::vector<std::string> varNames, std::vector<VarId> existentials);

    const std::string& id() const { return id_; }
    const std::vector<Atom>& body() const { return body_; }
    const std::vector<Atom>& head() const { return head_; }
    const std::vector<std::string>& varNames() const { return varNames_; }
    std::size_t varCount() const { return varNames_.size(); }
    std::size_t bodyVarCount() const { return bodyVars_; }
    /// Existential variables in declaration order; the index in this list is
    /// the Skolem function index.
    const std::vector<VarId>& existentials() const { return existentials_; }
    /// Body variables occurring in the head, ascending.
    const std::vector<VarId>& frontier() const { return frontier_; }

    bool isDatalog() const { return existentials_.empty(); }
    bool isSingleHead() const { return head_.size() == 1; }
    bool isExistential(VarId v) const;
    /// Position of `v` in existentials(), or -1.
    int existentialIndex(VarId v) const;

    friend bool operator==(const TGD& a, const TGD& b) {
        return a.id_ == b.id_ && a.body_ == b.body_ && a.head_ == b.head_ &&
               a.varNames_ == b.varNames_ && a.existentials_ == b.existentials_;
    }

private:
    std::string id_;
    std::vector<Atom> body_;
    std::vector<Atom> head_;
    std::vector<std::string> varNames_;
    std::vector<VarId> existentials_;
    std::vector<VarId> frontier_;
    std::size_t bodyVars_ = 0;
};

struct Program {
    Signature signature;
    std::vector<TGD> rules;

    std::optional<std::size_t> findRule(std::string_view id) const;

    friend bool operator==(const Program&, const Program&) = default;
};

struct Diagnostic {
    std::string ruleId;
    std::string message;
    int line = 0;
    int column = 0;

    std::string str() const;
};

bool isDatalogRule(const TGD& r);

std::vector<Diagnostic> validateProgram(const Program& p);

/// Builds TGDs from named atoms, interning relations into a signature.
class ProgramBuilder {
public:
    ProgramBuilder() = default;
    explicit ProgramBuilder(Signature sig) { program_.signature = std::move(sig); }

    RelId relation(std::string_view name, std::uint32_t arity);
    /// Existential variables are declared explicitly; undeclared head-only
    /// variables are kept and reported by validateProgram.
    ProgramBuilder& rule(std::string id, const std::vector<NamedAtom>& body,
                         const std::vector<NamedAtom>& head,
                         const std::vector<std::string>& existentials = {});
    ProgramBuilder& add(const Program& other);

    const Program& program() const { return program_; }
    Program build() && { return std::move(program_); }

private:
    Program program_;
};

/// Builds one rule over `sig` (interning relations as needed).
TGD makeRule(Signature& sig, std::string id, const std::vector<NamedAtom>& body,
             const std::vector<NamedAtom>& head, const std::vector<std::string>& existentials);

bool isVariableName(std::string_view s);

/// Re-expresses a rule of one program over another signature (by relation name).
TGD remapRule(const TGD& rule, const Signature& from, Signature& to);

Program unionPrograms(const Program& a, const Program& b);

std::string atomString(const Atom& a, const Signature& sig, const TGD& owner);
std::string factString(const Fact& f, const Signature& sig);

}  // namespace chaselab
