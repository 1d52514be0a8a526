#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "chaselab/instance.h"
#include "chaselab/model.h"

namespace chaselab {

template <class T>
struct ParseResult {
    std::optional<T> value;
    std::vector<Diagnostic> diagnostics;

    bool ok() const { return value.has_value(); }
    std::string message() const {
        std::string out;
        for (const Diagnostic& d : diagnostics) out += d.str() + "\n";
        return out;
    }
};

struct LineSpan {
    int first = 0;
    int last = 0;
};

/// Program together with the text it was read from.
struct SourceProgram {
    std::string text;
    Program program;
    std::vector<LineSpan> ruleLines;  // parallel to program.rules
};

/// Grammar (see docs/grammar.md):
///   @signature E/2, H/1.
///   [ruleId] E(X,Y), H(Y) -> exists Z: E(Y,Z).
/// Variables start with an uppercase letter; constants are lowercase or
/// digit-initial identifiers or quoted strings. "#" starts a comment.
ParseResult<Program> parseProgram(std::string_view text, std::vector<LineSpan>* spans = nullptr);
ParseResult<SourceProgram> parseSourceProgram(std::string text);

/// Ground facts "R(a,b)." separated by whitespace. Relations must exist in
/// `sig` with matching arity unless `allowNewRelations` is set. Terms may be
/// Skolem applications written ruleId~index(args) or ruleId~index@nonce(args).
ParseResult<Instance> parseInstance(std::string_view text, const Signature& sig,
                                    bool allowNewRelations = false);

std::string printProgram(const Program& p);
std::string printRule(const TGD& r, const Signature& sig);
std::string printInstance(const Instance& inst);

}  // namespace chaselab
