#include "chaselab/parser.h"

#include <cctype>
#include <charconv>
#include <stdexcept>
#include <variant>

namespace chaselab {
namespace {

enum class Tok { Ident, Quoted, Int, LParen, RParen, LBracket, RBracket, Comma, Dot, Colon, Arrow,
                 Slash, At, Tilde, End };

struct Token {
    Tok kind = Tok::End;
    std::string text;
    int line = 1;
    int column = 1;
};

struct SyntaxError : std::runtime_error {
    int line, column;
    SyntaxError(const std::string& msg, int l, int c) : std::runtime_error(msg), line(l), column(c) {}
};

bool identChar(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

class Lexer {
public:
    explicit Lexer(std::string_view text) : text_(text) { advance(); }

    const Token& peek() const { return cur_; }
    Token take() {
        Token t = cur_;
        advance();
        return t;
    }

private:
    void advance() {
        skipSpace();
        cur_ = Token{};
        cur_.line = line_;
        cur_.column = col_;
        if (pos_ >= text_.size()) {
            cur_.kind = Tok::End;
            return;
        }
        const char c = text_[pos_];
        if (identChar(c)) {
            std::size_t start = pos_;
            bool digits = true;
            while (pos_ < text_.size() && identChar(text_[pos_])) {
                digits = digits && std::isdigit(static_cast<unsigned char>(text_[pos_]));
                bump();
            }
            cur_.text = std::string(text_.substr(start, pos_ - start));
            cur_.kind = digits ? Tok::Int : Tok::Ident;
            return;
        }
        if (c == '"') {
            bump();
            std::string s;
            while (true) {
                if (pos_ >= text_.size()) throw SyntaxError("unterminated string", cur_.line, cur_.column);
                char d = text_[pos_];
                if (d == '"') {
                    bump();
                    break;
                }
                if (d == '\\' && pos_ + 1 < text_.size()) {
                    bump();
                    d = text_[pos_];
                }
                if (d == '\n') throw SyntaxError("newline in string", line_, col_);
                s.push_back(d);
                bump();
            }
            cur_.kind = Tok::Quoted;
            cur_.text = std::move(s);
            return;
        }
        if (c == '-' && pos_ + 1 < text_.size() && text_[pos_ + 1] == '>') {
            bump();
            bump();
            cur_.kind = Tok::Arrow;
            return;
        }
        bump();
        switch (c) {
            case '(': cur_.kind = Tok::LParen; return;
            case ')': cur_.kind = Tok::RParen; return;
            case '[': cur_.kind = Tok::LBracket; return;
            case ']': cur_.kind = Tok::RBracket; return;
            case ',': cur_.kind = Tok::Comma; return;
            case '.': cur_.kind = Tok::Dot; return;
            case ':': cur_.kind = Tok::Colon; return;
            case '/': cur_.kind = Tok::Slash; return;
            case '@': cur_.kind = Tok::At; return;
            case '~': cur_.kind = Tok::Tilde; return;
            default: break;
        }
        throw SyntaxError(std::string("unexpected character '") + c + "'", cur_.line, cur_.column);
    }

    void bump() {
        if (text_[pos_] == '\n') {
            ++line_;
            col_ = 1;
        } else {
            ++col_;
        }
        ++pos_;
    }

    void skipSpace() {
        while (pos_ < text_.size()) {
            const char c = text_[pos_];
            if (c == '#') {
                while (pos_ < text_.size() && text_[pos_] != '\n') bump();
            } else if (std::isspace(static_cast<unsigned char>(c))) {
                bump();
            } else {
                break;
            }
        }
    }

    std::string_view text_;
    std::size_t pos_ = 0;
    int line_ = 1;
    int col_ = 1;
    Token cur_;
};

const char* tokName(Tok t) {
    switch (t) {
        case Tok::Ident: return "identifier";
        case Tok::Quoted: return "string";
        case Tok::Int: return "integer";
        case Tok::LParen: return "'('";
        case Tok::RParen: return "')'";
        case Tok::LBracket: return "'['";
        case Tok::RBracket: return "']'";
        case Tok::Comma: return "','";
        case Tok::Dot: return "'.'";
        case Tok::Colon: return "':'";
        case Tok::Arrow: return "'->'";
        case Tok::Slash: return "'/'";
        case Tok::At: return "'@'";
        case Tok::Tilde: return "'~'";
        case Tok::End: return "end of input";
    }
    return "?";
}

class Parser {
public:
    explicit Parser(std::string_view text) : lex_(text) {}

    Token expect(Tok kind, const char* what) {
        const Token& t = lex_.peek();
        if (t.kind != kind)
            throw SyntaxError(std::string("expected ") + what + ", found " + describe(t), t.line, t.column);
        return lex_.take();
    }

    static std::string describe(const Token& t) {
        if (t.kind == Tok::Ident || t.kind == Tok::Int) return "'" + t.text + "'";
        return tokName(t.kind);
    }

    bool accept(Tok kind) {
        if (lex_.peek().kind != kind) return false;
        lex_.take();
        return true;
    }

    Lexer& lex() { return lex_; }

    void parseSignature(Signature& sig) {
        const Token kw = expect(Tok::Ident, "'signature'");
        if (kw.text != "signature") throw SyntaxError("unknown directive @" + kw.text, kw.line, kw.column);
        if (accept(Tok::Dot)) return;
        do {
            const Token name = expect(Tok::Ident, "relation name");
            expect(Tok::Slash, "'/'");
            const Token ar = expect(Tok::Int, "arity");
            std::uint32_t arity = 0;
            std::from_chars(ar.text.data(), ar.text.data() + ar.text.size(), arity);
            try {
                sig.intern(name.text, arity);
            } catch (const ModelError& e) {
                throw SyntaxError(e.what(), name.line, name.column);
            }
        } while (accept(Tok::Comma));
        expect(Tok::Dot, "'.'");
    }

    /// Ground term (constants and Skolem applications).
    Term parseGroundTerm() {
        const Token t = lex_.take();
        if (t.kind == Tok::Quoted) return Term::constant(t.text);
        if (t.kind != Tok::Ident && t.kind != Tok::Int)
            throw SyntaxError("expected term, found " + describe(t), t.line, t.column);
        if (lex_.peek().kind == Tok::Tilde) {
            lex_.take();
            const Token idx = expect(Tok::Int, "Skolem function index");
            std::uint32_t index = 0;
            std::from_chars(idx.text.data(), idx.text.data() + idx.text.size(), index);
            std::uint64_t nonce = 0;
            if (accept(Tok::At)) {
                const Token n = expect(Tok::Int, "nonce");
                std::from_chars(n.text.data(), n.text.data() + n.text.size(), nonce);
            }
            expect(Tok::LParen, "'('");
            std::vector<Term> args;
            if (!accept(Tok::RParen)) {
                do {
                    args.push_back(parseGroundTerm());
                } while (accept(Tok::Comma));
                expect(Tok::RParen, "')'");
            }
            return Term::skolem(skolemFunction(t.text, index), args, nonce);
        }
        if (isVariableName(t.text))
            throw SyntaxError("variable " + t.text + " in ground fact", t.line, t.column);
        return Term::constant(t.text);
    }

    struct RawAtom {
        std::string rel;
        std::vector<std::variant<std::string, Term>> args;  // string = variable
        int line, column;
    };

    RawAtom parseRuleAtom() {
        const Token name = expect(Tok::Ident, "relation name");
        RawAtom a{name.text, {}, name.line, name.column};
        expect(Tok::LParen, "'('");
        do {
            const Token& t = lex_.peek();
            if (t.kind == Tok::Ident && isVariableName(t.text)) {
                a.args.emplace_back(lex_.take().text);
            } else {
                a.args.emplace_back(parseGroundTerm());
            }
        } while (accept(Tok::Comma));
        expect(Tok::RParen, "')'");
        return a;
    }

    std::vector<RawAtom> parseConjunction() {
        std::vector<RawAtom> out;
        out.push_back(parseRuleAtom());
        while (accept(Tok::Comma)) out.push_back(parseRuleAtom());
        return out;
    }

private:
    Lexer lex_;
};

}  // namespace

ParseResult<Program> parseProgram(std::string_view text, std::vector<LineSpan>* spans) {
    ParseResult<Program> result;
    Program prog;
    std::size_t implicitId = 0;
    try {
        Parser ps(text);
        while (ps.lex().peek().kind != Tok::End) {
            if (ps.accept(Tok::At)) {
                ps.parseSignature(prog.signature);
                continue;
            }
            const int firstLine = ps.lex().peek().line;
            ++implicitId;
            std::string id = "r" + std::to_string(implicitId);
            if (ps.accept(Tok::LBracket)) {
                const Token t = ps.lex().take();
                if (t.kind != Tok::Ident && t.kind != Tok::Int)
                    throw SyntaxError("expected rule id, found " + Parser::describe(t), t.line, t.column);
                id = t.text;
                ps.expect(Tok::RBracket, "']'");
            }
            auto body = ps.parseConjunction();
            ps.expect(Tok::Arrow, "'->'");
            std::vector<std::string> existentials;
            {
                const Token& t = ps.lex().peek();
                if (t.kind == Tok::End || t.kind == Tok::Dot)
                    throw SyntaxError("empty head", t.line, t.column);
            }
            if (ps.lex().peek().kind == Tok::Ident && ps.lex().peek().text == "exists") {
                ps.lex().take();
                do {
                    const Token v = ps.expect(Tok::Ident, "existential variable");
                    if (!isVariableName(v.text))
                        throw SyntaxError("existential " + v.text + " is not a variable", v.line, v.column);
                    existentials.push_back(v.text);
                } while (ps.accept(Tok::Comma));
                ps.expect(Tok::Colon, "':'");
                const Token& t = ps.lex().peek();
                if (t.kind == Tok::End || t.kind == Tok::Dot)
                    throw SyntaxError("empty head", t.line, t.column);
            }
            auto head = ps.parseConjunction();
            const Token dot = ps.expect(Tok::Dot, "'.'");

            std::vector<std::string> names;
            auto varOf = [&](const std::string& n) -> VarId {
                for (std::size_t i = 0; i < names.size(); ++i)
                    if (names[i] == n) return static_cast<VarId>(i);
                names.push_back(n);
                return static_cast<VarId>(names.size() - 1);
            };
            auto convert = [&](const std::vector<Parser::RawAtom>& raw) {
                std::vector<Atom> out;
                for (const auto& ra : raw) {
                    Atom a;
                    try {
                        a.rel = prog.signature.intern(ra.rel, static_cast<std::uint32_t>(ra.args.size()));
                    } catch (const ModelError& e) {
                        throw SyntaxError(e.what(), ra.line, ra.column);
                    }
                    for (const auto& x : ra.args) {
                        if (const auto* v = std::get_if<std::string>(&x))
                            a.args.push_back(Arg::variable(varOf(*v)));
                        else
                            a.args.push_back(Arg::constant(std::get<Term>(x)));
                    }
                    out.push_back(std::move(a));
                }
                return out;
            };
            std::vector<Atom> b = convert(body);
            std::vector<Atom> h = convert(head);
            std::vector<VarId> ex;
            for (const auto& e : existentials) ex.push_back(varOf(e));
            prog.rules.emplace_back(std::move(id), std::move(b), std::move(h), std::move(names), std::move(ex));
            if (spans) spans->push_back({firstLine, dot.line});
        }
    } catch (const SyntaxError& e) {
        result.diagnostics.push_back({"", e.what(), e.line, e.column});
        return result;
    }
    result.value = std::move(prog);
    return result;
}

ParseResult<SourceProgram> parseSourceProgram(std::string text) {
    ParseResult<SourceProgram> out;
    std::vector<LineSpan> spans;
    auto r = parseProgram(text, &spans);
    out.diagnostics = std::move(r.diagnostics);
    if (r.ok()) out.value = SourceProgram{std::move(text), std::move(*r.value), std::move(spans)};
    return out;
}

ParseResult<Instance> parseInstance(std::string_view text, const Signature& sig, bool allowNewRelations) {
    ParseResult<Instance> result;
    Instance inst(sig);
    try {
        Parser ps(text);
        while (ps.lex().peek().kind != Tok::End) {
            const Token name = ps.expect(Tok::Ident, "relation name");
            ps.expect(Tok::LParen, "'('");
            std::vector<Term> args;
            do {
                args.push_back(ps.parseGroundTerm());
            } while (ps.accept(Tok::Comma));
            ps.expect(Tok::RParen, "')'");
            ps.expect(Tok::Dot, "'.'");
            auto rel = inst.signature().find(name.text);
            if (!rel) {
                if (!allowNewRelations)
                    throw SyntaxError("unknown relation " + name.text, name.line, name.column);
                try {
                    rel = inst.ensureRelation(name.text, static_cast<std::uint32_t>(args.size()));
                } catch (const ModelError& e) {
                    throw SyntaxError(e.what(), name.line, name.column);
                }
            }
            const std::uint32_t arity = inst.signature()[*rel].arity;
            if (arity != args.size())
                throw SyntaxError("arity mismatch: " + name.text + " expects " + std::to_string(arity) +
                                      " arguments, got " + std::to_string(args.size()),
                                  name.line, name.column);
            inst.insert(*rel, std::span<const Term>(args));
        }
    } catch (const SyntaxError& e) {
        result.diagnostics.push_back({"", e.what(), e.line, e.column});
        return result;
    }
    result.value = std::move(inst);
    return result;
}

std::string printRule(const TGD& r, const Signature& sig) {
    std::string out = "[" + r.id() + "] ";
    for (std::size_t i = 0; i < r.body().size(); ++i) {
        if (i) out += ", ";
        out += atomString(r.body()[i], sig, r);
    }
    out += " -> ";
    if (!r.existentials().empty()) {
        out += "exists ";
        for (std::size_t i = 0; i < r.existentials().size(); ++i) {
            if (i) out += ",";
            out += r.varNames()[r.existentials()[i]];
        }
        out += ": ";
    }
    for (std::size_t i = 0; i < r.head().size(); ++i) {
        if (i) out += ", ";
        out += atomString(r.head()[i], sig, r);
    }
    return out + ".";
}

std::string printProgram(const Program& p) {
    std::string out = "@signature";
    for (std::size_t i = 0; i < p.signature.size(); ++i) {
        out += i ? ", " : " ";
        out += p.signature[static_cast<RelId>(i)].name + "/" +
               std::to_string(p.signature[static_cast<RelId>(i)].arity);
    }
    out += ".\n";
    for (const TGD& r : p.rules) out += printRule(r, p.signature) + "\n";
    return out;
}

std::string printInstance(const Instance& inst) { return inst.str(); }

}  // namespace chaselab
