#pragma once

#include <sstream>

#include "dualize/definability.hpp"

namespace dualize {

// ---------------------------------------------------------------------------
// Universal Horn sentences
// ---------------------------------------------------------------------------

struct UHSentence {
    std::string name;
    int var_count = 0;
    std::vector<std::string> var_names;
    std::vector<Atom> premise;  // RelAtom / EqAtom (Falsum tolerated, vacuous)
    Atom conclusion = Falsum{};

    std::string var_name(int i) const {
        if (i < static_cast<int>(var_names.size())) return var_names[static_cast<std::size_t>(i)];
        return default_var_name(i);
    }
};

inline bool is_variable_term(const TermPtr& t) { return t->is_var(); }

inline bool is_flat_app(const TermPtr& t) {
    if (t->is_var()) return false;
    for (const auto& a : t->args)
        if (!a->is_var()) return false;
    return true;
}

// Premise atoms may be r(v...) or h(v...) = v.
inline bool hypothetically_pure(const Atom& a) {
    if (const auto* ra = std::get_if<RelAtom>(&a)) {
        for (const auto& t : ra->args)
            if (!t->is_var()) return false;
        return true;
    }
    if (const auto* eq = std::get_if<EqAtom>(&a)) {
        if (is_flat_app(eq->lhs) && eq->rhs->is_var()) return true;
        if (is_flat_app(eq->rhs) && eq->lhs->is_var()) return true;
        return false;
    }
    return false;
}

// Conclusions may be r(v...), h(v...) = h(v...), u = v, or falsum.
inline bool conclusively_pure(const Atom& a) {
    if (std::holds_alternative<Falsum>(a)) return true;
    if (const auto* ra = std::get_if<RelAtom>(&a)) {
        for (const auto& t : ra->args)
            if (!t->is_var()) return false;
        return true;
    }
    const auto& eq = std::get<EqAtom>(a);
    if (eq.lhs->is_var() && eq.rhs->is_var()) return true;
    return is_flat_app(eq.lhs) && term_equal(eq.lhs, eq.rhs);
}

inline bool is_pure(const UHSentence& s) {
    for (const auto& a : s.premise)
        if (!hypothetically_pure(a)) return false;
    return conclusively_pure(s.conclusion);
}

// ---------------------------------------------------------------------------
// Printing
// ---------------------------------------------------------------------------

inline std::string print_sentence(const UHSentence& s) {
    std::vector<std::string> names;
    for (int i = 0; i < s.var_count; ++i) names.push_back(s.var_name(i));
    std::string out = "!";
    for (const auto& n : names) out += " " + n;
    out += " : ";
    for (std::size_t i = 0; i < s.premise.size(); ++i) {
        if (i) out += " & ";
        out += atom_to_string(s.premise[i], names);
    }
    out += s.premise.empty() ? "-> " : " -> ";
    out += atom_to_string(s.conclusion, names);
    return out;
}

// ---------------------------------------------------------------------------
// Model checking (exhaustive over assignments; strict partial-term semantics)
// ---------------------------------------------------------------------------

inline bool models(const FiniteStructure& x, const UHSentence& s,
                   std::vector<Elem>* witness = nullptr) {
    bool ok = true;
    std::vector<Elem> assignment;
    for_each_tuple(x.size(), s.var_count, [&](const Tuple& t) {
        if (!ok) return;
        assignment.assign(t.begin(), t.end());
        for (const auto& a : s.premise)
            if (!atom_holds(a, x, assignment)) return;
        if (!atom_holds(s.conclusion, x, assignment)) {
            ok = false;
            if (witness) *witness = assignment;
        }
    });
    return ok;
}

// Solution set of the premise over the universally quantified variables.
inline Relation premise_relation(const FiniteStructure& x, const UHSentence& s) {
    ConjunctAtomicFormula f;
    f.nvars = s.var_count;
    for (const auto& a : s.premise) f.conjuncts.push_back(a);
    Relation out = f.solution_set(x);
    out.name = s.name.empty() ? "premise" : "Rel(" + s.name + ")";
    return out;
}

// ---------------------------------------------------------------------------
// Sentence normalisation helpers
// ---------------------------------------------------------------------------

namespace detail {

// Orients equations so that an application faces a variable left-to-right.
inline Atom orient_atom(const Atom& a) {
    if (const auto* eq = std::get_if<EqAtom>(&a)) {
        if (eq->lhs->is_var() && !eq->rhs->is_var()) return EqAtom{eq->rhs, eq->lhs};
    }
    return a;
}

inline void dedupe_premise(std::vector<Atom>& premise) {
    std::vector<Atom> out;
    for (const auto& a : premise) {
        bool dup = false;
        for (const auto& b : out)
            if (atom_equal(a, b)) { dup = true; break; }
        if (!dup) out.push_back(a);
    }
    premise = std::move(out);
}

// Renames variables by first occurrence (premise first, then conclusion) and
// sorts premise atoms; used for deduplication and renaming-insensitive
// comparison.
inline UHSentence alpha_normalize(const UHSentence& s) {
    std::vector<int> map(static_cast<std::size_t>(s.var_count), -1);
    int next = 0;
    std::function<void(const TermPtr&)> visit_term = [&](const TermPtr& t) {
        if (t->is_var()) {
            if (map[static_cast<std::size_t>(t->var)] < 0)
                map[static_cast<std::size_t>(t->var)] = next++;
            return;
        }
        for (const auto& a : t->args) visit_term(a);
    };
    auto visit_atom = [&](const Atom& a) {
        if (const auto* ra = std::get_if<RelAtom>(&a))
            for (const auto& t : ra->args) visit_term(t);
        else if (const auto* eq = std::get_if<EqAtom>(&a)) {
            visit_term(eq->lhs);
            visit_term(eq->rhs);
        }
    };
    for (const auto& a : s.premise) visit_atom(a);
    visit_atom(s.conclusion);
    for (auto& v : map)
        if (v < 0) v = next++;

    UHSentence out;
    out.name = s.name;
    out.var_count = s.var_count;
    for (int i = 0; i < s.var_count; ++i) out.var_names.push_back(default_var_name(i));
    for (const auto& a : s.premise) out.premise.push_back(atom_substitute(a, map));
    out.conclusion = atom_substitute(s.conclusion, map);
    std::sort(out.premise.begin(), out.premise.end(), [&](const Atom& a, const Atom& b) {
        return atom_to_string(a, out.var_names) < atom_to_string(b, out.var_names);
    });
    return out;
}

inline std::string sentence_key(const UHSentence& s) {
    return print_sentence(alpha_normalize(s));
}

// Substitutes variable `from` by `to`, removes `from` from the prefix and
// compacts the indices.
inline UHSentence substitute_and_drop(const UHSentence& s, int from, int to) {
    std::vector<int> map(static_cast<std::size_t>(s.var_count));
    int next = 0;
    for (int i = 0; i < s.var_count; ++i) {
        if (i == from) continue;
        map[static_cast<std::size_t>(i)] = next++;
    }
    map[static_cast<std::size_t>(from)] = map[static_cast<std::size_t>(to)];
    UHSentence out;
    out.name = s.name;
    out.var_count = s.var_count - 1;
    for (int i = 0; i < s.var_count; ++i)
        if (i != from) out.var_names.push_back(s.var_name(i));
    for (const auto& a : s.premise) out.premise.push_back(atom_substitute(a, map));
    out.conclusion = atom_substitute(s.conclusion, map);
    return out;
}

inline std::string fresh_var_name(const UHSentence& s, int ordinal) {
    std::string candidate = "w" + std::to_string(ordinal);
    while (std::find(s.var_names.begin(), s.var_names.end(), candidate) != s.var_names.end())
        candidate += "'";
    return candidate;
}

inline bool sentence_tautology(const UHSentence& s) {
    for (const auto& a : s.premise)
        if (std::holds_alternative<Falsum>(a)) return true;
    if (const auto* eq = std::get_if<EqAtom>(&s.conclusion))
        return eq->lhs->is_var() && eq->rhs->is_var() && eq->lhs->var == eq->rhs->var;
    return false;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Purification (the transformation cascade (0)-(6))
// ---------------------------------------------------------------------------

namespace detail {

// Applies the first applicable transformation at the first offending
// position; returns the replacement sentences, or nullopt when pure.
inline std::optional<std::vector<UHSentence>> purify_step(const UHSentence& input) {
    UHSentence s = input;
    for (auto& a : s.premise) a = orient_atom(a);
    dedupe_premise(s.premise);

    // (0) premise equation between variables
    for (std::size_t i = 0; i < s.premise.size(); ++i) {
        const auto* eq = std::get_if<EqAtom>(&s.premise[i]);
        if (!eq || !eq->lhs->is_var() || !eq->rhs->is_var()) continue;
        int u = eq->lhs->var, v = eq->rhs->var;
        UHSentence t = s;
        t.premise.erase(t.premise.begin() + static_cast<long>(i));
        if (u == v) return std::vector<UHSentence>{t};
        return std::vector<UHSentence>{substitute_and_drop(t, v, u)};
    }

    auto add_fresh = [&](UHSentence& t, int count) {
        int first = t.var_count;
        for (int j = 0; j < count; ++j)
            t.var_names.push_back(fresh_var_name(t, t.var_count - s.var_count + j + 1));
        t.var_count += count;
        return first;
    };

    // (1) premise relation atom with a non-variable argument
    for (std::size_t i = 0; i < s.premise.size(); ++i) {
        const auto* ra = std::get_if<RelAtom>(&s.premise[i]);
        if (!ra) continue;
        bool offending = std::any_of(ra->args.begin(), ra->args.end(),
                                     [](const TermPtr& t) { return !t->is_var(); });
        if (!offending) continue;
        UHSentence t = s;
        RelAtom atom = *ra;
        t.premise.erase(t.premise.begin() + static_cast<long>(i));
        int w0 = add_fresh(t, static_cast<int>(atom.args.size()));
        RelAtom fresh_atom;
        fresh_atom.symbol = atom.symbol;
        for (std::size_t j = 0; j < atom.args.size(); ++j) {
            fresh_atom.args.push_back(Term::mk_var(w0 + static_cast<int>(j)));
            t.premise.push_back(EqAtom{atom.args[j], Term::mk_var(w0 + static_cast<int>(j))});
        }
        t.premise.push_back(std::move(fresh_atom));
        return std::vector<UHSentence>{t};
    }

    // (2)/(3) premise equations with composite terms
    for (std::size_t i = 0; i < s.premise.size(); ++i) {
        const auto* eq = std::get_if<EqAtom>(&s.premise[i]);
        if (!eq) continue;
        bool pure_graph_atom = is_flat_app(eq->lhs) && eq->rhs->is_var();
        if (pure_graph_atom) continue;
        if (!eq->rhs->is_var()) {
            // (2): alpha_k is s0 = t0 with t0 not a variable
            UHSentence t = s;
            EqAtom atom = *eq;
            t.premise.erase(t.premise.begin() + static_cast<long>(i));
            int w = add_fresh(t, 1);
            t.premise.push_back(EqAtom{atom.lhs, Term::mk_var(w)});
            t.premise.push_back(EqAtom{atom.rhs, Term::mk_var(w)});
            return std::vector<UHSentence>{t};
        }
        // (3): h(t1..tn) = v with a composite argument
        UHSentence t = s;
        EqAtom atom = *eq;
        t.premise.erase(t.premise.begin() + static_cast<long>(i));
        const auto& app = atom.lhs;
        int w0 = add_fresh(t, static_cast<int>(app->args.size()));
        std::vector<TermPtr> fresh_args;
        for (std::size_t j = 0; j < app->args.size(); ++j) {
            fresh_args.push_back(Term::mk_var(w0 + static_cast<int>(j)));
            t.premise.push_back(EqAtom{app->args[j], Term::mk_var(w0 + static_cast<int>(j))});
        }
        t.premise.push_back(EqAtom{Term::mk_app(app->symbol, std::move(fresh_args)), atom.rhs});
        return std::vector<UHSentence>{t};
    }

    // Conclusion transformations.
    if (const auto* ra = std::get_if<RelAtom>(&s.conclusion)) {
        bool offending = std::any_of(ra->args.begin(), ra->args.end(),
                                     [](const TermPtr& t) { return !t->is_var(); });
        if (offending) {
            // (4): n definedness sentences plus the variable-argument form
            std::vector<UHSentence> out;
            for (const auto& arg : ra->args) {
                UHSentence t = s;
                t.conclusion = EqAtom{arg, arg};
                out.push_back(std::move(t));
            }
            UHSentence t = s;
            RelAtom atom = *ra;
            int w0 = add_fresh(t, static_cast<int>(atom.args.size()));
            RelAtom fresh_atom;
            fresh_atom.symbol = atom.symbol;
            for (std::size_t j = 0; j < atom.args.size(); ++j) {
                fresh_atom.args.push_back(Term::mk_var(w0 + static_cast<int>(j)));
                t.premise.push_back(EqAtom{atom.args[j], Term::mk_var(w0 + static_cast<int>(j))});
            }
            t.conclusion = std::move(fresh_atom);
            out.push_back(std::move(t));
            return out;
        }
        return std::nullopt;  // pure
    }
    if (const auto* eq = std::get_if<EqAtom>(&s.conclusion)) {
        if (eq->lhs->is_var() && eq->rhs->is_var()) return std::nullopt;
        if (term_equal(eq->lhs, eq->rhs)) {
            if (is_flat_app(eq->lhs)) return std::nullopt;  // pure definedness
            // (6): definedness with composite arguments
            std::vector<UHSentence> out;
            const auto& app = eq->lhs;
            for (const auto& arg : app->args) {
                UHSentence t = s;
                t.conclusion = EqAtom{arg, arg};
                out.push_back(std::move(t));
            }
            UHSentence t = s;
            int w0 = add_fresh(t, static_cast<int>(app->args.size()));
            std::vector<TermPtr> fresh_args;
            for (std::size_t j = 0; j < app->args.size(); ++j) {
                fresh_args.push_back(Term::mk_var(w0 + static_cast<int>(j)));
                t.premise.push_back(EqAtom{app->args[j], Term::mk_var(w0 + static_cast<int>(j))});
            }
            TermPtr fresh_app = Term::mk_app(app->symbol, std::move(fresh_args));
            t.conclusion = EqAtom{fresh_app, fresh_app};
            out.push_back(std::move(t));
            return out;
        }
        // (5): s0 = t0 with distinct terms, at least one composite
        std::vector<UHSentence> out;
        {
            UHSentence t = s;
            t.conclusion = EqAtom{eq->lhs, eq->lhs};
            out.push_back(std::move(t));
        }
        {
            UHSentence t = s;
            t.conclusion = EqAtom{eq->rhs, eq->rhs};
            out.push_back(std::move(t));
        }
        {
            UHSentence t = s;
            EqAtom atom = *eq;
            int w0 = add_fresh(t, 2);
            t.premise.push_back(EqAtom{atom.lhs, Term::mk_var(w0)});
            t.premise.push_back(EqAtom{atom.rhs, Term::mk_var(w0 + 1)});
            t.conclusion = EqAtom{Term::mk_var(w0), Term::mk_var(w0 + 1)};
            out.push_back(std::move(t));
        }
        return out;
    }
    return std::nullopt;  // falsum conclusion is pure
}

}  // namespace detail

// Rewrites s into a logically equivalent list of pure uH-sentences.
// Deterministic: always transforms the first offending position. Outputs are
// deduplicated up to variable renaming; sentences with a trivially true
// conclusion (v = v for a variable) or an unsatisfiable-by-form premise are
// dropped. Output names extend the input's name with a, b, c, ...
inline std::vector<UHSentence> purify(const UHSentence& s) {
    std::vector<UHSentence> result;
    std::vector<UHSentence> stack{s};
    int guard = 0;
    while (!stack.empty()) {
        if (++guard > 100000) throw std::logic_error("purify: transformation did not terminate");
        UHSentence cur = stack.back();
        stack.pop_back();
        if (detail::sentence_tautology(cur)) continue;
        auto step = detail::purify_step(cur);
        if (!step) {
            for (auto& a : cur.premise) a = detail::orient_atom(a);
            detail::dedupe_premise(cur.premise);
            if (!detail::sentence_tautology(cur)) result.push_back(cur);
            continue;
        }
        // Preserve the generation order: push in reverse.
        for (auto it = step->rbegin(); it != step->rend(); ++it) stack.push_back(*it);
    }
    // Deduplicate up to renaming, keeping first occurrences.
    std::vector<UHSentence> unique;
    std::set<std::string> seen;
    for (auto& t : result) {
        if (seen.insert(detail::sentence_key(t)).second) unique.push_back(std::move(t));
    }
    for (std::size_t i = 0; i < unique.size(); ++i) {
        if (unique.size() == 1 && is_pure(s) && seen.count(detail::sentence_key(s)))
            unique[i].name = s.name;  // pure input returned unchanged
        else if (!s.name.empty())
            unique[i].name = s.name + std::string(1, static_cast<char>('a' + i));
    }
    return unique;
}

// ---------------------------------------------------------------------------
// Sentence groups and the DSL parser
// ---------------------------------------------------------------------------

struct SentenceGroup {
    std::string name;
    std::string source;
    std::vector<UHSentence> sentences;
};

namespace detail {

struct Token {
    enum Kind { Ident, LParen, RParen, Comma, Eq, Amp, Arrow, Iff, Colon, Bang, False, Def, End };
    Kind kind = End;
    std::string text;
    std::size_t column = 0;
};

inline std::vector<Token> tokenize(const std::string& line) {
    std::vector<Token> out;
    std::size_t i = 0;
    auto error = [&](const std::string& msg) {
        throw InputError("sentence syntax error at column " + std::to_string(i + 1) + ": " + msg);
    };
    while (i < line.size()) {
        char c = line[i];
        if (c == ' ' || c == '\t') { ++i; continue; }
        if (c == '#') break;
        std::size_t col = i;
        if (c == '(') { out.push_back({Token::LParen, "(", col}); ++i; continue; }
        if (c == ')') { out.push_back({Token::RParen, ")", col}); ++i; continue; }
        if (c == ',') { out.push_back({Token::Comma, ",", col}); ++i; continue; }
        if (c == '=') { out.push_back({Token::Eq, "=", col}); ++i; continue; }
        if (c == '&') { out.push_back({Token::Amp, "&", col}); ++i; continue; }
        if (c == ':') { out.push_back({Token::Colon, ":", col}); ++i; continue; }
        if (c == '!') { out.push_back({Token::Bang, "!", col}); ++i; continue; }
        if (c == '-') {
            if (i + 1 < line.size() && line[i + 1] == '>') {
                out.push_back({Token::Arrow, "->", col});
                i += 2;
                continue;
            }
            error("expected '->'");
        }
        if (c == '<') {
            if (i + 2 < line.size() && line[i + 1] == '-' && line[i + 2] == '>') {
                out.push_back({Token::Iff, "<->", col});
                i += 3;
                continue;
            }
            error("expected '<->'");
        }
        if (std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '\'') {
            std::size_t j = i;
            while (j < line.size() && (std::isalnum(static_cast<unsigned char>(line[j])) ||
                                       line[j] == '_' || line[j] == '\''))
                ++j;
            std::string word = line.substr(i, j - i);
            if (word == "false")
                out.push_back({Token::False, word, col});
            else if (word == "def")
                out.push_back({Token::Def, word, col});
            else
                out.push_back({Token::Ident, word, col});
            i = j;
            continue;
        }
        error(std::string("unexpected character '") + c + "'");
    }
    out.push_back({Token::End, "", line.size()});
    return out;
}

struct SentenceParser {
    const std::vector<Token>& tokens;
    std::size_t pos = 0;
    const Signature& sig;
    std::vector<std::string> vars;

    const Token& peek() const { return tokens[pos]; }
    Token take() { return tokens[pos++]; }

    [[noreturn]] void fail(const std::string& msg) const {
        throw InputError("sentence syntax error at column " + std::to_string(peek().column + 1) +
                         ": " + msg);
    }

    int var_index(const std::string& name) const {
        for (std::size_t i = 0; i < vars.size(); ++i)
            if (vars[i] == name) return static_cast<int>(i);
        return -1;
    }

    const SigSymbol* symbol(const std::string& name) const {
        for (const auto& s : sig)
            if (s.name == name) return &s;
        return nullptr;
    }

    TermPtr parse_term() {
        if (peek().kind != Token::Ident) fail("expected a term");
        Token id = take();
        if (peek().kind == Token::LParen) {
            const SigSymbol* sym = symbol(id.text);
            if (!sym) fail("unknown symbol '" + id.text + "'");
            if (sym->kind != SymbolKind::PartialOp)
                fail("'" + id.text + "' is a relation symbol, not an operation");
            take();
            std::vector<TermPtr> args;
            if (peek().kind != Token::RParen) {
                args.push_back(parse_term());
                while (peek().kind == Token::Comma) {
                    take();
                    args.push_back(parse_term());
                }
            }
            if (peek().kind != Token::RParen) fail("expected ')'");
            take();
            if (static_cast<int>(args.size()) != sym->arity)
                fail("arity mismatch: '" + id.text + "' expects " + std::to_string(sym->arity) +
                     " arguments");
            return Term::mk_app(id.text, std::move(args));
        }
        int v = var_index(id.text);
        if (v >= 0) return Term::mk_var(v);
        const SigSymbol* sym = symbol(id.text);
        if (sym && sym->kind == SymbolKind::PartialOp && sym->arity == 0)
            return Term::mk_app(id.text, {});
        fail("unknown variable or symbol '" + id.text + "'");
    }

    // An atom item: one of false, def h(...), r(...), or a chain t = t = t.
    // Chains expand to several atoms.
    std::vector<Atom> parse_atom_item() {
        if (peek().kind == Token::False) {
            take();
            return {Falsum{}};
        }
        if (peek().kind == Token::Def) {
            take();
            TermPtr t = parse_term();
            if (t->is_var()) fail("'def' expects an operation application");
            return {EqAtom{t, t}};
        }
        // Could be a relation atom or the first term of an equation chain.
        if (peek().kind == Token::Ident) {
            const SigSymbol* sym = symbol(peek().text);
            if (sym && sym->kind == SymbolKind::Rel) {
                Token id = take();
                if (peek().kind != Token::LParen) fail("expected '(' after relation symbol");
                take();
                RelAtom atom;
                atom.symbol = id.text;
                if (peek().kind != Token::RParen) {
                    atom.args.push_back(parse_term());
                    while (peek().kind == Token::Comma) {
                        take();
                        atom.args.push_back(parse_term());
                    }
                }
                if (peek().kind != Token::RParen) fail("expected ')'");
                take();
                if (static_cast<int>(atom.args.size()) != sym->arity)
                    fail("arity mismatch: relation '" + id.text + "' expects " +
                         std::to_string(sym->arity) + " arguments");
                return {std::move(atom)};
            }
        }
        std::vector<TermPtr> chain;
        chain.push_back(parse_term());
        while (peek().kind == Token::Eq) {
            take();
            chain.push_back(parse_term());
        }
        if (chain.size() < 2) fail("expected '=' after term");
        std::vector<Atom> atoms;
        for (std::size_t i = 0; i + 1 < chain.size(); ++i)
            atoms.push_back(EqAtom{chain[i], chain[i + 1]});
        return atoms;
    }

    std::vector<Atom> parse_atom_list() {
        std::vector<Atom> out;
        auto first = parse_atom_item();
        out.insert(out.end(), first.begin(), first.end());
        while (peek().kind == Token::Amp) {
            take();
            auto more = parse_atom_item();
            out.insert(out.end(), more.begin(), more.end());
        }
        return out;
    }
};

}  // namespace detail

// Parses one DSL line into a group of uH-sentences. Biconditionals and
// conjunctive or chained conclusions expand into several sentences.
inline SentenceGroup parse_sentence_group(const std::string& line, const Signature& sig,
                                          const std::string& name = "") {
    auto tokens = detail::tokenize(line);
    detail::SentenceParser p{tokens, 0, sig, {}};
    if (p.peek().kind != detail::Token::Bang) p.fail("a sentence starts with '!'");
    p.take();
    while (p.peek().kind == detail::Token::Ident) {
        std::string v = p.take().text;
        if (p.var_index(v) >= 0) p.fail("duplicate variable '" + v + "'");
        if (p.symbol(v)) p.fail("variable '" + v + "' shadows a signature symbol");
        p.vars.push_back(v);
    }
    if (p.peek().kind != detail::Token::Colon) p.fail("expected ':' after the variable list");
    p.take();

    std::vector<Atom> lhs;
    if (p.peek().kind != detail::Token::Arrow && p.peek().kind != detail::Token::Iff)
        lhs = p.parse_atom_list();

    SentenceGroup group;
    group.name = name;
    group.source = line;

    auto mk = [&](std::vector<Atom> premise, Atom conclusion) {
        UHSentence s;
        s.name = name;
        s.var_count = static_cast<int>(p.vars.size());
        s.var_names = p.vars;
        s.premise = std::move(premise);
        for (auto& a : s.premise) a = detail::orient_atom(a);
        detail::dedupe_premise(s.premise);
        s.conclusion = detail::orient_atom(conclusion);
        return s;
    };

    if (p.peek().kind == detail::Token::Iff) {
        p.take();
        std::vector<Atom> rhs = p.parse_atom_list();
        if (p.peek().kind != detail::Token::End) p.fail("unexpected trailing input");
        for (const auto& c : rhs) group.sentences.push_back(mk(lhs, c));
        for (const auto& c : lhs) group.sentences.push_back(mk(rhs, c));
    } else {
        if (p.peek().kind != detail::Token::Arrow) p.fail("expected '->'");
        p.take();
        std::vector<Atom> rhs = p.parse_atom_list();
        if (p.peek().kind != detail::Token::End) p.fail("unexpected trailing input");
        for (const auto& c : rhs) group.sentences.push_back(mk(lhs, c));
    }
    if (group.sentences.size() > 1)
        for (std::size_t i = 0; i < group.sentences.size(); ++i)
            group.sentences[i].name = name.empty() ? "" : name + "." + std::to_string(i + 1);
    return group;
}

// Single-sentence convenience; rejects sugar that expands to several.
inline UHSentence parse_sentence(const std::string& line, const Signature& sig,
                                 const std::string& name = "") {
    SentenceGroup g = parse_sentence_group(line, sig, name);
    if (g.sentences.size() != 1)
        throw InputError("expected a single sentence but the line expands to " +
                         std::to_string(g.sentences.size()));
    return g.sentences[0];
}

// Round-trip helper: parse a file of sentences (one per line, # comments).
inline std::vector<SentenceGroup> parse_sentence_file(const std::string& text,
                                                      const Signature& sig) {
    std::vector<SentenceGroup> out;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    int counter = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string stripped = line;
        auto hash = stripped.find('#');
        if (hash != std::string::npos) stripped = stripped.substr(0, hash);
        bool blank = stripped.find_first_not_of(" \t\r") == std::string::npos;
        if (blank) continue;
        try {
            out.push_back(parse_sentence_group(stripped, sig, std::to_string(++counter)));
        } catch (const InputError& e) {
            throw InputError("line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Naturalisation (phi-natural)
// ---------------------------------------------------------------------------

// Table of beta entries for the symbols a basis mentions. Keys are
// "rel:NAME", "graph:NAME" and "dom:NAME".
struct BetaTable {
    std::map<std::string, BetaEntry> entries;

    const BetaEntry& at(const std::string& key) const {
        auto it = entries.find(key);
        if (it == entries.end())
            throw InputError("naturalize: no beta entry for '" + key + "'");
        return it->second;
    }
    bool has(const std::string& key) const { return entries.count(key) != 0; }
};

struct NaturalizedSentence {
    UHSentence original;
    int base_vars = 0;
    int total_vars = 0;
    // Premise: one instantiated conjunct-atomic formula per original atom,
    // each over total_vars with its own fresh block.
    struct PremisePart {
        ConjunctAtomicFormula formula;   // substituted over total_vars
        std::string beta_key;
        std::vector<int> arg_vars;       // v-variables of the original atom
        int block_start = 0;
        int block_len = 0;
    };
    std::vector<PremisePart> premise;

    enum class ConclusionKind { PP, Equation, Bottom };
    ConclusionKind kind = ConclusionKind::Bottom;
    PPFormula pp;                  // over base variables via arg_vars
    std::vector<int> pp_arg_vars;  // which base variables feed the pp formula
    int eq_lhs = 0, eq_rhs = 0;    // Equation conclusion
};

// Builds phi-natural: premise atoms become hatted conjunct-atomic formulas
// with disjoint fresh variable blocks; the conclusion becomes the matching
// primitive-positive formula (graph atoms and definedness via beta).
inline NaturalizedSentence naturalize(const UHSentence& s, const BetaTable& betas) {
    if (!is_pure(s)) throw InputError("naturalize: sentence '" + s.name + "' is not pure");
    NaturalizedSentence out;
    out.original = s;
    out.base_vars = s.var_count;
    int next = s.var_count;

    auto atom_key_and_args = [](const Atom& a) -> std::pair<std::string, std::vector<int>> {
        if (const auto* ra = std::get_if<RelAtom>(&a)) {
            std::vector<int> args;
            for (const auto& t : ra->args) args.push_back(t->var);
            return {"rel:" + ra->symbol, std::move(args)};
        }
        const auto& eq = std::get<EqAtom>(a);
        const TermPtr& app = eq.lhs->is_var() ? eq.rhs : eq.lhs;
        const TermPtr& res = eq.lhs->is_var() ? eq.lhs : eq.rhs;
        std::vector<int> args;
        for (const auto& t : app->args) args.push_back(t->var);
        args.push_back(res->var);
        return {"graph:" + app->symbol, std::move(args)};
    };

    for (const auto& a : s.premise) {
        auto [key, args] = atom_key_and_args(a);
        const BetaEntry& entry = betas.at(key);
        NaturalizedSentence::PremisePart part;
        part.beta_key = key;
        part.arg_vars = args;
        part.block_start = next;
        part.block_len = entry.beta.n_exist;
        next += part.block_len;
        std::vector<int> map(static_cast<std::size_t>(entry.hat.nvars));
        for (std::size_t i = 0; i < args.size(); ++i) map[i] = args[i];
        for (int j = 0; j < part.block_len; ++j)
            map[args.size() + static_cast<std::size_t>(j)] = part.block_start + j;
        part.formula = entry.hat.substituted(map, 0 /* patched below */);
        out.premise.push_back(std::move(part));
    }
    out.total_vars = next;
    for (auto& part : out.premise) part.formula.nvars = out.total_vars;

    // Conclusion.
    if (std::holds_alternative<Falsum>(s.conclusion)) {
        out.kind = NaturalizedSentence::ConclusionKind::Bottom;
    } else if (const auto* ra = std::get_if<RelAtom>(&s.conclusion)) {
        out.kind = NaturalizedSentence::ConclusionKind::PP;
        out.pp = betas.at("rel:" + ra->symbol).beta;
        for (const auto& t : ra->args) out.pp_arg_vars.push_back(t->var);
    } else {
        const auto& eq = std::get<EqAtom>(s.conclusion);
        if (eq.lhs->is_var() && eq.rhs->is_var()) {
            out.kind = NaturalizedSentence::ConclusionKind::Equation;
            out.eq_lhs = eq.lhs->var;
            out.eq_rhs = eq.rhs->var;
        } else {
            // Pure definedness conclusion h(v...) = h(v...): replacement (1c).
            out.kind = NaturalizedSentence::ConclusionKind::PP;
            out.pp = betas.at("dom:" + eq.lhs->symbol).beta;
            for (const auto& t : eq.lhs->args) out.pp_arg_vars.push_back(t->var);
        }
    }
    return out;
}

namespace detail {

// Solution set of a conjunct-atomic formula by depth-first assignment with
// atoms checked at their deepest variable; fast enough for the block sizes
// the sharp machinery produces.
inline std::vector<Tuple> ca_solutions(const ConjunctAtomicFormula& f, const FiniteStructure& x) {
    const int n = f.nvars;
    std::vector<std::vector<const Atom*>> by_max(static_cast<std::size_t>(std::max(n, 1)));
    std::vector<const Atom*> closed;  // atoms with no variables
    for (const auto& a : f.conjuncts) {
        std::vector<bool> used;
        atom_collect_vars(a, used);
        int mx = -1;
        for (std::size_t i = 0; i < used.size(); ++i)
            if (used[i]) mx = static_cast<int>(i);
        if (mx < 0)
            closed.push_back(&a);
        else
            by_max[static_cast<std::size_t>(mx)].push_back(&a);
    }
    std::vector<Tuple> out;
    std::vector<Elem> assignment(static_cast<std::size_t>(n), 0);
    for (const auto* a : closed)
        if (!atom_holds(*a, x, assignment)) return out;
    std::function<void(int)> rec = [&](int pos) {
        if (pos == n) {
            out.push_back(Tuple(assignment.begin(), assignment.end()));
            return;
        }
        for (std::size_t v = 0; v < x.size(); ++v) {
            assignment[static_cast<std::size_t>(pos)] = static_cast<Elem>(v);
            bool ok = true;
            for (const auto* a : by_max[static_cast<std::size_t>(pos)])
                if (!atom_holds(*a, x, assignment)) { ok = false; break; }
            if (ok) rec(pos + 1);
        }
    };
    if (n == 0) {
        out.push_back(Tuple{});
        return out;
    }
    rec(0);
    return out;
}

}  // namespace detail

// Model checking for naturalized sentences. Each premise block is
// independent, so satisfiability per block reduces to a precomputed
// projection of the hatted formula's solution set.
inline bool models(const FiniteStructure& x, const NaturalizedSentence& s,
                   std::vector<Elem>* witness = nullptr) {
    // Per premise part: the satisfiable argument tuples, i.e. the projection
    // of the hatted formula's solution set onto the argument coordinates.
    // The fresh blocks are disjoint, so the parts are independent.
    struct PremiseCheck {
        std::set<Tuple> sat;
        const std::vector<int>* args;
    };
    std::vector<PremiseCheck> checks;
    checks.reserve(s.premise.size());
    for (const auto& part : s.premise) {
        const int nargs = static_cast<int>(part.arg_vars.size());
        std::vector<int> map(static_cast<std::size_t>(s.total_vars), 0);
        for (std::size_t i = 0; i < part.arg_vars.size(); ++i)
            map[static_cast<std::size_t>(part.arg_vars[i])] = static_cast<int>(i);
        for (int j = 0; j < part.block_len; ++j)
            map[static_cast<std::size_t>(part.block_start + j)] = nargs + j;
        ConjunctAtomicFormula local = part.formula.substituted(map, nargs + part.block_len);
        PremiseCheck pc;
        pc.args = &part.arg_vars;
        for (const auto& t : detail::ca_solutions(local, x))
            pc.sat.insert(Tuple(t.begin(), t.begin() + nargs));
        checks.push_back(std::move(pc));
    }

    std::set<Tuple> concl_proj;
    if (s.kind == NaturalizedSentence::ConclusionKind::PP) {
        for (const auto& t : detail::ca_solutions(s.pp.body, x))
            concl_proj.insert(Tuple(t.begin(), t.begin() + s.pp.nvars));
    }

    bool ok = true;
    std::vector<Elem> assignment;
    for_each_tuple(x.size(), s.base_vars, [&](const Tuple& t) {
        if (!ok) return;
        assignment.assign(t.begin(), t.end());
        Tuple probe;
        for (const auto& c : checks) {
            probe.clear();
            for (int v : *c.args) probe.push_back(assignment[static_cast<std::size_t>(v)]);
            if (!c.sat.count(probe)) return;  // premise block unsatisfiable
        }
        bool concl = false;
        switch (s.kind) {
            case NaturalizedSentence::ConclusionKind::Bottom:
                concl = false;
                break;
            case NaturalizedSentence::ConclusionKind::Equation:
                concl = assignment[static_cast<std::size_t>(s.eq_lhs)] ==
                        assignment[static_cast<std::size_t>(s.eq_rhs)];
                break;
            case NaturalizedSentence::ConclusionKind::PP: {
                probe.clear();
                for (int v : s.pp_arg_vars) probe.push_back(assignment[static_cast<std::size_t>(v)]);
                concl = concl_proj.count(probe) != 0;
                break;
            }
        }
        if (!concl) {
            ok = false;
            if (witness) *witness = assignment;
        }
    });
    return ok;
}

// The premise relation of a naturalized sentence: the solution set of the
// conjunction of the hatted premise formulas over base variables and all
// fresh blocks.
inline Relation premise_relation(const FiniteStructure& x, const NaturalizedSentence& s) {
    ConjunctAtomicFormula all;
    all.nvars = s.total_vars;
    for (const auto& part : s.premise)
        for (const auto& a : part.formula.conjuncts) all.conjuncts.push_back(a);
    Relation out;
    out.carrier = x.carrier;
    out.arity = s.total_vars;
    out.tuples = detail::ca_solutions(all, x);
    out.canonicalize();
    out.name = s.original.name.empty() ? "premise~" : "Rel(" + s.original.name + "~)";
    return out;
}

// ---------------------------------------------------------------------------
// Finite-level dual class membership
// ---------------------------------------------------------------------------

// True iff the canonical evaluation map X -> E^{hom(X,E)} is injective and
// reflects the structure, i.e. X is (isomorphic to) a substructure of a
// non-zero power of E. The empty structure belongs iff E has no nullaries.
inline bool in_finite_dual_class(const FiniteStructure& x, const AlterEgo& ego,
                                 std::string* reason = nullptr) {
    FiniteStructure m = ego.as_structure();
    if (!same_signature(x.signature(), m.signature()))
        throw InputError("in_finite_dual_class: signature mismatch");
    if (x.size() == 0) {
        if (ego.has_nullary()) {
            if (reason) *reason = "empty structure but the signature has nullary operations";
            return false;
        }
        return true;
    }
    auto homs = structure_homs(x, m);
    if (homs.empty()) {
        if (reason) *reason = "no morphisms into the alter ego";
        return false;
    }
    // Injectivity of evaluation.
    for (std::size_t a = 0; a < x.size(); ++a)
        for (std::size_t b = a + 1; b < x.size(); ++b) {
            bool separated = false;
            for (const auto& u : homs)
                if (u[a] != u[b]) { separated = true; break; }
            if (!separated) {
                if (reason)
                    *reason = "morphisms do not separate '" + x.carrier->name(static_cast<Elem>(a)) +
                              "' and '" + x.carrier->name(static_cast<Elem>(b)) + "'";
                return false;
            }
        }
    // Reflection: a tuple satisfied by every morphism image must hold in X.
    for (std::size_t ri = 0; ri < x.rels.size(); ++ri) {
        const Relation& rx = x.rels[ri];
        const Relation& rm = m.rels[ri];
        bool bad = false;
        for_each_tuple(x.size(), rx.arity, [&](const Tuple& t) {
            if (bad || rx.contains(t)) return;
            for (const auto& u : homs) {
                Tuple image(t.size());
                for (std::size_t i = 0; i < t.size(); ++i) image[i] = u[t[i]];
                if (!rm.contains(image)) return;
            }
            bad = true;
            if (reason)
                *reason = "relation '" + rx.name + "' is not reflected";
        });
        if (bad) return false;
    }
    for (std::size_t oi = 0; oi < x.ops.size(); ++oi) {
        const PartialOperation& hx = x.ops[oi];
        const PartialOperation& hm = m.ops[oi];
        bool bad = false;
        for_each_tuple(x.size(), hx.arity, [&](const Tuple& t) {
            if (bad || hx.defined_on(t)) return;
            for (const auto& u : homs) {
                Tuple image(t.size());
                for (std::size_t i = 0; i < t.size(); ++i) image[i] = u[t[i]];
                if (!hm.defined_on(image)) return;
            }
            bad = true;
            if (reason) *reason = "domain of '" + hx.name + "' is not reflected";
        });
        if (bad) return false;
    }
    return true;
}

// ---------------------------------------------------------------------------
// Finite model enumeration and basis validation
// ---------------------------------------------------------------------------

namespace detail {

// Three-valued atom evaluation against a partially assigned structure.
// Cells hold -2 = unassigned, -1 = undefined, >= 0 = value; relation cells
// hold -2 = unassigned, 0 = out, 1 = in.
struct PartialModel {
    const Signature* sig;
    std::size_t n;  // carrier size
    std::vector<std::vector<std::int16_t>> op_cells;
    std::vector<std::vector<std::int16_t>> rel_cells;

    int op_index(const std::string& name) const {
        int k = 0;
        for (const auto& s : *sig) {
            if (s.kind == SymbolKind::PartialOp) {
                if (s.name == name) return k;
                ++k;
            }
        }
        return -1;
    }
    int rel_index(const std::string& name) const {
        int k = 0;
        for (const auto& s : *sig) {
            if (s.kind == SymbolKind::Rel) {
                if (s.name == name) return k;
                ++k;
            }
        }
        return -1;
    }

    // -2 unknown, -1 undefined, >= 0 value
    int eval_term(const TermPtr& t, const std::vector<Elem>& assignment) const {
        if (t->is_var()) return assignment[static_cast<std::size_t>(t->var)];
        bool unknown = false;
        Tuple args(t->args.size());
        for (std::size_t i = 0; i < t->args.size(); ++i) {
            int v = eval_term(t->args[i], assignment);
            if (v == -1) return -1;
            if (v == -2) { unknown = true; continue; }
            args[i] = static_cast<Elem>(v);
        }
        if (unknown) return -2;
        int oi = op_index(t->symbol);
        std::int16_t cell = op_cells[static_cast<std::size_t>(oi)][encode_tuple(args, n)];
        return cell;
    }

    // 1 true, 0 false, -2 unknown
    int eval_atom(const Atom& a, const std::vector<Elem>& assignment) const {
        if (std::holds_alternative<Falsum>(a)) return 0;
        if (const auto* ra = std::get_if<RelAtom>(&a)) {
            bool unknown = false;
            Tuple args(ra->args.size());
            for (std::size_t i = 0; i < ra->args.size(); ++i) {
                int v = eval_term(ra->args[i], assignment);
                if (v == -1) return 0;
                if (v == -2) { unknown = true; continue; }
                args[i] = static_cast<Elem>(v);
            }
            if (unknown) return -2;
            int ri = rel_index(ra->symbol);
            std::int16_t cell = rel_cells[static_cast<std::size_t>(ri)][encode_tuple(args, n)];
            if (cell == -2) return -2;
            return cell;
        }
        const auto& eq = std::get<EqAtom>(a);
        int l = eval_term(eq.lhs, assignment);
        if (l == -1) return 0;
        int r = eval_term(eq.rhs, assignment);
        if (r == -1) return 0;
        if (l == -2 || r == -2) return -2;
        return l == r ? 1 : 0;
    }

    // True iff some assignment definitely violates the sentence.
    bool definitely_violates(const UHSentence& s) const {
        bool violated = false;
        std::vector<Elem> assignment;
        for_each_tuple(n, s.var_count, [&](const Tuple& t) {
            if (violated) return;
            assignment.assign(t.begin(), t.end());
            for (const auto& a : s.premise)
                if (eval_atom(a, assignment) != 1) return;
            if (eval_atom(s.conclusion, assignment) == 0) violated = true;
        });
        return violated;
    }

    FiniteStructure to_structure(const Signature& sig_, CarrierPtr carrier) const {
        FiniteStructure x;
        x.carrier = carrier;
        std::size_t oi = 0, ri = 0;
        for (const auto& sym : sig_) {
            if (sym.kind == SymbolKind::PartialOp) {
                PartialOperation h;
                h.name = sym.name;
                h.carrier = carrier;
                h.arity = sym.arity;
                h.domain.carrier = carrier;
                h.domain.arity = sym.arity;
                std::size_t cell = 0;
                for_each_tuple(n, sym.arity, [&](const Tuple& t) {
                    std::int16_t v = op_cells[oi][cell++];
                    if (v >= 0) {
                        h.domain.tuples.push_back(t);
                        h.values.push_back(static_cast<Elem>(v));
                    }
                });
                x.ops.push_back(std::move(h));
                ++oi;
            } else {
                Relation r;
                r.name = sym.name;
                r.carrier = carrier;
                r.arity = sym.arity;
                std::size_t cell = 0;
                for_each_tuple(n, sym.arity, [&](const Tuple& t) {
                    if (rel_cells[ri][cell++] == 1) r.tuples.push_back(t);
                });
                x.rels.push_back(std::move(r));
                ++ri;
            }
        }
        return x;
    }
};

}  // namespace detail

// Enumerates every finite model of the sentences over the signature with
// carrier size 1..max_size (plus the empty structure when the signature has
// no nullary operation symbols), invoking the callback on each. Labelled
// enumeration; no isomorphism reduction.
inline void enumerate_models(const Signature& sig, const std::vector<UHSentence>& sentences,
                             int max_size,
                             const std::function<void(const FiniteStructure&)>& callback) {
    bool has_nullary = std::any_of(sig.begin(), sig.end(), [](const SigSymbol& s) {
        return s.kind == SymbolKind::PartialOp && s.arity == 0;
    });
    if (!has_nullary) {
        FiniteStructure empty;
        empty.name = "empty";
        empty.carrier = make_carrier({});
        for (const auto& sym : sig) {
            if (sym.kind == SymbolKind::PartialOp) {
                PartialOperation h;
                h.name = sym.name;
                h.carrier = empty.carrier;
                h.arity = sym.arity;
                h.domain.carrier = empty.carrier;
                h.domain.arity = sym.arity;
                empty.ops.push_back(std::move(h));
            } else {
                Relation r;
                r.name = sym.name;
                r.carrier = empty.carrier;
                r.arity = sym.arity;
                empty.rels.push_back(std::move(r));
            }
        }
        bool empty_models_all = std::all_of(sentences.begin(), sentences.end(),
                                            [&](const UHSentence& s) { return models(empty, s); });
        if (empty_models_all) callback(empty);
    }

    for (int size = 1; size <= max_size; ++size) {
        std::vector<std::string> labels;
        for (int i = 0; i < size; ++i) labels.push_back("x" + std::to_string(i + 1));
        CarrierPtr carrier = make_carrier(labels);
        const std::size_t n = static_cast<std::size_t>(size);

        detail::PartialModel model;
        model.sig = &sig;
        model.n = n;
        struct CellRef {
            bool is_op;
            std::size_t sym;
            std::size_t cell;
            std::string symbol_name;
        };
        std::vector<CellRef> cells;
        {
            std::size_t oi = 0, ri = 0;
            for (const auto& sym : sig) {
                std::size_t count = pow_size(n, sym.arity);
                if (sym.kind == SymbolKind::PartialOp) {
                    model.op_cells.emplace_back(count, -2);
                    for (std::size_t c = 0; c < count; ++c) cells.push_back({true, oi, c, sym.name});
                    ++oi;
                } else {
                    model.rel_cells.emplace_back(count, -2);
                    for (std::size_t c = 0; c < count; ++c)
                        cells.push_back({false, ri, c, sym.name});
                    ++ri;
                }
            }
        }
        // For pruning, only re-check sentences mentioning the symbol just
        // assigned.
        auto mentions = [&](const UHSentence& s, const std::string& symbol) {
            std::function<bool(const TermPtr&)> term_mentions = [&](const TermPtr& t) {
                if (t->is_var()) return false;
                if (t->symbol == symbol) return true;
                for (const auto& a : t->args)
                    if (term_mentions(a)) return true;
                return false;
            };
            auto atom_mentions = [&](const Atom& a) {
                if (const auto* ra = std::get_if<RelAtom>(&a)) {
                    if (ra->symbol == symbol) return true;
                    for (const auto& t : ra->args)
                        if (term_mentions(t)) return true;
                    return false;
                }
                if (const auto* eq = std::get_if<EqAtom>(&a))
                    return term_mentions(eq->lhs) || term_mentions(eq->rhs);
                return false;
            };
            for (const auto& a : s.premise)
                if (atom_mentions(a)) return true;
            return atom_mentions(s.conclusion);
        };
        std::vector<std::vector<const UHSentence*>> relevant(cells.size());
        for (std::size_t c = 0; c < cells.size(); ++c)
            for (const auto& s : sentences)
                if (mentions(s, cells[c].symbol_name)) relevant[c].push_back(&s);

        std::function<void(std::size_t)> rec = [&](std::size_t ci) {
            if (ci == cells.size()) {
                // Symbol-free sentences are never caught by the per-cell
                // pruning, so run a final full check.
                for (const auto& s : sentences)
                    if (model.definitely_violates(s)) return;
                callback(model.to_structure(sig, carrier));
                return;
            }
            const CellRef& ref = cells[ci];
            auto& slot = ref.is_op ? model.op_cells[ref.sym][ref.cell]
                                   : model.rel_cells[ref.sym][ref.cell];
            const int lo = ref.is_op ? -1 : 0;
            const int hi = ref.is_op ? static_cast<int>(n) - 1 : 1;
            for (int v = lo; v <= hi; ++v) {
                slot = static_cast<std::int16_t>(v);
                bool ok = true;
                for (const auto* s : relevant[ci])
                    if (model.definitely_violates(*s)) { ok = false; break; }
                if (ok) rec(ci + 1);
            }
            slot = -2;
        };
        rec(0);
    }
}

struct BasisValidation {
    bool ok = true;
    int size_bound = 4;
    std::size_t models_checked = 0;
    std::vector<std::string> failures;
};

// Checks that (i) the ego models the basis, (ii) every finite model of the
// basis up to the size bound lies in the finite dual class, and (iii) total
// operations of the ego are total in every such model.
inline BasisValidation validate_basis(const AlterEgo& ego,
                                      const std::vector<UHSentence>& sentences,
                                      int size_bound = 4) {
    BasisValidation out;
    out.size_bound = size_bound;
    FiniteStructure m = ego.as_structure();
    for (const auto& s : sentences) {
        if (!models(m, s)) {
            out.ok = false;
            out.failures.push_back("the ego does not satisfy '" + s.name + "': " +
                                   print_sentence(s));
        }
    }
    if (!out.ok) return out;

    std::vector<const PartialOperation*> total_ops;
    for (const auto& h : ego.h)
        if (h.is_total()) total_ops.push_back(&h);

    enumerate_models(ego.signature(), sentences, size_bound, [&](const FiniteStructure& x) {
        ++out.models_checked;
        if (!out.ok) return;
        for (const auto* t : total_ops) {
            const PartialOperation* hx = x.find_op(t->name);
            if (hx && x.size() > 0 && hx->domain.size() != pow_size(x.size(), hx->arity)) {
                out.ok = false;
                out.failures.push_back("model of size " + std::to_string(x.size()) +
                                       " interprets total operation '" + t->name +
                                       "' partially; totality is not a consequence of the basis");
                return;
            }
        }
        std::string reason;
        if (!in_finite_dual_class(x, ego, &reason)) {
            out.ok = false;
            out.failures.push_back("a model of size " + std::to_string(x.size()) +
                                   " is outside the finite dual class: " + reason);
        }
    });
    return out;
}

}  // namespace dualize
