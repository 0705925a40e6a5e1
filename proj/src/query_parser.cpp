#include "qevo/query_parser.hpp"

#include <algorithm>
#include <set>

#include "qevo/errors.hpp"
#include "qevo/text.hpp"

namespace qevo {

namespace ast {
QueryAst phrase(std::string text) {
  QueryAst n;
  n.kind = QueryAst::Kind::phrase;
  n.text = std::move(text);
  return n;
}
QueryAst negation(QueryAst child) {
  QueryAst n;
  n.kind = QueryAst::Kind::negation;
  n.children.push_back(std::move(child));
  return n;
}
QueryAst conjunction(std::vector<QueryAst> children) {
  QueryAst n;
  n.kind = QueryAst::Kind::conjunction;
  n.children = std::move(children);
  return n;
}
QueryAst disjunction(std::vector<QueryAst> children) {
  QueryAst n;
  n.kind = QueryAst::Kind::disjunction;
  n.children = std::move(children);
  return n;
}
}  // namespace ast

std::string to_string(const QueryAst& node) {
  switch (node.kind) {
    case QueryAst::Kind::phrase:
      return node.text;
    case QueryAst::Kind::negation:
      return "Not[" + to_string(node.children.front()) + "]";
    case QueryAst::Kind::conjunction:
    case QueryAst::Kind::disjunction: {
      std::string s = node.kind == QueryAst::Kind::conjunction ? "And[" : "Or[";
      for (std::size_t i = 0; i < node.children.size(); ++i) {
        if (i > 0) s += ", ";
        s += to_string(node.children[i]);
      }
      return s + "]";
    }
  }
  return {};
}

namespace {

enum class Tok { lparen, rparen, op_and, op_or, op_not, phrase, end };

struct Token {
  Tok kind;
  std::string text;
  std::size_t offset;
};

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }

std::string ascii_lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c + ('a' - 'A'));
  }
  return out;
}

std::vector<Token> lex(std::string_view input) {
  std::vector<Token> tokens;
  std::size_t i = 0;
  while (i < input.size()) {
    const char c = input[i];
    if (is_space(c)) {
      ++i;
    } else if (c == '(') {
      tokens.push_back({Tok::lparen, "(", i++});
    } else if (c == ')') {
      tokens.push_back({Tok::rparen, ")", i++});
    } else if (c == '"') {
      const auto close = input.find('"', i + 1);
      if (close == std::string_view::npos) throw SyntaxError("unterminated quote", i);
      const auto body = input.substr(i + 1, close - i - 1);
      if (body.find_first_not_of(" \t\r\n\f\v") == std::string_view::npos) {
        throw SyntaxError("empty quotes", i);
      }
      tokens.push_back({Tok::phrase, std::string(body), i});
      i = close + 1;
    } else {
      const std::size_t start = i;
      while (i < input.size() && !is_space(input[i]) && input[i] != '(' && input[i] != ')' &&
             input[i] != '"') {
        ++i;
      }
      const auto word = input.substr(start, i - start);
      const auto lowered = ascii_lower(word);
      if (lowered == "and") {
        tokens.push_back({Tok::op_and, std::string(word), start});
      } else if (lowered == "or") {
        tokens.push_back({Tok::op_or, std::string(word), start});
      } else if (lowered == "not") {
        tokens.push_back({Tok::op_not, std::string(word), start});
      } else {
        tokens.push_back({Tok::phrase, std::string(word), start});
      }
    }
  }
  tokens.push_back({Tok::end, "", input.size()});
  return tokens;
}

class Parser {
 public:
  explicit Parser(std::vector<Token> tokens) : tokens_(std::move(tokens)) {}

  QueryAst parse_all() {
    if (peek().kind == Tok::end) throw SyntaxError("empty query", 0);
    QueryAst q = parse_or();
    const Token& t = peek();
    if (t.kind == Tok::rparen) throw SyntaxError("unbalanced parenthesis", t.offset);
    if (t.kind != Tok::end) throw SyntaxError("missing operator before \"" + t.text + "\"", t.offset);
    return q;
  }

 private:
  const Token& peek() const { return tokens_[pos_]; }
  const Token& next() { return tokens_[pos_++]; }

  QueryAst parse_or() {
    std::vector<QueryAst> parts;
    parts.push_back(parse_and());
    while (peek().kind == Tok::op_or) {
      next();
      parts.push_back(parse_and());
    }
    if (parts.size() == 1) return std::move(parts.front());
    auto node = ast::disjunction(std::move(parts));
    node.offset = node.children.front().offset;
    return node;
  }

  QueryAst parse_and() {
    std::vector<QueryAst> parts;
    parts.push_back(parse_unary());
    while (peek().kind == Tok::op_and) {
      next();
      parts.push_back(parse_unary());
    }
    if (parts.size() == 1) return std::move(parts.front());
    auto node = ast::conjunction(std::move(parts));
    node.offset = node.children.front().offset;
    return node;
  }

  QueryAst parse_unary() {
    const Token& t = next();
    switch (t.kind) {
      case Tok::op_not: {
        auto node = ast::negation(parse_unary());
        node.offset = t.offset;
        return node;
      }
      case Tok::lparen: {
        ++depth_;
        if (peek().kind == Tok::rparen) throw SyntaxError("empty parentheses", peek().offset);
        QueryAst inner = parse_or();
        const Token& close = peek();
        if (close.kind != Tok::rparen) {
          if (close.kind == Tok::end) throw SyntaxError("unbalanced parenthesis", close.offset);
          throw SyntaxError("missing operator before \"" + close.text + "\"", close.offset);
        }
        next();
        --depth_;
        return inner;
      }
      case Tok::phrase: {
        auto node = ast::phrase(t.text);
        node.offset = t.offset;
        return node;
      }
      case Tok::end:
        throw SyntaxError(depth_ > 0 ? "unbalanced parenthesis" : "dangling operator", t.offset);
      case Tok::rparen:
        throw SyntaxError(pos_ == 1 ? "unbalanced parenthesis" : "dangling operator", t.offset);
      case Tok::op_and:
      case Tok::op_or:
        throw SyntaxError("dangling operator", t.offset);
    }
    throw SyntaxError("unexpected token", t.offset);
  }

  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
  int depth_ = 0;
};

using Cnf = std::vector<Clause>;

// Merges repeated literals; returns false for a tautology (p OR NOT p).
bool tidy_clause(Clause& clause) {
  Clause out;
  for (const auto& lit : clause) {
    if (std::find(out.begin(), out.end(), lit) != out.end()) continue;
    if (std::find(out.begin(), out.end(), Literal{lit.phrase_id, !lit.negated}) != out.end()) {
      return false;
    }
    out.push_back(lit);
  }
  clause = std::move(out);
  return true;
}

class Normalizer {
 public:
  Normalizer(const PhraseResolver& resolve, std::size_t cap) : resolve_(resolve), cap_(cap) {}

  Cnf run(const QueryAst& node, bool negated) {
    switch (node.kind) {
      case QueryAst::Kind::phrase: {
        const auto key = phrase_key(node.text);
        if (!key) throw UnknownPhrase(node.text);
        const auto id = resolve_(*key);
        if (!id) throw UnknownPhrase(*key);
        return {Clause{Literal{*id, negated}}};
      }
      case QueryAst::Kind::negation:
        return run(node.children.front(), !negated);
      case QueryAst::Kind::conjunction:
      case QueryAst::Kind::disjunction: {
        const bool all = (node.kind == QueryAst::Kind::conjunction) != negated;
        return all ? conjoin(node, negated) : disjoin(node, negated);
      }
    }
    return {};
  }

 private:
  Cnf conjoin(const QueryAst& node, bool negated) {
    Cnf out;
    for (const auto& child : node.children) {
      for (auto& clause : run(child, negated)) add_unique(out, std::move(clause));
    }
    return out;
  }

  // OR over children: the cross product of their clause lists. Starts from a
  // single empty clause, the identity for disjunction.
  Cnf disjoin(const QueryAst& node, bool negated) {
    Cnf acc{Clause{}};
    for (const auto& child : node.children) {
      const Cnf rhs = run(child, negated);
      Cnf next;
      for (const auto& a : acc) {
        for (const auto& b : rhs) {
          Clause merged = a;
          merged.insert(merged.end(), b.begin(), b.end());
          if (!tidy_clause(merged)) continue;
          add_unique(next, std::move(merged));
        }
      }
      acc = std::move(next);
    }
    return acc;
  }

  void add_unique(Cnf& cnf, Clause clause) {
    const std::set<Literal> key(clause.begin(), clause.end());
    for (const auto& existing : cnf) {
      if (std::set<Literal>(existing.begin(), existing.end()) == key) return;
    }
    if (cnf.size() >= cap_) throw BlowupLimitExceeded(cap_);
    cnf.push_back(std::move(clause));
  }

  const PhraseResolver& resolve_;
  std::size_t cap_;
};

std::size_t utf8_length(std::string_view s) {
  std::size_t n = 0;
  for (char c : s) n += (static_cast<unsigned char>(c) & 0xC0) != 0x80;
  return n;
}

std::string render_phrase(const std::string& key) {
  const bool keyword = key == "and" || key == "or" || key == "not";
  if (keyword || key.find(' ') != std::string::npos) return '"' + key + '"';
  return key;
}

}  // namespace

QueryAst parse(std::string_view query) { return Parser(lex(query)).parse_all(); }

std::optional<std::string> phrase_key(std::string_view text) {
  const auto tokens = tokenize(text);
  if (tokens.empty() || tokens.size() > Phrase::kMaxTokens) return std::nullopt;
  return Phrase(tokens).key();
}

ClauseQuery normalize(const QueryAst& node, const PhraseResolver& resolve, std::size_t clause_cap) {
  Normalizer normalizer(resolve, clause_cap);
  return ClauseQuery{normalizer.run(node, false)};
}

ClauseQuery normalize(const QueryAst& node, const VocabularyIndex& vocab, std::size_t clause_cap) {
  return normalize(
      node,
      [&vocab](const std::string& key) -> std::optional<std::uint32_t> {
        if (auto id = vocab.find(key)) return static_cast<std::uint32_t>(*id);
        return std::nullopt;
      },
      clause_cap);
}

SerializedQuery serialize(const ClauseQuery& query, const VocabularyIndex& vocab,
                          std::size_t limit) {
  std::vector<const Clause*> clauses;
  for (const auto& c : query.clauses) {
    if (!c.empty()) clauses.push_back(&c);
  }
  if (clauses.empty()) return {"", true};

  auto literal_text = [&](const Literal& lit, bool in_disjunction) {
    if (lit.phrase_id >= vocab.size()) throw PhraseIdOutOfRange(lit.phrase_id, vocab.size());
    const auto phrase = render_phrase(vocab.phrase(lit.phrase_id).key());
    if (!lit.negated) return phrase;
    return in_disjunction ? "(NOT " + phrase + ")" : "NOT " + phrase;
  };

  std::string out;
  for (std::size_t i = 0; i < clauses.size(); ++i) {
    const Clause& clause = *clauses[i];
    std::string text;
    for (std::size_t k = 0; k < clause.size(); ++k) {
      if (k > 0) text += " OR ";
      text += literal_text(clause[k], clause.size() > 1);
    }
    const bool wrap = clauses.size() > 1 && (clause.size() > 1 || clause.front().negated);
    if (i > 0) out += " AND ";
    out += wrap ? "(" + text + ")" : text;
  }
  const auto length = utf8_length(out);
  if (length > limit) throw LengthExceeded(length, limit);
  return {std::move(out), false};
}

}  // namespace qevo
