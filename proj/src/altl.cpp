#include "prs/altl.hpp"

#include <algorithm>
#include <cctype>
#include <cassert>
#include <map>
#include <stdexcept>

namespace prs {

namespace {

Formula mk(FKind k, Label a, Formula l, Formula r) {
  auto n = std::make_shared<FormulaNode>();
  n->kind = k;
  n->action = a;
  n->lhs = std::move(l);
  n->rhs = std::move(r);
  return n;
}

}  // namespace

Formula FormulaNode::truth() {
  static const Formula t = mk(FKind::True, Label{}, nullptr, nullptr);
  return t;
}
Formula FormulaNode::diamond(Label a, Formula f) { return mk(FKind::Diamond, a, std::move(f), nullptr); }
Formula FormulaNode::diamond(Label a) { return diamond(a, truth()); }
Formula FormulaNode::negate(Formula f) { return mk(FKind::Not, Label{}, std::move(f), nullptr); }
Formula FormulaNode::conj(Formula a, Formula b) { return mk(FKind::And, Label{}, std::move(a), std::move(b)); }
Formula FormulaNode::disj(Formula a, Formula b) { return mk(FKind::Or, Label{}, std::move(a), std::move(b)); }
Formula FormulaNode::until(Formula a, Formula b) { return mk(FKind::Until, Label{}, std::move(a), std::move(b)); }
Formula FormulaNode::always(Formula f) { return mk(FKind::G, Label{}, std::move(f), nullptr); }
Formula FormulaNode::eventually(Formula f) { return mk(FKind::F, Label{}, std::move(f), nullptr); }
Formula FormulaNode::inf_often(Formula f) { return mk(FKind::GF, Label{}, std::move(f), nullptr); }
Formula FormulaNode::fplus(Formula f) { return mk(FKind::FPlus, Label{}, std::move(f), nullptr); }

std::string formula_str(const Formula& f) {
  switch (f->kind) {
    case FKind::True: return "true";
    case FKind::Diamond:
      if (f->lhs->kind == FKind::True) return "<" + f->action.str() + ">";
      return "<" + f->action.str() + ">(" + formula_str(f->lhs) + ")";
    case FKind::Not: return "!(" + formula_str(f->lhs) + ")";
    case FKind::And: return "(" + formula_str(f->lhs) + " & " + formula_str(f->rhs) + ")";
    case FKind::Or: return "(" + formula_str(f->lhs) + " | " + formula_str(f->rhs) + ")";
    case FKind::Until: return "(" + formula_str(f->lhs) + " U " + formula_str(f->rhs) + ")";
    case FKind::G: return "G " + formula_str(f->lhs);
    case FKind::F: return "F " + formula_str(f->lhs);
    case FKind::GF: return "GF " + formula_str(f->lhs);
    case FKind::FPlus: return "F+ " + formula_str(f->lhs);
  }
  return "?";
}

bool is_propositional(const Formula& f) {
  switch (f->kind) {
    case FKind::True: return true;
    case FKind::Diamond: return f->lhs->kind == FKind::True;
    case FKind::Not: return is_propositional(f->lhs);
    case FKind::And: return is_propositional(f->lhs) && is_propositional(f->rhs);
    default: return false;
  }
}

// --- evaluation on lasso runs -----------------------------------------------

namespace {

struct Evaluator {
  const LassoRun& run;
  size_t s, c, total;
  std::map<const FormulaNode*, std::vector<char>> memo;

  explicit Evaluator(const LassoRun& r) : run(r), s(r.stem.size()), c(r.cycle.size()) {
    total = s + c;
  }

  const Label& word(size_t i) const { return i < s ? run.stem[i] : run.cycle[i - s]; }
  size_t next(size_t i) const { return i + 1 < total ? i + 1 : s; }

  const std::vector<char>& sat(const Formula& f) {
    auto it = memo.find(f.get());
    if (it != memo.end()) return it->second;
    std::vector<char> v(total, 0);
    switch (f->kind) {
      case FKind::True:
        std::fill(v.begin(), v.end(), 1);
        break;
      case FKind::Diamond: {
        const auto& sub = sat(f->lhs);
        for (size_t i = 0; i < total; ++i)
          v[i] = (word(i) == f->action) && sub[next(i)];
        break;
      }
      case FKind::Not: {
        const auto& sub = sat(f->lhs);
        for (size_t i = 0; i < total; ++i) v[i] = !sub[i];
        break;
      }
      case FKind::And: {
        const auto& a = sat(f->lhs);
        const auto& b = sat(f->rhs);
        for (size_t i = 0; i < total; ++i) v[i] = a[i] && b[i];
        break;
      }
      case FKind::Or: {
        const auto& a = sat(f->lhs);
        const auto& b = sat(f->rhs);
        for (size_t i = 0; i < total; ++i) v[i] = a[i] || b[i];
        break;
      }
      case FKind::Until: {
        const auto& a = sat(f->lhs);
        const auto& b = sat(f->rhs);
        // least fixpoint on the cycle, then the stem backwards
        for (size_t round = 0; round <= c; ++round)
          for (size_t i = total; i-- > s;)
            v[i] = b[i] || (a[i] && v[next(i)]);
        for (size_t i = s; i-- > 0;) v[i] = b[i] || (a[i] && v[i + 1]);
        break;
      }
      case FKind::F: {
        const auto& sub = sat(f->lhs);
        bool in_cycle = std::find(sub.begin() + s, sub.end(), 1) != sub.end();
        for (size_t i = s; i < total; ++i) v[i] = in_cycle;
        for (size_t i = s; i-- > 0;) v[i] = sub[i] || v[i + 1];
        break;
      }
      case FKind::G: {
        const auto& sub = sat(f->lhs);
        bool all_cycle = std::find(sub.begin() + s, sub.end(), 0) == sub.end();
        for (size_t i = s; i < total; ++i) v[i] = all_cycle;
        for (size_t i = s; i-- > 0;) v[i] = sub[i] && v[i + 1];
        break;
      }
      case FKind::GF: {
        const auto& sub = sat(f->lhs);
        bool in_cycle = std::find(sub.begin() + s, sub.end(), 1) != sub.end();
        std::fill(v.begin(), v.end(), in_cycle);
        break;
      }
      case FKind::FPlus: {
        const auto& sub = sat(f->lhs);
        bool in_cycle = std::find(sub.begin() + s, sub.end(), 1) != sub.end();
        if (!in_cycle) {
          // holds where a stem witness lies ahead
          for (size_t i = s; i-- > 0;) v[i] = sub[i] || v[i + 1];
        }
        break;
      }
    }
    return memo.emplace(f.get(), std::move(v)).first->second;
  }
};

}  // namespace

bool eval(const Formula& f, const LassoRun& run) {
  if (run.cycle.empty()) throw std::invalid_argument("eval: cycle must be nonempty");
  Evaluator ev(run);
  return ev.sat(f)[0];
}

// --- propositional denotation -----------------------------------------------

std::set<Label> prop_denote(const Formula& psi, const std::vector<Label>& sigma) {
  std::set<Label> all(sigma.begin(), sigma.end());
  switch (psi->kind) {
    case FKind::True: return all;
    case FKind::Diamond: {
      if (psi->lhs->kind != FKind::True) break;
      std::set<Label> out;
      if (all.count(psi->action)) out.insert(psi->action);
      return out;
    }
    case FKind::Not: {
      auto sub = prop_denote(psi->lhs, sigma);
      std::set<Label> out;
      for (const Label& l : all)
        if (!sub.count(l)) out.insert(l);
      return out;
    }
    case FKind::And: {
      auto a = prop_denote(psi->lhs, sigma);
      auto b = prop_denote(psi->rhs, sigma);
      std::set<Label> out;
      for (const Label& l : a)
        if (b.count(l)) out.insert(l);
      return out;
    }
    default: break;
  }
  throw std::invalid_argument("prop_denote: not a propositional formula");
}

std::vector<RuleId> ac_rules(const Mbrs& m, const Formula& psi) {
  std::vector<Label> sigma = m.alphabet;
  for (const Rule& r : m.rules)
    if (std::find(sigma.begin(), sigma.end(), r.label) == sigma.end())
      sigma.push_back(r.label);
  auto denote = prop_denote(psi, sigma);
  std::vector<RuleId> out;
  for (RuleId r = 0; r < m.rules.size(); ++r)
    if (denote.count(m.rules[r].label)) out.push_back(r);
  return out;
}

// --- fragment ----------------------------------------------------------------

namespace {

// F psi / GF psi over propositional psi; G psi and F(G psi) are derivable
// sugar (!F!psi and !GF!psi).
bool fragment_atom(const Formula& f) {
  switch (f->kind) {
    case FKind::F:
      if (is_propositional(f->lhs)) return true;
      if (f->lhs->kind == FKind::G && is_propositional(f->lhs->lhs)) return true;
      return false;
    case FKind::GF: return is_propositional(f->lhs);
    case FKind::G:
      if (is_propositional(f->lhs)) return true;
      if (f->lhs->kind == FKind::F && is_propositional(f->lhs->lhs)) return true;
      return false;
    default: return false;
  }
}

}  // namespace

bool in_fragment(const Formula& f) {
  switch (f->kind) {
    case FKind::Not: return in_fragment(f->lhs);
    case FKind::And:
    case FKind::Or: return in_fragment(f->lhs) && in_fragment(f->rhs);
    default: return fragment_atom(f);
  }
}

bool in_extended_fragment(const Formula& f) {
  switch (f->kind) {
    case FKind::Not: return in_extended_fragment(f->lhs);
    case FKind::And:
    case FKind::Or: return in_extended_fragment(f->lhs) && in_extended_fragment(f->rhs);
    case FKind::FPlus: return is_propositional(f->lhs);
    default: return fragment_atom(f);
  }
}

// --- normalization -----------------------------------------------------------

Formula Disjunct::as_formula() const {
  Formula out = nullptr;
  auto add = [&](Formula f) { out = out ? FormulaNode::conj(out, f) : f; };
  for (const Formula& p : fplus) add(FormulaNode::fplus(p));
  for (const Formula& p : gf) add(FormulaNode::inf_often(p));
  add(FormulaNode::always(g));
  return out;
}

namespace {

// Atom over the F+/GF/G basis plus the intermediate F and FG forms.
enum class AtomKind { F, G, GF, FG };

struct NnfNode;
using Nnf = std::shared_ptr<const NnfNode>;

struct NnfNode {
  bool is_atom;
  AtomKind atom;
  Formula psi;       // propositional argument of the atom
  bool conj;         // when not an atom
  Nnf lhs, rhs;
};

Nnf atom(AtomKind k, Formula psi) {
  return std::make_shared<NnfNode>(NnfNode{true, k, std::move(psi), false, nullptr, nullptr});
}

Formula prop_neg(const Formula& psi) {
  if (psi->kind == FKind::Not) return psi->lhs;
  return FormulaNode::negate(psi);
}
Nnf combine(bool conj, Nnf a, Nnf b) {
  return std::make_shared<NnfNode>(
      NnfNode{false, AtomKind::F, nullptr, conj, std::move(a), std::move(b)});
}

Nnf to_nnf(const Formula& f, bool negated) {
  switch (f->kind) {
    case FKind::Not: return to_nnf(f->lhs, !negated);
    case FKind::And:
    case FKind::Or: {
      bool conj = (f->kind == FKind::And) != negated;
      return combine(conj, to_nnf(f->lhs, negated), to_nnf(f->rhs, negated));
    }
    case FKind::F:
      if (f->lhs->kind == FKind::G) {  // FG psi; !FG psi = GF !psi
        const Formula& psi = f->lhs->lhs;
        return negated ? atom(AtomKind::GF, prop_neg(psi)) : atom(AtomKind::FG, psi);
      }
      return negated ? atom(AtomKind::G, prop_neg(f->lhs)) : atom(AtomKind::F, f->lhs);
    case FKind::G:
      if (f->lhs->kind == FKind::F) {  // G F psi; !GF psi = FG !psi
        const Formula& psi = f->lhs->lhs;
        return negated ? atom(AtomKind::FG, prop_neg(psi)) : atom(AtomKind::GF, psi);
      }
      return negated ? atom(AtomKind::F, prop_neg(f->lhs)) : atom(AtomKind::G, f->lhs);
    case FKind::GF:
      return negated ? atom(AtomKind::FG, prop_neg(f->lhs)) : atom(AtomKind::GF, f->lhs);
    default:
      throw std::invalid_argument("negate_to_dnf: not in the fragment");
  }
}

struct BasisAtom {
  AtomKind kind;  // F+, GF or G (F+ reuses AtomKind::F)
  Formula psi;
};

void distribute(const Nnf& n, std::vector<std::vector<BasisAtom>>& out, size_t limit) {
  if (n->is_atom) {
    switch (n->atom) {
      case AtomKind::F:
        // F psi = F+ psi | GF psi
        out.push_back({{AtomKind::F, n->psi}});
        out.push_back({{AtomKind::GF, n->psi}});
        break;
      case AtomKind::FG:
        // FG psi = F+ !psi | G psi  (on infinite runs)
        out.push_back({{AtomKind::F, prop_neg(n->psi)}});
        out.push_back({{AtomKind::G, n->psi}});
        break;
      case AtomKind::G:
      case AtomKind::GF:
        out.push_back({{n->atom, n->psi}});
        break;
    }
  } else if (!n->conj) {
    distribute(n->lhs, out, limit);
    distribute(n->rhs, out, limit);
  } else {
    std::vector<std::vector<BasisAtom>> a, b;
    distribute(n->lhs, a, limit);
    distribute(n->rhs, b, limit);
    if (a.size() * b.size() > limit) throw std::length_error("negate_to_dnf: disjunct limit");
    for (const auto& x : a)
      for (const auto& y : b) {
        auto merged = x;
        merged.insert(merged.end(), y.begin(), y.end());
        out.push_back(std::move(merged));
      }
  }
  if (out.size() > limit) throw std::length_error("negate_to_dnf: disjunct limit");
}

}  // namespace

std::vector<Disjunct> negate_to_dnf(const Formula& f, size_t limit) {
  if (!in_fragment(f)) throw std::invalid_argument("negate_to_dnf: not in the fragment");
  Nnf nnf = to_nnf(f, /*negated=*/true);
  std::vector<std::vector<BasisAtom>> conjs;
  distribute(nnf, conjs, limit);
  std::vector<Disjunct> out;
  for (auto& conj : conjs) {
    Disjunct d;
    d.g = FormulaNode::truth();
    for (auto& a : conj) {
      switch (a.kind) {
        case AtomKind::F: d.fplus.push_back(a.psi); break;
        case AtomKind::GF: d.gf.push_back(a.psi); break;
        case AtomKind::G:
          // G p1 & G p2 = G (p1 & p2)
          d.g = d.g->kind == FKind::True ? a.psi : FormulaNode::conj(d.g, a.psi);
          break;
        case AtomKind::FG: break;  // unreachable: expanded in distribute
      }
    }
    out.push_back(std::move(d));
  }
  return out;
}

DisjunctMbrs disjunct_to_mbrs(const Mbrs& m, const Disjunct& d) {
  DisjunctMbrs out;
  out.mbrs = m;
  uint32_t m1 = uint32_t(d.fplus.size());
  uint32_t m2 = uint32_t(d.gf.size());
  uint32_t n = m1 + m2 + 1;
  if (n > 31) throw std::invalid_argument("disjunct_to_mbrs: too many components");
  out.mbrs.n = n;
  for (KSet& k : out.mbrs.cmp) k = KSet();
  auto mark = [&](const Formula& psi, uint32_t idx) {
    for (RuleId r : ac_rules(m, psi)) out.mbrs.cmp[r] = out.mbrs.cmp[r].with(idx);
  };
  for (uint32_t i = 0; i < m1; ++i) mark(d.fplus[i], i + 1);
  for (uint32_t j = 0; j < m2; ++j) mark(d.gf[j], m1 + j + 1);
  mark(FormulaNode::negate(d.g), m1 + m2 + 1);
  out.k = KSet::full(m1 + m2);
  out.komega = KSet::full(m1 + m2).minus(KSet::full(m1));
  return out;
}

// --- parser -------------------------------------------------------------------

namespace {

struct FormulaParser {
  std::string_view text;
  size_t pos = 0;

  void skip_ws() {
    while (pos < text.size() && std::isspace((unsigned char)text[pos])) ++pos;
  }

  bool peek(char c) {
    skip_ws();
    return pos < text.size() && text[pos] == c;
  }

  bool eat(char c) {
    if (peek(c)) {
      ++pos;
      return true;
    }
    return false;
  }

  std::string word() {
    skip_ws();
    size_t start = pos;
    while (pos < text.size() && std::isalnum((unsigned char)text[pos])) ++pos;
    return std::string(text.substr(start, pos - start));
  }

  Formula unary() {
    skip_ws();
    if (pos >= text.size()) throw ParseError("unexpected end of formula", pos);
    if (eat('(')) {
      Formula f = disjunction();
      if (!eat(')')) throw ParseError("expected ')'", pos);
      return f;
    }
    if (eat('!')) return FormulaNode::negate(unary());
    if (eat('<')) {
      std::string a = word();
      if (a.empty()) throw ParseError("expected action name", pos);
      if (!eat('>')) throw ParseError("expected '>'", pos);
      return FormulaNode::diamond(Label::act(intern(a)));
    }
    size_t save = pos;
    std::string w = word();
    if (w == "true") return FormulaNode::truth();
    if (w == "F") {
      if (pos < text.size() && text[pos] == '+') {
        ++pos;
        return FormulaNode::fplus(unary());
      }
      return FormulaNode::eventually(unary());
    }
    if (w == "G") return FormulaNode::always(unary());
    if (w == "GF") return FormulaNode::inf_often(unary());
    if (w == "FG") return FormulaNode::eventually(FormulaNode::always(unary()));
    throw ParseError("unexpected token '" + w + "'", save);
  }

  Formula conjunction() {
    Formula f = unary();
    while (eat('&')) f = FormulaNode::conj(f, unary());
    return f;
  }

  Formula until_level() {
    Formula f = conjunction();
    skip_ws();
    if (pos < text.size() && text[pos] == 'U' &&
        (pos + 1 == text.size() || !std::isalnum((unsigned char)text[pos + 1]))) {
      ++pos;
      return FormulaNode::until(f, until_level());
    }
    return f;
  }

  Formula disjunction() {
    Formula f = until_level();
    while (eat('|')) f = FormulaNode::disj(f, until_level());
    return f;
  }

  Formula run() {
    Formula f = disjunction();
    skip_ws();
    if (pos != text.size()) throw ParseError("trailing input", pos);
    return f;
  }
};

}  // namespace

Formula parse_formula(std::string_view text) {
  FormulaParser p{text};
  return p.run();
}

}  // namespace prs
