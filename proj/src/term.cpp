#include "prs/term.hpp"

#include <algorithm>
#include <cassert>
#include <cctype>
#include <deque>
#include <functional>
#include <map>
#include <mutex>
#include <stdexcept>
#include <unordered_map>

namespace prs {

namespace {

struct Interner {
  std::mutex mu;
  std::deque<std::string> names;  // deque: references stay valid while growing
  std::unordered_map<std::string, Sym> ids;

  Interner() {
    // Reserved symbols get the first two ids.
    names.push_back("_ZF_");
    ids.emplace("_ZF_", 0);
    names.push_back("_ZINF_");
    ids.emplace("_ZINF_", 1);
  }
};

Interner& interner() {
  static Interner g;
  return g;
}

struct TermData {
  std::vector<SpineCount> spines;  // sorted, counts > 0
  uint32_t n_vars = 0;             // variable occurrences
  bool parallel = true;            // devoid of sequential composition
  bool sequential = true;          // devoid of parallel composition
};

struct SpineData {
  Sym head;
  uint32_t tail;  // term id
};

struct SpineKeyHash {
  size_t operator()(const std::pair<Sym, uint32_t>& k) const {
    return std::hash<uint64_t>{}((uint64_t(k.first) << 32) | k.second);
  }
};

struct VecHash {
  size_t operator()(const std::vector<SpineCount>& v) const {
    size_t h = v.size();
    for (const auto& sc : v) {
      h ^= (size_t(sc.spine) * 0x9e3779b97f4a7c15ull + sc.count) + (h << 6) + (h >> 2);
    }
    return h;
  }
};

struct VecEq {
  bool operator()(const std::vector<SpineCount>& a, const std::vector<SpineCount>& b) const {
    if (a.size() != b.size()) return false;
    for (size_t i = 0; i < a.size(); ++i)
      if (a[i].spine != b[i].spine || a[i].count != b[i].count) return false;
    return true;
  }
};

struct Pool {
  std::mutex mu;
  std::deque<TermData> terms;   // deque: references stay valid while growing
  std::deque<SpineData> spine_data;
  std::unordered_map<std::pair<Sym, uint32_t>, uint32_t, SpineKeyHash> spine_ids;
  std::unordered_map<std::vector<SpineCount>, uint32_t, VecHash, VecEq> term_ids;

  Pool() {
    terms.push_back(TermData{});  // id 0 = eps
    term_ids.emplace(std::vector<SpineCount>{}, 0u);
  }
};

Pool& pool() {
  static Pool g;
  return g;
}

uint32_t intern_spine_locked(Pool& p, Sym head, uint32_t tail) {
  auto key = std::make_pair(head, tail);
  auto it = p.spine_ids.find(key);
  if (it != p.spine_ids.end()) return it->second;
  uint32_t id = uint32_t(p.spine_data.size());
  p.spine_data.push_back(SpineData{head, tail});
  p.spine_ids.emplace(key, id);
  return id;
}

int compare_terms_locked(Pool& p, uint32_t a, uint32_t b);

int compare_spines_locked(Pool& p, uint32_t a, uint32_t b) {
  if (a == b) return 0;
  const SpineData& sa = p.spine_data[a];
  const SpineData& sb = p.spine_data[b];
  const std::string& na = interner().names[sa.head];
  const std::string& nb = interner().names[sb.head];
  if (int c = na.compare(nb); c != 0) return c < 0 ? -1 : 1;
  return compare_terms_locked(p, sa.tail, sb.tail);
}

int compare_terms_locked(Pool& p, uint32_t a, uint32_t b) {
  if (a == b) return 0;
  const auto& va = p.terms[a].spines;
  const auto& vb = p.terms[b].spines;
  size_t n = std::min(va.size(), vb.size());
  for (size_t i = 0; i < n; ++i) {
    if (int c = compare_spines_locked(p, va[i].spine, vb[i].spine); c != 0) return c;
    if (va[i].count != vb[i].count) return va[i].count < vb[i].count ? -1 : 1;
  }
  if (va.size() != vb.size()) return va.size() < vb.size() ? -1 : 1;
  return 0;
}

uint32_t intern_term_locked(Pool& p, std::vector<SpineCount> sc) {
  std::sort(sc.begin(), sc.end(), [&](const SpineCount& x, const SpineCount& y) {
    return compare_spines_locked(p, x.spine, y.spine) < 0;
  });
  // merge equal spines
  std::vector<SpineCount> merged;
  for (const auto& e : sc) {
    if (e.count == 0) continue;
    if (!merged.empty() && merged.back().spine == e.spine)
      merged.back().count += e.count;
    else
      merged.push_back(e);
  }
  auto it = p.term_ids.find(merged);
  if (it != p.term_ids.end()) return it->second;
  TermData td;
  td.spines = merged;
  uint32_t n_spines = 0;
  for (const auto& e : merged) {
    const SpineData& sd = p.spine_data[e.spine];
    n_spines += e.count;
    td.n_vars += e.count * (1 + p.terms[sd.tail].n_vars);
    if (sd.tail != 0) td.parallel = false;
    if (!p.terms[sd.tail].sequential) td.sequential = false;
  }
  if (n_spines > 1) td.sequential = false;
  uint32_t id = uint32_t(p.terms.size());
  p.terms.push_back(td);
  p.term_ids.emplace(std::move(merged), id);
  return id;
}

}  // namespace

Sym intern(std::string_view name) {
  Interner& in = interner();
  std::lock_guard<std::mutex> lock(in.mu);
  auto it = in.ids.find(std::string(name));
  if (it != in.ids.end()) return it->second;
  Sym id = Sym(in.names.size());
  in.names.emplace_back(name);
  in.ids.emplace(in.names.back(), id);
  return id;
}

const std::string& sym_name(Sym s) { return interner().names[s]; }
Sym zhat_f() { return 0; }
Sym zhat_inf() { return 1; }

VarKind var_kind(Sym s) {
  if (s == 0) return VarKind::ZhatF;
  if (s == 1) return VarKind::ZhatInf;
  return VarKind::User;
}

bool valid_user_name(std::string_view name) {
  if (name.empty() || !std::isalpha((unsigned char)name[0])) return false;
  for (char c : name)
    if (!std::isalnum((unsigned char)c) && c != '_') return false;
  return name != "eps";
}

Term Term::var(Sym v) { return seq(v, Term::eps()); }

Term Term::seq(Sym head, Term tail) {
  Pool& p = pool();
  std::lock_guard<std::mutex> lock(p.mu);
  uint32_t sp = intern_spine_locked(p, head, tail.id_);
  return Term(intern_term_locked(p, {{sp, 1}}));
}

Term Term::par(Term a, Term b) {
  if (a.is_eps()) return b;
  if (b.is_eps()) return a;
  Pool& p = pool();
  std::lock_guard<std::mutex> lock(p.mu);
  std::vector<SpineCount> sc = p.terms[a.id_].spines;
  for (const auto& e : p.terms[b.id_].spines) sc.push_back(e);
  return Term(intern_term_locked(p, std::move(sc)));
}

Term Term::par(const std::vector<Term>& ts) {
  Term acc = Term::eps();
  for (Term t : ts) acc = par(acc, t);
  return acc;
}

bool Term::is_var() const {
  const auto& sc = spines();
  return sc.size() == 1 && sc[0].count == 1 && spine_at(sc[0].spine).tail_id == 0;
}

std::optional<Sym> Term::as_var() const {
  if (!is_var()) return std::nullopt;
  return spine_at(spines()[0].spine).head;
}

bool Term::is_parallel() const { return pool().terms[id_].parallel; }
bool Term::is_sequential() const { return pool().terms[id_].sequential; }
uint32_t Term::size() const { return pool().terms[id_].n_vars; }

bool Term::contains(Sym v) const {
  for (const auto& sc : spines()) {
    Spine s = spine_at(sc.spine);
    if (s.head == v) return true;
    if (Term::from_id(s.tail_id).contains(v)) return true;
  }
  return false;
}

const std::vector<SpineCount>& Term::spines() const { return pool().terms[id_].spines; }

uint32_t Term::spine_total() const {
  uint32_t n = 0;
  for (const auto& sc : spines()) n += sc.count;
  return n;
}

int Term::compare(Term a, Term b) {
  Pool& p = pool();
  std::lock_guard<std::mutex> lock(p.mu);
  return compare_terms_locked(p, a.id_, b.id_);
}

Spine spine_at(uint32_t spine_id) {
  const SpineData& sd = pool().spine_data[spine_id];
  return Spine{sd.head, sd.tail};
}

Term spine_term(uint32_t spine_id) {
  Pool& p = pool();
  std::lock_guard<std::mutex> lock(p.mu);
  return Term::from_id(intern_term_locked(p, {{spine_id, 1}}));
}

int compare_spines(uint32_t a, uint32_t b) {
  Pool& p = pool();
  std::lock_guard<std::mutex> lock(p.mu);
  return compare_spines_locked(p, a, b);
}

Term make_term(std::vector<SpineCount> sc) {
  Pool& p = pool();
  std::lock_guard<std::mutex> lock(p.mu);
  return Term::from_id(intern_term_locked(p, std::move(sc)));
}

std::optional<Term> par_minus(Term a, Term b) {
  std::vector<SpineCount> out;
  const auto& va = a.spines();
  const auto& vb = b.spines();
  size_t j = 0;
  for (const auto& ea : va) {
    uint32_t take = 0;
    while (j < vb.size() && compare_spines(vb[j].spine, ea.spine) < 0) return std::nullopt;
    if (j < vb.size() && vb[j].spine == ea.spine) {
      take = vb[j].count;
      ++j;
    }
    if (take > ea.count) return std::nullopt;
    if (ea.count > take) out.push_back({ea.spine, ea.count - take});
  }
  if (j < vb.size()) return std::nullopt;
  return make_term(std::move(out));
}

bool par_includes(Term a, Term b) { return par_minus(a, b).has_value(); }

namespace {

// Enumerate the nonempty sub-multisets of the spine multiset of t,
// emitting each as a canonical term.
void for_each_submultiset(Term t, const std::function<void(Term)>& fn) {
  const auto& sc = t.spines();
  std::vector<uint32_t> pick(sc.size(), 0);
  while (true) {
    // advance counter
    size_t i = 0;
    while (i < pick.size()) {
      if (pick[i] < sc[i].count) {
        ++pick[i];
        break;
      }
      pick[i] = 0;
      ++i;
    }
    if (i == pick.size()) break;
    std::vector<SpineCount> sub;
    for (size_t k = 0; k < pick.size(); ++k)
      if (pick[k] > 0) sub.push_back({sc[k].spine, pick[k]});
    fn(make_term(std::move(sub)));
  }
}

}  // namespace

std::set<Term> subterms(Term t) {
  std::set<Term> out;
  if (t.is_eps()) {
    out.insert(t);
    return out;
  }
  const auto& sc = t.spines();
  if (t.spine_total() == 1) {
    out.insert(t);
    Term tail = Term::from_id(spine_at(sc[0].spine).tail_id);
    if (!tail.is_eps()) {
      auto inner = subterms(tail);
      out.insert(inner.begin(), inner.end());
    }
    return out;
  }
  for_each_submultiset(t, [&](Term sub) {
    if (sub.spine_total() == 1) {
      auto inner = subterms(sub);
      out.insert(inner.begin(), inner.end());
    } else {
      out.insert(sub);
    }
  });
  return out;
}

bool is_subterm(Term st, Term t) {
  if (st == t) return true;
  if (st.is_eps()) return false;  // eps is a subterm of eps only
  if (t.is_eps()) return false;
  if (t.spine_total() > 1 && !st.is_eps() && par_includes(t, st)) return true;
  for (const auto& sc : t.spines()) {
    Term tail = Term::from_id(spine_at(sc.spine).tail_id);
    if (!tail.is_eps() && is_subterm(st, tail)) return true;
  }
  return false;
}

std::set<Term> substitute(Term t, Term st, Term repl) {
  if (!is_subterm(st, t)) throw std::invalid_argument("substitute: not a subterm");
  std::set<Term> out;
  if (st == t) {
    out.insert(repl);
    return out;
  }
  // st is a proper subterm, so t != eps here.
  if (t.spine_total() > 1 && par_includes(t, st)) {
    Term rest = *par_minus(t, st);
    out.insert(Term::par(rest, repl));
  }
  // occurrences inside one spine's tail
  for (const auto& sc : t.spines()) {
    Spine sp = spine_at(sc.spine);
    Term tail = Term::from_id(sp.tail_id);
    if (tail.is_eps() || !is_subterm(st, tail)) continue;
    Term rest = *par_minus(t, spine_term(sc.spine));
    for (Term inner : substitute(tail, st, repl))
      out.insert(Term::par(rest, Term::seq(sp.head, inner)));
  }
  return out;
}

std::set<Term> seq_set(Term t) {
  std::set<Term> out;
  for (const auto& sc : t.spines()) {
    Spine sp = spine_at(sc.spine);
    Term tail = Term::from_id(sp.tail_id);
    if (tail.is_eps()) {
      out.insert(Term::var(sp.head));
    } else {
      for (Term inner : seq_set(tail)) out.insert(Term::seq(sp.head, inner));
    }
  }
  return out;
}

Sym last(Term t) {
  if (t.is_eps() || !t.is_sequential())
    throw std::invalid_argument("last: not a nonempty sequential term");
  Spine sp = spine_at(t.spines()[0].spine);
  Term tail = Term::from_id(sp.tail_id);
  return tail.is_eps() ? sp.head : last(tail);
}

Term compose(Term a, Term b) {
  if (a.is_eps() || b.is_eps() || !a.is_sequential() || !b.is_sequential())
    throw std::invalid_argument("compose: needs nonempty sequential terms");
  // Replaces the innermost variable of a with b, so that
  // compose(a, b) is the unique element of substitute(a, last(a), b).
  Spine sp = spine_at(a.spines()[0].spine);
  Term tail = Term::from_id(sp.tail_id);
  if (tail.is_eps()) return b;
  return Term::seq(sp.head, compose(tail, b));
}

std::string Term::str() const {
  if (is_eps()) return "eps";
  std::string out;
  bool first = true;
  for (const auto& sc : spines()) {
    Spine sp = spine_at(sc.spine);
    Term tail = Term::from_id(sp.tail_id);
    for (uint32_t k = 0; k < sc.count; ++k) {
      if (!first) out += " || ";
      first = false;
      out += sym_name(sp.head);
      if (!tail.is_eps()) {
        out += ".(";
        out += tail.str();
        out += ")";
      }
    }
  }
  return out;
}

namespace {

struct TermParser {
  std::string_view text;
  size_t pos = 0;

  void skip_ws() {
    while (pos < text.size() && std::isspace((unsigned char)text[pos])) ++pos;
  }

  bool eat(char c) {
    skip_ws();
    if (pos < text.size() && text[pos] == c) {
      ++pos;
      return true;
    }
    return false;
  }

  std::string ident() {
    skip_ws();
    size_t start = pos;
    if (pos < text.size() && (std::isalpha((unsigned char)text[pos]) || text[pos] == '_')) {
      ++pos;
      while (pos < text.size() && (std::isalnum((unsigned char)text[pos]) || text[pos] == '_'))
        ++pos;
    }
    if (start == pos) throw ParseError("expected identifier", pos);
    return std::string(text.substr(start, pos - start));
  }

  Term primary() {
    std::string name = ident();
    if (name == "eps") return Term::eps();
    if (name != "_ZF_" && name != "_ZINF_" && !valid_user_name(name))
      throw ParseError("invalid variable name '" + name + "'", pos);
    Sym v = intern(name);
    skip_ws();
    if (pos < text.size() && text[pos] == '.') {
      ++pos;
      if (!eat('(')) throw ParseError("expected '(' after '.'", pos);
      Term tail = parallel();
      if (!eat(')')) throw ParseError("expected ')'", pos);
      return Term::seq(v, tail);
    }
    return Term::var(v);
  }

  Term parallel() {
    Term acc = primary();
    while (true) {
      skip_ws();
      if (pos + 1 < text.size() && text[pos] == '|' && text[pos + 1] == '|') {
        pos += 2;
        acc = Term::par(acc, primary());
      } else {
        break;
      }
    }
    return acc;
  }

  Term run() {
    Term t = parallel();
    skip_ws();
    if (pos != text.size()) throw ParseError("trailing input", pos);
    return t;
  }
};

}  // namespace

Term parse_term(std::string_view text) {
  TermParser p{text};
  return p.run();
}

}  // namespace prs
