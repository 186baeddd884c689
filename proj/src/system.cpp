#include "prs/system.hpp"

#include <algorithm>
#include <cassert>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

namespace prs {

std::vector<uint32_t> KSet::members() const {
  std::vector<uint32_t> out;
  for (uint32_t i = 1; i <= 32; ++i)
    if (contains(i)) out.push_back(i);
  return out;
}

std::string KSet::str() const {
  std::string out = "{";
  bool first = true;
  for (uint32_t i : members()) {
    if (!first) out += ",";
    first = false;
    out += std::to_string(i);
  }
  return out + "}";
}

std::string Label::str() const {
  switch (kind) {
    case Kind::Action: return sym_name(action);
    case Kind::Kset: return k1.str();
    case Kind::Kpair: return k1.str() + "/" + k2.str();
  }
  return "?";
}

RuleShape Rule::shape() const {
  auto lv = lhs.as_var();
  auto rv = rhs.as_var();
  if (lv) {
    if (rhs.is_eps() || rv) return RuleShape::Both;
    // X -> Y.(Z)
    const auto& sc = rhs.spines();
    if (rhs.spine_total() == 1) {
      Spine sp = spine_at(sc[0].spine);
      if (Term::from_id(sp.tail_id).is_var()) return RuleShape::Push;
    }
  }
  if (rv && lhs.spine_total() == 1) {
    // X.(Y) -> Z
    Spine sp = spine_at(lhs.spines()[0].spine);
    if (Term::from_id(sp.tail_id).is_var()) return RuleShape::Pop;
  }
  if (lhs.is_parallel() && rhs.is_parallel()) return RuleShape::Par;
  return RuleShape::General;
}

bool Rule::is_par() const {
  RuleShape s = shape();
  return s == RuleShape::Par || s == RuleShape::Both;
}

bool Rule::is_seq() const {
  RuleShape s = shape();
  return s == RuleShape::Push || s == RuleShape::Pop || s == RuleShape::Both;
}

RuleId Mbrs::add_rule(Rule r, KSet components) {
  if (r.lhs.is_eps()) throw std::invalid_argument("rule lhs must not be eps");
  rules.push_back(std::move(r));
  cmp.push_back(components);
  return RuleId(rules.size() - 1);
}

void Mbrs::add_var(Sym v) {
  if (!has_var(v)) vars.push_back(v);
}

bool Mbrs::has_var(Sym v) const {
  return std::find(vars.begin(), vars.end(), v) != vars.end();
}

std::optional<RuleId> Mbrs::find_rule(std::string_view name) const {
  for (RuleId i = 0; i < rules.size(); ++i)
    if (rules[i].name == name) return i;
  return std::nullopt;
}

std::optional<RuleId> Mbrs::find_rule(Term lhs, const Label& label, Term rhs) const {
  for (RuleId i = 0; i < rules.size(); ++i)
    if (rules[i].lhs == lhs && rules[i].label == label && rules[i].rhs == rhs) return i;
  return std::nullopt;
}

std::vector<RuleId> Mbrs::component(uint32_t i) const {
  std::vector<RuleId> out;
  for (RuleId r = 0; r < rules.size(); ++r)
    if (cmp[r].contains(i)) out.push_back(r);
  return out;
}

SystemClass classify(const Mbrs& m) {
  bool all_par = true, all_seq = true, normal = true;
  for (const Rule& r : m.rules) {
    bool p = r.is_par(), s = r.is_seq();
    all_par &= p;
    all_seq &= s;
    normal &= (p || s);
  }
  if (all_par) return SystemClass::Parallel;
  if (all_seq) return SystemClass::Sequential;
  if (normal) return SystemClass::NormalForm;
  return SystemClass::General;
}

bool in_normal_form(const Mbrs& m) { return classify(m) != SystemClass::General; }

const char* to_string(SystemClass c) {
  switch (c) {
    case SystemClass::Parallel: return "parallel";
    case SystemClass::Sequential: return "sequential";
    case SystemClass::NormalForm: return "normal_form";
    case SystemClass::General: return "general";
  }
  return "?";
}

// --- LTS semantics ----------------------------------------------------------

namespace {

using SuccSet = std::set<std::pair<RuleId, Term>>;

void successors_rec(const Mbrs& m, Term t,
                    std::map<Term, std::vector<std::pair<RuleId, Term>>>& memo);

const std::vector<std::pair<RuleId, Term>>& successors_memo(
    const Mbrs& m, Term t, std::map<Term, std::vector<std::pair<RuleId, Term>>>& memo) {
  auto it = memo.find(t);
  if (it == memo.end()) {
    successors_rec(m, t, memo);
    it = memo.find(t);
  }
  return it->second;
}

void successors_rec(const Mbrs& m, Term t,
                    std::map<Term, std::vector<std::pair<RuleId, Term>>>& memo) {
  SuccSet out;
  // top-level applications: one occurrence of the lhs rewritten in place
  for (RuleId r = 0; r < m.rules.size(); ++r) {
    if (auto rest = par_minus(t, m.rules[r].lhs))
      out.emplace(r, Term::par(*rest, m.rules[r].rhs));
  }
  // rewriting inside one spine's tail
  for (const auto& sc : t.spines()) {
    Spine sp = spine_at(sc.spine);
    Term tail = Term::from_id(sp.tail_id);
    if (tail.is_eps()) continue;
    Term rest = *par_minus(t, spine_term(sc.spine));
    for (const auto& [r, tail2] : successors_memo(m, tail, memo))
      out.emplace(r, Term::par(rest, Term::seq(sp.head, tail2)));
  }
  memo.emplace(t, std::vector<std::pair<RuleId, Term>>(out.begin(), out.end()));
}

}  // namespace

std::vector<std::pair<RuleId, Term>> successors(const Mbrs& m, Term t) {
  std::map<Term, std::vector<std::pair<RuleId, Term>>> memo;
  return successors_memo(m, t, memo);
}

std::vector<Term> apply_rule(const Mbrs& m, Term t, RuleId r) {
  std::vector<Term> out;
  for (const auto& [rr, t2] : successors(m, t))
    if (rr == r) out.push_back(t2);
  return out;
}

bool is_step(const Mbrs& m, Term from, RuleId r, Term to) {
  auto ts = apply_rule(m, from, r);
  return std::find(ts.begin(), ts.end(), to) != ts.end();
}

std::vector<uint32_t> application_levels(const Mbrs& m, Term from, RuleId r, Term to) {
  if (!is_step(m, from, r, to)) throw std::invalid_argument("not a valid step");
  std::set<uint32_t> levels;
  std::function<void(Term, Term, uint32_t)> walk = [&](Term t, Term t2, uint32_t depth) {
    const Rule& rule = m.rules[r];
    if (auto rest = par_minus(t, rule.lhs)) {
      if (Term::par(*rest, rule.rhs) == t2) levels.insert(depth);
    }
    for (const auto& sc : t.spines()) {
      Spine sp = spine_at(sc.spine);
      Term tail = Term::from_id(sp.tail_id);
      if (tail.is_eps()) continue;
      Term rest = *par_minus(t, spine_term(sc.spine));
      // the changed spine must account exactly for the difference
      auto diff = par_minus(t2, rest);
      if (!diff || diff->spine_total() != 1) continue;
      Spine dsp = spine_at(diff->spines()[0].spine);
      if (dsp.head != sp.head) continue;
      Term tail2 = Term::from_id(dsp.tail_id);
      if (is_step(m, tail, r, tail2)) walk(tail, tail2, depth + 1);
    }
  };
  walk(from, to, 0);
  return std::vector<uint32_t>(levels.begin(), levels.end());
}

// --- derivations ------------------------------------------------------------

std::vector<RuleId> Derivation::rule_seq() const {
  std::vector<RuleId> out;
  out.reserve(steps.size());
  for (const Step& s : steps) out.push_back(s.rule);
  return out;
}

bool replay(const Mbrs& m, const Derivation& d) {
  Term cur = d.start;
  for (const Step& s : d.steps) {
    if (s.rule >= m.rules.size()) return false;
    if (!is_step(m, cur, s.rule, s.to)) return false;
    cur = s.to;
  }
  return true;
}

KSet maximal(const Mbrs& m, const std::vector<RuleId>& seq) {
  KSet out;
  for (RuleId r : seq) {
    if (r >= m.rules.size()) throw std::invalid_argument("unknown rule id");
    out = out | m.cmp[r];
  }
  return out;
}

KSet inf_maximal(const Mbrs& m, const LassoSequence& seq) {
  return maximal(m, seq.cycle);
}

std::vector<std::vector<RuleId>> interleavings(const std::vector<RuleId>& s1,
                                               const std::vector<RuleId>& s2,
                                               size_t bound) {
  if (s1.size() + s2.size() > bound)
    throw std::length_error("interleavings: length bound exceeded");
  std::vector<std::vector<RuleId>> out;
  std::vector<RuleId> cur;
  std::function<void(size_t, size_t)> rec = [&](size_t i, size_t j) {
    if (i == s1.size() && j == s2.size()) {
      out.push_back(cur);
      return;
    }
    if (i < s1.size()) {
      cur.push_back(s1[i]);
      rec(i + 1, j);
      cur.pop_back();
    }
    if (j < s2.size()) {
      cur.push_back(s2[j]);
      rec(i, j + 1);
      cur.pop_back();
    }
  };
  rec(0, 0);
  // the inductive definition produces a set
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

// --- subderivations ---------------------------------------------------------

namespace {

struct ClauseReadings {
  bool untouched = false;       // clause 4
  bool consumed = false;        // clause 2 (spine itself rewritten away)
  std::optional<Term> inner;    // clause 3: new tail after rewriting inside
};

ClauseReadings classify_step(const Mbrs& m, Term cur, Sym head, Term tail, RuleId r,
                             Term next) {
  ClauseReadings out;
  Term sp = Term::seq(head, tail);
  auto rest = par_minus(cur, sp);
  if (!rest) return out;  // occurrence vanished: caller reports
  // clause 4: the step is explainable with the tracked occurrence untouched
  if (auto next_rest = par_minus(next, sp)) {
    if (is_step(m, *rest, r, *next_rest)) out.untouched = true;
  }
  // clause 2: the rule consumed the spine itself
  if (m.rules[r].lhs == sp && Term::par(*rest, m.rules[r].rhs) == next) out.consumed = true;
  // clause 3: the rule rewrote inside the tail
  if (!tail.is_eps()) {
    if (auto diff = par_minus(next, *rest)) {
      if (diff->spine_total() == 1) {
        Spine dsp = spine_at(diff->spines()[0].spine);
        if (dsp.head == head) {
          Term tail2 = Term::from_id(dsp.tail_id);
          if (is_step(m, tail, r, tail2)) out.inner = tail2;
        }
      } else if (diff->is_eps()) {
        // impossible: a one-step rewrite of the spine leaves one spine or,
        // when the whole spine reduces, is covered by clause 2
      }
    }
  }
  return out;
}

}  // namespace

Derivation subderivation(const Mbrs& m, const Derivation& d, const SpineOccurrence& pivot) {
  if (pivot.prefix > d.steps.size()) throw std::invalid_argument("pivot prefix out of range");
  Term cur = pivot.prefix == 0 ? d.start : d.steps[pivot.prefix - 1].to;
  Term sp = Term::seq(pivot.head, pivot.tail);
  if (!par_includes(cur, sp)) throw std::invalid_argument("pivot occurrence not present");

  Derivation out;
  out.start = pivot.tail;
  Term tail = pivot.tail;
  for (size_t i = pivot.prefix; i < d.steps.size(); ++i) {
    if (tail.is_eps()) break;  // clause 1
    const Step& st = d.steps[i];
    ClauseReadings cr = classify_step(m, cur, pivot.head, tail, st.rule, st.to);
    if (cr.untouched) {
      // prefer the reading that leaves the tracked occurrence alone
    } else if (cr.inner) {
      out.steps.push_back(Step{st.rule, *cr.inner});
      tail = *cr.inner;
    } else if (cr.consumed) {
      break;  // clause 2
    } else {
      throw std::invalid_argument("derivation does not replay at the tracked occurrence");
    }
    cur = st.to;
  }
  return out;
}

std::vector<Derivation> subderivations_all(const Mbrs& m, const Derivation& d,
                                           const SpineOccurrence& pivot, size_t limit) {
  if (pivot.prefix > d.steps.size()) throw std::invalid_argument("pivot prefix out of range");
  Term start = pivot.prefix == 0 ? d.start : d.steps[pivot.prefix - 1].to;
  Term sp = Term::seq(pivot.head, pivot.tail);
  if (!par_includes(start, sp)) throw std::invalid_argument("pivot occurrence not present");

  std::vector<Derivation> out;
  struct Frame {
    size_t i;
    Term cur;
    Term tail;
    std::vector<Step> steps;
  };
  std::vector<Frame> stack{{pivot.prefix, start, pivot.tail, {}}};
  while (!stack.empty() && out.size() < limit) {
    Frame f = std::move(stack.back());
    stack.pop_back();
    if (f.tail.is_eps() || f.i == d.steps.size()) {
      out.push_back(Derivation{pivot.tail, std::move(f.steps)});
      continue;
    }
    const Step& st = d.steps[f.i];
    ClauseReadings cr = classify_step(m, f.cur, pivot.head, f.tail, st.rule, st.to);
    if (cr.consumed) out.push_back(Derivation{pivot.tail, f.steps});
    if (cr.untouched) stack.push_back(Frame{f.i + 1, st.to, f.tail, f.steps});
    if (cr.inner) {
      auto steps = f.steps;
      steps.push_back(Step{st.rule, *cr.inner});
      stack.push_back(Frame{f.i + 1, st.to, *cr.inner, std::move(steps)});
    }
  }
  return out;
}

// --- system file format -----------------------------------------------------

namespace {

KSet parse_kset_text(const std::string& s, size_t& pos) {
  if (pos >= s.size() || s[pos] != '{') throw ParseError("expected '{'", pos);
  ++pos;
  KSet out;
  while (pos < s.size() && s[pos] != '}') {
    if (s[pos] == ',') {
      ++pos;
      continue;
    }
    size_t end = pos;
    while (end < s.size() && isdigit((unsigned char)s[end])) ++end;
    if (end == pos) throw ParseError("expected component index", pos);
    out = out.with(uint32_t(std::stoul(s.substr(pos, end - pos))));
    pos = end;
  }
  if (pos >= s.size()) throw ParseError("unterminated '{'", pos);
  ++pos;
  return out;
}

Label parse_label_text(const std::string& s) {
  if (s.empty()) throw ParseError("empty rule label");
  if (s[0] == '{') {
    size_t pos = 0;
    KSet k1 = parse_kset_text(s, pos);
    if (pos == s.size()) return Label::kset(k1);
    if (s[pos] != '/') throw ParseError("expected '/' in pair label", pos);
    ++pos;
    KSet k2 = parse_kset_text(s, pos);
    if (pos != s.size()) throw ParseError("trailing label text", pos);
    return Label::kpair(k1, k2);
  }
  if (!valid_user_name(s)) throw ParseError("invalid action name '" + s + "'");
  return Label::act(intern(s));
}

std::vector<std::string> split_ws(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  std::string w;
  while (in >> w) out.push_back(w);
  return out;
}

void check_vars_known(const Mbrs& m, Term t, int line_no) {
  for (const auto& sc : t.spines()) {
    Spine sp = spine_at(sc.spine);
    if (!m.has_var(sp.head))
      throw ParseError("line " + std::to_string(line_no) + ": unknown variable '" +
                       sym_name(sp.head) + "'");
    check_vars_known(m, Term::from_id(sp.tail_id), line_no);
  }
}

}  // namespace

Mbrs parse_system(std::istream& in) {
  Mbrs m;
  std::map<uint32_t, std::vector<std::string>> accepting;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto h = line.find('#'); h != std::string::npos) line.resize(h);
    auto words = split_ws(line);
    if (words.empty()) continue;
    const std::string& head = words[0];
    try {
      if (head == "alphabet") {
        for (size_t i = 1; i < words.size(); ++i) {
          if (!valid_user_name(words[i])) throw ParseError("invalid action name");
          Label a = Label::act(intern(words[i]));
          if (std::find(m.alphabet.begin(), m.alphabet.end(), a) == m.alphabet.end())
            m.alphabet.push_back(a);
        }
      } else if (head == "vars") {
        for (size_t i = 1; i < words.size(); ++i) {
          if (words[i] == "_ZF_" || words[i] == "_ZINF_" || valid_user_name(words[i]))
            m.add_var(intern(words[i]));
          else
            throw ParseError("invalid variable name '" + words[i] + "'");
        }
      } else if (head == "rule") {
        // rule <name> : <lhs> -<label>-> <rhs>
        auto colon = line.find(':');
        if (colon == std::string::npos) throw ParseError("expected ':' in rule");
        auto name_words = split_ws(line.substr(line.find("rule") + 4, colon - 4 - line.find("rule")));
        if (name_words.size() != 1) throw ParseError("expected rule name");
        std::string body = line.substr(colon + 1);
        auto dash = body.find('-');
        if (dash == std::string::npos) throw ParseError("expected '-label->'");
        auto arrow = body.find("->", dash + 1);
        if (arrow == std::string::npos) throw ParseError("expected '->'");
        Rule r;
        r.name = name_words[0];
        if (m.find_rule(r.name)) throw ParseError("duplicate rule name '" + r.name + "'");
        r.lhs = parse_term(body.substr(0, dash));
        r.label = parse_label_text(body.substr(dash + 1, arrow - dash - 1));
        r.rhs = parse_term(body.substr(arrow + 2));
        if (r.label.kind == Label::Kind::Action &&
            std::find(m.alphabet.begin(), m.alphabet.end(), r.label) == m.alphabet.end())
          throw ParseError("undeclared action '" + r.label.str() + "'");
        check_vars_known(m, r.lhs, line_no);
        check_vars_known(m, r.rhs, line_no);
        m.add_rule(std::move(r), KSet());
      } else if (head == "accepting") {
        if (words.size() < 3 || words[2] != ":")
          throw ParseError("expected 'accepting <i> : <rules>'");
        uint32_t idx = uint32_t(std::stoul(words[1]));
        if (idx == 0 || idx > 31) throw ParseError("component index out of range");
        auto& dst = accepting[idx];
        for (size_t i = 3; i < words.size(); ++i) dst.push_back(words[i]);
      } else {
        throw ParseError("unknown directive '" + head + "'");
      }
    } catch (ParseError& e) {
      throw ParseError("line " + std::to_string(line_no) + ": " + e.message);
    }
  }
  for (const auto& [idx, names] : accepting) {
    m.n = std::max(m.n, idx);
    for (const std::string& rn : names) {
      auto r = m.find_rule(rn);
      if (!r) throw ParseError("accepting " + std::to_string(idx) + ": unknown rule '" + rn + "'");
      m.cmp[*r] = m.cmp[*r].with(idx);
    }
  }
  return m;
}

Mbrs parse_system_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path + "'");
  return parse_system(in);
}

Mbrs parse_system_text(const std::string& text) {
  std::istringstream in(text);
  return parse_system(in);
}

std::string dump_system(const Mbrs& m) {
  std::ostringstream out;
  out << "alphabet";
  for (const Label& a : m.alphabet) out << " " << a.str();
  out << "\n";
  out << "vars";
  for (Sym v : m.vars) out << " " << sym_name(v);
  out << "\n";
  for (const Rule& r : m.rules)
    out << "rule " << r.name << " : " << r.lhs.str() << " -" << r.label.str() << "-> "
        << r.rhs.str() << "\n";
  for (uint32_t i = 1; i <= m.n; ++i) {
    out << "accepting " << i << " :";
    for (RuleId r : m.component(i)) out << " " << m.rules[r].name;
    out << "\n";
  }
  return out.str();
}

}  // namespace prs
