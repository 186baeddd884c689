#include "prs/construct.hpp"

#include <algorithm>
#include <cassert>

namespace prs {

std::vector<KSet> subsets_of(KSet k) {
  std::vector<uint32_t> out;
  uint32_t bits = k.bits;
  for (uint32_t sub = bits;; sub = (sub - 1) & bits) {
    out.push_back(sub);
    if (sub == 0) break;
  }
  std::sort(out.begin(), out.end(), [](uint32_t a, uint32_t b) {
    int ca = __builtin_popcount(a), cb = __builtin_popcount(b);
    return ca != cb ? ca < cb : a < b;
  });
  std::vector<KSet> ks;
  for (uint32_t s : out) ks.push_back(KSet(s));
  return ks;
}

namespace {

std::string fresh_rule_name(const Mbrs& m, const char* prefix) {
  for (uint32_t i = 1;; ++i) {
    std::string name = std::string(prefix) + std::to_string(i);
    if (!m.find_rule(name)) return name;
  }
}

// X -a-> Y.(Z) decomposition of a push rule
struct PushParts {
  Sym x, y, z;
};

PushParts push_parts(const Rule& r) {
  Sym x = *r.lhs.as_var();
  Spine sp = spine_at(r.rhs.spines()[0].spine);
  Sym y = sp.head;
  Sym z = *Term::from_id(sp.tail_id).as_var();
  return PushParts{x, y, z};
}

// X.(Y) -b-> W' decomposition of a pop rule
struct PopParts {
  Sym x, y, w2;
};

PopParts pop_parts(const Rule& r) {
  Spine sp = spine_at(r.lhs.spines()[0].spine);
  return PopParts{sp.head, *Term::from_id(sp.tail_id).as_var(), *r.rhs.as_var()};
}

}  // namespace

ConstructedMbrs build_parallel_mbrs(const Mbrs& m, KSet K, const EngineBudget& b) {
  if (!in_normal_form(m)) throw std::invalid_argument("build_parallel_mbrs: not in normal form");
  ConstructedMbrs out;
  out.mbrs.vars = m.vars;
  out.mbrs.alphabet = m.alphabet;
  out.mbrs.n = m.n;
  for (RuleId r = 0; r < m.rules.size(); ++r) {
    if (!m.rules[r].is_par()) continue;
    out.mbrs.add_rule(m.rules[r], m.cmp[r]);
    out.source_ids.push_back(r);
  }
  out.n_source = out.mbrs.rules.size();

  std::vector<RuleId> pushes, pops;
  for (RuleId r = 0; r < m.rules.size(); ++r) {
    if (m.rules[r].shape() == RuleShape::Push && m.cmp[r].subset_of(K)) pushes.push_back(r);
    if (m.rules[r].shape() == RuleShape::Pop && m.cmp[r].subset_of(K)) pops.push_back(r);
  }
  auto k2list = subsets_of(K);

  auto add = [&](Term lhs, KSet kprime, Term rhs, RuleRecipe recipe) -> bool {
    Label lbl = Label::kset(kprime);
    if (out.mbrs.find_rule(lhs, lbl, rhs)) return false;
    Rule nr;
    nr.name = fresh_rule_name(out.mbrs, "k");
    nr.lhs = lhs;
    nr.label = lbl;
    nr.rhs = rhs;
    if (auto v = rhs.as_var(); v && !out.mbrs.has_var(*v)) out.mbrs.add_var(*v);
    RuleId id = out.mbrs.add_rule(std::move(nr), kprime);
    out.recipes.emplace(id, std::move(recipe));
    return true;
  };

  bool flag = true;
  size_t last_pass_unknowns = 0;
  while (flag) {
    flag = false;
    last_pass_unknowns = 0;
    // queries run against the support as of this pass
    Mbrs snapshot = out.mbrs;
    std::map<Sym, std::unique_ptr<ParStartQueries>> queries;
    auto q_for = [&](Sym z) -> ParStartQueries& {
      auto it = queries.find(z);
      if (it == queries.end())
        it = queries.emplace(z, std::make_unique<ParStartQueries>(snapshot, z, K, b)).first;
      return *it->second;
    };

    for (RuleId r : pushes) {
      PushParts parts = push_parts(m.rules[r]);
      KSet k1 = m.cmp[r];
      ParStartQueries& q = q_for(parts.z);
      for (KSet k2 : k2list) {
        Verdict any = q.any_target(k2);
        if (any.yes()) {
          Derivation inner = expand_witness(m, out, *any.finite);
          flag |= add(Term::var(parts.x), k1 | k2, Term::var(zhat_f()),
                      RuleRecipe{RuleRecipe::Kind::CollapseAny, r, {}, std::move(inner), {}});
        } else if (any.unknown()) {
          ++last_pass_unknowns;
        }
        Verdict eps = q.to_eps(k2);
        if (eps.yes()) {
          Derivation inner = expand_witness(m, out, *eps.finite);
          flag |= add(Term::var(parts.x), k1 | k2, Term::var(parts.y),
                      RuleRecipe{RuleRecipe::Kind::CollapseEps, r, {}, std::move(inner), {}});
        } else if (eps.unknown()) {
          ++last_pass_unknowns;
        }
      }
      for (RuleId rp : pops) {
        PopParts pp = pop_parts(m.rules[rp]);
        if (pp.x != parts.y) continue;  // the pop must fire on Y.(W)
        KSet k2 = m.cmp[rp];
        for (KSet k3 : k2list) {
          Verdict w = q.to_var(pp.y, k3);
          if (w.yes()) {
            Derivation inner = expand_witness(m, out, *w.finite);
            flag |= add(Term::var(parts.x), k1 | k2 | k3, Term::var(pp.w2),
                        RuleRecipe{RuleRecipe::Kind::CollapsePop, r, rp, std::move(inner), {}});
          } else if (w.unknown()) {
            ++last_pass_unknowns;
          }
        }
      }
    }
  }
  if (last_pass_unknowns > 0) {
    out.under_saturated = true;
    out.limitation = std::to_string(last_pass_unknowns) + " engine queries exhausted their budgets";
  }
  return out;
}

Derivation expand_witness(const Mbrs& source, const ConstructedMbrs& ck, const Derivation& d) {
  Derivation out;
  // fresh-variable tokens of the constructed start would have no expansion
  out.start = d.start;
  Term e = d.start;
  auto emit = [&](RuleId src_rule, Term to) {
    out.steps.push_back(Step{src_rule, to});
    e = to;
  };

  for (const Step& st : d.steps) {
    if (ck.is_source(st.rule)) {
      RuleId sid = ck.source_ids[st.rule];
      auto rest = par_minus(e, source.rules[sid].lhs);
      if (!rest) throw std::logic_error("expand_witness: source rule not applicable");
      emit(sid, Term::par(*rest, source.rules[sid].rhs));
      continue;
    }
    auto rit = ck.recipes.find(st.rule);
    if (rit == ck.recipes.end()) throw std::logic_error("expand_witness: recipe missing");
    const RuleRecipe& rec = rit->second;
    if (rec.kind == RuleRecipe::Kind::SeqCover)
      throw std::logic_error("expand_witness: sequential recipe in parallel context");

    const Rule& trig = source.rules[rec.trigger];
    PushParts parts = push_parts(trig);
    auto rest_opt = par_minus(e, trig.lhs);
    if (!rest_opt) throw std::logic_error("expand_witness: trigger not applicable");
    Term rest = *rest_opt;
    emit(rec.trigger, Term::par(rest, trig.rhs));
    // the collapsed subderivation runs inside the new spine
    Term cur = rec.inner.start;
    for (const Step& in : rec.inner.steps) {
      cur = in.to;
      emit(in.rule, Term::par(rest, Term::seq(parts.y, cur)));
    }
    if (rec.kind == RuleRecipe::Kind::CollapsePop) {
      const Rule& pop = source.rules[*rec.pop];
      emit(*rec.pop, Term::par(rest, pop.rhs));
    } else if (rec.kind == RuleRecipe::Kind::ZInf && rec.inner_cycle) {
      for (const Step& in : rec.inner_cycle->steps) {
        cur = in.to;
        emit(in.rule, Term::par(rest, Term::seq(parts.y, cur)));
      }
    }
    // CollapseEps ends at rest || Y automatically via Y.(eps) = Y
  }
  return out;
}

ParOmega build_par_omega(const Mbrs& m, const ConstructedMbrs& mk, KSet K, KSet Kw,
                         const DecideSmaller& decide_smaller) {
  ParOmega out;
  out.par = mk;
  out.rstar.assign(mk.mbrs.rules.size(), 1);

  std::vector<KSet> zinf_cmp2(mk.mbrs.rules.size(), KSet());

  size_t measure = K.count() + Kw.count();
  for (RuleId r = 0; r < m.rules.size(); ++r) {
    if (m.rules[r].shape() != RuleShape::Push || !m.cmp[r].subset_of(K)) continue;
    PushParts parts = push_parts(m.rules[r]);
    for (KSet k1 : subsets_of(K)) {
      for (KSet k1w : subsets_of(Kw & k1)) {
        if (k1.count() + k1w.count() >= measure) continue;
        Verdict v = decide_smaller(parts.z, k1, k1w);
        if (v.unknown()) {
          out.par.under_saturated = true;
          out.par.limitation = "inner acceptance query unknown";
          continue;
        }
        if (!v.yes()) continue;
        KSet kbar = k1 | m.cmp[r];
        if (!kbar.subset_of(K)) continue;
        Label lbl = Label::kpair(kbar, k1w);
        Term lhs = Term::var(parts.x);
        Term rhs = Term::var(zhat_inf());
        if (out.par.mbrs.find_rule(lhs, lbl, rhs)) continue;
        if (!v.stem || !v.cycle)
          throw std::logic_error("build_par_omega: Yes without an expanded lasso");
        Rule nr;
        nr.name = fresh_rule_name(out.par.mbrs, "w");
        nr.lhs = lhs;
        nr.label = lbl;
        nr.rhs = rhs;
        if (!out.par.mbrs.has_var(zhat_inf())) out.par.mbrs.add_var(zhat_inf());
        RuleId id = out.par.mbrs.add_rule(std::move(nr), kbar);
        out.par.recipes.emplace(
            id, RuleRecipe{RuleRecipe::Kind::ZInf, r, {}, *v.stem, *v.cycle});
        out.rstar.push_back(0);
        zinf_cmp2.push_back(k1w);
      }
    }
  }

  out.par_inf = out.par.mbrs;
  for (RuleId r = 0; r < out.par_inf.rules.size(); ++r) out.par_inf.cmp[r] = zinf_cmp2[r];
  return out;
}

ConstructedMbrs build_seq_mbrs(const Mbrs& m, const ConstructedMbrs& mk, KSet K,
                               const EngineBudget& b) {
  if (!in_normal_form(m)) throw std::invalid_argument("build_seq_mbrs: not in normal form");
  ConstructedMbrs out;
  out.mbrs.vars = m.vars;
  out.mbrs.alphabet = m.alphabet;
  out.mbrs.n = m.n;
  for (RuleId r = 0; r < m.rules.size(); ++r) {
    if (m.rules[r].shape() != RuleShape::Push) continue;
    out.mbrs.add_rule(m.rules[r], m.cmp[r]);
    out.source_ids.push_back(r);
  }
  out.n_source = out.mbrs.rules.size();
  out.under_saturated = mk.under_saturated;
  out.limitation = mk.limitation;

  for (Sym x : m.vars) {
    ParStartQueries q(mk.mbrs, x, K, b);
    for (Sym y : m.vars) {
      for (KSet kp : subsets_of(K)) {
        Verdict v = q.cover(y, kp);
        if (v.unknown()) {
          out.under_saturated = true;
          out.limitation = "cover query exhausted its budget";
          continue;
        }
        if (!v.yes()) continue;
        Label lbl = Label::kset(kp);
        if (out.mbrs.find_rule(Term::var(x), lbl, Term::var(y))) continue;
        Rule nr;
        nr.name = fresh_rule_name(out.mbrs, "s");
        nr.lhs = Term::var(x);
        nr.label = lbl;
        nr.rhs = Term::var(y);
        RuleId id = out.mbrs.add_rule(std::move(nr), kp);
        out.recipes.emplace(id, RuleRecipe{RuleRecipe::Kind::SeqCover, 0, {},
                                           expand_witness(m, mk, *v.finite), {}});
      }
    }
  }
  return out;
}

}  // namespace prs
