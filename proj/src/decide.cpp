#include "prs/decide.hpp"

#include <algorithm>
#include <set>

namespace prs {

std::optional<Derivation> replay_rules(const Mbrs& m, Term start,
                                       const std::vector<RuleId>& rules, size_t node_budget) {
  std::set<std::pair<size_t, uint32_t>> dead;
  std::vector<Step> steps;
  size_t visited = 0;
  std::function<bool(size_t, Term)> go = [&](size_t i, Term t) -> bool {
    if (i == rules.size()) return true;
    if (dead.count({i, t.id()})) return false;
    if (++visited > node_budget) return false;
    for (Term next : apply_rule(m, t, rules[i])) {
      steps.push_back(Step{rules[i], next});
      if (go(i + 1, next)) return true;
      steps.pop_back();
    }
    dead.insert({i, t.id()});
    return false;
  };
  if (!go(0, start)) return std::nullopt;
  return Derivation{start, std::move(steps)};
}

Decider::Decider(Mbrs m, EngineBudget b) : m_(std::move(m)), b_(b) {}

const ConstructedMbrs& Decider::par_construction(KSet K) {
  auto it = mk_.find(K.bits);
  if (it == mk_.end())
    it = mk_.emplace(K.bits, std::make_unique<ConstructedMbrs>(build_parallel_mbrs(m_, K, b_)))
             .first;
  return *it->second;
}

const ConstructedMbrs& Decider::seq_construction(KSet K) {
  auto it = mseq_.find(K.bits);
  if (it == mseq_.end())
    it = mseq_
             .emplace(K.bits, std::make_unique<ConstructedMbrs>(
                                  build_seq_mbrs(m_, par_construction(K), K, b_)))
             .first;
  return *it->second;
}

const ParOmega& Decider::omega_construction(KSet K, KSet Komega) {
  uint64_t key = (uint64_t(K.bits) << 32) | Komega.bits;
  auto it = momega_.find(key);
  if (it == momega_.end()) {
    DecideSmaller smaller = [this](Sym z, KSet k1, KSet k1w) { return problem2(z, k1, k1w); };
    it = momega_
             .emplace(key, std::make_unique<ParOmega>(
                               build_par_omega(m_, par_construction(K), K, Komega, smaller)))
             .first;
  }
  return *it->second;
}

namespace {

// component i can never be touched when no rule of the source lies in it
bool component_possible(const Mbrs& m, KSet K) {
  for (uint32_t i : K.members())
    if (m.component(i).empty()) return false;
  return true;
}

}  // namespace

Verdict Decider::problem1(Sym X, KSet K) {
  if (!in_normal_form(m_)) throw std::invalid_argument("problem1: system not in normal form");
  if (!component_possible(m_, K)) return Verdict::mk_no("untouchable component");
  const ConstructedMbrs& mk = par_construction(K);
  Verdict v = par_finite_accepting(mk.mbrs, X, K, b_);
  if (v.yes()) {
    Verdict out = Verdict::mk_yes(expand_witness(m_, mk, *v.finite));
    return out;
  }
  if (v.unknown() || (v.no() && mk.under_saturated))
    return Verdict::mk_unknown(mk.under_saturated ? "construction under-saturated" : v.note);
  return Verdict::mk_no(v.note);
}

std::vector<RuleId> Decider::expand_par_rules(const ConstructedMbrs& ck,
                                              const std::vector<RuleId>& rules,
                                              std::vector<RuleId>* loop_extras) const {
  std::vector<RuleId> out;
  for (RuleId r : rules) {
    if (ck.is_source(r)) {
      out.push_back(ck.source_ids[r]);
      continue;
    }
    const RuleRecipe& rec = ck.recipes.at(r);
    switch (rec.kind) {
      case RuleRecipe::Kind::CollapseAny:
      case RuleRecipe::Kind::CollapseEps: {
        out.push_back(rec.trigger);
        auto inner = rec.inner.rule_seq();
        out.insert(out.end(), inner.begin(), inner.end());
        break;
      }
      case RuleRecipe::Kind::CollapsePop: {
        out.push_back(rec.trigger);
        auto inner = rec.inner.rule_seq();
        out.insert(out.end(), inner.begin(), inner.end());
        out.push_back(*rec.pop);
        break;
      }
      case RuleRecipe::Kind::ZInf: {
        out.push_back(rec.trigger);
        auto stem = rec.inner.rule_seq();
        out.insert(out.end(), stem.begin(), stem.end());
        auto cyc = rec.inner_cycle->rule_seq();
        out.insert(out.end(), cyc.begin(), cyc.end());
        if (loop_extras) loop_extras->insert(loop_extras->end(), cyc.begin(), cyc.end());
        break;
      }
      case RuleRecipe::Kind::SeqCover:
        throw std::logic_error("sequential recipe in a parallel derivation");
    }
  }
  return out;
}

std::vector<RuleId> Decider::expand_seq_rules(const ConstructedMbrs& seq,
                                              const std::vector<RuleId>& rules) const {
  std::vector<RuleId> out;
  for (RuleId r : rules) {
    if (seq.is_source(r)) {
      out.push_back(seq.source_ids[r]);
      continue;
    }
    const RuleRecipe& rec = seq.recipes.at(r);
    if (rec.kind != RuleRecipe::Kind::SeqCover)
      throw std::logic_error("unexpected recipe in a sequential derivation");
    auto inner = rec.inner.rule_seq();
    out.insert(out.end(), inner.begin(), inner.end());
  }
  return out;
}

Verdict Decider::problem2(Sym X, KSet K, KSet Komega) {
  if (!in_normal_form(m_)) throw std::invalid_argument("problem2: system not in normal form");
  if (!Komega.subset_of(K)) return Verdict::mk_no("Komega not a subset of K");
  auto key = std::make_tuple(X, K.bits, Komega.bits);
  if (auto it = memo_.find(key); it != memo_.end()) return it->second;
  if (!component_possible(m_, K)) {
    Verdict v = Verdict::mk_no("untouchable component");
    memo_.emplace(key, v);
    return v;
  }

  const ConstructedMbrs& mk = par_construction(K);
  const ParOmega& pom = omega_construction(K, Komega);
  const ConstructedMbrs& mseq = seq_construction(K);
  bool undersat = mk.under_saturated || pom.par.under_saturated || mseq.under_saturated;
  bool saw_unknown = false;

  auto assemble = [&](std::vector<RuleId> stem_rules, std::vector<RuleId> loop_rules,
                      std::string note) -> Verdict {
    Verdict out;
    out.v = Verdict::V::Yes;
    out.note = std::move(note);
    auto prefix = replay_rules(m_, Term::var(X), stem_rules);
    if (prefix) {
      auto loop = replay_rules(m_, prefix->end(), loop_rules);
      if (loop) {
        out.stem = std::move(*prefix);
        out.cycle = std::move(*loop);
        return out;
      }
    }
    out.note += " (witness assembly exhausted its budget)";
    return out;
  };

  // condition A: a variable reachable in the sequential abstraction from
  // which the parallel pair admits the mixed derivation
  std::map<Sym, Derivation> stems;
  for (auto& [yk, d] : seq_reachable_all(mseq.mbrs, X, K))
    if (!stems.count(yk.first)) stems.emplace(yk.first, std::move(d));
  for (auto& [y, seq_stem] : stems) {
    Verdict vp = par_infinite_mixed(pom.par.mbrs, pom.par_inf, y, K, Komega, pom.rstar, b_);
    if (vp.unknown()) {
      saw_unknown = true;
      continue;
    }
    if (!vp.yes()) continue;
    std::vector<RuleId> extras;
    std::vector<RuleId> stem_rules = expand_seq_rules(mseq, seq_stem.rule_seq());
    auto par_stem = expand_par_rules(pom.par, vp.stem->rule_seq(), &extras);
    stem_rules.insert(stem_rules.end(), par_stem.begin(), par_stem.end());
    std::vector<RuleId> loop_rules = expand_par_rules(pom.par, vp.cycle->rule_seq(), nullptr);
    loop_rules.insert(loop_rules.end(), extras.begin(), extras.end());
    Verdict out = assemble(std::move(stem_rules), std::move(loop_rules),
                           "condition A via " + sym_name(y));
    memo_.emplace(key, out);
    return out;
  }

  // condition B (K = Komega): an infinite derivation inside the sequential
  // abstraction itself
  if (K == Komega) {
    Verdict vb = seq_infinite_accepting(mseq.mbrs, X, K, Komega);
    if (vb.yes()) {
      Verdict out = assemble(expand_seq_rules(mseq, vb.stem->rule_seq()),
                             expand_seq_rules(mseq, vb.cycle->rule_seq()), "condition B");
      memo_.emplace(key, out);
      return out;
    }
  }

  Verdict out;
  if (saw_unknown || undersat) {
    out = Verdict::mk_unknown(undersat ? "construction under-saturated"
                                       : "engine query exhausted its budget");
  } else if (K.empty_set() && Komega.empty_set()) {
    out = Verdict::mk_no("base case (K = Komega = {}): characterization unverified");
  } else {
    out = Verdict::mk_no();
  }
  memo_.emplace(key, out);
  return out;
}

Verdict Decider::model_check_infinite(Sym X, const Formula& f) {
  if (!in_normal_form(m_))
    throw std::invalid_argument("model_check_infinite: system not in normal form");
  if (!in_fragment(f)) throw std::invalid_argument("model_check_infinite: formula not in fragment");
  bool saw_unknown = false;
  std::string notes;
  auto disjuncts = negate_to_dnf(f);
  for (size_t i = 0; i < disjuncts.size(); ++i) {
    DisjunctMbrs dm = disjunct_to_mbrs(m_, disjuncts[i]);
    Decider sub(dm.mbrs, b_);
    Verdict v = sub.problem2(X, dm.k, dm.komega);
    if (v.yes()) {
      Verdict out;
      out.v = Verdict::V::No;
      out.note = "counterexample from disjunct " + std::to_string(i + 1) + " (" +
                 formula_str(disjuncts[i].as_formula()) + ")";
      out.stem = v.stem;
      out.cycle = v.cycle;
      if (v.stem && v.cycle && !v.cycle->steps.empty()) {
        LassoRun run;
        for (RuleId r : v.stem->rule_seq()) run.stem.push_back(m_.rules[r].label);
        for (RuleId r : v.cycle->rule_seq()) run.cycle.push_back(m_.rules[r].label);
        out.run = std::move(run);
      }
      return out;
    }
    if (v.unknown()) {
      saw_unknown = true;
      notes += (notes.empty() ? "" : "; ") + ("disjunct " + std::to_string(i + 1) + ": " + v.note);
    }
  }
  if (saw_unknown) return Verdict::mk_unknown(notes);
  return Verdict::mk_yes();
}

Verdict problem1(const Mbrs& m, Sym X, KSet K, const EngineBudget& b) {
  Decider d(m, b);
  return d.problem1(X, K);
}

Verdict problem2(const Mbrs& m, Sym X, KSet K, KSet Komega, const EngineBudget& b) {
  Decider d(m, b);
  return d.problem2(X, K, Komega);
}

Verdict model_check_infinite(const Mbrs& m, Sym X, const Formula& f, const EngineBudget& b) {
  Decider d(m, b);
  return d.model_check_infinite(X, f);
}

}  // namespace prs
