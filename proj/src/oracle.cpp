#include "mrkit/oracle.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace mrkit {

std::string_view to_string(MrId mr) {
  switch (mr) {
  case MrId::ADD: return "ADD";
  case MrId::MUL: return "MUL";
  case MrId::PER: return "PER";
  case MrId::INC: return "INC";
  case MrId::EXC: return "EXC";
  case MrId::INV: return "INV";
  }
  return "?";
}

std::optional<MrId> parse_mr(std::string_view name) {
  std::string up(name);
  for (auto &c : up)
    c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  for (auto mr : kAllMrs)
    if (to_string(mr) == up)
      return mr;
  return std::nullopt;
}

Relation relation_of(MrId mr) {
  switch (mr) {
  case MrId::ADD:
  case MrId::MUL:
  case MrId::INC: return Relation::GEQ;
  case MrId::PER: return Relation::EQ;
  case MrId::EXC:
  case MrId::INV: return Relation::LEQ;
  }
  return Relation::EQ;
}

std::string_view to_string(Relation r) {
  switch (r) {
  case Relation::GEQ: return ">=";
  case Relation::LEQ: return "<=";
  case Relation::EQ: return "==";
  }
  return "?";
}

int MrLabelSet::count() const { return static_cast<int>(std::count(bits.begin(), bits.end(), true)); }

void check_params(const OracleParams &p) {
  if (p.trials < 1)
    throw std::invalid_argument("oracle: trials must be >= 1");
  if (p.min_length < 2 || p.max_length < p.min_length)
    throw std::invalid_argument("oracle: length range must satisfy 2 <= min <= max");
  if (p.value_max < p.value_min || p.value_min < 0)
    throw std::invalid_argument("oracle: value domain must be a non-empty range of non-negative integers");
  if (p.inv_value_min < 1 || p.value_max < p.inv_value_min)
    throw std::invalid_argument("oracle: INV value domain must be a non-empty range of positive integers");
  if (p.constant_min < 1 || p.constant_max < p.constant_min)
    throw std::invalid_argument("oracle: constant domain must be a non-empty range of integers >= 1");
  if (!(p.tolerance >= 0.0))
    throw std::invalid_argument("oracle: tolerance must be non-negative");
}

MrDraw draw_mr_params(MrId mr, std::size_t length, Rng &rng, const OracleParams &p) {
  MrDraw d;
  switch (mr) {
  case MrId::ADD:
  case MrId::MUL:
    d.constant = static_cast<double>(rng.uniform_int(p.constant_min, p.constant_max));
    break;
  case MrId::PER: {
    if (length < 2)
      throw std::invalid_argument("PER needs at least two elements");
    d.permutation.resize(length);
    do {
      std::iota(d.permutation.begin(), d.permutation.end(), 0);
      rng.shuffle(d.permutation);
    } while (std::is_sorted(d.permutation.begin(), d.permutation.end()));
    break;
  }
  case MrId::INC:
    d.new_element = static_cast<double>(rng.uniform_int(p.value_min, p.value_max));
    break;
  case MrId::EXC:
    if (length < 2)
      throw std::invalid_argument("EXC needs at least two elements");
    d.removal_index = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(length) - 1));
    break;
  case MrId::INV:
    break;
  }
  return d;
}

std::vector<double> apply_mr(MrId mr, const std::vector<double> &source, const MrDraw &draw) {
  std::vector<double> out;
  switch (mr) {
  case MrId::ADD:
    for (double x : source)
      out.push_back(x + draw.constant);
    break;
  case MrId::MUL:
    for (double x : source)
      out.push_back(x * draw.constant);
    break;
  case MrId::PER: {
    if (source.size() < 2)
      throw std::invalid_argument("PER needs at least two elements");
    const auto &perm = draw.permutation;
    std::vector<std::size_t> sorted = perm;
    std::sort(sorted.begin(), sorted.end());
    bool valid = perm.size() == source.size();
    for (std::size_t i = 0; valid && i < sorted.size(); ++i)
      valid = sorted[i] == i;
    if (!valid)
      throw std::invalid_argument("PER: draw is not a permutation of the source indices");
    if (std::is_sorted(perm.begin(), perm.end()))
      throw std::invalid_argument("PER: identity permutation");
    for (auto i : perm)
      out.push_back(source[i]);
    break;
  }
  case MrId::INC:
    out = source;
    out.push_back(draw.new_element);
    break;
  case MrId::EXC:
    if (source.size() < 2)
      throw std::invalid_argument("EXC needs at least two elements");
    if (draw.removal_index >= source.size())
      throw std::invalid_argument("EXC: removal index out of range");
    out = source;
    out.erase(out.begin() + static_cast<std::ptrdiff_t>(draw.removal_index));
    break;
  case MrId::INV:
    for (double x : source) {
      if (x == 0.0)
        throw std::invalid_argument("INV: source contains a zero element");
      out.push_back(1.0 / x);
    }
    break;
  }
  return out;
}

RelationCheck check_relation(MrId mr, double out_src, double out_fu, double tol) {
  if (!std::isfinite(out_src) || !std::isfinite(out_fu))
    return {false, "non-finite output"};
  const double slack = tol * std::max(1.0, std::abs(out_src));
  bool ok = false;
  switch (relation_of(mr)) {
  case Relation::GEQ: ok = out_fu >= out_src - slack; break;
  case Relation::LEQ: ok = out_fu <= out_src + slack; break;
  case Relation::EQ: ok = std::abs(out_fu - out_src) <= slack; break;
  }
  if (ok)
    return {true, {}};
  return {false, "follow-up output " + std::to_string(out_fu) + " " + std::string(to_string(relation_of(mr))) +
                     " source output " + std::to_string(out_src) + " does not hold"};
}

MrLabelSet LabelResult::labels() const {
  MrLabelSet s;
  for (auto mr : kAllMrs)
    s[mr] = per_mr[static_cast<std::size_t>(mr)].holds;
  return s;
}

namespace {

// Runs one source/follow-up pair; fills the witness on failure.
bool run_pair(const mir::Function &fn, MrId mr, Witness &w, const OracleParams &p) {
  try {
    w.out_source = mir::interpret(fn, w.source, p.step_budget);
  } catch (const mir::Trap &t) {
    w.cause = std::string("source run trapped: ") + t.what();
    return false;
  }
  try {
    w.out_followup = mir::interpret(fn, w.followup, p.step_budget);
  } catch (const mir::Trap &t) {
    w.cause = std::string("follow-up run trapped: ") + t.what();
    return false;
  }
  auto rc = check_relation(mr, *w.out_source, *w.out_followup, p.tolerance);
  w.cause = rc.cause;
  return rc.holds;
}

} // namespace

LabelResult label_method(const mir::Function &fn, const OracleParams &p) {
  check_params(p);
  LabelResult result;
  for (auto mr : kAllMrs) {
    auto &label = result.per_mr[static_cast<std::size_t>(mr)];
    Rng rng(derive_seed(p.seed, "oracle:" + std::string(to_string(mr))));
    const int lo = mr == MrId::INV ? p.inv_value_min : p.value_min;
    label.holds = true;
    for (int trial = 0; trial < p.trials; ++trial) {
      Witness w;
      w.trial = trial;
      auto n = static_cast<std::size_t>(rng.uniform_int(p.min_length, p.max_length));
      for (std::size_t i = 0; i < n; ++i)
        w.source.push_back(static_cast<double>(rng.uniform_int(lo, p.value_max)));
      w.followup = apply_mr(mr, w.source, draw_mr_params(mr, n, rng, p));
      label.trials_run = trial + 1;
      if (!run_pair(fn, mr, w, p)) {
        label.holds = false;
        label.witness = std::move(w);
        break;
      }
    }
  }
  return result;
}

bool replay_witness(const mir::Function &fn, MrId mr, const Witness &w, const OracleParams &p) {
  Witness again;
  again.source = w.source;
  again.followup = w.followup;
  return !run_pair(fn, mr, again, p);
}

AuditReport audit_labels(const std::vector<std::pair<std::string, LabelResult>> &dynamic,
                         const std::map<std::string, MrLabelSet> &reference) {
  AuditReport report;
  for (const auto &[id, result] : dynamic) {
    auto it = reference.find(id);
    if (it == reference.end()) {
      report.unmatched.push_back(id);
      continue;
    }
    for (auto mr : kAllMrs) {
      const auto &label = result.per_mr[static_cast<std::size_t>(mr)];
      bool ref = it->second[mr];
      if (label.holds == ref)
        continue;
      Discrepancy d;
      d.method_id = id;
      d.mr = mr;
      d.reference = ref;
      d.dynamic = label.holds;
      d.kind = ref ? "violated-positive" : "unconfirmed-negative";
      d.witness = label.witness;
      report.discrepancies.push_back(std::move(d));
    }
  }
  return report;
}

} // namespace mrkit
