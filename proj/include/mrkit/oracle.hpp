// Executable metamorphic relations and sampling-based labelling.
#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mrkit/mir.hpp"
#include "mrkit/seed.hpp"

namespace mrkit {

enum class MrId { ADD, MUL, PER, INC, EXC, INV };
inline constexpr std::array<MrId, 6> kAllMrs{MrId::ADD, MrId::MUL, MrId::PER, MrId::INC, MrId::EXC, MrId::INV};

std::string_view to_string(MrId mr);
/// Case-insensitive; nullopt for unknown names.
std::optional<MrId> parse_mr(std::string_view name);

enum class Relation { GEQ, LEQ, EQ };
Relation relation_of(MrId mr);
std::string_view to_string(Relation r);

/// One bit per MR, indexed in kAllMrs order.
struct MrLabelSet {
  std::array<bool, 6> bits{};
  bool operator[](MrId mr) const { return bits[static_cast<std::size_t>(mr)]; }
  bool &operator[](MrId mr) { return bits[static_cast<std::size_t>(mr)]; }
  int count() const;
  bool operator==(const MrLabelSet &) const = default;
};

struct OracleParams {
  int trials = 200;
  int min_length = 2, max_length = 20;
  int value_min = 0, value_max = 100;
  int inv_value_min = 1;
  int constant_min = 1, constant_max = 10;
  double tolerance = 1e-9;
  std::uint64_t seed = 42;
  std::uint64_t step_budget = mir::kDefaultStepBudget;
};

/// Throws std::invalid_argument for empty domains or trials < 1.
void check_params(const OracleParams &p);

/// Parameters of one follow-up construction; only the fields relevant to the
/// MR are read.
struct MrDraw {
  double constant = 1.0;
  std::vector<std::size_t> permutation;  // follow-up[i] = source[permutation[i]]
  double new_element = 0.0;
  std::size_t removal_index = 0;
};

MrDraw draw_mr_params(MrId mr, std::size_t length, Rng &rng, const OracleParams &p);

/// Throws std::invalid_argument when the source violates the MR's domain
/// (INV with a zero element, EXC or PER on fewer than two elements, a
/// malformed or identity permutation).
std::vector<double> apply_mr(MrId mr, const std::vector<double> &source, const MrDraw &draw);

struct RelationCheck {
  bool holds = false;
  std::string cause;
};

/// GEQ: fu >= src - tol*scale; LEQ: fu <= src + tol*scale;
/// EQ: |fu - src| <= tol*scale; scale = max(1, |src|).
RelationCheck check_relation(MrId mr, double out_src, double out_fu, double tol);

struct Witness {
  int trial = 0;
  std::vector<double> source, followup;
  std::optional<double> out_source, out_followup;
  std::string cause;
};

struct MrLabel {
  bool holds = false;
  int trials_run = 0;
  std::optional<Witness> witness;  // present iff !holds
};

struct LabelResult {
  std::array<MrLabel, 6> per_mr;
  MrLabelSet labels() const;
};

/// Each MR draws from its own stream derived from params.seed; a trap on
/// either execution falsifies the MR.
LabelResult label_method(const mir::Function &fn, const OracleParams &p);

/// Re-executes a witness; true when the violation reproduces.
bool replay_witness(const mir::Function &fn, MrId mr, const Witness &w, const OracleParams &p);

struct Discrepancy {
  std::string method_id;
  MrId mr = MrId::ADD;
  bool reference = false, dynamic = false;
  std::string kind;  // "unconfirmed-negative" or "violated-positive"
  std::optional<Witness> witness;
};

struct AuditReport {
  std::vector<Discrepancy> discrepancies;
  std::vector<std::string> unmatched;
};

AuditReport audit_labels(const std::vector<std::pair<std::string, LabelResult>> &dynamic,
                         const std::map<std::string, MrLabelSet> &reference);

} // namespace mrkit
