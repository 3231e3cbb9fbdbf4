#pragma once

#include <compare>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "errors.hpp"

namespace lrxfl::logic {

/// A single proposition over one named boolean concept: `f` or `~f`.
struct Literal {
    int concept_id = 0;
    bool positive = true;

    auto operator<=>(const Literal&) const = default;
};

/// Conjunction of literals in canonical form: sorted by concept id, no
/// concept mentioned twice. Never empty; "no rule" is expressed with
/// std::optional at the use site.
class ConjunctiveRule {
public:
    explicit ConjunctiveRule(std::vector<Literal> literals);

    const std::vector<Literal>& literals() const { return literals_; }
    int length() const { return static_cast<int>(literals_.size()); }

    bool evaluate(const std::vector<bool>& sample) const;

    auto operator<=>(const ConjunctiveRule&) const = default;

private:
    std::vector<Literal> literals_;
};

enum class Connector { And, Or };

std::string_view connector_name(Connector c);
Connector connector_from_name(std::string_view name);

/// Per-class rule: clauses joined by one connector. Canonical form keeps
/// clauses sorted and deduplicated; AND rules are flattened into a single
/// clause at construction, so multi-clause rules are always disjunctions.
/// `clause_owner`, when nonempty, maps each clause to the client it came
/// from.
struct ClassRule {
    int class_id = 0;
    Connector connector = Connector::And;
    std::vector<ConjunctiveRule> clauses;
    std::vector<int> clause_owner;

    static ClassRule make(int class_id, Connector connector,
                          std::vector<ConjunctiveRule> clauses,
                          std::vector<int> owners = {});

    bool evaluate(const std::vector<bool>& sample) const;

    bool operator==(const ClassRule&) const = default;
};

/// Pairwise feature co-occurrence counts over a rule set. m_pos is
/// symmetric; m_neg[i][j] counts rules containing f_i together with ~f_j.
struct CoOccurrenceMatrices {
    int num_concepts = 0;
    std::vector<std::vector<int>> m_pos;
    std::vector<std::vector<int>> m_neg;
    std::vector<int> contributing_rule_lengths;
};

struct ConnectorStats {
    double diagonality = 0.0;
    double exclusivity = 0.0;
    Connector chosen = Connector::And;
};

inline constexpr double kDefaultDiagonalityThreshold = 0.9;
inline constexpr double kDefaultExclusivityThreshold = 0.8;

CoOccurrenceMatrices build_cooccurrence(std::span<const ConjunctiveRule> rules,
                                        int num_concepts);

/// Fraction of positive co-occurrence mass on the diagonal; 0 when the
/// matrix is empty.
double diagonality(const CoOccurrenceMatrices& m);

/// Largest m_neg row sum normalized by the total length of contributing
/// rules; 0 when no rule contributed.
double exclusivity(const CoOccurrenceMatrices& m);

/// OR when either statistic reaches its threshold, else AND.
ConnectorStats select_connector(
    std::span<const ConjunctiveRule> rules, int num_concepts,
    double d_threshold = kDefaultDiagonalityThreshold,
    double e_threshold = kDefaultExclusivityThreshold);

/// Joins clauses under `connector`. OR keeps the deduplicated clauses;
/// AND merges everything into one conjunction and throws
/// ContradictionError when that would pair f with ~f.
ClassRule fuse_clauses(std::span<const ConjunctiveRule> clauses,
                       Connector connector, int class_id,
                       std::span<const int> owners = {});

// --- text form -------------------------------------------------------------
//
// Literals print as `name` / `~name`, conjunction as ` & `, disjunction as
// ` | `, and a class rule as `<clauses> <-> <class_name>`. parse(print(r))
// returns r for rules in canonical form.

std::string to_text(const Literal& lit,
                    std::span<const std::string> concept_names);
std::string to_text(const ConjunctiveRule& rule,
                    std::span<const std::string> concept_names);
std::string to_text(const ClassRule& rule,
                    std::span<const std::string> concept_names,
                    std::span<const std::string> class_names);

ConjunctiveRule parse_conjunction(std::string_view text,
                                  std::span<const std::string> concept_names);
ClassRule parse_class_rule(std::string_view text,
                           std::span<const std::string> concept_names,
                           std::span<const std::string> class_names);

}  // namespace lrxfl::logic
