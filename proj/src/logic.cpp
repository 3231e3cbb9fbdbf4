#include "logic.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <sstream>

namespace lrxfl::logic {

namespace {

std::string default_concept_name(int concept_id) {
    return "f" + std::to_string(concept_id);
}

std::string name_of(int concept_id, std::span<const std::string> names) {
    if (concept_id >= 0 && concept_id < static_cast<int>(names.size())) {
        return names[concept_id];
    }
    return default_concept_name(concept_id);
}

}  // namespace

ConjunctiveRule::ConjunctiveRule(std::vector<Literal> literals)
    : literals_(std::move(literals)) {
    if (literals_.empty()) {
        throw InvalidInputError(
            "conjunctive rule must contain at least one literal");
    }
    std::sort(literals_.begin(), literals_.end());
    literals_.erase(std::unique(literals_.begin(), literals_.end()),
                    literals_.end());
    for (size_t i = 1; i < literals_.size(); ++i) {
        if (literals_[i].concept_id == literals_[i - 1].concept_id) {
            throw ContradictionError(
                "rule contains both f" +
                    std::to_string(literals_[i].concept_id) + " and ~f" +
                    std::to_string(literals_[i].concept_id),
                literals_[i].concept_id);
        }
    }
}

bool ConjunctiveRule::evaluate(const std::vector<bool>& sample) const {
    for (const Literal& lit : literals_) {
        if (lit.concept_id < 0 ||
            lit.concept_id >= static_cast<int>(sample.size())) {
            throw IndexError("literal " +
                             (lit.positive ? std::string() : std::string("~")) +
                             default_concept_name(lit.concept_id) +
                             " is out of range for a sample of " +
                             std::to_string(sample.size()) + " concepts");
        }
        if (sample[lit.concept_id] != lit.positive) {
            return false;
        }
    }
    return true;
}

std::string_view connector_name(Connector c) {
    return c == Connector::And ? "AND" : "OR";
}

Connector connector_from_name(std::string_view name) {
    if (name == "AND") return Connector::And;
    if (name == "OR") return Connector::Or;
    throw InvalidInputError("unknown connector '" + std::string(name) + "'");
}

ClassRule ClassRule::make(int class_id, Connector connector,
                          std::vector<ConjunctiveRule> clauses,
                          std::vector<int> owners) {
    if (!owners.empty() && owners.size() != clauses.size()) {
        throw InvalidInputError(
            "clause provenance must match the clause count");
    }
    // Sort clauses canonically, deduplicate, keep the lowest owner id for
    // duplicates.
    std::vector<size_t> order(clauses.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
        if (clauses[a] != clauses[b]) return clauses[a] < clauses[b];
        if (!owners.empty()) return owners[a] < owners[b];
        return a < b;
    });

    ClassRule rule;
    rule.class_id = class_id;
    rule.connector = connector;
    for (size_t idx : order) {
        if (!rule.clauses.empty() && rule.clauses.back() == clauses[idx]) {
            continue;
        }
        rule.clauses.push_back(clauses[idx]);
        if (!owners.empty()) rule.clause_owner.push_back(owners[idx]);
    }

    if (rule.connector == Connector::And && rule.clauses.size() > 1) {
        // AND of conjunctions is itself one conjunction; keep that flattened
        // canonical form so equal rules compare equal and printing stays
        // unambiguous.
        std::span<const int> owner_span;
        if (!rule.clause_owner.empty()) owner_span = rule.clause_owner;
        return fuse_clauses(rule.clauses, Connector::And, class_id,
                            owner_span);
    }
    // Connector carries no meaning for a single clause; normalize so text
    // round-trips compare equal.
    if (rule.clauses.size() <= 1) {
        rule.connector = Connector::And;
    }
    return rule;
}

bool ClassRule::evaluate(const std::vector<bool>& sample) const {
    if (clauses.empty()) {
        return false;  // absent explanation never claims a sample
    }
    if (connector == Connector::And) {
        for (const auto& clause : clauses) {
            if (!clause.evaluate(sample)) return false;
        }
        return true;
    }
    for (const auto& clause : clauses) {
        if (clause.evaluate(sample)) return true;
    }
    return false;
}

CoOccurrenceMatrices build_cooccurrence(std::span<const ConjunctiveRule> rules,
                                        int num_concepts) {
    if (num_concepts <= 0 && !rules.empty()) {
        throw InvalidInputError(
            "co-occurrence over zero concepts with nonempty rules");
    }
    CoOccurrenceMatrices m;
    m.num_concepts = std::max(num_concepts, 0);
    m.m_pos.assign(m.num_concepts, std::vector<int>(m.num_concepts, 0));
    m.m_neg.assign(m.num_concepts, std::vector<int>(m.num_concepts, 0));

    for (const ConjunctiveRule& rule : rules) {
        std::vector<int> pos, neg;
        for (const Literal& lit : rule.literals()) {
            if (lit.concept_id < 0 || lit.concept_id >= m.num_concepts) {
                throw IndexError("literal concept " +
                                 std::to_string(lit.concept_id) +
                                 " out of range for " +
                                 std::to_string(m.num_concepts) + " concepts");
            }
            (lit.positive ? pos : neg).push_back(lit.concept_id);
        }
        // Once per pair per rule, regardless of rule length.
        for (size_t a = 0; a < pos.size(); ++a) {
            m.m_pos[pos[a]][pos[a]] += 1;
            for (size_t b = a + 1; b < pos.size(); ++b) {
                m.m_pos[pos[a]][pos[b]] += 1;
                m.m_pos[pos[b]][pos[a]] += 1;
            }
        }
        if (!pos.empty() && !neg.empty()) {
            for (int i : pos) {
                for (int j : neg) {
                    m.m_neg[i][j] += 1;
                }
            }
            m.contributing_rule_lengths.push_back(rule.length());
        }
    }
    return m;
}

double diagonality(const CoOccurrenceMatrices& m) {
    long long diag = 0, total = 0;
    for (int i = 0; i < m.num_concepts; ++i) {
        diag += m.m_pos[i][i];
        for (int j = 0; j < m.num_concepts; ++j) {
            total += m.m_pos[i][j];
        }
    }
    if (total == 0) return 0.0;
    return static_cast<double>(diag) / static_cast<double>(total);
}

double exclusivity(const CoOccurrenceMatrices& m) {
    long long total_length = 0;
    for (int len : m.contributing_rule_lengths) total_length += len;
    if (total_length == 0) return 0.0;

    long long max_row = 0;
    for (int i = 0; i < m.num_concepts; ++i) {
        long long row = 0;
        for (int j = 0; j < m.num_concepts; ++j) row += m.m_neg[i][j];
        max_row = std::max(max_row, row);
    }
    return static_cast<double>(max_row) / static_cast<double>(total_length);
}

ConnectorStats select_connector(std::span<const ConjunctiveRule> rules,
                                int num_concepts, double d_threshold,
                                double e_threshold) {
    const CoOccurrenceMatrices m = build_cooccurrence(rules, num_concepts);
    ConnectorStats stats;
    stats.diagonality = diagonality(m);
    stats.exclusivity = exclusivity(m);
    stats.chosen = (stats.diagonality >= d_threshold ||
                    stats.exclusivity >= e_threshold)
                       ? Connector::Or
                       : Connector::And;
    return stats;
}

ClassRule fuse_clauses(std::span<const ConjunctiveRule> clauses,
                       Connector connector, int class_id,
                       std::span<const int> owners) {
    if (!owners.empty() && owners.size() != clauses.size()) {
        throw InvalidInputError(
            "clause provenance must match the clause count");
    }
    if (clauses.empty()) {
        ClassRule rule;
        rule.class_id = class_id;
        rule.connector = Connector::And;
        return rule;
    }

    if (connector == Connector::Or) {
        return ClassRule::make(
            class_id, Connector::Or,
            std::vector<ConjunctiveRule>(clauses.begin(), clauses.end()),
            std::vector<int>(owners.begin(), owners.end()));
    }

    // AND: flatten into one merged conjunction. Track which clause first
    // mentioned each concept so a conflict can name both sources.
    std::map<int, std::pair<bool, size_t>> seen;  // concept -> (polarity, clause)
    std::vector<Literal> merged;
    for (size_t c = 0; c < clauses.size(); ++c) {
        for (const Literal& lit : clauses[c].literals()) {
            auto it = seen.find(lit.concept_id);
            if (it == seen.end()) {
                seen.emplace(lit.concept_id, std::make_pair(lit.positive, c));
                merged.push_back(lit);
            } else if (it->second.first != lit.positive) {
                std::ostringstream msg;
                msg << "AND fusion conflict on concept f" << lit.concept_id
                    << ": clause " << it->second.second << " and clause " << c
                    << " disagree on its polarity";
                throw ContradictionError(msg.str(), lit.concept_id);
            }
        }
    }

    ClassRule rule;
    rule.class_id = class_id;
    rule.connector = Connector::And;
    rule.clauses.emplace_back(std::move(merged));
    if (!owners.empty()) {
        // A flattened conjunction has a single clause; attribute it to the
        // lowest contributing client.
        rule.clause_owner.push_back(
            *std::min_element(owners.begin(), owners.end()));
    }
    return rule;
}

std::string to_text(const Literal& lit,
                    std::span<const std::string> concept_names) {
    std::string out = lit.positive ? "" : "~";
    out += name_of(lit.concept_id, concept_names);
    return out;
}

std::string to_text(const ConjunctiveRule& rule,
                    std::span<const std::string> concept_names) {
    std::string out;
    for (const Literal& lit : rule.literals()) {
        if (!out.empty()) out += " & ";
        out += to_text(lit, concept_names);
    }
    return out;
}

std::string to_text(const ClassRule& rule,
                    std::span<const std::string> concept_names,
                    std::span<const std::string> class_names) {
    std::string out;
    for (const ConjunctiveRule& clause : rule.clauses) {
        if (!out.empty()) {
            out += rule.connector == Connector::And ? " & " : " | ";
        }
        out += to_text(clause, concept_names);
    }
    out += " <-> ";
    if (rule.class_id >= 0 &&
        rule.class_id < static_cast<int>(class_names.size())) {
        out += class_names[rule.class_id];
    } else {
        out += "class" + std::to_string(rule.class_id);
    }
    return out;
}

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) {
        s.remove_prefix(1);
    }
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) {
        s.remove_suffix(1);
    }
    return s;
}

std::vector<std::string_view> split_on(std::string_view text,
                                       std::string_view sep) {
    std::vector<std::string_view> parts;
    size_t pos = 0;
    while (true) {
        const size_t next = text.find(sep, pos);
        if (next == std::string_view::npos) {
            parts.push_back(text.substr(pos));
            return parts;
        }
        parts.push_back(text.substr(pos, next - pos));
        pos = next + sep.size();
    }
}

int lookup(std::string_view name, std::span<const std::string> vocabulary,
           const char* kind) {
    for (size_t i = 0; i < vocabulary.size(); ++i) {
        if (vocabulary[i] == name) return static_cast<int>(i);
    }
    throw ParseError("unknown " + std::string(kind) + " '" +
                     std::string(name) + "'");
}

Literal parse_literal(std::string_view token,
                      std::span<const std::string> concept_names) {
    token = trim(token);
    if (token.empty()) {
        throw ParseError("empty literal in rule text");
    }
    Literal lit;
    if (token.front() == '~') {
        lit.positive = false;
        token = trim(token.substr(1));
    }
    lit.concept_id = lookup(token, concept_names, "concept");
    return lit;
}

}  // namespace

ConjunctiveRule parse_conjunction(std::string_view text,
                                  std::span<const std::string> concept_names) {
    std::vector<Literal> literals;
    for (std::string_view token : split_on(text, "&")) {
        literals.push_back(parse_literal(token, concept_names));
    }
    return ConjunctiveRule(std::move(literals));
}

ClassRule parse_class_rule(std::string_view text,
                           std::span<const std::string> concept_names,
                           std::span<const std::string> class_names) {
    const auto halves = split_on(text, "<->");
    if (halves.size() != 2) {
        throw ParseError("class rule must contain exactly one '<->': '" +
                         std::string(text) + "'");
    }
    const int class_id = lookup(trim(halves[1]), class_names, "class");

    std::vector<ConjunctiveRule> clauses;
    for (std::string_view part : split_on(halves[0], "|")) {
        clauses.push_back(parse_conjunction(part, concept_names));
    }
    const Connector connector =
        clauses.size() > 1 ? Connector::Or : Connector::And;
    return ClassRule::make(class_id, connector, std::move(clauses));
}

}  // namespace lrxfl::logic
