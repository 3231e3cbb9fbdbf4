#include <doctest.h>

#include <algorithm>
#include <random>
#include <set>

#include "datasets.hpp"
#include "fl_server.hpp"
#include "metrics.hpp"

using namespace lrxfl;
using logic::ConjunctiveRule;
using logic::Connector;

namespace {

fl::ClientUpdate vote_only(int id, Connector vote, double accuracy = 1.0) {
    fl::ClientUpdate u;
    u.client_id = id;
    u.connector_vote = vote;
    u.local_model_accuracy = accuracy;
    return u;
}

model::ConceptDataset random_validation(std::mt19937_64& rng, int n, int V,
                                        int classes = 2) {
    std::bernoulli_distribution coin(0.5);
    model::ConceptDataset val;
    for (int j = 0; j < n; ++j) val.concept_names.push_back("c" + std::to_string(j));
    for (int c = 0; c < classes; ++c) val.class_names.push_back("k" + std::to_string(c));
    for (int i = 0; i < V; ++i) {
        std::vector<bool> row(n);
        for (int j = 0; j < n; ++j) row[j] = coin(rng);
        val.concepts.push_back(row);
        val.labels.push_back(static_cast<int>(rng() % classes));
    }
    return val;
}

fl::CandidatePool random_pool(std::mt19937_64& rng, int n, int size) {
    std::bernoulli_distribution coin(0.5);
    fl::CandidatePool pool;
    std::set<ConjunctiveRule> seen;
    while (static_cast<int>(pool.size()) < size) {
        std::vector<int> ids(n);
        std::iota(ids.begin(), ids.end(), 0);
        std::shuffle(ids.begin(), ids.end(), rng);
        std::vector<logic::Literal> lits;
        const int len = 1 + static_cast<int>(rng() % 3);
        for (int l = 0; l < len; ++l) lits.push_back({ids[l], coin(rng)});
        ConjunctiveRule clause(std::move(lits));
        if (!seen.insert(clause).second) continue;
        const int owner = static_cast<int>(pool.size());
        pool.emplace_back(std::move(clause), owner, std::vector<int>{owner});
    }
    return pool;
}

double exhaustive_best(const fl::CandidatePool& pool, Connector connector,
                       const model::ConceptDataset& val, int class_id) {
    double best = -1.0;
    const int full = 1 << pool.size();
    for (int mask = 1; mask < full; ++mask) {
        std::vector<ConjunctiveRule> clauses;
        for (size_t i = 0; i < pool.size(); ++i) {
            if (mask & (1 << i)) clauses.push_back(pool[i].clause);
        }
        std::optional<logic::ClassRule> fused;
        try {
            fused = logic::fuse_clauses(clauses, connector, class_id);
        } catch (const ContradictionError&) {
            continue;
        }
        best = std::max(best,
                        metrics::rule_accuracy(fused, val, class_id).first);
    }
    return best;
}

}  // namespace

TEST_CASE("connector vote") {
    CHECK(fl::vote_connector(std::vector<fl::ClientUpdate>{
              vote_only(0, Connector::Or), vote_only(1, Connector::Or),
              vote_only(2, Connector::And)}) == Connector::Or);
    CHECK(fl::vote_connector(std::vector<fl::ClientUpdate>{
              vote_only(0, Connector::And), vote_only(1, Connector::And)}) ==
          Connector::And);
    // declared tie-break
    CHECK(fl::vote_connector(std::vector<fl::ClientUpdate>{
              vote_only(0, Connector::And), vote_only(1, Connector::Or)}) ==
          Connector::Or);
    CHECK_THROWS_AS(fl::vote_connector({}), InvalidInputError);
}

TEST_CASE("candidate filtering") {
    auto make_update = [](int id, double accuracy,
                          std::vector<ConjunctiveRule> clauses) {
        fl::ClientUpdate u = vote_only(id, Connector::Or, accuracy);
        u.class_rules.push_back(logic::ClassRule::make(
            0, Connector::Or, std::move(clauses),
            {}));
        return u;
    };
    const ConjunctiveRule a({{0, true}});
    const ConjunctiveRule b({{1, true}});

    SUBCASE("low-accuracy clients are dropped") {
        const std::vector<fl::ClientUpdate> updates = {
            make_update(0, 0.95, {a}), make_update(1, 0.40, {b})};
        const auto pools = fl::filter_candidates(updates, 0.8, 1);
        REQUIRE(pools[0].size() == 1);
        CHECK(pools[0][0].clause == a);
        CHECK(pools[0][0].owner == 0);
    }

    SUBCASE("identical clauses merge with full provenance") {
        const std::vector<fl::ClientUpdate> updates = {
            make_update(2, 0.9, {a}), make_update(4, 0.9, {a})};
        const auto pools = fl::filter_candidates(updates, 0.7, 1);
        REQUIRE(pools[0].size() == 1);
        CHECK(pools[0][0].owner == 2);
        CHECK(pools[0][0].contributors == std::vector<int>{2, 4});
    }

    SUBCASE("everyone below theta leaves empty pools") {
        const std::vector<fl::ClientUpdate> updates = {
            make_update(0, 0.2, {a}), make_update(1, 0.3, {b})};
        const auto pools = fl::filter_candidates(updates, 0.7, 1);
        CHECK(pools[0].empty());
    }

    SUBCASE("absent rules contribute nothing") {
        fl::ClientUpdate u = vote_only(0, Connector::Or, 0.9);
        u.class_rules.push_back(std::nullopt);
        const auto pools =
            fl::filter_candidates(std::vector<fl::ClientUpdate>{u}, 0.5, 1);
        CHECK(pools[0].empty());
    }
}

TEST_CASE("beam aggregation") {
    std::mt19937_64 rng(2025);

    SUBCASE("complementary conjunctions fuse to beat every singleton") {
        // ground truth: class 0 iff c0 & c1 & c2 & c3
        model::ConceptDataset val;
        val.concept_names = {"c0", "c1", "c2", "c3"};
        val.class_names = {"k0", "k1"};
        std::bernoulli_distribution coin(0.5);
        for (int i = 0; i < 200; ++i) {
            std::vector<bool> row(4);
            for (int j = 0; j < 4; ++j) row[j] = coin(rng);
            const bool positive = row[0] && row[1] && row[2] && row[3];
            val.concepts.push_back(row);
            val.labels.push_back(positive ? 0 : 1);
        }
        fl::CandidatePool pool;
        pool.emplace_back(ConjunctiveRule({{0, true}, {1, true}}), 2,
                          std::vector<int>{2});
        pool.emplace_back(ConjunctiveRule({{1, true}, {2, true}}), 4,
                          std::vector<int>{4});
        pool.emplace_back(ConjunctiveRule({{2, true}, {3, true}}), 8,
                          std::vector<int>{8});
        pool.emplace_back(ConjunctiveRule({{0, true}, {3, true}}), 9,
                          std::vector<int>{9});

        const auto rules = fl::beam_aggregate({pool, {}}, Connector::And, val, 8);
        const auto& entry = rules.per_class[0];
        REQUIRE(entry.rule.has_value());
        CHECK(entry.validation_accuracy == 1.0);
        for (const auto& cand : pool) {
            const auto single =
                logic::ClassRule::make(0, Connector::And, {cand.clause});
            CHECK(entry.validation_accuracy >=
                  metrics::rule_accuracy(single, val, 0).first);
        }
        // provenance union covers the contributing clients
        REQUIRE(entry.clause_contributors.size() == 1);
        CHECK(entry.clause_contributors[0].size() >= 2);
    }

    SUBCASE("matches the exhaustive oracle on small pools") {
        for (int trial = 0; trial < 50; ++trial) {
            const int n = 3 + static_cast<int>(rng() % 3);
            auto val = random_validation(rng, n, 30 + static_cast<int>(rng() % 20));
            auto pool = random_pool(rng, n, 1 + static_cast<int>(rng() % 3));
            for (auto connector : {Connector::Or, Connector::And}) {
                const auto rules =
                    fl::beam_aggregate({pool}, connector, val, 8);
                const double beam_acc =
                    metrics::rule_accuracy(rules.per_class[0].rule, val, 0)
                        .first;
                CHECK(beam_acc ==
                      exhaustive_best(pool, connector, val, 0));
            }
        }
    }

    SUBCASE("accuracy is monotone in beam width and exact at full width") {
        for (int trial = 0; trial < 20; ++trial) {
            const int n = 4;
            auto val = random_validation(rng, n, 40);
            auto pool = random_pool(rng, n, 4);
            double previous = -1.0;
            for (int width : {1, 2, 4, 16}) {
                const auto rules =
                    fl::beam_aggregate({pool}, Connector::Or, val, width);
                const double acc = rules.per_class[0].validation_accuracy;
                CHECK(acc >= previous);
                previous = acc;
            }
            CHECK(previous == exhaustive_best(pool, Connector::Or, val, 0));
        }
    }

    SUBCASE("single candidate is returned as-is") {
        auto val = random_validation(rng, 3, 20);
        fl::CandidatePool pool;
        pool.emplace_back(ConjunctiveRule({{0, true}}), 5,
                          std::vector<int>{5});
        const auto rules = fl::beam_aggregate({pool}, Connector::Or, val, 8);
        REQUIRE(rules.per_class[0].rule.has_value());
        CHECK(rules.per_class[0].rule->clauses.front() == pool[0].clause);
        CHECK(rules.per_class[0].rule->clause_owner ==
              std::vector<int>{5});
    }

    SUBCASE("contradictory AND extensions are discarded, not fatal") {
        auto val = random_validation(rng, 2, 20);
        fl::CandidatePool pool;
        pool.emplace_back(ConjunctiveRule({{0, true}}), 0,
                          std::vector<int>{0});
        pool.emplace_back(ConjunctiveRule({{0, false}}), 1,
                          std::vector<int>{1});
        const auto rules = fl::beam_aggregate({pool}, Connector::And, val, 8);
        REQUIRE(rules.per_class[0].rule.has_value());
        CHECK(rules.per_class[0].rule->clauses.front().length() == 1);
    }

    SUBCASE("empty pool yields an absent rule") {
        auto val = random_validation(rng, 2, 20);
        const auto rules = fl::beam_aggregate({{}}, Connector::Or, val, 8);
        CHECK_FALSE(rules.per_class[0].rule.has_value());
        const double absent =
            metrics::rule_accuracy(std::nullopt, val, 0).first;
        CHECK(rules.per_class[0].validation_accuracy == absent);
    }

    SUBCASE("work stays within the b*K^2 contract") {
        for (int K : {4, 8, 12}) {
            for (int b : {2, 8}) {
                auto val = random_validation(rng, 6, 40);
                auto pool = random_pool(rng, 6, K);
                fl::BeamStats stats;
                fl::beam_aggregate({pool}, Connector::Or, val, b, &stats);
                // c = 2: singletons plus at most b*K extensions per depth
                CHECK(stats.scored_states <=
                      2LL * b * static_cast<long long>(K) * K + K);
            }
        }
    }
}

TEST_CASE("union aggregation joins every candidate") {
    std::mt19937_64 rng(7);
    auto val = random_validation(rng, 4, 30);
    auto pool = random_pool(rng, 4, 3);
    const auto rules = fl::union_aggregate({pool}, Connector::Or, val);
    REQUIRE(rules.per_class[0].rule.has_value());
    CHECK(rules.per_class[0].rule->clauses.size() == 3);
}

TEST_CASE("client weights") {
    auto rule_owned_by = [](int class_id, std::vector<int> owners) {
        std::vector<ConjunctiveRule> clauses;
        for (size_t i = 0; i < owners.size(); ++i) {
            clauses.push_back(
                ConjunctiveRule({{static_cast<int>(i), true}}));
        }
        fl::GlobalClassRule entry;
        entry.rule = logic::ClassRule::make(class_id, Connector::Or,
                                            std::move(clauses),
                                            std::move(owners));
        return entry;
    };

    SUBCASE("selection counts 2,1,1,0 give 0.5,0.25,0.25,0") {
        fl::GlobalRuleSet rules;
        rules.per_class.push_back(rule_owned_by(0, {0, 1}));
        rules.per_class.push_back(rule_owned_by(1, {0, 2}));
        const auto w = fl::compute_weights(rules, 4);
        CHECK(w == std::vector<double>{0.5, 0.25, 0.25, 0.0});
    }

    SUBCASE("no selected rules fall back to uniform") {
        fl::GlobalRuleSet rules;
        rules.per_class.emplace_back();
        const auto w = fl::compute_weights(rules, 4);
        CHECK(w == std::vector<double>{0.25, 0.25, 0.25, 0.25});
    }

    SUBCASE("single selected client takes everything") {
        fl::GlobalRuleSet rules;
        rules.per_class.push_back(rule_owned_by(0, {2}));
        const auto w = fl::compute_weights(rules, 4);
        CHECK(w == std::vector<double>{0.0, 0.0, 1.0, 0.0});
    }

    SUBCASE("weights always sum to one") {
        std::mt19937_64 rng(13);
        for (int trial = 0; trial < 1000; ++trial) {
            const int K = 1 + static_cast<int>(rng() % 12);
            const int C = 1 + static_cast<int>(rng() % 5);
            fl::GlobalRuleSet rules;
            for (int c = 0; c < C; ++c) {
                if (rng() % 4 == 0) {
                    rules.per_class.emplace_back();
                    continue;
                }
                std::vector<int> owners;
                const int clauses = 1 + static_cast<int>(rng() % 4);
                for (int i = 0; i < clauses; ++i) {
                    owners.push_back(static_cast<int>(rng() % K));
                }
                std::sort(owners.begin(), owners.end());
                owners.erase(std::unique(owners.begin(), owners.end()),
                             owners.end());
                rules.per_class.push_back(rule_owned_by(c, owners));
            }
            const auto w = fl::compute_weights(rules, K);
            double total = 0.0;
            for (double v : w) {
                CHECK(v >= 0.0);
                total += v;
            }
            CHECK(std::abs(total - 1.0) <= 1e-9);
        }
    }
}

TEST_CASE("model aggregation") {
    auto update_with = [](int id, std::vector<double> params) {
        fl::ClientUpdate u;
        u.client_id = id;
        u.parameters = std::move(params);
        return u;
    };

    SUBCASE("identical parameters are a fixed point") {
        const std::vector<fl::ClientUpdate> updates = {
            update_with(0, {1.0, 2.0}), update_with(1, {1.0, 2.0})};
        CHECK(fl::aggregate_models(updates, std::vector<double>{0.3, 0.7}) ==
              std::vector<double>{1.0, 2.0});
    }

    SUBCASE("degenerate weights select one client") {
        const std::vector<fl::ClientUpdate> updates = {
            update_with(0, {1.0, 2.0}), update_with(1, {5.0, 6.0})};
        CHECK(fl::aggregate_models(updates, std::vector<double>{1.0, 0.0}) ==
              std::vector<double>{1.0, 2.0});
    }

    SUBCASE("even split averages elementwise") {
        const std::vector<fl::ClientUpdate> updates = {
            update_with(0, {1.0, 2.0}), update_with(1, {3.0, 6.0})};
        CHECK(fl::aggregate_models(updates, std::vector<double>{0.5, 0.5}) ==
              std::vector<double>{2.0, 4.0});
    }

    SUBCASE("shape mismatches are rejected") {
        const std::vector<fl::ClientUpdate> updates = {
            update_with(0, {1.0, 2.0}), update_with(1, {3.0})};
        CHECK_THROWS_AS(
            fl::aggregate_models(updates, std::vector<double>{0.5, 0.5}),
            InvalidInputError);
    }

    SUBCASE("weights must normalize") {
        const std::vector<fl::ClientUpdate> updates = {
            update_with(0, {1.0}), update_with(1, {2.0})};
        CHECK_THROWS_AS(
            fl::aggregate_models(updates, std::vector<double>{0.5, 0.6}),
            InvalidInputError);
    }
}

TEST_CASE("stopping") {
    CHECK(fl::check_stop(5, 0.5, 0.95, 5));
    CHECK(fl::check_stop(1, 0.99, 0.95, 10));
    CHECK_FALSE(fl::check_stop(1, 0.5, 0.95, 10));
}
