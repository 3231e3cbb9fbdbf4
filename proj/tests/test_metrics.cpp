#include <doctest.h>

#include <algorithm>
#include <random>

#include "datasets.hpp"
#include "metrics.hpp"

using namespace lrxfl;
using logic::ConjunctiveRule;
using logic::Connector;

namespace {

model::ConceptDataset balanced_dataset(int per_class) {
    // class 0 satisfies a & b; class 1 satisfies neither
    model::ConceptDataset d;
    d.concept_names = {"a", "b"};
    d.class_names = {"yes", "no"};
    for (int i = 0; i < per_class; ++i) {
        d.concepts.push_back({true, true});
        d.labels.push_back(0);
        d.concepts.push_back({false, i % 2 == 0});
        d.labels.push_back(1);
    }
    return d;
}

}  // namespace

TEST_CASE("model accuracy") {
    CHECK(metrics::model_accuracy(std::vector<int>{1, 0, 1},
                                  std::vector<int>{1, 0, 1}) == 1.0);
    CHECK(metrics::model_accuracy(std::vector<int>{1, 1, 1},
                                  std::vector<int>{0, 0, 0}) == 0.0);
    CHECK(metrics::model_accuracy(std::vector<int>{1, 0, 1, 0},
                                  std::vector<int>{1, 0, 1, 1}) == 0.75);
    CHECK_THROWS_AS(metrics::model_accuracy(std::vector<int>{1},
                                            std::vector<int>{}),
                    InvalidInputError);
}

TEST_CASE("rule accuracy counts") {
    const auto d = balanced_dataset(10);

    SUBCASE("perfect rule") {
        const auto rule = logic::ClassRule::make(
            0, Connector::And, {ConjunctiveRule({{0, true}, {1, true}})});
        const auto [acc, counts] = metrics::rule_accuracy(rule, d, 0);
        CHECK(acc == 1.0);
        CHECK(counts.positives == 10);
        CHECK(counts.negatives == 10);
        CHECK(counts.true_positives == 10);
        CHECK(counts.true_negatives == 10);
    }

    SUBCASE("partial rule arithmetic") {
        // rule 'b' fires on all positives and half the negatives
        const auto rule = logic::ClassRule::make(
            0, Connector::And, {ConjunctiveRule({{1, true}})});
        const auto [acc, counts] = metrics::rule_accuracy(rule, d, 0);
        CHECK(counts.true_positives == 10);
        CHECK(counts.true_negatives == 5);
        CHECK(acc == doctest::Approx(0.75));
    }

    SUBCASE("absent rule scores the negative share") {
        const auto [acc, counts] =
            metrics::rule_accuracy(std::nullopt, d, 0);
        CHECK(counts.true_positives == 0);
        CHECK(counts.true_negatives == counts.negatives);
        CHECK(acc == doctest::Approx(0.5));
    }

    SUBCASE("empty dataset is rejected") {
        model::ConceptDataset empty;
        empty.concept_names = {"a"};
        empty.class_names = {"x"};
        CHECK_THROWS_AS(metrics::rule_accuracy(std::nullopt, empty, 0),
                        InvalidInputError);
    }
}

TEST_CASE("rule fidelity equals rule accuracy on the relabeled dataset") {
    std::mt19937_64 rng(77);
    std::bernoulli_distribution coin(0.5);
    for (int trial = 0; trial < 25; ++trial) {
        model::ConceptDataset d;
        d.concept_names = {"a", "b", "c"};
        d.class_names = {"k0", "k1"};
        for (int i = 0; i < 40; ++i) {
            std::vector<bool> row(3);
            for (int j = 0; j < 3; ++j) row[j] = coin(rng);
            d.concepts.push_back(row);
            d.labels.push_back(coin(rng) ? 1 : 0);
        }
        model::EntropyClassifier m(2, 3, rng());
        const auto rule = logic::ClassRule::make(
            0, Connector::Or,
            {ConjunctiveRule({{0, true}}), ConjunctiveRule({{1, false}, {2, true}})});

        const double fidelity = metrics::rule_fidelity(rule, m, d, 0).first;

        model::ConceptDataset relabeled = d;
        for (size_t i = 0; i < d.size(); ++i) {
            relabeled.labels[i] = m.predict(d.concepts[i]);
        }
        const double oracle = metrics::rule_accuracy(rule, relabeled, 0).first;
        CHECK(fidelity == oracle);
    }
}

TEST_CASE("fidelity edge cases") {
    model::ConceptDataset d;
    d.concept_names = {"a"};
    d.class_names = {"k0", "k1"};
    d.concepts = {{true}, {false}, {true}};
    d.labels = {0, 1, 0};
    model::EntropyClassifier m(2, 1, 1);
    // force every prediction to class 0
    m.weights() = {{0.0}, {0.0}};
    m.biases() = {1.0, 0.0};

    SUBCASE("rule rejecting everything the model claims scores zero") {
        model::ConceptDataset all_true = d;
        all_true.concepts = {{true}, {true}, {true}};
        // model predicts class 0 everywhere; '~a' never fires
        const auto rule = logic::ClassRule::make(
            0, Connector::And, {ConjunctiveRule({{0, false}})});
        const double fid =
            metrics::rule_fidelity(rule, m, all_true, 0).first;
        CHECK(fid == 0.0);
    }

    SUBCASE("rule identical to the model decision is perfectly faithful") {
        // model always predicts class 0; the always-true rule is not
        // expressible, but class 1 with an absent rule matches the model
        // never predicting class 1
        const double fid = metrics::rule_fidelity(std::nullopt, m, d, 1).first;
        CHECK(fid == 1.0);
    }
}

TEST_CASE("metrics are invariant under row permutation") {
    auto d = balanced_dataset(8);
    model::EntropyClassifier m(2, 2, 5);
    m.train(d, 50);
    const auto rule = logic::ClassRule::make(
        0, Connector::And, {ConjunctiveRule({{0, true}, {1, true}})});

    const double acc_before = metrics::rule_accuracy(rule, d, 0).first;
    const double fid_before = metrics::rule_fidelity(rule, m, d, 0).first;

    std::mt19937_64 rng(8);
    std::vector<size_t> order(d.size());
    std::iota(order.begin(), order.end(), size_t{0});
    std::shuffle(order.begin(), order.end(), rng);
    model::ConceptDataset shuffled = d;
    for (size_t i = 0; i < order.size(); ++i) {
        shuffled.concepts[i] = d.concepts[order[i]];
        shuffled.labels[i] = d.labels[order[i]];
    }
    CHECK(metrics::rule_accuracy(rule, shuffled, 0).first == acc_before);
    CHECK(metrics::rule_fidelity(rule, m, shuffled, 0).first == fid_before);
}

TEST_CASE("report means exclude classes without rules") {
    const auto d = balanced_dataset(10);
    model::EntropyClassifier m(2, 2, 5);
    m.train(d, 100);
    std::vector<std::optional<logic::ClassRule>> rules;
    rules.push_back(logic::ClassRule::make(
        0, Connector::And, {ConjunctiveRule({{0, true}, {1, true}})}));
    rules.push_back(std::nullopt);

    const auto report = metrics::evaluate(m, rules, d);
    CHECK(report.classes_without_rule == 1);
    REQUIRE(report.per_class_rule_accuracy.size() == 2);
    CHECK(report.per_class_rule_accuracy[0].has_value());
    CHECK_FALSE(report.per_class_rule_accuracy[1].has_value());
    // mean equals the single rule's accuracy, not the average with zero
    CHECK(report.mean_rule_accuracy ==
          doctest::Approx(*report.per_class_rule_accuracy[0]));
}
