#include <doctest.h>

#include <cmath>
#include <random>

#include "datasets.hpp"
#include "model.hpp"

using namespace lrxfl;
using model::ConceptDataset;
using model::EntropyClassifier;

namespace {

ConceptDataset tiny_dataset() {
    ConceptDataset data;
    data.concept_names = {"a", "b", "c", "d"};
    data.class_names = {"k0", "k1"};
    std::mt19937_64 rng(11);
    std::bernoulli_distribution coin(0.5);
    for (int i = 0; i < 24; ++i) {
        std::vector<bool> row(4);
        for (int j = 0; j < 4; ++j) row[j] = coin(rng);
        data.concepts.push_back(row);
        // label correlates with a xor d, so no trivial solution exists
        data.labels.push_back((row[0] ^ row[3]) ? 1 : 0);
    }
    return data;
}

}  // namespace

TEST_CASE("relevance is a probability distribution") {
    SUBCASE("uniform weights give the uniform distribution") {
        EntropyClassifier model(2, 5, 1);
        for (auto& row : model.weights()) {
            for (double& w : row) w = 0.7;
        }
        const auto rel = model.relevance(0);
        for (double r : rel) CHECK(r == doctest::Approx(0.2));
    }

    SUBCASE("a dominant weight concentrates relevance") {
        model::ClassifierOptions options;
        options.temperature = 1.0;
        EntropyClassifier model(1, 4, 1, options);
        model.weights()[0] = {10.0, 0.0, 0.0, 0.0};
        const auto rel = model.relevance(0);
        CHECK(rel[0] > 0.99);
    }

    SUBCASE("random models stay normalized within 1e-9") {
        std::mt19937_64 rng(3);
        for (int trial = 0; trial < 50; ++trial) {
            EntropyClassifier model(3, 8, rng());
            for (int c = 0; c < 3; ++c) {
                double total = 0.0;
                for (double r : model.relevance(c)) {
                    CHECK(r >= 0.0);
                    total += r;
                }
                CHECK(std::abs(total - 1.0) <= 1e-9);
            }
        }
    }
}

TEST_CASE("training") {
    SUBCASE("parity is learnable with the defaults") {
        const auto data = data::gen_parity(600, 5);
        EntropyClassifier model(2, 10, 5);
        const auto trace = model.train(data);
        CHECK(trace.size() == static_cast<size_t>(model.options().epochs) + 1);
        CHECK(trace.back() < trace.front());

        int correct = 0;
        for (size_t i = 0; i < data.size(); ++i) {
            if (model.predict(data.concepts[i]) == data.labels[i]) ++correct;
        }
        CHECK(static_cast<double>(correct) / data.size() >= 0.99);
    }

    SUBCASE("zero learning rate leaves parameters untouched") {
        const auto data = tiny_dataset();
        model::ClassifierOptions options;
        options.learning_rate = 0.0;
        options.entropy_coeff = 0.0;
        EntropyClassifier model(2, 4, 9, options);
        const auto before = model.parameters();
        model.train(data, 1);
        CHECK(model.parameters() == before);
    }

    SUBCASE("empty data is rejected") {
        ConceptDataset empty;
        empty.concept_names = {"a"};
        empty.class_names = {"k0"};
        EntropyClassifier model(1, 1, 0);
        CHECK_THROWS_AS(model.train(empty), InvalidInputError);
    }
}

TEST_CASE("analytic gradient matches central finite differences") {
    const auto data = tiny_dataset();
    model::ClassifierOptions options;
    options.entropy_coeff = 0.01;
    EntropyClassifier model(2, 4, 17, options);

    // One optimizer step recovers the analytic gradient from the parameter
    // delta; the oracle differentiates loss() numerically.
    const std::vector<double> params = model.parameters();
    model::ClassifierOptions step = options;
    step.learning_rate = 1.0;
    EntropyClassifier stepper(2, 4, 17, step);
    stepper.set_parameters(params);
    stepper.train(data, 1);
    const std::vector<double> stepped = stepper.parameters();

    const double eps = 1e-5;
    double worst = 0.0;
    for (size_t i = 0; i < params.size(); ++i) {
        const double analytic = params[i] - stepped[i];  // lr = 1

        EntropyClassifier probe(2, 4, 17, options);
        std::vector<double> shifted = params;
        shifted[i] = params[i] + eps;
        probe.set_parameters(shifted);
        const double up = probe.loss(data);
        shifted[i] = params[i] - eps;
        probe.set_parameters(shifted);
        const double down = probe.loss(data);
        const double numeric = (up - down) / (2.0 * eps);

        const double scale = std::max({1.0, std::abs(analytic),
                                       std::abs(numeric)});
        worst = std::max(worst, std::abs(analytic - numeric) / scale);
    }
    CHECK(worst < 1e-4);
}

TEST_CASE("prediction") {
    SUBCASE("ties break toward the lowest class id") {
        EntropyClassifier model(3, 2, 0);
        for (auto& row : model.weights()) row = {0.0, 0.0};
        model.biases() = {0.0, 0.0, 0.0};
        CHECK(model.predict({true, false}) == 0);
    }

    SUBCASE("scores stay finite") {
        std::mt19937_64 rng(4);
        EntropyClassifier model(2, 6, rng());
        std::bernoulli_distribution coin(0.5);
        for (int trial = 0; trial < 20; ++trial) {
            std::vector<bool> sample(6);
            for (int j = 0; j < 6; ++j) sample[j] = coin(rng);
            for (double s : model.class_scores(sample)) {
                CHECK(std::isfinite(s));
            }
        }
    }

    SUBCASE("sample width is validated") {
        EntropyClassifier model(2, 4, 0);
        CHECK_THROWS_AS(model.predict({true, false}), InvalidInputError);
    }
}

TEST_CASE("active masks") {
    SUBCASE("uniform relevance keeps every concept") {
        const std::vector<double> rel = {0.25, 0.25, 0.25, 0.25};
        const auto mask = model::mask_from_relevance(rel, 0.5);
        CHECK(mask == std::vector<bool>{true, true, true, true});
    }

    SUBCASE("relative threshold drops weak concepts") {
        const std::vector<double> rel = {0.7, 0.2, 0.1};
        const auto mask = model::mask_from_relevance(rel, 0.5);
        CHECK(mask == std::vector<bool>{true, false, false});
    }

    SUBCASE("tau = 1 keeps exactly the argmax concepts") {
        const std::vector<double> rel = {0.4, 0.4, 0.2};
        const auto mask = model::mask_from_relevance(rel, 1.0);
        CHECK(mask == std::vector<bool>{true, true, false});
    }

    SUBCASE("raising tau never adds a concept") {
        std::mt19937_64 rng(6);
        std::uniform_real_distribution<double> unit(0.01, 1.0);
        for (int trial = 0; trial < 40; ++trial) {
            std::vector<double> rel(6);
            double total = 0.0;
            for (double& r : rel) {
                r = unit(rng);
                total += r;
            }
            for (double& r : rel) r /= total;
            const double low = unit(rng);
            const double high = std::min(1.0, low + unit(rng) * (1.0 - low));
            const auto wide = model::mask_from_relevance(rel, low);
            const auto narrow = model::mask_from_relevance(rel, high);
            for (size_t j = 0; j < rel.size(); ++j) {
                if (narrow[j]) CHECK(wide[j]);
            }
        }
    }

    SUBCASE("the argmax concept always survives") {
        EntropyClassifier model(2, 5, 123);
        const auto mask = model.active_mask(0);
        CHECK(std::count(mask.begin(), mask.end(), true) >= 1);
    }
}

TEST_CASE("truth tables") {
    const auto data = data::gen_parity(400, 21);
    EntropyClassifier model(2, 10, 21);
    model.train(data);

    SUBCASE("rows evaluate true on the samples that generated them") {
        for (int c = 0; c < 2; ++c) {
            const auto table = model::build_truth_table(model, data, c);
            const auto mask = model.active_mask(c);
            for (size_t i = 0; i < data.size(); ++i) {
                if (model.predict(data.concepts[i]) != c) continue;
                bool matched = false;
                for (const auto& row : table.rows) {
                    if (row.evaluate(data.concepts[i])) {
                        matched = true;
                        break;
                    }
                }
                CHECK(matched);
            }
            // rows use only masked concepts
            for (const auto& row : table.rows) {
                for (const auto& lit : row.literals()) {
                    CHECK(mask[lit.concept_id]);
                }
            }
        }
    }

    SUBCASE("support counts deduplicate identical samples") {
        ConceptDataset two;
        two.concept_names = {"a", "b"};
        two.class_names = {"k0", "k1"};
        two.concepts = {{true, false}, {true, false}};
        two.labels = {0, 0};
        EntropyClassifier tiny(2, 2, 3);
        const int predicted = tiny.predict({true, false});
        const auto table = model::build_truth_table(tiny, two, predicted);
        REQUIRE(table.rows.size() == 1);
        CHECK(table.support[0] == 2);
    }

    SUBCASE("a class with no predictions yields an empty table") {
        ConceptDataset single;
        single.concept_names = {"a"};
        single.class_names = {"k0", "k1"};
        single.concepts = {{true}};
        single.labels = {0};
        EntropyClassifier tiny(2, 1, 3);
        const int predicted = tiny.predict({true});
        const auto table =
            model::build_truth_table(tiny, single, 1 - predicted);
        CHECK(table.rows.empty());
    }
}

TEST_CASE("sample rule extraction orders by support then canonical form") {
    model::TruthTable table;
    table.class_id = 0;
    table.rows = {logic::ConjunctiveRule({{0, true}}),
                  logic::ConjunctiveRule({{1, true}}),
                  logic::ConjunctiveRule({{2, true}})};
    table.support = {2, 5, 5};
    const auto rules = model::extract_sample_rules(table);
    REQUIRE(rules.size() == 3);
    CHECK(rules[0] == table.rows[1]);
    CHECK(rules[1] == table.rows[2]);
    CHECK(rules[2] == table.rows[0]);

    CHECK(model::extract_sample_rules(model::TruthTable{}).empty());
}

TEST_CASE("training is deterministic under a fixed seed") {
    const auto data = data::gen_parity(200, 31);
    EntropyClassifier a(2, 10, 31);
    EntropyClassifier b(2, 10, 31);
    a.train(data, 50);
    b.train(data, 50);
    CHECK(a.parameters() == b.parameters());
}
