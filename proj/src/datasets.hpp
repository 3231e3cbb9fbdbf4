#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "logic.hpp"
#include "model.hpp"

namespace lrxfl::data {

/// How a dataset is split between the server and the federation.
struct PartitionPlan {
    int num_clients = 10;
    double server_validation_fraction = 0.10;
    double server_test_fraction = 0.10;
    double client_train_fraction = 0.90;
    double client_validation_fraction = 0.05;
    double client_test_fraction = 0.05;
    uint64_t seed = 0;

    void validate() const;
};

struct NoiseSpec {
    double client_fraction = 0.0;  // t: share of clients made noisy
    double data_fraction = 1.0;    // s: share of a noisy client's train labels
    uint64_t seed = 0;
};

/// One ground-truth class definition for the conjunctive generator.
struct ClassSpec {
    std::string class_name;
    std::vector<logic::Literal> defining;
};

struct ClientData {
    model::ConceptDataset train;
    model::ConceptDataset validation;
    model::ConceptDataset test;
};

struct FederatedPartition {
    model::ConceptDataset server_validation;
    model::ConceptDataset server_test;
    std::vector<ClientData> clients;
};

/// One-hot digit concepts d0..d9 labelled by parity of the hot digit.
model::ConceptDataset gen_parity(int samples, uint64_t seed);

/// Samples are drawn per class and always satisfy that class's defining
/// conjunction; concepts outside it are independent coin flips, each
/// additionally flipped with probability `flip_noise`.
model::ConceptDataset gen_conjunctive(int samples,
                                      const std::vector<ClassSpec>& class_specs,
                                      std::vector<std::string> concept_names,
                                      double flip_noise, uint64_t seed);

/// Loads a delimited file whose header names the concepts. Numeric cells
/// become true when strictly above the column's threshold (default 0.5).
/// Without an explicit `class_names` vocabulary, classes are numbered in
/// order of first appearance; with one, any other label value is a parse
/// error.
model::ConceptDataset load_csv(const std::string& path,
                               const std::string& label_column,
                               const std::map<std::string, double>& thresholds,
                               double default_threshold = 0.5,
                               const std::vector<std::string>& class_names = {});

void export_csv(const model::ConceptDataset& data, const std::string& path,
                const std::string& label_column = "label");

FederatedPartition partition(const model::ConceptDataset& data,
                             const PartitionPlan& plan);

/// Shuffles the labels of an s-fraction of training samples in floor(t*K)
/// seed-chosen clients. Returns the sorted roster of mutated clients.
std::vector<int> inject_noise(std::vector<ClientData>& clients,
                              const NoiseSpec& spec);

}  // namespace lrxfl::data
