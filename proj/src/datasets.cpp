#include "datasets.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

namespace lrxfl::data {

namespace {

model::ConceptDataset take_rows(const model::ConceptDataset& data,
                                std::span<const size_t> indices) {
    model::ConceptDataset out;
    out.concept_names = data.concept_names;
    out.class_names = data.class_names;
    out.concepts.reserve(indices.size());
    out.labels.reserve(indices.size());
    for (size_t idx : indices) {
        out.concepts.push_back(data.concepts[idx]);
        out.labels.push_back(data.labels[idx]);
    }
    return out;
}

}  // namespace

void PartitionPlan::validate() const {
    if (num_clients < 1) {
        throw InvalidInputError("partition needs at least one client");
    }
    auto check_fraction = [](double f, const char* name) {
        if (!(f > 0.0 && f < 1.0)) {
            throw InvalidInputError(std::string(name) +
                                    " must lie strictly between 0 and 1");
        }
    };
    check_fraction(server_validation_fraction, "server validation fraction");
    check_fraction(server_test_fraction, "server test fraction");
    check_fraction(client_train_fraction, "client train fraction");
    check_fraction(client_validation_fraction, "client validation fraction");
    check_fraction(client_test_fraction, "client test fraction");
    const double client_total = client_train_fraction +
                                client_validation_fraction +
                                client_test_fraction;
    if (std::abs(client_total - 1.0) > 1e-9) {
        throw InvalidInputError("client split fractions must sum to 1");
    }
    if (server_validation_fraction + server_test_fraction >= 1.0) {
        throw InvalidInputError("server fractions leave no client data");
    }
}

model::ConceptDataset gen_parity(int samples, uint64_t seed) {
    if (samples < 1) {
        throw InvalidInputError("parity dataset needs at least one sample");
    }
    model::ConceptDataset data;
    for (int d = 0; d < 10; ++d) {
        data.concept_names.push_back("d" + std::to_string(d));
    }
    data.class_names = {"even", "odd"};

    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> digit(0, 9);
    data.concepts.reserve(samples);
    data.labels.reserve(samples);
    for (int i = 0; i < samples; ++i) {
        const int hot = digit(rng);
        std::vector<bool> row(10, false);
        row[hot] = true;
        data.concepts.push_back(std::move(row));
        data.labels.push_back(hot % 2);
    }
    return data;
}

model::ConceptDataset gen_conjunctive(int samples,
                                      const std::vector<ClassSpec>& class_specs,
                                      std::vector<std::string> concept_names,
                                      double flip_noise, uint64_t seed) {
    if (samples < 1) {
        throw InvalidInputError("conjunctive dataset needs at least one sample");
    }
    if (class_specs.empty()) {
        throw InvalidInputError("conjunctive dataset needs class specs");
    }
    const int n = static_cast<int>(concept_names.size());
    for (const ClassSpec& spec : class_specs) {
        for (const logic::Literal& lit : spec.defining) {
            if (lit.concept_id < 0 || lit.concept_id >= n) {
                throw IndexError("class spec for '" + spec.class_name +
                                 "' references concept " +
                                 std::to_string(lit.concept_id) +
                                 " outside the vocabulary");
            }
        }
    }

    model::ConceptDataset data;
    data.concept_names = std::move(concept_names);
    for (const ClassSpec& spec : class_specs) {
        data.class_names.push_back(spec.class_name);
    }

    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> pick_class(
        0, static_cast<int>(class_specs.size()) - 1);
    std::bernoulli_distribution coin(0.5);
    std::bernoulli_distribution flip(flip_noise);

    data.concepts.reserve(samples);
    data.labels.reserve(samples);
    for (int i = 0; i < samples; ++i) {
        const int c = pick_class(rng);
        std::vector<bool> row(n);
        std::vector<bool> defining(n, false);
        for (const logic::Literal& lit : class_specs[c].defining) {
            defining[lit.concept_id] = true;
            row[lit.concept_id] = lit.positive;
        }
        for (int j = 0; j < n; ++j) {
            if (!defining[j]) row[j] = coin(rng);
        }
        if (flip_noise > 0.0) {
            for (int j = 0; j < n; ++j) {
                if (!defining[j] && flip(rng)) row[j] = !row[j];
            }
        }
        data.concepts.push_back(std::move(row));
        data.labels.push_back(c);
    }
    return data;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.push_back("");
    return cells;
}

std::string trim_copy(const std::string& s) {
    size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

double parse_numeric(const std::string& cell, size_t row, const std::string& column) {
    const std::string text = trim_copy(cell);
    double value = 0.0;
    const auto* begin = text.data();
    const auto* end = text.data() + text.size();
    const auto result = std::from_chars(begin, end, value);
    if (result.ec != std::errc() || result.ptr != end || text.empty()) {
        throw ParseError("row " + std::to_string(row) + ", column '" + column +
                         "': cell '" + cell + "' is not numeric");
    }
    return value;
}

}  // namespace

model::ConceptDataset load_csv(const std::string& path,
                               const std::string& label_column,
                               const std::map<std::string, double>& thresholds,
                               double default_threshold,
                               const std::vector<std::string>& class_names) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open '" + path + "' for reading");
    }
    std::string line;
    if (!std::getline(in, line)) {
        throw ParseError("'" + path + "' is empty");
    }
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::vector<std::string> header = split_csv_line(line);

    int label_index = -1;
    for (size_t i = 0; i < header.size(); ++i) {
        if (trim_copy(header[i]) == label_column) {
            label_index = static_cast<int>(i);
            break;
        }
    }
    if (label_index < 0) {
        throw ParseError("label column '" + label_column + "' not found in '" +
                         path + "'");
    }
    for (const auto& [column, _] : thresholds) {
        if (std::find(header.begin(), header.end(), column) == header.end()) {
            throw ParseError("threshold column '" + column +
                             "' not found in '" + path + "'");
        }
    }

    model::ConceptDataset data;
    std::vector<double> column_threshold;
    for (size_t i = 0; i < header.size(); ++i) {
        if (static_cast<int>(i) == label_index) continue;
        const std::string name = trim_copy(header[i]);
        data.concept_names.push_back(name);
        const auto it = thresholds.find(name);
        column_threshold.push_back(it == thresholds.end() ? default_threshold
                                                          : it->second);
    }

    std::map<std::string, int> class_ids;  // name -> id, first-appearance order
    size_t row = 0;
    while (std::getline(in, line)) {
        ++row;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim_copy(line).empty()) continue;
        const std::vector<std::string> cells = split_csv_line(line);
        if (cells.size() != header.size()) {
            throw ParseError("row " + std::to_string(row) + ": expected " +
                             std::to_string(header.size()) + " cells, found " +
                             std::to_string(cells.size()));
        }
        std::vector<bool> concepts;
        concepts.reserve(data.concept_names.size());
        size_t concept_index = 0;
        for (size_t i = 0; i < cells.size(); ++i) {
            if (static_cast<int>(i) == label_index) continue;
            const double value =
                parse_numeric(cells[i], row, trim_copy(header[i]));
            concepts.push_back(value > column_threshold[concept_index]);
            ++concept_index;
        }
        const std::string label = trim_copy(cells[label_index]);
        if (label.empty()) {
            throw ParseError("row " + std::to_string(row) +
                             ": empty label value");
        }
        auto [it, inserted] =
            class_ids.emplace(label, static_cast<int>(class_ids.size()));
        if (inserted) data.class_names.push_back(label);
        data.concepts.push_back(std::move(concepts));
        data.labels.push_back(it->second);
    }
    if (data.concepts.empty()) {
        throw ParseError("'" + path + "' contains no data rows");
    }
    return data;
}

void export_csv(const model::ConceptDataset& data, const std::string& path,
                const std::string& label_column) {
    std::ofstream out(path);
    if (!out) {
        throw IoError("cannot open '" + path + "' for writing");
    }
    for (const std::string& name : data.concept_names) {
        out << name << ',';
    }
    out << label_column << '\n';
    for (size_t i = 0; i < data.size(); ++i) {
        for (bool v : data.concepts[i]) {
            out << (v ? '1' : '0') << ',';
        }
        out << data.class_names[data.labels[i]] << '\n';
    }
    if (!out) {
        throw IoError("failed while writing '" + path + "'");
    }
}

FederatedPartition partition(const model::ConceptDataset& data,
                             const PartitionPlan& plan) {
    plan.validate();
    const size_t total = data.size();
    std::vector<size_t> order(total);
    std::iota(order.begin(), order.end(), size_t{0});
    std::mt19937_64 rng(plan.seed);
    std::shuffle(order.begin(), order.end(), rng);

    const size_t n_server_val =
        static_cast<size_t>(plan.server_validation_fraction * total);
    const size_t n_server_test =
        static_cast<size_t>(plan.server_test_fraction * total);
    if (n_server_val + n_server_test >= total) {
        throw InvalidInputError("dataset too small for the server fractions");
    }

    FederatedPartition out;
    size_t cursor = 0;
    out.server_validation =
        take_rows(data, std::span(order).subspan(cursor, n_server_val));
    cursor += n_server_val;
    out.server_test =
        take_rows(data, std::span(order).subspan(cursor, n_server_test));
    cursor += n_server_test;

    const size_t pool = total - cursor;
    const size_t base = pool / plan.num_clients;
    const size_t extra = pool % plan.num_clients;
    for (int k = 0; k < plan.num_clients; ++k) {
        const size_t share = base + (static_cast<size_t>(k) < extra ? 1 : 0);
        if (share < 3) {
            throw InvalidInputError(
                "client " + std::to_string(k) +
                " would receive fewer than 3 samples; provide more data");
        }
        const auto slice = std::span(order).subspan(cursor, share);
        cursor += share;

        size_t n_val = static_cast<size_t>(plan.client_validation_fraction *
                                           static_cast<double>(share));
        size_t n_test = static_cast<size_t>(plan.client_test_fraction *
                                            static_cast<double>(share));
        n_val = std::max<size_t>(n_val, 1);
        n_test = std::max<size_t>(n_test, 1);
        const size_t n_train = share - n_val - n_test;

        ClientData client;
        client.train = take_rows(data, slice.subspan(0, n_train));
        client.validation = take_rows(data, slice.subspan(n_train, n_val));
        client.test = take_rows(data, slice.subspan(n_train + n_val, n_test));
        out.clients.push_back(std::move(client));
    }
    return out;
}

std::vector<int> inject_noise(std::vector<ClientData>& clients,
                              const NoiseSpec& spec) {
    if (spec.client_fraction < 0.0 || spec.client_fraction > 1.0 ||
        spec.data_fraction < 0.0 || spec.data_fraction > 1.0) {
        throw InvalidInputError("noise fractions must lie in [0, 1]");
    }
    const int K = static_cast<int>(clients.size());
    const int noisy_count =
        static_cast<int>(std::floor(spec.client_fraction * K));

    std::mt19937_64 rng(spec.seed);
    std::vector<int> ids(K);
    std::iota(ids.begin(), ids.end(), 0);
    std::shuffle(ids.begin(), ids.end(), rng);
    std::vector<int> roster(ids.begin(), ids.begin() + noisy_count);
    std::sort(roster.begin(), roster.end());

    for (int k : roster) {
        auto& labels = clients[k].train.labels;
        const size_t m = labels.size();
        const size_t mutated =
            static_cast<size_t>(std::floor(spec.data_fraction * m));
        std::vector<size_t> rows(m);
        std::iota(rows.begin(), rows.end(), size_t{0});
        std::shuffle(rows.begin(), rows.end(), rng);
        rows.resize(mutated);

        // Random permutation of the selected labels; the multiset is
        // preserved by construction.
        std::vector<int> selected;
        selected.reserve(mutated);
        for (size_t r : rows) selected.push_back(labels[r]);
        std::shuffle(selected.begin(), selected.end(), rng);
        for (size_t i = 0; i < rows.size(); ++i) {
            labels[rows[i]] = selected[i];
        }
    }
    return roster;
}

}  // namespace lrxfl::data
