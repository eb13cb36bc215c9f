#include "fairrank/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include "fairrank/csv.hpp"
#include "fairrank/rng.hpp"

namespace fairrank {

std::string to_string(Direction d) { return d == Direction::Up ? "up" : "down"; }

std::string to_string(Label l) { return l == Label::Positive ? "+" : "-"; }

Direction direction_from_string(const std::string& text) {
    if (text == "up") return Direction::Up;
    if (text == "down") return Direction::Down;
    throw std::runtime_error("unknown direction '" + text + "' (expected up|down)");
}

namespace {

void require_finite(const std::vector<double>& values, const std::string& column) {
    for (const double v : values) {
        if (!std::isfinite(v)) {
            throw std::runtime_error("column '" + column + "' contains a non-finite value");
        }
    }
}

}  // namespace

Dataset Dataset::make(std::vector<std::string> ids,
                      std::vector<ProtectedColumn> protected_columns,
                      std::vector<LegitimateColumn> legitimate_columns,
                      std::optional<std::vector<Label>> labels) {
    Dataset d;
    std::size_t n = 0;
    if (!legitimate_columns.empty()) n = legitimate_columns.front().values.size();
    else if (!protected_columns.empty()) n = protected_columns.front().values.size();
    else if (labels) n = labels->size();

    for (const auto& col : protected_columns) {
        if (col.values.size() != n) {
            throw std::runtime_error("protected column '" + col.name + "' has inconsistent length");
        }
        require_finite(col.values, col.name);
        if (col.kind == ProtectedKind::Categorical && col.categories.empty()) {
            throw std::runtime_error("categorical column '" + col.name + "' lacks category names");
        }
    }
    for (const auto& col : legitimate_columns) {
        if (col.values.size() != n) {
            throw std::runtime_error("legitimate column '" + col.name + "' has inconsistent length");
        }
        require_finite(col.values, col.name);
    }
    if (labels && labels->size() != n) {
        throw std::runtime_error("label column has inconsistent length");
    }
    if (!ids.empty() && ids.size() != n) {
        throw std::runtime_error("id column has inconsistent length");
    }

    d.n_rows_ = n;
    d.ids_ = std::move(ids);
    d.protected_ = std::move(protected_columns);
    d.legitimate_ = std::move(legitimate_columns);
    d.labels_ = std::move(labels);
    return d;
}

const ProtectedColumn& Dataset::protected_column(const std::string& name) const {
    for (const auto& col : protected_) {
        if (col.name == name) return col;
    }
    throw std::runtime_error("no protected column named '" + name + "'");
}

std::string Dataset::id_of(std::size_t row) const {
    if (!ids_.empty()) return ids_[row];
    return std::to_string(row + 1);
}

const std::vector<Label>& Dataset::labels() const {
    if (!labels_) throw std::runtime_error("dataset has no labels");
    return *labels_;
}

double Dataset::positive_share() const {
    const auto& y = labels();
    if (y.empty()) throw std::runtime_error("cannot compute positive share of an empty dataset");
    std::size_t positives = 0;
    for (const Label l : y) positives += (l == Label::Positive) ? 1 : 0;
    return static_cast<double>(positives) / static_cast<double>(y.size());
}

std::vector<double> Dataset::legitimate_row(std::size_t row) const {
    std::vector<double> out(legitimate_.size());
    for (std::size_t l = 0; l < legitimate_.size(); ++l) out[l] = legitimate_[l].values[row];
    return out;
}

std::vector<std::string> Dataset::legitimate_names() const {
    std::vector<std::string> names;
    names.reserve(legitimate_.size());
    for (const auto& col : legitimate_) names.push_back(col.name);
    return names;
}

Dataset Dataset::subset(const std::vector<std::size_t>& rows) const {
    std::vector<std::string> ids;
    if (!ids_.empty()) {
        ids.reserve(rows.size());
        for (const std::size_t r : rows) ids.push_back(ids_[r]);
    }
    std::vector<ProtectedColumn> prot;
    prot.reserve(protected_.size());
    for (const auto& col : protected_) {
        ProtectedColumn copy{col.name, col.kind, {}, col.categories};
        copy.values.reserve(rows.size());
        for (const std::size_t r : rows) copy.values.push_back(col.values[r]);
        prot.push_back(std::move(copy));
    }
    std::vector<LegitimateColumn> legit;
    legit.reserve(legitimate_.size());
    for (const auto& col : legitimate_) {
        LegitimateColumn copy{col.name, col.direction, {}};
        copy.values.reserve(rows.size());
        for (const std::size_t r : rows) copy.values.push_back(col.values[r]);
        legit.push_back(std::move(copy));
    }
    std::optional<std::vector<Label>> labels;
    if (labels_) {
        labels.emplace();
        labels->reserve(rows.size());
        for (const std::size_t r : rows) labels->push_back((*labels_)[r]);
    }
    return Dataset::make(std::move(ids), std::move(prot), std::move(legit), std::move(labels));
}

ScalingSpec fit_scaling(const Dataset& dataset) {
    if (dataset.n_rows() == 0) {
        throw std::runtime_error("cannot fit scaling on an empty dataset");
    }
    if (dataset.n_legitimate() == 0) {
        throw std::runtime_error("cannot fit scaling without legitimate features");
    }
    ScalingSpec spec;
    spec.features.reserve(dataset.n_legitimate());
    for (const auto& col : dataset.legitimate_columns()) {
        const auto [min_it, max_it] = std::minmax_element(col.values.begin(), col.values.end());
        FeatureScaling f;
        f.name = col.name;
        f.min = *min_it;
        f.max = *max_it;
        f.direction = col.direction;
        f.degenerate = (f.min == f.max);
        spec.features.push_back(std::move(f));
    }
    return spec;
}

namespace {

double scale_value(const FeatureScaling& f, double x) {
    if (f.degenerate) return 0.0;
    double z = (x - f.min) / (f.max - f.min);
    if (f.direction == Direction::Down) z = 1.0 - z;
    // cap: unseen observations may fall outside the fit range
    return std::clamp(z, 0.0, 1.0);
}

}  // namespace

ScaledMatrix apply_scaling(const ScalingSpec& spec,
                           const std::vector<std::vector<double>>& raw_rows) {
    ScaledMatrix z(raw_rows.size(), spec.size());
    for (std::size_t i = 0; i < raw_rows.size(); ++i) {
        if (raw_rows[i].size() != spec.size()) {
            throw std::runtime_error("row " + std::to_string(i + 1) + " has " +
                                     std::to_string(raw_rows[i].size()) + " features, expected " +
                                     std::to_string(spec.size()));
        }
        for (std::size_t l = 0; l < spec.size(); ++l) {
            z.at(i, l) = scale_value(spec.features[l], raw_rows[i][l]);
        }
    }
    return z;
}

ScaledMatrix apply_scaling(const ScalingSpec& spec, const Dataset& dataset) {
    if (dataset.n_legitimate() != spec.size()) {
        throw std::runtime_error("dataset has " + std::to_string(dataset.n_legitimate()) +
                                 " legitimate features, scaling spec has " +
                                 std::to_string(spec.size()));
    }
    ScaledMatrix z(dataset.n_rows(), spec.size());
    for (std::size_t l = 0; l < spec.size(); ++l) {
        const auto& col = dataset.legitimate_columns()[l];
        if (col.name != spec.features[l].name) {
            throw std::runtime_error("feature mismatch: dataset has '" + col.name +
                                     "' where scaling spec expects '" + spec.features[l].name + "'");
        }
        for (std::size_t i = 0; i < dataset.n_rows(); ++i) {
            z.at(i, l) = scale_value(spec.features[l], col.values[i]);
        }
    }
    return z;
}

namespace {

std::vector<std::string> tokenize(const std::string& line) {
    std::vector<std::string> tokens;
    std::istringstream stream(line);
    std::string token;
    while (stream >> token) tokens.push_back(token);
    return tokens;
}

ProtectedKind protected_kind_from_string(const std::string& text, const std::string& where) {
    if (text == "numeric") return ProtectedKind::Numeric;
    if (text == "binary") return ProtectedKind::Binary;
    if (text == "categorical") return ProtectedKind::Categorical;
    throw std::runtime_error(where + ": unknown protected kind '" + text + "'");
}

// key=value attribute, e.g. positive=good
bool parse_attr(const std::string& token, const std::string& key, std::string& out) {
    if (token.rfind(key + "=", 0) == 0) {
        out = token.substr(key.size() + 1);
        return true;
    }
    return false;
}

}  // namespace

SchemaAnnotation parse_schema(std::istream& in, const std::string& source_name) {
    SchemaAnnotation schema;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const auto tokens = tokenize(line);
        if (tokens.empty()) continue;
        const std::string where = source_name + ":" + std::to_string(line_no);
        if (tokens.size() < 2) {
            throw std::runtime_error(where + ": expected '<name> <role> [attrs]'");
        }
        SchemaEntry entry;
        entry.name = tokens[0];
        const std::string& role = tokens[1];
        if (role == "protected") {
            entry.kind = SchemaEntry::Kind::Protected;
            entry.protected_kind = tokens.size() > 2
                                       ? protected_kind_from_string(tokens[2], where)
                                       : ProtectedKind::Numeric;
        } else if (role == "legitimate") {
            if (tokens.size() < 3) {
                throw std::runtime_error(where + ": legitimate feature '" + entry.name +
                                         "' is missing its direction (up|down)");
            }
            entry.kind = SchemaEntry::Kind::Legitimate;
            entry.direction = direction_from_string(tokens[2]);
        } else if (role == "label") {
            entry.kind = SchemaEntry::Kind::LabelColumn;
            for (std::size_t t = 2; t < tokens.size(); ++t) {
                if (!parse_attr(tokens[t], "positive", entry.positive_code) &&
                    !parse_attr(tokens[t], "negative", entry.negative_code)) {
                    throw std::runtime_error(where + ": unknown label attribute '" + tokens[t] + "'");
                }
            }
        } else if (role == "id") {
            entry.kind = SchemaEntry::Kind::IdColumn;
        } else if (role == "ignore") {
            entry.kind = SchemaEntry::Kind::Ignore;
        } else {
            throw std::runtime_error(where + ": unknown role '" + role + "'");
        }
        schema.entries.push_back(std::move(entry));
    }
    if (schema.entries.empty()) {
        throw std::runtime_error(source_name + ": empty schema");
    }
    return schema;
}

SchemaAnnotation load_schema(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    return parse_schema(in, path);
}

void write_schema(std::ostream& out, const SchemaAnnotation& schema) {
    for (const auto& entry : schema.entries) {
        out << entry.name;
        switch (entry.kind) {
            case SchemaEntry::Kind::Protected:
                out << " protected ";
                out << (entry.protected_kind == ProtectedKind::Numeric
                            ? "numeric"
                            : entry.protected_kind == ProtectedKind::Binary ? "binary"
                                                                            : "categorical");
                break;
            case SchemaEntry::Kind::Legitimate:
                out << " legitimate " << to_string(entry.direction);
                break;
            case SchemaEntry::Kind::LabelColumn:
                out << " label";
                if (entry.positive_code != "+") out << " positive=" << entry.positive_code;
                if (entry.negative_code != "-") out << " negative=" << entry.negative_code;
                break;
            case SchemaEntry::Kind::IdColumn:
                out << " id";
                break;
            case SchemaEntry::Kind::Ignore:
                out << " ignore";
                break;
        }
        out << '\n';
    }
}

Dataset dataset_from_csv(const CsvTable& table, const SchemaAnnotation& schema) {
    if (table.rows.empty()) {
        throw std::runtime_error("dataset has no rows");
    }

    // Strict match between schema and header: typos surface immediately.
    std::unordered_set<std::string> schema_names;
    for (const auto& entry : schema.entries) {
        if (!schema_names.insert(entry.name).second) {
            throw std::runtime_error("schema lists column '" + entry.name + "' twice");
        }
        table.column(entry.name);  // throws when missing
    }
    for (const auto& name : table.header) {
        if (!schema_names.count(name)) {
            throw std::runtime_error("CSV column '" + name +
                                     "' is not in the schema (use role 'ignore' to drop it)");
        }
    }

    std::vector<std::string> ids;
    std::vector<ProtectedColumn> prot;
    std::vector<LegitimateColumn> legit;
    std::optional<std::vector<Label>> labels;
    const std::size_t n = table.rows.size();

    for (const auto& entry : schema.entries) {
        const std::size_t c = table.column(entry.name);
        switch (entry.kind) {
            case SchemaEntry::Kind::Ignore:
                break;
            case SchemaEntry::Kind::IdColumn: {
                ids.reserve(n);
                for (const auto& row : table.rows) ids.push_back(row[c]);
                break;
            }
            case SchemaEntry::Kind::LabelColumn: {
                if (labels) throw std::runtime_error("schema declares two label columns");
                labels.emplace();
                labels->reserve(n);
                for (std::size_t i = 0; i < n; ++i) {
                    const std::string& cell = table.rows[i][c];
                    if (cell == entry.positive_code) labels->push_back(Label::Positive);
                    else if (cell == entry.negative_code) labels->push_back(Label::Negative);
                    else {
                        throw std::runtime_error("row " + std::to_string(i + 2) + ": label '" +
                                                 cell + "' is neither '" + entry.positive_code +
                                                 "' nor '" + entry.negative_code + "'");
                    }
                }
                break;
            }
            case SchemaEntry::Kind::Protected: {
                ProtectedColumn col;
                col.name = entry.name;
                col.kind = entry.protected_kind;
                col.values.reserve(n);
                if (col.kind == ProtectedKind::Categorical) {
                    std::unordered_map<std::string, double> index;
                    for (std::size_t i = 0; i < n; ++i) {
                        const std::string& cell = table.rows[i][c];
                        auto [it, inserted] =
                            index.try_emplace(cell, static_cast<double>(col.categories.size()));
                        if (inserted) col.categories.push_back(cell);
                        col.values.push_back(it->second);
                    }
                } else {
                    for (std::size_t i = 0; i < n; ++i) {
                        col.values.push_back(parse_double(
                            table.rows[i][c], "column '" + entry.name + "', row " +
                                                  std::to_string(i + 2)));
                    }
                }
                prot.push_back(std::move(col));
                break;
            }
            case SchemaEntry::Kind::Legitimate: {
                LegitimateColumn col;
                col.name = entry.name;
                col.direction = entry.direction;
                col.values.reserve(n);
                for (std::size_t i = 0; i < n; ++i) {
                    col.values.push_back(parse_double(
                        table.rows[i][c],
                        "column '" + entry.name + "', row " + std::to_string(i + 2)));
                }
                legit.push_back(std::move(col));
                break;
            }
        }
    }

    if (legit.empty()) {
        throw std::runtime_error("schema declares no legitimate features");
    }
    return Dataset::make(std::move(ids), std::move(prot), std::move(legit), std::move(labels));
}

Dataset load_csv_dataset(const std::string& csv_path, const SchemaAnnotation& schema) {
    return dataset_from_csv(read_csv(csv_path), schema);
}

void write_dataset_csv(std::ostream& out, const Dataset& dataset) {
    std::vector<std::string> header;
    header.push_back("id");
    for (const auto& col : dataset.protected_columns()) header.push_back(col.name);
    for (const auto& col : dataset.legitimate_columns()) header.push_back(col.name);
    if (dataset.has_labels()) header.push_back("Y");

    std::vector<std::vector<std::string>> rows;
    rows.reserve(dataset.n_rows());
    for (std::size_t i = 0; i < dataset.n_rows(); ++i) {
        std::vector<std::string> row;
        row.push_back(dataset.id_of(i));
        for (const auto& col : dataset.protected_columns()) {
            if (col.kind == ProtectedKind::Categorical) {
                row.push_back(col.categories[static_cast<std::size_t>(col.values[i])]);
            } else {
                row.push_back(format_double(col.values[i]));
            }
        }
        for (const auto& col : dataset.legitimate_columns()) {
            row.push_back(format_double(col.values[i]));
        }
        if (dataset.has_labels()) row.push_back(to_string(dataset.labels()[i]));
        rows.push_back(std::move(row));
    }
    write_csv(out, header, rows);
}

GermanCreditMapping parse_german_credit_mapping(std::istream& in, const std::string& source_name) {
    GermanCreditMapping mapping;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const auto tokens = tokenize(line);
        if (tokens.empty()) continue;
        const std::string where = source_name + ":" + std::to_string(line_no);
        const std::string& role = tokens[0];

        if (role == "label") {
            if (tokens.size() < 2) throw std::runtime_error(where + ": label needs a column index");
            mapping.label_index = static_cast<std::size_t>(std::stoul(tokens[1]));
            // optional name token before the code attributes
            std::size_t first_attr = 2;
            if (tokens.size() > 2 && tokens[2].find('=') == std::string::npos) first_attr = 3;
            for (std::size_t t = first_attr; t < tokens.size(); ++t) {
                if (!parse_attr(tokens[t], "positive", mapping.positive_code) &&
                    !parse_attr(tokens[t], "negative", mapping.negative_code)) {
                    throw std::runtime_error(where + ": unknown label attribute '" + tokens[t] + "'");
                }
            }
            continue;
        }

        if (role != "protected" && role != "legitimate") {
            throw std::runtime_error(where + ": unknown role '" + role + "'");
        }
        if (tokens.size() < 4) {
            throw std::runtime_error(where + ": expected '<role> <index> <name> <kind|direction> [codes]'");
        }
        GermanCreditMapping::Column col;
        col.index = static_cast<std::size_t>(std::stoul(tokens[1]));
        col.name = tokens[2];
        std::size_t first_code = 4;
        if (role == "protected") {
            col.role = FeatureRole::Protected;
            col.protected_kind = protected_kind_from_string(tokens[3], where);
        } else {
            col.role = FeatureRole::Legitimate;
            col.direction = direction_from_string(tokens[3]);
        }
        for (std::size_t t = first_code; t < tokens.size(); ++t) {
            const auto eq = tokens[t].find('=');
            if (eq == std::string::npos) {
                throw std::runtime_error(where + ": expected CODE=value, got '" + tokens[t] + "'");
            }
            col.encoding.emplace_back(tokens[t].substr(0, eq),
                                      parse_double(tokens[t].substr(eq + 1), where));
        }
        mapping.columns.push_back(std::move(col));
    }
    if (mapping.columns.empty()) {
        throw std::runtime_error(source_name + ": mapping declares no columns");
    }
    if (mapping.label_index == 0) {
        throw std::runtime_error(source_name + ": mapping declares no label column");
    }
    return mapping;
}

GermanCreditMapping load_german_credit_mapping(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    return parse_german_credit_mapping(in, path);
}

Dataset load_german_credit(const std::string& data_path, const GermanCreditMapping& mapping) {
    std::ifstream in(data_path);
    if (!in) throw std::runtime_error("cannot open '" + data_path + "'");

    std::vector<std::vector<std::string>> records;
    std::string line;
    std::size_t line_no = 0;
    std::size_t field_count = 0;
    while (std::getline(in, line)) {
        ++line_no;
        auto tokens = tokenize(line);
        if (tokens.empty()) continue;
        if (field_count == 0) field_count = tokens.size();
        if (tokens.size() != field_count) {
            throw std::runtime_error(data_path + ":" + std::to_string(line_no) + ": expected " +
                                     std::to_string(field_count) + " fields, got " +
                                     std::to_string(tokens.size()));
        }
        records.push_back(std::move(tokens));
    }
    if (records.empty()) {
        throw std::runtime_error(data_path + ": no records");
    }

    const auto field_at = [&](const std::vector<std::string>& rec, std::size_t index_1based,
                              std::size_t row) -> const std::string& {
        if (index_1based == 0 || index_1based > rec.size()) {
            throw std::runtime_error(data_path + ": row " + std::to_string(row + 1) +
                                     " has no column " + std::to_string(index_1based));
        }
        return rec[index_1based - 1];
    };

    std::vector<ProtectedColumn> prot;
    std::vector<LegitimateColumn> legit;

    for (const auto& col_spec : mapping.columns) {
        const auto encode = [&](const std::string& code, std::size_t row) -> double {
            for (const auto& [key, value] : col_spec.encoding) {
                if (key == code) return value;
            }
            throw std::runtime_error(data_path + ": row " + std::to_string(row + 1) + ": code '" +
                                     code + "' not covered by the mapping for '" + col_spec.name +
                                     "'");
        };
        if (col_spec.role == FeatureRole::Protected) {
            ProtectedColumn col;
            col.name = col_spec.name;
            col.kind = col_spec.protected_kind;
            col.values.reserve(records.size());
            if (col.kind == ProtectedKind::Categorical) {
                std::unordered_map<std::string, double> index;
                for (std::size_t i = 0; i < records.size(); ++i) {
                    const std::string& cell = field_at(records[i], col_spec.index, i);
                    auto [it, inserted] =
                        index.try_emplace(cell, static_cast<double>(col.categories.size()));
                    if (inserted) col.categories.push_back(cell);
                    col.values.push_back(it->second);
                }
            } else {
                for (std::size_t i = 0; i < records.size(); ++i) {
                    const std::string& cell = field_at(records[i], col_spec.index, i);
                    col.values.push_back(col_spec.encoding.empty()
                                             ? parse_double(cell, col_spec.name)
                                             : encode(cell, i));
                }
            }
            prot.push_back(std::move(col));
        } else {
            LegitimateColumn col;
            col.name = col_spec.name;
            col.direction = col_spec.direction;
            col.values.reserve(records.size());
            for (std::size_t i = 0; i < records.size(); ++i) {
                const std::string& cell = field_at(records[i], col_spec.index, i);
                col.values.push_back(col_spec.encoding.empty() ? parse_double(cell, col_spec.name)
                                                               : encode(cell, i));
            }
            legit.push_back(std::move(col));
        }
    }

    std::vector<Label> labels;
    labels.reserve(records.size());
    for (std::size_t i = 0; i < records.size(); ++i) {
        const std::string& cell = field_at(records[i], mapping.label_index, i);
        if (cell == mapping.positive_code) labels.push_back(Label::Positive);
        else if (cell == mapping.negative_code) labels.push_back(Label::Negative);
        else {
            throw std::runtime_error(data_path + ": row " + std::to_string(i + 1) + ": label '" +
                                     cell + "' is neither '" + mapping.positive_code + "' nor '" +
                                     mapping.negative_code + "'");
        }
    }

    return Dataset::make({}, std::move(prot), std::move(legit), std::move(labels));
}

std::pair<Dataset, Dataset> train_test_split(const Dataset& dataset, std::size_t test_size,
                                             std::uint64_t seed) {
    if (test_size >= dataset.n_rows()) {
        throw std::invalid_argument("test_size (" + std::to_string(test_size) +
                                    ") must be smaller than the dataset (" +
                                    std::to_string(dataset.n_rows()) + ")");
    }
    std::vector<std::size_t> order(dataset.n_rows());
    std::iota(order.begin(), order.end(), 0);
    Rng rng(derive_seed(seed, "train-test-split"));
    rng.shuffle(order);

    const std::vector<std::size_t> test_rows(order.begin(), order.begin() + test_size);
    const std::vector<std::size_t> train_rows(order.begin() + test_size, order.end());
    return {dataset.subset(train_rows), dataset.subset(test_rows)};
}

}  // namespace fairrank
